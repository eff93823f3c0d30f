"""Squared Gauss map G^2 on the quotient torus and continuation of G = sqrt(G^2).

G^2 is the degree-3 elliptic function with simple zeros at 0, 1/3, 2/3 and
simple poles at tau/3 + k/3, normalized so that G^2(tau/6) = 1.  The surface
is parametrized on the double cover of the torus branched over those six
points; three branch cuts run from tau/3 + k/3 straight up to tau + k/3, and
square-root continuation flips sheet exactly when a path crosses a cut.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContinuationError, DomainError, PoleError
from .theta import log_dz_theta, theta

POLE_EXCLUSION = 1e-9      # evaluation guard around poles
BRANCH_EXCLUSION = 1e-4    # continuation guard around all branch points
MAX_REL_JUMP = 0.2         # continuation refinement threshold on G^2
MAX_REFINE_DEPTH = 48


def rho_prime(tau):
    """Normalization factor of the one-theta-ratio form, G^2(tau/6) = 1.

    Note the exponent sign: -exp(-i pi tau / 3).  The opposite sign fails the
    defining normalization at the symmetry center tau/6.
    """
    return -np.exp(-1j * np.pi * tau / 3)


@dataclass(frozen=True)
class LopezRosNormalization:
    tau: complex

    @property
    def rho_prime(self) -> complex:
        return rho_prime(self.tau)


def zeros_of_gsq(tau):
    return np.array([0.0, 1.0 / 3.0, 2.0 / 3.0], dtype=complex)


def poles_of_gsq(tau):
    return np.array([tau / 3, tau / 3 + 1.0 / 3.0, tau / 3 + 2.0 / 3.0])


@dataclass(frozen=True)
class BranchedTorus:
    """Branch points and cuts of the double cover of C/(Z + tau Z)."""

    tau: complex
    branch_points: np.ndarray = field(default=None)
    cuts: tuple = field(default=None)

    def __post_init__(self):
        if complex(self.tau).imag <= 0:
            raise DomainError("tau must lie in the upper half plane")
        if self.branch_points is None:
            pts = np.concatenate([zeros_of_gsq(self.tau), poles_of_gsq(self.tau)])
            object.__setattr__(self, "branch_points", pts)
        if self.cuts is None:
            tau = self.tau
            cuts = tuple((tau / 3 + k / 3, tau + k / 3) for k in range(3))
            object.__setattr__(self, "cuts", cuts)

    def is_three_division(self, atol=1e-12):
        """Every branch point p satisfies 3p = 0 modulo the lattice."""
        for p in self.branch_points:
            w = 3 * p
            b = w.imag / self.tau.imag
            a = w.real - round(b) * self.tau.real
            if abs(a - round(a)) > atol or abs(b - round(b)) > atol:
                return False
        return True


def reduce_to_cell(z, tau, centered=False):
    """Lattice-reduce z; G^2 is invariant under this."""
    z = np.asarray(z, dtype=complex)
    rnd = np.round if centered else np.floor
    n = rnd(z.imag / tau.imag)
    m = rnd(z.real - n * np.real(tau))
    return z - m - n * tau


def _dist_to(z, points, tau):
    """Min distance from each z to a point set, modulo the lattice."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    d = np.full(z.shape, np.inf)
    for p in points:
        w = reduce_to_cell(z - p, tau, centered=True)
        for dm in (-1, 0, 1):
            for dn in (-1, 0, 1):
                d = np.minimum(d, np.abs(w + dm + dn * tau))
    return d


def gsq(z, tau):
    """G^2(z) via the tripled-modulus theta ratio."""
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    zr = reduce_to_cell(np.atleast_1d(z), tau, centered=True)
    dpole = _dist_to(zr, poles_of_gsq(tau), tau)
    if np.any(dpole < POLE_EXCLUSION):
        bad = np.atleast_1d(z)[dpole < POLE_EXCLUSION][0]
        raise PoleError("G^2 evaluated at a pole near z=%s" % bad, pole=complex(bad))
    val = rho_prime(tau) * np.exp(2j * np.pi * zr) * theta(3 * zr, 3 * tau) / theta(
        3 * zr - tau, 3 * tau
    )
    return complex(val[0]) if scalar else val


def gsq_product_form(z, tau):
    """G^2(z) as a ratio of six theta factors on the original lattice.

    Cross-check oracle for gsq; the Lopez-Ros factor is fixed numerically by
    the normalization G^2(tau/6) = 1.
    """
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    zr = reduce_to_cell(np.atleast_1d(z), tau, centered=True)
    dpole = _dist_to(zr, poles_of_gsq(tau), tau)
    if np.any(dpole < POLE_EXCLUSION):
        bad = np.atleast_1d(z)[dpole < POLE_EXCLUSION][0]
        raise PoleError("G^2 evaluated at a pole near z=%s" % bad, pole=complex(bad))

    def ratio(w):
        num = theta(w, tau) * theta(w - 1 / 3, tau) * theta(w + 1 / 3, tau)
        den = (
            theta(w + 2 * tau / 3, tau)
            * theta(w - tau / 3 - 1 / 3, tau)
            * theta(w - tau / 3 + 1 / 3, tau)
        )
        return num / den

    rho = 1.0 / ratio(np.atleast_1d(tau / 6))[0]
    val = rho * ratio(zr)
    return complex(val[0]) if scalar else val


def gsq_log_dz(z, tau):
    """(G^2)'/G^2, used to locate the zeros of dG (the flat points)."""
    z = np.asarray(z, dtype=complex)
    zr = reduce_to_cell(z, tau, centered=True)
    return (
        2j * np.pi
        + 3 * log_dz_theta(3 * zr, 3 * tau)
        - 3 * log_dz_theta(3 * zr - tau, 3 * tau)
    )


def flat_points(tau, newton_tol=1e-13, dedup_tol=1e-8):
    """The six zeros of (G^2)' on the torus, reduced into the unit cell.

    Each lifts to two points of the double cover; their images are the flat
    points (K = 0) of the surface.
    """
    seeds = []
    for a in np.linspace(0.05, 0.95, 7):
        for b in np.linspace(0.05, 0.95, 7):
            seeds.append(a + b * tau)
    roots = []
    branch = np.concatenate([zeros_of_gsq(tau), poles_of_gsq(tau)])
    h = 1e-6
    for z in seeds:
        z = complex(z)
        ok = False
        for _ in range(60):
            f = gsq_log_dz(z, tau)
            df = (gsq_log_dz(z + h, tau) - gsq_log_dz(z - h, tau)) / (2 * h)
            if df == 0:
                break
            step = f / df
            z = z - step
            if abs(step) < newton_tol:
                ok = True
                break
        if not ok or abs(gsq_log_dz(z, tau)) > 1e-6:
            continue
        z0 = complex(reduce_to_cell(z, tau))
        if _dist_to(z0, branch, tau)[0] < 10 * BRANCH_EXCLUSION:
            continue
        if any(abs(reduce_to_cell(z0 - r, tau, centered=True)) < dedup_tol for r in roots):
            continue
        roots.append(z0)
    roots.sort(key=lambda w: (round(w.imag, 9), round(w.real, 9)))
    return np.array(roots)


# ---------------------------------------------------------------------------
# Paths on the branched torus and square-root continuation
# ---------------------------------------------------------------------------


def _lattice_coords(z, tau):
    """z = a + b*tau with real a, b."""
    z = np.asarray(z, dtype=complex)
    b = z.imag / tau.imag
    a = z.real - b * tau.real
    return a, b


def _segment_crosses_cut(z1, z2, tau):
    """Number of branch-cut crossings of the straight segment z1 -> z2.

    In lattice coordinates z = a + b*tau the cuts are the lines a = k/3
    (mod 1) restricted to b in (1/3, 1) mod 1.  Points exactly on a cut are
    assigned to its right side (half-open rule), so parity is never double
    counted.
    """
    a1, b1 = _lattice_coords(z1, tau)
    a2, b2 = _lattice_coords(z2, tau)
    crossings = 0
    lo = int(np.floor(3 * min(a1, a2))) - 1
    hi = int(np.ceil(3 * max(a1, a2))) + 1
    for k3 in range(lo, hi + 1):
        c = k3 / 3.0
        if (a1 < c) == (a2 < c):
            continue
        t = (c - a1) / (a2 - a1)
        bc = (b1 + t * (b2 - b1)) % 1.0
        if 1 / 3 < bc < 1:
            crossings += 1
    return crossings


@dataclass
class TorusPath:
    """Sampled path on the branched double cover with sheet bookkeeping."""

    points: np.ndarray            # complex samples
    sheets: np.ndarray            # 0|1 per sample
    max_step: float = 0.05

    @classmethod
    def from_points(cls, points, tau, start_sheet=0, max_step=0.05):
        """Resample to the step bound and track cut crossings."""
        pts = [complex(points[0])]
        for z in points[1:]:
            z = complex(z)
            prev = pts[-1]
            n_sub = max(1, int(np.ceil(abs(z - prev) / max_step)))
            for j in range(1, n_sub + 1):
                pts.append(prev + (z - prev) * j / n_sub)
        pts = np.array(pts)
        sheets = np.empty(len(pts), dtype=int)
        sheets[0] = start_sheet
        for i in range(1, len(pts)):
            flips = _segment_crosses_cut(pts[i - 1], pts[i], tau)
            sheets[i] = (sheets[i - 1] + flips) % 2
        return cls(points=pts, sheets=sheets, max_step=max_step)

    @property
    def start(self):
        return self.points[0]


def continue_G(path, tau, seed):
    """Continue G = sqrt(G^2) along the path, starting from the given seed.

    The seed must satisfy seed^2 = G^2(path.start) to 1e-8 relative.  Each
    successive value is the square root closer to the previous one; steps are
    bisected until the relative jump of G^2 is below MAX_REL_JUMP.
    """
    pts = np.asarray(path.points if isinstance(path, TorusPath) else path, dtype=complex)
    branch = np.concatenate([zeros_of_gsq(tau), poles_of_gsq(tau)])
    if np.any(_dist_to(pts, branch, tau) < BRANCH_EXCLUSION):
        raise ContinuationError(
            "path approaches a branch point closer than %g" % BRANCH_EXCLUSION
        )

    g2_start = gsq(pts[0], tau)
    if abs(seed * seed - g2_start) > 1e-8 * abs(g2_start):
        raise ContinuationError("seed^2 does not match G^2 at the path start")

    values = np.empty(len(pts), dtype=complex)
    values[0] = seed
    for i in range(1, len(pts)):
        values[i] = _step(pts[i - 1], values[i - 1], pts[i], tau, 0)
    return values


def _step(z_prev, g_prev, z_next, tau, depth):
    g2_prev = g_prev * g_prev
    g2_next = gsq(z_next, tau)
    scale = max(abs(g2_prev), abs(g2_next))
    if abs(g2_next - g2_prev) > MAX_REL_JUMP * scale:
        if depth >= MAX_REFINE_DEPTH:
            raise ContinuationError(
                "step refinement failed near z=%s: G^2 jump cannot be bounded"
                % z_next
            )
        z_mid = 0.5 * (z_prev + z_next)
        g_mid = _step(z_prev, g_prev, z_mid, tau, depth + 1)
        return _step(z_mid, g_mid, z_next, tau, depth + 1)
    r = np.sqrt(g2_next)
    return r if abs(r - g_prev) <= abs(r + g_prev) else -r


def winding_number(center, tau, radius=1e-2, samples=720):
    """Winding of G^2 around a small circle, by argument-principle quadrature."""
    t = np.linspace(0, 2 * np.pi, samples, endpoint=False)
    z = center + radius * np.exp(1j * t)
    vals = gsq(z, tau)
    dphi = np.angle(np.roll(vals, -1) / vals)
    return int(np.round(dphi.sum() / (2 * np.pi)))
