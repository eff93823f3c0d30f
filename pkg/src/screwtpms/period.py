"""The one-parameter period problem: psi(tau), the two angles, and the curve.

psi(tau) is the integral of G along the straight segment from 0 to tau/3 (by
the symmetry through tau/6 it equals the integral of 1/G).  The surface data
closes up if and only if

    theta_h(tau) := arg psi(tau)  equals  theta_v(tau) := arg(tau - 1) - pi/2,

and the solutions form a curve over Re(tau) in (0, 1) that is traced here by
bisection in Im(tau) plus continuation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import BracketError, DomainError, QuadratureError
from .gaussmap import gsq
from .quad import segment_plan

PSI_RTOL = 1e-9
BRACKET_IM_TOP = 10.0
BRACKET_IM_PAD = 1e-3
BISECT_MAX_ITER = 60


def wrap_angle(x):
    """Wrap to (-pi, pi]."""
    w = np.remainder(np.asarray(x, dtype=float) + np.pi, 2 * np.pi) - np.pi
    w = np.where(w == -np.pi, np.pi, w)
    return float(w) if w.ndim == 0 else w


@dataclass(frozen=True)
class SearchDomain:
    """Omega_t = { Im tau > 0, 0 < Re tau < 1, |tau-1/3| > 1/3, |tau-2/3| > 1/3 }."""

    def contains(self, tau):
        tau = complex(tau)
        return (
            tau.imag > 0
            and 0 < tau.real < 1
            and abs(tau - 1 / 3) > 1 / 3
            and abs(tau - 2 / 3) > 1 / 3
        )

    def arc_im(self, re_tau):
        """Largest Im on the two excluded arcs at this Re (0 if clear of both)."""
        im = 0.0
        if re_tau < 2 / 3:
            im = max(im, np.sqrt(max(1 / 9 - (re_tau - 1 / 3) ** 2, 0.0)))
        if re_tau > 1 / 3:
            im = max(im, np.sqrt(max(1 / 9 - (re_tau - 2 / 3) ** 2, 0.0)))
        return im

    def default_bracket(self, re_tau):
        return (self.arc_im(re_tau) + BRACKET_IM_PAD, BRACKET_IM_TOP)


OMEGA_T = SearchDomain()


@dataclass
class PeriodDiagnostics:
    tau: complex
    psi: complex
    theta_h: float
    theta_v: float
    residual: float
    extra_roots: list = field(default_factory=list)


class SegmentG:
    """G continued along the straight segment 0 -> tau/3.

    The sign is seeded with the principal root at the midpoint tau/6 (where
    G^2 = 1 by normalization, so G(tau/6) = +1) and continued outward with a
    sampling that clusters geometrically toward both branch-point endpoints.
    """

    def __init__(self, tau, t_min=5e-8, ratio=1.15):
        self.tau = tau
        n_geo = int(np.ceil(np.log(0.08 / t_min) / np.log(ratio)))
        geo = 0.08 * ratio ** (-np.arange(n_geo + 1, dtype=float))
        ts = np.unique(np.concatenate([geo, 1 - geo, np.linspace(0.08, 0.92, 97)]))
        self.ts = ts
        g2 = gsq(ts * tau / 3, tau)
        g = np.sqrt(g2)
        i0 = int(np.argmin(np.abs(ts - 0.5)))
        if abs(g[i0] - 1) > abs(g[i0] + 1):
            g[i0] = -g[i0]
        for i in range(i0 + 1, len(ts)):
            if abs(g[i] - g[i - 1]) > abs(g[i] + g[i - 1]):
                g[i] = -g[i]
        for i in range(i0 - 1, -1, -1):
            if abs(g[i] - g[i + 1]) > abs(g[i] + g[i + 1]):
                g[i] = -g[i]
        self.g = g

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        g = np.sqrt(gsq(t * self.tau / 3, self.tau))
        ref = self.g[np.clip(np.searchsorted(self.ts, t), 0, len(self.ts) - 1)]
        flip = np.abs(g - ref) > np.abs(g + ref)
        return np.where(flip, -g, g)


def _psi_with_plan(tau, seg, n_mid, inverse):
    t, w = segment_plan(n_mid_panels=n_mid)
    g = seg(t)
    if inverse:
        g = 1.0 / g
    return np.sum(w * g) * tau / 3


def psi(tau, rtol=PSI_RTOL, inverse=False):
    """Integral of G (or 1/G) along the segment 0 -> tau/3.

    The integrable sqrt singularities at both endpoints are removed exactly
    by the w^2 substitution of the quadrature plan.  Raises QuadratureError
    if two refinement levels disagree beyond rtol.
    """
    tau = complex(tau)
    if tau.imag <= 0:
        raise DomainError("tau must lie in the upper half plane")
    seg = SegmentG(tau)
    coarse = _psi_with_plan(tau, seg, 6, inverse)
    fine = _psi_with_plan(tau, seg, 12, inverse)
    err = abs(fine - coarse) / max(abs(fine), 1e-300)
    if err > rtol:
        raise QuadratureError(
            "psi quadrature did not converge: achieved %.3e > %.3e" % (err, rtol),
            achieved=err,
        )
    return fine


def psi_symmetry_defect(tau):
    """Relative difference between int G and int 1/G (should vanish)."""
    seg = SegmentG(tau)
    a = _psi_with_plan(tau, seg, 12, False)
    b = _psi_with_plan(tau, seg, 12, True)
    return abs(a - b) / abs(a)


def theta_v(tau):
    """Vertical-alignment angle arg(tau - 1) - pi/2, wrapped to (-pi, pi]."""
    tau = complex(tau)
    if tau == 1:
        raise DomainError("theta_v undefined at tau = 1")
    return wrap_angle(np.angle(tau - 1) - np.pi / 2)


def theta_h(tau, rtol=PSI_RTOL):
    """Horizontal-alignment angle arg(psi(tau))."""
    return float(np.angle(psi(tau, rtol=rtol)))


def period_residual(tau, rtol=PSI_RTOL):
    """theta_h - theta_v wrapped to (-pi, pi]; zero exactly on the curve."""
    return wrap_angle(theta_h(tau, rtol=rtol) - theta_v(tau))


def _diagnostics(tau, extra=()):
    p = psi(tau)
    th = float(np.angle(p))
    tv = theta_v(tau)
    return PeriodDiagnostics(
        tau=tau,
        psi=p,
        theta_h=th,
        theta_v=tv,
        residual=wrap_angle(th - tv),
        extra_roots=list(extra),
    )


def solve_im(re_tau, bracket=None, tol=1e-9, scan=12):
    """Solve the period condition in Im(tau) at fixed Re(tau) by bisection.

    The residual is negative just above the excluded arcs and positive for
    large Im(tau); a coarse scan detects extra sign changes, which are
    reported through a multi-root warning and the extra_roots field.
    """
    if not 0 < re_tau < 1:
        raise DomainError("re_tau must lie in (0, 1)")
    if bracket is None:
        bracket = OMEGA_T.default_bracket(re_tau)
    lo, hi = float(bracket[0]), float(bracket[1])

    ims = np.geomspace(lo, hi, scan)
    res = np.array([period_residual(re_tau + 1j * im) for im in ims])
    sign_changes = [
        (ims[i], ims[i + 1])
        for i in range(len(ims) - 1)
        if np.sign(res[i]) != np.sign(res[i + 1])
    ]
    if not sign_changes:
        raise BracketError(
            "no sign change of the period residual on Im in [%g, %g] at Re=%g"
            % (lo, hi, re_tau)
        )
    if len(sign_changes) > 1:
        warnings.warn(
            "period residual changes sign %d times at Re=%g; returning all roots"
            % (len(sign_changes), re_tau),
            RuntimeWarning,
        )

    roots = [_bisect(re_tau, a, b, tol) for a, b in sign_changes]
    main = _diagnostics(re_tau + 1j * roots[0], extra=[re_tau + 1j * r for r in roots[1:]])
    return main


def _bisect(re_tau, a, b, tol):
    fa = period_residual(re_tau + 1j * a)
    m = 0.5 * (a + b)
    for _ in range(BISECT_MAX_ITER):
        m = 0.5 * (a + b)
        fm = period_residual(re_tau + 1j * m)
        if abs(fm) < tol:
            return m
        if np.sign(fm) == np.sign(fa):
            a, fa = m, fm
        else:
            b = m
    fm = period_residual(re_tau + 1j * m)
    if abs(fm) >= tol:
        raise QuadratureError(
            "bisection stalled at residual %.3e > %.3e" % (abs(fm), tol), achieved=abs(fm)
        )
    return m


def trace_curve(re_samples, tol=1e-9):
    """Solve along a list of Re(tau) samples, seeding each bracket from the
    previous root."""
    out = []
    prev_im = None
    for re in re_samples:
        if prev_im is None:
            diag = solve_im(re, tol=tol)
        else:
            lo_min = OMEGA_T.arc_im(re) + BRACKET_IM_PAD
            lo = max(prev_im * 0.7, lo_min)
            hi = min(max(prev_im * 1.5, lo * 1.5), BRACKET_IM_TOP)
            try:
                diag = solve_im(re, bracket=(lo, hi), tol=tol)
            except BracketError:
                diag = solve_im(re, tol=tol)
        out.append(diag)
        prev_im = diag.tau.imag
    return out
