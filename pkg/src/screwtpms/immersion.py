"""Weierstrass immersion of the branched torus and the fundamental patch mesh.

The immersion is F(p) = scale * Re( e^{-i theta} Psi(p) ) with the
holomorphic primitive

    Psi(z) = int ( (1/G - G)/2,  i (1/G + G)/2,  1 ) dz

accumulated along a spanning tree of grid edges (telescoping).  Sheet 1 of
the double cover carries -G, so its primitive is the sheet-0 primitive with
the first two components negated plus an integration constant fixed by
continuation across a branch cut.

Both sheets are triangulated over the fundamental parallelogram with the
grid graded toward the six branch points; vertices along the three cuts are
duplicated and the resulting open patch carries explicit seam lists that the
welding stage turns into a closed translational unit cell.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContinuationError, DomainError
from .gaussmap import (
    _step,
    flat_points,
    gsq,
    poles_of_gsq,
    reduce_to_cell,
)
from .pmesh import PeriodicMesh, Seam
from .period import solve_im, theta_h
from .quad import edge_plan

GRADE_RATIO = 0.7
GRADE_LEVELS = 6
EDGE_ORDER = 12
BRANCH_EDGE_ORDER = 16


@dataclass
class WeierstrassData:
    """Everything needed to evaluate the immersion."""

    tau: complex
    theta: float                  # associate angle of the height differential
    scale: float = 1.0            # modulus r of dh
    base_point: complex = 0.0     # image anchored at the origin (sheet 0)

    @classmethod
    def from_re_tau(cls, re_tau, theta="auto", scale=1.0):
        """Solve the period problem at this Re(tau); 'auto' uses theta_h(tau*)."""
        diag = solve_im(re_tau)
        ang = diag.theta_h if theta == "auto" else float(theta)
        return cls(tau=diag.tau, theta=ang, scale=scale)

    @classmethod
    def at_tau(cls, tau, theta="auto", scale=1.0):
        ang = theta_h(tau) if theta == "auto" else float(theta)
        return cls(tau=tau, theta=ang, scale=scale)


def _phi(g):
    """Integrand triple as a (3, ...) complex array."""
    inv = 1.0 / g
    return np.stack([0.5 * (inv - g), 0.5j * (inv + g), np.ones_like(g)])


def graded_axis(n, blocks, ratio=GRADE_RATIO, levels=GRADE_LEVELS):
    """Uniform cells per block with geometric refinement toward block ends."""
    vals = []
    total = blocks[-1][1] - blocks[0][0]
    for a, b in blocks:
        m = max(2, int(round(n * (b - a) / total)))
        base = np.linspace(a, b, m + 1)
        d = base[1] - base[0]
        vals.append(base)
        if levels > 0:
            vals.append(a + d * ratio ** np.arange(1, levels + 1))
            vals.append(b - d * ratio ** np.arange(1, levels + 1))
    return np.unique(np.concatenate(vals))


@dataclass
class _Grid:
    u: np.ndarray
    v: np.ndarray
    i_cuts: tuple        # u-indices of 1/3 and 2/3
    j_pole: int          # v-index of 1/3
    tau: complex

    @property
    def nu(self):
        return len(self.u) - 1

    @property
    def nv(self):
        return len(self.v) - 1

    def z(self, i, j):
        return self.u[i] + self.v[j] * self.tau

    def zeros_cols(self):
        return (0, self.i_cuts[0], self.i_cuts[1], self.nu)


def _make_grid(tau, n_u, n_v, grade_levels=GRADE_LEVELS, grade_ratio=GRADE_RATIO):
    if n_u < 16 or n_v < 16:
        raise DomainError("patch resolution must be at least 16")
    u = graded_axis(n_u, [(0, 1 / 3), (1 / 3, 2 / 3), (2 / 3, 1)],
                    ratio=grade_ratio, levels=grade_levels)
    v = graded_axis(n_v, [(0, 1 / 3), (1 / 3, 1)],
                    ratio=grade_ratio, levels=grade_levels)
    i_cuts = tuple(int(np.searchsorted(u, k / 3)) for k in (1, 2))
    j_pole = int(np.searchsorted(v, 1 / 3))
    assert abs(u[i_cuts[0]] - 1 / 3) < 1e-14 and abs(v[j_pole] - 1 / 3) < 1e-14
    return _Grid(u=u, v=v, i_cuts=i_cuts, j_pole=j_pole, tau=tau)


class _SheetField:
    """Continued G and telescoped primitive Psi over the slit parameter square."""

    def __init__(self, grid):
        self.grid = grid
        g = grid
        tau = g.tau
        self.nu, self.nv = g.nu, g.nv
        self.n_base = (g.nu + 1) * (g.nv + 1)
        self.n_dup_rows = g.nv - g.j_pole          # rows j_pole+1 .. nv
        self.n_sheet = self.n_base + 2 * self.n_dup_rows
        self._branch_nodes = self._find_branch_nodes()
        self._continue_gauss()
        self._integrate()

    # -- indexing ------------------------------------------------------
    def vid(self, i, j):
        return i * (self.nv + 1) + j

    def vid_dup(self, cut_idx, j):
        g = self.grid
        return self.n_base + cut_idx * self.n_dup_rows + (j - g.j_pole - 1)

    def corner(self, i, j, cell_i):
        """Vertex id of grid corner (i, j) as seen from the cell at column cell_i."""
        g = self.grid
        if j > g.j_pole and i in g.i_cuts and cell_i >= i:
            return self.vid_dup(g.i_cuts.index(i), j)
        return self.vid(i, j)

    def _find_branch_nodes(self):
        g = self.grid
        zeros = [(i, 0) for i in g.zeros_cols()] + [(i, g.nv) for i in g.zeros_cols()]
        poles = [(i, g.j_pole) for i in g.zeros_cols()]
        return {"zero": zeros, "pole": poles}

    # -- G continuation -------------------------------------------------
    def _continue_gauss(self):
        g = self.grid
        tau = g.tau
        Z = g.u[:, None] + g.v[None, :] * tau
        self.Z = Z
        g2 = np.empty(Z.shape, dtype=complex)
        mask = np.zeros(Z.shape, dtype=bool)
        for (i, j) in self._branch_nodes["pole"]:
            mask[i, j] = True
        g2[~mask] = gsq(Z[~mask], tau)
        g2[mask] = np.inf
        for (i, j) in self._branch_nodes["zero"]:
            g2[i, j] = 0.0
        self.g2 = g2

        gv = np.full(Z.shape, np.nan + 0j)
        # anchor: continue from tau/6 (where G = +1) to the nearest column-0 node
        j6 = int(np.argmin(np.abs(g.v - 1 / 6)))
        if g.v[j6] >= 1 / 3:
            j6 = g.j_pole - 1
        anchor = _chain_step(tau / 6, 1.0 + 0j, Z[0, j6], tau)
        gv[0, j6] = anchor

        # row sweep at j6
        for i in range(1, g.nu + 1):
            gv[i, j6] = self._match(g2[i, j6], gv[i - 1, j6], Z[i - 1, j6], Z[i, j6])

        cutset = set(g.i_cuts) | {0, g.nu}
        free = np.array([i not in cutset for i in range(g.nu + 1)])
        # downward sweep (all columns; no cuts below the pole row)
        for j in range(j6 - 1, -1, -1):
            self._column_step(gv, g2, Z, j + 1, j, np.ones(g.nu + 1, dtype=bool))
        # upward sweep to the pole row (all columns)
        for j in range(j6 + 1, g.j_pole + 1):
            self._column_step(gv, g2, Z, j - 1, j, np.ones(g.nu + 1, dtype=bool))
        # above the pole row: free columns vertically, cut columns horizontally
        for j in range(g.j_pole + 1, g.nv + 1):
            self._column_step(gv, g2, Z, j - 1, j, free)
            gv[0, j] = self._match(g2[0, j], gv[1, j], Z[1, j], Z[0, j])
            gv[g.nu, j] = self._match(
                g2[g.nu, j], gv[g.nu - 1, j], Z[g.nu - 1, j], Z[g.nu, j]
            )
            for ic in g.i_cuts:
                gv[ic, j] = self._match(
                    g2[ic, j], gv[ic - 1, j], Z[ic - 1, j], Z[ic, j]
                )
        self.gauss = gv
        # right-side duplicates along the interior cuts
        dup = np.full((2, g.nv + 1), np.nan + 0j)
        for c, ic in enumerate(g.i_cuts):
            for j in range(g.j_pole + 1, g.nv + 1):
                dup[c, j] = self._match(
                    g2[ic, j], gv[ic + 1, j], Z[ic + 1, j], Z[ic, j]
                )
        self.gauss_dup = dup

    def _match(self, g2_target, g_ref, z_ref, z_target):
        """Square root of g2_target continuous from the reference value."""
        if not np.isfinite(g2_target.real) or g2_target == 0:
            return np.inf + 0j if not np.isfinite(g2_target.real) else 0j
        tau = self.grid.tau
        g2_ref = g_ref * g_ref
        scale = max(abs(g2_target), abs(g2_ref))
        if abs(g2_target - g2_ref) > 0.5 * scale:
            return _chain_step(z_ref, g_ref, z_target, tau)
        r = np.sqrt(g2_target)
        return r if abs(r - g_ref) <= abs(r + g_ref) else -r

    def _column_step(self, gv, g2, Z, j_from, j_to, cols):
        g = self.grid
        for i in np.nonzero(cols)[0]:
            if not np.isfinite(g2[i, j_to].real) or g2[i, j_to] == 0:
                gv[i, j_to] = np.inf + 0j if not np.isfinite(g2[i, j_to].real) else 0j
                continue
            gv[i, j_to] = self._match(g2[i, j_to], gv[i, j_from], Z[i, j_from], Z[i, j_to])

    # -- edge quadrature -------------------------------------------------
    def _edge_integral(self, za, zb, g_a, g_b, sqrt_at=None):
        """Psi contribution of the straight edge za -> zb (3-vector)."""
        order = EDGE_ORDER if sqrt_at is None else BRANCH_EDGE_ORDER
        t, w = edge_plan(order=order, sqrt_at=sqrt_at)
        z = za + t * (zb - za)
        gg = np.sqrt(gsq(z, self.grid.tau))
        ref = g_a if sqrt_at != 0 else g_b
        if not np.isfinite(ref.real) or ref == 0:
            raise ContinuationError("edge reference value is singular")
        # walk from the regular side
        idx = np.argsort(t) if sqrt_at != 0 else np.argsort(-t)
        cur = ref
        for k in idx:
            if abs(gg[k] - cur) > abs(gg[k] + cur):
                gg[k] = -gg[k]
            cur = gg[k]
        return _phi(gg) @ w * (zb - za)

    def _batched_edges(self, za, zb, g_a):
        """Vectorized Psi integrals for many regular edges (no branch ends).

        Returns a (3, E) array of per-edge primitives.
        """
        t, w = edge_plan(order=EDGE_ORDER)
        z = za[:, None] + t[None, :] * (zb - za)[:, None]
        gg = np.sqrt(gsq(z.ravel(), self.grid.tau)).reshape(z.shape)
        cur = g_a.copy()
        for k in range(len(t)):
            col = gg[:, k]
            flip = np.abs(col - cur) > np.abs(col + cur)
            col[flip] = -col[flip]
            cur = col
        return (_phi(gg) @ w) * (zb - za)[None, :]

    def _integrate(self):
        g = self.grid
        tau = g.tau
        Z, gv = self.Z, self.gauss
        psi = np.full((self.n_sheet, 3), np.nan + 0j)
        j6 = int(np.argmin(np.abs(g.v - 1 / 6)))
        if g.v[j6] >= 1 / 3:
            j6 = g.j_pole - 1
        # anchor value: Psi(tau/6) := 0
        psi[self.vid(0, j6)] = self._edge_integral(tau / 6, Z[0, j6], 1.0 + 0j, gv[0, j6])

        # trunk row
        for i in range(1, g.nu + 1):
            e = self._edge_integral(Z[i - 1, j6], Z[i, j6], gv[i - 1, j6], gv[i, j6])
            psi[self.vid(i, j6)] = psi[self.vid(i - 1, j6)] + e

        cutset = set(g.i_cuts) | {0, g.nu}
        free = np.array([i not in cutset for i in range(g.nu + 1)])
        all_cols = np.ones(g.nu + 1, dtype=bool)

        def step_rows(j_from, j_to, cols):
            idx = np.nonzero(cols)[0]
            za, zb = Z[idx, j_from], Z[idx, j_to]
            branch_to = np.array(
                [(int(i), j_to) in self._branch_nodes["zero"]
                 or (int(i), j_to) in self._branch_nodes["pole"] for i in idx]
            )
            reg = ~branch_to
            if reg.any():
                vals = self._batched_edges(za[reg], zb[reg], gv[idx[reg], j_from])
                for k, i in enumerate(idx[reg]):
                    psi[self.vid(i, j_to)] = psi[self.vid(i, j_from)] + vals[:, k]
            for i in idx[branch_to]:
                e = self._edge_integral(
                    Z[i, j_from], Z[i, j_to], gv[i, j_from], gv[i, j_to], sqrt_at=1
                )
                psi[self.vid(i, j_to)] = psi[self.vid(i, j_from)] + e

        for j in range(j6 - 1, -1, -1):
            step_rows(j + 1, j, all_cols)
        for j in range(j6 + 1, g.j_pole + 1):
            step_rows(j - 1, j, all_cols)
        for j in range(g.j_pole + 1, g.nv + 1):
            step_rows(j - 1, j, free)
            # horizontal attachments across/onto the cuts
            for i, i_from in ((0, 1), (g.nu, g.nu - 1)):
                sq = 1 if (i, j) in self._branch_nodes["zero"] else None
                e = self._edge_integral(Z[i_from, j], Z[i, j], gv[i_from, j], gv[i, j], sqrt_at=sq)
                psi[self.vid(i, j)] = psi[self.vid(i_from, j)] + e
            for c, ic in enumerate(g.i_cuts):
                sq = 1 if (ic, j) in self._branch_nodes["zero"] else None
                e = self._edge_integral(Z[ic - 1, j], Z[ic, j], gv[ic - 1, j], gv[ic, j], sqrt_at=sq)
                psi[self.vid(ic, j)] = psi[self.vid(ic - 1, j)] + e
                e = self._edge_integral(
                    Z[ic + 1, j], Z[ic, j], gv[ic + 1, j], self.gauss_dup[c, j], sqrt_at=sq
                )
                psi[self.vid_dup(c, j)] = psi[self.vid(ic + 1, j)] + e
        self.psi = psi

    # -- per-vertex metadata ---------------------------------------------
    def vertex_z(self):
        g = self.grid
        z = np.empty(self.n_sheet, dtype=complex)
        for i in range(g.nu + 1):
            for j in range(g.nv + 1):
                z[self.vid(i, j)] = self.Z[i, j]
        for c, ic in enumerate(g.i_cuts):
            for j in range(g.j_pole + 1, g.nv + 1):
                z[self.vid_dup(c, j)] = self.Z[ic, j]
        return z

    def vertex_gauss(self):
        g = self.grid
        out = np.empty(self.n_sheet, dtype=complex)
        for i in range(g.nu + 1):
            for j in range(g.nv + 1):
                out[self.vid(i, j)] = self.gauss[i, j]
        for c in range(2):
            for j in range(g.j_pole + 1, g.nv + 1):
                out[self.vid_dup(c, j)] = self.gauss_dup[c, j]
        return out


def _chain_step(z_from, g_from, z_to, tau, pieces=8):
    """Continuation along a short straight segment via repeated _step."""
    cur_z, cur_g = z_from, g_from
    for k in range(1, pieces + 1):
        nxt = z_from + (z_to - z_from) * k / pieces
        cur_g = _step(cur_z, cur_g, nxt, tau, 0)
        cur_z = nxt
    return cur_g


def build_patch(data: WeierstrassData, n_u: int, n_v: int,
                grade_levels=GRADE_LEVELS, grade_ratio=GRADE_RATIO) -> PeriodicMesh:
    """Triangulate both sheets over the fundamental parallelogram.

    Returns an open PeriodicMesh (lattice not yet known) with seam lists
    attached for welding, vertices tagged 'axis' (branch points), 'flat'
    (Gauss-map branch points) and 'seam', and per-vertex fields z, sheet,
    gauss and the complex primitive psi.
    """
    tau, theta, r = data.tau, data.theta, data.scale
    grid = _make_grid(tau, n_u, n_v, grade_levels=grade_levels, grade_ratio=grade_ratio)
    sheet = _SheetField(grid)
    g = grid
    n_sheet = sheet.n_sheet

    # sheet-1 primitive: flip the horizontal components plus a constant fixed
    # by continuity across cut 1 at a mid-cut row
    j_ref = (g.j_pole + 1 + g.nv) // 2
    ic1 = g.i_cuts[0]
    psi0 = sheet.psi
    flip = np.array([-1.0, -1.0, 1.0])
    c1 = psi0[sheet.vid(ic1, j_ref)] - flip * psi0[sheet.vid_dup(0, j_ref)]
    psi1 = flip[None, :] * psi0 + c1[None, :]

    psi_all = np.vstack([psi0, psi1])
    gauss0 = sheet.vertex_gauss()
    gauss_all = np.concatenate([gauss0, -gauss0])
    z0 = sheet.vertex_z()
    z_all = np.concatenate([z0, z0])
    sheet_id = np.concatenate(
        [np.zeros(n_sheet, dtype=int), np.ones(n_sheet, dtype=int)]
    )

    positions = r * np.real(np.exp(-1j * theta)[None] * psi_all)
    # anchor the image of z = 0 on sheet 0 at the origin
    positions = positions - positions[sheet.vid(0, 0)]

    # triangles over both sheets
    tris = []
    for s in range(2):
        off = s * n_sheet
        for ci in range(g.nu):
            for cj in range(g.nv):
                c00 = sheet.corner(ci, cj, ci) + off
                c10 = sheet.corner(ci + 1, cj, ci) + off
                c11 = sheet.corner(ci + 1, cj + 1, ci) + off
                c01 = sheet.corner(ci, cj + 1, ci) + off
                tris.append([c00, c10, c11])
                tris.append([c00, c11, c01])
    tris = np.array(tris, dtype=np.int64)

    # ---- seams -------------------------------------------------------
    seams = []

    def vid(s, i, j):
        return s * n_sheet + sheet.vid(i, j)

    def vdup(s, c, j):
        return s * n_sheet + sheet.vid_dup(c, j)

    for s in range(2):
        # b-seam split into column groups homotopic within the slit square
        groups = [
            range(0, g.i_cuts[0] + 1),
            range(g.i_cuts[0], g.i_cuts[1] + 1),
            range(g.i_cuts[1], g.nu + 1),
        ]
        for gi, cols in enumerate(groups):
            pairs = []
            for i in cols:
                # at a group's left boundary the top row uses the right-side
                # duplicate; elsewhere (including right boundaries) the base
                # copy, so every column stays homotopic within its group
                top = vid(s, i, g.nv)
                if gi > 0 and i == g.i_cuts[gi - 1]:
                    top = vdup(s, gi - 1, g.nv)
                pairs.append((vid(s, i, 0), top))
            seams.append(Seam(pairs=np.array(pairs), kind="b_seam_s%d_g%d" % (s, gi)))
        # a-seam below the pole row (sheet preserving)
        pairs = [(vid(s, 0, j), vid(s, g.nu, j)) for j in range(0, g.j_pole + 1)]
        seams.append(Seam(pairs=np.array(pairs), kind="a_seam_s%d" % s))
        # cut 0 on the parallelogram boundary (sheet swapping)
        pairs = [(vid(s, 0, j), vid(1 - s, g.nu, j)) for j in range(g.j_pole, g.nv + 1)]
        seams.append(Seam(pairs=np.array(pairs), kind="cut0_s%d" % s))
        # interior cuts (sheet swapping): left copy <-> other sheet right copy
        for c, ic in enumerate(g.i_cuts):
            pairs = [(vid(s, ic, g.j_pole), vid(1 - s, ic, g.j_pole))]
            pairs += [
                (vid(s, ic, j), vdup(1 - s, c, j)) for j in range(g.j_pole + 1, g.nv + 1)
            ]
            seams.append(Seam(pairs=np.array(pairs), kind="cut%d_s%d" % (c + 1, s)))

    # ---- tags ----------------------------------------------------------
    axis_ids = []
    for s in range(2):
        for kind in ("zero", "pole"):
            for (i, j) in sheet._branch_nodes[kind]:
                axis_ids.append(vid(s, i, j))
    flat_ids = []
    fps = flat_points(tau)
    zs = z0.copy()
    for p in fps:
        d = np.abs(reduce_to_cell(zs - p, tau, centered=True))
        k = int(np.argmin(d))
        flat_ids += [k, k + n_sheet]
    seam_ids = sorted(set(int(x) for sm in seams for x in sm.pairs.ravel()))

    mesh = PeriodicMesh(
        vertices=positions,
        triangles=tris,
        lattice=None,
        vertex_tags={
            "axis": np.array(sorted(set(axis_ids))),
            "flat": np.array(sorted(set(flat_ids))),
            "seam": np.array(seam_ids),
        },
        fields={
            "z": z_all,
            "sheet": sheet_id,
            "gauss": gauss_all,
            "psi": psi_all,
            "grid_info": {
                "nu": g.nu,
                "nv": g.nv,
                "j_pole": g.j_pole,
                "i_cuts": g.i_cuts,
                "n_sheet": n_sheet,
                "theta": theta,
                "tau": tau,
                "scale": r,
            },
        },
    )
    mesh.seams = seams
    return mesh


def immerse(z, sheet, data: WeierstrassData):
    """Position of a single point of the branched torus.

    The integration path runs from the anchor tau/6 along a cut-free,
    pole-safe polyline; the requested sheet selects the sign of G, with the
    sheet-1 constant fixed by continuation across cut 1 (matching
    build_patch).  Points exactly on a cut are taken as right-side limits.
    """
    tau, theta, r = data.tau, data.theta, data.scale
    b = (z - data.base_point).imag / tau.imag
    a = (z - data.base_point).real - b * tau.real

    psi = _psi_routed(a, b, tau)
    psi0 = _psi_routed(0.0, 0.0, tau)
    if sheet == 0:
        total = psi - psi0
    else:
        flip = np.array([-1.0, -1.0, 1.0])
        c1 = _sheet1_constant(tau)
        total = (flip * psi + c1) - psi0
    return r * np.real(np.exp(-1j * theta) * total)


_BRANCH_SNAP = 1e-7


def _psi_routed(a, b, tau):
    """Psi at z = a + b*tau via a polyline from tau/6 that avoids the cuts.

    Route: horizontally at height 1/6 to the middle of the target's 1/3
    block, vertically to the target height (crossing the pole row far from
    all poles), then horizontally within the block.
    """
    a_safe = (np.floor(a * 3) + 0.5) / 3
    points = [tau / 6, a_safe + tau / 6, a_safe + b * tau, a + b * tau]
    psi = np.zeros(3, dtype=complex)
    g_cur = 1.0 + 0j
    for za, zb in zip(points[:-1], points[1:]):
        dpsi, g_cur = _segment_psi(za, zb, g_cur, tau)
        psi += dpsi
    return psi


def _segment_psi(za, zb, g_a, tau, order=16):
    """(integral of phi dz, continued G at zb) along a straight segment."""
    if abs(zb - za) < 1e-15:
        return np.zeros(3, dtype=complex), g_a
    branch = np.concatenate([[0, 1 / 3, 2 / 3], poles_of_gsq(tau)])
    d_end = np.min(np.abs(reduce_to_cell(zb - branch, tau, centered=True)))
    sqrt_at = 1 if d_end < _BRANCH_SNAP else None
    n_panels = max(4, int(np.ceil(16 * abs(zb - za))))
    ts, ws = [], []
    if sqrt_at is None:
        edges = np.linspace(0, 1, n_panels + 1)
        for p0, p1 in zip(edges[:-1], edges[1:]):
            t, w = edge_plan(order=order)
            ts.append(p0 + (p1 - p0) * t)
            ws.append(w * (p1 - p0))
        t = np.concatenate(ts)
        w = np.concatenate(ws)
    else:
        t, w = edge_plan(order=2 * order, sqrt_at=sqrt_at)
    z = za + t * (zb - za)
    gg = np.sqrt(gsq(z, tau))
    cur = g_a
    for kk in np.argsort(t):
        if abs(gg[kk] - cur) > abs(gg[kk] + cur):
            gg[kk] = -gg[kk]
        cur = gg[kk]
    if sqrt_at is None:
        g_end = cur
    else:
        d_zero = np.min(np.abs(reduce_to_cell(zb - np.array([0, 1 / 3, 2 / 3]), tau, centered=True)))
        d_pole = np.min(np.abs(reduce_to_cell(zb - poles_of_gsq(tau), tau, centered=True)))
        g_end = 0j if d_zero < d_pole else np.inf + 0j
    return _phi(gg) @ w * (zb - za), g_end


def _sheet1_constant(tau):
    """Integration constant of the sheet-1 primitive (continuity across cut 1)."""
    bm = 2 / 3  # mid-cut height
    eps = 1e-6
    psi_l = _psi_routed(1 / 3 - eps, bm, tau)
    psi_r = _psi_routed(1 / 3 + eps, bm, tau)
    flip = np.array([-1.0, -1.0, 1.0])
    # crossing the cut left->right lands on sheet 1: psi1(right) == psi0(left)
    return psi_l - flip * psi_r
