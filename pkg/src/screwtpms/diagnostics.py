"""Surface-level verification: assembly, curvatures, symmetries, embeddedness.

Curvature estimators are the standard convergent pair: cotangent Laplacian
with mixed Voronoi areas for the mean curvature and angle defect for the
Gauss curvature (whose total over a closed quotient mesh is exactly
2 pi chi).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import AssemblyError, MeshQualityError
from .gaussmap import reduce_to_cell
from .immersion import WeierstrassData, immerse
from .pmesh import PeriodicMesh, weld

MIN_ANGLE_DEG = 1.0


# ---------------------------------------------------------------------------
# rigid motions
# ---------------------------------------------------------------------------


@dataclass
class RigidMotion:
    rotation: np.ndarray      # (3, 3)
    translation: np.ndarray   # (3,)

    def apply(self, points):
        return points @ self.rotation.T + self.translation

    @classmethod
    def identity(cls):
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def rotation_about_z(cls, angle, axis_point_xy, shift=0.0):
        c, s = np.cos(angle), np.sin(angle)
        R = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        p0 = np.array([axis_point_xy[0], axis_point_xy[1], 0.0])
        t = p0 - R @ p0 + np.array([0.0, 0.0, shift])
        return cls(R, t)

    @classmethod
    def half_turn_about_horizontal(cls, point, direction_angle):
        d = np.array([np.cos(direction_angle), np.sin(direction_angle), 0.0])
        R = 2.0 * np.outer(d, d) - np.eye(3)
        p0 = np.asarray(point, dtype=float)
        return cls(R, p0 - R @ p0)


@dataclass
class ScrewSymmetry:
    """Order-6 screw: rotation by +-pi/3 about a vertical axis plus a shift."""

    axis_point_xy: np.ndarray
    angle: float
    shift: float

    def motion(self, k=1):
        return RigidMotion.rotation_about_z(
            self.angle * k, self.axis_point_xy, self.shift * k
        )

    def apply(self, points, k=1):
        return self.motion(k).apply(points)


def fit_screw(data: WeierstrassData, n_samples=8):
    """Recover the order-6 screw from the translation z -> z + 1/3.

    Uses immersion samples well inside the cell, so no lattice wrap enters;
    the rotation angle is +-60 degrees and the sign is chosen by residual.
    """
    tau = data.tau
    bs = np.linspace(0.08, 0.26, n_samples // 2).tolist() + [0.45, 0.52, 0.60, 0.70]
    zs = [0.15 + b * tau for b in bs]
    src = np.array([immerse(z, 0, data) for z in zs])

    dst = []
    for z in zs:
        g0 = _gauss_continued(z, data)
        target = np.exp(1j * np.pi / 3) * g0
        g1 = _gauss_continued(z + 1 / 3, data)
        sheet = 0 if abs(g1 - target) <= abs(-g1 - target) else 1
        dst.append(immerse(z + 1 / 3, sheet, data))
    dst = np.array(dst)

    best = None
    for sign in (+1.0, -1.0):
        ang = sign * np.pi / 3
        c, s = np.cos(ang), np.sin(ang)
        # dst_xy = R (src_xy - p) + p  ->  linear least squares in p
        A_rows, b_rows = [], []
        for p_src, p_dst in zip(src, dst):
            x, y = p_src[0], p_src[1]
            A_rows.append([1 - c, s])
            b_rows.append(p_dst[0] - (c * x - s * y))
            A_rows.append([-s, 1 - c])
            b_rows.append(p_dst[1] - (s * x + c * y))
        sol, *_ = np.linalg.lstsq(np.array(A_rows), np.array(b_rows), rcond=None)
        shift = float(np.mean(dst[:, 2] - src[:, 2]))
        cand = ScrewSymmetry(axis_point_xy=sol, angle=ang, shift=shift)
        resid = np.max(np.linalg.norm(cand.apply(src) - dst, axis=1))
        if best is None or resid < best[0]:
            best = (resid, cand)
    return best[1]


def _gauss_continued(z, data):
    """G at (z, sheet 0) by the same routing immerse uses."""
    from .immersion import _psi_routed, _segment_psi
    from .gaussmap import gsq

    tau = data.tau
    b = z.imag / tau.imag
    a = z.real - b * tau.real
    a_safe = (np.floor(a * 3) + 0.5) / 3
    pts = [tau / 6, a_safe + tau / 6, a_safe + b * tau, a + b * tau]
    g = 1.0 + 0j
    for za, zb in zip(pts[:-1], pts[1:]):
        _, g = _segment_psi(za, zb, g, tau)
    return g


def order2_candidates(data: WeierstrassData):
    """The three ladder families of horizontal 2-fold axes.

    The involution z -> tau/3 + k/3 - z sends G to c_k / G with |c_k| = 1;
    it is realized by a half turn about the horizontal axis through the image
    of the fixed point (tau + k)/6 at direction angle arg(c_k)/2.
    """
    from .gaussmap import gsq

    ops = []
    for k in range(3):
        zf = (data.tau + k) / 6
        ck = gsq(zf, data.tau)
        point = immerse(zf, 0, data)
        phi = 0.5 * np.angle(ck)
        ops.append(RigidMotion.half_turn_about_horizontal(point, phi))
    return ops


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------


def assemble_unit_cell(patch: PeriodicMesh, screw: ScrewSymmetry = None,
                       weld_tol=1e-5) -> PeriodicMesh:
    """Weld the two-sheet patch into the closed translational unit cell.

    Reports the lattice, c/a and (when a screw is supplied) the screw
    residual in the returned mesh's fields.
    """
    if not hasattr(patch, "seams"):
        raise AssemblyError("patch carries no seam lists")
    scale = patch.fields.get("grid_info", {}).get("scale", 1.0)
    cell = weld(patch, patch.seams, weld_tol=weld_tol, scale=scale)
    info = cell.fields.get("lattice_info", {})
    cell.fields["chi"] = cell.euler_characteristic()
    if screw is not None:
        cell.fields["screw_residual"] = symmetry_residual(cell, screw.motion())
        cell.fields["screw"] = screw
    return cell


# ---------------------------------------------------------------------------
# curvature estimators
# ---------------------------------------------------------------------------


def _triangle_quality_check(mesh):
    min_angle = mesh.min_triangle_angle()
    if min_angle < np.deg2rad(MIN_ANGLE_DEG):
        p = mesh.corner_positions()
        bad = []
        for c in range(3):
            u = p[:, (c + 1) % 3] - p[:, c]
            v = p[:, (c + 2) % 3] - p[:, c]
            cosang = np.sum(u * v, axis=1) / np.maximum(
                np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1), 1e-300
            )
            ang = np.arccos(np.clip(cosang, -1, 1))
            bad.extend(np.nonzero(ang < np.deg2rad(MIN_ANGLE_DEG))[0].tolist())
        raise MeshQualityError(
            "mesh has %d triangles with angles below %g deg"
            % (len(set(bad)), MIN_ANGLE_DEG),
            offenders=sorted(set(bad)),
        )


def _corner_geometry(mesh):
    p = mesh.corner_positions()
    e = np.empty_like(p)  # e[:, c] = edge opposite corner c
    for c in range(3):
        e[:, c] = p[:, (c + 2) % 3] - p[:, (c + 1) % 3]
    n = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    double_area = np.linalg.norm(n, axis=1)
    cot = np.empty((len(p), 3))
    for c in range(3):
        u = p[:, (c + 1) % 3] - p[:, c]
        v = p[:, (c + 2) % 3] - p[:, c]
        cot[:, c] = np.sum(u * v, axis=1) / np.maximum(double_area, 1e-300)
    return p, e, cot, double_area, n


def mixed_voronoi_areas(mesh):
    """Per-vertex mixed Voronoi areas (Meyer et al. convention)."""
    p, e, cot, double_area, _ = _corner_geometry(mesh)
    V = mesh.n_vertices
    area = np.zeros(V)
    tri = mesh.triangles
    any_obtuse = np.zeros(len(p), dtype=bool)
    obtuse_corner = np.zeros(len(p), dtype=int)
    for c in range(3):
        u = p[:, (c + 1) % 3] - p[:, c]
        v = p[:, (c + 2) % 3] - p[:, c]
        neg = np.sum(u * v, axis=1) < 0
        any_obtuse |= neg
        obtuse_corner = np.where(neg, c, obtuse_corner)
    tA = 0.5 * double_area
    for c in range(3):
        l2_next = np.sum(e[:, (c + 1) % 3] ** 2, axis=1)
        l2_prev = np.sum(e[:, (c + 2) % 3] ** 2, axis=1)
        voronoi = (l2_next * cot[:, (c + 1) % 3] + l2_prev * cot[:, (c + 2) % 3]) / 8.0
        contrib = np.where(
            any_obtuse,
            np.where(obtuse_corner == c, tA / 2.0, tA / 4.0),
            voronoi,
        )
        np.add.at(area, tri[:, c], contrib)
    return area


def vertex_normals(mesh):
    n = mesh.triangle_normals() * mesh.triangle_areas()[:, None]
    out = np.zeros((mesh.n_vertices, 3))
    for c in range(3):
        np.add.at(out, mesh.triangles[:, c], n)
    norms = np.linalg.norm(out, axis=1)
    return out / np.maximum(norms, 1e-300)[:, None]


def mean_curvature_field(mesh: PeriodicMesh):
    """Discrete mean curvature: cotangent Laplacian, mixed Voronoi areas,
    signed by the vertex normal."""
    _triangle_quality_check(mesh)
    p, e, cot, double_area, _ = _corner_geometry(mesh)
    V = mesh.n_vertices
    tri = mesh.triangles
    K = np.zeros((V, 3))
    for c in range(3):
        nxt, prv = (c + 1) % 3, (c + 2) % 3
        # edge (c, nxt) weighted by the cotangent at prv, both directions
        w = cot[:, prv][:, None]
        np.add.at(K, tri[:, c], w * (p[:, c] - p[:, nxt]))
        np.add.at(K, tri[:, nxt], w * (p[:, nxt] - p[:, c]))
    area = mixed_voronoi_areas(mesh)
    m = K / (2.0 * np.maximum(area, 1e-300)[:, None])
    normals = vertex_normals(mesh)
    return 0.5 * np.sum(m * normals, axis=1)


def gauss_curvature_field(mesh: PeriodicMesh):
    """Angle-defect Gauss curvature over mixed Voronoi areas."""
    _triangle_quality_check(mesh)
    p = mesh.corner_positions()
    V = mesh.n_vertices
    defect = np.full(V, 2 * np.pi)
    for c in range(3):
        u = p[:, (c + 1) % 3] - p[:, c]
        v = p[:, (c + 2) % 3] - p[:, c]
        cosang = np.sum(u * v, axis=1) / (
            np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1)
        )
        ang = np.arccos(np.clip(cosang, -1, 1))
        np.add.at(defect, mesh.triangles[:, c], -ang)
    area = mixed_voronoi_areas(mesh)
    return defect / np.maximum(area, 1e-300)


def total_angle_defect(mesh: PeriodicMesh):
    """Sum of angle defects; equals 2 pi chi exactly on closed quotients."""
    p = mesh.corner_positions()
    total = 2 * np.pi * mesh.n_vertices
    for c in range(3):
        u = p[:, (c + 1) % 3] - p[:, c]
        v = p[:, (c + 2) % 3] - p[:, c]
        cosang = np.sum(u * v, axis=1) / (
            np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1)
        )
        total -= np.sum(np.arccos(np.clip(cosang, -1, 1)))
    return total


# ---------------------------------------------------------------------------
# symmetry residual and embeddedness
# ---------------------------------------------------------------------------


def _point_cloud_with_images(mesh, shells=1):
    pts = [mesh.vertices]
    if mesh.lattice is not None:
        rng = range(-shells, shells + 1)
        for i in rng:
            for j in rng:
                for k in rng:
                    if i == j == k == 0:
                        continue
                    pts.append(mesh.vertices + np.array([i, j, k]) @ mesh.lattice)
    return np.vstack(pts)


def symmetry_residual(mesh: PeriodicMesh, op: RigidMotion):
    """One-sided Hausdorff distance from op(vertices) to the vertex cloud
    (with one shell of lattice images)."""
    cloud = _point_cloud_with_images(mesh)
    tree = cKDTree(cloud)
    moved = op.apply(mesh.vertices)
    d, _ = tree.query(moved, k=1)
    return float(np.max(d))


def _tri_tri_overlap(p1, q1, r1, p2, q2, r2, eps=0.0):
    """Vectorized triangle-triangle intersection (Moller interval test).

    All inputs are (N, 3).  Returns a boolean mask; coplanar pairs within eps
    are reported as intersecting only if their projections overlap crudely.
    """

    def plane(p, q, r):
        n = np.cross(q - p, r - p)
        return n, -np.sum(n * p, axis=1)

    n1, d1 = plane(p1, q1, r1)
    dp2 = np.stack([np.sum(n1 * x, axis=1) + d1 for x in (p2, q2, r2)], axis=1)
    n2, d2 = plane(p2, q2, r2)
    dp1 = np.stack([np.sum(n2 * x, axis=1) + d2 for x in (p1, q1, r1)], axis=1)

    tol1 = 1e-12 * np.max(np.abs(dp2), axis=1)
    tol2 = 1e-12 * np.max(np.abs(dp1), axis=1)
    same_side2 = (np.all(dp2 > tol1[:, None], axis=1)) | (np.all(dp2 < -tol1[:, None], axis=1))
    same_side1 = (np.all(dp1 > tol2[:, None], axis=1)) | (np.all(dp1 < -tol2[:, None], axis=1))
    cand = ~(same_side1 | same_side2)
    if not np.any(cand):
        return cand

    idx = np.nonzero(cand)[0]
    res = np.zeros(len(p1), dtype=bool)
    # interval overlap along the intersection line of the two planes
    for i in idx:
        tri1 = np.array([p1[i], q1[i], r1[i]])
        tri2 = np.array([p2[i], q2[i], r2[i]])
        res[i] = _tri_pair_intersects(tri1, tri2, n1[i], n2[i], dp1[i], dp2[i])
    return res


def _interval_on_line(tri, dists, direction):
    proj = tri @ direction
    ts = []
    for a in range(3):
        for b in range(a + 1, 3):
            da, db = dists[a], dists[b]
            if da * db < 0:
                t = proj[a] + (proj[b] - proj[a]) * da / (da - db)
                ts.append(t)
            elif da == 0:
                ts.append(proj[a])
            elif db == 0:
                ts.append(proj[b])
    if not ts:
        return None
    return min(ts), max(ts)


def _tri_pair_intersects(tri1, tri2, n1, n2, dp1, dp2):
    d = np.cross(n1, n2)
    nd = np.linalg.norm(d)
    if nd < 1e-14 * max(np.linalg.norm(n1), np.linalg.norm(n2)):
        # coplanar: conservative AABB overlap on the shared plane
        lo1, hi1 = tri1.min(axis=0), tri1.max(axis=0)
        lo2, hi2 = tri2.min(axis=0), tri2.max(axis=0)
        return bool(np.all(lo1 <= hi2) and np.all(lo2 <= hi1))
    d = d / nd
    i1 = _interval_on_line(tri1, dp1, d)
    i2 = _interval_on_line(tri2, dp2, d)
    if i1 is None or i2 is None:
        return False
    lo = max(i1[0], i2[0])
    hi = min(i1[1], i2[1])
    return hi - lo > 1e-12 * max(i1[1] - i1[0], i2[1] - i2[0], 1e-30)


def self_intersection_check(mesh: PeriodicMesh, shells=1):
    """All intersecting non-adjacent triangle pairs of the cell against the
    cell plus `shells` lattice images.  Empty list certifies embeddedness at
    mesh resolution."""
    P0 = mesh.corner_positions()
    F = len(P0)
    shifts = [np.zeros(3, dtype=np.int64)]
    if mesh.lattice is not None and shells > 0:
        rng = range(-shells, shells + 1)
        shifts += [
            np.array([i, j, k], dtype=np.int64)
            for i in rng for j in rng for k in rng
            if not (i == j == k == 0)
        ]

    # integer-encoded vertex instances (vid, lattice offset) for adjacency
    OFF = 64
    HALF = 32

    def encode(extra_shift):
        o = mesh.offsets + extra_shift
        return ((mesh.triangles * OFF + o[..., 0] + HALF) * OFF
                + o[..., 1] + HALF) * OFF + o[..., 2] + HALF

    enc0 = encode(np.zeros(3, dtype=np.int64))

    lo0 = P0.min(axis=1)
    hi0 = P0.max(axis=1)
    h = float(np.median(hi0 - lo0)) * 2 + 1e-12
    hits = []

    grid = {}
    for t in range(F):
        for key in _bbox_cells(lo0[t], hi0[t], h):
            grid.setdefault(key, []).append(t)

    for shift in shifts:
        if mesh.lattice is not None:
            P = P0 + shift @ mesh.lattice
        else:
            P = P0
        enc = enc0 if not shift.any() else encode(shift)
        lo = P.min(axis=1)
        hi = P.max(axis=1)
        pairs = set()
        for t in range(F):
            for key in _bbox_cells(lo[t], hi[t], h):
                for t0 in grid.get(key, ()):
                    if not shift.any() and t0 >= t:
                        continue
                    pairs.add((t0, t))
        if not pairs:
            continue
        pairs = np.array(sorted(pairs))
        keep = np.all(lo0[pairs[:, 0]] <= hi[pairs[:, 1]], axis=1) & np.all(
            lo[pairs[:, 1]] <= hi0[pairs[:, 0]], axis=1
        )
        pairs = pairs[keep]
        if len(pairs) == 0:
            continue
        shared = np.any(
            enc0[pairs[:, 0]][:, :, None] == enc[pairs[:, 1]][:, None, :],
            axis=(1, 2),
        )
        pairs = pairs[~shared]
        if len(pairs) == 0:
            continue
        mask = _tri_tri_overlap(
            P0[pairs[:, 0], 0], P0[pairs[:, 0], 1], P0[pairs[:, 0], 2],
            P[pairs[:, 1], 0], P[pairs[:, 1], 1], P[pairs[:, 1], 2],
        )
        for a, b in pairs[mask]:
            hits.append((int(a), int(b), tuple(int(x) for x in shift)))
    return hits


def _bbox_cells(lo, hi, h):
    c0 = np.floor(lo / h).astype(np.int64)
    c1 = np.floor(hi / h).astype(np.int64)
    out = []
    for i in range(c0[0], c1[0] + 1):
        for j in range(c0[1], c1[1] + 1):
            for k in range(c0[2], c1[2] + 1):
                out.append((i, j, k))
    return out


# ---------------------------------------------------------------------------
# volume fractions (diagnostic only)
# ---------------------------------------------------------------------------


def ray_crossing_parity(mesh: PeriodicMesh, origin, target, shells=1):
    """Parity of mesh crossings along the segment origin -> target."""
    P = [mesh.corner_positions()]
    if mesh.lattice is not None:
        rng = range(-shells, shells + 1)
        for i in rng:
            for j in rng:
                for k in rng:
                    if i == j == k == 0:
                        continue
                    P.append(mesh.corner_positions() + np.array([i, j, k]) @ mesh.lattice)
    P = np.vstack(P)
    o = np.asarray(origin, float)
    d = np.asarray(target, float) - o
    eps = 1e-12
    v0, v1, v2 = P[:, 0], P[:, 1], P[:, 2]
    e1, e2 = v1 - v0, v2 - v0
    h = np.cross(d, e2)
    a = np.sum(e1 * h, axis=1)
    ok = np.abs(a) > eps
    f = 1.0 / np.where(ok, a, 1.0)
    s = o - v0
    u = f * np.sum(s * h, axis=1)
    q = np.cross(s, e1)
    v = f * np.sum(d[None, :] * q, axis=1)
    t = f * np.sum(e2 * q, axis=1)
    hit = ok & (u >= 0) & (v >= 0) & (u + v <= 1) & (t > 1e-9) & (t < 1 - 1e-9)
    return int(np.sum(hit)) % 2


def volume_fractions(mesh: PeriodicMesh, n_grid=12, seed=0):
    """Grid-parity estimate of the two labyrinth volume fractions."""
    rng = np.random.default_rng(seed)
    ref = mesh.vertices.mean(axis=0) + rng.normal(scale=1e-3, size=3)
    fracs = np.linspace(0.05, 0.95, n_grid)
    inside = 0
    total = 0
    for fa in fracs:
        for fb in fracs:
            for fc in fracs:
                p = np.array([fa, fb, fc]) @ mesh.lattice
                parity = ray_crossing_parity(mesh, p, ref)
                inside += parity
                total += 1
    frac = inside / total
    return frac, 1.0 - frac
