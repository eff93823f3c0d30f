"""Triangle meshes that close up modulo a rank-3 lattice.

A PeriodicMesh stores one representative position per vertex; every triangle
corner carries an integer offset vector, so the corner's actual position is

    vertices[v] + offsets[t, c] @ lattice.

Open patches use a zero lattice placeholder and empty offsets until they are
welded.  Welding identifies seam vertex pairs whose positions differ by a
lattice vector, using a union-find that tracks offsets, and extracts the
lattice generated by the seam translations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AssemblyError


@dataclass
class PeriodicMesh:
    vertices: np.ndarray                  # (V, 3) float
    triangles: np.ndarray                 # (F, 3) int
    lattice: np.ndarray = None            # (3, 3) float, rows are generators
    offsets: np.ndarray = None            # (F, 3, 3) int, per-corner lattice coords
    vertex_tags: dict = field(default_factory=dict)   # tag -> vertex index array
    fields: dict = field(default_factory=dict)        # name -> per-vertex array

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float)
        self.triangles = np.asarray(self.triangles, dtype=np.int64)
        if self.offsets is None:
            self.offsets = np.zeros(self.triangles.shape + (3,), dtype=np.int64)
        if self.lattice is not None:
            self.lattice = np.asarray(self.lattice, dtype=float)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    def corner_positions(self):
        """(F, 3, 3): resolved positions of every triangle corner."""
        pos = self.vertices[self.triangles]
        if self.lattice is not None:
            pos = pos + self.offsets @ self.lattice
        return pos

    def triangle_areas(self):
        p = self.corner_positions()
        n = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
        return 0.5 * np.linalg.norm(n, axis=1)

    def triangle_normals(self):
        p = self.corner_positions()
        n = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
        nn = np.linalg.norm(n, axis=1)
        return n / np.maximum(nn, 1e-300)[:, None]

    def edge_keys(self):
        """Canonical undirected edge keys (va, vb, d3) of the quotient complex."""
        keys = set()
        for corners, offs in zip(self.triangles, self.offsets):
            for c in range(3):
                a, b = corners[c], corners[(c + 1) % 3]
                oa, ob = offs[c], offs[(c + 1) % 3]
                keys.add(_edge_key(a, b, oa, ob))
        return keys

    def euler_characteristic(self):
        return self.n_vertices - len(self.edge_keys()) + self.n_triangles

    def is_closed_oriented(self):
        """Every directed edge appears exactly once (closed oriented complex)."""
        seen = {}
        for corners, offs in zip(self.triangles, self.offsets):
            for c in range(3):
                a, b = int(corners[c]), int(corners[(c + 1) % 3])
                d = tuple(int(x) for x in (offs[(c + 1) % 3] - offs[c]))
                key = (a, b, d)
                if key in seen:
                    return False
                seen[key] = True
        for (a, b, d) in seen:
            if (b, a, tuple(-x for x in d)) not in seen:
                return False
        return True

    def mean_edge_length(self):
        p = self.corner_positions()
        e = np.concatenate(
            [p[:, 1] - p[:, 0], p[:, 2] - p[:, 1], p[:, 0] - p[:, 2]]
        )
        return float(np.mean(np.linalg.norm(e, axis=1)))

    def min_triangle_angle(self):
        p = self.corner_positions()
        angles = []
        for c in range(3):
            u = p[:, (c + 1) % 3] - p[:, c]
            v = p[:, (c + 2) % 3] - p[:, c]
            cosang = np.sum(u * v, axis=1) / (
                np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1)
            )
            angles.append(np.arccos(np.clip(cosang, -1, 1)))
        return float(np.min(angles))

    def translated_copies(self, cells):
        """Unwrapped (vertices, triangles) arrays for an a x b x c block of cells."""
        if self.lattice is None:
            return self.vertices.copy(), self.triangles.copy()
        na, nb, nc = cells
        index = {}
        verts = []
        tris = []
        for ia in range(na):
            for ib in range(nb):
                for ic in range(nc):
                    cell = np.array([ia, ib, ic], dtype=np.int64)
                    for corners, offs in zip(self.triangles, self.offsets):
                        tri = []
                        for c in range(3):
                            key = (int(corners[c]), tuple(int(x) for x in offs[c] + cell))
                            if key not in index:
                                index[key] = len(verts)
                                verts.append(
                                    self.vertices[corners[c]]
                                    + (offs[c] + cell) @ self.lattice
                                )
                            tri.append(index[key])
                        tris.append(tri)
        return np.array(verts), np.array(tris, dtype=np.int64)

    def subdivided(self):
        """One 1:4 loop-style split (midpoint insertion, positions averaged)."""
        lat = self.lattice if self.lattice is not None else np.zeros((3, 3))
        mid_index = {}
        new_vertices = [self.vertices]
        mid_positions = []

        def midpoint(a, b, oa, ob):
            key = _edge_key(a, b, oa, ob)
            if key not in mid_index:
                va, vb, d = key
                pos = 0.5 * (self.vertices[va] + self.vertices[vb] + np.array(d) @ lat)
                mid_index[key] = self.n_vertices + len(mid_positions)
                mid_positions.append(pos)
            return mid_index[key]

        tris = []
        offs = []
        for corners, o in zip(self.triangles, self.offsets):
            v = [int(x) for x in corners]
            m = []
            mo = []
            for c in range(3):
                a, b = v[c], v[(c + 1) % 3]
                oa, ob = o[c], o[(c + 1) % 3]
                m.append(midpoint(a, b, oa, ob))
                # the canonical midpoint lives in the frame of min(a, b): its
                # offset inside this triangle is that endpoint's offset here
                key = _edge_key(a, b, oa, ob)
                mo.append(oa if key[0] == a else ob)
            tris += [
                [v[0], m[0], m[2]],
                [m[0], v[1], m[1]],
                [m[2], m[1], v[2]],
                [m[0], m[1], m[2]],
            ]
            offs += [
                [o[0], mo[0], mo[2]],
                [mo[0], o[1], mo[1]],
                [mo[2], mo[1], o[2]],
                [mo[0], mo[1], mo[2]],
            ]
        verts = np.vstack([self.vertices, np.array(mid_positions).reshape(-1, 3)])
        return PeriodicMesh(
            vertices=verts,
            triangles=np.array(tris, dtype=np.int64),
            lattice=self.lattice,
            offsets=np.array(offs, dtype=np.int64),
            vertex_tags={k: v.copy() for k, v in self.vertex_tags.items()},
        )


def _edge_key(a, b, oa, ob):
    d = tuple(int(x) for x in (np.asarray(ob) - np.asarray(oa)))
    a, b = int(a), int(b)
    if (b, a) < (a, b) or (a == b and d < tuple(-x for x in d)):
        return (b, a, tuple(-x for x in d))
    return (a, b, d)


@dataclass
class Seam:
    """Vertex identification list: pairs[i] = (keep, merge) with
    position[merge] = position[keep] + (a lattice translation)."""

    pairs: np.ndarray
    kind: str = ""


class _OffsetDSU:
    """Union-find on vertices tracking integer lattice offsets to the root."""

    def __init__(self, n):
        self.parent = np.arange(n)
        self.off = np.zeros((n, 3), dtype=np.int64)

    def find(self, i):
        path = []
        while self.parent[i] != i:
            path.append(i)
            i = self.parent[i]
        # path compression with offset accumulation
        total = np.zeros(3, dtype=np.int64)
        for j in reversed(path):
            total = total + self.off[j]
            self.parent[j] = i
            self.off[j] = total
        return i

    def offset_to_root(self, i):
        r = self.find(i)
        return self.off[i].copy() if i != r else np.zeros(3, dtype=np.int64)

    def union(self, a, b, d_ab):
        """Declare position(a) = position(b) + d_ab @ lattice."""
        ra = self.find(a)
        rb = self.find(b)
        da = self.off[a] if a != ra else np.zeros(3, dtype=np.int64)
        db = self.off[b] if b != rb else np.zeros(3, dtype=np.int64)
        if ra == rb:
            if not np.array_equal(da, db + d_ab):
                raise AssemblyError(
                    "inconsistent weld offsets in a seam cycle: %s vs %s"
                    % (da, db + d_ab)
                )
            return
        # attach rb under ra: pos(rb) = pos(ra) + (da - d_ab - db) @ lattice
        self.parent[rb] = ra
        self.off[rb] = da - np.asarray(d_ab) - db


def extract_lattice(offsets, tol=1e-6):
    """Integer-generate a rank-3 lattice basis from observed seam translations.

    Returns (basis, info) where basis rows are (a1, a2, c) with c the shortest
    vertical generator and a1, a2 the shortest horizontal ones.
    """
    vs = [np.asarray(v, dtype=float) for v in offsets if np.linalg.norm(v) > tol]
    if not vs:
        raise AssemblyError("no nonzero seam translations found")
    vs.sort(key=lambda v: np.linalg.norm(v))
    basis = []
    for v in vs:
        if not basis:
            basis.append(v)
            continue
        B = np.array(basis).T
        c, *_ = np.linalg.lstsq(B, v, rcond=None)
        resid = v - B @ np.round(c)
        in_span = np.linalg.norm(v - B @ c) < tol * max(1.0, np.linalg.norm(v))
        if np.linalg.norm(resid) < tol * max(1.0, np.linalg.norm(v)):
            continue
        if in_span and len(basis) > 0:
            # v is a fractional combination: swap it in for the longest basis
            # vector it refines, then re-verify everything at the end
            basis.append(v)
            basis = _reduce_pairwise(basis, tol)
        else:
            basis.append(v)
        if len(basis) > 3:
            basis = _reduce_pairwise(basis, tol)[:3]
    if len(basis) < 3:
        raise AssemblyError("seam translations span rank %d < 3" % len(basis))
    basis = np.array(basis[:3])
    # verify every observed translation is an integer combination
    for v in vs:
        c = np.linalg.solve(basis.T, v)
        if np.linalg.norm(c - np.round(c)) > 1e-4:
            raise AssemblyError(
                "seam translation %s is not integral in the extracted lattice" % v
            )
    return _canonical_hexagonal(basis, tol)


def _reduce_pairwise(basis, tol):
    """Greedy size reduction; keeps the span, shrinks vectors."""
    basis = [v.copy() for v in basis]
    changed = True
    it = 0
    while changed and it < 100:
        changed = False
        it += 1
        basis.sort(key=lambda v: np.linalg.norm(v))
        for i in range(len(basis)):
            for j in range(len(basis)):
                if i == j:
                    continue
                k = np.round(np.dot(basis[i], basis[j]) / np.dot(basis[j], basis[j]))
                if k != 0:
                    w = basis[i] - k * basis[j]
                    if np.linalg.norm(w) < np.linalg.norm(basis[i]) - tol:
                        basis[i] = w
                        changed = True
    basis = [v for v in basis if np.linalg.norm(v) > tol]
    return basis


def _canonical_hexagonal(basis, tol):
    """Pick (a1, a2, c): c the shortest vertical combo, a1/a2 shortest horizontal."""
    rng = range(-4, 5)
    combos = []
    for i in rng:
        for j in rng:
            for k in rng:
                if i == j == k == 0:
                    continue
                combos.append((np.array([i, j, k]) @ basis, (i, j, k)))
    vertical = [
        v for v, _ in combos if np.hypot(v[0], v[1]) < 1e-5 * max(1.0, abs(v[2]))
    ]
    horizontal = [v for v, _ in combos if abs(v[2]) < 1e-5 * np.hypot(v[0], v[1])]
    if not vertical or len(horizontal) < 2:
        # not axis-aligned: return raw basis
        return basis, {"hexagonal": False}
    c = min(vertical, key=lambda v: abs(v[2]))
    if c[2] < 0:
        c = -c
    horizontal.sort(key=lambda v: np.linalg.norm(v))
    a1 = horizontal[0]
    a2 = None
    for v in horizontal[1:]:
        if np.linalg.norm(np.cross(a1, v)) > tol * np.linalg.norm(a1) * np.linalg.norm(v):
            a2 = v
            break
    if a2 is None:
        return basis, {"hexagonal": False}
    new = np.array([a1, a2, c])
    if abs(np.linalg.det(new)) < tol:
        return basis, {"hexagonal": False}
    # the canonical basis must generate the same lattice
    M = np.linalg.solve(new.T, basis.T).T
    if np.linalg.norm(M - np.round(M)) > 1e-4 or abs(abs(np.linalg.det(np.round(M))) - 1) > 1e-6:
        return basis, {"hexagonal": False}
    a_len = 0.5 * (np.linalg.norm(a1) + np.linalg.norm(a2))
    cosang = np.dot(a1, a2) / (np.linalg.norm(a1) * np.linalg.norm(a2))
    info = {
        "hexagonal": bool(
            abs(np.linalg.norm(a1) - np.linalg.norm(a2)) < 1e-3 * a_len
            and abs(abs(cosang) - 0.5) < 1e-3
        ),
        "c_over_a": float(abs(c[2]) / a_len),
    }
    return new, info


def weld(patch, seams, weld_tol, scale=1.0):
    """Close an open patch into a quotient mesh.

    Each seam pair must differ by a constant translation along the seam; the
    set of those translations generates the lattice.  Raises AssemblyError
    with the worst pair distance when a seam does not match.
    """
    diffs = []
    for seam in seams:
        a = patch.vertices[seam.pairs[:, 0]]
        b = patch.vertices[seam.pairs[:, 1]]
        d = a - b
        spread = np.linalg.norm(d - np.median(d, axis=0), axis=1)
        if np.max(spread) > weld_tol * max(scale, 1e-300):
            k = int(np.argmax(spread))
            raise AssemblyError(
                "seam '%s' translation is not constant (worst pair %d: %.3e)"
                % (seam.kind, k, float(np.max(spread))),
                worst_pair=(int(seam.pairs[k, 0]), int(seam.pairs[k, 1])),
            )
        diffs.append(np.median(d, axis=0))

    lattice, lat_info = extract_lattice(diffs, tol=10 * weld_tol * scale)

    dsu = _OffsetDSU(patch.n_vertices)
    for seam, d in zip(seams, diffs):
        coeff = np.linalg.solve(lattice.T, d)
        icoeff = np.round(coeff).astype(np.int64)
        if np.linalg.norm(coeff - icoeff) > 1e-4:
            raise AssemblyError("seam '%s' translation %s is not a lattice vector"
                                % (seam.kind, d))
        for keep, merge in seam.pairs:
            dsu.union(int(keep), int(merge), icoeff)

    # compact representatives
    roots = np.array([dsu.find(i) for i in range(patch.n_vertices)])
    rep_ids = np.unique(roots)
    remap = -np.ones(patch.n_vertices, dtype=np.int64)
    remap[rep_ids] = np.arange(len(rep_ids))

    new_tris = np.empty_like(patch.triangles)
    new_offs = np.zeros(patch.triangles.shape + (3,), dtype=np.int64)
    for t in range(patch.n_triangles):
        for c in range(3):
            v = int(patch.triangles[t, c])
            r = dsu.find(v)
            off = dsu.off[v] if v != r else np.zeros(3, dtype=np.int64)
            new_tris[t, c] = remap[r]
            new_offs[t, c] = off + patch.offsets[t, c]
    # normalize per-triangle offsets (quotient representative choice)
    new_offs -= new_offs[:, :1, :]

    tags = {}
    for name, ids in patch.vertex_tags.items():
        tags[name] = np.unique(remap[roots[np.asarray(ids, dtype=np.int64)]])
    fields = {}
    for name, arr in patch.fields.items():
        if isinstance(arr, np.ndarray) and len(arr) == patch.n_vertices:
            fields[name] = arr[rep_ids]
        else:
            fields[name] = arr

    welded = PeriodicMesh(
        vertices=patch.vertices[rep_ids],
        triangles=new_tris,
        lattice=lattice,
        offsets=new_offs,
        vertex_tags=tags,
        fields=fields,
    )
    welded.fields["lattice_info"] = lat_info
    return welded
