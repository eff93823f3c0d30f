"""Simple calibration meshes (sphere, plane patch, cylinder, catenoid)."""

from __future__ import annotations

import numpy as np

from .pmesh import PeriodicMesh


def icosphere(radius=1.0, subdivisions=3):
    """Subdivided icosahedron projected to the sphere."""
    phi = (1 + np.sqrt(5)) / 2
    verts = np.array(
        [
            [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
            [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
            [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
        ],
        dtype=float,
    )
    verts /= np.linalg.norm(verts[0])
    faces = np.array(
        [
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ],
        dtype=np.int64,
    )
    for _ in range(subdivisions):
        mid = {}
        vlist = verts.tolist()

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in mid:
                p = 0.5 * (verts[i] + verts[j])
                p = p / np.linalg.norm(p)
                mid[key] = len(vlist)
                vlist.append(p.tolist())
            return mid[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]
        verts = np.array(vlist)
        faces = np.array(new_faces, dtype=np.int64)
    return PeriodicMesh(vertices=radius * verts, triangles=faces)


def plane_patch(n=20, size=1.0):
    """Flat square grid in the z = 0 plane (open mesh)."""
    xs = np.linspace(0, size, n + 1)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    verts = np.stack([X.ravel(), Y.ravel(), np.zeros((n + 1) ** 2)], axis=1)
    tris = []
    for i in range(n):
        for j in range(n):
            v00 = i * (n + 1) + j
            v10 = (i + 1) * (n + 1) + j
            v11 = (i + 1) * (n + 1) + j + 1
            v01 = i * (n + 1) + j + 1
            tris += [[v00, v10, v11], [v00, v11, v01]]
    return PeriodicMesh(vertices=verts, triangles=np.array(tris, dtype=np.int64))


def interior_vertex_mask(mesh):
    """Vertices not on any boundary edge (edges with a single triangle)."""
    count = {}
    for corners in mesh.triangles:
        for c in range(3):
            a, b = int(corners[c]), int(corners[(c + 1) % 3])
            key = (min(a, b), max(a, b))
            count[key] = count.get(key, 0) + 1
    mask = np.ones(mesh.n_vertices, dtype=bool)
    for (a, b), k in count.items():
        if k == 1:
            mask[a] = mask[b] = False
    return mask


def cylinder_open(radius=1.0, height=2.0, n_around=48, n_axial=24):
    """Open cylinder (capless), axis z."""
    ths = np.linspace(0, 2 * np.pi, n_around, endpoint=False)
    zs = np.linspace(-height / 2, height / 2, n_axial + 1)
    verts = []
    for z in zs:
        for t in ths:
            verts.append([radius * np.cos(t), radius * np.sin(t), z])
    verts = np.array(verts)
    tris = []
    for j in range(n_axial):
        for i in range(n_around):
            i2 = (i + 1) % n_around
            v00 = j * n_around + i
            v10 = j * n_around + i2
            v01 = (j + 1) * n_around + i
            v11 = (j + 1) * n_around + i2
            tris += [[v00, v10, v11], [v00, v11, v01]]
    return PeriodicMesh(vertices=verts, triangles=np.array(tris, dtype=np.int64))


def catenoid(neck=1.0, height=1.6, n_around=48, n_axial=24):
    """Exact catenoid patch between two rings (open mesh)."""
    ths = np.linspace(0, 2 * np.pi, n_around, endpoint=False)
    zs = np.linspace(-height / 2, height / 2, n_axial + 1)
    verts = []
    for z in zs:
        r = neck * np.cosh(z / neck)
        for t in ths:
            verts.append([r * np.cos(t), r * np.sin(t), z])
    verts = np.array(verts)
    mesh = cylinder_open(1.0, height, n_around, n_axial)
    return PeriodicMesh(vertices=verts, triangles=mesh.triangles)
