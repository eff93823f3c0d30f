"""Surface-constrained mesh polish near the Gauss-map branch points.

The tensor parameter grid maps through the two-sheeted square-root chart, and
the resulting vertex stars around branch points are irregular enough that the
cotangent mean-curvature estimator loses consistency there (the surface is
exactly minimal; the estimator noise is purely a sampling artifact).  This
stage slides the affected vertices tangentially along the exact surface,
minimizing the discrete Willmore energy of the zone.  Every step reprojects
by integrating the Weierstrass form along the parameter step, so vertices
never leave the analytic surface.
"""

from __future__ import annotations

import numpy as np
import torch

from .gaussmap import gsq, poles_of_gsq, reduce_to_cell, zeros_of_gsq
from .quad import gauss_legendre

torch.set_default_dtype(torch.float64)


def _energy_and_grad(X_np, tris_t, weight_t, disp_t, tri_mask_t, gamma,
                     need_grad=True):
    X = torch.tensor(X_np, requires_grad=need_grad)
    p = X[tris_t] + disp_t
    e1 = p[:, 0] - p[:, 2]
    e2 = p[:, 1] - p[:, 0]
    n = torch.cross(-e1, e2, dim=1)
    dbl = torch.linalg.norm(n, dim=1).clamp_min(1e-300)
    cots = []
    for c in range(3):
        u = p[:, (c + 1) % 3] - p[:, c]
        v = p[:, (c + 2) % 3] - p[:, c]
        cots.append((u * v).sum(1) / dbl)
    cot = torch.stack(cots, dim=1)
    V = X.shape[0]
    K = torch.zeros(V, 3, dtype=X.dtype)
    A = torch.zeros(V, dtype=X.dtype)
    tA = 0.5 * dbl
    lensq = torch.zeros(len(p), dtype=X.dtype)
    for c in range(3):
        nxt, prv = (c + 1) % 3, (c + 2) % 3
        w = cot[:, prv].unsqueeze(1)
        K = K.index_add(0, tris_t[:, c], w * (p[:, c] - p[:, nxt]))
        K = K.index_add(0, tris_t[:, nxt], w * (p[:, nxt] - p[:, c]))
        A = A.index_add(0, tris_t[:, c], tA / 3.0)
        lensq = lensq + ((p[:, nxt] - p[:, c]) ** 2).sum(1)
    Hvec = K / (2 * A.clamp_min(1e-300)).unsqueeze(1)
    E = 0.25 * ((Hvec ** 2).sum(1) * A * weight_t).sum()
    # shape barrier: (sum len^2 / (4 sqrt(3) area))^2 is 1 for equilateral
    quality = lensq / (4 * np.sqrt(3.0) * tA.clamp_min(1e-300))
    E = E + gamma * ((quality ** 2) * tri_mask_t).sum()
    if not need_grad:
        return float(E.detach()), None
    E.backward()
    return float(E.detach()), X.grad.numpy()


def _graph_rings(mesh, seeds, radius):
    """Graph distance from seed vertices, capped at radius."""
    V = mesh.n_vertices
    nbr = [[] for _ in range(V)]
    for corners in mesh.triangles:
        a, b, c = (int(x) for x in corners)
        nbr[a] += [b, c]
        nbr[b] += [a, c]
        nbr[c] += [a, b]
    dist = np.full(V, np.iinfo(np.int64).max, dtype=np.int64)
    frontier = list(int(s) for s in seeds)
    for s in frontier:
        dist[s] = 0
    d = 0
    while frontier and d < radius:
        d += 1
        nxt = []
        for v in frontier:
            for u in nbr[v]:
                if dist[u] > d:
                    dist[u] = d
                    nxt.append(u)
        frontier = nxt
    return dist


def _reposition(z_old, g_old, dz, tau, theta, scale, order=6):
    """Exact position increments Re(e^{-i theta} int phi dz) for vertex moves.

    G is continued from the stored per-vertex value; steps are assumed short
    (trust-clipped against the distance to the nearest branch point).
    """
    x, w = gauss_legendre(order)
    t = 0.5 * (x + 1.0)
    wt = 0.5 * w
    z_nodes = z_old[:, None] + t[None, :] * dz[:, None]
    g2 = gsq(z_nodes.ravel(), tau).reshape(z_nodes.shape)
    g = np.sqrt(g2)
    cur = g_old.copy()
    for k in range(len(t)):
        col = g[:, k]
        flip = np.abs(col - cur) > np.abs(col + cur)
        col[flip] = -col[flip]
        cur = col
    inv = 1.0 / g
    phi1 = 0.5 * (inv - g)
    phi2 = 0.5j * (inv + g)
    i1 = (phi1 * wt).sum(1) * dz
    i2 = (phi2 * wt).sum(1) * dz
    i3 = wt.sum() * dz
    rot = np.exp(-1j * theta)
    dX = scale * np.stack([np.real(rot * i1), np.real(rot * i2), np.real(rot * i3)], axis=1)
    return dX, cur


def polish_cell(cell, data, zone_rings=10, iters=400, target=None, lr0=0.2):
    """Tangential Willmore polish of the welded cell around its axis vertices.

    Mutates vertex positions (and the z/gauss fields) in place; vertices stay
    on the exact surface to quadrature accuracy.  Returns the final zone
    energy.
    """
    tau, theta, scale = data.tau, data.theta, data.scale
    axis = cell.vertex_tags.get("axis", np.array([], dtype=np.int64))
    if len(axis) == 0:
        return 0.0
    dist = _graph_rings(cell, axis, zone_rings + 2)
    movable = (dist > 0) & (dist <= zone_rings)
    weight = (dist <= zone_rings + 1).astype(float)

    z = cell.fields["z"].copy()
    gauss = cell.fields["gauss"].copy()
    X = cell.vertices.copy()
    tris_t = torch.tensor(np.asarray(cell.triangles))
    weight_t = torch.tensor(weight)
    lat = cell.lattice if cell.lattice is not None else np.zeros((3, 3))
    disp = cell.offsets @ lat
    disp_t = torch.tensor(disp)

    branch = np.concatenate([zeros_of_gsq(tau), poles_of_gsq(tau)])

    def branch_dist(zz):
        d = np.full(zz.shape, np.inf)
        for p in branch:
            d = np.minimum(d, np.abs(reduce_to_cell(zz - p, tau, centered=True)))
        return d

    mov = np.nonzero(movable)[0]
    ok = np.isfinite(gauss[mov]) & (gauss[mov] != 0)
    mov = mov[ok]
    if len(mov) == 0:
        return 0.0

    # local image-space edge scale per movable vertex
    h_img = np.zeros(cell.n_vertices)
    cnt = np.zeros(cell.n_vertices)
    P = cell.corner_positions()
    for c in range(3):
        L = np.linalg.norm(P[:, (c + 1) % 3] - P[:, c], axis=1)
        np.add.at(h_img, cell.triangles[:, c], L)
        np.add.at(h_img, cell.triangles[:, (c + 1) % 3], L)
        np.add.at(cnt, cell.triangles[:, c], 1)
        np.add.at(cnt, cell.triangles[:, (c + 1) % 3], 1)
    h_img = h_img / np.maximum(cnt, 1)

    def param_caps(zz, gg):
        lam = 0.5 * (np.abs(gg) + 1.0 / np.abs(gg)) * scale
        cap_img = 0.25 * h_img[mov] / lam
        cap_branch = 0.25 * branch_dist(zz)
        return np.minimum(cap_img, cap_branch)

    s_param = param_caps(z[mov], gauss[mov])

    # triangles whose quality the step acceptance guards
    in_zone_tri = np.zeros(cell.n_triangles, dtype=bool)
    zone_set = np.zeros(cell.n_vertices, dtype=bool)
    zone_set[mov] = True
    for c in range(3):
        in_zone_tri |= zone_set[cell.triangles[:, c]]
    zone_tris = np.asarray(cell.triangles)[in_zone_tri]
    zone_disp = disp[in_zone_tri]

    def min_zone_angle(Xq):
        p = Xq[zone_tris] + zone_disp
        worst = np.inf
        for c in range(3):
            u = p[:, (c + 1) % 3] - p[:, c]
            v = p[:, (c + 2) % 3] - p[:, c]
            cosang = np.sum(u * v, axis=1) / np.maximum(
                np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1), 1e-300
            )
            worst = min(worst, float(np.arccos(np.clip(cosang, -1, 1)).min()))
        return worst

    angle_floor = min(np.deg2rad(8.0), 0.5 * min_zone_angle(X))

    tri_mask_t = torch.tensor(in_zone_tri.astype(float))
    # balance the barrier against the initial Willmore term
    E_w0, _ = _energy_and_grad(X, tris_t, weight_t, disp_t, tri_mask_t, 0.0,
                               need_grad=False)
    n_zone_t = max(int(in_zone_tri.sum()), 1)
    gamma = 0.02 * max(E_w0, 1e-12) / n_zone_t

    E, g = _energy_and_grad(X, tris_t, weight_t, disp_t, tri_mask_t, gamma)
    lr = lr0
    m1 = np.zeros((len(mov), 2))
    m2 = np.zeros((len(mov), 2))
    b1, b2, eps = 0.9, 0.999, 1e-12
    tstep = 0
    for it in range(iters):
        rot = np.exp(-1j * theta)
        phi = np.stack(
            [
                0.5 * (1.0 / gauss[mov] - gauss[mov]),
                0.5j * (1.0 / gauss[mov] + gauss[mov]),
                np.ones(len(mov), dtype=complex),
            ],
            axis=1,
        )
        Jx = scale * np.real(rot * phi)
        Jy = scale * np.real(rot * phi * 1j)
        gz = np.stack([(Jx * g[mov]).sum(1), (Jy * g[mov]).sum(1)], axis=1)

        tstep += 1
        m1 = b1 * m1 + (1 - b1) * gz
        m2 = b2 * m2 + (1 - b2) * gz ** 2
        mh = m1 / (1 - b1 ** tstep)
        vh = m2 / (1 - b2 ** tstep)
        raw = -lr * s_param[:, None] * mh / (np.sqrt(vh) + eps)
        ln = np.hypot(raw[:, 0], raw[:, 1])
        clip = np.minimum(1.0, 0.3 * s_param / np.maximum(ln, 1e-300))
        raw *= clip[:, None]

        dz = raw[:, 0] + 1j * raw[:, 1]
        dX, g_new = _reposition(z[mov], gauss[mov], dz, tau, theta, scale)
        X_try = X.copy()
        X_try[mov] += dX
        if min_zone_angle(X_try) < angle_floor:
            E_try, g_try = np.inf, None
        else:
            E_try, g_try = _energy_and_grad(X_try, tris_t, weight_t, disp_t,
                                            tri_mask_t, gamma)
        if E_try < E:
            X = X_try
            z[mov] = z[mov] + dz
            gauss[mov] = g_new
            E, g = E_try, g_try
            lr = min(lr * 1.05, 1.0)
            s_param = param_caps(z[mov], gauss[mov])
        else:
            lr *= 0.5
            m1[:] = 0.0
            m2[:] = 0.0
            tstep = 0
            if lr < 1e-7:
                break
        if target is not None and E < target:
            break

    cell.vertices[:] = X
    cell.fields["z"] = z
    cell.fields["gauss"] = gauss
    return E
