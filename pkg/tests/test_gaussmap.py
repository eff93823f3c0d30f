import numpy as np
import pytest

from screwtpms import gaussmap as gm
from screwtpms.errors import ContinuationError, PoleError

TAU = 0.45 + 0.85j


def test_normalization_at_symmetry_center():
    for tau in (0.5 + 0.9j, 0.2 + 0.5j, 0.8 + 1.4j, TAU):
        assert abs(gm.gsq(tau / 6, tau) - 1) < 1e-10


def test_zeros():
    tau = 0.5 + 0.9j
    for z in (1e-9, 1 / 3, 2 / 3):
        assert abs(gm.gsq(z, tau)) < 1e-7


def test_pole_error_carries_location():
    tau = 0.5 + 0.9j
    with pytest.raises(PoleError) as exc:
        gm.gsq(tau / 3, tau)
    assert exc.value.pole is not None


def test_functional_equation():
    # G^2(z + 1/3) = exp(2 i pi / 3) G^2(z).  The constant must be a cube
    # root of unity because G^2 has period 1; sign conventions that violate
    # that are untenable.
    rng = np.random.default_rng(3)
    c = np.exp(2j * np.pi / 3)
    for _ in range(300):
        tau = rng.uniform(0.05, 0.95) + 1j * rng.uniform(0.3, 1.8)
        z = rng.uniform(0, 1) + rng.uniform(0.02, 0.98) * tau
        a = gm.gsq(z + 1 / 3, tau)
        b = c * gm.gsq(z, tau)
        assert abs(a - b) < 1e-10 * abs(b)


def test_double_periodicity():
    z = 0.11 + 0.21j
    for shift in (1, TAU, 2 + TAU):
        a = gm.gsq(z + shift, TAU)
        b = gm.gsq(z, TAU)
        assert abs(a - b) < 1e-12 * abs(b)


def test_product_form_agrees():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(500):
        tau = rng.uniform(0.05, 0.95) + 1j * rng.uniform(0.35, 1.6)
        z = rng.uniform(0, 1) + rng.uniform(0.03, 0.97) * tau
        a = gm.gsq(z, tau)
        b = gm.gsq_product_form(z, tau)
        worst = max(worst, abs(a - b) / abs(a))
    assert worst < 1e-9


def test_product_form_normalization_and_zero():
    tau = 0.5 + 0.9j
    assert abs(gm.gsq_product_form(tau / 6, tau) - 1) < 1e-10
    assert abs(gm.gsq_product_form(1 / 3 + 1e-9, tau)) < 1e-7


def test_winding_numbers():
    tau = TAU
    for z in gm.zeros_of_gsq(tau):
        assert gm.winding_number(z, tau) == 1
    for p in gm.poles_of_gsq(tau):
        assert gm.winding_number(p, tau) == -1


def test_branched_torus_layout():
    bt = gm.BranchedTorus(TAU)
    assert len(bt.branch_points) == 6
    assert bt.is_three_division()
    assert len(bt.cuts) == 3
    # cuts are parallel vertical segments, pairwise disjoint in the cell
    starts = [c[0] for c in bt.cuts]
    assert all(abs((starts[k] - starts[0]) - k / 3) < 1e-15 for k in range(3))


def test_continuation_trivial_loop():
    tau = TAU
    t = np.linspace(0, 2 * np.pi, 200)
    center = 0.5 + 0.55 * tau
    loop = center + 0.04 * np.exp(1j * t)
    seed = np.sqrt(gm.gsq(loop[0], tau))
    vals = gm.continue_G(loop, tau, seed)
    assert abs(vals[-1] - seed) < 1e-8 * abs(seed)


def test_continuation_around_branch_point_flips_sign():
    tau = TAU
    t = np.linspace(0, 2 * np.pi, 400)
    loop = 1 / 3 + 0.05 * np.exp(1j * t)
    seed = np.sqrt(gm.gsq(loop[0], tau))
    vals = gm.continue_G(loop, tau, seed)
    assert abs(vals[-1] + seed) < 1e-8 * abs(seed)
    # oracle: argument-principle winding of G^2 around a simple zero is +1,
    # so the square root must come back negated
    assert gm.winding_number(1 / 3, tau, radius=0.05) == 1


def test_continuation_rejects_paths_near_branch_points():
    tau = TAU
    path = np.linspace(0, 1, 50) * (tau / 3)  # passes through branch points
    with pytest.raises(ContinuationError):
        gm.continue_G(path, tau, 1.0)


def test_continuation_real_positive_on_arc_segment():
    # on the arc |tau - 1/3| = 1/3, G is real positive along 0 -> tau/3
    tau = 1 / 3 + (1 / 3) * np.exp(2j * 1.0)
    ts = np.linspace(0.02, 0.98, 25)
    path = ts * tau / 3
    seed = np.sqrt(gm.gsq(path[0], tau))
    if seed.real < 0:
        seed = -seed
    vals = gm.continue_G(path, tau, seed)
    assert np.all(np.abs(np.imag(vals)) < 1e-9 * np.abs(vals))
    assert np.all(np.real(vals) > 0)


def test_appendix_arc_segment_angles():
    # on the arc |tau - 2/3| = 1/3: along 0 -> (1-tau)/3, arg G = -pi/6, |G| < 1
    tau = 2 / 3 + (1 / 3) * np.exp(1j * 1.9)
    ts = np.linspace(0.03, 0.97, 20)
    g2 = gm.gsq(ts * (1 - tau) / 3, tau)
    assert np.all(np.abs(gm.reduce_to_cell(0, tau)) == 0)
    arg = np.angle(g2) / 2
    assert np.all(np.abs(arg - (-np.pi / 6)) < 1e-6)
    assert np.all(np.abs(g2) < 1)


def test_torus_path_sheet_bookkeeping():
    tau = TAU
    # horizontal path at b = 0.6 from u=0.01 to u=0.99 crosses the cuts at
    # u = 1/3 and u = 2/3: two flips, back on sheet 0
    pts = np.array([0.01 + 0.6 * TAU, 0.99 + 0.6 * TAU])
    path = gm.TorusPath.from_points(pts, tau, max_step=0.01)
    assert path.sheets[0] == 0
    assert path.sheets[-1] == 0
    flips = int(np.sum(np.diff(path.sheets) != 0))
    assert flips == 2
    # crossing the u=0 cut flips once
    pts = np.array([-0.05 + 0.6 * TAU, 0.05 + 0.6 * TAU])
    path = gm.TorusPath.from_points(pts, tau, max_step=0.01)
    assert path.sheets[-1] == 1
    # horizontal path at b = 0.1 (below the cut bottoms) crosses nothing
    pts = np.array([-0.05 + 0.1 * tau, 0.99 + 0.1 * tau])
    path = gm.TorusPath.from_points(pts, tau, max_step=0.01)
    assert path.sheets[-1] == 0
    steps = np.abs(np.diff(path.points))
    assert steps.max() <= 0.01 + 1e-12


def test_flat_points_count_and_symmetry():
    pts = gm.flat_points(TAU)
    assert len(pts) == 6
    # closed under z -> z + 1/3 (the screw symmetry downstairs)
    for p in pts:
        q = gm.reduce_to_cell(p + 1 / 3, TAU)
        assert any(
            abs(gm.reduce_to_cell(q - r, TAU, centered=True)) < 1e-6 for r in pts
        )
    # each flat point sits where (G^2)' vanishes
    for p in pts:
        assert abs(gm.gsq_log_dz(p, TAU)) < 1e-7
