import numpy as np
import pytest

from screwtpms import period as pd
from screwtpms.errors import BracketError, DomainError


def test_psi_symmetry():
    for tau in (0.5 + 0.9j, 0.3 + 0.5j, 0.8 + 1.5j):
        a = pd.psi(tau)
        b = pd.psi(tau, inverse=True)
        assert abs(a - b) / abs(a) < 1e-8


def test_psi_symmetry_defect_small():
    assert pd.psi_symmetry_defect(0.5 + 0.9j) < 1e-10


def test_arg_psi_equals_arg_tau_on_arc():
    # 30 interior points of the arc |tau - 1/3| = 1/3
    for ang in np.linspace(0.35, 2.9, 30):
        tau = 1 / 3 + (1 / 3) * np.exp(1j * ang)
        assert abs(np.angle(pd.psi(tau)) - np.angle(tau)) < 1e-6


def test_arg_psi_asymptotics():
    # arg psi -> pi (1/2 - Re tau / 3); error shrinks from Im = 6 to Im = 12
    for re in (0.25, 0.5, 0.75):
        target = np.pi * (0.5 - re / 3)
        errs = [abs(np.angle(pd.psi(re + 1j * im)) - target) for im in (6.0, 10.0, 12.0)]
        assert errs[1] < 1e-2
        assert errs[2] < errs[0]
    assert abs(np.angle(pd.psi(0.5 + 8j)) - np.pi / 3) < 2e-2


def test_theta_h_on_imaginary_axis():
    for im in (0.6, 0.9, 1.5):
        assert abs(pd.theta_h(1e-9 + 1j * im) - np.pi / 2) < 1e-6


def test_theta_v_values():
    assert abs(pd.theta_v(1 + 1j)) < 1e-15
    assert abs(pd.theta_v(1j) - np.pi / 4) < 1e-15
    # monotone decrease toward 0+ along Re tau = 0.5
    vals = [pd.theta_v(0.5 + 1j * im) for im in (2.0, 4.0, 8.0)]
    assert vals[0] > vals[1] > vals[2] > 0
    with pytest.raises(DomainError):
        pd.theta_v(1.0)


def test_search_domain():
    dom = pd.OMEGA_T
    assert dom.contains(0.5 + 0.6j)
    assert not dom.contains(0.5 + 0.2j)      # inside an excluded arc
    assert not dom.contains(-0.1 + 0.5j)
    assert not dom.contains(0.5 - 0.1j)
    assert dom.arc_im(0.5) == pytest.approx(np.sqrt(1 / 9 - 1 / 36))
    assert dom.arc_im(0.999) < 0.06


def test_solve_im_mid_family():
    diag = pd.solve_im(0.5, bracket=(0.35, 6.0))
    assert abs(diag.residual) < 1e-9
    assert pd.OMEGA_T.contains(diag.tau)
    assert diag.theta_h == pytest.approx(float(np.angle(diag.psi)))
    # bracket ends have opposite residual signs
    lo, hi = pd.OMEGA_T.default_bracket(0.5)
    assert pd.period_residual(0.5 + 1j * lo) < 0
    assert pd.period_residual(0.5 + 10j) > 0


def test_solve_im_ends_of_family():
    for re in (0.2, 0.8):
        diag = pd.solve_im(re)
        assert abs(diag.residual) < 1e-9
        assert pd.OMEGA_T.contains(diag.tau)


def test_solve_im_bad_bracket():
    with pytest.raises(BracketError):
        pd.solve_im(0.5, bracket=(4.0, 9.0))


def test_trace_curve_connected_and_trending():
    res = np.linspace(0.1, 0.9, 9)
    diags = pd.trace_curve(res)
    ims = np.array([d.tau.imag for d in diags])
    assert all(abs(d.residual) < 1e-9 for d in diags)
    # connected polyline: consecutive roots differ by < 5x sample spacing
    assert np.all(np.abs(np.diff(ims)) < 5 * (res[1] - res[0]))
    # Im tau decreases toward both ends (single interior maximum, qualitatively)
    k = int(np.argmax(ims))
    assert 0 < k < len(ims) - 1
    assert np.all(np.diff(ims[: k + 1]) > 0)
    assert np.all(np.diff(ims[k:]) < 0)


def test_wrap_angle():
    assert pd.wrap_angle(np.pi) == np.pi
    assert pd.wrap_angle(-np.pi) == np.pi
    assert pd.wrap_angle(3 * np.pi / 2) == pytest.approx(-np.pi / 2)
