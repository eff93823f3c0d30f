import numpy as np
import pytest

from screwtpms import theta as th
from screwtpms.errors import DomainError


def brute_force_theta(z, tau, terms=200):
    """Direct 200-term sum of the same alternating series (oracle)."""
    q = np.exp(1j * np.pi * tau)
    total = 0j
    for n in range(terms):
        total += 2 * (-1) ** n * q ** ((n + 0.5) ** 2) * np.sin((2 * n + 1) * np.pi * z)
    return total


def test_zero_at_lattice_points():
    tau = 0.5 + 0.8j
    assert th.theta(0, tau) == 0
    assert abs(th.theta(1 + tau, tau)) < 1e-14
    assert abs(th.theta(-2 + 3 * tau, tau)) < 1e-10


def test_unit_shift_flips_sign():
    tau = 0.4 + 0.9j
    z = 0.21 + 0.13j
    a = th.theta(z + 1, tau)
    b = -th.theta(z, tau)
    assert abs(a - b) < 1e-14 * abs(b)


def test_against_direct_series_oracle():
    val = th.theta(0.3, 2.0j)
    ref = brute_force_theta(0.3, 2.0j)
    assert abs(val - ref) < 1e-10 * abs(ref)


def test_quasi_shift_identity_and_basic_values():
    tau = 0.3 + 0.7j
    z = 0.2 + 0.1j
    assert th.theta_quasi_shift(z, 0, 0, tau) == 1
    assert th.theta_quasi_shift(z, 1, 0, tau) == -1
    mult = th.theta_quasi_shift(z, 0, 1, tau)
    ratio = th.theta(z + tau, tau) / th.theta(z, tau)
    assert abs(ratio - mult) < 1e-12 * abs(mult)


def test_quasi_periodicity_randomized():
    # Relative to the shifted value: the multiplier magnitude reaches e^{20*pi}
    # for n = +-2, Im tau = 5, so normalizing by theta(z) itself would demand
    # precision far below one ulp.
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(1000):
        tau = rng.uniform(-1, 1) + 1j * rng.uniform(0.3, 5.0)
        z = rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)
        base = th.theta(z, tau)
        if abs(base) < 1e-6:
            continue
        m = rng.integers(-2, 3)
        n = rng.integers(-2, 3)
        lhs = th.theta(z + m + n * tau, tau)
        rhs = th.theta_quasi_shift(z, int(m), int(n), tau) * base
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
    assert worst < 1e-10


def test_oddness():
    rng = np.random.default_rng(11)
    for _ in range(200):
        tau = rng.uniform(-1, 1) + 1j * rng.uniform(0.3, 5.0)
        z = rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)
        a = th.theta(z, tau)
        if abs(a) < 1e-8:
            continue
        assert abs(th.theta(-z, tau) + a) < 1e-12 * abs(a)


def test_large_im_tau_asymptotics():
    rng = np.random.default_rng(13)
    for _ in range(200):
        tau = rng.uniform(-1, 1) + 1j * rng.uniform(6.0, 12.0)
        z = rng.uniform(-0.5, 0.5) + 1j * rng.uniform(-0.5, 0.5)
        lead = 2 * np.exp(1j * np.pi * tau / 4) * np.sin(np.pi * z)
        if abs(lead) < 1e-12:
            continue
        assert abs(th.theta(z, tau) - lead) < 1e-6 * abs(lead)


def test_derivative_matches_central_difference():
    tau = 0.35 + 0.85j
    z = 0.27 + 0.31j
    h = 1e-6
    fd = (th.theta(z + h, tau) - th.theta(z - h, tau)) / (2 * h)
    assert abs(th.theta_dz(z, tau) - fd) < 1e-8 * abs(fd)


def test_domain_errors():
    with pytest.raises(DomainError):
        th.theta(0.1, 0.5 - 0.2j)
    with pytest.raises(DomainError):
        th.theta(np.nan + 0j, 0.5 + 0.5j)
    with pytest.raises(DomainError):
        th.theta(0.1, np.inf + 1j)


def test_low_im_tau_warns():
    with pytest.warns(RuntimeWarning):
        th.theta(0.1, 0.3 + 0.01j)


def test_nome_invariants():
    n = th.Nome(0.5 + 0.8j)
    assert abs(n.q - np.exp(1j * np.pi * (0.5 + 0.8j))) == 0
    assert abs(n.q) < 1
    with pytest.raises(DomainError):
        th.Nome(0.5 - 0.1j)


def test_vectorized_matches_scalar():
    tau = 0.45 + 0.95j
    zs = np.array([0.1 + 0.2j, -0.3 + 0.6j, 0.9 - 0.1j])
    vec = th.theta(zs, tau)
    for z, v in zip(zs, vec):
        assert abs(th.theta(complex(z), tau) - v) < 1e-15 * max(abs(v), 1)
