"""Odd Jacobi theta function with zeros on the lattice m + n*tau.

The convention used throughout the package: theta(z; tau) is the classical
odd theta series evaluated at argument pi*z with nome q = exp(i*pi*tau),

    theta(z; tau) = 2 * sum_{k>=0} (-1)^k q^{(k+1/2)^2} sin((2k+1) pi z),

so its simple zeros sit exactly at z = m + n*tau and the quasi-periodicity

    theta(z + m + n*tau) = (-1)^{m+n} exp(-i n^2 pi tau) exp(-2 i n pi z) theta(z)

holds verbatim.  Arguments are reduced into the centered fundamental cell by
this exact functional equation before summation, which keeps the alternating
series well conditioned for arguments far from the origin.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

# Truncation: stop once the term magnitude drops below TERM_RTOL times the
# partial sum; hard cap on the number of terms.
TERM_RTOL = 1e-16
MAX_TERMS = 512
IM_TAU_WARN = 0.05


@dataclass(frozen=True)
class Nome:
    """Torus modulus tau with its derived nome q = exp(i pi tau)."""

    tau: complex

    def __post_init__(self):
        _check_tau(self.tau)

    @property
    def q(self) -> complex:
        return np.exp(1j * np.pi * self.tau)


def _check_tau(tau):
    tau = complex(tau)
    if not np.isfinite(tau.real) or not np.isfinite(tau.imag):
        raise DomainError("tau must be finite, got %r" % (tau,))
    if tau.imag <= 0:
        raise DomainError("tau must lie in the upper half plane, got %r" % (tau,))
    if tau.imag < IM_TAU_WARN:
        warnings.warn(
            "Im(tau) = %g < %g: theta series accuracy degrades; "
            "no modular transformation is applied" % (tau.imag, IM_TAU_WARN),
            RuntimeWarning,
            stacklevel=3,
        )
    return tau


def _check_z(z):
    z = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(z)):
        raise DomainError("z must be finite")
    return z


def _reduce(z, tau):
    """Split z = z0 + m + n*tau with z0 in the centered cell; return (z0, m, n)."""
    n = np.round(z.imag / tau.imag)
    a = z.real - n * tau.real
    m = np.round(a)
    z0 = z - m - n * tau
    return z0, m, n


def _series(z0, tau):
    """Alternating q-series on pre-reduced arguments."""
    q = np.exp(1j * np.pi * tau)
    total = np.zeros_like(z0)
    converged = np.zeros(z0.shape, dtype=bool)
    for k in range(MAX_TERMS):
        coeff = 2.0 * (-1) ** k * q ** ((k + 0.5) ** 2)
        term = coeff * np.sin((2 * k + 1) * np.pi * z0)
        total = total + term
        if k >= 2:
            converged |= np.abs(term) <= TERM_RTOL * np.abs(total)
            if converged.all():
                break
    return total


def theta(z, tau):
    """Odd Jacobi theta with simple zeros at the lattice points m + n*tau.

    Accepts scalar or array z; tau may be a complex number or a Nome.
    """
    if isinstance(tau, Nome):
        tau = tau.tau
    tau = _check_tau(tau)
    z = _check_z(z)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    z0, m, n = _reduce(z, tau)
    mult = (-1.0) ** (m + n) * np.exp(-1j * n * n * np.pi * tau - 2j * n * np.pi * z0)
    out = mult * _series(z0, tau)
    return complex(out[0]) if scalar else out


def theta_dz(z, tau):
    """d/dz of theta(z; tau), by the term-wise differentiated series."""
    if isinstance(tau, Nome):
        tau = tau.tau
    tau = _check_tau(tau)
    z = _check_z(z)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    z0, m, n = _reduce(z, tau)
    q = np.exp(1j * np.pi * tau)
    val = np.zeros_like(z0)
    der = np.zeros_like(z0)
    converged = np.zeros(z0.shape, dtype=bool)
    for k in range(MAX_TERMS):
        coeff = 2.0 * (-1) ** k * q ** ((k + 0.5) ** 2)
        arg = (2 * k + 1) * np.pi * z0
        term = coeff * np.sin(arg)
        dterm = coeff * (2 * k + 1) * np.pi * np.cos(arg)
        val = val + term
        der = der + dterm
        if k >= 2:
            converged |= (np.abs(term) <= TERM_RTOL * np.abs(val)) & (
                np.abs(dterm) <= TERM_RTOL * np.abs(der)
            )
            if converged.all():
                break
    mult = (-1.0) ** (m + n) * np.exp(-1j * n * n * np.pi * tau - 2j * n * np.pi * z0)
    out = mult * (der - 2j * n * np.pi * val)
    return complex(out[0]) if scalar else out


def theta_quasi_shift(z, m, n, tau):
    """Multiplier mu with theta(z + m + n*tau) = mu * theta(z).

    mu = (-1)^{m+n} exp(-i n^2 pi tau) exp(-2 i n pi z).
    """
    if isinstance(tau, Nome):
        tau = tau.tau
    tau = _check_tau(tau)
    z = _check_z(z)
    return (-1.0) ** (m + n) * np.exp(-1j * n * n * np.pi * tau - 2j * n * np.pi * z)


def log_dz_theta(z, tau):
    """Logarithmic derivative theta'(z)/theta(z)."""
    return theta_dz(z, tau) / theta(z, tau)
