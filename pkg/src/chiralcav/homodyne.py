"""Homodyne statistics for discriminating ``|alpha>`` from ``|-alpha>``.

The outcome variable is ``x = X_phi / 2``: a coherent state aligned with
``phi`` gives a Gaussian in ``x`` centred at ``|alpha|`` with variance 1/4,
and the decision rule is ``x > 0 -> L``, ``x < 0 -> R``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, special

from .params import Chirality
from .qlinalg import creation

OUTCOME_VARIANCE = 0.25


@dataclass(frozen=True)
class Verdict:
    outcome_x: float
    label: Chirality
    degenerate: bool = False


def quadrature_operator(phi: float, N: int) -> np.ndarray:
    """``X_phi = e^{i phi} a^dag + e^{-i phi} a`` on the truncated Fock space."""
    x = np.exp(1j * phi) * creation(N)
    return x + x.conj().T


def outcome_density(sign: int, modulus: float) -> Callable:
    """Density of ``x`` for the state ``|sign * alpha>`` measured along ``arg(alpha)``."""
    if modulus < 0:
        raise ValueError("modulus must be >= 0")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    centre = sign * modulus
    norm = math.sqrt(2 / math.pi)

    def f(x):
        return norm * np.exp(-2.0 * (np.asarray(x) - centre) ** 2)

    return f


def classify(x: float) -> Verdict:
    if x > 0:
        return Verdict(float(x), Chirality.L)
    if x < 0:
        return Verdict(float(x), Chirality.R)
    return Verdict(float(x), Chirality.L, degenerate=True)


def empirical_error_rate(D: float) -> float:
    """Error of the midpoint rule between Gaussians (variance 1/4) ``D`` apart."""
    if D < 0:
        raise ValueError("D must be >= 0")
    return 0.5 * float(special.erfc(D / math.sqrt(2)))


def _spectral(rho: np.ndarray, phi: float):
    N = rho.shape[0] - 1
    lam, vec = np.linalg.eigh(quadrature_operator(phi, N) / 2)
    w = np.einsum("ik,ij,jk->k", vec.conj(), rho, vec).real
    return lam, w


def sample_outcomes(state, phi: float, count: int, seed: int) -> np.ndarray:
    """Draw homodyne outcomes ``x``.

    ``state`` is either a complex displacement (exact Gaussian draws) or a
    reduced cavity density matrix (draws from the spectrum of the truncated
    ``X_phi / 2``).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    if np.ndim(state) == 0:
        alpha = complex(state)
        mean = abs(alpha) * math.cos(np.angle(alpha) - phi)
        return rng.normal(mean, math.sqrt(OUTCOME_VARIANCE), size=count)
    rho = np.asarray(state, dtype=complex)
    lam, w = _spectral(rho, phi)
    if w.min() < -1e-9:
        raise ValueError(f"state is not positive (weight {w.min():.3e})")
    w = np.clip(w, 0, None)
    return rng.choice(lam, size=count, p=w / w.sum())


def hermite_functions(x: np.ndarray, N: int) -> np.ndarray:
    """``<x|n>`` for ``x = (a + a^dag)/2``, rows ``n = 0..N`` (stable recurrence)."""
    q = math.sqrt(2) * np.asarray(x, dtype=float)
    out = np.empty((N + 1,) + q.shape)
    out[0] = math.pi**-0.25 * np.exp(-q * q / 2)
    if N >= 1:
        out[1] = math.sqrt(2) * q * out[0]
    for n in range(2, N + 1):
        out[n] = math.sqrt(2 / n) * q * out[n - 1] - math.sqrt((n - 1) / n) * out[n - 2]
    # Jacobian of q = sqrt(2) x folded into the amplitude
    return out * 2**0.25


def quadrature_density(rho: np.ndarray, phi: float, x) -> np.ndarray:
    """Continuous outcome density ``<x, phi| rho |x, phi>`` of a cavity state."""
    rho = np.asarray(rho, dtype=complex)
    N = rho.shape[0] - 1
    ph = np.exp(1j * phi * np.arange(N + 1))
    rot = ph.conj()[:, None] * rho * ph[None, :]
    psi = hermite_functions(np.atleast_1d(x), N)
    return np.einsum("mx,mn,nx->x", psi, rot, psi).real


def tail_probability(rho: np.ndarray, phi: float, positive: bool) -> float:
    """Probability that the outcome falls in ``x > 0`` (or ``x < 0``)."""
    N = rho.shape[0] - 1
    reach = 6.0 + math.sqrt(N + 1)
    lo, hi = (0.0, reach) if positive else (-reach, 0.0)
    val, _ = integrate.quad(lambda s: quadrature_density(rho, phi, s)[0], lo, hi,
                            epsabs=1e-13, epsrel=1e-10, limit=400)
    return float(val)


def exact_error_rate(rho_L: np.ndarray, rho_R: np.ndarray, phi: float) -> float:
    """Equal-prior error of the sign rule for two (possibly mixed) cavity states."""
    return 0.5 * (tail_probability(rho_L, phi, positive=False) + tail_probability(rho_R, phi, positive=True))


def coherent_moments(alpha: complex, phi: float) -> tuple[float, float]:
    return abs(alpha) * math.cos(np.angle(alpha) - phi), OUTCOME_VARIANCE


def spectral_moments(rho: np.ndarray, phi: float) -> tuple[float, float]:
    lam, w = _spectral(rho, phi)
    m = float(np.dot(w, lam))
    return m, float(np.dot(w, (lam - m) ** 2))

