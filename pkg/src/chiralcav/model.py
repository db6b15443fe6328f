"""Pulses, noise, Hamiltonians and collapse operators for one enantiomer.

The full Hamiltonian (rotating-wave, interaction picture)::

    H(t) = Omega(t) e^{i Delta t} |1><2| + g a e^{i(Delta+delta)t} |3><2|
           + s Omega~(t) e^{-i delta t} |1><3| + h.c.

with ``s = +1`` for L and ``-1`` for R.  Dense builders here are the reference;
:func:`drive_tables` samples the same pulses at the RK4 stage times for
the compiled propagators in :mod:`chiralcav.dynamics`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import analytics
from .params import (
    NO_ERRORS,
    AwgnConfig,
    Chirality,
    DecoherenceRates,
    PhysicalParams,
    SystematicErrors,
    effective_couplings,
)
from .qlinalg import annihilation, creation, embed, number_operator, transition


@dataclass(frozen=True)
class NoiseTrace:
    """Sample-and-hold noise: ``values[k]`` holds on ``[k*grid_dt, (k+1)*grid_dt)``."""

    values: np.ndarray
    grid_dt: float
    sigma: float = 0.0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.minimum((t / self.grid_dt).astype(np.int64), len(self.values) - 1)
        out = self.values[np.maximum(idx, 0)]
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PulseNoise:
    """Frozen noise traces for the two classical drives of one run."""

    omega: NoiseTrace | None = None
    omega_tilde: NoiseTrace | None = None


def _check_time(t, T):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > T * (1 + 1e-12)):
        raise ValueError(f"time outside [0, T={T}]")
    return t


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def envelope_omega(t, p: PhysicalParams, e: SystematicErrors = NO_ERRORS, noise: NoiseTrace | None = None):
    """1-2 drive ``(1+eta2) A2 g sin(pi t/T)`` plus frozen noise."""
    t = _check_time(t, p.T)
    y = (1 + e.eta2) * p.A2 * p.g * np.sin(math.pi * t / p.T)
    if noise is not None:
        y = y + noise(t)
    return _scalar(y)


def envelope_omega_tilde(
    t,
    p: PhysicalParams,
    e: SystematicErrors = NO_ERRORS,
    noise: NoiseTrace | None = None,
    correction_kappa: float | None = None,
):
    """1-3 drive ``(1+eta1) A1 g sin(pi t/T)``, optionally pre-compensated for
    cavity decay by ``exp(kappa (T - t) / 2)``, plus frozen noise."""
    t = _check_time(t, p.T)
    y = (1 + e.eta1) * p.A1 * p.g * np.sin(math.pi * t / p.T)
    if correction_kappa:
        y = y * np.exp(correction_kappa * (p.T - t) / 2)
    if noise is not None:
        y = y + noise(t)
    return _scalar(y)


def awgn_sigma(base: Callable, T: float, snr_db: float) -> float:
    """Noise standard deviation for a signal-to-noise ratio in dB, with the
    signal power averaged over ``[0, T]``."""
    if snr_db == math.inf:
        return 0.0
    power = analytics._complex_quad(lambda s: complex(base(s) ** 2), 0.0, T).real / T
    return math.sqrt(power / 10 ** (snr_db / 10))


def awgn_trace(base: Callable, cfg: AwgnConfig, T: float) -> NoiseTrace:
    """Gaussian sample-and-hold noise for the envelope ``base`` (deterministic per seed)."""
    ncell = int(math.ceil(T / cfg.grid_dt - 1e-9))
    sigma = awgn_sigma(base, T, cfg.snr_db)
    rng = np.random.default_rng(int(cfg.seed))
    values = rng.standard_normal(ncell) * sigma
    return NoiseTrace(values=values, grid_dt=cfg.grid_dt, sigma=sigma)


def pulse_noise(p: PhysicalParams, e: SystematicErrors, cfg: AwgnConfig) -> PulseNoise:
    """Independent noise for both drives, seeded ``cfg.seed`` and ``cfg.seed``-derived."""
    ss = np.random.SeedSequence(int(cfg.seed))
    s_om, s_omt = (int(c.generate_state(1, np.uint64)[0]) for c in ss.spawn(2))
    om = awgn_trace(lambda t: envelope_omega(t, p, e), AwgnConfig(cfg.snr_db, s_om, cfg.grid_dt), p.T)
    omt = awgn_trace(lambda t: envelope_omega_tilde(t, p, e), AwgnConfig(cfg.snr_db, s_omt, cfg.grid_dt), p.T)
    return PulseNoise(omega=om, omega_tilde=omt)


def build_full_hamiltonian(
    t: float,
    c: Chirality,
    p: PhysicalParams,
    e: SystematicErrors = NO_ERRORS,
    noise: PulseNoise | None = None,
    correction_kappa: float | None = None,
) -> np.ndarray:
    noise = noise or PulseNoise()
    k = effective_couplings(p, e)
    om = envelope_omega(t, p, e, noise.omega)
    omt = c.drive_sign * envelope_omega_tilde(t, p, e, noise.omega_tilde, correction_kappa)
    a = annihilation(p.N)
    h = (
        om * np.exp(1j * k.Delta * t) * embed(transition(0, 1), None, p.N)
        + k.g_cav * np.exp(1j * (k.Delta + k.delta) * t) * embed(transition(2, 1), a, p.N)
        + omt * np.exp(-1j * k.delta * t) * embed(transition(0, 2), None, p.N)
    )
    return h + h.conj().T


def build_effective_hamiltonian(
    t: float, c: Chirality, p: PhysicalParams, e: SystematicErrors = NO_ERRORS
) -> np.ndarray:
    """Effective Hamiltonian in the frame co-rotating with the cavity phase ``phi(t)``.

    It acts on the ``|1>`` sector only:
    ``s_e Omega_e(t) [e^{-i phi} a^dag + e^{i phi} a] |1><1|`` with ``s_e`` = -1 (L), +1 (R).
    """
    w = analytics.omega_e(t, p, e)
    ph = analytics.phase_phi(t, p, e)
    cav = np.exp(-1j * ph) * creation(p.N)
    cav = cav + cav.conj().T
    return c.effective_sign * w * embed(transition(0, 0), cav, p.N)


def effective_frame_rotation(t: float, p: PhysicalParams, e: SystematicErrors = NO_ERRORS) -> np.ndarray:
    """Unitary ``R(t)`` mapping effective-frame states back to the original frame."""
    ph = analytics.phase_phi(t, p, e)
    diag = np.ones((3, p.N + 1), dtype=complex)
    diag[0] = np.exp(1j * ph * np.arange(p.N + 1))
    return np.diag(diag.ravel())


def sigma_minus(i: int, j: int) -> np.ndarray:
    """``|i><j|`` for zero-based ``i < j`` (decay from ``j`` to ``i``)."""
    return transition(i, j)


def sigma_z(i: int, j: int) -> np.ndarray:
    return 0.5 * (transition(j, j) - transition(i, i))


LEVEL_PAIRS = ((0, 1), (0, 2), (1, 2))


def collapse_operators(r: DecoherenceRates, N: int) -> list[np.ndarray]:
    """Operators ``c`` entering ``2 c rho c^dag - c^dag c rho - rho c^dag c``.

    Rates are folded in as ``sqrt(rate / 2)``; zero rates contribute nothing.
    """
    ops = []
    if r.kappa > 0:
        ops.append(math.sqrt(r.kappa / 2) * embed(None, annihilation(N), N))
    if r.gamma > 0:
        ops += [math.sqrt(r.gamma / 2) * embed(sigma_minus(i, j), None, N) for i, j in LEVEL_PAIRS]
    if r.gamma_phi > 0:
        ops += [math.sqrt(r.gamma_phi / 2) * embed(sigma_z(i, j), None, N) for i, j in LEVEL_PAIRS]
    return ops


def quadrature_on_product(phi: float, N: int) -> np.ndarray:
    """``X_phi = e^{i phi} a^dag + e^{-i phi} a`` on the product space."""
    x = np.exp(1j * phi) * creation(N)
    return embed(None, x + x.conj().T, N)


def level_projector(level: int, N: int) -> np.ndarray:
    return embed(transition(level, level), None, N)


def photon_number(N: int) -> np.ndarray:
    return embed(None, number_operator(N), N)


@dataclass(frozen=True)
class DriveTables:
    """Pulses sampled for fixed-step RK4: row ``s`` holds the values at
    ``s*dt``, ``(s+1/2)*dt`` and ``(s+1)*dt``.

    ``omega``/``omega_tilde`` carry all errors, noise, correction and (for the
    1-3 drive) the chirality sign.  Sample-and-hold noise is read at the step
    midpoint for all three stages, so a step never straddles two noise cells
    when the noise grid is a multiple of ``dt``.  ``beta`` and ``shift``
    describe the effective model in the original frame, ``H = shift(t) n |1><1|
    + (beta(t) a^dag + h.c.) |1><1|``; they are ``None`` for the full model.
    """

    N: int
    dt: float
    nsteps: int
    Delta: float
    delta: float
    g_cav: float
    omega: np.ndarray
    omega_tilde: np.ndarray
    beta: np.ndarray | None = None
    shift: np.ndarray | None = None

    @property
    def effective(self) -> bool:
        return self.beta is not None

    @property
    def T(self) -> float:
        return self.nsteps * self.dt


def stage_times(T: float, dt: float) -> tuple[np.ndarray, int]:
    """``(nsteps, 3)`` array of RK4 stage times covering ``[0, T]``."""
    nsteps = int(round(T / dt))
    if abs(nsteps * dt - T) > 1e-9 * T:
        raise ValueError(f"dt={dt} does not divide T={T}")
    s = np.arange(nsteps)[:, None]
    t = (s + np.array([0.0, 0.5, 1.0])) * dt
    return np.minimum(t, T), nsteps


def drive_tables(
    c: Chirality,
    p: PhysicalParams,
    dt: float,
    e: SystematicErrors = NO_ERRORS,
    noise: PulseNoise | None = None,
    correction_kappa: float | None = None,
    mode: str = "full",
) -> DriveTables:
    noise = noise or PulseNoise()
    ts, nsteps = stage_times(p.T, dt)
    mid = np.repeat(ts[:, 1:2], 3, axis=1)
    k = effective_couplings(p, e)
    om = np.asarray(envelope_omega(ts, p, e), dtype=float)
    omt = np.asarray(envelope_omega_tilde(ts, p, e, None, correction_kappa), dtype=float)
    if noise.omega is not None:
        om = om + noise.omega(mid)
    if noise.omega_tilde is not None:
        omt = omt + noise.omega_tilde(mid)
    omt = c.drive_sign * omt
    if mode == "full":
        return DriveTables(p.N, dt, nsteps, k.Delta, k.delta, k.g_cav, om, omt)
    if mode != "effective":
        raise ValueError(f"unknown Hamiltonian mode {mode!r}")
    # second-order couplings from the same (possibly noisy) pulses, original frame
    scale = k.g_cav / (k.Delta * k.delta)
    beta = (c.effective_sign * c.drive_sign) * om * omt * scale
    shift = -(om**2) * k.g_cav**2 / (k.Delta**2 * k.delta)
    zeros = np.zeros_like(om)
    return DriveTables(p.N, dt, nsteps, k.Delta, k.delta, k.g_cav, zeros, zeros, beta.astype(complex), shift)
