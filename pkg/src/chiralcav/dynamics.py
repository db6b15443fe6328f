"""Time propagation: Schroedinger (pure) and master-equation (Lindblad) RK4.

Both propagators accept either a :class:`~chiralcav.model.DriveTables` (fast
compiled path) or any callable ``t -> H(t)`` returning a dense matrix on the
product space (reference path, used for small checks).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _kernels as K
from . import analytics
from .config import ScenarioConfig
from .model import DriveTables, drive_tables, pulse_noise
from .params import AwgnConfig, Chirality, DecoherenceRates
from .qlinalg import N_LEVELS, annihilation, check_density, truncation_of

NORM_RENORM_TOL = 1e-9
NORM_FAIL_TOL = 1e-6
TRACE_FAIL_TOL = 1e-6
EIG_FAIL_TOL = -1e-5


class IntegrationError(RuntimeError):
    """The propagation lost accuracy (norm/trace drift or negativity)."""


@dataclass(frozen=True)
class TimeGrid:
    dt: float
    t1: float
    sample_stride: int = 25

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if not self.t1 > 0:
            raise ValueError(f"t1 must be > 0, got {self.t1}")
        if self.sample_stride < 1:
            raise ValueError("sample_stride must be >= 1")

    @property
    def nsteps(self) -> int:
        n = int(round(self.t1 / self.dt))
        if abs(n * self.dt - self.t1) > 1e-9 * self.t1:
            raise ValueError(f"dt={self.dt} does not divide t1={self.t1}")
        return n

    @property
    def sample_steps(self) -> np.ndarray:
        s = np.arange(0, self.nsteps + 1, self.sample_stride)
        if s[-1] != self.nsteps:
            s = np.append(s, self.nsteps)
        return s

    def check_resolution(self, fastest: float) -> None:
        """Require at least 50 steps per period of the fastest phase ``fastest``."""
        limit = 2 * math.pi / (50 * fastest)
        if self.dt > limit:
            raise ValueError(f"dt={self.dt} does not resolve frequency {fastest} (need dt <= {limit:.4g})")


@dataclass
class RunResult:
    times: np.ndarray
    x_phi: np.ndarray
    pops: np.ndarray  # shape (3, samples)
    nbar: np.ndarray
    trace: np.ndarray
    final_rho: np.ndarray
    chirality: Chirality | None = None
    d_metric_final: float = float("nan")
    min_eig: float = float("nan")
    norm_renormalizations: int = 0
    max_norm_drift: float = 0.0

    @property
    def final_x(self) -> float:
        return float(self.x_phi[-1])

    @property
    def max_trace_drift(self) -> float:
        return float(np.max(np.abs(self.trace - 1)))

    @property
    def population_sum_error(self) -> float:
        return float(np.max(np.abs(self.pops.sum(axis=0) - 1)))


def _result(obs: np.ndarray, final_rho: np.ndarray, **kw) -> RunResult:
    return RunResult(
        times=obs[:, 0].copy(),
        x_phi=obs[:, 1].copy(),
        pops=obs[:, 2:5].T.copy(),
        nbar=obs[:, 5].copy(),
        trace=obs[:, 6].copy(),
        final_rho=final_rho,
        **kw,
    )


def _table_args(h: DriveTables):
    beta = h.beta if h.effective else np.zeros((1, 3), dtype=complex)
    shift = h.shift if h.effective else np.zeros((1, 3))
    gc = 0.0 if h.effective else h.g_cav
    return (h.omega, h.omega_tilde, beta, shift, h.Delta, h.delta, gc, h.effective)


def _check_grid(h: DriveTables, grid: TimeGrid):
    if abs(grid.dt - h.dt) > 1e-15:
        raise ValueError(f"grid dt {grid.dt} differs from drive table dt {h.dt}")
    if grid.nsteps > h.nsteps:
        raise ValueError("time grid extends past the drive tables")


def propagate_pure(
    hamiltonian: DriveTables | Callable[[float], np.ndarray],
    psi0: np.ndarray,
    grid: TimeGrid,
    phi: float = 0.0,
    chirality: Chirality | None = None,
) -> RunResult:
    """Integrate ``i dpsi/dt = H(t) psi`` with classic RK4.

    The norm is restored only when it drifts by more than 1e-9 (counted in
    the result); a drift above 1e-6 raises :class:`IntegrationError`.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    if abs(np.vdot(psi0, psi0).real - 1) > 1e-9:
        raise ValueError("psi0 must be normalized")
    N = truncation_of(psi0.size)
    samples = grid.sample_steps
    obs = np.zeros((len(samples), K.N_OBS))
    psi = psi0.reshape(N_LEVELS, N + 1).copy()
    sq = np.sqrt(np.arange(1, N + 1, dtype=float))
    if isinstance(hamiltonian, DriveTables):
        _check_grid(hamiltonian, grid)
        # rows are indexed by step // stride; the trailing partial sample is written separately
        rows = np.zeros((grid.nsteps // grid.sample_stride + 1, K.N_OBS))
        status, renorm, drift = K.advance_pure(
            psi, 0, grid.nsteps, grid.dt, grid.sample_stride, phi, *_table_args(hamiltonian), rows
        )
        if status:
            raise IntegrationError(f"norm drift {drift:.3e} exceeds {NORM_FAIL_TOL}; reduce dt")
    else:
        rows, renorm, drift = _dense_pure(hamiltonian, psi, grid, phi, sq)
    obs[: len(samples) - 1] = rows[: len(samples) - 1]
    K.observe_pure(psi, grid.nsteps * grid.dt, phi, sq, obs[-1])
    final_drift = abs(obs[-1, 6] - 1)
    if final_drift > NORM_FAIL_TOL:
        raise IntegrationError(f"norm drift {final_drift:.3e} exceeds {NORM_FAIL_TOL}; reduce dt")
    v = psi.reshape(-1)
    return _result(
        obs,
        np.outer(v, v.conj()),
        chirality=chirality,
        norm_renormalizations=int(renorm),
        max_norm_drift=float(max(drift, final_drift)),
        min_eig=0.0,
    )


def _dense_pure(H, psi, grid, phi, sq):
    shape = psi.shape
    v = psi.reshape(-1)
    dt = grid.dt
    rows = np.zeros((grid.nsteps // grid.sample_stride + 1, K.N_OBS))
    f = lambda t, x: -1j * (H(t) @ x)
    renorm, drift_max = 0, 0.0
    for s in range(grid.nsteps):
        t = s * dt
        if s % grid.sample_stride == 0:
            row = rows[s // grid.sample_stride]
            K.observe_pure(v.reshape(shape), t, phi, sq, row)
            drift = abs(row[6] - 1)
            drift_max = max(drift_max, drift)
            if drift > NORM_FAIL_TOL:
                raise IntegrationError(f"norm drift {drift:.3e} exceeds {NORM_FAIL_TOL}; reduce dt")
            if drift > NORM_RENORM_TOL:
                v /= math.sqrt(row[6])
                renorm += 1
        k1 = f(t, v)
        k2 = f(t + dt / 2, v + dt / 2 * k1)
        k3 = f(t + dt / 2, v + dt / 2 * k2)
        k4 = f(t + dt, v + dt * k3)
        v += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return rows, renorm, drift_max


def _lindblad_dense_rhs(H, ops):
    jumps = [(c, c.conj().T) for c in ops]
    loss = sum((cd @ c for c, cd in jumps), start=0)

    def f(t, rho):
        h = H(t)
        out = -1j * (h @ rho - rho @ h)
        for c, cd in jumps:
            out += 2 * c @ rho @ cd
        if ops:
            out -= loss @ rho + rho @ loss
        return out

    return f


def propagate_lindblad(
    hamiltonian: DriveTables | Callable[[float], np.ndarray],
    collapse: DecoherenceRates | Sequence[np.ndarray],
    rho0: np.ndarray,
    grid: TimeGrid,
    phi: float = 0.0,
    chirality: Chirality | None = None,
    checks: int = 100,
) -> RunResult:
    """RK4 on ``drho/dt = -i[H, rho] + sum_c (2 c rho c^dag - {c^dag c, rho})``.

    ``collapse`` is either the rate record (fast path, with ``DriveTables``) or
    an explicit list of collapse operators (dense path).  Trace and smallest
    eigenvalue are checked ``checks`` times along the run.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    check_density(rho0)
    d = rho0.shape[0]
    N = truncation_of(d)
    n = N + 1
    sq = np.sqrt(np.arange(1, n, dtype=float))
    samples = grid.sample_steps
    rows = np.zeros((grid.nsteps // grid.sample_stride + 1, K.N_OBS))
    rho = rho0.reshape(N_LEVELS, n, N_LEVELS, n).copy()
    chunk = max(grid.sample_stride, int(math.ceil(grid.nsteps / checks / grid.sample_stride)) * grid.sample_stride)
    min_eig = float(np.linalg.eigvalsh(rho0)[0])

    if isinstance(hamiltonian, DriveTables):
        if not isinstance(collapse, DecoherenceRates):
            raise TypeError("the compiled path takes a DecoherenceRates record")
        _check_grid(hamiltonian, grid)
        targs = _table_args(hamiltonian)
        dmol = K.dissipator_diagonal(collapse.gamma, collapse.gamma_phi)

        def advance(s0, s1):
            K.advance_rho(rho, s0, s1, grid.dt, grid.sample_stride, phi, *targs,
                          dmol, collapse.kappa, collapse.gamma, rows)
    else:
        ops = [np.asarray(c, dtype=complex) for c in collapse]
        f = _lindblad_dense_rhs(hamiltonian, ops)
        flat = rho.reshape(d, d)

        def advance(s0, s1):
            dt = grid.dt
            for s in range(s0, s1):
                t = s * dt
                if s % grid.sample_stride == 0:
                    K.observe_rho(rho, t, phi, sq, rows[s // grid.sample_stride])
                k1 = f(t, flat)
                k2 = f(t + dt / 2, flat + dt / 2 * k1)
                k3 = f(t + dt / 2, flat + dt / 2 * k2)
                k4 = f(t + dt, flat + dt * k3)
                flat[...] += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
                flat[...] = 0.5 * (flat + flat.conj().T)

    for s0 in range(0, grid.nsteps, chunk):
        s1 = min(s0 + chunk, grid.nsteps)
        advance(s0, s1)
        min_eig = min(min_eig, _health(rho.reshape(d, d), s1 * grid.dt))

    obs = np.zeros((len(samples), K.N_OBS))
    obs[: len(samples) - 1] = rows[: len(samples) - 1]
    K.observe_rho(rho, grid.nsteps * grid.dt, phi, sq, obs[-1])
    res = _result(obs, rho.reshape(d, d).copy(), chirality=chirality, min_eig=min_eig)
    if res.max_trace_drift > TRACE_FAIL_TOL:
        raise IntegrationError(f"trace drift {res.max_trace_drift:.3e} exceeds {TRACE_FAIL_TOL}")
    return res


def _health(rho: np.ndarray, t: float) -> float:
    tr = np.trace(rho).real
    if abs(tr - 1) > TRACE_FAIL_TOL:
        raise IntegrationError(f"trace drift {abs(tr - 1):.3e} at t={t:.4g}")
    lam = float(np.linalg.eigvalsh(rho)[0])
    if lam < EIG_FAIL_TOL:
        raise IntegrationError(f"negative eigenvalue {lam:.3e} at t={t:.4g}")
    return lam


@dataclass
class PairResult:
    L: RunResult
    R: RunResult
    times: np.ndarray
    d_series: np.ndarray
    prediction: analytics.AnalyticPrediction
    seeds: tuple[int | None, int | None] = (None, None)
    extra: dict = field(default_factory=dict)

    @property
    def D_final(self) -> float:
        return float(self.d_series[-1])


def pair_seeds(base_seed: int, run_index: int) -> tuple[int, int]:
    s = base_seed + 2 * run_index
    return s, s + 1


def run_single(config: ScenarioConfig, chirality: Chirality, seed: int | None = None) -> RunResult:
    """Propagate one enantiomer from ``|1>|0>`` for the given scenario."""
    p = config.params
    grid = TimeGrid(config.step, p.T, config.stride)
    if config.mode == "full":
        grid.check_resolution(p.Delta * (1 + config.errors.eta1p) + p.delta * (1 + config.errors.eta2p))
    noise = None
    if config.awgn is not None:
        noise = pulse_noise(p, config.errors, AwgnConfig(config.awgn.snr_db, seed or 0, config.awgn.grid_dt))
    kappa_corr = config.rates.kappa if config.corrected_pulse else None
    tables = drive_tables(chirality, p, grid.dt, config.errors, noise, kappa_corr, config.mode)
    # the experimenter aligns the homodyne angle with the nominal prediction
    phi = analytics.measurement_angle(p)
    n = p.N + 1
    if config.rates.is_zero:
        psi0 = np.zeros(N_LEVELS * n, dtype=complex)
        psi0[0] = 1.0
        return propagate_pure(tables, psi0, grid, phi, chirality)
    rho0 = np.zeros((N_LEVELS * n, N_LEVELS * n), dtype=complex)
    rho0[0, 0] = 1.0
    return propagate_lindblad(tables, config.rates, rho0, grid, phi, chirality)


def run_pair(config: ScenarioConfig, run_index: int = 0) -> PairResult:
    """Run both enantiomers and form ``D(t) = (<X>_L - <X>_R) / 2``."""
    sL, sR = pair_seeds(config.seed, run_index) if config.awgn is not None else (None, None)
    L = run_single(config, Chirality.L, sL)
    R = run_single(config, Chirality.R, sR)
    d = 0.5 * (L.x_phi - R.x_phi)
    L.d_metric_final = R.d_metric_final = float(d[-1])
    pred = analytics.predict(config.params, config.errors, config.rates.kappa, config.corrected_pulse)
    return PairResult(L, R, L.times, d, pred, (sL, sR))


def scan_tprime(times: Sequence[float], d_series: Sequence[float]) -> tuple[float, float]:
    """Time and value of the largest ``D`` sample (earliest on ties)."""
    d = np.asarray(d_series, dtype=float)
    if d.size == 0:
        raise ValueError("empty D series")
    k = int(np.argmax(d))
    return float(np.asarray(times)[k]), float(d[k])


def quadrature_expectation(rho: np.ndarray, phi: float) -> float:
    """``Tr[X_phi rho]`` for a product-space ``rho`` (reference implementation)."""
    N = truncation_of(rho.shape[0])
    a = np.kron(np.eye(N_LEVELS), annihilation(N))
    return float(2 * np.real(np.exp(-1j * phi) * np.trace(a @ rho)))
