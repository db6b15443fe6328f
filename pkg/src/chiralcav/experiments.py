"""Figure-reproduction experiments: sweeps, ensembles and CSV/SVG output.

Every ``cmd_*`` function returns its table(s) as ``(header, rows)`` and, when
given an output directory, writes them as CSV next to an SVG preview and a
``manifest.json``.  Rows are assembled in axis order, never completion order,
so output is byte-identical for a fixed configuration and seed.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from . import __version__, analytics, homodyne, svg
from .config import ScenarioConfig
from .dynamics import PairResult, run_pair, scan_tprime
from .params import PROPANEDIOL, AwgnConfig, DecoherenceRates, PhysicalParams, SystematicErrors
from .qlinalg import coherent_tail, partial_trace_molecule

Table = tuple[list[str], list[list[Any]]]

DEFAULT_POINTS = 21


def fmt(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "" if math.isnan(v) else format(float(v), ".17g")
    return str(v)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)] + [",".join(fmt(v) for v in row) for row in rows]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


@dataclass
class Manifest:
    command: str
    config: ScenarioConfig
    runs: list[dict[str, Any]] = field(default_factory=list)

    def record(self, label: str, wall_s: float, **extra):
        self.runs.append({"label": label, "wall_s": round(wall_s, 3), **extra})

    def write(self, out: Path) -> Path:
        doc = {
            "command": self.command,
            "config_sha256": self.config.digest(),
            "seed": self.config.seed,
            "version": __version__,
            "config": self.config.to_dict(),
            "runs": self.runs,
        }
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"manifest_{self.command}.json"
        path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n")
        return path


@dataclass(frozen=True)
class SweepSpec:
    """One or more axes ``name -> (lo, hi, count)`` plus an ensemble size."""

    axes: dict[str, tuple[float, float, int]]
    ensemble: int = 1

    def __post_init__(self):
        for name, (lo, hi, n) in self.axes.items():
            if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
                raise ValueError(f"axis {name}: range must be finite and ordered, got ({lo}, {hi})")
            if n < 1 or (n == 1 and lo != hi):
                raise ValueError(f"axis {name}: need >= 2 samples for a range")
        if self.ensemble < 1:
            raise ValueError("ensemble must be >= 1")

    def values(self, name: str) -> np.ndarray:
        lo, hi, n = self.axes[name]
        return np.linspace(lo, hi, n)


def _timed_pair(args) -> tuple[PairResult, float]:
    cfg, run_index = args
    t0 = time.perf_counter()
    res = run_pair(cfg, run_index)
    return res, time.perf_counter() - t0


def run_many(jobs: Sequence[tuple[ScenarioConfig, int]], threads: int = 1) -> list[tuple[PairResult, float]]:
    """Run pairs in a process pool; results come back in job order."""
    if threads <= 1 or len(jobs) <= 1:
        return [_timed_pair(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_timed_pair, jobs))


def _finish(out: str | os.PathLike | None, name: str, table: Table, manifest: Manifest | None = None,
            plot: Callable[[Path], None] | None = None) -> Table:
    if out is not None:
        out = Path(out)
        write_csv(out / f"{name}.csv", *table)
        if plot is not None:
            plot(out / f"{name}.svg")
        if manifest is not None:
            manifest.write(out)
    return table


def _exact_error(res: PairResult) -> float:
    rho_L = partial_trace_molecule(res.L.final_rho)
    rho_R = partial_trace_molecule(res.R.final_rho)
    return homodyne.exact_error_rate(rho_L, rho_R, res.prediction.phi_meas)


# ---------------------------------------------------------------------------


def cmd_surface_a1(p: PhysicalParams, spec: SweepSpec | None = None, out=None) -> Table:
    """Minimum ``A1`` over an ``(A2, T)`` grid; singular points are left empty."""
    spec = spec or SweepSpec({"A2": (1.0, 4.0, DEFAULT_POINTS), "T": (50.0, 450.0, DEFAULT_POINTS)})
    header = ["A2", "T", "A1_min"]
    rows = []
    for A2 in spec.values("A2"):
        for T in spec.values("T"):
            try:
                v = analytics.min_A1(A2, T, p)
            except analytics.ConstraintError:
                v = None
            rows.append([A2, T, v])
    table = (header, rows)

    def plot(path):
        A2s, Ts = spec.values("A2"), spec.values("T")
        Z = np.array([np.nan if r[2] is None else r[2] for r in rows]).reshape(len(A2s), len(Ts))
        svg.heatmap(path, Ts, A2s, np.log10(Z), "T g", "A2", "log10 A1_min")

    return _finish(out, "surface_a1", table, plot=plot)


def cmd_timeseries(config: ScenarioConfig, out=None) -> Table:
    t0 = time.perf_counter()
    res = run_pair(config)
    L, R = res.L, res.R
    header = ["t", "X_L/2", "X_R/2", "P1_L", "P1_R", "nbar_L", "nbar_R"]
    rows = [list(r) for r in zip(L.times, L.x_phi / 2, R.x_phi / 2, L.pops[0], R.pops[0], L.nbar, R.nbar)]
    man = Manifest("timeseries", config)
    man.record("pair", time.perf_counter() - t0, D_final=res.D_final)

    def plot(path):
        svg.line_plot(path, L.times, {"X_L/2": L.x_phi / 2, "X_R/2": R.x_phi / 2, "P1_L": L.pops[0],
                                      "P1_R": R.pops[0]}, "t g", "value")

    return _finish(out, "timeseries", (header, rows), man, plot)


def _pair_row(res: PairResult) -> list[Any]:
    D = res.D_final
    return [D, res.prediction.D, homodyne.empirical_error_rate(max(D, 0.0))]


def cmd_systematic(config: ScenarioConfig, points: int = DEFAULT_POINTS, grid: int = DEFAULT_POINTS,
                   span: float = 0.1, threads: int = 1, out=None) -> tuple[Table, Table]:
    """1-D sweeps over eta1, eta2, eta3 and a 2-D grid over the detuning errors."""
    etas = np.linspace(-span, span, points)
    jobs, labels = [], []
    for axis in ("eta1", "eta2", "eta3"):
        for v in etas:
            jobs.append((config.with_(errors=SystematicErrors(**{axis: float(v)})), 0))
            labels.append((axis, v))
    grid_vals = np.linspace(-span, span, grid)
    for a in grid_vals:
        for b in grid_vals:
            jobs.append((config.with_(errors=SystematicErrors(eta1p=float(a), eta2p=float(b))), 0))
            labels.append(("detuning", (a, b)))
    results = run_many(jobs, threads)
    man = Manifest("systematic", config)
    one_d, two_d = [], []
    for (axis, v), (res, wall) in zip(labels, results):
        man.record(f"{axis}={v}", wall)
        if axis == "detuning":
            two_d.append([v[0], v[1], *_pair_row(res)])
        else:
            one_d.append([axis, v, *_pair_row(res)])
    t1 = (["axis", "eta", "D_final", "D_analytic", "P_e_surrogate"], one_d)
    t2 = (["eta1p", "eta2p", "D_final", "D_analytic", "P_e_surrogate"], two_d)

    def plot1(path):
        series = {ax: np.array([r[2] for r in one_d if r[0] == ax]) for ax in ("eta1", "eta2", "eta3")}
        svg.line_plot(path, etas, series, "eta", "D(X/2)")

    def plot2(path):
        Z = np.array([r[2] for r in two_d]).reshape(grid, grid)
        svg.heatmap(path, grid_vals, grid_vals, Z, "eta2p", "eta1p", "D(X/2)")

    _finish(out, "systematic_1d", t1, plot=plot1)
    _finish(out, "systematic_2d", t2, man, plot2)
    return t1, t2


def cmd_awgn(config: ScenarioConfig, ensemble: int = 50, snr_db: float | None = None, threads: int = 1,
             out=None) -> Table:
    """Noisy-pulse ensemble; the SNR comes from ``snr_db``, else the config, else 10 dB."""
    base = config.awgn or AwgnConfig()
    cfg = config.with_(awgn=AwgnConfig(base.snr_db if snr_db is None else snr_db, config.seed, base.grid_dt))
    results = run_many([(cfg, i) for i in range(ensemble)], threads)
    man = Manifest("awgn", cfg)
    rows = []
    for i, (res, wall) in enumerate(results):
        man.record(f"run{i}", wall, seeds=list(res.seeds))
        D = res.D_final
        rows.append([i, res.seeds[0], res.seeds[1], D, homodyne.empirical_error_rate(max(D, 0.0)), res.prediction.D])
    header = ["run_index", "seed_L", "seed_R", "D_final", "P_e", "D_analytic"]

    def plot(path):
        svg.line_plot(path, np.arange(ensemble), {"D_final": np.array([r[3] for r in rows])}, "run", "D(X/2)")

    return _finish(out, "awgn", (header, rows), man, plot)


def cmd_decoherence(config: ScenarioConfig, points: int = DEFAULT_POINTS, max_rate: float = 0.01,
                    threads: int = 1, out=None) -> Table:
    """Each decoherence rate alone over ``[0, max_rate]``."""
    rates = np.linspace(0.0, max_rate, points)
    jobs, labels = [], []
    for name in ("kappa", "gamma", "gamma_phi"):
        for r in rates:
            jobs.append((config.with_(rates=DecoherenceRates(**{name: float(r)}), corrected_pulse=False), 0))
            labels.append((name, r))
    results = run_many(jobs, threads)
    man = Manifest("decoherence", config)
    rows = []
    for (name, r), (res, wall) in zip(labels, results):
        man.record(f"{name}={r}", wall)
        rows.append([name, r, *_pair_row(res), _exact_error(res)])
    header = ["rate_name", "rate", "D_final", "D_analytic", "P_e_surrogate", "P_e_exact"]

    def plot(path):
        svg.line_plot(path, rates, {n: np.array([row[2] for row in rows if row[0] == n])
                                    for n in ("kappa", "gamma", "gamma_phi")}, "rate / g", "D(X/2)")

    return _finish(out, "decoherence", (header, rows), man, plot)


def cmd_correction(config: ScenarioConfig, points: int = DEFAULT_POINTS, max_rate: float = 0.01,
                   threads: int = 1, out=None) -> tuple[Table, Table, Table]:
    """Corrected vs original pulses for ``gamma = gamma_phi = kappa``, plus the
    ``D(t)`` series and its maximum at the largest rate."""
    rates = np.linspace(0.0, max_rate, points)
    jobs, labels = [], []
    for r in rates:
        rr = DecoherenceRates(kappa=float(r), gamma=float(r), gamma_phi=float(r))
        for variant, flag in (("corrected", True), ("original", False)):
            jobs.append((config.with_(rates=rr, corrected_pulse=flag), 0))
            labels.append((r, variant))
    results = run_many(jobs, threads)
    man = Manifest("correction", config)
    sweep = []
    for (r, variant), (res, wall) in zip(labels, results):
        man.record(f"{variant} rate={r}", wall)
        sweep.append([r, variant, *_pair_row(res), _exact_error(res)])
    end = {variant: res for (r, variant), (res, _) in zip(labels, results) if r == rates[-1]}
    times = end["corrected"].times
    series = [[t, a, b] for t, a, b in zip(times, end["corrected"].d_series, end["original"].d_series)]
    peaks = []
    for variant in ("corrected", "original"):
        res = end[variant]
        t_star, d_max = scan_tprime(res.times, res.d_series)
        peaks.append([variant, rates[-1], t_star, d_max, homodyne.empirical_error_rate(max(d_max, 0.0)),
                      res.D_final, res.prediction.D])
    t_sweep = (["rate", "variant", "D_final", "D_analytic", "P_e_surrogate", "P_e_exact"], sweep)
    t_series = (["t", "D_corrected", "D_original"], series)
    t_peaks = (["variant", "rate", "t_star", "D_max", "P_e_at_max", "D_final", "D_analytic"], peaks)

    def plot_sweep(path):
        svg.line_plot(path, rates, {v: np.array([row[2] for row in sweep if row[1] == v])
                                    for v in ("corrected", "original")}, "rate / g", "D(X/2)")

    def plot_series(path):
        svg.line_plot(path, times / config.params.T, {"corrected": end["corrected"].d_series,
                                                      "original": end["original"].d_series}, "t / T", "D(X/2)")

    _finish(out, "correction_sweep", t_sweep, plot=plot_sweep)
    _finish(out, "correction_series", t_series, plot=plot_series)
    _finish(out, "correction_tprime", t_peaks, man)
    return t_sweep, t_series, t_peaks


# ---------------------------------------------------------------------------


@dataclass
class Check:
    name: str
    passed: bool
    measured: float
    threshold: float
    detail: str = ""


def _run_d(cfg: ScenarioConfig) -> float:
    return run_pair(cfg).D_final


def cmd_validate(config: ScenarioConfig, out=None) -> list[Check]:
    """Invariant suite on the scenario's ideal (noise- and decoherence-free) point."""
    base = config.with_(awgn=None, rates=DecoherenceRates(), corrected_pulse=False, mode="full")
    p = base.params
    checks: list[Check] = []

    pred = analytics.predict(p)
    quad = analytics.alpha_of_t(p.T, p)
    delta = abs(quad - pred.alphaT)
    checks.append(Check("analytic_oracle", delta < 1e-8, delta, 1e-8, "quadrature vs closed-form alpha(T)"))

    tail = coherent_tail(abs(pred.alphaT), p.N)
    checks.append(Check("truncation_tail", tail < 1e-10, tail, 1e-10,
                        f"coherent tail mass above N={p.N} at |alpha(T)|={abs(pred.alphaT):.4f}"))

    D = _run_d(base)
    D_eff = _run_d(base.with_(mode="effective"))
    rel = abs(D - D_eff) / abs(D)
    checks.append(Check("frame_equivalence", rel < 0.05, rel, 0.05, f"full D={D:.6f}, effective D={D_eff:.6f}"))

    D_big = _run_d(base.with_(params=p.with_(N=p.N + 5)))
    checks.append(Check("truncation_convergence", abs(D_big - D) < 1e-3, abs(D_big - D), 1e-3,
                        f"N={p.N} -> {p.N + 5}"))

    D_half = _run_d(base.with_(dt=base.step / 2, stride=2 * base.stride))
    checks.append(Check("step_convergence", abs(D_half - D) < 1e-4, abs(D_half - D), 1e-4,
                        f"dt={base.step} -> {base.step / 2}"))

    ref = PROPANEDIOL
    mol_err = max(
        abs(ref.Delta_phys - 20 * ref.g_phys),
        abs(ref.delta_phys - ref.g_phys),
        abs(ref.nu + ref.Delta_phys + ref.delta_phys - ref.omega23),
        abs(ref.time_us(250.0) - 25.0),
    )
    checks.append(Check("molecular_reference", mol_err == 0, mol_err, 0.0, "detunings, nu + Delta + delta, T in us"))

    if out is not None:
        rows = [[c.name, c.passed, c.measured, c.threshold, c.detail] for c in checks]
        write_csv(Path(out) / "validate.csv", ["check", "passed", "measured", "threshold", "detail"], rows)
    return checks
