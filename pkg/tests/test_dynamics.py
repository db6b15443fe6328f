import math

import numpy as np
import pytest

from chiralcav import analytics, model
from chiralcav.config import ScenarioConfig
from chiralcav.dynamics import (
    IntegrationError,
    TimeGrid,
    pair_seeds,
    propagate_lindblad,
    propagate_pure,
    quadrature_expectation,
    run_pair,
    run_single,
    scan_tprime,
)
from chiralcav.model import DriveTables
from chiralcav.params import AwgnConfig, Chirality, DecoherenceRates, PhysicalParams
from chiralcav.qlinalg import coherent_state, embed, ket, product_state, projector, transition

SMALL = PhysicalParams(N=8, T=40.0)


def idle_tables(N, dt, nsteps):
    z = np.zeros((nsteps, 3))
    return DriveTables(N, dt, nsteps, 20.0, 1.0, 0.0, z, z)


def test_zero_hamiltonian_keeps_state():
    N = 3
    psi0 = product_state([0, 1, 0], coherent_state(0.5, N, tol=1e-3))
    psi0 /= np.linalg.norm(psi0)
    grid = TimeGrid(0.1, 2.0, 5)
    res = propagate_pure(lambda t: np.zeros((12, 12)), psi0, grid)
    assert np.allclose(res.final_rho, projector(psi0), atol=1e-14)
    fast = propagate_pure(idle_tables(N, 0.1, 20), psi0, grid)
    assert np.allclose(fast.final_rho, projector(psi0), atol=1e-14)
    assert np.allclose(res.pops[1], 1.0)


def test_rabi_oscillation():
    N, W = 1, 0.7
    h = W * embed(transition(0, 1) + transition(1, 0), None, N)
    grid = TimeGrid(0.001, 3.0, 100)
    res = propagate_pure(lambda t: h, ket(0, N), grid)
    assert np.allclose(res.pops[0], np.cos(W * res.times) ** 2, atol=1e-10)


@pytest.mark.parametrize("fast", [True, False])
def test_damped_cavity_amplitude(fast):
    N, kappa, a0 = 10, 0.3, 1.2
    psi0 = product_state([1, 0, 0], coherent_state(a0, N, tol=1e-6))
    psi0 /= np.linalg.norm(psi0)
    grid = TimeGrid(0.01, 4.0, 50)
    if fast:
        res = propagate_lindblad(idle_tables(N, 0.01, 400), DecoherenceRates(kappa=kappa), projector(psi0), grid)
    else:
        ops = model.collapse_operators(DecoherenceRates(kappa=kappa), N)
        res = propagate_lindblad(lambda t: np.zeros((33, 33)), ops, projector(psi0), grid)
    assert np.allclose(res.x_phi, 2 * a0 * np.exp(-kappa * res.times / 2), atol=1e-8)
    assert np.allclose(res.nbar, a0**2 * np.exp(-kappa * res.times), atol=1e-8)


def test_relaxation_populations():
    # gamma alone: level 3 decays into two channels, level 2 into one
    N, g = 0, 0.2
    rho0 = np.diag([0, 0, 1]).astype(complex)
    grid = TimeGrid(0.01, 5.0, 100)
    res = propagate_lindblad(idle_tables(N, 0.01, 500), DecoherenceRates(gamma=g), rho0, grid)
    t = res.times
    p3 = np.exp(-2 * g * t)
    p2 = np.exp(-g * t) - np.exp(-2 * g * t)
    assert np.allclose(res.pops[2], p3, atol=1e-9)
    assert np.allclose(res.pops[1], p2, atol=1e-9)


def test_fast_and_dense_lindblad_agree():
    p = PhysicalParams(N=3, T=6.0)
    rates = DecoherenceRates(kappa=0.05, gamma=0.03, gamma_phi=0.04)
    c = Chirality.R
    dt = 0.002
    tab = model.drive_tables(c, p, dt, correction_kappa=0.05)
    rho0 = projector(ket(0, p.N))
    grid = TimeGrid(dt, p.T, 100)
    fast = propagate_lindblad(tab, rates, rho0, grid, phi=0.4)
    dense = propagate_lindblad(
        lambda t: model.build_full_hamiltonian(min(t, p.T), c, p, correction_kappa=0.05),
        model.collapse_operators(rates, p.N), rho0, grid, phi=0.4,
    )
    assert np.allclose(fast.final_rho, dense.final_rho, atol=1e-11)
    assert np.allclose(fast.x_phi, dense.x_phi, atol=1e-11)


def test_fast_and_dense_pure_agree():
    p = PhysicalParams(N=3, T=6.0)
    dt = 0.002
    tab = model.drive_tables(Chirality.L, p, dt)
    grid = TimeGrid(dt, p.T, 100)
    fast = propagate_pure(tab, ket(0, p.N), grid, phi=1.0)
    dense = propagate_pure(lambda t: model.build_full_hamiltonian(min(t, p.T), Chirality.L, p),
                           ket(0, p.N), grid, phi=1.0)
    assert np.allclose(fast.final_rho, dense.final_rho, atol=1e-11)


def test_lindblad_reduces_to_pure_without_rates():
    cfg = ScenarioConfig(params=SMALL)
    pure = run_single(cfg, Chirality.L)
    tab = model.drive_tables(Chirality.L, SMALL, cfg.step)
    grid = TimeGrid(cfg.step, SMALL.T, cfg.stride)
    rho = propagate_lindblad(tab, DecoherenceRates(), projector(ket(0, SMALL.N)), grid,
                             analytics.measurement_angle(SMALL))
    # the pure run may renormalize once at the 1e-9 level
    assert np.allclose(rho.final_rho, pure.final_rho, atol=1e-8)
    assert np.allclose(rho.x_phi, pure.x_phi, atol=1e-8)


def test_effective_mode_reproduces_analytic_displacement():
    cfg = ScenarioConfig(params=SMALL, mode="effective", dt=0.01)
    res = run_pair(cfg)
    alpha = analytics.alpha_final_closed_form(SMALL)
    phi = analytics.measurement_angle(SMALL)
    for r, c in ((res.L, Chirality.L), (res.R, Chirality.R)):
        assert r.final_x == pytest.approx(2 * c.displacement_sign * abs(alpha), abs=1e-8)
        assert r.pops[0].min() == pytest.approx(1.0, abs=1e-12)
    assert quadrature_expectation(res.L.final_rho, phi) == pytest.approx(res.L.final_x, abs=1e-12)


def test_full_mode_tracks_effective_prediction():
    res = run_pair(ScenarioConfig(params=SMALL))
    # second-order elimination is coarser for this short pulse than at the nominal point
    assert res.D_final == pytest.approx(res.prediction.D, rel=0.15)
    assert res.D_final > 0


def test_ideal_pair_antisymmetric():
    res = run_pair(ScenarioConfig(params=SMALL))
    assert np.max(np.abs(res.L.x_phi + res.R.x_phi)) < 1e-12
    assert np.allclose(res.L.pops, res.R.pops, atol=1e-12)
    assert res.d_series[0] == 0.0


def test_rk4_fourth_order():
    p = PhysicalParams(N=4, T=8.0)
    ref = run_single(ScenarioConfig(params=p, dt=0.00025, stride=1), Chirality.L).final_rho
    errs = []
    for dt in (0.004, 0.002, 0.001):
        rho = run_single(ScenarioConfig(params=p, dt=dt, stride=1), Chirality.L).final_rho
        errs.append(np.abs(rho - ref).max())
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all(np.abs(ratios - 16) < 2), ratios


def test_norm_failure_raises():
    p = PhysicalParams(N=4, T=40.0)
    tab = model.drive_tables(Chirality.L, p, 0.04)
    with pytest.raises(IntegrationError):
        propagate_pure(tab, ket(0, p.N), TimeGrid(0.04, p.T, 1))


def test_resolution_guard():
    with pytest.raises(ValueError):
        run_single(ScenarioConfig(params=SMALL, dt=0.01), Chirality.L)


def test_master_equation_health():
    cfg = ScenarioConfig(params=SMALL, dt=0.004, rates=DecoherenceRates(0.01, 0.01, 0.01), corrected_pulse=True)
    res = run_pair(cfg)
    for r in (res.L, res.R):
        assert r.max_trace_drift < 1e-7
        assert r.min_eig >= -1e-6
        assert r.population_sum_error < 1e-7
    # decoherence costs discrimination
    ideal = run_pair(cfg.with_(rates=DecoherenceRates()))
    assert res.D_final < ideal.D_final


def test_awgn_pair_seeds_and_determinism():
    cfg = ScenarioConfig(params=SMALL, awgn=AwgnConfig(grid_dt=0.002), seed=11)
    a = run_pair(cfg, 3)
    b = run_pair(cfg, 3)
    assert a.seeds == pair_seeds(11, 3) == (17, 18)
    assert np.array_equal(a.d_series, b.d_series)
    quiet = run_pair(cfg.with_(awgn=AwgnConfig(snr_db=200.0, grid_dt=0.002)))
    ideal = run_pair(cfg.with_(awgn=None))
    assert abs(quiet.D_final - ideal.D_final) < 1e-3


def test_time_grid():
    g = TimeGrid(0.5, 3.0, 4)
    assert g.nsteps == 6
    assert list(g.sample_steps) == [0, 4, 6]
    with pytest.raises(ValueError):
        TimeGrid(0.7, 3.0).nsteps
    with pytest.raises(ValueError):
        TimeGrid(0.0, 1.0)


def test_scan_tprime():
    t = np.linspace(0, 10, 11)
    d = -((t - 6) ** 2)
    assert scan_tprime(t, d) == (6.0, 0.0)
    assert scan_tprime([0, 1, 2], [1.0, 3.0, 3.0])[0] == 1.0
    with pytest.raises(ValueError):
        scan_tprime([], [])
