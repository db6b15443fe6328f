import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chiralcav import analytics as an
from chiralcav.params import PhysicalParams, SystematicErrors

# Frozen oracle values for the nominal point, from an mpmath integration of the
# effective drive (independent of the scipy quadrature under test).
MU_NOMINAL = 0.310849498226358
ALPHA_MOD_NOMINAL = 1.98858648603857
PHI_T_NOMINAL = 1.953125
MIN_A1_NOMINAL = 0.150860926646


def mp_alpha_modulus(p: PhysicalParams) -> float:
    mp.mp.dps = 30
    rate = mp.mpf(p.A2) ** 2 / (mp.mpf(p.Delta) ** 2 * p.delta)
    amp = mp.mpf(p.A1) * p.A2 / (mp.mpf(p.Delta) * p.delta)
    T = mp.mpf(p.T)

    def phase(s):
        return rate * (s / 2 - T / (4 * mp.pi) * mp.sin(2 * mp.pi * s / T))

    f = lambda s: amp * mp.sin(mp.pi * s / T) ** 2 * mp.expj(-phase(s))
    return float(abs(mp.quad(f, [0, T / 4, T / 2, 3 * T / 4, T])))


def test_mpmath_oracle_reproduces_frozen_value(nominal):
    assert mp_alpha_modulus(nominal) == pytest.approx(ALPHA_MOD_NOMINAL, abs=1e-12)


def test_nominal_values(nominal):
    assert an.mu(nominal) == pytest.approx(MU_NOMINAL, abs=1e-13)
    assert an.phase_phi(nominal.T, nominal) == pytest.approx(PHI_T_NOMINAL, abs=1e-13)
    assert abs(an.alpha_final_closed_form(nominal)) == pytest.approx(ALPHA_MOD_NOMINAL, abs=1e-12)
    assert abs(an.alpha_of_t(nominal.T, nominal)) == pytest.approx(ALPHA_MOD_NOMINAL, abs=1e-9)
    assert an.min_A1(2.5, 250.0, nominal) == pytest.approx(MIN_A1_NOMINAL, abs=1e-11)


def test_measurement_angle_aligns_with_alpha(nominal):
    a = an.alpha_final_closed_form(nominal)
    phi = an.measurement_angle(nominal)
    assert 0 <= phi < 2 * math.pi
    assert np.angle(a * np.exp(-1j * phi)) == pytest.approx(0.0, abs=1e-12)
    assert an.predict(nominal).D == pytest.approx(2 * ALPHA_MOD_NOMINAL, abs=1e-10)


def test_quadrature_matches_closed_form_on_grid():
    worst = 0.0
    for A2 in np.linspace(1.0, 4.0, 10):
        for T in np.linspace(50.0, 400.0, 10):
            p = PhysicalParams(A2=A2, T=T)
            worst = max(worst, abs(an.alpha_of_t(T, p) - an.alpha_final_closed_form(p)))
    assert worst < 1e-8


@given(
    st.floats(0.0, 0.3), st.floats(-0.3, 0.3), st.floats(-0.3, 0.3),
    st.floats(-0.3, 0.3), st.floats(-0.3, 0.3),
)
@settings(max_examples=25, deadline=None)
def test_closed_form_holds_with_systematic_errors(e1, e2, e3, e1p, e2p):
    p = PhysicalParams(T=120.0)
    e = SystematicErrors(e1, e2, e3, e1p, e2p)
    assert abs(an.alpha_of_t(p.T, p, e) - an.alpha_final_closed_form(p, e)) < 1e-8


def test_alpha_starts_at_zero(nominal):
    assert an.alpha_of_t(0.0, nominal) == 0
    with pytest.raises(ValueError):
        an.alpha_of_t(nominal.T + 1, nominal)


def test_min_a1_gives_unit_threshold(nominal):
    A1 = an.min_A1(3.0, 200.0, nominal)
    p = nominal.with_(A1=A1, A2=3.0, T=200.0)
    assert abs(an.alpha_final_closed_form(p)) == pytest.approx(2.0, rel=1e-12)


def test_min_a1_singular_point(nominal):
    # mu = 1 exactly: T = 4 pi Delta^2 delta / A2^2
    T = 4 * math.pi * 400 / 2.5**2
    with pytest.raises(an.ConstraintError):
        an.min_A1(2.5, T, nominal)


def test_min_a1_decreases_in_small_mu_region(nominal):
    # below mu ~ 0.37 the surface falls along both axes
    A2s = np.linspace(1.0, 2.5, 8)
    Ts = np.linspace(50.0, 250.0, 8)
    Z = np.array([[an.min_A1(a, t, nominal) for t in Ts] for a in A2s])
    mus = np.array([[an.mu(nominal.with_(A2=a, T=t)) for t in Ts] for a in A2s])
    assert mus.max() < 0.37
    assert np.all(np.diff(Z, axis=0) < 0)
    assert np.all(np.diff(Z, axis=1) < 0)


@pytest.mark.parametrize("kappa", [0.005, 0.01, 0.02])
def test_corrected_pulse_cancels_decay(nominal, kappa):
    ideal = an.alpha_final_closed_form(nominal)
    assert abs(an.alpha_with_decay(nominal, kappa, corrected=True) - ideal) < 1e-8
    assert abs(an.alpha_with_decay(nominal, kappa)) < abs(ideal)


def test_decay_oracle_value(nominal):
    # frozen: uncorrected decay at kappa = 0.01 keeps 55.15 % of the modulus
    ratio = abs(an.alpha_with_decay(nominal, 0.01)) / ALPHA_MOD_NOMINAL
    assert ratio == pytest.approx(0.5515, abs=1e-4)
    assert an.alpha_with_decay(nominal, 0.0) == pytest.approx(an.alpha_final_closed_form(nominal), abs=1e-9)


def test_error_probability_values():
    assert an.error_probability(2.0) == pytest.approx(3.167124183e-5, rel=1e-9)
    assert an.error_probability(0.0) == 0.5
    p, flagged = an.error_probability(10.0, with_flag=True)
    assert p == 0.0 and flagged
    vec = an.error_probability(np.array([0.0, 1.0]))
    assert vec.shape == (2,)
    with pytest.raises(ValueError):
        an.error_probability(-1.0)


@given(st.floats(0.0, 4.0), st.floats(0.0, 4.0))
def test_error_probability_monotone(a, b):
    if a < b:
        assert an.error_probability(a) >= an.error_probability(b)
