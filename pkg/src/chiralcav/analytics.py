"""Closed-form predictions of the effective (second-order) model.

With both drives shaped as ``sin(pi t / T)`` the effective displacement drive is
``Omega_e(t) = Omega(t) Omega~(t) g / (Delta delta)`` and the cavity acquires
the phase ``phi(t) = int_0^t Omega^2 g^2 / (Delta^2 delta)``.  The final
displacement has a closed form; the quadrature routes here are kept as an
independent check of it and of the dynamics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .params import NO_ERRORS, PhysicalParams, SystematicErrors, effective_couplings

QUAD_ABS_TOL = 1e-10
ERFC_ARG_LIMIT = 6.0


class ConstraintError(ValueError):
    """The displacement constraint cannot be met (``sin(pi mu) = 0``)."""


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class AnalyticPrediction:
    mu: float
    phiT: float
    alphaT: complex
    alpha_bar_T: complex
    phi_meas: float
    p_err: float

    @property
    def D(self) -> float:
        """Ideal ``(<X>_L - <X>_R)/2`` measured at ``phi_meas``."""
        return 2.0 * float(np.real(self.alpha_bar_T * np.exp(-1j * self.phi_meas)))


def _phase_rate(p: PhysicalParams, e: SystematicErrors) -> float:
    c = effective_couplings(p, e)
    return c.omega_amp**2 * c.g_cav**2 / (c.Delta**2 * c.delta)


def mu(p: PhysicalParams, e: SystematicErrors = NO_ERRORS) -> float:
    return _phase_rate(p, e) * p.T / (4 * math.pi)


def _check_time(t, T):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > T * (1 + 1e-12)):
        raise ValueError(f"time outside [0, T={T}]")
    return t


def phase_phi(t, p: PhysicalParams, e: SystematicErrors = NO_ERRORS):
    """Accumulated cavity phase ``phi(t)`` for the sine envelope."""
    t = _check_time(t, p.T)
    out = _phase_rate(p, e) * (t / 2 - p.T / (4 * math.pi) * np.sin(2 * math.pi * t / p.T))
    return float(out) if out.ndim == 0 else out


def omega_e(t, p: PhysicalParams, e: SystematicErrors = NO_ERRORS):
    t = _check_time(t, p.T)
    c = effective_couplings(p, e)
    s = np.sin(math.pi * t / p.T)
    out = c.omega_amp * c.omega_tilde_amp * c.g_cav * s * s / (c.Delta * c.delta)
    return float(out) if out.ndim == 0 else out


def _complex_quad(f, a: float, b: float) -> complex:
    if b == a:
        return 0j
    kw = dict(epsabs=QUAD_ABS_TOL, epsrel=0.0, limit=500)
    re, re_err = integrate.quad(lambda x: f(x).real, a, b, **kw)
    im, im_err = integrate.quad(lambda x: f(x).imag, a, b, **kw)
    if max(re_err, im_err) > 10 * QUAD_ABS_TOL:
        raise QuadratureError(f"quadrature did not converge (error estimate {max(re_err, im_err):.2e})")
    return complex(re, im)


def alpha_of_t(t: float, p: PhysicalParams, e: SystematicErrors = NO_ERRORS) -> complex:
    """Cavity displacement ``alpha(t)`` in the original frame, by quadrature."""
    _check_time(t, p.T)
    integrand = lambda s: 1j * omega_e(s, p, e) * np.exp(-1j * phase_phi(s, p, e))
    return _complex_quad(integrand, 0.0, float(t)) * np.exp(1j * phase_phi(t, p, e))


def alpha_final_closed_form(p: PhysicalParams, e: SystematicErrors = NO_ERRORS) -> complex:
    c = effective_couplings(p, e)
    m = mu(p, e)
    # sin(pi mu)/(pi mu) -> 1 as mu -> 0
    sinc = np.sinc(m)
    amp = c.omega_tilde_amp * c.omega_amp * c.g_cav * p.T * sinc / (2 * c.Delta * c.delta)
    return complex(amp * np.exp(1j * (math.pi * (0.5 - m) + phase_phi(p.T, p, e))))


def measurement_angle(p: PhysicalParams, e: SystematicErrors = NO_ERRORS) -> float:
    """Homodyne angle ``pi (1/2 - mu) + phi(T)`` reduced to ``[0, 2 pi)``."""
    return (math.pi * (0.5 - mu(p, e)) + phase_phi(p.T, p, e)) % (2 * math.pi)


def min_A1(A2: float, T: float, p: PhysicalParams) -> float:
    """Smallest ``A1`` giving ``|alpha(T)| >= 2`` at the given ``(A2, T)``."""
    q = p.with_(A2=A2, T=T)
    s = math.sin(math.pi * mu(q))
    if abs(s) < 1e-12:
        raise ConstraintError(f"sin(pi mu) vanishes at A2={A2}, T={T} (mu={mu(q):.6g})")
    return A2 * p.g / (p.Delta * abs(s))


def alpha_with_decay(
    p: PhysicalParams,
    kappa: float,
    corrected: bool = False,
    e: SystematicErrors = NO_ERRORS,
    t: float | None = None,
) -> complex:
    """Displacement at time ``t`` (default ``T``) with cavity amplitude decay ``kappa/2``.

    ``corrected`` multiplies the 1-3 drive by ``exp(kappa (T - s) / 2)``.
    """
    if kappa < 0:
        raise ValueError(f"kappa must be >= 0, got {kappa}")
    t = p.T if t is None else t
    _check_time(t, p.T)
    T = p.T

    def integrand(s):
        amp = omega_e(s, p, e)
        if corrected:
            amp = amp * math.exp(kappa * (T - s) / 2)
        return 1j * amp * np.exp(kappa * s / 2 - 1j * phase_phi(s, p, e))

    return _complex_quad(integrand, 0.0, float(t)) * np.exp(1j * phase_phi(t, p, e) - kappa * t / 2)


def error_probability(modulus, with_flag: bool = False):
    """``erfc(sqrt(2) |alpha|) / 2``: error of the sign rule between ``|+-alpha>``.

    Arguments of erfc above 6 give exactly 0 (flagged when ``with_flag``).
    """
    m = np.asarray(modulus, dtype=float)
    if np.any(m < 0):
        raise ValueError("modulus must be >= 0")
    arg = math.sqrt(2) * m
    under = arg > ERFC_ARG_LIMIT
    p = np.where(under, 0.0, 0.5 * special.erfc(arg))
    if p.ndim == 0:
        p, under = float(p), bool(under)
    return (p, under) if with_flag else p


def predict(
    p: PhysicalParams,
    e: SystematicErrors = NO_ERRORS,
    kappa: float = 0.0,
    corrected: bool = False,
) -> AnalyticPrediction:
    """Full analytic record; the homodyne angle always uses the nominal parameters."""
    a = alpha_final_closed_form(p, e)
    ab = a if (kappa == 0 or corrected) else alpha_with_decay(p, kappa, corrected, e)
    phi_m = measurement_angle(p)
    proj = float(np.real(ab * np.exp(-1j * phi_m)))
    return AnalyticPrediction(
        mu=mu(p, e),
        phiT=phase_phi(p.T, p, e),
        alphaT=a,
        alpha_bar_T=ab,
        phi_meas=phi_m,
        p_err=error_probability(max(proj, 0.0)),
    )
