"""Parameter records shared by the model, analytics and dynamics layers.

Internal units: the cavity coupling ``g`` is the frequency unit (``g = 1``) and
times are in ``1/g``.  Conversion to MHz / microseconds happens only when
reporting, via :class:`MolecularReference`.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import asdict, dataclass, field, replace
from typing import Any


class RegimeWarning(UserWarning):
    """Parameters outside the large-detuning regime of the effective model."""


class Chirality(enum.Enum):
    L = "L"
    R = "R"

    @property
    def drive_sign(self) -> int:
        """Sign of the 1-3 Rabi coupling in the full Hamiltonian (+ for L)."""
        return 1 if self is Chirality.L else -1

    @property
    def effective_sign(self) -> int:
        """Sign multiplying the effective displacement drive (- for L)."""
        return -self.drive_sign

    @property
    def displacement_sign(self) -> int:
        """The cavity ends in ``|s * alpha(T)>``."""
        return self.drive_sign

    def other(self) -> "Chirality":
        return Chirality.R if self is Chirality.L else Chirality.L


@dataclass(frozen=True)
class PhysicalParams:
    Delta: float = 20.0
    delta: float = 1.0
    A1: float = 0.15
    A2: float = 2.5
    T: float = 250.0
    N: int = 30
    g: float = 1.0

    def __post_init__(self):
        for name in ("Delta", "delta", "T", "g"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and > 0, got {v}")
        if not (self.A1 > 0 and self.A2 > 0):
            raise ValueError(f"A1 and A2 must be > 0, got A1={self.A1}, A2={self.A2}")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")
        if self.Delta < 10 * self.g or self.delta < 10 * self.g**2 / self.Delta:
            warnings.warn(
                f"Delta={self.Delta}, delta={self.delta} outside the large-detuning regime "
                "(Delta >= 10 g, delta >= 10 g^2/Delta)",
                RegimeWarning,
                stacklevel=3,
            )

    def with_(self, **changes) -> "PhysicalParams":
        return replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class SystematicErrors:
    """Fractional errors: ``eta1`` on the 1-3 drive, ``eta2`` on the 1-2 drive,
    ``eta3`` on the cavity coupling, ``eta1p``/``eta2p`` on the two detunings."""

    eta1: float = 0.0
    eta2: float = 0.0
    eta3: float = 0.0
    eta1p: float = 0.0
    eta2p: float = 0.0

    def __post_init__(self):
        for k, v in asdict(self).items():
            if not (math.isfinite(v) and -0.5 <= v <= 0.5):
                raise ValueError(f"{k} must lie in [-0.5, 0.5], got {v}")

    @property
    def is_zero(self) -> bool:
        return all(v == 0.0 for v in asdict(self).values())

    def to_dict(self) -> dict[str, float]:
        return asdict(self)


NO_ERRORS = SystematicErrors()


@dataclass(frozen=True)
class EffectiveCouplings:
    """Parameters after systematic errors are applied, in units of g."""

    omega_amp: float  # peak of the 1-2 drive
    omega_tilde_amp: float  # peak of the 1-3 drive
    g_cav: float
    Delta: float
    delta: float
    T: float


def effective_couplings(p: PhysicalParams, e: SystematicErrors = NO_ERRORS) -> EffectiveCouplings:
    # the classical amplitudes keep the nominal g; eta3 acts on the cavity coupling only
    return EffectiveCouplings(
        omega_amp=(1 + e.eta2) * p.A2 * p.g,
        omega_tilde_amp=(1 + e.eta1) * p.A1 * p.g,
        g_cav=(1 + e.eta3) * p.g,
        Delta=(1 + e.eta1p) * p.Delta,
        delta=(1 + e.eta2p) * p.delta,
        T=p.T,
    )


@dataclass(frozen=True)
class AwgnConfig:
    snr_db: float = 10.0
    seed: int = 0
    # one independent sample per integrator step (the default full-model dt)
    grid_dt: float = 0.002

    def __post_init__(self):
        if math.isnan(self.snr_db) or self.snr_db == -math.inf:
            raise ValueError(f"snr_db must be a number or +inf, got {self.snr_db}")
        if not self.grid_dt > 0:
            raise ValueError(f"grid_dt must be > 0, got {self.grid_dt}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")


@dataclass(frozen=True)
class DecoherenceRates:
    kappa: float = 0.0
    gamma: float = 0.0
    gamma_phi: float = 0.0

    def __post_init__(self):
        for k, v in asdict(self).items():
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"decoherence rate {k} must be >= 0, got {v}")

    @property
    def is_zero(self) -> bool:
        return self.kappa == 0 and self.gamma == 0 and self.gamma_phi == 0

    def to_dict(self) -> dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class MolecularReference:
    """1,2-propanediol rotational levels 0_00, 1_11, 1_10 as levels 1, 2, 3 (MHz)."""

    omega12: float = 11363.0
    omega13: float = 12212.0
    omega23: float = 849.0
    omega: float = 11563.0
    omega_tilde: float = 12202.0
    nu: float = 639.0
    g_phys: float = 10.0
    notes: str = field(default="frequencies in MHz", compare=False)

    @property
    def Delta_phys(self) -> float:
        return self.omega - self.omega12

    @property
    def delta_phys(self) -> float:
        return self.omega13 - self.omega_tilde

    def to_params(self, **overrides) -> PhysicalParams:
        """Dimensionless detunings of this molecule in units of ``g_phys``."""
        kw = dict(Delta=self.Delta_phys / self.g_phys, delta=self.delta_phys / self.g_phys)
        kw.update(overrides)
        return PhysicalParams(**kw)

    def time_us(self, t_over_g: float) -> float:
        """Convert a time in units of ``1/g`` to microseconds (g in MHz)."""
        return t_over_g / self.g_phys

    def rate_mhz(self, rate_over_g: float) -> float:
        return rate_over_g * self.g_phys


PROPANEDIOL = MolecularReference()
