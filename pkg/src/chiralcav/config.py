"""Scenario configuration: one JSON document per simulated scenario."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import jsonschema

from .params import AwgnConfig, DecoherenceRates, PhysicalParams, SystematicErrors

DEFAULT_DT = {"full": 2e-3, "effective": 2e-2}
DEFAULT_STRIDE = 25

_num = {"type": "number"}
SCHEMA: dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "params": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "Delta": {"type": "number", "exclusiveMinimum": 0},
                "delta": {"type": "number", "exclusiveMinimum": 0},
                "A1": {"type": "number", "exclusiveMinimum": 0},
                "A2": {"type": "number", "exclusiveMinimum": 0},
                "T": {"type": "number", "exclusiveMinimum": 0},
                "N": {"type": "integer", "minimum": 1},
            },
        },
        "errors": {
            "type": "object",
            "additionalProperties": False,
            "properties": {k: {"type": "number", "minimum": -0.5, "maximum": 0.5}
                           for k in ("eta1", "eta2", "eta3", "eta1p", "eta2p")},
        },
        "awgn": {
            "oneOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {"snr_db": _num, "grid_dt": {"type": "number", "exclusiveMinimum": 0}},
                },
            ]
        },
        "rates": {
            "type": "object",
            "additionalProperties": False,
            "properties": {k: {"type": "number", "minimum": 0} for k in ("kappa", "gamma", "gamma_phi")},
        },
        "corrected_pulse": {"type": "boolean"},
        "mode": {"enum": ["full", "effective"]},
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dt": {"type": "number", "exclusiveMinimum": 0},
                "stride": {"type": "integer", "minimum": 1},
            },
        },
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "out": {"type": "string"},
        "g_phys_MHz": {"type": "number", "exclusiveMinimum": 0},
    },
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    params: PhysicalParams = field(default_factory=PhysicalParams)
    errors: SystematicErrors = field(default_factory=SystematicErrors)
    awgn: AwgnConfig | None = None
    rates: DecoherenceRates = field(default_factory=DecoherenceRates)
    corrected_pulse: bool = False
    mode: str = "full"
    dt: float | None = None
    stride: int = DEFAULT_STRIDE
    seed: int = 0
    out: str = "out"
    g_phys_MHz: float = 10.0

    def __post_init__(self):
        if self.mode not in DEFAULT_DT:
            raise ConfigError(f"mode must be 'full' or 'effective', got {self.mode!r}")

    @property
    def step(self) -> float:
        return DEFAULT_DT[self.mode] if self.dt is None else self.dt

    def with_(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        p = self.params.to_dict()
        p.pop("g")
        return {
            "params": p,
            "errors": self.errors.to_dict(),
            "awgn": None if self.awgn is None else {"snr_db": self.awgn.snr_db, "grid_dt": self.awgn.grid_dt},
            "rates": self.rates.to_dict(),
            "corrected_pulse": self.corrected_pulse,
            "mode": self.mode,
            "grid": {"dt": self.step, "stride": self.stride},
            "seed": self.seed,
            "out": self.out,
            "g_phys_MHz": self.g_phys_MHz,
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, default=_json_default)
        return hashlib.sha256(blob.encode()).hexdigest()

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "ScenarioConfig":
        try:
            jsonschema.validate(doc, SCHEMA)
        except jsonschema.ValidationError as exc:
            raise ConfigError(f"invalid config: {exc.message}") from exc
        try:
            grid = doc.get("grid", {})
            awgn = doc.get("awgn")
            seed = int(doc.get("seed", 0))
            return cls(
                params=PhysicalParams(**doc.get("params", {})),
                errors=SystematicErrors(**doc.get("errors", {})),
                awgn=None if awgn is None else AwgnConfig(seed=seed, **awgn),
                rates=DecoherenceRates(**doc.get("rates", {})),
                corrected_pulse=bool(doc.get("corrected_pulse", False)),
                mode=doc.get("mode", "full"),
                dt=grid.get("dt"),
                stride=int(grid.get("stride", DEFAULT_STRIDE)),
                seed=seed,
                out=doc.get("out", "out"),
                g_phys_MHz=float(doc.get("g_phys_MHz", 10.0)),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path: str | Path) -> "ScenarioConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(doc)


def _json_default(o):
    if isinstance(o, float) and not math.isfinite(o):
        return str(o)
    raise TypeError(type(o))
