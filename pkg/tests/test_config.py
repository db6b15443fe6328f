import json

import pytest

from chiralcav.config import ConfigError, ScenarioConfig
from chiralcav.params import (
    PROPANEDIOL,
    AwgnConfig,
    Chirality,
    DecoherenceRates,
    PhysicalParams,
    RegimeWarning,
    SystematicErrors,
)


def test_defaults_are_nominal_point():
    c = ScenarioConfig()
    p = c.params
    assert (p.Delta, p.delta, p.A1, p.A2, p.T, p.N) == (20.0, 1.0, 0.15, 2.5, 250.0, 30)
    assert c.mode == "full" and c.step == 0.002 and c.awgn is None


def test_round_trip_and_digest(tmp_path):
    c = ScenarioConfig(
        errors=SystematicErrors(eta1=0.1),
        awgn=AwgnConfig(snr_db=12.0, seed=4),
        rates=DecoherenceRates(kappa=0.01),
        corrected_pulse=True,
        seed=4,
    )
    path = tmp_path / "c.json"
    path.write_text(json.dumps(c.to_dict()))
    back = ScenarioConfig.load(path)
    assert back.to_dict() == c.to_dict()
    assert back.digest() == c.digest()
    assert c.with_(seed=5).digest() != c.digest()


def test_schema_rejections(tmp_path):
    for doc in (
        {"params": {"N": 0}},
        {"params": {"Delta": -1}},
        {"errors": {"eta1": 0.9}},
        {"rates": {"kappa": -0.1}},
        {"mode": "fast"},
        {"unknown": 1},
        {"seed": -1},
    ):
        with pytest.raises(ConfigError):
            ScenarioConfig.from_dict(doc)
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        ScenarioConfig.load(bad)


def test_awgn_defaults_from_partial_block():
    c = ScenarioConfig.from_dict({"awgn": {}, "seed": 9})
    assert c.awgn == AwgnConfig(10.0, 9, 0.002)


def test_regime_warning():
    with pytest.warns(RegimeWarning):
        PhysicalParams(Delta=5.0)


def test_chirality_signs():
    assert Chirality.L.drive_sign == 1 and Chirality.R.drive_sign == -1
    assert Chirality.L.effective_sign == -1
    assert Chirality.L.other() is Chirality.R


def test_molecular_reference():
    r = PROPANEDIOL
    assert r.Delta_phys == 200.0 and r.delta_phys == 10.0
    assert r.nu + r.Delta_phys + r.delta_phys == r.omega23 == 849.0
    assert r.time_us(250.0) == 25.0
    p = r.to_params()
    assert (p.Delta, p.delta) == (20.0, 1.0)
