import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lefi.errors import ConfigError
from lefi.scenario import THETA_BASE, Scenario, gen_profiles, gen_scenario


def test_same_seed_same_profiles():
    a, b = gen_profiles(Scenario(), 7), gen_profiles(Scenario(), 7)
    assert a == b
    assert gen_profiles(Scenario(), 8) != a


def test_degenerate_pi_range():
    sc, prof = gen_scenario({"pi_range": [0.5, 0.5]}, seed=1)
    assert all(p.pi == 0.5 for p in prof)


def test_default_ranges():
    sc = Scenario(cost_scale=1.0)
    for seed in range(5):
        for p in gen_profiles(sc, seed):
            assert 0.1 <= p.pi <= 1.0
            assert 0.5 * THETA_BASE <= p.theta <= 2.0 * THETA_BASE
            assert 0.2 <= p.beta <= 1.0


def test_cost_scale_multiplies_theta():
    a = gen_profiles(Scenario(cost_scale=1.0), 3)
    b = gen_profiles(Scenario(cost_scale=0.5), 3)
    assert all(y.theta == pytest.approx(0.5 * x.theta, rel=1e-15) for x, y in zip(a, b))


@pytest.mark.parametrize(
    "bad",
    [
        {"pi_range": [0.8, 0.2]},
        {"pi_range": [0.1, 1.2]},
        {"beta_range": [0.0, 1.0]},
        {"n_cavs": 0},
        {"m_max": -1},
        {"eta": 0.0},
        {"delta": -0.1},
        {"t_max": 0},
        {"unknown_key": 1},
        {"theta_range": [1.0]},
    ],
)
def test_invalid_configs(bad):
    with pytest.raises(ConfigError):
        Scenario.from_dict(bad)


def test_json_roundtrip(tmp_path):
    sc = Scenario(n_cavs=7, m_max=3.5, pi_range=(0.2, 0.9))
    path = tmp_path / "c.json"
    path.write_text(json.dumps(sc.to_dict()))
    assert Scenario.from_json(path) == sc
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        Scenario.from_json(path)
    path.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        Scenario.from_json(path)


_FIELD_CHANGES = {
    "n_cavs": 11, "m_max": 6.0, "t_max": 60.0, "d_max": 9.0, "d_min": 0.5, "cost_scale": 0.5,
    "theta_range": (1e-4, 2e-4), "beta_range": (0.3, 0.9), "pi_range": (0.2, 0.8), "capacity_f": 20.0,
    "eta": 0.7, "delta": 0.02, "eta_gain": 3.0, "delta_gain": 0.2, "warmup": 4, "rounds": 50, "seed": 9,
    "candidate_count": 100, "xi": 0.02, "gp_noise": 1e-3,
}


@pytest.mark.parametrize("name", sorted(_FIELD_CHANGES))
def test_hash_changes_with_every_field(name):
    base = Scenario()
    assert base.with_(**{name: _FIELD_CHANGES[name]}).config_hash() != base.config_hash()


def test_hash_stable():
    assert Scenario().config_hash() == Scenario().config_hash()
    assert Scenario.from_dict(Scenario().to_dict()).config_hash() == Scenario().config_hash()


def test_nested_models_in_config():
    sc = Scenario.from_dict({"acc_model": {"f": 0.1}, "cm": {"p": 10.0, "q": 1.0}})
    assert sc.acc_model.f == 0.1 and sc.cm.p == 10.0


def test_default_step_sizes_scale_with_per_client_budget():
    sc = Scenario()
    assert sc.step_size() == pytest.approx(4.0 * 0.5**2)
    assert sc.probe_step() == pytest.approx(0.05)
    big = Scenario(n_cavs=50, m_max=25)
    assert big.step_size() == pytest.approx(4.0 * 0.25)
    assert Scenario(eta=0.3, delta=0.01).step_size() == 0.3
    assert Scenario(m_max=0.0).probe_step() > 0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 30))
def test_profiles_always_valid(seed, n):
    prof = gen_profiles(Scenario(n_cavs=n), seed)
    assert len(prof) == n
    assert [p.id for p in prof] == list(range(n))
    assert all(np.isfinite([p.beta, p.theta, p.pi]).all() for p in prof)
