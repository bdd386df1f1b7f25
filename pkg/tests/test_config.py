import json

import pytest

from latent_modes.config import ConfigError, PipelineConfig, config_from_dict, load_config


def test_defaults_validate():
    cfg = PipelineConfig().validate()
    assert cfg.spaces == ["reduced", "raw"]
    assert cfg.space_section("raw") is cfg.traclus_compare


def test_round_trip_through_dict():
    cfg = config_from_dict({"seed": 3, "grid": {"n_pos": 2}, "traclus": {"epsilon": 0.5}})
    again = config_from_dict(cfg.to_dict())
    assert again == cfg and again.grid.n_pos == 2 and again.traclus.epsilon == 0.5


@pytest.mark.parametrize("data, message", [
    ({"sede": 1}, "unknown field"),
    ({"grid": {"n_pos": 0}}, "grid"),
    ({"cluster_space": "both"}, "cluster_space"),
    ({"traclus": {"min_lns": 0}}, "traclus.min_lns"),
    ({"traclus": {"epsilon": -1.0}}, "traclus.epsilon"),
    ({"env": {"max_steps": 0}}, "max_steps"),
    ({"bc": {"activation": "gelu"}}, "activation"),
    ({"pacmap": {"n_nb": 0}}, "n_nb"),
    ({"patch_scenarios": {}}, "patch_scenarios"),
    ({"env": []}, "env"),
])
def test_invalid_configs(data, message):
    with pytest.raises(ConfigError, match=message):
        config_from_dict(data)


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(ConfigError):
        load_config(bad)
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"compare_spaces": False, "cluster_space": "raw"}))
    assert load_config(good).spaces == ["raw"]


def test_shipped_configs_load():
    from pathlib import Path
    root = Path(__file__).resolve().parents[1] / "configs"
    for path in root.glob("*.json"):
        load_config(path)
