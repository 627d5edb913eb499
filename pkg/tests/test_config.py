from dataclasses import fields

import pytest
import tomli

from lfrl.config import PROVENANCE, SECTIONS, RunConfig, default_config_toml, from_dict, load_config
from lfrl.errors import ConfigError


def test_every_default_has_provenance():
    cfg = RunConfig()
    keys = {f"{s}.{f.name}" for s in SECTIONS for f in fields(getattr(cfg, s))}
    assert keys == set(PROVENANCE)
    assert all(v.startswith(("paper", "decision")) for v in PROVENANCE.values())


def test_default_toml_roundtrip(tmp_path):
    text = default_config_toml()
    assert text.count("# provenance:") == len(PROVENANCE)
    path = tmp_path / "run.toml"
    path.write_text(text)
    assert load_config(path) == RunConfig()


def test_partial_file_overrides(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text("[ppo]\ntotal_steps = 1000\nhidden = [8, 8]\n[eval]\nepisodes = 3\n")
    cfg = load_config(path)
    assert cfg.ppo.total_steps == 1000 and cfg.ppo.hidden == (8, 8)
    assert cfg.eval.episodes == 3
    assert cfg.reward == RunConfig().reward


@pytest.mark.parametrize("data,match", [
    ({"nope": {}}, "unknown config section"),
    ({"ppo": {"gama": 0.9}}, "unknown key"),
    ({"ppo": {"epochs": 2.5}}, "integer"),
    ({"eval": {"episodes": 0}}, ">= 1"),
    ({"eval": {"agent": "human"}}, "agent"),
    ({"ppo": {"gamma": 2.0}}, "gamma"),
])
def test_invalid_values(data, match):
    with pytest.raises(ConfigError, match=match):
        from_dict(data)


def test_missing_files_named(tmp_path):
    missing = tmp_path / "no_track.txt"
    with pytest.raises(ConfigError, match=str(missing)):
        from_dict({"run": {"track": str(missing)}})
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "absent.toml")


def test_bad_toml(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text("[ppo\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_hash_ignores_output_dir_only():
    a = RunConfig()
    assert a.hash() == a.with_(run={"out": "elsewhere"}).hash()
    assert a.hash() != a.with_(ppo={"seed": 1}).hash()
    assert len(a.hash()) == 12


def test_out_dir_env_override(monkeypatch, tmp_path):
    cfg = RunConfig()
    monkeypatch.delenv("LFRL_OUT", raising=False)
    assert str(cfg.out_dir()) == "runs"
    monkeypatch.setenv("LFRL_OUT", str(tmp_path))
    assert cfg.out_dir() == tmp_path


def test_toml_is_valid_for_custom_values():
    cfg = RunConfig().with_(eval={"profile": ""}, run={"seeds": (4, 5)})
    assert tomli.loads(default_config_toml(cfg))["run"]["seeds"] == [4, 5]
