"""Config file parsing, presets, and the precedence chain."""

from __future__ import annotations

import pytest

import ddikge.config as cf
from ddikge.errors import ConfigError


def test_parse_kv_basics():
    text = "# comment\nscorer = complex\n\ndim = 16\n"
    assert cf.parse_kv_text(text) == {"scorer": "complex", "dim": "16"}


def test_parse_kv_rejects_duplicates_and_garbage():
    with pytest.raises(ConfigError, match="line 2: duplicate"):
        cf.parse_kv_text("dim = 4\ndim = 8\n")
    with pytest.raises(ConfigError, match="line 1: expected"):
        cf.parse_kv_text("just some words\n")
    with pytest.raises(ConfigError, match="empty key or value"):
        cf.parse_kv_text("dim =\n")


def test_build_defaults_without_any_input():
    run = cf.build_run_config()
    assert run.train.scorer == "complex"
    assert run.train.dim == 200
    assert run.split_ratios == (0.8, 0.1, 0.1)
    assert run.effective_split_seed() == run.train.seed


def test_unknown_key_lists_valid_keys():
    with pytest.raises(ConfigError, match="valid keys:.*scorer"):
        cf.build_run_config(set_args=["dimension=16"])


def test_bad_value_names_the_key():
    with pytest.raises(ConfigError, match="bad value for 'dim'"):
        cf.build_run_config(set_args=["dim=sixteen"])
    with pytest.raises(ConfigError, match="split_ratios"):
        cf.build_run_config(set_args=["split_ratios=0.8,0.2"])


def test_unknown_preset_is_rejected():
    with pytest.raises(ConfigError, match="unknown preset"):
        cf.build_run_config(set_args=["preset=deepddi-transe"])


def test_preset_fills_values_file_overrides_preset(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("preset = synth-small\nepochs = 7\n", encoding="utf-8")
    run = cf.build_run_config(str(p))
    assert run.preset == "synth-small"
    assert run.train.scorer == "complex"
    assert run.train.dim == cf.PRESETS["synth-small"]["dim"]
    assert run.train.epochs == 7  # file wins over the preset


def test_set_overrides_file(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("scorer = simple\ndim = 12\n", encoding="utf-8")
    run = cf.build_run_config(str(p), set_args=["dim=24", "split_by_pair=true"])
    assert run.train.scorer == "simple"
    assert run.train.dim == 24
    assert run.split_by_pair is True


def test_set_duplicate_key_rejected():
    with pytest.raises(ConfigError, match="duplicate key"):
        cf.build_run_config(set_args=["dim=8", "dim=9"])
    with pytest.raises(ConfigError, match="expected key=value"):
        cf.build_run_config(set_args=["dim"])


def test_missing_config_file_is_a_config_error():
    with pytest.raises(ConfigError, match="not found"):
        cf.build_run_config("/nonexistent/run.cfg")


def test_invalid_train_values_rejected_at_build_time():
    with pytest.raises(ConfigError, match="sampler"):
        cf.build_run_config(set_args=["sampler=importance"])


def test_resolved_text_round_trips_through_the_parser(tmp_path):
    run = cf.build_run_config(set_args=[
        "preset=synth-medium", "data=/tmp/x.tsv", "out=/tmp/run", "seed=9"])
    text = run.resolved_text()
    kv = cf.parse_kv_text(text)
    assert kv["preset"] == "synth-medium"
    assert kv["seed"] == "9"
    assert kv["split_seed"] == "9"
    # Feeding the resolved text back reproduces the same settings.
    p = tmp_path / "resolved.cfg"
    p.write_text(text, encoding="utf-8")
    again = cf.build_run_config(str(p))
    assert again.train == run.train
    assert again.split_ratios == run.split_ratios


def test_every_preset_builds_a_valid_config():
    for name in cf.PRESETS:
        run = cf.build_run_config(set_args=[f"preset={name}"])
        run.train.validate()
        assert run.preset == name
        assert run.train.sampler == "aae"
