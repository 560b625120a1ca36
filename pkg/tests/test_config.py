"""
tests/test_config.py — Configuration layering, presets, run directories and locks.
"""

import os
import sys

import pytest
import yaml

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from opposd.config import (
    OUTPUT_DIR_ENV, PRESET_ENV, RunLock, RunLockError, build_run_config, check_drift,
    create_run_directory, deep_merge, defaults_help, flatten_values, list_presets,
    load_defaults, load_preset, load_run_config, merge_all_values, parse_lock,
    parse_set_values, resolve_presets, resolve_values, run_directory, write_lock,
)
from opposd.config.lock import config_checksum, input_entry
from opposd.errors import ConfigError


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    monkeypatch.delenv(PRESET_ENV, raising=False)
    monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)


def _values(*set_args, presets=None):
    return resolve_values(presets, None, ["seed=1", *set_args])


# ─────────────────────────────────────────────
# VALUES
# ─────────────────────────────────────────────
class TestValues:
    def test_deep_merge_keeps_siblings(self):
        merged = deep_merge({"a": {"b": 1, "c": 2}, "d": 3}, {"a": {"b": 9}})
        assert merged == {"a": {"b": 9, "c": 2}, "d": 3}

    def test_deep_merge_does_not_mutate(self):
        base = {"a": {"b": 1}}
        deep_merge(base, {"a": {"b": 2}})
        assert base == {"a": {"b": 1}}

    def test_set_coercion(self):
        parsed = parse_set_values([
            "seed=3", "train.gamma=0.98", "train.normalize_states=false",
            "actor.hidden=[16, 16]", "critic.hidden=[]", "actor.projection=null",
            "ratio.bandwidth_mode=fixed",
        ])
        assert parsed["seed"] == 3
        assert parsed["train"] == {"gamma": 0.98, "normalize_states": False}
        assert parsed["actor"] == {"hidden": [16, 16], "projection": None}
        assert parsed["critic"]["hidden"] == []
        assert parsed["ratio"]["bandwidth_mode"] == "fixed"

    def test_set_needs_equals(self):
        with pytest.raises(ConfigError, match="expected key=value"):
            parse_set_values(["seed"])

    def test_set_conflict(self):
        with pytest.raises(ConfigError, match="Conflicting"):
            parse_set_values(["train=1", "train.gamma=0.5"])

    def test_files_then_set(self, tmp_path):
        vf = tmp_path / "values.yaml"
        vf.write_text("train:\n  gamma: 0.9\n  lam: 0.5\n")
        merged = merge_all_values({"train": {"gamma": 1.0, "lam": 0.0}}, [vf], ["train.lam=1.0"])
        assert merged["train"] == {"gamma": 0.9, "lam": 1.0}

    def test_missing_values_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            merge_all_values({}, [tmp_path / "nope.yaml"], [])

    def test_values_file_must_be_mapping(self, tmp_path):
        vf = tmp_path / "values.yaml"
        vf.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigError, match="YAML mapping"):
            merge_all_values({}, [vf], [])

    def test_flatten(self):
        assert flatten_values({"a": {"b": 1, "c": {}}, "d": None}) == {
            "a.b": 1, "a.c": {}, "d": None}


# ─────────────────────────────────────────────
# PRESETS
# ─────────────────────────────────────────────
class TestPresets:
    def test_shipped(self):
        assert list_presets() == ["discounted", "hard_example"]

    def test_flag_beats_env(self, monkeypatch):
        monkeypatch.setenv(PRESET_ENV, "discounted")
        assert resolve_presets(["hard_example"]) == ["hard_example"]

    def test_env_list(self, monkeypatch):
        monkeypatch.setenv(PRESET_ENV, "discounted, hard_example,")
        assert resolve_presets() == ["discounted", "hard_example"]

    def test_unknown(self):
        with pytest.raises(ConfigError, match="Unknown preset 'nope'"):
            load_preset("nope")

    def test_preset_file_path(self, tmp_path):
        p = tmp_path / "mine.yaml"
        p.write_text("train:\n  lam: 0.3\n")
        assert load_preset(str(p)) == {"train": {"lam": 0.3}}

    def test_preset_sits_below_set(self):
        values = _values("train.gamma=0.9", presets=["discounted"])
        assert values["train"]["gamma"] == 0.9
        assert values["train"]["discount_variant"] == "discounted_full"
        assert values["actor"]["hidden"] == [16, 16, 16]

    def test_hard_example_preset_builds(self):
        config = load_run_config(["hard_example"], None, ["seed=0"])
        assert config.env == "hard_example"
        assert config.horizon is None
        assert config.train.actor_hidden == []
        assert config.train.actor_projection.shape == (6, 4)
        assert not config.train.normalize_states


# ─────────────────────────────────────────────
# RUN CONFIG
# ─────────────────────────────────────────────
class TestRunConfig:
    def test_defaults(self):
        config = build_run_config(_values())
        assert config.seed == 1
        assert config.env == "cartpole"
        assert config.horizon == 200
        assert config.train.gamma == 1.0
        assert config.train.batch_actor == 5000
        assert config.train.n_ratio == 50
        assert config.train.actor_projection is None
        assert config.simulator

    def test_seed_required(self):
        with pytest.raises(ConfigError, match="seed: is required"):
            build_run_config(resolve_values())

    def test_unknown_key(self):
        with pytest.raises(ConfigError) as exc:
            build_run_config(_values("train.gama=0.9"))
        assert exc.value.field == "train.gama"

    def test_wrong_type(self):
        with pytest.raises(ConfigError, match="critic.batch_size: expected int"):
            build_run_config(_values("critic.batch_size=big"))

    def test_range_error_names_yaml_key(self):
        with pytest.raises(ConfigError) as exc:
            build_run_config(_values("actor.lr=0"))
        assert exc.value.field == "actor.lr"

    def test_gamma_one_needs_average(self):
        with pytest.raises(ConfigError) as exc:
            build_run_config(_values("train.discount_variant=discounted_full"))
        assert exc.value.field == "train.discount_variant"

    def test_unknown_projection(self):
        with pytest.raises(ConfigError, match="actor.projection"):
            build_run_config(_values("actor.projection=diagonal"))

    def test_missing_dataset_file(self, tmp_path):
        with pytest.raises(ConfigError, match="data.dataset: file not found"):
            build_run_config(_values(f"data.dataset={tmp_path / 'd.jsonl'}"))

    def test_missing_tabular_file(self, tmp_path):
        with pytest.raises(ConfigError, match="env.name"):
            build_run_config(_values(f"env.name=tabular:{tmp_path / 'm.json'}"))

    def test_output_dir_env(self, monkeypatch, tmp_path):
        monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path))
        assert build_run_config(_values()).output_dir == tmp_path

    def test_checksum_tracks_values(self):
        a = build_run_config(_values())
        b = build_run_config(_values("train.lam=0.5"))
        assert a.checksum != b.checksum
        assert a.checksum == build_run_config(_values()).checksum

    def test_defaults_help(self):
        text = defaults_help()
        assert "seed = (required)" in text
        assert "train.gamma = 1.0" in text
        assert "data.dataset = null" in text

    def test_every_default_is_typed(self):
        flat = flatten_values(load_defaults())
        assert "ratio.bandwidth_mode" in flat
        assert flat["seed"] is None


# ─────────────────────────────────────────────
# RUN DIRECTORIES & LOCKS
# ─────────────────────────────────────────────
class TestRunDirectory:
    def test_suffixes(self, tmp_path):
        first = run_directory(tmp_path, "train", "sha256:" + "a" * 64)
        assert first.name == "train-" + "a" * 12
        first.mkdir()
        second = run_directory(tmp_path, "train", "sha256:" + "a" * 64)
        assert second.name == first.name + "-1"
        second.mkdir()
        assert run_directory(tmp_path, "train", "sha256:" + "a" * 64).name == first.name + "-2"

    def test_create_writes_lock(self, tmp_path):
        config = build_run_config(_values(f"output_dir={tmp_path}"))
        run_dir = create_run_directory(config, "collect")
        lock = parse_lock(run_dir)
        assert lock.command == "collect"
        assert lock.seed == 1
        assert lock.checksum == config.checksum
        assert run_dir.name == f"collect-{lock.short_id}"
        assert check_drift(lock) == []


class TestRunLock:
    def _lock(self, tmp_path):
        data = tmp_path / "data.jsonl"
        data.write_text("{}\n")
        config = {"seed": 2, "train": {"gamma": 1.0}}
        lock = RunLock("train", 2, config_checksum(config), config,
                       {"dataset": input_entry(data)})
        return lock, data

    def test_write_and_parse(self, tmp_path):
        lock, _ = self._lock(tmp_path)
        write_lock(lock, tmp_path / "run.lock")
        doc = yaml.safe_load((tmp_path / "run.lock").read_text())
        assert doc["apiVersion"] == "opposd/v1"
        assert doc["kind"] == "RunLock"
        parsed = parse_lock(tmp_path / "run.lock")
        assert parsed.config == lock.config
        assert parsed.inputs == lock.inputs

    def test_input_drift(self, tmp_path):
        lock, data = self._lock(tmp_path)
        assert check_drift(lock) == []
        data.write_text("changed\n")
        assert check_drift(lock) == ["dataset"]
        data.unlink()
        assert check_drift(lock) == ["dataset"]

    def test_config_drift(self, tmp_path):
        lock, _ = self._lock(tmp_path)
        lock.config["seed"] = 3
        assert check_drift(lock) == ["config"]

    def test_missing(self, tmp_path):
        with pytest.raises(RunLockError, match="not found"):
            parse_lock(tmp_path)

    def test_wrong_kind(self, tmp_path):
        (tmp_path / "run.lock").write_text("apiVersion: opposd/v1\nkind: Other\n")
        with pytest.raises(RunLockError, match="is not a opposd/v1 RunLock"):
            parse_lock(tmp_path)

    def test_missing_field(self, tmp_path):
        (tmp_path / "run.lock").write_text("apiVersion: opposd/v1\nkind: RunLock\ncommand: x\n")
        with pytest.raises(RunLockError, match="missing 'seed'"):
            parse_lock(tmp_path)
