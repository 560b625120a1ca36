"""
tests/test_cli.py — CLI tests.

Tests commands using Click CliRunner on a shrunken hard-example run.
"""

import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from click.testing import CliRunner

from opposd.checks import CheckResult
from opposd.cli import main
from opposd.config import OUTPUT_DIR_ENV, PRESET_ENV
from opposd.config.lock import parse_lock

TINY = [
    "--preset", "hard_example",
    "--set", "seed=0",
    "--set", "data.n_trajectories=30",
    "--set", "data.eval_n_trajectories=30",
    "--set", "train.bc_iterations=5",
    "--set", "train.total_actor_updates=4",
    "--set", "train.checkpoint_interval=2",
    "--set", "train.mc_eval_interval=0",
    "--set", "actor.batch_size=32",
    "--set", "critic.batch_size=32",
    "--set", "critic.n_steps=2",
    "--set", "critic.warm_start=5",
    "--set", "ratio.batch_size=16",
    "--set", "ratio.n_steps=2",
    "--set", "ratio.warm_start=5",
    "--set", "evaluate.mc_episodes=10",
]

runner = CliRunner()


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    monkeypatch.delenv(PRESET_ENV, raising=False)
    monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)


def _stdout_line(result):
    return result.output.strip().splitlines()[-1]


def _invoke(*args, out=None):
    extra = ["--set", f"output_dir={out}"] if out is not None else []
    return runner.invoke(main, [*args, *extra])


class TestHelp:
    def test_epilog_lists_defaults(self):
        result = runner.invoke(main, ["--help"])
        assert result.exit_code == 0
        assert "Configuration fields and defaults" in result.output
        assert "seed = (required)" in result.output
        assert "ratio.bandwidth_mode = median" in result.output

    def test_commands(self):
        result = runner.invoke(main, ["--help"])
        for name in ("collect", "train", "evaluate", "select", "gradcheck"):
            assert name in result.output


# ─────────────────────────────────────────────
# COLLECT
# ─────────────────────────────────────────────
class TestCollect:
    def test_writes_dataset(self, tmp_path):
        result = _invoke("collect", *TINY, out=tmp_path)
        assert result.exit_code == 0, result.output
        path = Path(_stdout_line(result))
        assert path.name == "dataset.jsonl"
        assert path.parent.name.startswith("collect-")
        assert parse_lock(path.parent).command == "collect"
        assert "Collected 30 trajectories" in result.output

    def test_output_dir_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "env-out"))
        result = _invoke("collect", *TINY)
        assert result.exit_code == 0, result.output
        assert Path(_stdout_line(result)).parent.parent == tmp_path / "env-out"

    def test_same_config_gets_suffix(self, tmp_path):
        first = Path(_stdout_line(_invoke("collect", *TINY, out=tmp_path))).parent
        second = Path(_stdout_line(_invoke("collect", *TINY, out=tmp_path))).parent
        assert second.name == first.name + "-1"

    def test_missing_seed_is_config_error(self, tmp_path):
        result = runner.invoke(main, ["collect", "--set", f"output_dir={tmp_path}"])
        assert result.exit_code == 2
        assert "seed: is required" in result.output

    def test_unknown_key_is_config_error(self, tmp_path):
        result = _invoke("collect", *TINY, "--set", "train.gama=0.5", out=tmp_path)
        assert result.exit_code == 2
        assert "train.gama" in result.output

    def test_unknown_preset_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv(PRESET_ENV, "nope")
        result = _invoke("collect", "--set", "seed=0", out=tmp_path)
        assert result.exit_code == 2
        assert "Unknown preset 'nope'" in result.output


# ─────────────────────────────────────────────
# TRAIN / EVALUATE / SELECT
# ─────────────────────────────────────────────
class TestPipeline:
    def test_train_evaluate_select(self, tmp_path):
        result = _invoke("train", *TINY, out=tmp_path)
        assert result.exit_code == 0, result.output
        run_dir = Path(_stdout_line(result))
        assert run_dir.name.startswith("train-")
        assert "(3 checkpoints)" in result.output
        assert (run_dir / "metrics.csv").exists()

        result = runner.invoke(main, ["evaluate", str(run_dir)])
        assert result.exit_code == 0, result.output
        best = _stdout_line(result)
        assert best.startswith("ckpt-")
        assert "Evaluated 3 checkpoints" in result.output

        csv_path = next(tmp_path.glob("evaluate-*/evaluations.csv"))
        result = runner.invoke(main, ["select", str(csv_path)])
        assert result.exit_code == 0, result.output
        assert _stdout_line(result) == best

    def test_evaluate_without_simulator(self, tmp_path):
        run_dir = Path(_stdout_line(_invoke("train", *TINY, out=tmp_path)))
        result = runner.invoke(main, ["evaluate", str(run_dir),
                                      "--set", "evaluate.simulator=false"])
        assert result.exit_code == 0, result.output
        assert "Pearson" not in result.output
        assert not list(tmp_path.glob("evaluate-*/scatter.csv"))

    def test_train_offpac_from_dataset(self, tmp_path):
        data = _stdout_line(_invoke("collect", *TINY, out=tmp_path))
        result = _invoke("train", *TINY, "--set", "train.algorithm=offpac",
                         "--set", f"data.dataset={data}", out=tmp_path)
        assert result.exit_code == 0, result.output
        lock = parse_lock(Path(_stdout_line(result)))
        assert "dataset" in lock.inputs
        assert "Trained offpac for 4 actor updates" in result.output

    def test_evaluate_missing_run(self, tmp_path):
        (tmp_path / "empty").mkdir()
        result = runner.invoke(main, ["evaluate", str(tmp_path / "empty")])
        assert result.exit_code == 1
        assert "Lock file not found" in result.output

    def test_select_malformed(self, tmp_path):
        path = tmp_path / "evaluations.csv"
        path.write_text("checkpoint_id,update_index,oppe_estimate\nckpt-000000,x,1.0\n")
        result = runner.invoke(main, ["select", str(path)])
        assert result.exit_code == 1
        assert "malformed row" in result.output


class TestResume:
    def test_resume_latest(self, tmp_path):
        run_dir = _stdout_line(_invoke("train", *TINY, out=tmp_path))
        result = runner.invoke(main, ["train", "--resume", run_dir])
        assert result.exit_code == 0, result.output
        assert _stdout_line(result) == run_dir
        assert "for 4 actor updates" in result.output

    def test_resume_warns_about_ignored_options(self, tmp_path):
        run_dir = _stdout_line(_invoke("train", *TINY, out=tmp_path))
        result = runner.invoke(main, ["train", "--resume", run_dir, "--set", "seed=5"])
        assert result.exit_code == 0, result.output
        assert "ignored with --resume" in result.output

    def test_resume_refuses_drift(self, tmp_path):
        data = Path(_stdout_line(_invoke("collect", *TINY, out=tmp_path)))
        run_dir = _stdout_line(_invoke("train", *TINY, "--set", f"data.dataset={data}",
                                       out=tmp_path))
        data.write_text(data.read_text() + "\n")
        result = runner.invoke(main, ["train", "--resume", run_dir])
        assert result.exit_code == 1
        assert "inputs changed since the run started (dataset)" in result.output

    def test_resume_collect_run(self, tmp_path):
        data = Path(_stdout_line(_invoke("collect", *TINY, out=tmp_path)))
        result = runner.invoke(main, ["train", "--resume", str(data.parent)])
        assert result.exit_code == 1
        assert "not a training run" in result.output


# ─────────────────────────────────────────────
# GRADCHECK
# ─────────────────────────────────────────────
class TestGradcheck:
    def test_all_pass(self):
        result = runner.invoke(main, ["gradcheck"])
        assert result.exit_code == 0, result.output
        assert result.output.startswith("CHECK")
        assert "FAILED" not in result.output
        assert "checks passed." in result.output

    def test_failure_exits_numeric(self, monkeypatch):
        import importlib

        gradcheck_cmd = importlib.import_module("opposd.cli.gradcheck_cmd")

        monkeypatch.setattr(gradcheck_cmd, "run_checks", lambda seed: [
            CheckResult("ok_check", True, 1e-9, 1e-6),
            CheckResult("bad_check", False, 0.5, 1e-6),
        ])
        result = runner.invoke(main, ["gradcheck"])
        assert result.exit_code == 3
        assert "FAILED" in result.output
        assert "1 check(s) failed: bad_check" in result.output
