"""End-to-end tests of the click commands."""

import csv

import pytest
from click.testing import CliRunner

from cyclesr.degrade.corpus import MANIFEST_NAME
from cyclesr.imaging.image import load_image
from cyclesr.imaging.evaluation import CSV_COLUMNS
from cyclesr.interfaces.cli import cli
from tests.conftest import TINY_HR_SIZE, tiny_settings


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def tiny_config(tmp_dir):
    path = tmp_dir / "tiny.yaml"
    tiny_settings(tmp_dir / "runs").dump_yaml(path)
    return path


def _ok(result):
    assert result.exit_code == 0, result.output
    return result


@pytest.fixture
def cli_corpus(runner, tmp_dir, tiny_config):
    hr = tmp_dir / "hr"
    _ok(runner.invoke(cli, ["procedural", "--out", str(hr), "--count", "6", "--size", str(TINY_HR_SIZE), "--seed", "7"]))
    out = tmp_dir / "corpus"
    _ok(runner.invoke(cli, ["synth", "--hr-dir", str(hr), "--out", str(out), "--seed", "3", "--config", str(tiny_config)]))
    return out


@pytest.fixture
def trained_ckpt(runner, tmp_dir, tiny_config, cli_corpus):
    result = _ok(runner.invoke(cli, [
        "train", "--config", str(tiny_config), "--manifest", str(cli_corpus / MANIFEST_NAME),
        "--epochs", "2", "--name", "cli", "--runs-dir", str(tmp_dir / "runs"),
        "--set", "train.pretrain_epochs=1",
    ]))
    assert "Final checkpoint" in result.output
    return tmp_dir / "runs" / "cli" / "ckpt_2"


class TestGlobal:
    def test_help_lists_commands(self, runner):
        result = _ok(runner.invoke(cli, ["--help"]))
        for name in ("procedural", "synth", "train", "infer", "eval", "ablate"):
            assert name in result.output

    def test_eval_help_shows_defaults(self, runner):
        result = _ok(runner.invoke(cli, ["eval", "--help"]))
        assert "default: 40" in result.output
        assert "default: 4" in result.output

    def test_version(self, runner):
        assert "cyclesr" in _ok(runner.invoke(cli, ["--version"])).output


class TestSynth:
    def test_rerun_is_byte_identical(self, runner, tmp_dir, tiny_config, cli_corpus):
        again = tmp_dir / "again"
        _ok(runner.invoke(cli, [
            "synth", "--hr-dir", str(tmp_dir / "hr"), "--out", str(again), "--seed", "3", "--config", str(tiny_config),
        ]))
        for path in sorted(cli_corpus.rglob("*")):
            if path.is_file():
                assert (again / path.relative_to(cli_corpus)).read_bytes() == path.read_bytes()

    def test_reports_entry_counts(self, runner, tmp_dir, tiny_config, cli_corpus):
        result = _ok(runner.invoke(cli, [
            "synth", "--hr-dir", str(tmp_dir / "hr"), "--out", str(tmp_dir / "counted"), "--seed", "3",
            "--config", str(tiny_config),
        ]))
        assert "6 HR, 6 synthetic LR, 6 real LR" in result.output

    def test_missing_hr_dir(self, runner, tmp_dir):
        result = runner.invoke(cli, ["synth", "--hr-dir", str(tmp_dir / "nope"), "--out", str(tmp_dir / "c"), "--seed", "0"])
        assert result.exit_code == 2

    def test_bad_set_value(self, runner, tmp_dir, tiny_config):
        (tmp_dir / "hr").mkdir()
        result = runner.invoke(cli, [
            "synth", "--hr-dir", str(tmp_dir / "hr"), "--out", str(tmp_dir / "c"), "--seed", "0",
            "--config", str(tiny_config), "--set", "degradation.scale=3",
        ])
        assert result.exit_code == 2
        assert "Invalid configuration" in result.output

    def test_too_few_images(self, runner, tmp_dir, tiny_config):
        (tmp_dir / "hr").mkdir()
        result = runner.invoke(cli, [
            "synth", "--hr-dir", str(tmp_dir / "hr"), "--out", str(tmp_dir / "c"), "--seed", "0", "--config", str(tiny_config),
        ])
        assert result.exit_code == 1
        assert "Error:" in result.output


class TestTrainInferEval:
    def test_train_writes_run(self, tmp_dir, trained_ckpt):
        run = trained_ckpt.parent
        assert (run / "ckpt_1").is_dir() and trained_ckpt.is_dir()
        assert (run / "train_log.jsonl").is_file()
        assert (run / "config.yaml").is_file()

    def test_missing_manifest(self, runner, tmp_dir, tiny_config):
        result = runner.invoke(cli, ["train", "--config", str(tiny_config), "--runs-dir", str(tmp_dir / "runs")])
        assert result.exit_code == 1
        assert "No training manifest" in result.output

    def test_infer_then_eval(self, runner, tmp_dir, cli_corpus, trained_ckpt):
        lr_in = cli_corpus / "lr_real"
        out_a, out_b = tmp_dir / "sr_a", tmp_dir / "sr_b"
        _ok(runner.invoke(cli, ["infer", "--ckpt", str(trained_ckpt), "--in", str(lr_in), "--out", str(out_a)]))
        _ok(runner.invoke(cli, ["infer", "--ckpt", str(trained_ckpt), "--in", str(lr_in), "--out", str(out_b)]))
        names = sorted(p.name for p in out_a.iterdir())
        assert names == sorted(p.name for p in lr_in.iterdir())
        for name in names:
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()
        assert not any(p.name.startswith(".infer.") for p in tmp_dir.iterdir())

        csv_path = tmp_dir / "eval.csv"
        result = _ok(runner.invoke(cli, [
            "eval", "--sr-dir", str(out_a), "--hr-dir", str(cli_corpus / "hr"),
            "--max-shift", "2", "--border", "2", "--csv", str(csv_path), "--plot", str(tmp_dir / "scores.png"),
        ]))
        assert "mean PSNR" in result.output
        with open(csv_path, newline="") as f:
            rows = list(csv.DictReader(f))
        assert list(rows[0]) == CSV_COLUMNS
        assert len(rows) == len(names) + 1 and rows[-1]["image_id"] == "mean"
        assert (tmp_dir / "scores.png").is_file()

    def test_cyclegan_mode_train_then_infer(self, runner, tmp_dir, tiny_config, cli_corpus):
        _ok(runner.invoke(cli, [
            "train", "--config", str(tiny_config), "--manifest", str(cli_corpus / MANIFEST_NAME),
            "--mode", "cyclegan", "--epochs", "2", "--name", "cg", "--runs-dir", str(tmp_dir / "runs"),
        ]))
        out = tmp_dir / "sr_cg"
        _ok(runner.invoke(cli, [
            "infer", "--ckpt", str(tmp_dir / "runs" / "cg" / "ckpt_2"), "--in", str(cli_corpus / "lr_real"), "--out", str(out),
        ]))
        names = sorted(p.name for p in out.iterdir())
        assert names == sorted(p.name for p in (cli_corpus / "lr_real").iterdir())
        assert load_image(out / names[0]).shape == (3, TINY_HR_SIZE, TINY_HR_SIZE)

    def test_infer_corrupt_checkpoint(self, runner, tmp_dir, cli_corpus, trained_ckpt):
        for path in trained_ckpt.iterdir():
            if path.suffix != ".json":
                path.write_bytes(b"garbage")
        out = tmp_dir / "sr"
        result = runner.invoke(cli, ["infer", "--ckpt", str(trained_ckpt), "--in", str(cli_corpus / "lr_real"), "--out", str(out)])
        assert result.exit_code == 1
        assert "Corrupt checkpoint" in result.output
        assert not out.exists()

    def test_infer_missing_checkpoint(self, runner, tmp_dir, cli_corpus):
        result = runner.invoke(cli, [
            "infer", "--ckpt", str(tmp_dir / "ckpt_9"), "--in", str(cli_corpus / "lr_real"), "--out", str(tmp_dir / "sr"),
        ])
        assert result.exit_code == 2

    def test_eval_missing_ground_truth(self, runner, tmp_dir, cli_corpus):
        empty = tmp_dir / "empty"
        empty.mkdir()
        result = runner.invoke(cli, [
            "eval", "--sr-dir", str(cli_corpus / "hr"), "--hr-dir", str(empty),
            "--csv", str(tmp_dir / "e.csv"), "--max-shift", "0",
        ])
        assert result.exit_code == 1
        assert "No ground truth" in result.output


class TestAblate:
    def test_two_value_sweep(self, runner, tmp_dir, tiny_config, cli_corpus):
        out = tmp_dir / "ablation"
        result = _ok(runner.invoke(cli, [
            "ablate", "--lambda-mse", "10", "--lambda-mse", "1000", "--config", str(tiny_config),
            "--manifest", str(cli_corpus / MANIFEST_NAME), "--epochs", "2", "--out", str(out),
            "--set", "train.pretrain_epochs=1",
        ]))
        assert "Report written to" in result.output
        assert (out / "ablation.csv").is_file()
        assert (out / "lambda_mse_10" / "ckpt_2").is_dir()

    def test_single_value_rejected(self, runner, tmp_dir, tiny_config, cli_corpus):
        result = runner.invoke(cli, [
            "ablate", "--lambda-mse", "10", "--config", str(tiny_config),
            "--manifest", str(cli_corpus / MANIFEST_NAME), "--out", str(tmp_dir / "a"),
        ])
        assert result.exit_code == 1
        assert "at least 2" in result.output
