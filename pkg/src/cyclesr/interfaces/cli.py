"""CLI interface for cyclesr using Click."""

from __future__ import annotations

import logging
import shutil
import sys
import tempfile
from pathlib import Path

import click
import yaml
from pydantic import ValidationError

from cyclesr import __version__
from cyclesr.core.config import Settings, load_settings

logger = logging.getLogger(__name__)

_MODES = ["cyclesr", "cyclesrgan", "cycle_plus_sr", "sr_syn", "sr_paired", "cyclegan"]


def _fail(e: Exception) -> None:
    click.echo(f"Error: {e}", err=True)
    sys.exit(1)


def _parse_sets(sets: tuple[str, ...]) -> dict:
    overrides = {}
    for item in sets:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise click.BadParameter(f"expected dotted.key=value, got '{item}'", param_hint="--set")
        overrides[key.strip()] = yaml.safe_load(raw)
    return overrides


def _load_settings(config: str | None, sets: tuple[str, ...], **flags) -> Settings:
    """Config file, then --set overrides, then dedicated flags."""
    overrides = _parse_sets(sets)
    epochs = flags.pop("epochs", None)
    if epochs is not None:
        overrides["train.epochs_total"] = epochs
        overrides.setdefault("train.decay_start_epoch", max(1, epochs // 2))
    keys = {
        "mode": "train.mode",
        "seed": "train.seed",
        "device": "train.device",
        "name": "run_name",
        "manifest": "manifest",
        "val_manifest": "val_manifest",
        "runs_dir": "runs_dir",
    }
    for flag, value in flags.items():
        if value is not None:
            overrides[keys[flag]] = str(value) if isinstance(value, Path) else value
    try:
        settings = load_settings(Path(config) if config else None, overrides)
    except ValidationError as e:
        raise click.UsageError(f"Invalid configuration:\n{e}") from e
    except FileNotFoundError as e:
        raise click.UsageError(str(e)) from e

    # --log-level wins over the config's level
    ctx = click.get_current_context(silent=True)
    if ctx is None or not (ctx.find_root().obj or {}).get("log_level"):
        logging.getLogger().setLevel(settings.log_level.upper())
    return settings


def _service(settings: Settings):
    from cyclesr.core.service import ExperimentService

    return ExperimentService(settings=settings, root=Path.cwd())


config_option = click.option(
    "--config", "-c", type=click.Path(exists=True, dir_okay=False), default=None,
    help="RunConfig YAML file (default: config/settings.yaml under the project root)",
)
set_option = click.option(
    "--set", "sets", multiple=True, metavar="KEY=VALUE",
    help="Override a config value, e.g. --set train.batch=8 (repeatable)",
)


@click.group()
@click.version_option(version=__version__, prog_name="cyclesr")
@click.option(
    "--log-level", default=None, envvar="CYCLESR_LOG_LEVEL",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
    help="Logging verbosity (default: log_level from the config, INFO)",
)
@click.pass_context
def cli(ctx: click.Context, log_level: str | None):
    """cyclesr - unsupervised super-resolution through cycle-consistent LR translation"""
    ctx.ensure_object(dict)
    ctx.obj["log_level"] = log_level
    logging.basicConfig(
        level=(log_level or "INFO").upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


# ---------------------------------------------------------------------------
# procedural — desk-scale HR images
# ---------------------------------------------------------------------------

@cli.command("procedural")
@click.option("--out", required=True, type=click.Path(file_okay=False), help="Output directory")
@click.option("--count", default=200, show_default=True, help="Number of images")
@click.option("--size", default=96, show_default=True, help="Image side in pixels")
@click.option("--seed", default=0, show_default=True, help="Random seed")
def procedural(out: str, count: int, size: int, seed: int):
    """Generate deterministic procedural HR images."""
    from cyclesr.degrade.procedural import generate_procedural_hr

    try:
        paths = generate_procedural_hr(Path(out), count, size, seed)
    except (ValueError, OSError) as e:
        _fail(e)
    click.echo(f"Wrote {len(paths)} images to {out}")


# ---------------------------------------------------------------------------
# synth — unpaired corpus from HR images
# ---------------------------------------------------------------------------

@cli.command("synth")
@click.option("--hr-dir", required=True, type=click.Path(exists=True, file_okay=False), help="Directory of HR images")
@click.option("--out", required=True, type=click.Path(file_okay=False), help="Corpus output directory")
@click.option("--seed", required=True, type=int, help="Corpus seed")
@config_option
@set_option
@click.option(
    "--synthetic-downsampler", default="bicubic", show_default=True,
    type=click.Choice(["bicubic", "bilinear", "nearest"]), help="Downsampler for the synthetic LR",
)
@click.option("--workers", default=1, show_default=True, help="Parallel image workers")
def synth(hr_dir: str, out: str, seed: int, config: str | None, sets: tuple[str, ...],
          synthetic_downsampler: str, workers: int):
    """Write synthetic and degraded LR images plus manifest.json."""
    from cyclesr.degrade.corpus import synthesize_corpus

    settings = _load_settings(config, sets)
    try:
        manifest = synthesize_corpus(
            Path(hr_dir), settings.degradation, Path(out), seed,
            synthetic_downsampler=synthetic_downsampler, workers=workers,
        )
    except (ValueError, OSError) as e:
        _fail(e)
    click.echo(f"Corpus written to {out}: {len(manifest.hr_entries)} HR, "
               f"{len(manifest.lr_syn_entries)} synthetic LR, {len(manifest.lr_real_entries)} real LR")


# ---------------------------------------------------------------------------
# train — pretrain + joint training, or a supervised baseline
# ---------------------------------------------------------------------------

@cli.command("train")
@config_option
@set_option
@click.option("--manifest", type=click.Path(exists=True, dir_okay=False, resolve_path=True), default=None,
              help="Training corpus manifest.json")
@click.option("--val-manifest", type=click.Path(exists=True, dir_okay=False, resolve_path=True), default=None,
              help="Held-out corpus manifest.json")
@click.option("--mode", type=click.Choice(_MODES), default=None, help="Training mode (default: from config)")
@click.option("--epochs", type=int, default=None, help="Total epochs; decay starts halfway unless set")
@click.option("--seed", type=int, default=None, help="Training seed")
@click.option("--name", default=None, help="Run name (directory under runs_dir)")
@click.option("--runs-dir", type=click.Path(file_okay=False, resolve_path=True), default=None,
              help="Parent directory of run directories")
@click.option("--device", default=None, help="auto, cpu, cuda or cuda:N")
@click.option("--resume", type=click.Path(exists=True, file_okay=False), default=None,
              help="Checkpoint directory to continue from")
def train(config, sets, manifest, val_manifest, mode, epochs, seed, name, runs_dir, device, resume):
    """Train a model and write checkpoints, log and resolved config."""
    from cyclesr.training.trainer import NonFiniteLossError

    settings = _load_settings(
        config, sets, manifest=manifest, val_manifest=val_manifest, mode=mode,
        epochs=epochs, seed=seed, name=name, runs_dir=runs_dir, device=device,
    )
    svc = _service(settings)
    try:
        final = svc.train(Path(resume) if resume else None)
    except NonFiniteLossError as e:
        click.echo(f"Error: training aborted at step {e.step}: {e}", err=True)
        sys.exit(1)
    except (ValueError, RuntimeError, OSError) as e:
        _fail(e)
    click.echo(f"Run directory: {svc.run_dir}")
    click.echo(f"Final checkpoint: {final.path} (epoch {final.epoch}, step {final.step})")


# ---------------------------------------------------------------------------
# infer — one-stage super-resolution
# ---------------------------------------------------------------------------

@cli.command("infer")
@click.option("--ckpt", required=True, type=click.Path(exists=True, file_okay=False), help="Checkpoint directory")
@click.option("--in", "in_dir", required=True, type=click.Path(exists=True, file_okay=False), help="LR input directory")
@click.option("--out", required=True, type=click.Path(file_okay=False), help="Output directory")
@click.option("--device", default="cpu", show_default=True, help="cpu, cuda or cuda:N")
def infer(ckpt: str, in_dir: str, out: str, device: str):
    """Super-resolve every image in --in with the checkpoint's SR network."""
    from cyclesr.imaging.image import list_images, load_image, save_image
    from cyclesr.training.checkpoint import load_checkpoint
    from cyclesr.training.inference import infer as run_infer
    from cyclesr.training.inference import load_sr_network

    out_dir = Path(out)
    try:
        net = load_sr_network(load_checkpoint(Path(ckpt), device), device)
        inputs = list_images(in_dir)
    except (ValueError, OSError, RuntimeError) as e:
        _fail(e)

    out_dir.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=".infer.", dir=out_dir.parent))
    try:
        for path in inputs:
            save_image(run_infer(load_image(path), net, device), staging / f"{path.stem}.png")
        out_dir.mkdir(parents=True, exist_ok=True)
        for produced in sorted(staging.iterdir()):
            shutil.move(str(produced), out_dir / produced.name)
    except (ValueError, OSError, RuntimeError) as e:
        _fail(e)
    finally:
        shutil.rmtree(staging, ignore_errors=True)
    click.echo(f"Wrote {len(inputs)} images to {out_dir}")


# ---------------------------------------------------------------------------
# eval — shift-tolerant PSNR/SSIM
# ---------------------------------------------------------------------------

@cli.command("eval")
@click.option("--sr-dir", required=True, type=click.Path(exists=True, file_okay=False), help="Super-resolved images")
@click.option("--hr-dir", required=True, type=click.Path(exists=True, file_okay=False), help="Ground-truth HR images")
@click.option("--max-shift", default=40, show_default=True, help="Largest translation searched, in pixels")
@click.option("--border", default=4, show_default=True, help="Border pixels ignored")
@click.option("--center-crop", type=int, default=None, help="Side of a centered comparison crop")
@click.option("--csv", "csv_path", default="eval.csv", show_default=True, type=click.Path(dir_okay=False),
              help="Per-image CSV output")
@click.option("--plot", type=click.Path(dir_okay=False), default=None, help="Optional score histogram image")
@click.option("--workers", default=4, show_default=True, help="Parallel scoring threads")
def eval_cmd(sr_dir, hr_dir, max_shift, border, center_crop, csv_path, plot, workers):
    """Score SR images against HR ground truth."""
    from cyclesr.core.config import EvalProtocol
    from cyclesr.imaging.evaluation import evaluate_directories, plot_scores, write_csv

    try:
        protocol = EvalProtocol(max_shift=max_shift, border=border, center_crop=center_crop)
    except ValidationError as e:
        raise click.UsageError(str(e)) from e
    try:
        results = evaluate_directories(Path(sr_dir), Path(hr_dir), protocol, workers)
        mean_psnr, mean_ssim = write_csv(results, Path(csv_path))
        if plot:
            plot_scores(results, Path(plot))
    except (ValueError, OSError) as e:
        _fail(e)
    click.echo(f"{len(results)} images: mean PSNR {mean_psnr:.4f} dB, mean SSIM {mean_ssim:.4f}")
    click.echo(f"Scores written to {csv_path}")


# ---------------------------------------------------------------------------
# ablate — lambda_mse sweep
# ---------------------------------------------------------------------------

@cli.command("ablate")
@click.option("--lambda-mse", "values", required=True, multiple=True, type=float,
              help="Weight to train with (repeat for each value)")
@config_option
@set_option
@click.option("--manifest", type=click.Path(exists=True, dir_okay=False, resolve_path=True), default=None,
              help="Training corpus manifest.json")
@click.option("--val-manifest", type=click.Path(exists=True, dir_okay=False, resolve_path=True), default=None,
              help="Held-out corpus manifest.json")
@click.option("--epochs", type=int, default=None, help="Total epochs per run; decay starts halfway unless set")
@click.option("--seed", type=int, default=None, help="Seed shared by every run")
@click.option("--out", type=click.Path(file_okay=False, resolve_path=True), default=None,
              help="Report directory (default: the run directory)")
@click.option("--device", default=None, help="auto, cpu, cuda or cuda:N")
def ablate(values, config, sets, manifest, val_manifest, epochs, seed, out, device):
    """Train one cyclesr model per lambda_mse value and tabulate scores."""
    settings = _load_settings(
        config, sets, manifest=manifest, val_manifest=val_manifest,
        epochs=epochs, seed=seed, device=device,
    )
    svc = _service(settings)
    out_dir = Path(out) if out else svc.run_dir
    try:
        rows = svc.ablate(list(values), out_dir)
    except (ValueError, RuntimeError, OSError) as e:
        _fail(e)
    click.echo(f"{'lambda_mse':>12}  {'PSNR':>9}  {'SSIM':>7}  run")
    for row in rows:
        click.echo(f"{row.lambda_mse:>12g}  {row.psnr:>9.4f}  {row.ssim:>7.4f}  {row.run_dir}")
    click.echo(f"Report written to {out_dir / 'ablation.csv'}")
