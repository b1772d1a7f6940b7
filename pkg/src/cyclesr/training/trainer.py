"""Pretraining, joint two-stage optimization and supervised baselines."""

from __future__ import annotations

import json
import logging
import math
from pathlib import Path

import torch
from torch import nn
from tqdm import tqdm

from cyclesr.core.config import BASELINE_MODES, JOINT_MODES, UPSAMPLED_MODES, Settings
from cyclesr.data.loader import PatchDataset, batch_iterator
from cyclesr.data.manifest import CorpusDataset
from cyclesr.data.patches import TrainBatch
from cyclesr.imaging.image import from_tensor, normalize_to_reference, save_image, to_tensor
from cyclesr.losses.composite import LossReport, StageLoss, TranslatorNets, stage1_loss, stage2_loss
from cyclesr.losses.perceptual import FeatureExtractor, build_extractor
from cyclesr.nets.builders import build_patch_discriminator, build_sr_network, build_translator_generator
from cyclesr.nets.layers import BicubicUpsample
from cyclesr.training.checkpoint import Checkpoint, save_checkpoint
from cyclesr.training.inference import (
    ValidationPair,
    bicubic_baseline,
    infer,
    mean_scores,
    score_predictions,
    sr_model,
)
from cyclesr.training.log import TrainingLog
from cyclesr.training.schedule import clip_gradients, group_lrs, set_epoch_lr

logger = logging.getLogger(__name__)

LOG_NAME = "train_log.jsonl"

# seed offsets so each network gets its own initialization stream
_NET_SEEDS = {"g_s2r": 0, "g_r2s": 1, "d_s": 2, "d_r": 3, "g_l2h": 4, "d_h": 5, "g_u2h": 6, "g_h2u": 7, "d_u": 8}


def _network_names(mode: str) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Translator generators and discriminators built for ``mode``, besides G_l2h and D_h."""
    if mode in JOINT_MODES:
        return ("g_s2r", "g_r2s"), ("d_s", "d_r")
    if mode in UPSAMPLED_MODES:
        return ("g_u2h", "g_h2u"), ("d_u", "d_h")
    return (), ()


class NonFiniteLossError(RuntimeError):
    def __init__(self, step: int, report: LossReport, dump_path: Path | None = None):
        self.step = step
        self.report = report
        self.dump_path = dump_path
        bad = sorted(k for k, v in report.scalars().items() if not math.isfinite(v))
        super().__init__(f"Non-finite loss at step {step}: {bad} (dump: {dump_path})")


class Trainer:
    """Owns the networks, optimizers and training log of one run.

    Epoch counters count completed epochs; pretraining epochs count toward
    ``epochs_total``, so the checkpoint after pretraining is ``ckpt_<pretrain_epochs>``.
    """

    def __init__(
        self,
        settings: Settings,
        run_dir: Path,
        device: torch.device | str = "cpu",
        extractor: FeatureExtractor | None = None,
    ):
        self.settings = settings
        self.config = settings.train
        self.mode = self.config.mode
        self.run_dir = Path(run_dir)
        self.device = torch.device(device)
        self.log = TrainingLog(self.run_dir / LOG_NAME)
        self.epoch = 0
        self.step = 0

        spec, seed = settings.model, self.config.seed
        self.nets: dict[str, nn.Module] = {}
        generators, discriminators = _network_names(self.mode)
        for name in generators:
            self.nets[name] = build_translator_generator(spec, seed + _NET_SEEDS[name])
        for name in discriminators:
            self.nets[name] = build_patch_discriminator(spec, seed + _NET_SEEDS[name])
        if self.mode not in UPSAMPLED_MODES:
            self.nets["g_l2h"] = build_sr_network(spec, seed + _NET_SEEDS["g_l2h"])
        self.upsample = BicubicUpsample(self.config.scale)
        self.extractor = None
        if self.mode == "cyclesrgan":
            self.nets["d_h"] = build_patch_discriminator(spec, seed + _NET_SEEDS["d_h"])
            self.extractor = extractor or build_extractor(settings.perceptual)
            self.extractor.to(self.device)
        for net in self.nets.values():
            net.to(self.device).train()

        self.optimizers = self._build_optimizers()

    # ------------------------------------------------------------------
    # setup
    # ------------------------------------------------------------------

    def _group(self, names: list[str], name: str, base_lr: float) -> dict:
        params = [p for n in names if n in self.nets for p in self.nets[n].parameters()]
        return {"params": params, "name": name, "base_lr": base_lr, "lr": base_lr}

    def _build_optimizers(self) -> dict[str, torch.optim.Optimizer]:
        c = self.config
        betas = (c.adam_beta1, c.adam_beta2)
        if self.mode in BASELINE_MODES:
            return {"g": torch.optim.Adam([self._group(["g_l2h"], "sr", c.lr_sr)], betas=betas)}
        if self.mode in UPSAMPLED_MODES:
            return {
                "g": torch.optim.Adam([self._group(["g_u2h", "g_h2u"], "cyclegan", c.lr_cyclegan)], betas=betas),
                "d": torch.optim.Adam([self._group(["d_u", "d_h"], "cyclegan", c.lr_cyclegan)], betas=betas),
            }
        g_groups = [
            self._group(["g_s2r", "g_r2s"], "cyclegan", c.lr_cyclegan),
            self._group(["g_l2h"], "sr", c.lr_sr),
        ]
        d_groups = [self._group(["d_s", "d_r"], "cyclegan", c.lr_cyclegan)]
        if "d_h" in self.nets:
            d_groups.append(self._group(["d_h"], "sr", c.lr_sr))
        return {
            "g": torch.optim.Adam(g_groups, betas=betas),
            "d": torch.optim.Adam(d_groups, betas=betas),
        }

    @property
    def translator(self) -> TranslatorNets:
        return TranslatorNets(
            g_s2r=self.nets["g_s2r"], g_r2s=self.nets["g_r2s"], d_s=self.nets["d_s"], d_r=self.nets["d_r"]
        )

    # ------------------------------------------------------------------
    # single steps
    # ------------------------------------------------------------------

    def _update(self, key: str, objective: torch.Tensor) -> None:
        opt = self.optimizers[key]
        opt.zero_grad(set_to_none=True)
        objective.backward()
        for group in opt.param_groups:
            clip_gradients(group["params"], self.config.grad_clip_norm)
        opt.step()

    def _finish_step(self, phase: str, stages: list[StageLoss | None]) -> LossReport:
        report = LossReport.from_stages(*stages)
        self.step += 1
        if not report.is_finite():
            self._abort(report)
        g = sum(s.g for s in stages if s is not None)
        self._update("g", g)
        d_terms = [s.d for s in stages if s is not None and s.d is not None]
        if d_terms and "d" in self.optimizers:
            self._update("d", sum(d_terms))
        lrs = group_lrs(self.optimizers["g"])
        self.log.append(self.step, self.epoch + 1, phase, report, lrs.get("cyclegan"), lrs.get("sr"))
        logger.debug("step %d %s total_g=%.5f", self.step, phase, report.total_g)
        return report

    def _abort(self, report: LossReport) -> None:
        dump = self.run_dir / f"nonfinite_step_{self.step}.json"
        dump.parent.mkdir(parents=True, exist_ok=True)
        with open(dump, "w") as f:
            json.dump({"step": self.step, "epoch": self.epoch + 1, "mode": self.mode, **report.scalars()}, f, indent=2)
        logger.error("Non-finite loss at step %d; report written to %s", self.step, dump)
        raise NonFiniteLossError(self.step, report, dump)

    def pretrain_step(self, batch: TrainBatch) -> LossReport:
        """CycleGAN on unpaired LR and G_l2h on (lr_syn, hr), as independent graphs."""
        w = self.config.weights
        s1 = stage1_loss(self.translator, batch.lr_syn, batch.lr_real, w)
        s2 = stage2_loss(self.nets["g_l2h"](batch.lr_syn), batch.hr, None, w, None)
        return self._finish_step("pretrain", [s1, s2])

    def joint_step(self, batch: TrainBatch) -> LossReport:
        """G_s2r(lr_syn) feeds G_l2h, so stage-2 gradients reach G_s2r (detached in cycle_plus_sr)."""
        w = self.config.weights
        s1 = stage1_loss(self.translator, batch.lr_syn, batch.lr_real, w)
        sr_in = s1.fake_real.detach() if self.mode == "cycle_plus_sr" else s1.fake_real
        s2 = stage2_loss(self.nets["g_l2h"](sr_in), batch.hr, self.nets.get("d_h"), w, self.extractor)
        return self._finish_step("joint", [s1, s2])

    def baseline_step(self, batch: TrainBatch) -> LossReport:
        lr = batch.lr_paired if self.mode == "sr_paired" else batch.lr_syn
        if lr is None:
            raise ValueError("sr_paired needs batches with paired real LR patches")
        s2 = stage2_loss(self.nets["g_l2h"](lr), batch.hr, None, self.config.weights, None)
        return self._finish_step("baseline", [s2])

    def cyclegan_step(self, batch: TrainBatch) -> LossReport:
        """CycleGAN between bicubic-upsampled real LR and HR; G_u2h is the SR model."""
        nets = TranslatorNets(
            g_s2r=self.nets["g_h2u"], g_r2s=self.nets["g_u2h"], d_s=self.nets["d_h"], d_r=self.nets["d_u"]
        )
        s1 = stage1_loss(nets, batch.hr, self.upsample(batch.lr_real), self.config.weights)
        return self._finish_step("cyclegan", [s1])

    # ------------------------------------------------------------------
    # epochs
    # ------------------------------------------------------------------

    def _patch_dataset(self, corpus: CorpusDataset) -> PatchDataset:
        return PatchDataset(corpus, self.config, self.config.seed, paired_real=self.mode == "sr_paired")

    def _run_epoch(self, patches: PatchDataset, step_fn, phase: str) -> list[LossReport]:
        c = self.config
        for opt in self.optimizers.values():
            set_epoch_lr(opt, self.epoch, c.decay_start_epoch, c.epochs_total)
        batches = batch_iterator(patches, c, c.seed, self.epoch)
        desc = f"{phase} {self.epoch + 1}/{c.epochs_total}"
        reports = [step_fn(b.to(self.device)) for b in tqdm(batches, desc=desc, leave=False, disable=None)]
        self.epoch += 1
        if reports:
            logger.info("Epoch %d (%s): %d steps, last total_g=%.5f", self.epoch, phase, len(reports), reports[-1].total_g)
        return reports

    def _end_of_epoch(self, corpus: CorpusDataset, validation: list[ValidationPair] | None) -> Checkpoint:
        if self.epoch in self.config.sample_epochs and "g_s2r" in self.nets:
            self.save_samples(corpus)
        if validation and self.config.validate_every and self.epoch % self.config.validate_every == 0:
            psnr, ssim = self.evaluate(validation)
            logger.info("Epoch %d validation: PSNR %.3f dB, SSIM %.4f", self.epoch, psnr, ssim)
        return self.save()

    def pretrain(self, corpus: CorpusDataset, validation: list[ValidationPair] | None = None) -> Checkpoint:
        """Train the CycleGAN and G_l2h separately for ``pretrain_epochs``."""
        if self.mode not in JOINT_MODES:
            raise ValueError(f"pretraining applies to {JOINT_MODES}, not '{self.mode}'")
        patches = self._patch_dataset(corpus)
        ckpt = None
        while self.epoch < self.config.pretrain_epochs:
            self._run_epoch(patches, self.pretrain_step, "pretrain")
            ckpt = self._end_of_epoch(corpus, validation)
        return ckpt or self.save()

    def train_joint(self, corpus: CorpusDataset, validation: list[ValidationPair] | None = None) -> Checkpoint:
        """Joint epochs from the current epoch up to ``epochs_total``."""
        if self.mode not in JOINT_MODES:
            raise ValueError(f"joint training applies to {JOINT_MODES}, not '{self.mode}'")
        patches = self._patch_dataset(corpus)
        ckpt = None
        while self.epoch < self.config.epochs_total:
            self._run_epoch(patches, self.joint_step, "joint")
            ckpt = self._end_of_epoch(corpus, validation)
        return ckpt or self.save()

    def train_baseline(self, corpus: CorpusDataset, validation: list[ValidationPair] | None = None) -> Checkpoint:
        """Supervised G_l2h training on (lr_syn, hr) or (lr_real, hr) pairs."""
        if self.mode not in BASELINE_MODES:
            raise ValueError(f"baseline training applies to {BASELINE_MODES}, not '{self.mode}'")
        if self.mode == "sr_paired" and not corpus.has_paired_real:
            raise ValueError("sr_paired needs a manifest whose HR-domain entries have real LR images")
        patches = self._patch_dataset(corpus)
        ckpt = None
        while self.epoch < self.config.epochs_total:
            self._run_epoch(patches, self.baseline_step, "baseline")
            ckpt = self._end_of_epoch(corpus, validation)
        return ckpt or self.save()

    def train_cyclegan(self, corpus: CorpusDataset, validation: list[ValidationPair] | None = None) -> Checkpoint:
        if self.mode not in UPSAMPLED_MODES:
            raise ValueError(f"upsampled CycleGAN training applies to {UPSAMPLED_MODES}, not '{self.mode}'")
        patches = self._patch_dataset(corpus)
        ckpt = None
        while self.epoch < self.config.epochs_total:
            self._run_epoch(patches, self.cyclegan_step, "cyclegan")
            ckpt = self._end_of_epoch(corpus, validation)
        return ckpt or self.save()

    def fit(self, corpus: CorpusDataset, validation: list[ValidationPair] | None = None) -> Checkpoint:
        """Full schedule for the configured mode, continuing from the current epoch."""
        if self.mode in BASELINE_MODES:
            return self.train_baseline(corpus, validation)
        if self.mode in UPSAMPLED_MODES:
            return self.train_cyclegan(corpus, validation)
        if self.epoch < self.config.pretrain_epochs:
            self.pretrain(corpus, validation)
        return self.train_joint(corpus, validation)

    # ------------------------------------------------------------------
    # persistence
    # ------------------------------------------------------------------

    def save(self) -> Checkpoint:
        return save_checkpoint(
            self.run_dir,
            self.epoch,
            self.step,
            self.mode,
            self.nets,
            self.optimizers,
            self.settings.model_dump(mode="json"),
        )

    def restore(self, checkpoint: Checkpoint) -> None:
        """Load networks, optimizer state and RNG state; drop later log records."""
        if checkpoint.state is None:
            raise ValueError(f"Checkpoint {checkpoint.path} was not loaded with its weights")
        if checkpoint.mode != self.mode:
            raise ValueError(f"Checkpoint mode '{checkpoint.mode}' does not match run mode '{self.mode}'")
        missing = sorted(set(self.nets) - set(checkpoint.state["nets"]))
        if missing:
            raise ValueError(f"Checkpoint {checkpoint.path} lacks networks {missing}")
        for name, net in self.nets.items():
            net.load_state_dict(checkpoint.state["nets"][name])
        for name, opt in self.optimizers.items():
            opt.load_state_dict(checkpoint.state["optimizers"][name])
        torch.set_rng_state(checkpoint.state["torch_rng"].cpu())
        self.epoch, self.step = checkpoint.epoch, checkpoint.step
        self.log.truncate_after(self.step)
        logger.info("Resumed from %s at epoch %d, step %d", checkpoint.path, self.epoch, self.step)

    # ------------------------------------------------------------------
    # evaluation and samples
    # ------------------------------------------------------------------

    def evaluate(self, pairs: list[ValidationPair]) -> tuple[float, float]:
        """Mean shift-tolerant PSNR/SSIM of one-stage inference on (lr, hr) pairs."""
        net = sr_model(self.nets, self.config.scale)
        results = score_predictions(pairs, lambda lr: infer(lr, net, self.device), self.settings.eval)
        return mean_scores(results)

    def bicubic_baseline(self, pairs: list[ValidationPair]) -> tuple[float, float]:
        return bicubic_baseline(pairs, self.config.scale, self.settings.eval)

    def save_samples(self, corpus: CorpusDataset) -> list[Path]:
        """Approximated real LR of the first training images, raw and normalized to the lr_syn input."""
        out_dir = self.run_dir / "samples" / f"epoch_{self.epoch:03d}"
        g_s2r = self.nets["g_s2r"]
        written = []
        for image_id in sorted(corpus.hr_ids)[: self.config.sample_count]:
            lr_syn = corpus.lr_syn(image_id)
            with torch.no_grad():
                fake = from_tensor(g_s2r(to_tensor(lr_syn).to(self.device)))
            save_image(fake, out_dir / f"{image_id}_raw.png")
            written.append(out_dir / f"{image_id}_raw.png")
            try:
                save_image(normalize_to_reference(fake, lr_syn), out_dir / f"{image_id}_norm.png")
                written.append(out_dir / f"{image_id}_norm.png")
            except ValueError as e:
                logger.warning("Skipping normalized sample for %s: %s", image_id, e)
        logger.info("Saved %d samples to %s", len(written), out_dir)
        return written
