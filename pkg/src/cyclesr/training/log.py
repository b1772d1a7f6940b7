"""JSON-lines training log: one record per optimization step."""

from __future__ import annotations

import json
import logging
from pathlib import Path

from cyclesr.losses.composite import LossReport

logger = logging.getLogger(__name__)


class TrainingLog:
    def __init__(self, path: Path):
        self.path = Path(path)

    def append(
        self,
        step: int,
        epoch: int,
        phase: str,
        report: LossReport,
        lr_cyclegan: float | None,
        lr_sr: float | None,
    ) -> dict:
        record = {
            "step": step,
            "epoch": epoch,
            "phase": phase,
            **report.scalars(),
            "lr_cyclegan": lr_cyclegan,
            "lr_sr": lr_sr,
        }
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "a") as f:
            f.write(json.dumps(record) + "\n")
        return record

    def records(self) -> list[dict]:
        if not self.path.exists():
            return []
        with open(self.path) as f:
            return [json.loads(line) for line in f if line.strip()]

    def truncate_after(self, step: int) -> int:
        """Drop records with step > ``step`` (used on resume); returns how many were dropped."""
        records = self.records()
        kept = [r for r in records if r["step"] <= step]
        dropped = len(records) - len(kept)
        if dropped:
            with open(self.path, "w") as f:
                f.writelines(json.dumps(r) + "\n" for r in kept)
            logger.info("Dropped %d log records after step %d", dropped, step)
        return dropped
