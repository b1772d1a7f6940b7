"""Degradation model and unpaired corpus synthesis."""

from cyclesr.degrade.corpus import CorpusManifest, ManifestEntry, synthesize_corpus
from cyclesr.degrade.kernels import make_kernel
from cyclesr.degrade.pipeline import apply_blur, apply_noise, apply_shift, degrade, degrade_with_shift, realize_spec
from cyclesr.degrade.procedural import generate_procedural_hr

__all__ = [
    "CorpusManifest",
    "ManifestEntry",
    "apply_blur",
    "apply_noise",
    "apply_shift",
    "degrade",
    "degrade_with_shift",
    "generate_procedural_hr",
    "make_kernel",
    "realize_spec",
    "synthesize_corpus",
]
