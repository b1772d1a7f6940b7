"""cyclesr - unsupervised super-resolution through a synthetic-LR bridge."""

__version__ = "0.1.0"
