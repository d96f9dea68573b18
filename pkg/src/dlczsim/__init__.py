"""Simulation of DLCZ-type quantum repeaters with Gaussian (Bogoliubov) memories."""

from .bogoliubov import BogoliubovMap, ReducedMemory, augment_dark_counts, compose, reduce_memory
from .fockstate import Detection, FockDensityMatrix, partial_trace, tensor

__all__ = [
    "BogoliubovMap",
    "Detection",
    "FockDensityMatrix",
    "ReducedMemory",
    "augment_dark_counts",
    "compose",
    "partial_trace",
    "reduce_memory",
    "tensor",
]
__version__ = "0.1.0"
