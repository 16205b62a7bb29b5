"""Simulation toolkit for multi-output quantum pulse gates."""

__version__ = "0.1.0"

from . import kernels
from .alphabets import AlphabetKind, AlphabetSpec, fundamental_basis, mub_bases
from .mqpg import DeviceSpec, Layout, PMShape
from .experiment import Experiment, ExperimentConfig

BACKEND = kernels.BACKEND

__all__ = [
    "AlphabetKind",
    "AlphabetSpec",
    "BACKEND",
    "DeviceSpec",
    "Experiment",
    "ExperimentConfig",
    "Layout",
    "PMShape",
    "fundamental_basis",
    "mub_bases",
]
