import logging

from .experiment_config import BlochGrid, ExperimentConfig
from .lattice import LatticeConfig, Spinor, WalkerState
from .nonlinear import InteractionType, WalkParams, evolve
from .observables import RunRecord
from .solitons import SolitonSpec

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

__version__ = "0.1.0"

__all__ = [
    "BlochGrid",
    "ExperimentConfig",
    "InteractionType",
    "LatticeConfig",
    "RunRecord",
    "SolitonSpec",
    "Spinor",
    "WalkParams",
    "WalkerState",
    "evolve",
]
