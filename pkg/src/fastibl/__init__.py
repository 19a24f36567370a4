"""Instance-based learning agents with interchangeable memory engines."""

from .agent import ENGINES, Agent
from .core import AgentParams, OptionKey, SimilarityGroup, StateKey, state_from_features, state_from_grid
from .kernels import BACKEND

__all__ = [
    "Agent",
    "AgentParams",
    "BACKEND",
    "ENGINES",
    "OptionKey",
    "SimilarityGroup",
    "StateKey",
    "state_from_features",
    "state_from_grid",
]
__version__ = "0.1.0"
