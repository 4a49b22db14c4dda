"""Pipeline agents for safe policy improvement."""

from .estimator_agent import EstimatorAgent
from .shield_agent import ShieldAgent
from .spibb_agent import SpibbAgent
from .duipi_agent import DuipiAgent

__all__ = [
    "EstimatorAgent",
    "ShieldAgent",
    "SpibbAgent",
    "DuipiAgent"
]
