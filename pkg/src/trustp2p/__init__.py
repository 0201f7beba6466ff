"""Trust-aware unstructured P2P file-sharing overlay simulator."""

from .config import RunConfig
from .engine import Simulation, run
from .errors import ConfigError, ParameterError

__all__ = ["RunConfig", "Simulation", "run", "ConfigError", "ParameterError"]
__version__ = "0.1.0"
