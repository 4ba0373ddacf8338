"""Coupled-oscillator synchronization library (C++ core)."""

from ._core import *  # noqa: F401,F403
from ._core import Error, InvalidArgument, DisconnectedNetwork, Divergence, ConfigError  # noqa: F401

__version__ = "0.1.0"
