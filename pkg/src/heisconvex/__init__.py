"""Sampled verification of convexity results on the Heisenberg group."""

from .heis_core import Point
from .models import RunConfig, RunResult
from .service import execute

__all__ = ["Point", "RunConfig", "RunResult", "execute"]
__version__ = "0.1.0"
