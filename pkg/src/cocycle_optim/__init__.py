"""Lyapunov-optimizing analysis of 2x2 one-step matrix cocycles."""

from . import barabanov, corpus, entropy_pos, errors, geom2, mather, multicone, spectral, splitting
from .geom2 import Cocycle, mat2

__all__ = [
    "Cocycle",
    "mat2",
    "barabanov",
    "corpus",
    "entropy_pos",
    "errors",
    "geom2",
    "mather",
    "multicone",
    "spectral",
    "splitting",
]
