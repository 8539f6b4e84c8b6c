"""Simulation of multistage photonic entanglement swapping with witness and tomography analysis."""

from .config import settings

__version__ = settings.VERSION
