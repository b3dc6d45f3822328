"""Simulation and Monte Carlo verification for diagonal Levy-driven OU evolutions
and symmetric alpha-stable stochastic integrals."""
from importlib.metadata import PackageNotFoundError, version as _version

from .measures import StableMeasure, TabulatedMeasure, standardization_constant
from .model import DiagonalModel, Geometric, PowerLaw, Table, stable_model
from .rng import RngStream

try:
    __version__ = _version("artifact")
except PackageNotFoundError:  # pragma: no cover
    __version__ = "0.1.0"

__all__ = ["DiagonalModel", "Geometric", "PowerLaw", "RngStream", "StableMeasure",
           "Table", "TabulatedMeasure", "stable_model", "standardization_constant"]
