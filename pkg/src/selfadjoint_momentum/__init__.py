"""Self-adjoint momentum operators on the half-line, the interval and the circle."""

from .errors import (
    BracketError,
    DomainError,
    InputError,
    InvariantError,
    MomentumError,
    NoBoundStateError,
    RepresentationError,
    SectorError,
    SingularInputError,
    SolverError,
    TruncationError,
)
from .halfline import DIRICHLET, MINUS, PLUS, ExtensionLambda, PhysicalParams, TwoComponentWave
from .interval import BoundaryKind, GaugeField, IntervalParams, MeasurementDistribution
from .circle import CircleParams
from .lattice import LatticeConfig
from .numerics import Grid, HermitianTridiagonal

__all__ = [
    "BoundaryKind", "BracketError", "CircleParams", "DIRICHLET", "DomainError", "ExtensionLambda",
    "GaugeField", "Grid", "HermitianTridiagonal", "InputError", "IntervalParams", "InvariantError",
    "LatticeConfig", "MINUS", "MeasurementDistribution", "MomentumError", "NoBoundStateError",
    "PLUS", "PhysicalParams", "RepresentationError", "SectorError", "SingularInputError",
    "SolverError", "TruncationError", "TwoComponentWave",
]
