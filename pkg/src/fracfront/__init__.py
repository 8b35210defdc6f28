"""Fractional moving-boundary diffusion: special functions, L1 solvers and theorem checks."""

__version__ = "0.1.0"

from fracfront.caputo import FractionalOrder, TimeMesh
from fracfront.domain import BoundaryCurve, MovingRegion, ProblemData
from fracfront.fde_solver import SpaceTimeField, solve_moving_boundary
from fracfront.stefan import StefanData, solve_stefan

__all__ = [
    "BoundaryCurve",
    "FractionalOrder",
    "MovingRegion",
    "ProblemData",
    "SpaceTimeField",
    "StefanData",
    "TimeMesh",
    "__version__",
    "solve_moving_boundary",
    "solve_stefan",
]
