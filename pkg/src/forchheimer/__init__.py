"""Generalized Forchheimer flows: solver, exponent algebra and a-priori bound audits."""

__version__ = "0.1.0"

from .constitutive import ForchheimerLaw, H, K, fit_k_bounds, solve_s  # noqa: E402
from .exponents import build_schedule, build_table, derive_alpha  # noqa: E402
from .mesh import DiscreteField, Grid, SpaceTimeTrace  # noqa: E402
from .solver import ProblemSetup, SolverConfig, run  # noqa: E402

__all__ = ["ForchheimerLaw", "H", "K", "fit_k_bounds", "solve_s", "build_schedule", "build_table",
           "derive_alpha", "DiscreteField", "Grid", "SpaceTimeTrace", "ProblemSetup",
           "SolverConfig", "run", "__version__"]
