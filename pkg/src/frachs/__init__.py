"""Numerical toolkit for the weighted fractional ground-state problem.

Library layout mirrors the computation pipeline: `specfun` evaluates the
sector multiplier of the fractional Laplacian, `efgrid` hosts the log-radial
pseudospectral workspace, `groundstate` produces the positive radial
minimizer, `spectrum` analyzes its linearization per spherical-harmonic
sector, and `perturb` runs the dimension reduction for weighted
perturbations.  `cli` wires everything into reproducible CSV/JSON artifacts.
"""

from .efgrid import (
    EFGrid,
    ProblemParams,
    Profile,
    apply_multiplier,
    default_half_length,
    invert_multiplier,
    kelvin_reflect,
    make_grid,
    weighted_integral,
)
from .groundstate import (
    ConvergenceError,
    GroundState,
    critical_bubble,
    energy,
    fit_decay,
    perturbed_energy,
    solve_ground,
)
from .perturb import (
    PerturbationWeight,
    ReducedCurve,
    ReducedPoint,
    SolutionRecord,
    find_solutions,
    gauge_weight,
    gaussian_bump,
    reduced_curve,
    solve_reduced_point,
)
from .specfun import SymbolQuery, hardy_constant, log_gamma, sector_symbol, symbol_values
from .spectrum import (
    NondegeneracyReport,
    SectorSpectrum,
    StabilityScan,
    nondegeneracy_report,
    sector_eigenvalues_lanczos,
    sector_spectrum,
    stability_scan,
)

__version__ = "0.1.0"

__all__ = [
    "EFGrid",
    "ProblemParams",
    "Profile",
    "apply_multiplier",
    "default_half_length",
    "invert_multiplier",
    "kelvin_reflect",
    "make_grid",
    "weighted_integral",
    "ConvergenceError",
    "GroundState",
    "critical_bubble",
    "energy",
    "fit_decay",
    "perturbed_energy",
    "solve_ground",
    "PerturbationWeight",
    "ReducedCurve",
    "ReducedPoint",
    "SolutionRecord",
    "find_solutions",
    "gauge_weight",
    "gaussian_bump",
    "reduced_curve",
    "solve_reduced_point",
    "SymbolQuery",
    "hardy_constant",
    "log_gamma",
    "sector_symbol",
    "symbol_values",
    "NondegeneracyReport",
    "SectorSpectrum",
    "StabilityScan",
    "nondegeneracy_report",
    "sector_eigenvalues_lanczos",
    "sector_spectrum",
    "stability_scan",
    "__version__",
]
