"""Porous-media-type diffusion on the half-line with a zero-flux
boundary: maximal monotone graphs, an implicit finite-volume solver,
the mirror-extension route, integral-identity verification, and
reflected interacting-particle approximations."""

from ._backend import BACKEND
from .errors import (ConfigError, ConvergenceError, EvennessError,
                     FieldError, GraphError, GridError, PmError, SchemeFault)
from .fields import DensityField, EtaField, Grid1D
from .graphs import (DegeneracyClass, MonotoneGraph, PhiGraph, Selection,
                     classify, make_graph, make_selection, phi_from_beta,
                     validate_assumptions)
from .harness import (ExperimentConfig, Report, compare_densities, make_u0,
                      route_equivalence, run)
from .mirror import (check_even, extend_beta, extend_initial, extend_phi,
                     restrict_solution)
from .particle import (DensityEstimate, LocalTimeTrace, ParticleEnsemble,
                       ParticleRun, em_step_wholeline, estimate_density,
                       estimate_local_time, fold, point_ensemble,
                       reflected_step, run_particles, sample_initial,
                       skorokhod_check, zero_set_diagnostics)
from .pde import PdeTrajectory, boundary_flux, solve, step_implicit
from .testfn import (TestFunction, boundary_form_residual, build_family,
                     cutoff_ladder, cutoff_transform, even_extension,
                     generalized_residual, make_bump, make_plateau,
                     mollify_even, residual_report, weak_residual)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ConfigError", "ConvergenceError", "EvennessError",
    "FieldError", "GraphError", "GridError", "PmError", "SchemeFault",
    "DensityField", "EtaField", "Grid1D", "DegeneracyClass", "MonotoneGraph",
    "PhiGraph", "Selection", "classify", "make_graph", "make_selection",
    "phi_from_beta", "validate_assumptions", "ExperimentConfig", "Report",
    "compare_densities", "make_u0", "route_equivalence", "run", "check_even",
    "extend_beta", "extend_initial", "extend_phi", "restrict_solution",
    "DensityEstimate", "LocalTimeTrace", "ParticleEnsemble", "ParticleRun",
    "em_step_wholeline", "estimate_density", "estimate_local_time", "fold",
    "point_ensemble", "reflected_step", "run_particles", "sample_initial",
    "skorokhod_check", "zero_set_diagnostics", "PdeTrajectory",
    "boundary_flux", "solve", "step_implicit",
    "TestFunction", "boundary_form_residual", "build_family",
    "cutoff_ladder", "cutoff_transform", "even_extension",
    "generalized_residual", "make_bump", "make_plateau", "mollify_even",
    "residual_report", "weak_residual", "__version__",
]
