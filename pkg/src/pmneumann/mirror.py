"""Even-extension dictionary between the half-line Neumann problem and
the whole-line Cauchy problem.

Initial data extend by u0 -> 0.5*u0(|x|), the nonlinearity by
beta -> 0.5*beta(2u) (and Phi -> Phi(2u)); whole-line solutions come back
as v = 2*ubar restricted to x >= 0.  All maps are index arithmetic on
matched grids, so the round trip is exact.
"""

import numpy as np

from .errors import EvennessError, FieldError, GridError
from .fields import DensityField, Grid1D


def extend_initial(u0):
    """ubar0(x) = 0.5*u0(|x|) on the mirror grid; unit mass required."""
    if not u0.grid.is_half:
        raise GridError("extend_initial expects a half-line field")
    if abs(u0.mass - 1.0) > 1e-8:
        raise FieldError(f"initial density must have unit mass, got {u0.mass!r}")
    grid = Grid1D.symmetric_whole_line(u0.grid.x_max, u0.grid.dx)
    vals = 0.5 * np.concatenate([u0.values[::-1], u0.values])
    return DensityField(grid, vals, t=u0.t)


def extend_beta(beta):
    """betabar(u) = 0.5*beta(2u)."""
    return beta.scaled(2.0, 0.5, name=f"mirror({beta.name})")


def extend_phi(phi):
    """phibar(u) = Phi(2u); the value interval at 0 is unchanged."""
    return phi.rescaled(2.0)


def check_even(f):
    """One-sided mirror-pair L1 asymmetry: sum over x>0 of
    |f(x) - f(-x)|*dx.  Zero iff the field is exactly even."""
    if not f.grid.is_whole:
        raise GridError("check_even expects a symmetric whole-line field")
    v = f.values
    half = f.grid.n // 2
    return float(np.sum(np.abs(v[half:] - v[half - 1::-1])) * f.grid.dx)


def restrict_solution(ubar, tol=1e-8):
    """v = 2*ubar restricted to x >= 0; refuses fields that are not even."""
    asym = check_even(ubar)
    if asym > tol:
        raise EvennessError(
            f"whole-line field has asymmetry {asym:.3e} > {tol:g}")
    half = ubar.grid.half_counterpart()
    vals = 2.0 * ubar.values[ubar.grid.n // 2:]
    return DensityField(half, vals, t=ubar.t)
