"""Interacting-particle approximations of the reflected diffusion.

Two schemes target the same half-line marginals:

* ``wholeline_fold``: simulate Y on the symmetric whole line with the
  mirrored coefficient, dY = chi_bar(u_bar(t,Y)) dW, and observe X=|Y|.
* ``direct_reflect``: simulate X >= 0 with the half-line coefficient by
  mirror reflection, X <- |X + chi(v(t,X)) sqrt(dt) xi|, recording the
  pathwise pushing dK = |p| - p.

The McKean-Vlasov coupling is discretized the standard way: the density
entering the coefficient is re-estimated from the ensemble itself every
``k_sync`` steps.  All randomness is drawn from counter-based Philox
streams keyed by (seed, lane, step), so runs are reproducible and
independent of execution order:

    lane 0   initial positions (inverse CDF uniforms)
    lane 1   mirror sign flips of the initial whole-line sample
    lane 2   the Gaussian increments of step k use spawn key (2, k)
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConfigError, GridError, SchemeFault
from .fields import DensityField, Grid1D

WHOLELINE = "wholeline_fold"
DIRECT = "direct_reflect"
FOLDED = "folded"

_LANE_INIT = 0
_LANE_SIGN = 1
_LANE_STEP = 2


def _stream(seed, lane, step=0):
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(lane, step))
    return np.random.Generator(np.random.Philox(ss))


@dataclass
class ParticleEnsemble:
    positions: np.ndarray
    scheme: str
    t: float
    grid: Grid1D
    seed: int
    step: int = 0
    eps: float = 0.0
    occupation: np.ndarray = None
    big_k: np.ndarray = None
    xdk: np.ndarray = None
    exposure: int = 0
    zero_pairs: int = 0
    zero_occupation: float = 0.0
    sup_x: float = 0.0
    monotone_ok: bool = True
    nonneg_ok: bool = True

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64)
        if self.positions.size < 1:
            raise ConfigError("ensemble needs at least one particle")
        if self.scheme not in (WHOLELINE, DIRECT, FOLDED):
            raise SchemeFault(f"unknown particle scheme {self.scheme!r}")
        n = self.positions.size
        if self.occupation is None:
            self.occupation = np.zeros(n)
        if self.scheme == DIRECT:
            if self.big_k is None:
                self.big_k = np.zeros(n)
            if self.xdk is None:
                self.xdk = np.zeros(n)
            if np.min(self.positions) < 0.0:
                raise SchemeFault("direct_reflect positions must be >= 0")

    @property
    def n(self):
        return self.positions.size


def sample_initial(u0, n, seed, scheme):
    """Inverse-CDF sample of the gridded u0 (CDF linear within cells);
    the whole-line scheme flips each sign with probability one half."""
    if n < 1:
        raise ConfigError("particle count must be >= 1")
    if scheme not in (WHOLELINE, DIRECT):
        raise SchemeFault(f"cannot sample scheme {scheme!r} directly")
    if not u0.grid.is_half:
        raise GridError("initial density must live on the half-line grid")
    if abs(u0.mass - 1.0) > 1e-8:
        raise ConfigError(f"initial density mass {u0.mass:.3e} is not 1")
    cdf = np.concatenate(([0.0], np.cumsum(u0.values) * u0.grid.dx))
    cdf /= cdf[-1]
    uni = _stream(seed, _LANE_INIT).random(n)
    pos = np.interp(uni, cdf, u0.grid.edges)
    if scheme == WHOLELINE:
        flip = _stream(seed, _LANE_SIGN).random(n) < 0.5
        pos = np.where(flip, -pos, pos)
        grid = Grid1D.symmetric_whole_line(u0.grid.x_max, u0.grid.dx)
    else:
        grid = u0.grid
    return ParticleEnsemble(pos, scheme, float(u0.t), grid, int(seed))


def point_ensemble(x0, n, seed, scheme, grid, eps=0.0):
    """All particles at x0; the driving-noise anchor for local-time
    oracles (a Brownian ensemble started at the boundary)."""
    if n < 1:
        raise ConfigError("particle count must be >= 1")
    ens = ParticleEnsemble(np.full(n, float(x0)), scheme, 0.0, grid,
                           int(seed), eps=float(eps))
    return ens


@dataclass
class DensityEstimate:
    method: str
    symmetrized: bool
    bandwidth: float
    field: DensityField
    n: int


def estimate_density(ens, method="histogram", symmetrize=False,
                     bandwidth=None):
    """Empirical density on the ensemble's grid.

    histogram: cell counts / (N dx), out-of-range positions clipped to
    the edge cells so the mass is exact.  gaussian_kde: Gaussian kernel
    at the cell centers; on half-line grids the kernel is reflected at
    0 so boundary mass is not lost.  symmetrize (whole-line ensembles
    only) averages mirror cells, which is exactly even in IEEE
    arithmetic.
    """
    grid = ens.grid
    pos = ens.positions
    if method == "histogram":
        counts = kernels.histogram_counts(pos, grid.x_lo, grid.dx, grid.n)
        vals = counts.astype(np.float64) / (ens.n * grid.dx)
        bandwidth = 0.0
    elif method == "gaussian_kde":
        if bandwidth is None or bandwidth <= 0.0:
            raise ConfigError("gaussian_kde needs a positive bandwidth")
        x = grid.centers
        vals = np.zeros(grid.n)
        norm = 1.0 / (math.sqrt(2.0 * math.pi) * bandwidth * ens.n)
        for lo in range(0, ens.n, 8192):
            p = pos[lo:lo + 8192, None]
            z = (x[None, :] - p) / bandwidth
            acc = np.exp(-0.5 * z * z)
            if grid.is_half:
                z2 = (x[None, :] + p) / bandwidth
                acc += np.exp(-0.5 * z2 * z2)
            vals += norm * acc.sum(axis=0)
    else:
        raise ConfigError(f"unknown density estimator {method!r}")
    if symmetrize:
        if not grid.is_whole:
            raise SchemeFault("symmetrize applies to whole-line ensembles")
        vals = 0.5 * (vals + vals[::-1])
    total = float(np.sum(vals) * grid.dx)
    if total > 0.0:
        vals = vals / total
    fld = DensityField(grid, vals, t=ens.t)
    return DensityEstimate(method, bool(symmetrize),
                           float(bandwidth or 0.0), fld, ens.n)


def _coefficients(chi_sel, dens):
    vals = dens.field.values
    chi_cells = np.asarray(chi_sel(vals), dtype=np.float64)
    chi_zero = float(chi_sel(0.0))
    zero_dens = vals == 0.0
    return chi_cells, chi_zero, zero_dens


def _zero_bookkeeping(ens, chi_cells, chi_zero, dt):
    # occupation of the exact-zero set, before the step moves particles
    mask = ens.positions == 0.0
    hits = int(np.count_nonzero(mask))
    if hits:
        ens.zero_pairs += hits
        chi, _, _ = kernels.numpy_impl.chi_at(
            ens.positions[mask], chi_cells, chi_zero,
            ens.grid.x_lo, ens.grid.dx)
        ens.zero_occupation += float(np.sum(chi * chi)) * dt / ens.n


def em_step_wholeline(ens, chi_sel, dens, dt, rng=None, xi=None):
    """One Euler step of the whole-line system, coefficient read from
    dens by cell lookup.  Mutates and returns ens."""
    if ens.scheme != WHOLELINE:
        raise SchemeFault("em_step_wholeline needs a wholeline_fold ensemble")
    if dens.field.grid != ens.grid:
        raise GridError("density estimate grid does not match the ensemble")
    chi_cells, chi_zero, zero_dens = _coefficients(chi_sel, dens)
    if xi is None:
        gen = rng if rng is not None else _stream(ens.seed, _LANE_STEP, ens.step)
        xi = gen.standard_normal(ens.n)
    _zero_bookkeeping(ens, chi_cells, chi_zero, dt)
    new_pos, exposed = kernels.em_update(
        ens.positions, xi, chi_cells, chi_zero, zero_dens,
        ens.grid.x_lo, ens.grid.dx, dt, math.sqrt(dt),
        ens.occupation, ens.eps)
    ens.positions = new_pos
    ens.exposure += exposed
    ens.t += dt
    ens.step += 1
    return ens


def reflected_step(ens, chi_sel, dens, dt, rng=None, xi=None):
    """One mirror-reflection step of the nonnegative system; accumulates
    the pushing K and the complementarity integrand.  Mutates and
    returns ens."""
    if ens.scheme != DIRECT:
        raise SchemeFault("reflected_step needs a direct_reflect ensemble")
    if dens.field.grid != ens.grid:
        raise GridError("density estimate grid does not match the ensemble")
    chi_cells, chi_zero, zero_dens = _coefficients(chi_sel, dens)
    if xi is None:
        gen = rng if rng is not None else _stream(ens.seed, _LANE_STEP, ens.step)
        xi = gen.standard_normal(ens.n)
    _zero_bookkeeping(ens, chi_cells, chi_zero, dt)
    k_before = ens.big_k.copy()
    new_pos, exposed = kernels.reflect_update(
        ens.positions, xi, chi_cells, chi_zero, zero_dens,
        ens.grid.x_lo, ens.grid.dx, dt, math.sqrt(dt),
        ens.big_k, ens.xdk, ens.occupation, ens.eps)
    ens.monotone_ok = ens.monotone_ok and bool(np.all(ens.big_k >= k_before))
    ens.nonneg_ok = ens.nonneg_ok and bool(np.min(new_pos) >= 0.0)
    ens.sup_x = max(ens.sup_x, float(np.max(new_pos)))
    ens.positions = new_pos
    ens.exposure += exposed
    ens.t += dt
    ens.step += 1
    return ens


def fold(ens):
    """X = |Y|: a new half-line ensemble on the mirrored paths.  The raw
    occupation integral is carried over, so the one-sided local-time
    estimate of the fold reads the same paths as the two-sided estimate
    of the source.  Idempotent."""
    if ens.scheme == DIRECT:
        raise SchemeFault("fold applies to whole-line (or folded) ensembles")
    grid = ens.grid.half_counterpart() if ens.grid.is_whole else ens.grid
    out = ParticleEnsemble(
        np.abs(ens.positions), FOLDED, ens.t, grid, ens.seed,
        step=ens.step, eps=ens.eps, occupation=ens.occupation.copy(),
        exposure=ens.exposure, zero_pairs=ens.zero_pairs,
        zero_occupation=ens.zero_occupation)
    return out


@dataclass
class LocalTimeTrace:
    eps: float
    times: list
    values: list
    convention: str

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.size and (np.min(v) < 0.0 or np.any(np.diff(v) < 0.0)):
            raise SchemeFault("local-time trace must be non-negative "
                              "and non-decreasing")

    @property
    def final(self):
        return float(self.values[-1])

    def to_rows(self):
        return list(zip(self.times, self.values))


def _lt_convention(scheme):
    # |Y| spends two-sided time near 0; X-side estimators are one-sided
    return "two_sided" if scheme == WHOLELINE else "one_sided"


def estimate_local_time(source, eps=None, dt=None, chi_scale=1.0):
    """Occupation-based local-time estimate.

    The whole-line ensemble uses L = raw/(2 eps) (two-sided window of
    |Y|); folded and direct ensembles use L = raw/eps (one-sided window
    of X >= 0).  Accepts a ParticleRun (full trace) or an ensemble
    (single point at the current time).
    """
    times, raws, scheme, run_dt = _occupation_series(source)
    eps = float(eps if eps is not None else source.eps)
    if eps <= 0.0:
        raise ConfigError("local-time estimation needs eps > 0")
    dt = dt if dt is not None else run_dt
    if dt is not None and eps < chi_scale * math.sqrt(dt):
        warnings.warn("local-time window eps=%g below the step scale %g; "
                      "the estimator undersamples" %
                      (eps, chi_scale * math.sqrt(dt)))
    conv = _lt_convention(scheme)
    factor = 1.0 / (2.0 * eps) if conv == "two_sided" else 1.0 / eps
    return LocalTimeTrace(eps, times, [r * factor for r in raws], conv)


def _occupation_series(source):
    if isinstance(source, ParticleEnsemble):
        return ([source.t], [float(np.mean(source.occupation))],
                source.scheme, None)
    return (list(source.localtime_times), list(source.localtime_raw),
            source.scheme, source.dt)


def skorokhod_check(source):
    """Discrete Skorokhod-condition diagnostics of the direct scheme.

    complementarity = mean_i sum_s X_s dK_s / (sup X * mean_i K_T),
    zero when no pushing occurred."""
    ens = source.ensemble if hasattr(source, "ensemble") else source
    if ens.scheme != DIRECT:
        raise SchemeFault("skorokhod_check needs a direct_reflect ensemble")
    mean_xdk = float(np.mean(ens.xdk))
    mean_k = float(np.mean(ens.big_k))
    denom = ens.sup_x * mean_k
    comp = mean_xdk / denom if denom > 0.0 else 0.0
    return {"complementarity": comp,
            "monotone_ok": bool(ens.monotone_ok),
            "nonneg_ok": bool(ens.nonneg_ok),
            "mean_k_final": mean_k,
            "sup_x": ens.sup_x}


def occupation_of_zero_set(positions_history, chi_history, dt):
    """Discrete int 1_{X=0} chi^2 ds of a hand-built path trace."""
    total = 0.0
    for pos, chi in zip(positions_history, chi_history):
        pos = np.atleast_1d(np.asarray(pos, dtype=np.float64))
        chi = np.broadcast_to(np.asarray(chi, dtype=np.float64), pos.shape)
        m = pos == 0.0
        total += float(np.sum(chi[m] * chi[m])) * dt / pos.size
    return total


def zero_set_diagnostics(source):
    """How often the discrete paths sit exactly at 0: the (particle,
    step) fraction, the mean occupation sum 1_{X=0} chi^2 dt, and the
    final-time mass within 1e-12 of the origin."""
    ens = source.ensemble if hasattr(source, "ensemble") else source
    steps = max(ens.step, 1)
    near = float(np.mean(np.abs(ens.positions) < 1e-12))
    return {"pair_fraction": ens.zero_pairs / (ens.n * steps),
            "zero_occupation": ens.zero_occupation,
            "final_near_zero_fraction": near}


@dataclass
class ParticleRun:
    scheme: str
    ensemble: ParticleEnsemble
    times: list
    densities: list            # half-line DensityField per snapshot
    localtime_times: list
    localtime_raw: list        # ensemble-mean raw occupation
    dt: float
    eps: float
    seed: int
    n: int
    k_sync: int
    params: dict = field(default_factory=dict)

    def density_at(self, t):
        for tt, d in zip(self.times, self.densities):
            if abs(tt - t) <= 1e-9 * max(1.0, abs(t)):
                return d
        raise KeyError(f"no particle snapshot at t={t}")


def run_particles(u0, beta_phi, scheme, t_final, dt, n_particles, seed,
                  k_sync=1, snapshot_times=None, eps=0.0,
                  selection_policy="midpoint", estimator="histogram",
                  bandwidth=None, ensemble=None):
    """Drive a particle system to t_final.

    beta_phi is the diffusion-coefficient graph Phi of the HALF-LINE
    problem; the whole-line scheme internally uses its mirror rescaling
    Phi_bar(u) = Phi(2u).  Snapshots are recorded as half-line densities
    (the whole-line ensemble is folded first), so both schemes produce
    directly comparable output.
    """
    from .graphs import make_selection
    from .mirror import extend_phi

    if dt <= 0.0 or t_final < 0.0:
        raise ConfigError("need dt > 0 and t_final >= 0")
    n_steps = int(round(t_final / dt))
    if abs(n_steps * dt - t_final) > 1e-9 * max(1.0, t_final):
        raise ConfigError("t_final must be an integer number of steps")

    if ensemble is None:
        ens = sample_initial(u0, n_particles, seed, scheme)
    else:
        ens = ensemble
    ens.eps = float(eps)
    if eps > 0.0 and eps < math.sqrt(dt):
        warnings.warn("eps=%g below sqrt(dt)=%g: local-time window "
                      "undersamples" % (eps, math.sqrt(dt)))

    if scheme == WHOLELINE:
        chi_sel = make_selection(extend_phi(beta_phi), selection_policy)
        stepper = em_step_wholeline
        symmetrize = True
    elif scheme == DIRECT:
        chi_sel = make_selection(beta_phi, selection_policy)
        stepper = reflected_step
        symmetrize = False
    else:
        raise SchemeFault(f"cannot drive scheme {scheme!r}")

    snap_steps = {0, n_steps}
    for t in (snapshot_times if snapshot_times is not None else []):
        k = int(round(float(t) / dt))
        if abs(k * dt - float(t)) > 1e-9 * max(1.0, float(t)) or k > n_steps:
            raise ConfigError(f"snapshot t={t} is not on the step grid")
        snap_steps.add(k)

    times, densities = [], []
    lt_times, lt_raw = [], []

    def record():
        view = fold(ens) if scheme == WHOLELINE else ens
        est = estimate_density(view, method=estimator, bandwidth=bandwidth)
        times.append(ens.t)
        densities.append(est.field)
        if eps > 0.0:
            lt_times.append(ens.t)
            lt_raw.append(float(np.mean(ens.occupation)))

    dens = estimate_density(ens, method=estimator, symmetrize=symmetrize,
                            bandwidth=bandwidth)
    record()
    for k in range(n_steps):
        if k > 0 and k % k_sync == 0:
            dens = estimate_density(ens, method=estimator,
                                    symmetrize=symmetrize,
                                    bandwidth=bandwidth)
        stepper(ens, chi_sel, dens, dt)
        if (k + 1) in snap_steps:
            record()

    return ParticleRun(scheme, ens, times, densities, lt_times, lt_raw,
                       float(dt), float(eps), int(seed), ens.n, int(k_sync),
                       params={"selection_policy": selection_policy,
                               "estimator": estimator,
                               "bandwidth": float(bandwidth or 0.0)})
