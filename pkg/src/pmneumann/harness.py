"""Experiment orchestration: configs, pipelines, metrics, reports.

A single declarative JSON config describes the graph, the initial
density, the grids, and the PDE/particle/verification parameters.  The
pipelines (pde, particle, verify, compare, route_check, sweep) write
their numbers into ``report.json`` plus per-snapshot CSV artifacts, so
every reported metric can be recomputed from files in the run
directory.  Reports are deterministic: identical (config, seed) gives
a bit-identical report.json.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import ndtr

from . import particle as pa
from . import pde, testfn
from ._backend import BACKEND
from .errors import ConfigError, GridError
from .fields import DensityField, Grid1D
from .graphs import make_graph, phi_from_beta
from .mirror import check_even, extend_beta, extend_initial, restrict_solution

DEFAULTS = {
    "graph": {"name": "identity", "params": {}},
    "u0": {"name": "indicator", "params": {"a": 0.0, "b": 1.0}},
    "domain": {"x_max": 5.0, "dx": 0.02},
    "time": {"t_final": 0.5, "dt": 1e-3, "snapshots": [0.1, 0.5]},
    "pde": {"rtol": 5e-13, "max_sweeps": 500000,
            "declared_breakpoints": None, "selection_policy": "midpoint"},
    "particle": {"n": 100000, "dt": 1e-3, "scheme": "direct_reflect",
                 "estimator": "histogram", "eps": 0.0, "bandwidth": None,
                 "k_sync": 1, "seed": 2024},
    "verify": {"family_size": 12, "cutoff_ladder": [0.2, 0.1, 0.05]},
    "tolerances": {"mass_drift": 1e-10, "min_u": -1e-10, "asym": 1e-12,
                   "route_gap": 1e-6, "residual_max": 5e-2,
                   "l1_particle_pde": 0.05, "l1_schemes": 0.05},
    "sweep": None,
}

_SCHEMES = (pa.WHOLELINE, pa.DIRECT, "both")
_ESTIMATORS = ("histogram", "gaussian_kde")


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in (over or {}).items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


@dataclass
class ExperimentConfig:
    data: dict

    @classmethod
    def from_dict(cls, raw):
        unknown = set(raw) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config sections: {sorted(unknown)}")
        return cls(_merge(DEFAULTS, raw))

    @classmethod
    def from_file(cls, path):
        try:
            raw = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}")
        return cls.from_dict(raw)

    def __getitem__(self, key):
        return self.data[key]

    def content_hash(self):
        blob = json.dumps(self.data, sort_keys=True).encode()
        return hashlib.sha1(blob).hexdigest()

    def validate(self):
        d = self.data

        def positive(path, value, strict=True):
            bad = value <= 0 if strict else value < 0
            if not isinstance(value, (int, float)) or bad:
                raise ConfigError(f"{path} must be {'>' if strict else '>='} 0,"
                                  f" got {value!r}")

        positive("domain.x_max", d["domain"]["x_max"])
        positive("domain.dx", d["domain"]["dx"])
        ncell = d["domain"]["x_max"] / d["domain"]["dx"]
        if abs(ncell - round(ncell)) > 1e-9 * max(1.0, ncell):
            raise ConfigError("domain.x_max must be a whole number of cells")
        positive("time.t_final", d["time"]["t_final"], strict=False)
        positive("time.dt", d["time"]["dt"])
        for t in d["time"]["snapshots"]:
            if not 0.0 <= t <= d["time"]["t_final"] + 1e-12:
                raise ConfigError(f"time.snapshots entry {t} outside [0, T]")
        p = d["particle"]
        if int(p["n"]) < 1:
            raise ConfigError("particle.n must be >= 1")
        positive("particle.dt", p["dt"])
        positive("particle.eps", p["eps"], strict=False)
        if int(p["k_sync"]) < 1:
            raise ConfigError("particle.k_sync must be >= 1")
        if p["scheme"] not in _SCHEMES:
            raise ConfigError(f"particle.scheme must be one of {_SCHEMES}")
        if p["estimator"] not in _ESTIMATORS:
            raise ConfigError(f"particle.estimator must be one of {_ESTIMATORS}")
        if p["estimator"] == "gaussian_kde":
            if not p["bandwidth"] or p["bandwidth"] <= 0:
                raise ConfigError("particle.bandwidth must be > 0 for kde")
        if d["graph"]["name"] not in _GRAPH_NAMES:
            raise ConfigError(f"graph.name {d['graph']['name']!r} not in "
                              f"catalog {_GRAPH_NAMES}")
        if d["u0"]["name"] not in _U0_NAMES:
            raise ConfigError(f"u0.name {d['u0']['name']!r} not in catalog "
                              f"{_U0_NAMES}")
        for k, v in d["tolerances"].items():
            if k != "min_u" and v <= 0:
                raise ConfigError(f"tolerances.{k} must be > 0")
        return self


_GRAPH_NAMES = ("linear", "identity", "zero", "power", "stopped_linear",
                "saturating", "jump", "table")
_U0_NAMES = ("indicator", "triangle", "truncated_gaussian", "table")


# ---------------------------------------------------------------- u0 catalog

def _indicator_cdf(edges, a, b):
    if b <= a:
        raise ConfigError("u0 indicator needs a < b")
    return np.clip((edges - a) / (b - a), 0.0, 1.0)


def _triangle_cdf(edges, a, c, b):
    if not a < c < b:
        raise ConfigError("u0 triangle needs a < c < b")
    f = np.zeros_like(edges)
    up = (edges > a) & (edges <= c)
    f[up] = (edges[up] - a) ** 2 / ((b - a) * (c - a))
    dn = (edges > c) & (edges < b)
    f[dn] = 1.0 - (b - edges[dn]) ** 2 / ((b - a) * (b - c))
    f[edges >= b] = 1.0
    return f


def _truncated_gaussian_cdf(edges, mu, sigma, lo, hi):
    if sigma <= 0 or hi <= lo:
        raise ConfigError("u0 truncated_gaussian needs sigma > 0 and lo < hi")
    flo = ndtr((lo - mu) / sigma)
    fhi = ndtr((hi - mu) / sigma)
    f = (ndtr((np.clip(edges, lo, hi) - mu) / sigma) - flo) / (fhi - flo)
    return np.clip(f, 0.0, 1.0)


def _table_cdf(edges, xs, values):
    xs = np.asarray(xs, dtype=np.float64)
    vv = np.asarray(values, dtype=np.float64)
    if xs.size != vv.size or xs.size < 2 or np.any(np.diff(xs) <= 0):
        raise ConfigError("u0 table needs increasing xs matching values")
    if np.min(vv) < 0:
        raise ConfigError("u0 table values must be >= 0")
    seg = np.concatenate(([0.0], np.cumsum(0.5 * (vv[1:] + vv[:-1])
                                           * np.diff(xs))))
    x = np.clip(edges, xs[0], xs[-1])
    i = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, xs.size - 2)
    h = x - xs[i]
    slope = (vv[i + 1] - vv[i]) / (xs[i + 1] - xs[i])
    f = seg[i] + vv[i] * h + 0.5 * slope * h * h
    return f / seg[-1]


def make_u0(grid, name, **params):
    """Gridded initial density by exact CDF differences, renormalized to
    unit grid mass."""
    edges = grid.edges
    if name == "indicator":
        cdf = _indicator_cdf(edges, **params)
    elif name == "triangle":
        cdf = _triangle_cdf(edges, **params)
    elif name == "truncated_gaussian":
        p = dict(params)
        p.setdefault("lo", 0.0)
        p.setdefault("hi", grid.x_max)
        cdf = _truncated_gaussian_cdf(edges, **p)
    elif name == "table":
        cdf = _table_cdf(edges, **params)
    else:
        raise ConfigError(f"unknown u0 catalog entry {name!r}")
    vals = np.diff(cdf) / grid.dx
    mass = float(np.sum(vals) * grid.dx)
    if mass <= 0:
        raise ConfigError(f"u0 {name!r} has no mass on the grid")
    return DensityField(grid, vals / mass, t=0.0)


# ---------------------------------------------------------------- metrics

def _rebin(src, grid):
    """Mass-conservative rebinning via the piecewise-linear CDF."""
    cdf = np.concatenate(([0.0], np.cumsum(src.values) * src.grid.dx))
    f = np.interp(grid.edges, src.grid.edges, cdf,
                  left=0.0, right=float(cdf[-1]))
    return DensityField(grid, np.diff(f) / grid.dx, t=src.t)


def compare_densities(a, b, resample=False):
    """L1 = sum |a - b| dx and W1 = sum |CDF_a - CDF_b| dx on a common
    grid; with resample=True, b is conservatively rebinned onto a's
    grid first."""
    if a.grid != b.grid:
        if not resample:
            raise GridError("density grids differ; pass resample=True")
        b = _rebin(b, a.grid)
    diff = a.values - b.values
    dx = a.grid.dx
    l1 = float(np.sum(np.abs(diff)) * dx)
    w1 = float(np.sum(np.abs(np.cumsum(diff) * dx)) * dx)
    return {"L1": l1, "W1": w1}


# ---------------------------------------------------------------- report

@dataclass
class Report:
    pipeline: str
    config: dict
    content_hash: str
    backend: str
    metrics: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    artifacts: list = field(default_factory=list)

    def add_check(self, rule, value, tolerance, passed):
        self.checks.append({"rule": rule, "value": value,
                            "tolerance": tolerance, "passed": bool(passed)})

    @property
    def passed(self):
        return all(c["passed"] for c in self.checks)

    def to_dict(self):
        return {"pipeline": self.pipeline, "config": self.config,
                "content_hash": self.content_hash, "backend": self.backend,
                "metrics": self.metrics, "checks": self.checks,
                "passed": self.passed, "artifacts": sorted(self.artifacts)}

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True,
                                         indent=2) + "\n")


# ---------------------------------------------------------------- builders

def _grid(cfg):
    return Grid1D.half_line(cfg["domain"]["x_max"], cfg["domain"]["dx"])


def _u0(cfg, grid):
    return make_u0(grid, cfg["u0"]["name"], **cfg["u0"]["params"])


def _beta(cfg):
    return make_graph(cfg["graph"]["name"], **cfg["graph"]["params"])


def _solve(cfg, u0=None, beta=None, snapshots=None):
    grid = _grid(cfg)
    u0 = u0 if u0 is not None else _u0(cfg, grid)
    beta = beta if beta is not None else _beta(cfg)
    p = cfg["pde"]
    return pde.solve(u0, beta, cfg["time"]["t_final"], cfg["time"]["dt"],
                     snapshot_times=snapshots or cfg["time"]["snapshots"],
                     rtol=p["rtol"], max_sweeps=p["max_sweeps"],
                     declared_breakpoints=p["declared_breakpoints"])


def _dense_snapshots(cfg, target=50):
    """About `target` uniformly spaced times aligned to the step size,
    always ending at t_final."""
    t_final = cfg["time"]["t_final"]
    dt = cfg["time"]["dt"]
    n_steps = int(round(t_final / dt))
    k = max(1, n_steps // target)
    snaps = [i * k * dt for i in range(1, n_steps // k + 1)]
    if abs(snaps[-1] - t_final) > 1e-9 * max(1.0, t_final):
        snaps.append(t_final)
    return snaps


def _tname(t):
    return ("%g" % t).replace("-", "m")


def _write_field(fld, out, stem, rep):
    path = Path(out) / f"{stem}.csv"
    fld.to_csv(path)
    rep.artifacts.append(path.name)


def _write_rows(rows, header, out, name, rep):
    path = Path(out) / name
    lines = [header] + ["%.17g,%.17g" % r for r in rows]
    path.write_text("\n".join(lines) + "\n")
    rep.artifacts.append(path.name)


def _pde_checks(cfg, traj, rep, tag=""):
    tol = cfg["tolerances"]
    led = traj.ledger
    rep.metrics[f"{tag}conservation_ledger"] = led
    rep.add_check(f"{tag}mass_drift", led["mass_drift_max"],
                  tol["mass_drift"], led["mass_drift_max"] <= tol["mass_drift"])
    rep.add_check(f"{tag}min_u", led["min_value"], tol["min_u"],
                  led["min_value"] >= tol["min_u"])
    if led.get("asym_max") is not None:
        rep.add_check(f"{tag}evenness", led["asym_max"], tol["asym"],
                      led["asym_max"] <= tol["asym"])


# ---------------------------------------------------------------- pipelines

def _run_pde(cfg, out, rep, snapshots=None):
    traj = _solve(cfg, snapshots=snapshots)
    for t in traj.times:
        _write_field(traj.density_at(t), out, f"density_t{_tname(t)}", rep)
        _write_field(traj.eta_at(t), out, f"eta_t{_tname(t)}", rep)
    _pde_checks(cfg, traj, rep)
    return traj


def _particle_runs(cfg, u0, beta):
    p = cfg["particle"]
    phi = phi_from_beta(beta)
    schemes = [p["scheme"]] if p["scheme"] != "both" else [pa.WHOLELINE,
                                                           pa.DIRECT]
    runs = {}
    for scheme in schemes:
        runs[scheme] = pa.run_particles(
            u0, phi, scheme, cfg["time"]["t_final"], p["dt"], int(p["n"]),
            int(p["seed"]), k_sync=int(p["k_sync"]),
            snapshot_times=cfg["time"]["snapshots"], eps=p["eps"],
            selection_policy=cfg["pde"]["selection_policy"],
            estimator=p["estimator"], bandwidth=p["bandwidth"])
    return runs


def _particle_report(cfg, run, out, rep, lt_name=None):
    scheme = run.scheme
    for t, d in zip(run.times, run.densities):
        _write_field(d, out, f"density_t{_tname(t)}_{scheme}", rep)
    rep.metrics[f"{scheme}_exposure"] = run.ensemble.exposure
    rep.metrics[f"{scheme}_zero_set"] = pa.zero_set_diagnostics(run)
    if run.eps > 0.0:
        trace = pa.estimate_local_time(run)
        _write_rows(trace.to_rows(), "t,L", out,
                    lt_name or f"localtime_{scheme}.csv", rep)
        rep.metrics[f"{scheme}_local_time_final"] = trace.final
    if scheme == pa.DIRECT:
        sk = pa.skorokhod_check(run)
        rep.metrics["skorokhod"] = sk
        bound = 5.0 * math.sqrt(run.dt)
        rep.add_check("skorokhod_monotone", sk["monotone_ok"], True,
                      sk["monotone_ok"])
        rep.add_check("skorokhod_nonneg", sk["nonneg_ok"], True,
                      sk["nonneg_ok"])
        rep.add_check("skorokhod_complementarity", sk["complementarity"],
                      bound, sk["complementarity"] <= bound)


def _run_particle(cfg, out, rep):
    grid = _grid(cfg)
    u0 = _u0(cfg, grid)
    runs = _particle_runs(cfg, u0, _beta(cfg))
    single = len(runs) == 1
    for run in runs.values():
        _particle_report(cfg, run, out, rep,
                         lt_name="localtime.csv" if single else None)
    return runs


def _run_verify(cfg, out, rep):
    # the time integrals in the residuals need a dense trajectory, not
    # just the configured output snapshots
    traj = _run_pde(cfg, out, rep, snapshots=_dense_snapshots(cfg))
    tol = cfg["tolerances"]
    t = traj.times[-1]
    x_hi = traj.grid.x_max
    family = testfn.build_family(int(cfg["verify"]["family_size"]), x_hi)
    reports = []
    for phi in family:
        for form in ("generalized", "weak", "boundary"):
            reports.append(testfn.residual_report(traj, phi, t, form))
    by_form = {}
    for r in reports:
        by_form.setdefault(r.form, []).append(abs(r.value))
    gaps = [abs(g - w) for g, w in zip(by_form["generalized"],
                                       by_form["weak"])]
    c_equiv = max(gaps) / traj.dx
    control = testfn.make_bump(0.06 * x_hi, 0.12 * x_hi)
    eps_list = tuple(cfg["verify"]["cutoff_ladder"])
    # flattening up to 2*eps must leave part of the control alive,
    # otherwise the ladder floor degenerates to the constant function
    if 2.0 * max(eps_list) >= control.support[1]:
        raise ConfigError(
            "verify.cutoff_ladder widths reach "
            f"{2.0 * max(eps_list):g}, past the control support "
            f"[{control.support[0]:g}, {control.support[1]:g}]; "
            "use smaller widths or a wider domain")
    control_rep = testfn.residual_report(traj, control, t, "boundary")
    ladder = testfn.cutoff_ladder(traj, control, t, eps_list)
    rep.metrics["residual_max"] = {f: max(v) for f, v in by_form.items()}
    rep.metrics["equivalence_constant"] = c_equiv
    rep.metrics["cutoff_ladder"] = {k: v for k, v in ladder.items()
                                    if k != "passed"}
    rep.add_check("generalized_residual_max", max(by_form["generalized"]),
                  tol["residual_max"],
                  max(by_form["generalized"]) <= tol["residual_max"])
    rep.add_check("weak_residual_max", max(by_form["weak"]),
                  tol["residual_max"],
                  max(by_form["weak"]) <= tol["residual_max"])
    rep.add_check("cutoff_ladder_band_monotone", max(ladder["diffs"]),
                  ladder["band"], ladder["passed"])
    blob = {"residuals": [r.to_dict() for r in reports],
            "boundary_control": control_rep.to_dict(),
            "equivalence_constant": c_equiv,
            "cutoff_ladder": rep.metrics["cutoff_ladder"]}
    path = Path(out) / "residuals.json"
    path.write_text(json.dumps(blob, sort_keys=True, indent=2) + "\n")
    rep.artifacts.append(path.name)


def _run_compare(cfg, out, rep):
    grid = _grid(cfg)
    u0 = _u0(cfg, grid)
    beta = _beta(cfg)
    traj = _solve(cfg, u0=u0, beta=beta)
    for t in cfg["time"]["snapshots"]:
        _write_field(traj.density_at(t), out, f"density_t{_tname(t)}", rep)
    _pde_checks(cfg, traj, rep)
    runs = _particle_runs(cfg, u0, beta)
    tol = cfg["tolerances"]
    table = {}
    for scheme, run in runs.items():
        _particle_report(cfg, run, out, rep)
        for t in cfg["time"]["snapshots"]:
            m = compare_densities(run.density_at(t), traj.density_at(t))
            table[f"{scheme}_t{_tname(t)}"] = m
            rep.add_check(f"l1_{scheme}_vs_pde_t{_tname(t)}", m["L1"],
                          tol["l1_particle_pde"],
                          m["L1"] <= tol["l1_particle_pde"])
    if len(runs) == 2:
        for t in cfg["time"]["snapshots"]:
            m = compare_densities(runs[pa.WHOLELINE].density_at(t),
                                  runs[pa.DIRECT].density_at(t))
            table[f"schemes_t{_tname(t)}"] = m
            rep.add_check(f"l1_schemes_t{_tname(t)}", m["L1"],
                          tol["l1_schemes"], m["L1"] <= tol["l1_schemes"])
    rep.metrics["density_distances"] = table


def route_equivalence(cfg, out=None, rep=None):
    """Direct half-line solve vs mirror route (extend, whole-line solve,
    restrict); returns per-snapshot L1 gaps and the evenness ledger."""
    grid = _grid(cfg)
    u0 = _u0(cfg, grid)
    beta = _beta(cfg)
    p = cfg["pde"]
    direct = _solve(cfg, u0=u0, beta=beta)
    whole = pde.solve(extend_initial(u0), extend_beta(beta),
                      cfg["time"]["t_final"], cfg["time"]["dt"],
                      snapshot_times=cfg["time"]["snapshots"],
                      rtol=p["rtol"], max_sweeps=p["max_sweeps"],
                      declared_breakpoints=p["declared_breakpoints"])
    gaps = {}
    for t in direct.times:
        ubar = whole.density_at(t)
        back = restrict_solution(ubar)
        gaps[_tname(t)] = compare_densities(direct.density_at(t), back)["L1"]
        if out is not None:
            _write_field(direct.density_at(t), out,
                         f"density_t{_tname(t)}", rep)
            _write_field(back, out, f"density_t{_tname(t)}_mirror", rep)
    return {"gaps": gaps, "max_gap": max(gaps.values()),
            "asym_max": whole.ledger["asym_max"],
            "final_evenness": check_even(whole.densities[-1])}


def _run_route_check(cfg, out, rep):
    res = route_equivalence(cfg, out, rep)
    tol = cfg["tolerances"]
    rep.metrics["route_equivalence"] = res
    rep.add_check("route_gap_max", res["max_gap"], tol["route_gap"],
                  res["max_gap"] <= tol["route_gap"])
    rep.add_check("mirror_evenness", res["asym_max"], tol["asym"],
                  res["asym_max"] <= tol["asym"])


def _set_path(data, dotted, value):
    node = data
    keys = dotted.split(".")
    for k in keys[:-1]:
        if k not in node or not isinstance(node[k], dict):
            raise ConfigError(f"sweep.path {dotted!r} does not exist")
        node = node[k]
    if keys[-1] not in node:
        raise ConfigError(f"sweep.path {dotted!r} does not exist")
    node[keys[-1]] = value


def _run_sweep(cfg, out, rep):
    plan = cfg["sweep"]
    if not plan or "path" not in plan or "values" not in plan:
        raise ConfigError("sweep needs sweep.path and sweep.values")
    inner = plan.get("pipeline", "compare")
    if inner == "sweep":
        raise ConfigError("sweep cannot nest sweeps")
    points = {}
    for i, value in enumerate(plan["values"]):
        sub_raw = copy.deepcopy(cfg.data)
        sub_raw["sweep"] = None
        _set_path(sub_raw, plan["path"], value)
        sub_dir = Path(out) / f"point_{i:03d}"
        sub_dir.mkdir(parents=True, exist_ok=True)
        sub = run(ExperimentConfig(sub_raw), inner, sub_dir)
        points[str(value)] = {"metrics": sub.metrics, "passed": sub.passed}
        rep.add_check(f"{plan['path']}={value}", int(sub.passed), True,
                      sub.passed)
        rep.artifacts.append(f"point_{i:03d}/report.json")
    rep.metrics["sweep"] = {"path": plan["path"], "points": points}


_PIPELINES = {
    "pde": _run_pde,
    "particle": _run_particle,
    "verify": _run_verify,
    "compare": _run_compare,
    "route_check": _run_route_check,
    "sweep": _run_sweep,
}


def run(config, pipeline, out_dir, seed=None):
    """Execute one pipeline, write artifacts into out_dir, and return
    the Report (also saved as report.json)."""
    if isinstance(config, (str, Path)):
        config = ExperimentConfig.from_file(config)
    elif isinstance(config, dict):
        config = ExperimentConfig.from_dict(config)
    if pipeline not in _PIPELINES:
        raise ConfigError(f"unknown pipeline {pipeline!r}; choose from "
                          f"{sorted(_PIPELINES)}")
    if seed is not None:
        config = ExperimentConfig(copy.deepcopy(config.data))
        config.data["particle"]["seed"] = int(seed)
    config.validate()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rep = Report(pipeline, config.data, config.content_hash(), BACKEND)
    _PIPELINES[pipeline](config, out, rep)
    rep.artifacts.append("report.json")
    rep.save(out / "report.json")
    return rep
