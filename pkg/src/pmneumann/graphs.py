"""Maximal monotone graphs on the half-line [0, inf).

A graph is a monotone increasing, possibly discontinuous map beta with
beta(0) = 0; discontinuities are filled with the jump interval
[beta(x-), beta(x+)].  The catalog covers identity, power laws,
stopped-linear ramps (u - u_c)^+, the saturating nonlinearity
u^2/(1+u), single-jump graphs and user piecewise-linear tables.

Alongside evaluation this module provides the resolvent
(I + mu*beta)^{-1}, the diffusion coefficient Phi(u) = sqrt(beta(u)/u)
with its interval of limit values at 0, single-valued selections for
numerics, a degeneracy classifier working on a geometric grid, and the
standing-assumption checks for initial data.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _encoding as enc
from . import _kernels_numpy as _knp
from .errors import GraphError

POLICIES = ("right_limit", "left_limit", "midpoint")


@dataclass(frozen=True)
class Jump:
    x: float
    left: float
    right: float


@dataclass(frozen=True)
class Segment:
    lo: float
    hi: float
    fn: object  # monotone callable on [lo, hi)


class MonotoneGraph:
    """Monotone graph encoded as beta(u) = post * base(pre*u).

    The (kind, pre, post, aux) quadruple is shared with the numeric
    kernels; pre/post make the family closed under the mirror transform
    beta(2u)/2.  growth_constant is the declared c with |beta(u)| <= c*u,
    or None when no finite global constant exists.
    """

    domain = (0.0, math.inf)

    def __init__(self, kind, pre, post, aux, growth_constant, name):
        self.kind = int(kind)
        self.pre = float(pre)
        self.post = float(post)
        self.aux = np.ascontiguousarray(aux, dtype=np.float64)
        self.growth_constant = growth_constant
        self.name = name

    def __repr__(self):
        return f"MonotoneGraph({self.name})"

    # -- evaluation ----------------------------------------------------

    def value_right(self, u):
        return _knp.beta_right(self.kind, self.pre, self.post, self.aux, u)

    def value_left(self, u):
        return _knp.beta_left(self.kind, self.pre, self.post, self.aux, u)

    def eval(self, u):
        """Filled-graph value interval [beta(u-), beta(u+)] at scalar u >= 0."""
        u = float(u)
        if u < 0.0:
            raise GraphError(f"graph argument u={u} outside domain [0, inf)")
        lo = float(self.value_left(u)) if u > 0.0 else 0.0
        hi = float(self.value_right(u))
        if lo > hi:
            lo, hi = hi, lo
        return (lo, hi)

    @property
    def jumps(self):
        if self.kind != enc.PWL:
            return ()
        xs, yl, yr, _ = enc.pwl_unpack(self.aux)
        out = []
        for k in range(xs.size):
            if yr[k] > yl[k]:
                out.append(Jump(x=xs[k] / self.pre,
                                left=self.post * yl[k],
                                right=self.post * yr[k]))
        return tuple(out)

    @property
    def segments(self):
        pts = [0.0]
        if self.kind == enc.STOPPED:
            uc = self.aux[1] / self.pre
            if 0.0 < uc < math.inf:
                pts.append(uc)
        elif self.kind == enc.PWL:
            xs = enc.pwl_unpack(self.aux)[0]
            pts.extend(float(x) / self.pre for x in xs[1:])
        pts.append(math.inf)
        return tuple(Segment(a, b, self.value_right)
                     for a, b in zip(pts[:-1], pts[1:]))

    def scaled(self, pre_mul, post_mul, name=None):
        """Graph u -> post_mul * beta(pre_mul * u)."""
        c = self.growth_constant
        if c is not None:
            c = c * pre_mul * post_mul
        return MonotoneGraph(self.kind, self.pre * pre_mul,
                             self.post * post_mul, self.aux, c,
                             name or f"scaled({self.name})")

    # -- resolvent -----------------------------------------------------

    def resolvent(self, mu, y):
        """Solve u + mu*eta = y with eta in beta(u); returns (u, eta).

        Jump intervals are tested first; elsewhere the root of the
        monotone map u -> u + mu*beta(u+) is bracketed by bisection on
        [0, y] (at most 200 halvings, to machine tolerance).
        """
        mu = float(mu)
        y = float(y)
        if mu <= 0.0:
            raise GraphError(f"resolvent needs mu > 0, got {mu}")
        if y < 0.0:
            raise GraphError(f"resolvent input must be nonnegative, got y={y}")
        if y == 0.0:
            return 0.0, 0.0
        for j in self.jumps:
            if j.x + mu * j.left <= y <= j.x + mu * j.right:
                return j.x, (y - j.x) / mu
        lo, hi = 0.0, y
        tol = 1e-14 * max(1.0, y)
        for _ in range(200):
            if hi - lo <= tol:
                break
            mid = 0.5 * (lo + hi)
            if mid + mu * float(self.value_right(mid)) >= y:
                hi = mid
            else:
                lo = mid
        u = 0.5 * (lo + hi)
        eta = float(self.value_right(u))
        if abs(u + mu * eta - y) <= 1e-12 * max(1.0, y):
            return u, eta
        return u, (y - u) / mu


def resolvent(graph, mu, y):
    return graph.resolvent(mu, y)


# ---------------------------------------------------------------- catalog

def linear(a=1.0):
    a = float(a)
    if a < 0.0:
        raise GraphError("linear slope must be nonnegative")
    return MonotoneGraph(enc.LINEAR, 1.0, 1.0, np.array([a]), a, f"linear({a:g})")


def identity():
    g = linear(1.0)
    g.name = "identity"
    return g


def zero():
    return MonotoneGraph(enc.ZERO, 1.0, 1.0, enc.empty_aux(), 0.0, "zero")


def power(m, a=1.0):
    m = float(m)
    a = float(a)
    if m <= 0.0 or a <= 0.0:
        raise GraphError("power graph needs m > 0 and a > 0")
    if m == 1.0:
        return linear(a)
    warnings.warn(
        f"power(m={m:g}) admits no global constant c with beta(u) <= c*u; "
        "the linear-growth assumption fails on unbounded data ranges",
        stacklevel=2)
    return MonotoneGraph(enc.POWER, 1.0, 1.0, np.array([a, m]), None,
                         f"power({m:g})")


def stopped_linear(u_c, slope=1.0):
    u_c = float(u_c)
    slope = float(slope)
    if u_c < 0.0 or slope < 0.0:
        raise GraphError("stopped_linear needs u_c >= 0 and slope >= 0")
    if math.isinf(u_c) or slope == 0.0:
        return zero()
    return MonotoneGraph(enc.STOPPED, 1.0, 1.0, np.array([slope, u_c]), slope,
                         f"stopped_linear({u_c:g})")


def saturating():
    # u^2/(1+u) <= u, with slope -> 1 at infinity
    return MonotoneGraph(enc.SATURATING, 1.0, 1.0, enc.empty_aux(), 1.0,
                         "saturating")


def jump(a, lo, hi):
    a = float(a)
    lo = float(lo)
    hi = float(hi)
    if a <= 0.0 or lo < 0.0 or hi < lo:
        raise GraphError("jump(a, lo, hi) needs a > 0 and 0 <= lo <= hi")
    aux = enc.pwl_pack([0.0, a], [0.0, lo], [0.0, hi], hi / a)
    return MonotoneGraph(enc.PWL, 1.0, 1.0, aux, hi / a,
                         f"jump({a:g},{lo:g},{hi:g})")


def table(xs, left, right=None, end_slope=None):
    """User piecewise-linear graph with optional jumps.

    xs must start at 0 and increase strictly; left/right are the limit
    values at each breakpoint (right defaults to left, i.e. continuous).
    Beyond the last breakpoint the graph continues with end_slope
    (default: the last interior slope, or 0 for a single breakpoint).
    """
    xs = np.asarray(xs, dtype=np.float64)
    yl = np.asarray(left, dtype=np.float64)
    yr = yl.copy() if right is None else np.asarray(right, dtype=np.float64)
    if xs.ndim != 1 or xs.size == 0 or xs[0] != 0.0:
        raise GraphError("table breakpoints must be 1-d and start at 0")
    if np.any(np.diff(xs) <= 0.0):
        raise GraphError("table breakpoints must increase strictly")
    if yl.shape != xs.shape or yr.shape != xs.shape:
        raise GraphError("table value arrays must match the breakpoints")
    if np.any(yl < 0.0) or np.any(yr < yl):
        raise GraphError("table values must satisfy 0 <= left <= right")
    if end_slope is None:
        end_slope = ((yl[-1] - yr[-2]) / (xs[-1] - xs[-2])) if xs.size >= 2 else 0.0
    end_slope = float(end_slope)
    if end_slope < 0.0:
        raise GraphError("table end slope must be nonnegative")
    seg_lo = np.concatenate([yr[:-1], [yr[-1]]])
    seg_hi = np.concatenate([yl[1:], [yr[-1]]])
    if np.any(seg_hi < seg_lo):
        raise GraphError("table is not monotone across a segment")
    if yr[0] > 0.0:
        growth = None
        warnings.warn("table has beta(0+) > 0; no linear-growth constant",
                      stacklevel=2)
    else:
        cands = [end_slope]
        if xs.size >= 2:
            cands.append((yl[1] - yr[0]) / (xs[1] - xs[0]))
            with np.errstate(divide="ignore"):
                cands.extend((yr[1:] / xs[1:]).tolist())
        growth = float(max(cands))
    return MonotoneGraph(enc.PWL, 1.0, 1.0, enc.pwl_pack(xs, yl, yr, end_slope),
                         growth, "table")


_CATALOG = {
    "identity": identity,
    "linear": linear,
    "zero": zero,
    "power": power,
    "stopped_linear": stopped_linear,
    "saturating": saturating,
    "jump": jump,
    "table": table,
}


def make_graph(name, **params):
    try:
        ctor = _CATALOG[name]
    except KeyError:
        raise GraphError(
            f"unknown graph {name!r}; catalog: {sorted(_CATALOG)}") from None
    return ctor(**params)


# ---------------------------------------------------------------- Phi

class PhiGraph:
    """Diffusion coefficient graph Phi(u) = sqrt(beta(s*u)/(s*u)).

    The input scale s supports the mirror transform Phi(2u) without
    rebuilding the underlying beta.  value_at_zero is the interval of
    limit values [liminf, limsup] as u -> 0+.
    """

    def __init__(self, beta, input_scale=1.0, name=None):
        self.beta = beta
        self.input_scale = float(input_scale)
        self.value_at_zero = _phi_zero_interval(beta)
        self.name = name or f"phi({beta.name})"

    def __repr__(self):
        return f"PhiGraph({self.name})"

    def _ratio(self, vals, w):
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.sqrt(np.maximum(vals, 0.0) / w)
        return out

    def value_right(self, u):
        u = np.asarray(u, dtype=np.float64)
        scalar = u.ndim == 0
        w = self.input_scale * np.atleast_1d(u)
        out = self._ratio(np.atleast_1d(self.beta.value_right(w)), w)
        out[w == 0.0] = self.value_at_zero[1]
        return float(out[0]) if scalar else out

    def value_left(self, u):
        u = np.asarray(u, dtype=np.float64)
        scalar = u.ndim == 0
        w = self.input_scale * np.atleast_1d(u)
        out = self._ratio(np.atleast_1d(self.beta.value_left(w)), w)
        out[w == 0.0] = self.value_at_zero[0]
        return float(out[0]) if scalar else out

    def eval(self, u):
        u = float(u)
        if u < 0.0:
            raise GraphError(f"graph argument u={u} outside domain [0, inf)")
        if u == 0.0:
            return tuple(self.value_at_zero)
        lo = float(self.value_left(u))
        hi = float(self.value_right(u))
        if lo > hi:
            lo, hi = hi, lo
        return (lo, hi)

    @property
    def jumps(self):
        out = []
        for j in self.beta.jumps:
            if j.x > 0.0:
                out.append(Jump(x=j.x / self.input_scale,
                                left=math.sqrt(j.left / j.x),
                                right=math.sqrt(j.right / j.x)))
        return tuple(out)

    def rescaled(self, factor):
        return PhiGraph(self.beta, self.input_scale * factor, name=self.name)


def _phi_zero_interval(g):
    kind, pre, post, aux = g.kind, g.pre, g.post, g.aux
    if kind == enc.ZERO:
        return (0.0, 0.0)
    if kind == enc.LINEAR:
        v = math.sqrt(post * aux[0] * pre)
        return (v, v)
    if kind == enc.POWER:
        m = aux[1]
        if m > 1.0:
            return (0.0, 0.0)
        v = math.sqrt(post * aux[0] * pre ** m)
        return (v, v) if m == 1.0 else (math.inf, math.inf)
    if kind == enc.STOPPED:
        if aux[1] > 0.0:
            return (0.0, 0.0)
        v = math.sqrt(post * aux[0] * pre)
        return (v, v)
    if kind == enc.SATURATING:
        return (0.0, 0.0)
    xs, yl, yr, end_slope = enc.pwl_unpack(aux)
    if yr[0] > 0.0:
        return (math.inf, math.inf)
    s0 = (yl[1] - yr[0]) / (xs[1] - xs[0]) if xs.size >= 2 else end_slope
    v = math.sqrt(post * pre * s0)
    return (v, v)


def phi_from_beta(graph):
    return PhiGraph(graph, 1.0)


# ---------------------------------------------------------------- selection

class Selection:
    """Single-valued selection of a (possibly multivalued) graph."""

    def __init__(self, target, policy):
        if policy not in POLICIES:
            raise GraphError(f"selection policy must be one of {POLICIES}")
        self.target = target
        self.policy = policy

    def __call__(self, u):
        u = np.asarray(u, dtype=np.float64)
        scalar = u.ndim == 0
        uu = np.atleast_1d(u)
        if self.policy == "right_limit":
            out = np.atleast_1d(self.target.value_right(uu)).astype(np.float64)
        elif self.policy == "left_limit":
            out = np.atleast_1d(self.target.value_left(uu)).astype(np.float64)
        else:
            left = np.atleast_1d(self.target.value_left(uu))
            right = np.atleast_1d(self.target.value_right(uu))
            out = 0.5 * (left + right)
        return float(out[0]) if scalar else out


def make_selection(graph, policy="midpoint"):
    return Selection(graph, policy)


# ---------------------------------------------------------------- classify

@dataclass(frozen=True)
class DegeneracyClass:
    variant: str
    c0: float | None = None
    u_c: float | None = None

    def __str__(self):
        if self.variant == "non_degenerate":
            return f"non_degenerate(c0={self.c0:g})"
        if self.variant == "strictly_increasing_after_zero":
            return f"strictly_increasing_after_zero(u_c={self.u_c:g})"
        return self.variant


def classify(graph, u_max=1.0, levels=60):
    """Degeneracy class of Phi on the sampled range (0, u_max].

    Works on a geometric grid u_max * 2^-k plus fixed anchors near 0;
    the answer is therefore about the inspected range, which is what a
    grid can honestly verify.  Refining the grid keeps the variant.
    """
    if u_max <= 0.0:
        raise GraphError("classify needs u_max > 0")
    top = float(u_max)
    # expand past u_max if beta has not woken up yet on the given range
    while float(graph.value_right(top)) <= 0.0 and top < u_max * 2.0 ** 40:
        top *= 2.0
    if float(graph.value_right(top)) <= 0.0:
        # beta vanishes on every inspected scale
        return DegeneracyClass("strictly_increasing_after_zero", u_c=math.inf)
    lo, hi = 0.0, top
    for _ in range(200):
        if hi - lo <= 1e-13 * top:
            break
        mid = 0.5 * (lo + hi)
        if float(graph.value_right(mid)) > 0.0:
            hi = mid
        else:
            lo = mid
    u_c = 0.5 * (lo + hi)
    if u_c > 1e-9 * u_max:
        pts = np.linspace(u_c, max(top, 2.0 * u_c), 65)[1:]
        vals = np.atleast_1d(graph.value_right(pts))
        if np.all(np.diff(vals) > 0.0):
            return DegeneracyClass("strictly_increasing_after_zero", u_c=u_c)
        return DegeneracyClass("degenerate")
    phi = phi_from_beta(graph)
    grid = u_max * np.power(2.0, -np.arange(levels + 1, dtype=np.float64))
    right = np.atleast_1d(phi.value_right(grid))
    left = np.atleast_1d(phi.value_left(grid))
    c0 = float(min(right.min(), left.min()))
    for j in phi.jumps:
        if 0.0 < j.x <= u_max:
            c0 = min(c0, j.left, j.right)
    u_lo = u_max * 2.0 ** (-levels)
    phi_lo = float(phi.value_right(u_lo))
    phi_hi = float(phi.value_right(u_lo * 256.0))
    if phi_lo > 0.0 and phi_lo >= 0.95 * phi_hi and c0 > 0.0:
        return DegeneracyClass("non_degenerate", c0=c0)
    if phi_lo < 1e-12 or phi_lo <= 0.9 * phi_hi:
        return DegeneracyClass("degenerate")
    return DegeneracyClass("unclassified")


# ---------------------------------------------------------------- validation

@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)

    @property
    def ok(self):
        return all(c.ok for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.ok]

    def __str__(self):
        lines = []
        for c in self.checks:
            mark = "ok  " if c.ok else "FAIL"
            lines.append(f"{mark} {c.name}" + (f": {c.detail}" if c.detail else ""))
        return "\n".join(lines)


def validate_assumptions(graph, u0_values=None, dx=None,
                         declared_breakpoints=None):
    """Check the standing assumptions on (beta, u0).

    u0_values/dx describe the gridded initial density (optional).
    declared_breakpoints is the user-supplied partition 0 = e_0 < e_1 < ...
    accepted as the basis for the degenerate regularity assumption; it is
    not verified here, only recorded.
    """
    checks = []
    u_ref = 1.0
    if u0_values is not None:
        u0_values = np.asarray(u0_values, dtype=np.float64)
        if dx is None:
            raise GraphError("validate_assumptions needs dx alongside u0_values")
        mass = float(np.sum(u0_values) * dx)
        checks.append(Check("u0_unit_mass", abs(mass - 1.0) <= 1e-8,
                            f"mass={mass!r}"))
        mn = float(u0_values.min()) if u0_values.size else 0.0
        checks.append(Check("u0_nonnegative", mn >= -1e-12, f"min={mn!r}"))
        mx = float(u0_values.max()) if u0_values.size else 0.0
        checks.append(Check("u0_bounded", math.isfinite(mx), f"max={mx!r}"))
        u_ref = max(1.0, 2.0 * mx)

    b0 = float(graph.value_right(0.0))
    checks.append(Check("beta_zero_at_zero", abs(b0) <= 1e-14, f"beta(0+)={b0!r}"))

    grid = u_ref * np.power(2.0, -np.arange(0, 53, dtype=np.float64))
    pts = np.unique(np.concatenate([grid, [j.x for j in graph.jumps if j.x > 0]]))
    left = np.atleast_1d(graph.value_left(pts))
    right = np.atleast_1d(graph.value_right(pts))
    tol = 1e-12 * max(1.0, float(np.max(right)))
    mono = np.all(right >= left - tol) and np.all(left[1:] >= right[:-1] - tol)
    checks.append(Check("beta_monotone", bool(mono)))

    c = graph.growth_constant
    if c is None or not math.isfinite(c):
        checks.append(Check("beta_linear_growth", False,
                            "no finite growth constant declared"))
    else:
        wide = np.concatenate([grid, u_ref * np.power(2.0, np.arange(1, 21))])
        vals = np.atleast_1d(graph.value_right(wide))
        bound = c * wide * (1.0 + 1e-10) + 1e-14
        ok = bool(np.all(vals <= bound))
        checks.append(Check("beta_linear_growth", ok, f"c={c:g}"))

    klass = classify(graph, u_max=u_ref)
    if klass.variant in ("non_degenerate", "strictly_increasing_after_zero"):
        checks.append(Check("degeneracy_admissible", True, str(klass)))
    elif klass.variant == "degenerate":
        if declared_breakpoints is not None and len(declared_breakpoints) > 0:
            checks.append(Check(
                "degeneracy_admissible", True,
                "degenerate; relying on user-declared partition "
                f"e_k={list(declared_breakpoints)} (not verified here)"))
        else:
            checks.append(Check(
                "degeneracy_admissible", False,
                "degenerate Phi requires a user-declared partition e_k"))
    else:
        checks.append(Check("degeneracy_admissible", False, str(klass)))
    return ValidationReport(checks)
