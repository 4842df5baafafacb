"""Test functions and integral-identity residuals.

A trajectory (u, eta) solves the equation in the generalized sense when

    R_gen = int phi u(t) - int phi u0 - (1/2) int_0^t int phi'' eta   = 0

for every smooth compactly supported phi with phi'(0) = 0.  The weak
form integrates by parts once,

    R_weak = int phi u(t) - int phi u0 + (1/2) int_0^t int phi' eta' ,

and the boundary-corrected form keeps the boundary term explicit,

    R_bnd = int phi u(t) - int phi u0
            - (1/2) int_0^t phi'(0) eta(s,0) ds - (1/2) int int phi'' eta ,

which drops the phi'(0) = 0 restriction: integrating the weak form by
parts once more produces exactly that boundary term.

Quadrature follows the solver: midpoint in space on cell centers,
trapezoid in time over stored snapshots.  The module also provides the
bump/plateau generators, the cutoff phi_eps that flattens a test
function near 0 while keeping closed-form derivatives, and the even
mollifier used on whole-line extensions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def _vectorized(fn):
    def g(x):
        x1 = np.asarray(x, dtype=np.float64)
        scalar = x1.ndim == 0
        out = fn(np.atleast_1d(x1))
        return float(out[0]) if scalar else out
    return g


@dataclass
class TestFunction:
    f: object
    df: object
    d2f: object
    support: tuple
    derivative_zero_at_origin: bool
    name: str

    def __call__(self, x):
        return self.f(x)

    def spot_check(self, pts, h=1e-5, rtol=1e-6):
        """Finite-difference agreement of df/d2f away from support edges."""
        pts = np.asarray(pts, dtype=np.float64)
        f = self.f
        d1 = (f(pts + h) - f(pts - h)) / (2.0 * h)
        d2 = (f(pts + h) - 2.0 * f(pts) + f(pts - h)) / (h * h)
        scale1 = np.max(np.abs(self.df(pts))) + 1.0
        scale2 = np.max(np.abs(self.d2f(pts))) + 1.0
        ok1 = np.max(np.abs(d1 - self.df(pts))) <= rtol * scale1
        ok2 = np.max(np.abs(d2 - self.d2f(pts))) <= 100 * rtol * scale2
        return bool(ok1 and ok2)


def quad(fn, a, b, panels=16, order=16):
    """Composite Gauss-Legendre integral of fn over [a, b]."""
    if b <= a:
        return 0.0
    y, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (lo + hi)
        rad = 0.5 * (hi - lo)
        total += rad * float(np.sum(w * fn(mid + rad * y)))
    return total


# ---------------------------------------------------------------- shapes

def _bump_parts(y):
    """exp(-1/(1-y^2)) on |y|<1 with first and second derivative."""
    b = np.zeros_like(y)
    d1 = np.zeros_like(y)
    d2 = np.zeros_like(y)
    q = 1.0 - y * y
    m = q > 1e-12
    ym = y[m]
    qm = q[m]
    bm = np.exp(-1.0 / qm)
    h = -2.0 * ym / (qm * qm)
    hp = -2.0 / (qm * qm) - 8.0 * ym * ym / (qm * qm * qm)
    b[m] = bm
    d1[m] = bm * h
    d2[m] = bm * (h * h + hp)
    return b, d1, d2


def make_bump(center, radius, flat_at_zero=False):
    """Smooth bump scaled to peak 1 on (center-radius, center+radius).

    With flat_at_zero and a support that would cross 0, the argument is
    composed with x -> x^2 so the function is even in x and its
    derivative vanishes at the origin by the chain rule.
    """
    if radius <= 0.0:
        raise ValueError("bump radius must be positive")
    c = float(center)
    r = float(radius)
    e = math.e
    if flat_at_zero and c - r < 0.0:
        reach = c + r

        def f(x):
            return e * _bump_parts((x / reach) ** 2)[0]

        def df(x):
            _, b1, _ = _bump_parts((x / reach) ** 2)
            return e * b1 * (2.0 * x / reach ** 2)

        def d2f(x):
            _, b1, b2 = _bump_parts((x / reach) ** 2)
            return e * (b2 * (2.0 * x / reach ** 2) ** 2 + b1 * (2.0 / reach ** 2))

        return TestFunction(_vectorized(f), _vectorized(df), _vectorized(d2f),
                            (0.0, reach), True, f"flatbump(r={reach:g})")

    def f(x):
        return e * _bump_parts((x - c) / r)[0]

    def df(x):
        return e * _bump_parts((x - c) / r)[1] / r

    def d2f(x):
        return e * _bump_parts((x - c) / r)[2] / (r * r)

    return TestFunction(_vectorized(f), _vectorized(df), _vectorized(d2f),
                        (c - r, c + r), c - r >= 0.0,
                        f"bump(c={c:g},r={r:g})")


def _smoothstep(t):
    s = t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    s1 = t * t * (30.0 + t * (-60.0 + 30.0 * t))
    s2 = t * (60.0 + t * (-180.0 + 120.0 * t))
    return s, s1, s2


def make_plateau(lo, hi, ramp):
    """1 on [lo, hi], quintic smoothstep ramps to 0 over width ramp on
    each side; with lo = 0 the plateau starts flat at the origin."""
    if ramp <= 0.0 or hi <= lo or lo < 0.0:
        raise ValueError("plateau needs 0 <= lo < hi and ramp > 0")
    if 0.0 < lo < ramp:
        raise ValueError("rising ramp would cross the origin")

    def parts(x):
        f = np.zeros_like(x)
        d1 = np.zeros_like(x)
        d2 = np.zeros_like(x)
        flat = (x >= lo) & (x <= hi)
        f[flat] = 1.0
        if lo > 0.0:
            up = (x > lo - ramp) & (x < lo)
            t = (x[up] - (lo - ramp)) / ramp
            s, s1, s2 = _smoothstep(t)
            f[up] = s
            d1[up] = s1 / ramp
            d2[up] = s2 / (ramp * ramp)
        down = (x > hi) & (x < hi + ramp)
        t = (x[down] - hi) / ramp
        s, s1, s2 = _smoothstep(t)
        f[down] = 1.0 - s
        d1[down] = -s1 / ramp
        d2[down] = -s2 / (ramp * ramp)
        return f, d1, d2

    return TestFunction(_vectorized(lambda x: parts(x)[0]),
                        _vectorized(lambda x: parts(x)[1]),
                        _vectorized(lambda x: parts(x)[2]),
                        (max(lo - ramp, 0.0), hi + ramp), True,
                        f"plateau({lo:g},{hi:g},ramp={ramp:g})")


def build_family(count=12, x_hi=5.0):
    """Deterministic family of admissible test functions (phi'(0)=0)
    with supports inside [0, x_hi]: interior bumps at several scales,
    even bumps flat at the origin, and plateaus hugging the boundary."""
    s = x_hi / 5.0
    base = [
        make_bump(0.6 * s, 0.5 * s),
        make_bump(1.2 * s, 0.5 * s),
        make_bump(2.0 * s, 0.5 * s),
        make_bump(3.0 * s, 0.5 * s),
        make_bump(1.5 * s, 1.2 * s),
        make_bump(2.5 * s, 1.6 * s),
        make_bump(0.0, 0.8 * s, flat_at_zero=True),
        make_bump(0.0, 1.5 * s, flat_at_zero=True),
        make_bump(0.0, 2.5 * s, flat_at_zero=True),
        make_plateau(0.0, 1.0 * s, 0.8 * s),
        make_plateau(0.0, 2.0 * s, 0.8 * s),
        make_plateau(0.0, 3.2 * s, 0.8 * s),
    ]
    k = 0
    while len(base) < count:
        c = (0.4 + 0.35 * (k % 11)) * s
        base.append(make_bump(c, 0.3 * s))
        k += 1
    return base[:count]


# ---------------------------------------------------------------- cutoff

def cutoff_transform(phi, eps):
    """phi_eps with phi_eps' = chi_eps * phi': constant on [0, eps],
    untouched beyond 2*eps up to the additive constant c(eps), and equal
    to phi there since the constant cancels.  chi_eps is the quintic
    smoothstep ramp on [eps, 2*eps]."""
    if eps <= 0.0:
        raise ValueError("cutoff eps must be positive")
    eps = float(eps)

    def chi_parts(x):
        c = np.ones_like(x)
        c1 = np.zeros_like(x)
        c[x <= eps] = 0.0
        win = (x > eps) & (x < 2.0 * eps)
        t = (x[win] - eps) / eps
        s, s1, _ = _smoothstep(t)
        c[win] = s
        c1[win] = s1 / eps
        return c, c1

    def tail_int(x):
        # int_eps^x (1 - chi) phi', per point
        return quad(lambda y: (1.0 - chi_parts(y)[0]) * phi.df(y), eps, x,
                    panels=8, order=24)

    phi0 = float(phi(0.0))
    c_eps = float(phi(eps)) - phi0 + tail_int(2.0 * eps)

    def f(x):
        out = np.array(phi.f(x), dtype=np.float64, copy=True)
        out[x <= eps] = phi0 + c_eps
        win = np.nonzero((x > eps) & (x < 2.0 * eps))[0]
        for i in win:
            head = float(phi(eps)) - phi0 + tail_int(x[i])
            out[i] = float(phi(x[i])) + c_eps - head
        return out

    def df(x):
        return chi_parts(x)[0] * phi.df(x)

    def d2f(x):
        c, c1 = chi_parts(x)
        return c1 * phi.df(x) + c * phi.d2f(x)

    return TestFunction(_vectorized(f), _vectorized(df), _vectorized(d2f),
                        (0.0, max(phi.support[1], 2.0 * eps)), True,
                        f"{phi.name}|cutoff(eps={eps:g})"), c_eps


def even_extension(phi):
    """phi(|x|) on the whole line; C^1 at 0 when phi'(0) = 0."""

    def f(x):
        return phi.f(np.abs(x))

    def df(x):
        return np.sign(x) * phi.df(np.abs(x))

    def d2f(x):
        return phi.d2f(np.abs(x))

    hi = phi.support[1]
    return TestFunction(_vectorized(f), _vectorized(df), _vectorized(d2f),
                        (-hi, hi), phi.derivative_zero_at_origin,
                        f"even({phi.name})")


def mollify_even(phi_bar, eps, order=33):
    """Convolution with the even bump mollifier rho_eps, realized as a
    Gauss-Legendre sum whose weights are normalized to unit discrete
    mass, so the total integral is preserved exactly."""
    if eps <= 0.0:
        raise ValueError("mollifier eps must be positive")
    y, w = np.polynomial.legendre.leggauss(order)
    rho = np.exp(-1.0 / (1.0 - y * y))
    wn = w * rho / float(np.sum(w * rho))

    def conv(base):
        def g(x):
            out = np.zeros_like(x)
            for wj, yj in zip(wn, y):
                out += wj * base(x - eps * yj)
            return out
        return g

    lo, hi = phi_bar.support
    return TestFunction(_vectorized(conv(phi_bar.f)),
                        _vectorized(conv(phi_bar.df)),
                        _vectorized(conv(phi_bar.d2f)),
                        (lo - eps, hi + eps),
                        phi_bar.derivative_zero_at_origin,
                        f"mollify({phi_bar.name},eps={eps:g})")


# ---------------------------------------------------------------- residuals

@dataclass
class ResidualReport:
    form: str
    phi: str
    t: float
    value: float
    dx: float
    dt: float
    snapshots: int

    def to_dict(self):
        return {"form": self.form, "phi": self.phi, "t": self.t,
                "value": self.value, "dx": self.dx, "dt": self.dt,
                "snapshots": self.snapshots}


def _head_and_times(traj, phi, t):
    idx = traj.index_of(t)
    x = traj.grid.centers
    dx = traj.grid.dx
    pv = phi.f(x)
    head = float(np.sum(pv * (traj.densities[idx].values
                              - traj.densities[0].values)) * dx)
    return idx, x, dx, head


def generalized_residual(traj, phi, t):
    if not phi.derivative_zero_at_origin:
        raise ValueError(
            f"{phi.name}: generalized residual requires phi'(0) = 0")
    idx, x, dx, head = _head_and_times(traj, phi, t)
    w = phi.d2f(x)
    g = [float(np.sum(w * traj.etas[k].values) * dx) for k in range(idx + 1)]
    return head - 0.5 * float(np.trapezoid(g, traj.times[:idx + 1]))


def _eta_gradient(vals, dx):
    out = np.empty_like(vals)
    out[1:-1] = (vals[2:] - vals[:-2]) / (2.0 * dx)
    out[0] = (vals[1] - vals[0]) / dx
    out[-1] = (vals[-1] - vals[-2]) / dx
    return out


def weak_residual(traj, phi, t):
    idx, x, dx, head = _head_and_times(traj, phi, t)
    w = phi.df(x)
    g = [float(np.sum(w * _eta_gradient(traj.etas[k].values, dx)) * dx)
         for k in range(idx + 1)]
    return head + 0.5 * float(np.trapezoid(g, traj.times[:idx + 1]))


def boundary_form_residual(traj, phi, t):
    idx, x, dx, head = _head_and_times(traj, phi, t)
    w = phi.d2f(x)
    g = [float(np.sum(w * traj.etas[k].values) * dx) for k in range(idx + 1)]
    dphi0 = float(phi.df(0.0))
    # eta(s, 0) read from the first cell, order-0 extrapolation
    b = [dphi0 * float(traj.etas[k].values[0]) for k in range(idx + 1)]
    times = traj.times[:idx + 1]
    return (head - 0.5 * float(np.trapezoid(b, times))
            - 0.5 * float(np.trapezoid(g, times)))


_FORMS = {
    "generalized": generalized_residual,
    "weak": weak_residual,
    "boundary": boundary_form_residual,
}


def residual_report(traj, phi, t, form):
    if form not in _FORMS:
        raise ValueError(
            f"unknown residual form {form!r}; expected one of {sorted(_FORMS)}")
    value = _FORMS[form](traj, phi, t)
    return ResidualReport(form, phi.name, float(t), float(value),
                          traj.dx, traj.dt, len(traj.times))


def cutoff_ladder(traj, phi, t, eps_list=(0.2, 0.1, 0.05), floor=None):
    """Evaluate the boundary-form residual on phi_eps down the ladder.

    In the continuum every entry is zero on a true solution, so the
    successive differences only measure scheme error.  The pass rule is
    therefore band-monotone: each difference must either shrink or sit
    below 10x the quadrature floor, and the last one must be inside
    that band.  The floor defaults to |generalized - weak| for phi
    flattened at the largest eps, the measured summation-by-parts
    error scale of this trajectory.
    """
    values = []
    for eps in eps_list:
        phi_eps, _ = cutoff_transform(phi, eps)
        values.append(boundary_form_residual(traj, phi_eps, t))
    diffs = [abs(b - a) for a, b in zip(values[:-1], values[1:])]
    if floor is None:
        ref, _ = cutoff_transform(phi, eps_list[0])
        floor = abs(generalized_residual(traj, ref, t)
                    - weak_residual(traj, ref, t))
        floor = max(floor, 1e-15)
    band = 10.0 * floor
    ok = diffs[-1] <= band
    for a, b in zip(diffs[:-1], diffs[1:]):
        if b > a and b > band:
            ok = False
    return {"eps": list(eps_list), "values": values, "diffs": diffs,
            "floor": floor, "band": band, "passed": bool(ok),
            "weak_reference": weak_residual(traj, phi, t)}
