"""Vectorized numpy implementations of the hot kernels.

This is the fallback path selected by PMNEUMANN_BACKEND=numpy and the
reference the numba twin is tested against.  The implicit step uses a
red-black ordering so the Gauss-Seidel sweep vectorizes; on symmetric
whole-line grids a Jacobi sweep is used instead because it commutes
with the mirror map in IEEE arithmetic (see pde.step_implicit).
"""

import numpy as np

from . import _encoding as enc


# ---------------------------------------------------------------- graph eval

def beta_right_base(kind, aux, w):
    """Right limit of the base graph at w >= 0 (vectorized)."""
    w = np.atleast_1d(np.asarray(w, dtype=np.float64))
    if kind == enc.ZERO:
        return np.zeros_like(w)
    if kind == enc.LINEAR:
        return aux[0] * w
    if kind == enc.POWER:
        return aux[0] * np.power(w, aux[1])
    if kind == enc.STOPPED:
        return aux[0] * np.maximum(w - aux[1], 0.0)
    if kind == enc.SATURATING:
        return w * w / (1.0 + w)
    if kind == enc.PWL:
        xs, yl, yr, end_slope = enc.pwl_unpack(aux)
        k = xs.size
        idx = np.clip(np.searchsorted(xs, w, side="right") - 1, 0, k - 1)
        out = np.empty_like(w)
        last = idx == k - 1
        if k > 1:
            seg = ~last
            i = idx[seg]
            slope = (yl[i + 1] - yr[i]) / (xs[i + 1] - xs[i])
            out[seg] = yr[i] + slope * (w[seg] - xs[i])
        out[last] = yr[k - 1] + end_slope * (w[last] - xs[k - 1])
        return out
    raise ValueError("unknown graph kind %r" % kind)


def beta_left_base(kind, aux, w):
    """Left limit of the base graph; differs from the right limit only
    at PWL breakpoints (at w = 0 the table value yl[0] is returned)."""
    w = np.atleast_1d(np.asarray(w, dtype=np.float64))
    out = beta_right_base(kind, aux, w)
    if kind == enc.PWL:
        xs, yl, _, _ = enc.pwl_unpack(aux)
        pos = np.searchsorted(xs, w, side="left")
        hit = (pos < xs.size) & (xs[np.minimum(pos, xs.size - 1)] == w)
        out[hit] = yl[pos[hit]]
    return out


def beta_right(kind, pre, post, aux, u):
    u = np.asarray(u, dtype=np.float64)
    scalar = u.ndim == 0
    out = post * beta_right_base(kind, aux, pre * np.atleast_1d(u))
    return float(out[0]) if scalar else out


def beta_left(kind, pre, post, aux, u):
    u = np.asarray(u, dtype=np.float64)
    scalar = u.ndim == 0
    out = post * beta_left_base(kind, aux, pre * np.atleast_1d(u))
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------- resolvent

def _resolvent_pwl(aux, pre, post, mu, y):
    xs, yl, yr, end_slope = enc.pwl_unpack(aux)
    k = xs.size
    mu_t = mu * (post * pre)
    y_t = y * pre
    w = np.zeros_like(y_t)
    eta = np.zeros_like(y_t)
    done = np.zeros(y_t.shape, dtype=bool)

    # jump absorption windows first
    for j in range(k):
        if yr[j] > yl[j]:
            m = ~done & (y_t >= xs[j] + mu_t * yl[j]) & (y_t <= xs[j] + mu_t * yr[j])
            if m.any():
                w[m] = xs[j]
                done |= m

    def seg_slope(j):
        if j < k - 1:
            return (yl[j + 1] - yr[j]) / (xs[j + 1] - xs[j])
        return end_slope

    for slack in (0.0, 1e-12):
        if done.all():
            break
        for j in range(k):
            s = seg_slope(j)
            b = yr[j] - s * xs[j]
            cand = (y_t - mu_t * b) / (1.0 + mu_t * s)
            lo = xs[j] - slack * (1.0 + xs[j])
            if j < k - 1:
                hi = xs[j + 1] + slack * (1.0 + xs[j + 1])
                ok = ~done & (cand >= lo) & (cand < hi)
            else:
                ok = ~done & (cand >= lo)
            if ok.any():
                cw = cand[ok]
                if slack > 0.0:
                    cw = np.maximum(cw, xs[j])
                w[ok] = cw
                eta[ok] = post * (yr[j] + s * (cw - xs[j]))
                done |= ok
    if not done.all():
        raise FloatingPointError("pwl resolvent failed to bracket some cells")
    u = w / pre
    absorbed = eta == 0.0
    # jump-absorbed cells take the balance value eta = (y-u)/mu
    jump_mask = np.zeros_like(done)
    for j in range(k):
        if yr[j] > yl[j]:
            jump_mask |= w == xs[j]
    if jump_mask.any():
        mu_arr = np.broadcast_to(np.asarray(mu, dtype=np.float64), y.shape)
        eta[jump_mask] = (y[jump_mask] - u[jump_mask]) / mu_arr[jump_mask]
    del absorbed
    return u, eta


def resolvent_batch(kind, pre, post, aux, mu, y):
    """Solve u + mu*beta(u) = y per element, beta the (kind,pre,post,aux)
    graph.  mu may be a scalar or an array broadcastable to y.  Returns
    (u, eta) with u >= 0 and eta a value of the filled graph at u."""
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    if kind == enc.ZERO:
        return y.copy(), np.zeros_like(y)
    if kind == enc.LINEAR:
        s = post * aux[0] * pre
        u = y / (1.0 + mu * s)
        return u, s * u
    if kind == enc.STOPPED:
        s = post * aux[0] * pre
        cut = aux[1] / pre
        u_above = (y + mu * s * cut) / (1.0 + mu * s)
        u = np.where(y <= cut, y, u_above)
        return u, s * np.maximum(u - cut, 0.0)
    if kind == enc.SATURATING:
        a = pre * (1.0 + mu * post * pre)
        b = 1.0 - y * pre
        disc = np.sqrt(b * b + 4.0 * a * y)
        u = np.where(b >= 0.0, 2.0 * y / (b + disc + (b + disc == 0.0)),
                     (disc - b) / (2.0 * a))
        w = pre * u
        return u, post * (w * w / (1.0 + w))
    if kind == enc.POWER:
        a_eff = post * aux[0] * pre ** aux[1]
        m = aux[1]
        c = mu * a_eff
        u = y.copy()
        for _ in range(100):
            w = np.maximum(u, 1e-300)
            f = u + c * np.power(w, m) - y
            if np.all(np.abs(f) <= 1e-14 * np.maximum(1.0, y)):
                break
            fp = 1.0 + c * m * np.power(w, m - 1.0)
            u = np.clip(u - f / fp, 0.0, y)
        u[y == 0.0] = 0.0
        return u, a_eff * np.power(np.maximum(u, 0.0), m)
    if kind == enc.PWL:
        return _resolvent_pwl(aux, pre, post, mu, y)
    raise ValueError("unknown graph kind %r" % kind)


# ---------------------------------------------------------------- pde step

def implicit_step(rhs, eta0, kind, pre, post, aux, lam, rtol, max_sweeps, jacobi):
    """One implicit cell-balance solve u - lam*D2(eta) = rhs with
    zero-flux ghosts.  Returns (u_next, eta, sweeps, residual) where
    u_next comes from the flux-form update so mass telescopes exactly.

    jacobi=True uses simultaneous updates (mirror-equivariant in IEEE
    arithmetic, required on symmetric whole-line grids); otherwise a
    red-black Gauss-Seidel ordering is used.
    """
    n = rhs.size
    mu = np.full(n, 2.0 * lam)
    mu[0] = lam
    mu[-1] = lam
    u = rhs.copy()
    eta = eta0.copy()
    sweeps = 0
    resid = np.inf
    while sweeps < max_sweeps:
        sweeps += 1
        if jacobi:
            nb = np.zeros(n)
            nb[1:] += eta[:-1]
            nb[:-1] += eta[1:]
            u, eta = resolvent_batch(kind, pre, post, aux, mu, rhs + lam * nb)
        else:
            for start in (0, 1):
                idx = np.arange(start, n, 2)
                nb = np.zeros(idx.size)
                if start == 0:
                    nb[1:] += eta[idx[1:] - 1]
                else:
                    nb += eta[idx - 1]
                inner = idx + 1 <= n - 1
                nb[inner] += eta[idx[inner] + 1]
                uu, ee = resolvent_batch(kind, pre, post, aux, mu[idx], rhs[idx] + lam * nb)
                u[idx] = uu
                eta[idx] = ee
        nb = np.zeros(n)
        nb[1:] += eta[:-1]
        nb[:-1] += eta[1:]
        resid = float(np.max(np.abs(u + mu * eta - lam * nb - rhs)))
        if resid < rtol:
            break
    f = lam * np.diff(eta)
    delta = np.zeros(n)
    delta[:-1] += f
    delta[1:] -= f
    return rhs + delta, eta, sweeps, resid


# ---------------------------------------------------------------- particles

def chi_at(pos, chi_cells, chi_zero, x_lo, dx):
    """Coefficient lookup on the piecewise-constant density grid.
    Positions outside the grid read the zero-density policy value."""
    idx = np.floor((pos - x_lo) / dx).astype(np.int64)
    inside = (idx >= 0) & (idx < chi_cells.size)
    chi = np.where(inside, chi_cells[np.clip(idx, 0, chi_cells.size - 1)], chi_zero)
    return chi, inside, idx


def em_update(pos, xi, chi_cells, chi_zero, zero_dens, x_lo, dx, dt, sqrt_dt,
              occ, eps):
    """Whole-line Euler step Y += chi(Y)*sqrt(dt)*xi.  Accumulates the
    occupation integral 1_{|Y|<eps} chi^2 dt into occ when eps > 0.
    Returns (new_pos, zero_density_exposures)."""
    chi, inside, idx = chi_at(pos, chi_cells, chi_zero, x_lo, dx)
    exposed = ~inside | zero_dens[np.clip(idx, 0, zero_dens.size - 1)] & inside
    if eps > 0.0:
        occ += np.where(np.abs(pos) < eps, (chi * chi) * dt, 0.0)
    new_pos = pos + chi * (sqrt_dt * xi)
    return new_pos, int(np.count_nonzero(exposed))


def reflect_update(pos, xi, chi_cells, chi_zero, zero_dens, x_lo, dx, dt,
                   sqrt_dt, big_k, xdk, occ, eps):
    """Mirror-reflection step for the nonnegative system: p = X + chi*sqrt(dt)*xi,
    X <- |p|, dK = |p| - p.  Accumulates K, sum(X*dK) and the one-sided
    occupation integral 1_{X<eps} chi^2 dt.  Returns (new_pos, exposures)."""
    chi, inside, idx = chi_at(pos, chi_cells, chi_zero, x_lo, dx)
    exposed = ~inside | zero_dens[np.clip(idx, 0, zero_dens.size - 1)] & inside
    if eps > 0.0:
        occ += np.where(pos < eps, (chi * chi) * dt, 0.0)
    p = pos + chi * (sqrt_dt * xi)
    new_pos = np.abs(p)
    dk = new_pos - p
    big_k += dk
    xdk += new_pos * dk
    return new_pos, int(np.count_nonzero(exposed))


def histogram_counts(pos, x_lo, dx, n):
    """Integer cell counts; out-of-range positions are clipped to the
    edge cells so total count (hence histogram mass) is exact."""
    idx = np.floor((pos - x_lo) / dx).astype(np.int64)
    np.clip(idx, 0, n - 1, out=idx)
    return np.bincount(idx, minlength=n)
