"""Numba njit implementations of the hot kernels.

Call-compatible with _kernels_numpy; the implicit step uses the classic
lexicographic Gauss-Seidel ordering (the numpy path uses red-black,
both converge to the same balance system within rtol).  Jacobi mode is
written so even input data stays bitwise even, matching the numpy path.
"""

import numpy as np
from numba import njit

from . import _encoding as enc

K_ZERO = enc.ZERO
K_LINEAR = enc.LINEAR
K_POWER = enc.POWER
K_STOPPED = enc.STOPPED
K_SATURATING = enc.SATURATING
K_PWL = enc.PWL


@njit(cache=True)
def _resolvent_scalar(kind, pre, post, aux, mu, y):
    if kind == K_ZERO:
        return y, 0.0
    if kind == K_LINEAR:
        s = post * aux[0] * pre
        u = y / (1.0 + mu * s)
        return u, s * u
    if kind == K_STOPPED:
        s = post * aux[0] * pre
        cut = aux[1] / pre
        if y <= cut:
            u = y
        else:
            u = (y + mu * s * cut) / (1.0 + mu * s)
        r = u - cut
        if r < 0.0:
            r = 0.0
        return u, s * r
    if kind == K_SATURATING:
        a = pre * (1.0 + mu * post * pre)
        b = 1.0 - y * pre
        disc = np.sqrt(b * b + 4.0 * a * y)
        if b >= 0.0:
            den = b + disc
            u = 0.0 if den == 0.0 else 2.0 * y / den
        else:
            u = (disc - b) / (2.0 * a)
        w = pre * u
        return u, post * (w * w / (1.0 + w))
    if kind == K_POWER:
        m = aux[1]
        a_eff = post * aux[0] * pre ** m
        c = mu * a_eff
        u = y
        tol = 1e-14 * (1.0 if y < 1.0 else y)
        for _ in range(100):
            w = u if u > 1e-300 else 1e-300
            f = u + c * w ** m - y
            if abs(f) <= tol:
                break
            fp = 1.0 + c * m * w ** (m - 1.0)
            u = u - f / fp
            if u < 0.0:
                u = 0.0
            if u > y:
                u = y
        if y == 0.0:
            u = 0.0
        w = u if u > 0.0 else 0.0
        return u, a_eff * w ** m
    # PWL
    k = int(aux[0])
    mu_t = mu * (post * pre)
    y_t = y * pre
    w = -1.0
    eta = 0.0
    found = False
    jumped = False
    for j in range(k):
        yl = aux[1 + k + j]
        yr = aux[1 + 2 * k + j]
        if yr > yl:
            xj = aux[1 + j]
            if y_t >= xj + mu_t * yl and y_t <= xj + mu_t * yr:
                w = xj
                found = True
                jumped = True
                break
    if not found:
        for pass_idx in range(2):
            slack = 0.0 if pass_idx == 0 else 1e-12
            for j in range(k):
                xj = aux[1 + j]
                yrj = aux[1 + 2 * k + j]
                if j < k - 1:
                    s = (aux[1 + k + j + 1] - yrj) / (aux[1 + j + 1] - xj)
                else:
                    s = aux[1 + 3 * k]
                b = yrj - s * xj
                cand = (y_t - mu_t * b) / (1.0 + mu_t * s)
                lo = xj - slack * (1.0 + xj)
                if j < k - 1:
                    xn = aux[1 + j + 1]
                    ok = cand >= lo and cand < xn + slack * (1.0 + xn)
                else:
                    ok = cand >= lo
                if ok:
                    cw = cand
                    if slack > 0.0 and cw < xj:
                        cw = xj
                    w = cw
                    eta = post * (yrj + s * (cw - xj))
                    found = True
                    break
            if found:
                break
    u = w / pre
    if jumped:
        eta = (y - u) / mu
    return u, eta


@njit(cache=True)
def resolvent_batch(kind, pre, post, aux, mu, y):
    n = y.size
    u = np.empty(n)
    eta = np.empty(n)
    for i in range(n):
        m = mu[i] if mu.size > 1 else mu[0]
        u[i], eta[i] = _resolvent_scalar(kind, pre, post, aux, m, y[i])
    return u, eta


@njit(cache=True)
def implicit_step(rhs, eta0, kind, pre, post, aux, lam, rtol, max_sweeps, jacobi):
    n = rhs.size
    u = rhs.copy()
    eta = eta0.copy()
    eta_old = np.empty(n)
    sweeps = 0
    resid = 1e300
    while sweeps < max_sweeps:
        sweeps += 1
        if jacobi:
            for i in range(n):
                eta_old[i] = eta[i]
            for i in range(n):
                nb = 0.0
                if i > 0:
                    nb = eta_old[i - 1]
                if i < n - 1:
                    nb = nb + eta_old[i + 1]
                mu_i = lam if (i == 0 or i == n - 1) else 2.0 * lam
                uu, ee = _resolvent_scalar(kind, pre, post, aux, mu_i, rhs[i] + lam * nb)
                u[i] = uu
                eta[i] = ee
        else:
            for i in range(n):
                nb = 0.0
                if i > 0:
                    nb = eta[i - 1]
                if i < n - 1:
                    nb = nb + eta[i + 1]
                mu_i = lam if (i == 0 or i == n - 1) else 2.0 * lam
                uu, ee = _resolvent_scalar(kind, pre, post, aux, mu_i, rhs[i] + lam * nb)
                u[i] = uu
                eta[i] = ee
        resid = 0.0
        for i in range(n):
            nb = 0.0
            if i > 0:
                nb = eta[i - 1]
            if i < n - 1:
                nb = nb + eta[i + 1]
            mu_i = lam if (i == 0 or i == n - 1) else 2.0 * lam
            r = u[i] + mu_i * eta[i] - lam * nb - rhs[i]
            if r < 0.0:
                r = -r
            if r > resid:
                resid = r
        if resid < rtol:
            break
    u_next = np.empty(n)
    prev_f = 0.0
    for i in range(n):
        f = lam * (eta[i + 1] - eta[i]) if i < n - 1 else 0.0
        u_next[i] = rhs[i] + (f - prev_f)
        prev_f = f
    return u_next, eta, sweeps, resid


@njit(cache=True)
def em_update(pos, xi, chi_cells, chi_zero, zero_dens, x_lo, dx, dt, sqrt_dt,
              occ, eps):
    n = pos.size
    ncell = chi_cells.size
    out = np.empty(n)
    exposed = 0
    for i in range(n):
        x = pos[i]
        idx = int(np.floor((x - x_lo) / dx))
        if 0 <= idx < ncell:
            chi = chi_cells[idx]
            if zero_dens[idx]:
                exposed += 1
        else:
            chi = chi_zero
            exposed += 1
        if eps > 0.0 and abs(x) < eps:
            occ[i] += (chi * chi) * dt
        out[i] = x + chi * (sqrt_dt * xi[i])
    return out, exposed


@njit(cache=True)
def reflect_update(pos, xi, chi_cells, chi_zero, zero_dens, x_lo, dx, dt,
                   sqrt_dt, big_k, xdk, occ, eps):
    n = pos.size
    ncell = chi_cells.size
    out = np.empty(n)
    exposed = 0
    for i in range(n):
        x = pos[i]
        idx = int(np.floor((x - x_lo) / dx))
        if 0 <= idx < ncell:
            chi = chi_cells[idx]
            if zero_dens[idx]:
                exposed += 1
        else:
            chi = chi_zero
            exposed += 1
        if eps > 0.0 and x < eps:
            occ[i] += (chi * chi) * dt
        p = x + chi * (sqrt_dt * xi[i])
        xn = abs(p)
        dk = xn - p
        big_k[i] += dk
        xdk[i] += xn * dk
        out[i] = xn
    return out, exposed


@njit(cache=True)
def histogram_counts(pos, x_lo, dx, n):
    counts = np.zeros(n, dtype=np.int64)
    for i in range(pos.size):
        idx = int(np.floor((pos[i] - x_lo) / dx))
        if idx < 0:
            idx = 0
        elif idx > n - 1:
            idx = n - 1
        counts[idx] += 1
    return counts
