"""Numeric encoding of monotone graphs shared by both kernel backends.

A graph beta is stored as (kind, pre, post, aux) with

    beta(u) = post * base(pre * u)

where `base` is selected by `kind`.  The pre/post pair makes the family
closed under the half-line mirror transform beta_bar(u) = beta(2u)/2.

Kinds and their aux layout:

    ZERO        base(w) = 0                     aux = []
    LINEAR      base(w) = a*w                   aux = [a]
    POWER       base(w) = a*w**m                aux = [a, m]
    STOPPED     base(w) = a*max(w - uc, 0)      aux = [a, uc]
    SATURATING  base(w) = w**2 / (1 + w)        aux = []
    PWL         piecewise linear with jumps     aux = packed table

The PWL table packs K breakpoints xs (xs[0] == 0), left/right limits
yl/yr at each breakpoint and a final slope:

    aux = [K, xs[0..K-1], yl[0..K-1], yr[0..K-1], end_slope]

On [xs[k], xs[k+1]) the base value is yr[k] + s_k*(w - xs[k]) with
s_k = (yl[k+1] - yr[k]) / (xs[k+1] - xs[k]); beyond the last breakpoint
it is yr[K-1] + end_slope*(w - xs[K-1]).
"""

import numpy as np

ZERO = 0
LINEAR = 1
POWER = 2
STOPPED = 3
SATURATING = 4
PWL = 5

_EMPTY = np.zeros(0, dtype=np.float64)


def empty_aux():
    return _EMPTY


def pwl_pack(xs, yl, yr, end_slope):
    xs = np.asarray(xs, dtype=np.float64)
    yl = np.asarray(yl, dtype=np.float64)
    yr = np.asarray(yr, dtype=np.float64)
    k = xs.size
    if not (yl.size == k and yr.size == k):
        raise ValueError("pwl table arrays must share a length")
    aux = np.empty(3 * k + 2, dtype=np.float64)
    aux[0] = float(k)
    aux[1:1 + k] = xs
    aux[1 + k:1 + 2 * k] = yl
    aux[1 + 2 * k:1 + 3 * k] = yr
    aux[1 + 3 * k] = float(end_slope)
    return aux


def pwl_unpack(aux):
    k = int(aux[0])
    xs = aux[1:1 + k]
    yl = aux[1 + k:1 + 2 * k]
    yr = aux[1 + 2 * k:1 + 3 * k]
    end_slope = float(aux[1 + 3 * k])
    return xs, yl, yr, end_slope
