"""Closed-form references for the linear case beta = id.

The half-line Neumann solution from indicator data is the method of
images applied to the heat kernel of variance t (the density of
reflected Brownian motion started uniformly on [a, b]).
"""

import math

import numpy as np
from scipy.special import ndtr


def halfline_images_density(x, t, a=0.0, b=1.0):
    """Solution of du/dt = (1/2)u_xx on x >= 0, zero flux at 0, from
    u0 = indicator(a,b)/(b-a)."""
    x = np.asarray(x, dtype=np.float64)
    if t == 0.0:
        return np.where((x >= a) & (x < b), 1.0 / (b - a), 0.0)
    s = math.sqrt(t)
    direct = ndtr((x - a) / s) - ndtr((x - b) / s)
    image = ndtr((x + b) / s) - ndtr((x + a) / s)
    return (direct + image) / (b - a)


def wholeline_even_density(x, t, a=0.0, b=1.0):
    """The mirrored solution ubar(t,x) = 0.5 * v(t, |x|)."""
    x = np.asarray(x, dtype=np.float64)
    return 0.5 * halfline_images_density(np.abs(x), t, a, b)


def reflected_bm_density(x, t, a=0.0, b=1.0):
    """Marginal density of |B_t| with B_0 ~ Uniform(a,b); identical to
    the images solution."""
    return halfline_images_density(x, t, a, b)


def brownian_local_time_mean(t):
    """E L_t(0) for standard Brownian motion from 0: E|B_t| = sqrt(2t/pi)."""
    return math.sqrt(2.0 * t / math.pi)
