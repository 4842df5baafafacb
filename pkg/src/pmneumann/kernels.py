"""Backend dispatch for the hot kernels (see _backend for the env flag)."""

from ._backend import BACKEND, HAS_NUMBA  # noqa: F401
from . import _kernels_numpy as numpy_impl

if BACKEND == "numba":
    from . import _kernels_numba as _impl
else:
    _impl = numpy_impl

implicit_step = _impl.implicit_step
resolvent_batch = _impl.resolvent_batch
em_update = _impl.em_update
reflect_update = _impl.reflect_update
histogram_counts = _impl.histogram_counts

# graph evaluation is cheap bookkeeping; always the vectorized numpy code
beta_right = numpy_impl.beta_right
beta_left = numpy_impl.beta_left


def warmup():
    """Trigger jit compilation (or no-op on the numpy path)."""
    import numpy as np

    from . import _encoding as enc

    aux = np.array([1.0])
    rhs = np.array([0.4, 0.6, 0.2])
    eta = rhs.copy()
    implicit_step(rhs, eta, enc.LINEAR, 1.0, 1.0, aux, 0.5, 1e-12, 500, False)
    implicit_step(rhs, eta, enc.LINEAR, 1.0, 1.0, aux, 0.5, 1e-12, 500, True)
    resolvent_batch(enc.LINEAR, 1.0, 1.0, aux, np.array([1.0]), rhs)
    pos = np.array([0.1, 0.5])
    xi = np.array([0.3, -0.2])
    chi = np.array([1.0, 1.0])
    zd = np.array([False, False])
    occ = np.zeros(2)
    em_update(pos, xi, chi, 1.0, zd, 0.0, 0.5, 1e-3, np.sqrt(1e-3), occ, 0.01)
    kk = np.zeros(2)
    xdk = np.zeros(2)
    reflect_update(pos, xi, chi, 1.0, zd, 0.0, 0.5, 1e-3, np.sqrt(1e-3), kk,
                   xdk, occ, 0.01)
    histogram_counts(pos, 0.0, 0.5, 2)
