"""Kernel backend selection.

The hot loops (implicit sweeps, particle updates) exist twice: a numba
njit version and a vectorized pure-numpy version.  The environment
variable PMNEUMANN_BACKEND picks one:

    auto   use numba when importable (default)
    numba  require numba, fail loudly if missing
    numpy  force the pure-numpy path

Both paths solve the same systems to the same tolerances; agreement is
covered by tests and timed by benchmarks/bench_kernels.py.
"""

import os

try:
    import numba  # noqa: F401
    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

_requested = os.environ.get("PMNEUMANN_BACKEND", "auto").strip().lower()

if _requested not in ("auto", "numba", "numpy"):
    raise RuntimeError(
        "PMNEUMANN_BACKEND must be one of auto|numba|numpy, got %r" % _requested
    )

if _requested == "numba" and not HAS_NUMBA:
    raise RuntimeError("PMNEUMANN_BACKEND=numba but numba is not importable")

if _requested == "numpy":
    BACKEND = "numpy"
elif HAS_NUMBA:
    BACKEND = "numba"
else:
    BACKEND = "numpy"
