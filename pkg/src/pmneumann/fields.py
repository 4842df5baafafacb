"""Uniform cell-centered grids and the gridded fields living on them.

Two grid kinds: the half-line [0, X_max] with first cell center at dx/2,
and the symmetric whole line [-X_max, X_max] whose cell centers sit at
+-(i+1/2)dx, so mirror symmetry is exact index arithmetic.  Fields are
immutable value objects (the array is frozen) carrying their time and a
cached midpoint-rule mass.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import FieldError, GridError

HALF = "half_line"
WHOLE = "symmetric_whole_line"


class Grid1D:

    def __init__(self, kind, x_lo, dx, n):
        if kind not in (HALF, WHOLE):
            raise GridError(f"unknown grid kind {kind!r}")
        if dx <= 0.0 or n < 1:
            raise GridError("grid needs dx > 0 and n >= 1")
        self.kind = kind
        self.x_lo = float(x_lo)
        self.dx = float(dx)
        self.n = int(n)
        self._centers = None

    @classmethod
    def half_line(cls, x_max, dx):
        n = int(round(x_max / dx))
        if n < 1 or abs(n * dx - x_max) > 1e-9 * max(1.0, x_max):
            raise GridError(f"x_max={x_max} is not a whole number of cells of dx={dx}")
        return cls(HALF, 0.0, dx, n)

    @classmethod
    def symmetric_whole_line(cls, x_max, dx):
        half = cls.half_line(x_max, dx)
        return cls(WHOLE, -x_max, dx, 2 * half.n)

    @property
    def x_max(self):
        return self.x_lo + self.n * self.dx

    @property
    def centers(self):
        if self._centers is None:
            c = self.x_lo + (np.arange(self.n) + 0.5) * self.dx
            c.setflags(write=False)
            self._centers = c
        return self._centers

    @property
    def edges(self):
        return self.x_lo + np.arange(self.n + 1) * self.dx

    @property
    def is_half(self):
        return self.kind == HALF

    @property
    def is_whole(self):
        return self.kind == WHOLE

    def half_counterpart(self):
        """The half-line grid with the same dx covering [0, x_max]."""
        if self.is_half:
            return self
        return Grid1D(HALF, 0.0, self.dx, self.n // 2)

    def __eq__(self, other):
        return (isinstance(other, Grid1D) and self.kind == other.kind
                and self.x_lo == other.x_lo and self.dx == other.dx
                and self.n == other.n)

    def __hash__(self):
        return hash((self.kind, self.x_lo, self.dx, self.n))

    def __repr__(self):
        return f"Grid1D({self.kind}, dx={self.dx:g}, n={self.n})"

    def to_dict(self):
        return {"kind": self.kind, "x_lo": self.x_lo, "dx": self.dx, "n": self.n}

    @classmethod
    def from_dict(cls, d):
        return cls(d["kind"], d["x_lo"], d["dx"], d["n"])


class _GriddedField:

    role = "field"

    def __init__(self, grid, values, t=0.0):
        values = np.array(values, dtype=np.float64)
        if values.shape != (grid.n,):
            raise FieldError(
                f"values shape {values.shape} does not match grid n={grid.n}")
        if not np.all(np.isfinite(values)):
            raise FieldError("field values must be finite")
        values.setflags(write=False)
        self.grid = grid
        self.values = values
        self.t = float(t)

    def with_values(self, values, t=None):
        return type(self)(self.grid, values, self.t if t is None else t)

    @property
    def mass(self):
        return float(np.sum(self.values) * self.grid.dx)

    @property
    def min_value(self):
        return float(np.min(self.values))

    @property
    def max_value(self):
        return float(np.max(self.values))

    def clipped(self):
        """Values with the round-off negatives zeroed, for reporting."""
        return np.maximum(self.values, 0.0)

    # -- serialization ---------------------------------------------------

    _csv_header = "x,value"

    def to_csv(self, path):
        data = np.column_stack([self.grid.centers, self.values])
        np.savetxt(path, data, delimiter=",", header=self._csv_header,
                   comments="", fmt="%.17g")

    @classmethod
    def from_csv(cls, path, kind=HALF, t=0.0):
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        x, v = data[:, 0], data[:, 1]
        dx = float(x[1] - x[0]) if x.size > 1 else 2.0 * float(x[0])
        grid = Grid1D(kind, float(x[0]) - 0.5 * dx, dx, x.size)
        return cls(grid, v, t)

    def to_dict(self):
        return {"grid": self.grid.to_dict(), "t": self.t,
                "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(Grid1D.from_dict(d["grid"]), d["values"], d["t"])

    def save_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def __repr__(self):
        return (f"{type(self).__name__}(n={self.grid.n}, t={self.t:g}, "
                f"mass={self.mass:.6g})")


class DensityField(_GriddedField):
    """Gridded probability density; nonnegative up to round-off."""

    role = "density"
    _csv_header = "x,u"

    def __init__(self, grid, values, t=0.0):
        super().__init__(grid, values, t)
        mn = self.min_value
        if mn < -1e-12:
            raise FieldError(f"density has negative cell value {mn!r}")


class EtaField(_GriddedField):
    """The selection eta(t,x) in beta(u(t,x)) produced by the solver."""

    role = "eta"
    _csv_header = "x,eta"
