import numpy as np
import pytest

from pmneumann import kernels
from pmneumann.fields import DensityField, Grid1D
from pmneumann.reference import halfline_images_density


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    kernels.warmup()


@pytest.fixture()
def unit_indicator():
    """u0 = 1_[0,1] on the standard half-line test grid."""
    grid = Grid1D.half_line(5.0, 0.02)
    vals = halfline_images_density(grid.centers, 0.0)
    return DensityField(grid, vals, t=0.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240814)
