import numpy as np
import pytest

from pmneumann.reference import (brownian_local_time_mean,
                                 halfline_images_density,
                                 reflected_bm_density,
                                 wholeline_even_density)


def test_images_density_initial_condition():
    x = np.array([0.1, 0.5, 0.99, 1.01, 2.0])
    np.testing.assert_array_equal(halfline_images_density(x, 0.0),
                                  [1.0, 1.0, 1.0, 0.0, 0.0])


def test_images_density_unit_mass_and_flux():
    x = np.linspace(0.0, 30.0, 60001)
    for t in (0.05, 0.5, 2.0):
        u = halfline_images_density(x, t)
        assert np.trapezoid(u, x) == pytest.approx(1.0, abs=1e-6)
        # even extension means zero slope at the boundary
        h = 1e-6
        slope = (halfline_images_density(np.array([h]), t)[0]
                 - halfline_images_density(np.array([0.0]), t)[0]) / h
        assert abs(slope) < 1e-4


def test_images_density_solves_heat_equation():
    x = np.linspace(0.2, 3.0, 15)
    t, dt, h = 0.4, 1e-5, 1e-4
    du_dt = (halfline_images_density(x, t + dt)
             - halfline_images_density(x, t - dt)) / (2 * dt)
    lap = (halfline_images_density(x + h, t)
           - 2 * halfline_images_density(x, t)
           + halfline_images_density(x - h, t)) / h ** 2
    np.testing.assert_allclose(du_dt, 0.5 * lap, atol=1e-5)


def test_wholeline_matches_half():
    x = np.linspace(-3, 3, 61)
    u = wholeline_even_density(x, 0.3)
    np.testing.assert_allclose(u, u[::-1], atol=1e-15)
    np.testing.assert_allclose(2.0 * u[x >= 0],
                               halfline_images_density(x[x >= 0], 0.3))
    assert np.all(reflected_bm_density(x[x >= 0], 0.3)
                  == halfline_images_density(x[x >= 0], 0.3))


def test_local_time_mean_values():
    assert brownian_local_time_mean(1.0) == pytest.approx(0.7978845608)
    assert brownian_local_time_mean(0.25) == pytest.approx(0.5 * 0.7978845608)
