import numpy as np
import pytest

from pmneumann import graphs, mirror, pde
from pmneumann.errors import ConfigError, ConvergenceError
from pmneumann.fields import DensityField, Grid1D
from pmneumann.reference import halfline_images_density


def test_identity_matches_image_sum():
    # beta = id is reflected heat flow: the image-charge series is exact
    grid = Grid1D.half_line(5.0, 0.02)
    u0 = DensityField(grid, halfline_images_density(grid.centers, 0.0))
    traj = pde.solve(u0, graphs.identity(), 0.25, 5e-4,
                     snapshot_times=[0.1, 0.25])
    for t in (0.1, 0.25):
        ref = halfline_images_density(grid.centers, t)
        err = np.sum(np.abs(traj.density_at(t).values - ref)) * grid.dx
        assert err < 2e-2, f"t={t}: L1 error {err}"


def test_ledger_caps(unit_indicator):
    traj = pde.solve(unit_indicator, graphs.saturating(), 0.1, 1e-3,
                     declared_breakpoints=[0.0])
    led = traj.ledger
    assert led["steps"] == 100
    assert led["mass_drift_max"] <= 1e-10
    assert led["min_value"] >= -1e-10
    assert led["resid_max"] <= 5e-13
    assert led["asym_max"] is None  # half-line run


def test_step_contract(unit_indicator):
    u1, eta1 = pde.step_implicit(unit_indicator, graphs.identity(), 1e-3)
    assert u1.t == pytest.approx(1e-3)
    assert u1.mass == pytest.approx(unit_indicator.mass, abs=1e-12)
    # for beta = id the selection is the density itself
    np.testing.assert_allclose(eta1.values, u1.values, atol=1e-12)


def test_boundary_flux_ghost_vs_interior(unit_indicator):
    u1, eta1 = pde.step_implicit(unit_indicator, graphs.identity(), 1e-3)
    assert pde.boundary_flux(eta1, stencil="ghost") == 0.0
    # negative control on a field with slope 3 at the origin
    from pmneumann.fields import EtaField
    g = eta1.grid
    sloped = EtaField(g, 3.0 * g.centers)
    assert pde.boundary_flux(sloped, stencil="ghost") == 0.0
    assert pde.boundary_flux(sloped, stencil="interior") == pytest.approx(1.5)
    with pytest.raises(ConfigError):
        pde.boundary_flux(sloped, stencil="magic")


def test_snapshot_quantization_rejected(unit_indicator):
    with pytest.raises(ConfigError):
        pde.solve(unit_indicator, graphs.identity(), 0.1, 1e-3,
                  snapshot_times=[0.0305])
    with pytest.raises(ConfigError):
        pde.solve(unit_indicator, graphs.identity(), 0.1, 3e-3)


def test_validation_gate(unit_indicator):
    # degenerate graph without declared breakpoints is refused ...
    with pytest.raises(ConfigError):
        pde.solve(unit_indicator, graphs.saturating(), 0.01, 1e-3)
    # ... unless validation is explicitly waived
    traj = pde.solve(unit_indicator, graphs.saturating(), 0.01, 1e-3,
                     validate=False)
    assert len(traj.times) == 2


def test_stopped_graph_freezes_small_data():
    # u0 < u_c everywhere means beta(u) = 0 on the whole range: nothing moves
    grid = Grid1D.half_line(5.0, 0.02)
    c = grid.centers
    vals = ((c > 0) & (c < 0.5)).astype(float)
    u0 = DensityField(grid, vals / (vals.sum() * grid.dx))
    beta = graphs.stopped_linear(u_c=2.5)
    traj = pde.solve(u0, beta, 0.2, 1e-3, snapshot_times=[0.1, 0.2],
                     declared_breakpoints=[0.0])
    for t in (0.1, 0.2):
        gap = np.max(np.abs(traj.density_at(t).values - u0.values))
        assert gap <= 1e-12
        assert np.max(np.abs(traj.eta_at(t).values)) <= 1e-12


def test_route_equivalence_small():
    grid = Grid1D.half_line(4.0, 0.05)
    c = grid.centers
    vals = ((c > 0) & (c < 1)).astype(float)
    u0 = DensityField(grid, vals / (vals.sum() * grid.dx))
    beta = graphs.identity()
    direct = pde.solve(u0, beta, 0.1, 1e-3, snapshot_times=[0.1])
    ubar = pde.solve(mirror.extend_initial(u0), mirror.extend_beta(beta),
                     0.1, 1e-3, snapshot_times=[0.1])
    back = mirror.restrict_solution(ubar.density_at(0.1))
    gap = np.sum(np.abs(direct.density_at(0.1).values - back.values)) * grid.dx
    assert gap <= 1e-6
    assert ubar.ledger["asym_max"] <= 1e-12


def test_convergence_error_surfaces(unit_indicator):
    with pytest.raises(ConvergenceError):
        pde.solve(unit_indicator, graphs.identity(), 0.01, 1e-2, max_sweeps=2)


def test_index_of_unknown_time(unit_indicator):
    traj = pde.solve(unit_indicator, graphs.identity(), 0.01, 1e-2)
    with pytest.raises(KeyError):
        traj.density_at(0.005)
