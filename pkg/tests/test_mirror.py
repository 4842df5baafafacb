import numpy as np
import pytest

from pmneumann import graphs
from pmneumann.errors import EvennessError, FieldError, GridError
from pmneumann.fields import DensityField, EtaField, Grid1D
from pmneumann.mirror import (check_even, extend_beta, extend_initial,
                              extend_phi, restrict_solution)


def indicator_field(grid, lo, hi):
    c = grid.centers
    vals = ((c > lo) & (c < hi)).astype(float)
    return DensityField(grid, vals / (np.sum(vals) * grid.dx))


def test_extend_initial_halves_and_mirrors():
    g = Grid1D.half_line(2.0, 0.1)
    u0 = indicator_field(g, 0.0, 1.0)
    ubar = extend_initial(u0)
    assert ubar.grid.is_whole and ubar.grid.x_max == 2.0
    assert ubar.mass == pytest.approx(1.0, abs=1e-14)
    assert check_even(ubar) == 0.0
    half = ubar.grid.n // 2
    np.testing.assert_array_equal(ubar.values[half:], 0.5 * u0.values)


def test_extend_initial_guards():
    g = Grid1D.half_line(2.0, 0.1)
    u0 = indicator_field(g, 0.0, 1.0)
    with pytest.raises(FieldError):
        extend_initial(u0.with_values(2.0 * u0.values))
    whole = extend_initial(u0)
    with pytest.raises(GridError):
        extend_initial(whole)


def test_round_trip_is_exact():
    g = Grid1D.half_line(3.0, 0.05)
    u0 = indicator_field(g, 0.5, 2.5)
    back = restrict_solution(extend_initial(u0))
    assert back.grid == g
    np.testing.assert_array_equal(back.values, u0.values)


def test_extend_beta_dictionary():
    beta = graphs.saturating()
    bbar = extend_beta(beta)
    for u in (0.0, 0.3, 1.0, 4.0):
        want = 0.5 * beta.eval(2.0 * u)[0]
        got = bbar.eval(u)[0]
        assert got == pytest.approx(want, abs=1e-14)
    # identity is a fixed point of the dictionary
    ident = extend_beta(graphs.identity())
    assert ident.eval(0.7)[0] == pytest.approx(0.7, abs=1e-15)


def test_extend_phi_dictionary():
    phi = graphs.phi_from_beta(graphs.saturating())
    pbar = extend_phi(phi)
    for u in (0.1, 0.5, 2.0):
        lo, hi = pbar.eval(u)
        want_lo, want_hi = phi.eval(2.0 * u)
        assert lo == pytest.approx(want_lo, abs=1e-14)
        assert hi == pytest.approx(want_hi, abs=1e-14)
    assert pbar.value_at_zero == phi.value_at_zero


def test_check_even_pinned_values():
    g = Grid1D.symmetric_whole_line(2.0, 0.1)
    c = g.centers
    # odd-ish field: indicator of (0, 1) has all its mirror gap on x>0
    f = EtaField(g, ((c > 0) & (c < 1)).astype(float))
    assert check_even(f) == pytest.approx(1.0, abs=1e-12)
    # even field plus eps*sign(x) shifts every pair by 2*eps
    eps = 1e-3
    even = np.exp(-c ** 2)
    f2 = EtaField(g, even + eps * np.sign(c))
    assert check_even(f2) == pytest.approx(2.0 * eps * g.x_max, abs=1e-12)
    with pytest.raises(GridError):
        check_even(EtaField(Grid1D.half_line(1.0, 0.1), np.zeros(10)))


def test_restrict_solution_rejects_asymmetry():
    g = Grid1D.symmetric_whole_line(1.0, 0.1)
    c = g.centers
    vals = np.exp(-c ** 2)
    vals = vals / (vals.sum() * g.dx)
    skew = vals * (1.0 + 0.01 * np.sign(c))
    with pytest.raises(EvennessError):
        restrict_solution(DensityField(g, skew), tol=1e-8)
    # doubled mass on the restriction
    v = restrict_solution(DensityField(g, vals))
    assert v.mass == pytest.approx(1.0, abs=1e-12)
