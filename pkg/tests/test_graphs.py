"""Monotone graph catalog, resolvent, classification, validation."""

import numpy as np
import pytest

from pmneumann.errors import GraphError
from pmneumann.graphs import (classify, make_graph, make_selection,
                              phi_from_beta, validate_assumptions)


def test_identity_eval_and_growth():
    g = make_graph("identity")
    assert g.eval(2.0) == (2.0, 2.0)
    assert g.value_right(0.0) == 0.0
    assert g.growth_constant == 1.0


def test_eval_rejects_negative():
    g = make_graph("identity")
    with pytest.raises(GraphError):
        g.eval(-0.1)


def test_stopped_linear_values():
    g = make_graph("stopped_linear", u_c=1.0)
    assert g.eval(0.5) == (0.0, 0.0)
    assert g.eval(1.0) == (0.0, 0.0)
    assert g.eval(3.0) == (2.0, 2.0)


def test_jump_graph_filled_interval():
    g = make_graph("jump", a=1.0, lo=0.0, hi=1.0)
    lo, hi = g.eval(1.0)
    assert (lo, hi) == (0.0, 1.0)
    assert g.eval(0.5) == (0.0, 0.0)
    jumps = g.jumps
    assert len(jumps) == 1 and jumps[0].x == 1.0
    assert (jumps[0].left, jumps[0].right) == (0.0, 1.0)


def test_saturating_values():
    g = make_graph("saturating")
    u = np.array([0.0, 1.0, 3.0])
    np.testing.assert_allclose(g.value_right(u), u * u / (1.0 + u))


def test_power_monotone():
    g = make_graph("power", m=2.0)
    u = np.linspace(0.0, 4.0, 33)
    v = g.value_right(u)
    assert np.all(np.diff(v) >= 0.0)
    np.testing.assert_allclose(v, u ** 2)


def test_table_graph_and_growth_constant():
    g = make_graph("table", xs=[0.0, 1.0, 2.0], left=[0.0, 0.5, 2.0],
                   right=[0.0, 1.5, 2.0], end_slope=1.0)
    assert g.eval(0.5) == (0.25, 0.25)
    lo, hi = g.eval(1.0)
    assert (lo, hi) == (0.5, 1.5)
    assert g.eval(3.0) == (3.0, 3.0)
    assert g.growth_constant is not None


def test_table_rejects_nonmonotone():
    with pytest.raises(GraphError):
        make_graph("table", xs=[0.0, 1.0], left=[0.0, 1.0],
                   right=[0.0, 0.5], end_slope=1.0)


# resolvent: u + mu*beta(u) = y, bisection pinned by the contract

@pytest.mark.parametrize("name,params", [
    ("identity", {}),
    ("linear", {"a": 2.5}),
    ("stopped_linear", {"u_c": 0.7}),
    ("saturating", {}),
    ("power", {"m": 2.0}),
])
def test_resolvent_solves_balance(name, params):
    g = make_graph(name, **params)
    for mu in (0.1, 1.0, 10.0):
        for y in (0.0, 0.3, 1.0, 5.0):
            u, eta = g.resolvent(mu, y)
            assert u >= 0.0
            assert abs(u + mu * eta - y) <= 1e-10 * max(1.0, y)
            lo, hi = g.eval(u)
            assert lo - 1e-9 <= eta <= hi + 1e-9


def test_resolvent_jump_absorption():
    g = make_graph("jump", a=1.0, lo=0.0, hi=1.0)
    # y in [a, a + mu*hi] collapses onto the jump location
    u, eta = g.resolvent(1.0, 1.5)
    assert abs(u - 1.0) < 1e-12
    assert abs(eta - 0.5) < 1e-12


def test_resolvent_identity_closed_form():
    g = make_graph("identity")
    u, eta = g.resolvent(1.0, 3.0)
    assert abs(u - 1.5) < 1e-12 and abs(eta - 1.5) < 1e-12


def test_scaled_matches_mirror_dictionary():
    g = make_graph("saturating")
    gb = g.scaled(2.0, 0.5)
    u = np.linspace(0.0, 3.0, 17)
    np.testing.assert_allclose(gb.value_right(u), 0.5 * g.value_right(2.0 * u),
                               rtol=1e-14)


def test_phi_graph_values_and_rescale():
    phi = phi_from_beta(make_graph("identity"))
    assert phi.value_right(4.0) == 1.0
    assert phi.value_at_zero == (1.0, 1.0)
    phibar = phi.rescaled(2.0)
    u = np.array([0.5, 1.0, 2.0])
    np.testing.assert_allclose(phibar.value_right(u), phi.value_right(2.0 * u))


def test_phi_saturating_vanishes_at_zero():
    phi = phi_from_beta(make_graph("saturating"))
    assert phi.value_at_zero == (0.0, 0.0)
    np.testing.assert_allclose(phi.value_right(1.0), np.sqrt(0.5))


def test_selection_policies_at_jump():
    g = make_graph("jump", a=1.0, lo=0.0, hi=1.0)
    assert make_selection(g, "left_limit")(1.0) == 0.0
    assert make_selection(g, "right_limit")(1.0) == 1.0
    assert make_selection(g, "midpoint")(1.0) == 0.5


def test_classify_catalog():
    assert classify(make_graph("identity")).variant == "non_degenerate"
    assert classify(make_graph("identity")).c0 == pytest.approx(1.0)
    k = classify(make_graph("stopped_linear", u_c=1.0))
    assert k.variant == "strictly_increasing_after_zero"
    assert k.u_c == pytest.approx(1.0, abs=1e-9)
    assert classify(make_graph("saturating")).variant == "degenerate"
    assert classify(make_graph("power", m=2.0)).variant == "degenerate"
    z = classify(make_graph("zero"))
    assert z.variant == "strictly_increasing_after_zero" and z.u_c == np.inf


def test_classify_beyond_probe_window():
    k = classify(make_graph("stopped_linear", u_c=1.5), u_max=1.0)
    assert k.variant == "strictly_increasing_after_zero"
    assert k.u_c == pytest.approx(1.5, abs=1e-9)


def test_validate_assumptions_pass_and_fail():
    g = make_graph("identity")
    u0 = np.zeros(50)
    u0[:10] = 2.0  # mass 10*0.1*2 = 2 on dx=0.1, fails unit mass
    rep = validate_assumptions(g, u0, 0.1)
    assert not rep.ok
    assert any(c.name == "u0_unit_mass" and not c.ok for c in rep.checks)
    u0[:10] = 1.0
    assert validate_assumptions(g, u0, 0.1).ok


def test_validate_degenerate_needs_breakpoints():
    g = make_graph("saturating")
    u0 = np.zeros(50)
    u0[:10] = 1.0
    rep = validate_assumptions(g, u0, 0.1)
    assert not rep.ok
    rep2 = validate_assumptions(g, u0, 0.1, declared_breakpoints=[0.0])
    assert rep2.ok
