import json
import subprocess
import sys

import numpy as np
import pytest

from pmneumann import harness
from pmneumann.errors import ConfigError, GridError
from pmneumann.fields import DensityField, Grid1D


def small_cfg(**over):
    cfg = {
        "domain": {"x_max": 4.0, "dx": 0.05},
        "time": {"t_final": 0.1, "dt": 2e-3, "snapshots": [0.05, 0.1]},
        "particle": {"n": 4000, "dt": 2e-3, "seed": 7},
        "verify": {"family_size": 6, "cutoff_ladder": [0.6, 0.4]},
        "tolerances": {"residual_max": 0.5, "l1_particle_pde": 0.25,
                       "l1_schemes": 0.25},
    }
    for key, sub in over.items():
        cfg.setdefault(key, {}).update(sub)
    return cfg


def indicator(grid, lo=0.0, hi=1.0):
    c = grid.centers
    vals = ((c > lo) & (c < hi)).astype(float)
    return DensityField(grid, vals / (vals.sum() * grid.dx))


# -- configuration -----------------------------------------------------


def test_config_defaults_and_hash():
    a = harness.ExperimentConfig.from_dict({})
    b = harness.ExperimentConfig.from_dict({"domain": {"dx": 0.02}})
    # spelling out a default leaves the content identical
    assert a.content_hash() == b.content_hash()
    c = harness.ExperimentConfig.from_dict({"domain": {"dx": 0.01}})
    assert a.content_hash() != c.content_hash()


def test_config_rejects_unknown_section():
    with pytest.raises(ConfigError):
        harness.ExperimentConfig.from_dict({"tiem": {"dt": 0.1}})


def test_config_validation_names_offending_field():
    cfg = harness.ExperimentConfig.from_dict({"domain": {"dx": -1.0}})
    with pytest.raises(ConfigError, match="domain.dx"):
        cfg.validate()
    cfg = harness.ExperimentConfig.from_dict(
        {"time": {"snapshots": [0.7], "t_final": 0.5}})
    with pytest.raises(ConfigError, match="snapshots"):
        cfg.validate()
    cfg = harness.ExperimentConfig.from_dict(
        {"particle": {"scheme": "leapfrog"}})
    with pytest.raises(ConfigError, match="scheme"):
        cfg.validate()
    cfg = harness.ExperimentConfig.from_dict({"graph": {"name": "cubic"}})
    with pytest.raises(ConfigError, match="graph"):
        cfg.validate()


def test_config_file_round_trip(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(small_cfg()))
    cfg = harness.ExperimentConfig.from_file(p)
    cfg.validate()
    assert cfg.data["domain"]["dx"] == 0.05
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        harness.ExperimentConfig.from_file(bad)


# -- initial data catalog ----------------------------------------------


@pytest.mark.parametrize("name,params", [
    ("indicator", {"a": 0.0, "b": 1.0}),
    ("indicator", {"a": 0.5, "b": 2.5}),
    ("triangle", {"a": 0.0, "b": 2.0, "c": 0.5}),
    ("truncated_gaussian", {"mu": 1.0, "sigma": 0.5}),
    ("table", {"xs": [0.0, 1.0, 2.0], "values": [0.0, 1.0, 0.0]}),
])
def test_u0_catalog_unit_mass(name, params):
    grid = Grid1D.half_line(5.0, 0.01)
    u0 = harness.make_u0(grid, name, **params)
    assert u0.mass == pytest.approx(1.0, abs=1e-12)
    assert u0.min_value >= 0.0


def test_u0_catalog_errors():
    grid = Grid1D.half_line(5.0, 0.05)
    with pytest.raises(ConfigError):
        harness.make_u0(grid, "odd_shape")
    with pytest.raises(ConfigError):
        harness.make_u0(grid, "indicator", a=2.0, b=1.0)
    with pytest.raises(ConfigError):
        harness.make_u0(grid, "triangle", a=0.0, b=1.0, c=1.5)


def test_indicator_cdf_exact_cell_masses():
    grid = Grid1D.half_line(2.0, 0.5)
    u0 = harness.make_u0(grid, "indicator", a=0.0, b=1.0)
    np.testing.assert_allclose(u0.values, [1.0, 1.0, 0.0, 0.0], atol=1e-14)


# -- density comparison ------------------------------------------------


def test_compare_densities_pinned_example():
    grid = Grid1D.half_line(4.0, 0.01)
    a = indicator(grid, 0.0, 1.0)
    b = indicator(grid, 1.0, 2.0)
    res = harness.compare_densities(a, b)
    # disjoint unit blocks: total variation 2, transport distance 1
    assert res["L1"] == pytest.approx(2.0, abs=1e-12)
    assert res["W1"] == pytest.approx(1.0, abs=1e-12)
    assert harness.compare_densities(a, a) == {"L1": 0.0, "W1": 0.0}
    sym = harness.compare_densities(b, a)
    assert sym["L1"] == res["L1"] and sym["W1"] == res["W1"]


def test_compare_densities_resample():
    fine = Grid1D.half_line(4.0, 0.01)
    coarse = Grid1D.half_line(4.0, 0.04)
    a = indicator(fine, 0.0, 1.0)
    b = indicator(coarse, 0.0, 1.0)
    with pytest.raises(GridError):
        harness.compare_densities(a, b)
    res = harness.compare_densities(a, b, resample=True)
    assert res["L1"] < 0.05 and res["W1"] < 0.01


# -- pipelines ----------------------------------------------------------


def test_pde_pipeline_artifacts(tmp_path):
    rep = harness.run(small_cfg(), "pde", tmp_path / "r")
    assert rep.passed
    names = set(rep.artifacts)
    assert "report.json" in names
    assert "density_t0.1.csv" in names and "eta_t0.1.csv" in names
    assert (tmp_path / "r" / "report.json").exists()
    saved = json.loads((tmp_path / "r" / "report.json").read_text())
    assert saved["pipeline"] == "pde"
    rules = {c["rule"] for c in saved["checks"]}
    assert {"mass_drift", "min_u"} <= rules


def test_report_bit_identity(tmp_path):
    harness.run(small_cfg(), "pde", tmp_path / "a")
    harness.run(small_cfg(), "pde", tmp_path / "b")
    ra = (tmp_path / "a" / "report.json").read_bytes()
    rb = (tmp_path / "b" / "report.json").read_bytes()
    assert ra == rb


def test_seed_override_changes_hash(tmp_path):
    r1 = harness.run(small_cfg(), "particle", tmp_path / "s1")
    r2 = harness.run(small_cfg(), "particle", tmp_path / "s2", seed=99)
    assert r1.content_hash != r2.content_hash
    assert r1.passed and r2.passed


def test_verify_pipeline(tmp_path):
    cfg = small_cfg(domain={"dx": 0.01},
                    verify={"cutoff_ladder": [0.3, 0.2, 0.1]})
    rep = harness.run(cfg, "verify", tmp_path / "v")
    assert rep.passed, [c for c in rep.checks if not c["passed"]]
    res = json.loads((tmp_path / "v" / "residuals.json").read_text())
    assert len(res["residuals"]) == 3 * 6
    forms = {r["form"] for r in res["residuals"]}
    assert forms == {"generalized", "weak", "boundary"}
    assert res["equivalence_constant"] >= 0.0
    assert res["cutoff_ladder"]["diffs"][-1] <= res["cutoff_ladder"]["band"]


def test_verify_rejects_oversized_cutoffs(tmp_path):
    cfg = small_cfg(verify={"cutoff_ladder": [0.8, 0.5]})
    with pytest.raises(ConfigError, match="cutoff_ladder"):
        harness.run(cfg, "verify", tmp_path / "v2")


def test_compare_pipeline(tmp_path):
    rep = harness.run(small_cfg(particle={"scheme": "both"}), "compare",
                      tmp_path / "c")
    assert rep.passed, [c for c in rep.checks if not c["passed"]]
    rules = {c["rule"] for c in rep.checks}
    assert any("wholeline_fold_vs_pde" in r for r in rules)
    assert any("direct_reflect_vs_pde" in r for r in rules)
    assert any("schemes_t" in r for r in rules)


def test_route_check_pipeline(tmp_path):
    rep = harness.run(small_cfg(), "route_check", tmp_path / "rc")
    assert rep.passed
    byrule = {c["rule"]: c for c in rep.checks}
    assert byrule["mirror_evenness"]["value"] <= 1e-12
    gap_rules = [r for r in byrule if r.startswith("route_gap")]
    assert gap_rules and all(byrule[r]["value"] <= 1e-6 for r in gap_rules)


def test_sweep_pipeline(tmp_path):
    cfg = small_cfg()
    cfg["sweep"] = {"path": "particle.n", "values": [1000, 2000],
                    "pipeline": "particle"}
    rep = harness.run(cfg, "sweep", tmp_path / "sw")
    assert rep.passed
    assert (tmp_path / "sw" / "point_000" / "report.json").exists()
    assert (tmp_path / "sw" / "point_001" / "report.json").exists()
    pts = rep.metrics["sweep"]["points"]
    assert set(pts) == {"1000", "2000"}
    assert all(p["passed"] for p in pts.values())


@pytest.mark.parametrize("pipeline", ["pde", "verify", "route_check"])
def test_default_config_passes(tmp_path, pipeline):
    # an empty config must give a passing run out of the box
    rep = harness.run({}, pipeline, tmp_path / pipeline)
    assert rep.passed, [c for c in rep.checks if not c["passed"]]


def test_failing_tolerance_fails_report(tmp_path):
    cfg = small_cfg(tolerances={"l1_particle_pde": 1e-9})
    rep = harness.run(cfg, "compare", tmp_path / "f")
    assert not rep.passed


# -- command line -------------------------------------------------------


def run_cli(args, cwd):
    return subprocess.run(
        [sys.executable, "-m", "pmneumann.cli", *args],
        capture_output=True, text=True, cwd=cwd)


def test_cli_pass_fail_and_config_error(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(small_cfg()))
    out = run_cli(["pde", "--config", str(cfg_path),
                   "--out", str(tmp_path / "ok")], tmp_path)
    assert out.returncode == 0, out.stderr
    assert "[PASS]" in out.stdout and "report.json" in out.stdout

    bad = small_cfg(tolerances={"mass_drift": 1e-30})
    bad_path = tmp_path / "bad.json"
    bad_path.write_text(json.dumps(bad))
    out = run_cli(["pde", "--config", str(bad_path),
                   "--out", str(tmp_path / "fail")], tmp_path)
    assert out.returncode == 1
    assert "[FAIL]" in out.stdout

    broken = tmp_path / "broken.json"
    broken.write_text(json.dumps({"domain": {"dx": -0.1}}))
    out = run_cli(["pde", "--config", str(broken),
                   "--out", str(tmp_path / "err")], tmp_path)
    assert out.returncode == 2
    assert "domain.dx" in out.stderr


def test_cli_seed_override(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(small_cfg()))
    out = run_cli(["particle", "--config", str(cfg_path), "--seed", "123",
                   "--out", str(tmp_path / "seeded")], tmp_path)
    assert out.returncode == 0, out.stderr
    rep = json.loads((tmp_path / "seeded" / "report.json").read_text())
    assert rep["config"]["particle"]["seed"] == 123
