"""Acceptance suite: the full registered verification battery at
production sizes under the default master seed, one test function per
documented acceptance property so `pytest -v` prints one pass/fail line
each.

Three expensive fixtures are shared across the file: the production suite
run (workers=1), a second identical run at workers=2 for the
reproducibility comparison, and the negative-control sweep. Together they
dominate the runtime of the whole test session."""

import json
import math

import pytest

from bougerol import cli_reporting as cr
from bougerol import verifications as vf

SEED = cr.DEFAULT_MASTER_SEED
ALPHA = 0.01
K_SIGMA = 3.0


def _run_production(tmp_path_factory, workers):
    out = tmp_path_factory.mktemp("acceptance") / f"suite_w{workers}.json"
    code = cr.main([
        "verify", "all", "--seed", str(SEED),
        "--workers", str(workers), "--out", str(out),
    ])
    doc = json.loads(out.read_text())
    return {"exit": code, "doc": doc}


@pytest.fixture(scope="module")
def suite(tmp_path_factory):
    return _run_production(tmp_path_factory, workers=1)


@pytest.fixture(scope="module")
def suite_alt_workers(tmp_path_factory):
    return _run_production(tmp_path_factory, workers=2)


@pytest.fixture(scope="module")
def controls():
    return {
        name: vf.run_registered(name, SEED, negative_control=True)
        for name in vf.registry_names()
    }


def _final(suite, name):
    """Last report for a test name: the rerun verdict when one happened."""
    found = None
    for t in suite["doc"]["tests"]:
        if t["test_name"] == name:
            found = t
    assert found is not None, f"{name} missing from suite report"
    return found


def _named(report, prefix):
    got = [v for v in report["verdicts"] if v["name"].startswith(prefix)]
    assert got, f"no verdicts named {prefix}* in {report['test_name']}"
    return got


def _assert_ks(verdicts, alpha=ALPHA):
    for v in verdicts:
        assert v["p_value"] is not None and v["p_value"] > alpha, v
        assert v["passed"], v


def _assert_z(verdicts, k=K_SIGMA):
    for v in verdicts:
        assert v["z_score"] is not None and abs(v["z_score"]) <= k, v
        assert v["passed"], v


def _assert_passed(verdicts):
    for v in verdicts:
        assert v["passed"], v


def test_01_hyperbolic_sine_identity_ks_within_budget(suite):
    rep = _final(suite, "bougerol")
    assert rep["parameters"]["n"] == 100000
    assert rep["parameters"]["dt"] == 2.0 ** -10
    assert rep["parameters"]["t_values"] == [0.5, 1.0, 2.0]
    ks = _named(rep, "sinh-vs-scaled-normal")
    assert len(ks) == 3
    _assert_ks(ks)
    assert rep["runtime_seconds"] <= 3 * 120.0


def test_02_kernel_and_inverse_moment_means_with_step_refinement(suite):
    kern = _final(suite, "density-kernel")
    mom = _final(suite, "inverse-moments")
    assert kern["parameters"]["n"] == 100000
    assert mom["parameters"]["n"] == 100000
    _assert_z(_named(kern, "kernel-mean"))
    _assert_z(_named(mom, "inverse-sqrt-mean"))
    _assert_z(_named(mom, "tilted-moment-single"))
    _assert_z(_named(mom, "tilted-moment-double"))
    for rep in (kern, mom):
        shifts = _named(rep, "step-halving-shift")
        assert len(shifts) == 3
        for v in shifts:
            assert v["passed"], v
            assert v["statistic"] < 1.0, "shift must stay under one se"


def test_03_local_time_triple_energy_and_marginals_within_budget(suite):
    rep = _final(suite, "sinh-local-time")
    assert rep["parameters"]["n"] == 20000
    assert rep["parameters"]["n_perm"] == 500
    assert rep["parameters"]["t"] == 1.0
    energy = _named(rep, "energy")
    assert {v["name"] for v in energy} == {
        "energy[v1-v2]", "energy[v1-v3]", "energy[v2-v3]",
    }
    _assert_ks(energy)
    _assert_ks(_named(rep, "first-marginal"))
    _assert_ks(_named(rep, "local-time-marginal"))
    _assert_ks(_named(rep, "sign-symmetry"))
    assert rep["runtime_seconds"] <= 300.0


def test_04_clock_vs_subordinator_ks_and_exclusion_budget(suite):
    rep = _final(suite, "clock-subordination")
    assert rep["parameters"]["n"] == 10000
    assert rep["parameters"]["s_values"] == [0.5, 1.0, 2.0]
    ks = _named(rep, "clock-vs-subordinator")
    assert len(ks) == 3
    _assert_ks(ks)
    _assert_passed(_named(rep, "exclusion-rate"))
    assert rep["budget_exclusions"] / (3 * 10000) < 1e-3


def test_05_clock_time_change_ks_stable_under_mesh_halving(suite):
    rep = _final(suite, "clock-time-change")
    assert rep["parameters"]["n"] == 5000
    assert rep["parameters"]["t_values"] == [0.5, 1.0]
    ks = _named(rep, "time-change-vs-exact")
    assert len(ks) == 4, "both meshes at both horizons"
    _assert_ks(ks)
    stable = _named(rep, "mesh-halving-stable")
    assert len(stable) == 2
    _assert_passed(stable)


def test_06_radial_laplace_means_and_rank_dependence(suite):
    rep = _final(suite, "radial-laplace")
    assert rep["parameters"]["n"] == 10000
    means = _named(rep, "laplace-mean")
    _assert_z(means)
    got = {v["name"] for v in means}
    for s in (0.5, 1, 2):
        for q in (0.5, 1, 2):
            assert f"laplace-mean[s={s:g},q={q:g}]" in got
    ranks = _named(rep, "rank-dependence")
    assert len(ranks) == 3
    for v in ranks:
        assert abs(v["z_score"]) > K_SIGMA, v
        assert v["passed"], v


def test_07_jump_sum_product_mean_and_threshold_refinement(suite):
    rep = _final(suite, "jump-sum-product")
    assert rep["parameters"]["n"] == 10000
    assert rep["parameters"]["epsilon"] == 1e-4
    assert rep["parameters"]["l"] == 2.0
    _assert_passed(_named(rep, "product-form-mean"))
    _assert_passed(_named(rep, "threshold-halving-movement"))


def test_08_weighted_jump_sums_closed_and_factorized(suite):
    special = _final(suite, "weighted-jump-sum-special")
    general = _final(suite, "weighted-jump-sum-general")
    _assert_passed(_named(special, "weighted-sum-mean"))
    _assert_passed(_named(special, "threshold-halving-movement"))
    assert (general["parameters"]["a_exp"], general["parameters"]["b_exp"]) \
        == (1.0, 2.0)
    _assert_passed(_named(general, "factorization-joint-ci"))
    _assert_passed(_named(general, "level-transform-crosscheck"))
    _assert_passed(_named(general, "threshold-halving-movement"))


def test_09_subordinated_winding_angle_matches_scaled_cauchy(suite):
    rep = _final(suite, "winding-cauchy")
    assert rep["parameters"]["n"] == 10000
    assert rep["parameters"]["l_values"] == [1.0, 2.0]
    ks = _named(rep, "winding-vs-cauchy")
    assert len(ks) == 2
    _assert_ks(ks)


def test_10_log_normalized_winding_approaches_cauchy(suite):
    rep = _final(suite, "spitzer-limit")
    assert rep["parameters"]["n"] == 5000
    assert rep["parameters"]["t_values"] == [100.0, 1000.0, 10000.0]
    mono = _named(rep, "distance-monotone-decrease")[0]
    assert mono["passed"] and mono["statistic"] > 0.0
    final = _named(rep, "final-distance-small")[0]
    assert final["passed"] and final["statistic"] < 0.05
    d = [rep["mc_estimates"][f"cauchy-distance[t={t:g}]"]["estimate"]
         for t in (100, 1000, 10000)]
    assert d[0] > d[1] > d[2]


def test_11_joint_laplace_mellin_grid_with_analytic_anchors(suite):
    rep = _final(suite, "joint-laplace-mellin")
    means = _named(rep, "laplace-mellin-mean")
    assert len(means) == 27, "full 3x3x3 grid"
    _assert_z(means)
    anchor0 = _named(rep, "driftless-anchor-analytic")[0]
    assert anchor0["passed"] and anchor0["statistic"] <= 1e-10
    _assert_passed(_named(rep, "unit-anchor-analytic"))


def test_12_beta_gamma_sampler_ks_and_mellin_moments(suite):
    rep = _final(suite, "beta-gamma-sampler")
    ks = _named(rep, "path-vs-exact")
    assert {v["name"] for v in ks} == {
        "path-vs-exact[nu=0,p=4]", "path-vs-exact[nu=1,p=2]",
    }
    _assert_ks(ks)
    _assert_z(_named(rep, "mellin-moment"))
    exact = _named(rep, "mean-moment-analytic")[0]
    assert exact["passed"] and exact["statistic"] <= 1e-12


def test_13_every_negative_control_rejects(controls):
    assert len(controls) == 14
    for name, rep in controls.items():
        assert not rep.passed(), f"control for {name} failed to reject"
        statistical = [
            v for v in rep.verdicts
            if not v.passed and (
                (v.p_value is not None and v.p_value < ALPHA)
                or (v.z_score is not None and abs(v.z_score) > K_SIGMA)
            )
        ]
        assert statistical, (
            f"control for {name} rejected without a p or z statistic: "
            f"{[v.name for v in rep.verdicts if not v.passed]}"
        )


def test_14_reports_identical_across_worker_counts(suite, suite_alt_workers):
    def normalize(doc):
        doc = json.loads(json.dumps(doc))
        doc.pop("timestamp")
        for t in doc["tests"]:
            t.pop("runtime_seconds")
        return json.dumps(doc)

    a = normalize(suite["doc"])
    b = normalize(suite_alt_workers["doc"])
    assert a == b


def test_suite_verdict_green_both_runs(suite, suite_alt_workers):
    for run in (suite, suite_alt_workers):
        assert run["exit"] == 0
        assert run["doc"]["suite_verdict"]["verdict"] == "green"
        assert run["doc"]["master_seed"] == SEED
    total = sum(t["runtime_seconds"] for t in suite["doc"]["tests"])
    assert total <= 30 * 60.0
