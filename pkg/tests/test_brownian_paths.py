"""Path machinery: functional accumulation, clock inversion, batched
lockstep engine, winding draws, and per-path time integrals."""

import math

import numpy as np
import pytest

import bougerol.brownian_paths as bp
from bougerol.brownian_paths import (
    BatchClockResult,
    BudgetExceeded,
    GridPath,
    brownian_time_integrals,
    clock_inversions_batched,
    eval_clock_at_subordinator,
    exp_functional_at_exponential_time,
    invert_exp_functional,
    joint_bt_at,
    joint_bt_at_with_coarse,
    simulate_bm,
    winding_at_time,
)
from bougerol.samplers import (
    RngStream,
    sample_exp_functional_beta_gamma,
    sample_stable_half,
)
from bougerol.stat_tests import ks_two_sample


class ZeroGen:
    """Noise-free stand-in for a Generator: all normals are 0 and
    exponentials sit at their mean."""

    def standard_normal(self, shape=None):
        return np.zeros(shape) if shape is not None else 0.0

    def exponential(self, scale=1.0, size=None):
        return np.full(size, scale) if size is not None else scale


# ---------------------------------------------------------------- simulate_bm


def test_simulate_bm_endpoint_variance():
    g = RngStream(101, 0).generator
    ends = np.array(
        [simulate_bm(0.75, 2.0 ** -5, 0.0, g).values[-1] for _ in range(2000)]
    )
    var = ends.var(ddof=1)
    se = 0.75 * math.sqrt(2.0 / 1999)
    assert abs(var - 0.75) < 4 * se
    assert abs(ends.mean()) < 4 * math.sqrt(0.75 / 2000)


def test_simulate_bm_validates_step():
    g = RngStream(1, 0).generator
    with pytest.raises(ValueError):
        simulate_bm(1.0, 0.0, 0.0, g)
    with pytest.raises(ValueError):
        simulate_bm(0.5, 1.0, 0.0, g)


def test_zero_noise_functional_is_time():
    path = simulate_bm(1.0, 2.0 ** -6, 0.0, ZeroGen())
    assert np.all(path.values == 0.0)
    expect = np.arange(65) * 2.0 ** -6
    np.testing.assert_allclose(path.cum_a, expect, rtol=1e-13, atol=1e-15)
    assert path.t_end == 1.0


@pytest.mark.parametrize("nu,t", [(1.0, 1.0), (-0.5, 1.0), (1.5, 0.5)])
def test_drifted_zero_noise_functional_exact(nu, t):
    # on a noise-free path the per-step rule integrates exp(2 nu s) exactly
    path = simulate_bm(t, 2.0 ** -6, nu, ZeroGen())
    expect = (math.exp(2.0 * nu * t) - 1.0) / (2.0 * nu)
    assert path.cum_a[-1] == pytest.approx(expect, rel=1e-12)


def test_functional_mean_matches_fubini():
    b, a = joint_bt_at(1.0, 2.0 ** -8, RngStream(102, 0), size=30000)
    target = (math.exp(2.0) - 1.0) / 2.0
    z = (a.mean() - target) / (a.std(ddof=1) / math.sqrt(len(a)))
    assert abs(z) < 4.0
    assert abs(b.mean()) < 4.0 / math.sqrt(len(b))


# ---------------------------------------------------------------- joint draws


def test_joint_endpoint_inverse_moments():
    b, a = joint_bt_at(1.0, 2.0 ** -9, RngStream(103, 0), size=30000)
    for vals, target in [
        (1.0 / np.sqrt(a), 1.0),
        (np.exp(b) * a ** -1.5, 1.0),
        (np.exp(2.0 * b) * a ** -1.5, 1.0),
    ]:
        z = (vals.mean() - target) / (vals.std(ddof=1) / math.sqrt(len(vals)))
        assert abs(z) < 4.0, (vals.mean(), target)


def test_joint_scalar_mode_reproducible():
    b1, a1 = joint_bt_at(0.5, 2.0 ** -6, RngStream(104, 0))
    b2, a2 = joint_bt_at(0.5, 2.0 ** -6, RngStream(104, 0))
    assert isinstance(b1, float) and isinstance(a1, float)
    assert (b1, a1) == (b2, a2) and a1 > 0


def test_joint_with_coarse_shares_paths():
    b, a_fine, a_coarse = joint_bt_at_with_coarse(
        1.0, 2.0 ** -8, RngStream(105, 0), size=4000
    )
    assert np.all(a_coarse > 0)
    corr = np.corrcoef(a_fine, a_coarse)[0, 1]
    assert corr > 0.999
    assert abs(a_coarse.mean() / a_fine.mean() - 1.0) < 0.01


def test_space_scaling_consistency():
    # functional of a path with doubled values on [0, t] matches A_{4t}/4
    g = RngStream(106, 0).generator
    n, t, dt = 1200, 0.5, 2.0 ** -9
    steps = int(t / dt)
    db = math.sqrt(dt) * g.standard_normal((n, steps))
    b = np.cumsum(db, axis=1)
    b_prev = np.concatenate([np.zeros((n, 1)), b[:, :-1]], axis=1)
    a_doubled = bp._step_integrals(2.0 * b_prev, 2.0 * db, dt).sum(axis=1)
    _, a_long = joint_bt_at(4.0 * t, dt, RngStream(106, 1), size=n)
    verdict = ks_two_sample(4.0 * a_doubled, a_long)
    assert verdict.p_value > 0.01


# ------------------------------------------------------------------ inversion


def test_invert_level_zero():
    path = GridPath(dt=2.0 ** -6)
    assert invert_exp_functional(path, 0.0, ZeroGen()) == (0.0, 0.0)


def test_invert_zero_noise_identity():
    path = GridPath(dt=2.0 ** -6)
    h, b_at = invert_exp_functional(path, 0.37, ZeroGen())
    assert h == pytest.approx(0.37, rel=1e-12)
    assert b_at == 0.0


def test_invert_grid_roundtrip_exact():
    g = RngStream(107, 0).generator
    path = simulate_bm(1.0, 2.0 ** -9, 0.0, g)
    for i in [1, 7, 300, path.n_steps]:
        h, b_at = invert_exp_functional(path, float(path.cum_a[i]), g)
        assert h == pytest.approx(i * path.dt, rel=1e-10, abs=1e-13)
        assert b_at == pytest.approx(float(path.values[i]), rel=1e-9, abs=1e-12)


def test_invert_monotone_in_level():
    g = RngStream(108, 0).generator
    path = simulate_bm(1.0, 2.0 ** -8, 0.0, g)
    top = float(path.cum_a[-1])
    levels = np.linspace(top * 0.01, top * 0.99, 25)
    hs = [invert_exp_functional(path, float(u), g)[0] for u in levels]
    assert np.all(np.diff(hs) > 0)


def test_invert_negative_level_rejected():
    with pytest.raises(ValueError):
        invert_exp_functional(GridPath(dt=0.25), -1.0, ZeroGen())


def test_invert_drifted_analytic():
    path = GridPath(dt=2.0 ** -8, nu=1.5)
    level = (math.exp(3.0 * 0.9) - 1.0) / 3.0
    h, b_at = invert_exp_functional(path, level, ZeroGen())
    assert h == pytest.approx(0.9, rel=1e-9)
    assert b_at == pytest.approx(1.35, rel=1e-9)


def test_invert_budget_error(monkeypatch):
    monkeypatch.setattr(bp, "DEFAULT_STEP_BUDGET", 2 ** 15)
    path = GridPath(dt=2.0 ** -4)
    g = RngStream(109, 0).generator
    with pytest.raises(BudgetExceeded) as err:
        invert_exp_functional(path, 1e25, g)
    assert err.value.steps <= 2 ** 15
    assert err.value.reached < 1e25
    assert "budget" in str(err.value)


def test_invert_overflow_shifted_representation():
    # drift 3 with no noise: A(t) = (exp(6t) - 1)/6 passes 1e300 well before
    # the level, forcing the rebase; the answer must stay analytic
    path = GridPath(dt=2.0 ** -10, nu=3.0)
    level = 1e303
    h, b_at = invert_exp_functional(path, level, ZeroGen())
    expect = math.log(6.0 * level + 1.0) / 6.0
    assert path.log_scale > 0.0
    assert h == pytest.approx(expect, rel=1e-9)
    assert b_at == pytest.approx(3.0 * expect, rel=1e-9)


# ------------------------------------------------------- scalar clock at sigma


def test_eval_clock_level_zero():
    out = eval_clock_at_subordinator([0.0, 0.5], 2.0 ** -8, RngStream(110, 0))
    assert out[0].H == 0.0 and out[0].log_R == 0.0 and out[0].sigma_level == 0.0
    assert out[1].H > 0.0


def test_eval_clock_requires_sorted():
    with pytest.raises(ValueError):
        eval_clock_at_subordinator([1.0, 0.5], 2.0 ** -8, RngStream(1, 0))
    with pytest.raises(ValueError):
        eval_clock_at_subordinator([-0.5], 2.0 ** -8, RngStream(1, 0))


def test_eval_clock_joint_on_one_path():
    evals = eval_clock_at_subordinator(
        [0.5, 0.5, 1.5], 2.0 ** -8, RngStream(111, 0),
        sigma_levels=[0.2, 0.2, 2.5],
    )
    hs = [e.H for e in evals]
    assert hs[0] == hs[1]  # same sigma level, same path -> same clock value
    assert hs[2] > hs[0]
    again = eval_clock_at_subordinator(
        [0.5, 0.5, 1.5], 2.0 ** -8, RngStream(111, 0),
        sigma_levels=[0.2, 0.2, 2.5],
    )
    assert [e.H for e in again] == hs


# ------------------------------------------------------------- batched engine


def test_batch_zero_noise_exact_inversion():
    res = clock_inversions_batched(
        [[0.5, 3.7], [8.0], [100.0]], ZeroGen(), dt0=2.0 ** -10
    )
    assert not res.excluded.any()
    np.testing.assert_allclose(
        res.H, [0.5, 3.7, 8.0, 100.0], rtol=1e-12, atol=0.0
    )
    np.testing.assert_allclose(res.log_R, 0.0, atol=1e-12)
    h0, r0 = res.per_replicate(0)
    assert len(h0) == 2 and len(r0) == 2


def test_batch_time_horizon_exclusion():
    res = clock_inversions_batched(
        [[5.0], [50.0]], ZeroGen(), dt0=2.0 ** -10, t_max=10.0
    )
    assert list(res.excluded) == [False, True]
    assert res.H[0] == pytest.approx(5.0, rel=1e-12)
    assert math.isnan(res.H[1])


def test_batch_rejects_unsorted_levels():
    with pytest.raises(ValueError):
        clock_inversions_batched([[1.0, 0.5]], RngStream(1, 0))


def test_batch_per_replicate_streams_replay():
    # adding levels for one replicate must not change any other replicate's
    # path, nor the H at levels both calls share
    seed = RngStream(112, 5)
    first = clock_inversions_batched(
        [[0.5], [1.0], [2.0]], seed, per_replicate_streams=True
    )
    second = clock_inversions_batched(
        [[0.5, 0.9], [1.0], [0.4, 2.0]], RngStream(112, 5),
        per_replicate_streams=True,
    )
    assert first.H[0] == second.H[0]
    assert first.H[1] == second.H[2]
    assert first.H[2] == second.H[4]
    assert first.log_R[2] == second.log_R[4]


def test_batch_matches_scalar_engine_in_law():
    g = RngStream(113, 0).generator
    sig = np.minimum(sample_stable_half(1.0, g, size=160), 2000.0)
    batch = clock_inversions_batched([[s] for s in sig], RngStream(113, 1))
    h_scalar = np.full(len(sig), np.nan)
    for i, s in enumerate(sig):
        try:
            h_scalar[i] = eval_clock_at_subordinator(
                [1.0], 2.0 ** -10, RngStream(113, 2).child(i),
                sigma_levels=[s],
            )[0].H
        except BudgetExceeded:
            pass  # rare step-budget exhaustion, excluded pairwise below
    keep = ~np.isnan(h_scalar) & ~np.isnan(batch.H)
    assert keep.mean() > 0.9
    verdict = ks_two_sample(batch.H[keep], h_scalar[keep])
    assert verdict.p_value > 0.01


def test_batch_subordination_law():
    # clock at an independent stable time of level s has the law of the
    # stable subordinator at arcsinh(s)
    g = RngStream(114, 0).generator
    sig = sample_stable_half(1.0, g, size=1500)
    res = clock_inversions_batched([[s] for s in np.sort(sig)], RngStream(114, 1))
    h = res.H[~np.isnan(res.H)]
    exact = sample_stable_half(math.asinh(1.0), RngStream(114, 2), size=1500)
    assert ks_two_sample(h, exact).p_value > 0.01


def test_batch_laplace_transform_value():
    g = RngStream(115, 0).generator
    sig = sample_stable_half(1.0, g, size=2000)
    res = clock_inversions_batched([[s] for s in sig], RngStream(115, 1))
    h = res.H[~np.isnan(res.H)]
    vals = np.exp(-h)
    target = math.exp(-math.asinh(1.0) * math.sqrt(2.0))
    z = (vals.mean() - target) / (vals.std(ddof=1) / math.sqrt(len(vals)))
    assert abs(z) < 4.0


# -------------------------------------------------------------------- winding


def test_winding_scalar_small_time():
    theta = winding_at_time(1e-4, 2.0 ** -10, RngStream(116, 0))
    assert isinstance(theta, float)
    assert abs(theta) < 0.1


def test_winding_batch_symmetry_and_conditional_variance():
    rng = RngStream(117, 0)
    res = clock_inversions_batched([[4.0]] * 2500, RngStream(117, 1))
    theta = winding_at_time(4.0, 2.0 ** -10, rng, size=2500)
    ok = ~np.isnan(theta)
    th = theta[ok]
    z_sym = th.mean() / (th.std(ddof=1) / math.sqrt(len(th)))
    assert abs(z_sym) < 4.0
    # independent consistency pass: E[theta^2] should match E[H]
    h = res.H[~np.isnan(res.H)]
    diff = th ** 2
    se = math.hypot(diff.std(ddof=1) / math.sqrt(len(diff)),
                    h.std(ddof=1) / math.sqrt(len(h)))
    assert abs(diff.mean() - h.mean()) < 5 * se


def test_winding_rejects_bad_time():
    with pytest.raises(ValueError):
        winding_at_time(0.0, 2.0 ** -8, RngStream(1, 0))


# -------------------------------------------- functional at exponential time


def test_expfun_zero_noise_hits_horizon():
    out = exp_functional_at_exponential_time(0.0, 3.0, 2.0 ** -4, ZeroGen(), 5)
    np.testing.assert_allclose(out, 1.0 / 3.0, rtol=1e-12)
    out_drift = exp_functional_at_exponential_time(
        1.0, 3.0, 2.0 ** -6, ZeroGen(), 4
    )
    np.testing.assert_allclose(
        out_drift, (math.exp(2.0 / 3.0) - 1.0) / 2.0, rtol=1e-10
    )


def test_expfun_matches_beta_gamma_law():
    path_draws = exp_functional_at_exponential_time(
        0.0, 4.0, 2.0 ** -7, RngStream(118, 0), size=1500
    )
    exact = sample_exp_functional_beta_gamma(0.0, 4.0, RngStream(118, 1), size=1500)
    assert ks_two_sample(path_draws, exact).p_value > 0.01


def test_expfun_rejects_bad_rate():
    with pytest.raises(ValueError):
        exp_functional_at_exponential_time(0.0, 0.0, 0.25, RngStream(1, 0), 3)


# ------------------------------------------------------------- time integrals


def test_time_integrals_zero_noise_quadrature():
    def f(t, b, a):
        return 1.0 / np.sqrt(2.0 * np.pi * a)

    (vals,) = brownian_time_integrals(
        [(f, 2.0 / math.sqrt(2.0 * math.pi))], ZeroGen(), size=3, horizon=40.0
    )
    expect = 2.0 * math.sqrt(40.0) / math.sqrt(2.0 * math.pi)
    np.testing.assert_allclose(vals, expect, rtol=1e-5)


def test_time_integrals_known_transforms():
    q, big_l, nu = 0.5, 2.0, 1.0

    def f_minus(t, b, a):
        return (
            np.exp(-q * t)
            / np.sqrt(2.0 * np.pi * a)
            * -np.expm1(-big_l ** 2 / (2.0 * a))
        )

    def f_plus(t, b, a):
        return nu * t * np.exp(-nu * t + b) * a ** -1.5 / math.sqrt(2.0 * math.pi)

    lim_minus = math.sqrt(2.0 / math.pi)
    lim_plus = 2.0 * nu / math.sqrt(2.0 * math.pi)
    vals_minus, vals_plus = brownian_time_integrals(
        [(f_minus, lim_minus), (f_plus, lim_plus)],
        RngStream(119, 0),
        size=1200,
    )
    root = math.sqrt(2.0 * q)
    target_minus = (
        1.0 - math.exp(-math.asinh(big_l) * root) / math.sqrt(1.0 + big_l ** 2)
    ) / root
    z1 = (vals_minus.mean() - target_minus) / (
        vals_minus.std(ddof=1) / math.sqrt(len(vals_minus))
    )
    assert abs(z1) < 4.0
    target_plus = math.sqrt(nu / 2.0)
    z2 = (vals_plus.mean() - target_plus) / (
        vals_plus.std(ddof=1) / math.sqrt(len(vals_plus))
    )
    assert abs(z2) < 4.0
