"""Verification operations for the hyperbolic-Brownian identity family.

Each verify_* operation checks one distributional identity by Monte Carlo
against an exact sampler or a closed form and returns a TestReport. The
REGISTRY lists the fourteen runnable tests with their default parameters;
`run_registered` executes one by name, optionally in negative-control mode
where a deliberately perturbed comparison must reject.

Seeding follows one convention throughout: every operation receives an
RngStream and derives child streams by fixed (purpose, grid-index, chunk)
coordinates, with replicate draws cut into fixed-size chunks. Draws
therefore never depend on worker layout, and a report is bit-identical
for a given (master seed, parameters).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from bougerol import brownian_paths as bp
from bougerol import stat_tests as st
from bougerol.samplers import (
    JumpSet,
    RngStream,
    sample_abs_bm_with_local_time,
    sample_exp_functional_beta_gamma,
    sample_stable_half,
    sample_stable_half_jumps,
)
from bougerol.special_functions import (
    JointLaplaceMellinParams,
    MellinParams,
    arg_sinh,
    bougerol_kernel_rhs,
    joint_laplace_mellin_closed_form,
    kolmogorov_cdf,
    mellin_exp_functional,
)

__all__ = [
    "TestReport",
    "RegisteredTest",
    "REGISTRY",
    "registry_names",
    "get_registered",
    "run_registered",
    "verify_hyperbolic_sine_identity",
    "verify_functional_density_kernel",
    "verify_functional_inverse_moments",
    "verify_sinh_local_time_triple",
    "verify_clock_subordination",
    "verify_clock_time_change",
    "verify_radial_clock_laplace",
    "verify_jump_sum_product_form",
    "verify_weighted_jump_sum",
    "verify_subordinated_winding_cauchy",
    "verify_spitzer_winding_limit",
    "verify_joint_laplace_mellin",
    "verify_exp_functional_beta_gamma",
]

CHUNK_REPLICATES = 2048
EXCLUSION_RATE_LIMIT = 1e-3
STRANDED_RATE_LIMIT = 5e-3
# halving a sqrt-rate bias shrinks it by 1 - 1/sqrt(2); the full bias is
# the observed halving shift divided by that factor
SQRT_BIAS_FACTOR = 1.0 / (1.0 - 1.0 / math.sqrt(2.0))
# the truncation-bias allowance is capped at this multiple of sqrt(epsilon):
# the shift measurement is itself heavy-tailed, and one outlier replicate
# must not widen the band past the bias's documented scale
JUMP_ALLOWANCE_CAP = 10.0


def _truncation_allowance(vals_f, vals_h, epsilon):
    measured = abs(float((vals_h - vals_f).mean())) * SQRT_BIAS_FACTOR
    return min(measured, JUMP_ALLOWANCE_CAP * math.sqrt(epsilon))

_RERUN_SALT = 1
_CONTROL_SALT = 900


def _cauchy_cdf(x):
    return 0.5 + np.arctan(x) / np.pi


def _chunk_bounds(n):
    out = []
    lo = 0
    while lo < n:
        out.append((lo, min(CHUNK_REPLICATES, n - lo)))
        lo += CHUNK_REPLICATES
    return out


def _signs(rng, size):
    return np.where(rng.generator.uniform(size=size) < 0.5, -1.0, 1.0)


def _normals(rng_sub, n):
    parts = [
        rng_sub.child(c).generator.standard_normal(take)
        for c, (_, take) in enumerate(_chunk_bounds(n))
    ]
    return np.concatenate(parts)


def _stable_chunked(delta, rng_sub, n):
    parts = [
        sample_stable_half(delta, rng_sub.child(c), size=take)
        for c, (_, take) in enumerate(_chunk_bounds(n))
    ]
    return np.concatenate(parts)


def _invert_single_levels(levels, rng_sub, dt0):
    """Chunked batch inversion at one level per replicate; returns
    (H, log_R, excluded)."""
    n = len(levels)
    h = np.empty(n)
    lr = np.empty(n)
    ex = np.zeros(n, dtype=bool)
    for c, (lo, take) in enumerate(_chunk_bounds(n)):
        res = bp.clock_inversions_batched(
            [[v] for v in levels[lo : lo + take]], rng_sub.child(c), dt0=dt0
        )
        h[lo : lo + take] = res.H
        lr[lo : lo + take] = res.log_R
        ex[lo : lo + take] = res.excluded
    return h, lr, ex


@dataclass
class TestReport:
    """Structured result of one verification: named sub-check verdicts plus
    the estimates, targets, seed coordinates, and exclusion accounting
    needed to rerun or audit it. `samples` holds named raw columns for CSV
    export and is not serialized."""

    test_name: str
    anchor: str
    parameters: dict
    verdicts: list
    mc_estimates: dict
    analytic_targets: dict
    seed: dict
    budget_exclusions: int = 0
    runtime_seconds: float = 0.0
    samples: dict = field(default=None, repr=False)

    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def to_dict(self) -> dict:
        return {
            "test_name": self.test_name,
            "anchor": self.anchor,
            "parameters": self.parameters,
            "verdicts": [v.to_dict() for v in self.verdicts],
            "mc_estimates": self.mc_estimates,
            "analytic_targets": self.analytic_targets,
            "seed": self.seed,
            "budget_exclusions": int(self.budget_exclusions),
            "runtime_seconds": self.runtime_seconds,
            "passed": self.passed(),
        }


def _seed_info(rng: RngStream) -> dict:
    return {"master_seed": rng.master_seed, "stream_id": list(rng.stream_id)}


def _new_report(name, anchor, parameters, rng) -> TestReport:
    return TestReport(
        test_name=name,
        anchor=anchor,
        parameters=parameters,
        verdicts=[],
        mc_estimates={},
        analytic_targets={},
        seed=_seed_info(rng),
        samples={},
    )


def _add_mean_check(report, values, target, name, k_sigma, allowance=0.0):
    v = st.mean_within_ci(
        values, target, k_sigma=k_sigma, name=name, bias_allowance=allowance
    )
    report.verdicts.append(v)
    xs = np.asarray(values, dtype=float)
    report.mc_estimates[name] = {
        "estimate": float(xs.mean()),
        "se": float(xs.std(ddof=1) / math.sqrt(len(xs))),
    }
    report.analytic_targets[name] = float(target)
    return v


# ------------------------------------------------------------------ identities


def verify_hyperbolic_sine_identity(
    t, n, dt, rng, negative_control=False, alpha=st.DEFAULT_ALPHA
):
    """sinh of a Brownian endpoint matches an independent normal scaled by
    the root of the exponential functional: KS between sinh(sqrt(t) N) and
    sqrt(A_t) N'.

    Negative control scales the functional's horizon to 2t, which the KS
    test must reject.
    """
    label = f"[t={t:g}]"
    prefix = "control-" if negative_control else ""
    report = _new_report(
        prefix + "hyperbolic-sine", "hyperbolic-sine-identity",
        {"t": t, "n": n, "dt": dt, "negative_control": negative_control}, rng,
    )
    t_path = 2.0 * t if negative_control else t
    exact = np.sinh(math.sqrt(t) * _normals(rng.child(0), n))
    a_parts = []
    for c, (_, take) in enumerate(_chunk_bounds(n)):
        _, a = bp.joint_bt_at(t_path, dt, rng.child(1, c), size=take)
        a_parts.append(a)
    scaled = np.sqrt(np.concatenate(a_parts)) * _normals(rng.child(2), n)
    report.verdicts.append(
        st.ks_two_sample(
            exact, scaled, alpha=alpha,
            name=prefix + f"sinh-vs-scaled-normal{label}",
        )
    )
    report.samples = {"sinh_bt": exact, "scaled_normal": scaled}
    return report


def _sim_fine_coarse(t, dt, rng_sub, n):
    bs, fs, cs = [], [], []
    for c, (_, take) in enumerate(_chunk_bounds(n)):
        b, af, ac = bp.joint_bt_at_with_coarse(t, dt, rng_sub.child(c), take)
        bs.append(b)
        fs.append(af)
        cs.append(ac)
    return np.concatenate(bs), np.concatenate(fs), np.concatenate(cs)


def verify_functional_density_kernel(
    t, x_grid, n, dt, rng, negative_control=False, k_sigma=st.DEFAULT_K_SIGMA
):
    """Mean of exp(-x^2/(2 A_t))/sqrt(A_t) matches the arcsinh heat-kernel
    closed form over an x grid, with a step-halving shift bound showing the
    discretization bias sits below one standard error.

    Negative control simulates the functional at 2t against the time-t
    closed form at x = 0.
    """
    prefix = "control-" if negative_control else ""
    report = _new_report(
        prefix + "density-kernel", "functional-density-kernel",
        {
            "t": t, "x_grid": list(x_grid), "n": n, "dt": dt,
            "negative_control": negative_control,
        },
        rng,
    )
    t_path = 2.0 * t if negative_control else t
    _, a_fine, a_coarse = _sim_fine_coarse(t_path, dt, rng.child(0), n)
    if negative_control:
        x_grid = [0.0]
    worst_shift = 0.0
    for x in x_grid:
        vf = np.exp(-x * x / (2.0 * a_fine)) / np.sqrt(a_fine)
        name = prefix + f"kernel-mean[x={x:g},t={t:g}]"
        v = _add_mean_check(report, vf, bougerol_kernel_rhs(x, t), name, k_sigma)
        if not negative_control:
            vc = np.exp(-x * x / (2.0 * a_coarse)) / np.sqrt(a_coarse)
            se = report.mc_estimates[name]["se"]
            worst_shift = max(worst_shift, abs(vf.mean() - vc.mean()) / se)
    if not negative_control:
        report.verdicts.append(
            st.TestVerdict(
                name=f"step-halving-shift[t={t:g}]",
                statistic=float(worst_shift),
                passed=bool(worst_shift < 1.0),
                detail="largest estimate shift under dt doubling, in se units",
            )
        )
    report.samples = {"a_t": a_fine}
    return report


def verify_functional_inverse_moments(
    t, n, dt, rng, negative_control=False, k_sigma=st.DEFAULT_K_SIGMA
):
    """The three inverse-moment identities of the exponential functional:
    E[A_t^{-1/2}] = t^{-1/2} and both exponentially tilted 3/2-moments
    equal t^{-3/2}; the tilted pair must also agree with each other
    path-by-path within CI, and a step-halving bound checks bias.

    Negative control simulates at 2t against time-t targets.
    """
    prefix = "control-" if negative_control else ""
    report = _new_report(
        prefix + "inverse-moments", "functional-inverse-moments",
        {"t": t, "n": n, "dt": dt, "negative_control": negative_control}, rng,
    )
    t_path = 2.0 * t if negative_control else t
    b, a_fine, a_coarse = _sim_fine_coarse(t_path, dt, rng.child(0), n)
    v1 = 1.0 / np.sqrt(a_fine)
    v2 = np.exp(b) * a_fine ** -1.5
    v3 = np.exp(2.0 * b) * a_fine ** -1.5
    targets = (t ** -0.5, t ** -1.5, t ** -1.5)
    names = ("inverse-sqrt-mean", "tilted-moment-single", "tilted-moment-double")
    worst_shift = 0.0
    for vals, target, base in zip((v1, v2, v3), targets, names):
        name = prefix + f"{base}[t={t:g}]"
        _add_mean_check(report, vals, target, name, k_sigma)
        if not negative_control:
            if base == names[0]:
                vc = 1.0 / np.sqrt(a_coarse)
            elif base == names[1]:
                vc = np.exp(b) * a_coarse ** -1.5
            else:
                vc = np.exp(2.0 * b) * a_coarse ** -1.5
            se = report.mc_estimates[name]["se"]
            worst_shift = max(worst_shift, abs(vals.mean() - vc.mean()) / se)
    if not negative_control:
        _add_mean_check(
            report, v2 - v3, 0.0, f"reversal-pair-agreement[t={t:g}]", k_sigma
        )
        report.verdicts.append(
            st.TestVerdict(
                name=f"step-halving-shift[t={t:g}]",
                statistic=float(worst_shift),
                passed=bool(worst_shift < 1.0),
                detail="largest estimate shift under dt doubling, in se units",
            )
        )
    report.samples = {
        "inv_sqrt_a": v1, "tilted_single": v2, "tilted_double": v3,
    }
    return report


def verify_sinh_local_time_triple(
    t, n, dt, rng, n_perm=500, negative_control=False, alpha=st.DEFAULT_ALPHA
):
    """The three constructions of the joint (signed sinh, sinh of local
    time) vector agree in law: reflected-endpoint build V1, scaled-functional
    build V2, and its conjugate V3. Pairwise energy-distance permutation
    tests run on the absolute-value vectors, marginals get KS, and the
    signed first coordinate is checked symmetric.

    Negative control runs the energy test with V1 built at horizon 2t.
    """
    prefix = "control-" if negative_control else ""
    report = _new_report(
        prefix + "sinh-local-time", "sinh-local-time-triple",
        {
            "t": t, "n": n, "dt": dt, "n_perm": n_perm,
            "negative_control": negative_control,
        },
        rng,
    )
    t_v1 = 2.0 * t if negative_control else t
    xs, ls, s1 = [], [], []
    betas, lams, s2 = [], [], []
    bs, as_ = [], []
    for c, (_, take) in enumerate(_chunk_bounds(n)):
        x, l = sample_abs_bm_with_local_time(t_v1, rng.child(0, c), size=take)
        xs.append(x)
        ls.append(l)
        s1.append(_signs(rng.child(1, c), take))
        b, a = bp.joint_bt_at(t, dt, rng.child(2, c), size=take)
        bs.append(b)
        as_.append(a)
        beta, lam = sample_abs_bm_with_local_time(1.0, rng.child(3, c), size=take)
        betas.append(beta)
        lams.append(lam)
        s2.append(_signs(rng.child(4, c), take))
    x, l, s1 = map(np.concatenate, (xs, ls, s1))
    b, a = np.concatenate(bs), np.concatenate(as_)
    beta, lam, s2 = map(np.concatenate, (betas, lams, s2))
    root_a = np.sqrt(a)
    conj = np.exp(-b) * root_a
    v1 = np.column_stack([np.sinh(x) * s1, np.sinh(l)])
    v2 = np.column_stack([root_a * beta * s2, conj * lam])
    v3 = np.column_stack([conj * beta * s2, root_a * lam])

    def abs_first(v):
        return np.column_stack([np.abs(v[:, 0]), v[:, 1]])

    pairs = [("v1-v2", v1, v2, 5), ("v1-v3", v1, v3, 6), ("v2-v3", v2, v3, 7)]
    if negative_control:
        pairs = pairs[:1]
    for tag, va, vb, sub in pairs:
        report.verdicts.append(
            st.energy_distance_test(
                abs_first(va), abs_first(vb), n_perm, rng.child(sub),
                alpha=alpha, name=prefix + f"energy[{tag}]",
            )
        )
    if not negative_control:
        marginals = [
            ("first-marginal[v1-v2]", v1[:, 0], v2[:, 0]),
            ("first-marginal[v1-v3]", v1[:, 0], v3[:, 0]),
            ("local-time-marginal[v2-v3]", v2[:, 1], v3[:, 1]),
            ("local-time-marginal[v1-v2]", v1[:, 1], v2[:, 1]),
        ]
        for tag, sa, sb in marginals:
            report.verdicts.append(
                st.ks_two_sample(sa, sb, alpha=alpha, name=tag)
            )
        report.verdicts.append(
            st.ks_two_sample(
                v1[:, 0], -v1[:, 0], alpha=alpha, name="sign-symmetry[v1]"
            )
        )
    report.samples = {
        "v1_signed_sinh": v1[:, 0], "v1_sinh_lt": v1[:, 1],
        "v2_scaled_beta": v2[:, 0], "v2_conjugate_lt": v2[:, 1],
        "v3_conjugate_beta": v3[:, 0], "v3_scaled_lt": v3[:, 1],
    }
    return report


def verify_clock_subordination(
    s_values, n, dt, rng, negative_control=False,
    alpha=st.DEFAULT_ALPHA, k_sigma=st.DEFAULT_K_SIGMA,
):
    """The clock evaluated at a subordinator level s has the law of the
    subordinator at level arcsinh(s): KS per s, a Laplace-transform mean
    cross-check, and an exclusion-rate bound for the inversion horizon.

    Negative control inverts at doubled subordinator levels against the
    unperturbed reference.
    """
    prefix = "control-" if negative_control else ""
    if negative_control:
        s_values = s_values[:1]
    report = _new_report(
        prefix + "clock-subordination", "clock-subordination",
        {
            "s_values": list(s_values), "n": n, "dt": dt,
            "negative_control": negative_control,
        },
        rng,
    )
    total_excluded = 0
    for j, s in enumerate(s_values):
        s_eff = 2.0 * s if negative_control else s
        sig = _stable_chunked(s_eff, rng.child(0, j), n)
        h, _, ex = _invert_single_levels(sig, rng.child(1, j), dt)
        a_s = arg_sinh(s)[0]
        exact = _stable_chunked(a_s, rng.child(2, j), n)
        keep = ~ex & np.isfinite(h)
        total_excluded += int((~keep).sum())
        report.verdicts.append(
            st.ks_two_sample(
                h[keep], exact, alpha=alpha,
                name=prefix + f"clock-vs-subordinator[s={s:g}]",
            )
        )
        _add_mean_check(
            report, np.exp(-h[keep]), math.exp(-a_s * math.sqrt(2.0)),
            prefix + f"laplace-crosscheck[s={s:g}]", k_sigma,
        )
        report.samples[f"clock_s{j}"] = h
    report.budget_exclusions = total_excluded
    rate = total_excluded / (n * len(s_values))
    report.verdicts.append(
        st.TestVerdict(
            name=prefix + "exclusion-rate",
            statistic=float(rate),
            passed=bool(rate < EXCLUSION_RATE_LIMIT),
            n=(n * len(s_values),),
            detail=f"{total_excluded} replicates beyond inversion horizon",
        )
    )
    return report


def verify_clock_time_change(
    t, delta, n, dt, rng, negative_control=False,
    alpha=st.DEFAULT_ALPHA, smax0=4.0, max_stages=32,
):
    """Inverting the additive radial-reciprocal clock of the subordinated
    process and reading the original clock there reproduces the
    subordinator law at level t.

    Per replicate: simulate the subordinator on a staged mesh (step doubles
    each stage so resolution stays proportional to level), accumulate the
    reciprocal-radial integral until it reaches t, locate the inverse level
    by interpolation, redraw the sub-step increment exactly, and re-invert
    the same path at that level via per-replicate streams. Rows whose
    integral has not reached t within the stage cap are counted stranded.

    Negative control compares the pipeline at t against the exact law at 2t.
    """
    prefix = "control-" if negative_control else ""
    report = _new_report(
        prefix + "clock-time-change", "clock-time-change",
        {
            "t": t, "delta": delta, "n": n, "dt": dt, "smax0": smax0,
            "max_stages": max_stages, "negative_control": negative_control,
        },
        rng,
    )
    m0 = int(round(smax0 / delta))
    sig_streams = [rng.child(0, i) for i in range(n)]
    sig = [
        np.cumsum(sample_stable_half(delta, sig_streams[i], size=m0))
        for i in range(n)
    ]
    kernel_rng = rng.child(1)
    grids = [np.arange(1, m0 + 1) * delta]
    lr_final = [None] * n
    bad = np.zeros(n, dtype=bool)
    active = list(range(n))
    stage = 1
    while active and stage < max_stages:
        res = bp.clock_inversions_batched(
            [sig[i] for i in active], kernel_rng, dt0=dt,
            per_replicate_streams=True, stream_ids=active,
        )
        off = res.offsets
        grid = np.concatenate(grids)
        w = np.diff(np.concatenate([[0.0], grid]))
        still = []
        for k, i in enumerate(active):
            lr = res.log_R[off[k] : off[k + 1]]
            if res.excluded[k] or not np.isfinite(lr).all():
                bad[i] = True
                continue
            inv_r = np.concatenate([[1.0], np.exp(-lr[:-1])])
            if float(np.sum(w[: len(inv_r)] * inv_r)) >= t:
                lr_final[i] = lr
            else:
                step = delta * 2.0 ** (stage - 1)
                incs = sample_stable_half(step, sig_streams[i], size=m0)
                sig[i] = np.concatenate([sig[i], sig[i][-1] + np.cumsum(incs)])
                still.append(i)
        if len(grids) <= stage:
            start = smax0 * 2.0 ** (stage - 1)
            grids.append(
                start + np.arange(1, m0 + 1) * (delta * 2.0 ** (stage - 1))
            )
        active = still
        stage += 1
    for i in active:
        bad[i] = True
    grid = np.concatenate(grids)
    w_all = np.diff(np.concatenate([[0.0], grid]))
    level_lists = []
    for i in range(n):
        if bad[i]:
            level_lists.append([])
            continue
        lr = lr_final[i]
        inv_r = np.concatenate([[1.0], np.exp(-lr[:-1])])
        c = np.concatenate([[0.0], np.cumsum(w_all[: len(inv_r)] * inv_r)])
        idx = int(np.searchsorted(c, t, side="left"))
        lo = idx - 1
        s_lo = grid[lo - 1] if lo >= 1 else 0.0
        s_hi = grid[idx - 1]
        frac = (t - c[lo]) / (c[idx] - c[lo])
        base = sig[i][lo - 1] if lo >= 1 else 0.0
        gap = frac * (s_hi - s_lo)
        if gap > 0:
            base = base + sample_stable_half(gap, rng.child(2, i))
        if base > 0:
            level_lists.append([base])
        else:
            bad[i] = True
            level_lists.append([])
    res2 = bp.clock_inversions_batched(
        level_lists, kernel_rng, dt0=dt, per_replicate_streams=True
    )
    h2 = np.full(n, np.nan)
    ok = ~bad & ~res2.excluded
    for i in np.nonzero(ok)[0]:
        h2[i] = res2.H[res2.offsets[i]]
    ok &= np.isfinite(h2)
    stranded = int((~ok).sum())
    t_ref = 2.0 * t if negative_control else t
    exact = _stable_chunked(t_ref, rng.child(3), int(ok.sum()))
    report.verdicts.append(
        st.ks_two_sample(
            h2[ok], exact, alpha=alpha,
            name=prefix + f"time-change-vs-exact[t={t:g},delta={delta:g}]",
        )
    )
    rate = stranded / n
    report.verdicts.append(
        st.TestVerdict(
            name=prefix + f"stranded-rate[t={t:g},delta={delta:g}]",
            statistic=float(rate),
            passed=bool(rate < STRANDED_RATE_LIMIT),
            n=(n,),
            detail=f"{stranded} replicates not finished within stage cap",
        )
    )
    report.budget_exclusions = stranded
    report.samples = {"clock_at_inverse_level": h2[ok]}
    return report


def verify_radial_clock_laplace(
    s_values, q_values, n, dt, rng, negative_control=False,
    k_sigma=st.DEFAULT_K_SIGMA,
):
    """Joint Laplace-type means of the clock and reciprocal radial part at a
    subordinated level factorize in closed form, while the two variables
    are far from independent: per (s, q) a mean check of
    exp(-q H)/R against exp(-arcsinh(s) sqrt(2q))/sqrt(1+s^2), plus a rank
    correlation that must be nonzero at |z| > 3.

    Negative control evaluates at level 1.1 s against the level-s target.
    """
    prefix = "control-" if negative_control else ""
    if negative_control:
        s_values, q_values = s_values[1:2], q_values[2:3]
    report = _new_report(
        prefix + "radial-laplace", "radial-clock-laplace",
        {
            "s_values": list(s_values), "q_values": list(q_values),
            "n": n, "dt": dt, "negative_control": negative_control,
        },
        rng,
    )
    total_excluded = 0
    for j, s in enumerate(s_values):
        s_eff = 1.1 * s if negative_control else s
        sig = _stable_chunked(s_eff, rng.child(0, j), n)
        h, lr, ex = _invert_single_levels(sig, rng.child(1, j), dt)
        keep = ~ex & np.isfinite(h) & np.isfinite(lr)
        total_excluded += int((~keep).sum())
        hk, lrk = h[keep], lr[keep]
        a_s = arg_sinh(s)[0]
        scale = 1.0 / math.sqrt(1.0 + s * s)
        for q in q_values:
            vals = np.exp(-q * hk - lrk) if q > 0 else np.exp(-lrk)
            target = math.exp(-a_s * math.sqrt(2.0 * q)) * scale
            _add_mean_check(
                report, vals, target,
                prefix + f"laplace-mean[s={s:g},q={q:g}]", k_sigma,
            )
        if not negative_control:
            rank_r = np.argsort(np.argsort(-lrk))
            rank_h = np.argsort(np.argsort(hk))
            rho = float(np.corrcoef(rank_r, rank_h)[0, 1])
            z = rho * math.sqrt(len(hk) - 1.0)
            report.verdicts.append(
                st.TestVerdict(
                    name=f"rank-dependence[s={s:g}]",
                    statistic=rho,
                    z_score=z,
                    passed=bool(abs(z) > 3.0),
                    n=(len(hk),),
                    detail="clock and reciprocal radial must correlate",
                )
            )
            report.samples[f"clock_s{j}"] = hk
            report.samples[f"log_radial_s{j}"] = lrk
    report.budget_exclusions = total_excluded
    return report


def _interleaved_jump_levels(jump_set: JumpSet):
    _, before, after = jump_set.levels_before_after()
    inter = np.empty(2 * len(before))
    inter[0::2] = before
    inter[1::2] = after
    # a drift increment below the float resolution of a giant jump can
    # leave a one-ulp ordering flip; clamp, the kernel needs sorted levels
    return np.maximum.accumulate(inter)


def _jump_sum_pair(
    horizon, epsilon, n, dt, rng, term_fn
):
    """Common-noise pair of jump-sum estimates at thresholds epsilon and
    epsilon/2: the finer set is drawn once, the coarser one is its filtered
    subset, and both are evaluated on identical per-replicate paths.
    Returns (vals_eps, vals_half, keep_mask)."""
    vals_f = np.empty(n)
    vals_h = np.empty(n)
    keep = np.ones(n, dtype=bool)
    for cidx, (lo, take) in enumerate(_chunk_bounds(n)):
        lists_h, lists_f = [], []
        for i in range(take):
            js = sample_stable_half_jumps(
                horizon, epsilon / 2.0, rng.child(0, cidx, i)
            )
            sel = js.sizes >= epsilon
            js_f = JumpSet(
                level_horizon=horizon, threshold=epsilon,
                locations=js.locations[sel], sizes=js.sizes[sel],
            )
            lists_h.append(_interleaved_jump_levels(js))
            lists_f.append(_interleaved_jump_levels(js_f))
        parent = rng.child(1, cidx)
        res_f = bp.clock_inversions_batched(
            lists_f, parent, dt0=dt, per_replicate_streams=True
        )
        res_h = bp.clock_inversions_batched(
            lists_h, parent, dt0=dt, per_replicate_streams=True
        )
        for i in range(take):
            row_ok = True
            for res, out in ((res_f, vals_f), (res_h, vals_h)):
                seg_h = res.H[res.offsets[i] : res.offsets[i + 1]]
                seg_r = res.log_R[res.offsets[i] : res.offsets[i + 1]]
                if res.excluded[i] or not np.isfinite(seg_h).all():
                    row_ok = False
                    break
                out[lo + i] = term_fn(seg_h[0::2], seg_h[1::2],
                                      seg_r[0::2], seg_r[1::2])
            keep[lo + i] = row_ok
    return vals_f, vals_h, keep


def _movement_verdict(report, name, target, vals_f, vals_h):
    d = vals_h - vals_f
    se_pair = float(d.std(ddof=1) / math.sqrt(len(d)))
    dev_f = abs(float(vals_f.mean()) - target)
    dev_h = abs(float(vals_h.mean()) - target)
    report.verdicts.append(
        st.TestVerdict(
            name=name,
            statistic=dev_f - dev_h,
            z_score=(dev_f - dev_h) / se_pair if se_pair else 0.0,
            passed=bool(dev_h <= dev_f + 2.0 * se_pair),
            n=(len(d),),
            detail="halving the jump threshold must not move the estimate "
            "away from the target",
        )
    )
    return se_pair


def verify_jump_sum_product_form(
    l, q, nu, epsilon, n, dt, rng, negative_control=False,
    k_sigma=st.DEFAULT_K_SIGMA,
):
    """Expected sum over subordinator jumps of a product functional -- a
    Laplace weight in the clock before the jump, restricted to levels below
    l/2, times one minus an exponential in the clock increment --
    factorizes into closed form. The jump sum is truncated at epsilon with
    a sqrt-epsilon bias allowance estimated by threshold halving on common
    noise, and the halved estimate must move toward the target.

    Negative control tests the same estimate against the target with q
    quadrupled.
    """
    prefix = "control-" if negative_control else ""
    report = _new_report(
        prefix + "jump-sum-product", "jump-sum-product-form",
        {
            "l": l, "q": q, "nu": nu, "epsilon": epsilon, "n": n, "dt": dt,
            "negative_control": negative_control,
        },
        rng,
    )
    lhalf = l / 2.0
    q_target = 4.0 * q if negative_control else q
    a_l = arg_sinh(lhalf)[0]
    target = (
        (1.0 - math.exp(-a_l * math.sqrt(2.0 * q_target)))
        / math.sqrt(2.0 * q_target)
        * math.sqrt(2.0 * nu)
    )

    def term_fn(hb, ha, rb, ra):
        return float(np.sum(np.exp(-q * hb) * -np.expm1(-nu * (ha - hb))))

    vals_f, vals_h, keep = _jump_sum_pair(lhalf, epsilon, n, dt, rng, term_fn)
    vals_f, vals_h = vals_f[keep], vals_h[keep]
    report.budget_exclusions = int((~keep).sum())
    allowance = _truncation_allowance(vals_f, vals_h, epsilon)
    _add_mean_check(
        report, vals_f, target, prefix + "product-form-mean", k_sigma,
        allowance=allowance,
    )
    if not negative_control:
        _movement_verdict(
            report, "threshold-halving-movement", target, vals_f, vals_h
        )
    report.samples = {"jump_sum": vals_f, "jump_sum_halved": vals_h}
    return report


def _closed_weighted_transform(l, q):
    """Closed form of the level-weighted Laplace factor for after-jump
    exponent one above the before-jump exponent."""
    a_l, a_prime = arg_sinh(l)
    root = math.sqrt(2.0 * q)
    return (1.0 - a_prime * math.exp(-a_l * root)) / root


def verify_weighted_jump_sum(
    l, q, nu, a_exp, b_exp, epsilon, n, dt, rng, n_path=4000,
    negative_control=False, k_sigma=st.DEFAULT_K_SIGMA,
):
    """Jump sums weighted by powers of the radial part before and after the
    jump factorize into a level transform times a jump-size transform.

    With exponents (0, 1) both factors are closed form and the check is a
    biased-mean test with threshold-halving allowance, as in the plain
    product form. With exponents (1, 2) the jump-size factor has no closed
    form; it is estimated by path Monte Carlo time integrals (together with
    a closed-form cross-check of the level factor) and the two sides must
    agree within a joint confidence band widened by the same measured
    truncation allowance (every jump term is positive, so truncation
    biases the sum strictly downward). The jump-size weight is bounded
    (one minus an exponential) for after-exponent at most one, and
    nu*y*exp(-nu*y) otherwise, where the bounded choice would have an
    infinite target.

    Negative control: both exponent pairs test against a product whose
    level transform is evaluated at 4q.
    """
    prefix = "control-" if negative_control else ""
    suffix = "special" if (a_exp, b_exp) == (0, 1) else "general"
    report = _new_report(
        prefix + f"weighted-jump-sum-{suffix}", f"weighted-jump-sum-{suffix}",
        {
            "l": l, "q": q, "nu": nu, "a_exp": a_exp, "b_exp": b_exp,
            "epsilon": epsilon, "n": n, "dt": dt, "n_path": n_path,
            "negative_control": negative_control,
        },
        rng,
    )
    bounded = b_exp <= 1

    def g_of(y, rate):
        return -np.expm1(-rate * y) if bounded else rate * y * np.exp(-rate * y)

    def term_fn(hb, ha, rb, ra):
        return float(
            np.sum(
                np.exp(-q * hb)
                * g_of(ha - hb, nu)
                * np.exp(a_exp * rb - b_exp * ra)
            )
        )

    vals_f, vals_h, keep = _jump_sum_pair(l, epsilon, n, dt, rng, term_fn)
    vals_f, vals_h = vals_f[keep], vals_h[keep]
    report.budget_exclusions = int((~keep).sum())

    if suffix == "special":
        q_target = 4.0 * q if negative_control else q
        target = _closed_weighted_transform(l, q_target) * math.sqrt(2.0 * nu)
        allowance = _truncation_allowance(vals_f, vals_h, epsilon)
        _add_mean_check(
            report, vals_f, target, prefix + "weighted-sum-mean", k_sigma,
            allowance=allowance,
        )
        if not negative_control:
            _movement_verdict(
                report, "threshold-halving-movement", target, vals_f, vals_h
            )
    else:
        root_2pi = math.sqrt(2.0 * math.pi)

        def f_plus(tt, bb, aa):
            return (
                g_of(tt, nu)
                * np.exp((2.0 - b_exp) * bb)
                * aa ** -1.5
                / root_2pi
            )

        def f_minus(tt, bb, aa):
            return (
                np.exp(-q * tt)
                / np.sqrt(2.0 * np.pi * aa)
                * -np.expm1(-l * l / (2.0 * aa))
            )

        lim_plus = 2.0 * nu / root_2pi
        lim_minus = math.sqrt(2.0 / math.pi)
        plus_vals, minus_vals = bp.brownian_time_integrals(
            [(f_plus, lim_plus), (f_minus, lim_minus)],
            rng.child(3), size=n_path,
        )
        q_level = 4.0 * q if negative_control else q
        closed_minus = _closed_weighted_transform(l, q_level)
        _add_mean_check(
            report, minus_vals, _closed_weighted_transform(l, q),
            prefix + "level-transform-crosscheck", k_sigma,
        )
        est_js = float(vals_f.mean())
        se_js = float(vals_f.std(ddof=1) / math.sqrt(len(vals_f)))
        est_plus = float(plus_vals.mean())
        se_plus = float(plus_vals.std(ddof=1) / math.sqrt(len(plus_vals)))
        product = closed_minus * est_plus
        se_prod = closed_minus * se_plus
        se_joint = math.sqrt(se_js ** 2 + se_prod ** 2)
        allowance = _truncation_allowance(vals_f, vals_h, epsilon)
        z = (est_js - product) / se_joint
        report.verdicts.append(
            st.TestVerdict(
                name=prefix + "factorization-joint-ci",
                statistic=est_js - product,
                z_score=z,
                passed=bool(
                    abs(est_js - product) <= k_sigma * se_joint + allowance
                ),
                n=(len(vals_f), n_path),
                detail="jump-sum estimate vs product of transform estimates, "
                "band widened by the measured truncation allowance",
            )
        )
        if not negative_control:
            _movement_verdict(
                report, "threshold-halving-movement", product, vals_f, vals_h
            )
        report.mc_estimates[prefix + "jump-sum"] = {
            "estimate": est_js, "se": se_js,
        }
        report.mc_estimates[prefix + "transform-product"] = {
            "estimate": product, "se": se_prod,
        }
    report.samples = {"weighted_jump_sum": vals_f}
    return report


def verify_subordinated_winding_cauchy(
    l_values, n, dt, rng, negative_control=False, alpha=st.DEFAULT_ALPHA,
    k_sigma=st.DEFAULT_K_SIGMA,
):
    """The planar winding angle at a subordinated level is Cauchy with
    scale arcsinh(l): KS against exact scaled Cauchy draws per l, plus a
    sign-test check that the absolute median sits at the scale.

    Negative control winds at level 2l against the level-l reference.
    """
    prefix = "control-" if negative_control else ""
    if negative_control:
        l_values = l_values[:1]
    report = _new_report(
        prefix + "winding-cauchy", "subordinated-winding-cauchy",
        {
            "l_values": list(l_values), "n": n, "dt": dt,
            "negative_control": negative_control,
        },
        rng,
    )
    total_excluded = 0
    for j, l in enumerate(l_values):
        l_eff = 2.0 * l if negative_control else l
        sig = _stable_chunked(l_eff, rng.child(0, j), n)
        h, _, ex = _invert_single_levels(sig, rng.child(1, j), dt)
        keep = ~ex & np.isfinite(h)
        total_excluded += int((~keep).sum())
        theta = np.sqrt(h[keep]) * _normals(rng.child(2, j), n)[keep]
        a_l = arg_sinh(l)[0]
        u = rng.child(3, j).generator.uniform(size=n)[: keep.sum()]
        exact = a_l * np.tan(np.pi * (u - 0.5))
        report.verdicts.append(
            st.ks_two_sample(
                theta, exact, alpha=alpha,
                name=prefix + f"winding-vs-cauchy[l={l:g}]",
            )
        )
        m = len(theta)
        above = int((np.abs(theta) > a_l).sum())
        z = (above - m / 2.0) / math.sqrt(m / 4.0)
        report.verdicts.append(
            st.TestVerdict(
                name=prefix + f"abs-median-at-scale[l={l:g}]",
                statistic=above / m,
                z_score=z,
                passed=bool(abs(z) <= k_sigma),
                n=(m,),
                detail="sign test of |angle| against the Cauchy scale",
            )
        )
        report.samples[f"winding_l{j}"] = theta
    report.budget_exclusions = total_excluded
    return report


def verify_spitzer_winding_limit(
    t_values, n, dt, rng, negative_control=False
):
    """The normalized winding angle 2 theta_t / log t converges in law to
    standard Cauchy: the KS distance to that limit must decrease strictly
    along an increasing time grid and end below 0.05.

    All times share one path per replicate (the clock values at the three
    times come from a single inversion run) and one final normal, so the
    distance sequence tracks convergence instead of resampling noise.

    Negative control checks the final distance against a Cauchy of twice
    the scale, which must exceed the 0.05 bound.
    """
    prefix = "control-" if negative_control else ""
    report = _new_report(
        prefix + "spitzer-limit", "winding-log-limit",
        {
            "t_values": list(t_values), "n": n, "dt": dt,
            "negative_control": negative_control,
        },
        rng,
    )
    t_values = list(t_values)
    m = len(t_values)
    h = np.empty((n, m))
    ex = np.zeros(n, dtype=bool)
    for c, (lo, take) in enumerate(_chunk_bounds(n)):
        res = bp.clock_inversions_batched(
            [t_values] * take, rng.child(0, c), dt0=dt
        )
        h[lo : lo + take] = res.H.reshape(take, m)
        ex[lo : lo + take] = res.excluded
    norm = _normals(rng.child(1), n)
    keep = ~ex & np.isfinite(h).all(axis=1)
    report.budget_exclusions = int((~keep).sum())
    distances = []
    for j, t in enumerate(t_values):
        x = 2.0 * np.sqrt(h[keep, j]) * norm[keep] / math.log(t)
        distances.append(float(st.ks_distance_to_cdf(x, _cauchy_cdf)))
        report.mc_estimates[f"cauchy-distance[t={t:g}]"] = {
            "estimate": distances[-1], "se": None,
        }
        report.samples[f"normalized_winding_t{j}"] = x
    if negative_control:
        x_last = report.samples[f"normalized_winding_t{m-1}"]
        d_wrong = float(
            st.ks_distance_to_cdf(x_last, lambda v: _cauchy_cdf(v / 2.0))
        )
        # one-sample asymptotic p so the rejection is a proper p < alpha
        n_keep = int(keep.sum())
        p_wrong = 1.0 - kolmogorov_cdf(d_wrong * math.sqrt(n_keep))
        report.verdicts.append(
            st.TestVerdict(
                name=prefix + "final-distance-small",
                statistic=d_wrong,
                p_value=p_wrong,
                passed=bool(p_wrong > 0.01),
                n=(n_keep,),
                detail="fit to a doubled-scale Cauchy must reject",
            )
        )
        return report
    drops = [distances[j] - distances[j + 1] for j in range(m - 1)]
    report.verdicts.append(
        st.TestVerdict(
            name="distance-monotone-decrease",
            statistic=float(min(drops)),
            passed=bool(min(drops) > 0.0),
            n=(int(keep.sum()),),
            detail="KS distance to the Cauchy limit along the time grid",
        )
    )
    report.verdicts.append(
        st.TestVerdict(
            name="final-distance-small",
            statistic=distances[-1],
            passed=bool(distances[-1] < 0.05),
            n=(int(keep.sum()),),
        )
    )
    return report


def verify_joint_laplace_mellin(
    b_values, mu_values, lam_values, n, dt, rng, negative_control=False,
    k_sigma=st.DEFAULT_K_SIGMA,
):
    """Joint exponential moments of the clock and radial part at a
    subordinated level match the hypergeometric closed form on a parameter
    grid, and the closed form itself degenerates to the two analytic
    anchors: exp(-mu*arcsinh(lam)) at b=0 and the constant 1 at b=-mu/2.

    Negative control evaluates samples at level 1.1*lam against the
    level-lam closed form at the first anchor point.
    """
    prefix = "control-" if negative_control else ""
    if negative_control:
        b_values, mu_values, lam_values = [0.0], [1.0], [1.0]
    report = _new_report(
        prefix + "joint-laplace-mellin", "joint-laplace-mellin",
        {
            "b_values": list(b_values), "mu_values": list(mu_values),
            "lam_values": list(lam_values), "n": n, "dt": dt,
            "negative_control": negative_control,
        },
        rng,
    )
    total_excluded = 0
    for j, lam in enumerate(lam_values):
        lam_eff = 1.1 * lam if negative_control else lam
        sig = _stable_chunked(lam_eff, rng.child(0, j), n)
        h, lr, ex = _invert_single_levels(sig, rng.child(1, j), dt)
        keep = ~ex & np.isfinite(h) & np.isfinite(lr)
        total_excluded += int((~keep).sum())
        hk, lrk = h[keep], lr[keep]
        for b in b_values:
            for mu in mu_values:
                vals = np.exp(-2.0 * b * lrk - mu * mu * hk / 2.0)
                target = joint_laplace_mellin_closed_form(
                    JointLaplaceMellinParams(b=b, mu=mu, lam=lam)
                )
                _add_mean_check(
                    report, vals, target,
                    prefix + f"laplace-mellin-mean[b={b:g},mu={mu:g},lam={lam:g}]",
                    k_sigma,
                )
        report.samples[f"clock_lam{j}"] = hk
        report.samples[f"log_radial_lam{j}"] = lrk
    if not negative_control:
        worst_drift = 0.0
        for mu in mu_values:
            for lam in lam_values:
                closed = joint_laplace_mellin_closed_form(
                    JointLaplaceMellinParams(b=0.0, mu=mu, lam=lam)
                )
                worst_drift = max(
                    worst_drift,
                    abs(closed - math.exp(-mu * arg_sinh(lam)[0])),
                )
        report.verdicts.append(
            st.TestVerdict(
                name="driftless-anchor-analytic",
                statistic=float(worst_drift),
                passed=bool(worst_drift < 1e-10),
                detail="b=0 closed form must equal exp(-mu*arcsinh(lam))",
            )
        )
        worst_unit = 0.0
        for lam in lam_values:
            closed = joint_laplace_mellin_closed_form(
                JointLaplaceMellinParams(b=-0.5, mu=1.0, lam=lam)
            )
            worst_unit = max(worst_unit, abs(closed - 1.0))
        report.verdicts.append(
            st.TestVerdict(
                name="unit-anchor-analytic",
                statistic=float(worst_unit),
                passed=bool(worst_unit < 1e-10),
                detail="b=-mu/2 closed form must equal 1",
            )
        )
    report.budget_exclusions = total_excluded
    return report


def verify_exp_functional_beta_gamma(
    nu, p, n, dt, rng, negative_control=False, alpha=st.DEFAULT_ALPHA,
    k_sigma=st.DEFAULT_K_SIGMA,
):
    """The drifted exponential functional stopped at an independent
    exponential time has the exact beta-over-2-gamma law: KS between the
    path simulation and the exact sampler, moment checks against the
    closed Mellin values at exponents with finite variance, and the
    analytic mean identity at the driftless rate-4 point.

    Negative control simulates the path side at rate 2p.
    """
    prefix = "control-" if negative_control else ""
    report = _new_report(
        prefix + "beta-gamma-sampler", "exp-functional-beta-gamma",
        {
            "nu": nu, "p": p, "n": n, "dt": dt,
            "negative_control": negative_control,
        },
        rng,
    )
    p_path = 2.0 * p if negative_control else p
    path_parts = []
    for c, (_, take) in enumerate(_chunk_bounds(n)):
        path_parts.append(
            bp.exp_functional_at_exponential_time(
                nu, p_path, dt, rng.child(0, c), size=take
            )
        )
    path_vals = np.concatenate(path_parts)
    exact_parts = []
    for c, (_, take) in enumerate(_chunk_bounds(n)):
        exact_parts.append(
            sample_exp_functional_beta_gamma(nu, p, rng.child(1, c), size=take)
        )
    exact_vals = np.concatenate(exact_parts)
    report.verdicts.append(
        st.ks_two_sample(
            path_vals, exact_vals, alpha=alpha,
            name=prefix + f"path-vs-exact[nu={nu:g},p={p:g}]",
        )
    )
    if not negative_control:
        shape_b = MellinParams(r=0.0, nu=nu, p=p).b
        for r in (0.25, 0.5):
            # moment z-tests need finite variance: E[X^{2r}] exists iff 2r < b
            if 2.0 * r >= shape_b:
                continue
            target = mellin_exp_functional(MellinParams(r=r, nu=nu, p=p))
            _add_mean_check(
                report, exact_vals ** r, target,
                f"mellin-moment[r={r:g},nu={nu:g},p={p:g}]", k_sigma,
            )
        if nu == 0 and p == 4:
            gap = abs(
                mellin_exp_functional(MellinParams(r=1.0, nu=0.0, p=4.0)) - 0.5
            )
            report.verdicts.append(
                st.TestVerdict(
                    name="mean-moment-analytic[nu=0,p=4]",
                    statistic=float(gap),
                    passed=bool(gap < 1e-12),
                    detail="closed Mellin value at r=1 must equal 1/2",
                )
            )
    report.samples = {"path_functional": path_vals, "exact_functional": exact_vals}
    return report


# -------------------------------------------------------------------- registry


@dataclass(frozen=True)
class RegisteredTest:
    """One runnable verification: CLI name, behavior anchor, stream index,
    default parameters, and the runner closure."""

    name: str
    anchor: str
    index: int
    defaults: dict
    runner: object


def _merge_parts(name, anchor, parts, parameters, rng, labels):
    merged = _new_report(name, anchor, parameters, rng)
    for label, part in zip(labels, parts):
        merged.verdicts.extend(part.verdicts)
        for key, val in part.mc_estimates.items():
            merged.mc_estimates[key] = val
        for key, val in part.analytic_targets.items():
            merged.analytic_targets[key] = val
        merged.budget_exclusions += part.budget_exclusions
        for key, col in (part.samples or {}).items():
            merged.samples[f"{key}[{label}]"] = col
    return merged


def _run_bougerol(p, rng, control):
    if control:
        return verify_hyperbolic_sine_identity(
            1.0, p["n"], p["dt"], rng.child(40), negative_control=True,
            alpha=p["alpha"],
        )
    parts = [
        verify_hyperbolic_sine_identity(
            t, p["n"], p["dt"], rng.child(40, j), alpha=p["alpha"]
        )
        for j, t in enumerate(p["t_values"])
    ]
    return _merge_parts(
        "hyperbolic-sine", "hyperbolic-sine-identity", parts, dict(p), rng,
        [f"t={t:g}" for t in p["t_values"]],
    )


def _run_density_kernel(p, rng, control):
    if control:
        return verify_functional_density_kernel(
            1.0, p["x_grid"], p["n"], p["dt"], rng.child(40),
            negative_control=True, k_sigma=p["k_sigma"],
        )
    parts = [
        verify_functional_density_kernel(
            t, p["x_grid"], p["n"], p["dt"], rng.child(40, j),
            k_sigma=p["k_sigma"],
        )
        for j, t in enumerate(p["t_values"])
    ]
    return _merge_parts(
        "density-kernel", "functional-density-kernel", parts, dict(p), rng,
        [f"t={t:g}" for t in p["t_values"]],
    )


def _run_inverse_moments(p, rng, control):
    if control:
        return verify_functional_inverse_moments(
            1.0, p["n"], p["dt"], rng.child(40), negative_control=True,
            k_sigma=p["k_sigma"],
        )
    parts = [
        verify_functional_inverse_moments(
            t, p["n"], p["dt"], rng.child(40, j), k_sigma=p["k_sigma"]
        )
        for j, t in enumerate(p["t_values"])
    ]
    return _merge_parts(
        "inverse-moments", "functional-inverse-moments", parts, dict(p), rng,
        [f"t={t:g}" for t in p["t_values"]],
    )


def _run_sinh_local_time(p, rng, control):
    return verify_sinh_local_time_triple(
        p["t"], p["n"], p["dt"], rng.child(40), n_perm=p["n_perm"],
        negative_control=control, alpha=p["alpha"],
    )


def _run_clock_subordination(p, rng, control):
    return verify_clock_subordination(
        p["s_values"], p["n"], p["dt"], rng.child(40),
        negative_control=control, alpha=p["alpha"], k_sigma=p["k_sigma"],
    )


def _run_clock_time_change(p, rng, control):
    if control:
        return verify_clock_time_change(
            1.0, p["delta"], p["n"], p["dt"], rng.child(40),
            negative_control=True, alpha=p["alpha"],
        )
    parts = []
    labels = []
    stability = []
    for j, t in enumerate(p["t_values"]):
        fine = verify_clock_time_change(
            t, p["delta"], p["n"], p["dt"], rng.child(40, j), alpha=p["alpha"]
        )
        halved = verify_clock_time_change(
            t, p["delta"] / 2.0, p["n"], p["dt"], rng.child(41, j),
            alpha=p["alpha"],
        )
        parts.extend([fine, halved])
        labels.extend([f"t={t:g}", f"t={t:g},halved"])
        stability.append(
            st.TestVerdict(
                name=f"mesh-halving-stable[t={t:g}]",
                statistic=float(fine.passed()) - float(halved.passed()),
                passed=bool(fine.passed() and halved.passed()),
                detail="verdict must hold at the base mesh and at half step",
            )
        )
    merged = _merge_parts(
        "clock-time-change", "clock-time-change", parts, dict(p), rng, labels
    )
    merged.verdicts.extend(stability)
    return merged


def _run_radial_laplace(p, rng, control):
    return verify_radial_clock_laplace(
        p["s_values"], p["q_values"], p["n"], p["dt"], rng.child(40),
        negative_control=control, k_sigma=p["k_sigma"],
    )


def _run_jump_sum_product(p, rng, control):
    return verify_jump_sum_product_form(
        p["l"], p["q"], p["nu"], p["epsilon"], p["n"], p["dt"], rng.child(40),
        negative_control=control, k_sigma=p["k_sigma"],
    )


def _run_weighted_special(p, rng, control):
    return verify_weighted_jump_sum(
        p["l"], p["q"], p["nu"], 0, 1, p["epsilon"], p["n"], p["dt"],
        rng.child(40), negative_control=control, k_sigma=p["k_sigma"],
    )


def _run_weighted_general(p, rng, control):
    return verify_weighted_jump_sum(
        p["l"], p["q"], p["nu"], 1, 2, p["epsilon"], p["n"], p["dt"],
        rng.child(40), n_path=p["n_path"], negative_control=control,
        k_sigma=p["k_sigma"],
    )


def _run_winding_cauchy(p, rng, control):
    return verify_subordinated_winding_cauchy(
        p["l_values"], p["n"], p["dt"], rng.child(40),
        negative_control=control, alpha=p["alpha"], k_sigma=p["k_sigma"],
    )


def _run_spitzer(p, rng, control):
    return verify_spitzer_winding_limit(
        p["t_values"], p["n"], p["dt"], rng.child(40), negative_control=control
    )


def _run_joint_laplace_mellin(p, rng, control):
    return verify_joint_laplace_mellin(
        p["b_values"], p["mu_values"], p["lam_values"], p["n"], p["dt"],
        rng.child(40), negative_control=control, k_sigma=p["k_sigma"],
    )


def _run_beta_gamma(p, rng, control):
    pairs = p["pairs"][:1] if control else p["pairs"]
    parts = [
        verify_exp_functional_beta_gamma(
            nu, pp, p["n"], p["dt"], rng.child(40, j),
            negative_control=control, alpha=p["alpha"], k_sigma=p["k_sigma"],
        )
        for j, (nu, pp) in enumerate(pairs)
    ]
    if control:
        return parts[0]
    return _merge_parts(
        "beta-gamma-sampler", "exp-functional-beta-gamma", parts, dict(p),
        rng, [f"nu={nu:g},p={pp:g}" for nu, pp in p["pairs"]],
    )


_COMMON = {"alpha": st.DEFAULT_ALPHA, "k_sigma": st.DEFAULT_K_SIGMA}

REGISTRY = [
    RegisteredTest(
        "bougerol", "hyperbolic-sine-identity", 0,
        {"t_values": [0.5, 1.0, 2.0], "n": 100000, "dt": 2.0 ** -10,
         **_COMMON},
        _run_bougerol,
    ),
    RegisteredTest(
        "density-kernel", "functional-density-kernel", 1,
        {"t_values": [0.5, 1.0, 2.0], "x_grid": [0.0, 0.5, 1.0, 2.0, 4.0],
         "n": 100000, "dt": 2.0 ** -10, **_COMMON},
        _run_density_kernel,
    ),
    RegisteredTest(
        "inverse-moments", "functional-inverse-moments", 2,
        {"t_values": [0.5, 1.0, 2.0], "n": 100000, "dt": 2.0 ** -10,
         **_COMMON},
        _run_inverse_moments,
    ),
    RegisteredTest(
        "sinh-local-time", "sinh-local-time-triple", 3,
        {"t": 1.0, "n": 20000, "n_perm": 500, "dt": 2.0 ** -10, **_COMMON},
        _run_sinh_local_time,
    ),
    RegisteredTest(
        "clock-subordination", "clock-subordination", 4,
        {"s_values": [0.5, 1.0, 2.0], "n": 10000, "dt": 2.0 ** -10,
         **_COMMON},
        _run_clock_subordination,
    ),
    RegisteredTest(
        "clock-time-change", "clock-time-change", 5,
        {"t_values": [0.5, 1.0], "delta": 2.0 ** -7, "n": 5000,
         "dt": 2.0 ** -10, **_COMMON},
        _run_clock_time_change,
    ),
    RegisteredTest(
        "radial-laplace", "radial-clock-laplace", 6,
        {"s_values": [0.5, 1.0, 2.0], "q_values": [0.0, 0.5, 1.0, 2.0],
         "n": 10000, "dt": 2.0 ** -10, **_COMMON},
        _run_radial_laplace,
    ),
    RegisteredTest(
        "jump-sum-product", "jump-sum-product-form", 7,
        {"l": 2.0, "q": 1.0, "nu": 1.0, "epsilon": 1e-4, "n": 10000,
         "dt": 2.0 ** -10, **_COMMON},
        _run_jump_sum_product,
    ),
    RegisteredTest(
        "weighted-jump-sum-special", "weighted-jump-sum-special", 8,
        {"l": 2.0, "q": 0.5, "nu": 1.0, "epsilon": 1e-4, "n": 10000,
         "dt": 2.0 ** -10, **_COMMON},
        _run_weighted_special,
    ),
    RegisteredTest(
        "weighted-jump-sum-general", "weighted-jump-sum-general", 9,
        {"l": 2.0, "q": 0.5, "nu": 1.0, "epsilon": 1e-4, "n": 10000,
         "n_path": 4000, "dt": 2.0 ** -10, **_COMMON},
        _run_weighted_general,
    ),
    RegisteredTest(
        "winding-cauchy", "subordinated-winding-cauchy", 10,
        {"l_values": [1.0, 2.0], "n": 10000, "dt": 2.0 ** -10, **_COMMON},
        _run_winding_cauchy,
    ),
    RegisteredTest(
        "spitzer-limit", "winding-log-limit", 11,
        {"t_values": [100.0, 1000.0, 10000.0], "n": 5000, "dt": 2.0 ** -10,
         **_COMMON},
        _run_spitzer,
    ),
    RegisteredTest(
        "joint-laplace-mellin", "joint-laplace-mellin", 12,
        {"b_values": [-0.5, 0.0, 0.5], "mu_values": [1.0, 1.5, 2.0],
         "lam_values": [0.5, 1.0, 2.0], "n": 20000, "dt": 2.0 ** -10,
         **_COMMON},
        _run_joint_laplace_mellin,
    ),
    RegisteredTest(
        "beta-gamma-sampler", "exp-functional-beta-gamma", 13,
        {"pairs": [(0.0, 4.0), (1.0, 2.0)], "n": 10000, "dt": 2.0 ** -8,
         **_COMMON},
        _run_beta_gamma,
    ),
]

_BY_NAME = {entry.name: entry for entry in REGISTRY}


def registry_names():
    return [entry.name for entry in REGISTRY]


def get_registered(name: str) -> RegisteredTest:
    if name not in _BY_NAME:
        raise KeyError(f"unknown test {name!r}; known: {registry_names()}")
    return _BY_NAME[name]


def run_registered(
    name,
    master_seed,
    overrides=None,
    negative_control=False,
    rerun=False,
) -> TestReport:
    """Run one registered verification with optional parameter overrides.

    The stream id encodes (test index, salt): salt 0 for the first run,
    a rerun salt for the suite's one fresh-seed retry, and a control salt
    in negative-control mode, so all three draw disjoint randomness.
    """
    entry = get_registered(name)
    params = dict(entry.defaults)
    for key, val in (overrides or {}).items():
        if val is not None:
            params[key] = val
    salt = _CONTROL_SALT if negative_control else (_RERUN_SALT if rerun else 0)
    rng = RngStream(master_seed, (entry.index, salt))
    start = time.perf_counter()
    report = entry.runner(params, rng, negative_control)
    report.runtime_seconds = time.perf_counter() - start
    # registry name is canonical regardless of op-internal labels
    report.test_name = ("control-" if negative_control else "") + entry.name
    return report
