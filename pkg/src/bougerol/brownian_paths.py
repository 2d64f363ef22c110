"""Discretized Brownian path machinery.

Paths with optional drift carry their accumulated exponential functional
A_t = integral of exp(2 B_s) ds, computed per step by the exact integral of
the exponential of the linear interpolant (the exponential-trapezoid rule).
That rule is closed-form invertible, which is what the clock inversion
uses: the clock H at level u is the first time A exceeds u, and the radial
part of the associated planar process is exp(B at H).

Two inversion engines live here. `invert_exp_functional` is the scalar,
extendable-path form with a fixed step, growth in chunks of 2^14 steps, a
2^26-step budget and an overflow-shifted accumulator. The batched engine
`clock_inversions_batched` advances many replicates in lockstep chunks and
doubles its step geometrically after a fine prefix, so the relative step
stays near 1/2048 of elapsed time; that keeps heavy-tailed subordinator
levels invertible within a 1e9 time horizon at per-replicate exclusion
rates well below 0.1%.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from bougerol.samplers import sample_stable_half

__all__ = [
    "GridPath",
    "ClockEval",
    "BatchClockResult",
    "BudgetExceeded",
    "simulate_bm",
    "joint_bt_at",
    "joint_bt_at_with_coarse",
    "invert_exp_functional",
    "eval_clock_at_subordinator",
    "clock_inversions_batched",
    "winding_at_time",
    "exp_functional_at_exponential_time",
    "brownian_time_integrals",
]

EXTEND_CHUNK = 2 ** 14
DEFAULT_STEP_BUDGET = 2 ** 26
OVERFLOW_SHIFT_AT = 1e300

BATCH_DT0 = 2.0 ** -10
BATCH_CHUNK_STEPS = 1024
BATCH_FINE_CHUNKS = 8
BATCH_T_MAX = 1.0e9

_SMALL_DB = 1e-9


class BudgetExceeded(RuntimeError):
    """Raised when a scalar inversion exhausts its step budget."""

    def __init__(self, level, steps, reached):
        self.level = level
        self.steps = steps
        self.reached = reached
        super().__init__(
            f"step budget {steps} exhausted before A reached level {level!r} "
            f"(got to {reached!r})"
        )


def _gen(rng) -> np.random.Generator:
    return getattr(rng, "generator", rng)


def _step_integrals(b_prev, db, dt):
    """Exact integral of exp(2 * linear bridge) over one step, vectorized.

    Returns dt * (exp(2 b1) - exp(2 b0)) / (2 db), with the flat-step limit
    dt * exp(2 b0) when |db| is tiny. Overflowing steps come back inf."""
    with np.errstate(over="ignore", invalid="ignore"):
        e0 = np.exp(2.0 * b_prev)
        e1 = np.exp(2.0 * (b_prev + db))
        small = np.abs(db) < _SMALL_DB
        out = np.where(
            small, dt * e0, dt * (e1 - e0) / np.where(small, 1.0, 2.0 * db)
        )
    return np.nan_to_num(out, nan=np.inf, posinf=np.inf, neginf=0.0)


def _invert_in_step(b_prev, db, dt, remainder):
    """Time offset s in [0, dt] at which the step's running exponential
    integral equals `remainder`, plus the interpolated path value there.

    Solves integral_0^s exp(2(b_prev + k v)) dv = remainder for the linear
    slope k = db/dt. Positive slopes go through the log-sum form so deep
    negative b_prev cannot overflow."""
    k = db / dt
    if abs(db) < _SMALL_DB:
        s = remainder * math.exp(-2.0 * b_prev)
    elif k > 0:
        log_arg = math.log(2.0 * k * remainder)
        s = (np.logaddexp(log_arg, 2.0 * b_prev) - 2.0 * b_prev) / (2.0 * k)
    else:
        # roundoff can push the argument a hair at or below -1 when the
        # crossing sits exactly at the step end; clamp just inside
        arg = max(2.0 * k * remainder * math.exp(-2.0 * b_prev),
                  np.nextafter(-1.0, 0.0))
        s = math.log1p(arg) / (2.0 * k)
    s = min(max(s, 0.0), dt)
    return s, b_prev + k * s


def _invert_in_step_vec(b_prev, db, dt, remainder):
    """Vectorized form of _invert_in_step over aligned arrays."""
    k = db / dt
    flat = np.abs(db) < _SMALL_DB
    kk = np.where(flat, 1.0, k)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        s_flat = remainder * np.exp(-2.0 * b_prev)
        s_pos = (
            np.logaddexp(np.log(2.0 * kk * remainder), 2.0 * b_prev)
            - 2.0 * b_prev
        ) / (2.0 * kk)
        arg = np.maximum(
            2.0 * kk * remainder * np.exp(-2.0 * b_prev),
            np.nextafter(-1.0, 0.0),
        )
        s_neg = np.log1p(arg) / (2.0 * kk)
    s = np.where(flat, s_flat, np.where(k > 0, s_pos, s_neg))
    s = np.clip(s, 0.0, dt)
    return s, b_prev + k * s


@dataclass
class GridPath:
    """Uniform-step Brownian path with drift and its accumulated
    exponential functional.

    values[i] is the path at time i*dt starting from 0; cum_a[i] is the
    functional at that time in the current representation. A true value is
    cum_a[i] * exp(log_scale): the scale shifts away from 0 only when the
    accumulator nears the overflow guard, after which earlier entries may
    degrade but the increasing tail stays exact. Extend on demand with
    `extend`; storage grows by capacity doubling so long inversions stay
    linear in the step count.
    """

    dt: float
    nu: float = 0.0
    values: np.ndarray = field(default_factory=lambda: np.zeros(1))
    cum_a: np.ndarray = field(default_factory=lambda: np.zeros(1))
    log_scale: float = 0.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        self._buf_b = np.array(self.values, dtype=float)
        self._buf_a = np.array(self.cum_a, dtype=float)
        self._n = len(self._buf_b)
        self._sync()

    def _sync(self):
        self.values = self._buf_b[: self._n]
        self.cum_a = self._buf_a[: self._n]

    def _reserve(self, extra: int):
        need = self._n + extra
        if need > len(self._buf_b):
            cap = max(need, 2 * len(self._buf_b))
            for name in ("_buf_b", "_buf_a"):
                old = getattr(self, name)
                fresh = np.empty(cap)
                fresh[: self._n] = old[: self._n]
                setattr(self, name, fresh)

    @property
    def n_steps(self) -> int:
        return self._n - 1

    @property
    def t_end(self) -> float:
        return self.n_steps * self.dt

    def a_true_end(self) -> float:
        return float(self.cum_a[-1]) * math.exp(self.log_scale)

    def extend(self, n_steps: int, rng) -> None:
        """Append n_steps fresh increments, accumulating the functional."""
        g = _gen(rng)
        b_last = float(self._buf_b[self._n - 1])
        if 2.0 * b_last - self.log_scale > 300.0:
            # rebase before the accumulator can overflow mid-chunk; early
            # entries may underflow but they are behind any future level
            bump = 2.0 * b_last - self.log_scale
            self._buf_a[: self._n] *= math.exp(-bump)
            self.log_scale += bump
        self._reserve(n_steps)
        db = self.nu * self.dt + math.sqrt(self.dt) * g.standard_normal(n_steps)
        b_prev = b_last + np.concatenate([[0.0], np.cumsum(db[:-1])])
        shifted_prev = b_prev - self.log_scale / 2.0
        da = _step_integrals(shifted_prev, db, self.dt)
        lo = self._n
        self._buf_b[lo : lo + n_steps] = b_prev + db
        self._buf_a[lo : lo + n_steps] = self._buf_a[lo - 1] + np.cumsum(da)
        self._n += n_steps
        self._sync()
        if self.cum_a[-1] > OVERFLOW_SHIFT_AT:
            bump = math.log(self.cum_a[-1])
            self._buf_a[: self._n] *= math.exp(-bump)
            self.log_scale += bump


def simulate_bm(t_end: float, dt: float, nu: float, rng) -> GridPath:
    """Fresh path on [0, t_end] with drift nu and step dt."""
    if not 0 < dt <= t_end:
        raise ValueError(f"need 0 < dt <= t_end, got dt={dt}, t_end={t_end}")
    path = GridPath(dt=dt, nu=nu)
    path.extend(int(round(t_end / dt)), rng)
    return path


def _endpoint_batches(t, dt, nu, g, size, want_coarse=False):
    """(B_t, A_t) endpoint arrays for `size` independent paths, simulated
    row-chunked. With want_coarse, also accumulates the functional on the
    every-second-point decimation of the same paths (step 2 dt)."""
    steps = int(round(t / dt))
    if steps < 1 or (want_coarse and steps % 2):
        raise ValueError("t must span a positive (even, for coarse) step count")
    row_chunk = max(1, int(8e6 // steps))
    b_out = np.empty(size)
    a_out = np.empty(size)
    a_coarse = np.empty(size) if want_coarse else None
    done = 0
    while done < size:
        rows = min(row_chunk, size - done)
        db = nu * dt + math.sqrt(dt) * g.standard_normal((rows, steps))
        b = np.cumsum(db, axis=1)
        b_prev = np.concatenate([np.zeros((rows, 1)), b[:, :-1]], axis=1)
        da = _step_integrals(b_prev, db, dt)
        a_out[done : done + rows] = da.sum(axis=1)
        b_out[done : done + rows] = b[:, -1]
        if want_coarse:
            bc = b[:, 1::2]
            bc_prev = np.concatenate([np.zeros((rows, 1)), bc[:, :-1]], axis=1)
            dbc = bc - bc_prev
            a_coarse[done : done + rows] = _step_integrals(
                bc_prev, dbc, 2.0 * dt
            ).sum(axis=1)
        done += rows
    return b_out, a_out, a_coarse


def joint_bt_at(t: float, dt: float, rng, size=None, nu: float = 0.0):
    """Endpoint pair (B_t, A_t) from fresh paths; scalar or batched."""
    if not 0 < dt <= t:
        raise ValueError(f"need 0 < dt <= t, got dt={dt}, t={t}")
    g = _gen(rng)
    n = 1 if size is None else size
    b, a, _ = _endpoint_batches(t, dt, nu, g, n)
    if size is None:
        return float(b[0]), float(a[0])
    return b, a


def joint_bt_at_with_coarse(t: float, dt_fine: float, rng, size: int, nu: float = 0.0):
    """(B_t, A_fine, A_coarse): the functional of each path accumulated at
    step dt_fine and, on the decimated path, at 2*dt_fine. Common paths
    make the difference of the two estimates nearly noise-free, which is
    what the step-halving bias check wants."""
    g = _gen(rng)
    return _endpoint_batches(t, dt_fine, nu, g, size, want_coarse=True)


def invert_exp_functional(path: GridPath, level: float, rng):
    """First time H with A_H = level on the given extendable path, plus the
    linearly interpolated path value there.

    Extends the path in chunks of 2^14 steps while A is short of the level;
    raises BudgetExceeded past 2^26 total steps. Monotone in level along
    one path.
    """
    if level < 0:
        raise ValueError(f"level must be >= 0, got {level}")
    if level == 0.0:
        return 0.0, 0.0
    while True:
        level_scaled = level * math.exp(-path.log_scale)
        if path.cum_a[-1] >= level_scaled:
            break
        if path.n_steps + EXTEND_CHUNK > DEFAULT_STEP_BUDGET:
            raise BudgetExceeded(level, path.n_steps, path.a_true_end())
        path.extend(EXTEND_CHUNK, rng)
    level_scaled = level * math.exp(-path.log_scale)
    idx = int(np.searchsorted(path.cum_a, level_scaled, side="left"))
    b_prev = float(path.values[idx - 1])
    db = float(path.values[idx] - path.values[idx - 1])
    remainder = level_scaled - float(path.cum_a[idx - 1])
    shifted_prev = b_prev - path.log_scale / 2.0
    s, _ = _invert_in_step(shifted_prev, db, path.dt, remainder)
    b_at = b_prev + (db / path.dt) * s
    return (idx - 1) * path.dt + s, b_at


@dataclass
class ClockEval:
    """Joint evaluation of the clock at one subordinated level: the
    local-time coordinate, the subordinator value there, the clock value H,
    and log of the radial part (the path value at the inversion time)."""

    lam: float
    sigma_level: float
    H: float
    log_R: float


def eval_clock_at_subordinator(
    levels, dt: float, rng, sigma_levels=None
) -> list:
    """One replicate of the subordinated clock: draw the subordinator at
    the requested local-time levels (exact stable(1/2) increments), or take
    explicit sigma levels as given, then invert the functional of a single
    fresh path at every level so the joint law across levels is honest.

    Returns a list of ClockEval; scalar fixed-step engine, budget errors
    propagate.
    """
    levels = [float(v) for v in levels]
    if any(v < 0 for v in levels):
        raise ValueError("levels must be nonnegative")
    if sorted(levels) != levels:
        raise ValueError("levels must be sorted increasing")
    g = _gen(rng)
    if sigma_levels is None:
        sigma_levels = []
        prev_lam, prev_sig = 0.0, 0.0
        for lam in levels:
            if lam > prev_lam:
                prev_sig += sample_stable_half(lam - prev_lam, g)
            prev_lam = lam
            sigma_levels.append(prev_sig)
    else:
        sigma_levels = [float(v) for v in sigma_levels]
        if len(sigma_levels) != len(levels):
            raise ValueError("sigma_levels must align with levels")
    path = GridPath(dt=dt)
    out = []
    for lam, sig in zip(levels, sigma_levels):
        h, b_at = invert_exp_functional(path, sig, g)
        out.append(ClockEval(lam=lam, sigma_level=sig, H=h, log_R=b_at))
    return out


@dataclass
class BatchClockResult:
    """Flattened clock inversions for a batch of replicates.

    H and log_R align with the concatenation of the per-replicate level
    lists; offsets[i]:offsets[i+1] slices replicate i. excluded marks
    replicates that outran the time horizon (their entries stay NaN and
    must be dropped pairwise by callers)."""

    H: np.ndarray
    log_R: np.ndarray
    offsets: np.ndarray
    excluded: np.ndarray

    def per_replicate(self, i: int):
        sl = slice(self.offsets[i], self.offsets[i + 1])
        return self.H[sl], self.log_R[sl]


def clock_inversions_batched(
    level_lists,
    rng,
    dt0: float = BATCH_DT0,
    chunk_steps: int = BATCH_CHUNK_STEPS,
    fine_chunks: int = BATCH_FINE_CHUNKS,
    t_max: float = BATCH_T_MAX,
    per_replicate_streams: bool = False,
    stream_ids=None,
) -> BatchClockResult:
    """Invert the exponential functional of one fresh path per replicate at
    that replicate's sorted levels, advancing all replicates in lockstep
    chunks.

    The step is dt0 for the first `fine_chunks` chunks and doubles each
    chunk thereafter, so resolution stays proportional to elapsed time;
    replicates whose last level is not reached by t_max are flagged
    excluded. With per_replicate_streams each replicate draws from its own
    child stream of `rng`, making its path independent of which other
    replicates are still active (needed when a second pass must replay the
    same paths at different levels). stream_ids, valid only with
    per_replicate_streams, assigns each row an explicit child-stream index
    so a subset of replicates can be re-simulated on their original paths.
    """
    level_arrays = [np.asarray(lv, dtype=float).ravel() for lv in level_lists]
    n = len(level_arrays)
    if stream_ids is not None and not per_replicate_streams:
        raise ValueError("stream_ids requires per_replicate_streams")
    if stream_ids is None:
        stream_ids = range(n)
    else:
        stream_ids = [int(s) for s in stream_ids]
        if len(stream_ids) != n:
            raise ValueError("stream_ids must match the number of level lists")
    counts = np.array([len(a) for a in level_arrays], dtype=np.int64)
    for a in level_arrays:
        if len(a) and (np.any(a < 0) or np.any(np.diff(a) < 0)):
            raise ValueError("each level list must be sorted nonnegative")
    offsets = np.concatenate([[0], np.cumsum(counts)])
    flat = (
        np.concatenate(level_arrays) if offsets[-1] else np.empty(0, dtype=float)
    )
    H = np.full(len(flat), np.nan)
    log_R = np.full(len(flat), np.nan)
    excluded = np.zeros(n, dtype=bool)

    if per_replicate_streams:
        gens = [rng.child(i).generator for i in stream_ids]
    else:
        g = _gen(rng)

    ptr = offsets[:-1].copy()
    ends = offsets[1:]
    alive = np.array([counts[i] > 0 for i in range(n)])
    idx = np.nonzero(alive)[0]
    b_end = np.zeros(len(idx))
    a_end = np.zeros(len(idx))
    t_end = 0.0
    k = 0
    while len(idx):
        dt = dt0 * 2.0 ** max(0, k - fine_chunks)
        if per_replicate_streams:
            z = np.stack([gens[gi].standard_normal(chunk_steps) for gi in idx])
        else:
            z = g.standard_normal((len(idx), chunk_steps))
        db = math.sqrt(dt) * z
        b = b_end[:, None] + np.cumsum(db, axis=1)
        b_prev = np.concatenate([b_end[:, None], b[:, :-1]], axis=1)
        da = _step_integrals(b_prev, db, dt)
        a = a_end[:, None] + np.cumsum(da, axis=1)

        retire = np.zeros(len(idx), dtype=bool)
        next_level = flat[ptr[idx]]
        for j in np.nonzero(a[:, -1] >= next_level)[0]:
            gi = idx[j]
            pend = flat[ptr[gi] : ends[gi]]
            m = int(np.searchsorted(pend, a[j, -1], side="right"))
            take = pend[:m]
            pos = np.searchsorted(a[j], take, side="left")
            prev_a = np.where(pos > 0, a[j][np.maximum(pos - 1, 0)], a_end[j])
            prev_b = np.where(pos > 0, b[j][np.maximum(pos - 1, 0)], b_end[j])
            step_db = db[j, pos]
            lo = ptr[gi]
            s, b_at = _invert_in_step_vec(prev_b, step_db, dt, take - prev_a)
            H[lo : lo + m] = t_end + pos * dt + s
            log_R[lo : lo + m] = b_at
            ptr[gi] += m
            if ptr[gi] >= ends[gi]:
                retire[j] = True

        t_end += chunk_steps * dt
        if t_end > t_max:
            excluded[idx[~retire]] = True
            break
        keep = ~retire
        idx = idx[keep]
        b_end = b[keep, -1]
        a_end = a[keep, -1]
        # rows whose functional already overflowed cross everything next
        # chunk; cap the carried state so arithmetic stays finite
        swap = ~np.isfinite(a_end)
        if np.any(swap):
            a_end[swap] = OVERFLOW_SHIFT_AT
        k += 1
    return BatchClockResult(H=H, log_R=log_R, offsets=offsets, excluded=excluded)


def winding_at_time(t: float, dt: float, rng, size=None):
    """Winding value(s) of the planar process at time t, via the clock: the
    angular part at time t is an independent Brownian motion run for H_t,
    so the draw is sqrt(H_t) times a fresh normal.

    Scalar mode uses the fixed-step extendable path; batched mode uses the
    lockstep engine (H values for excluded replicates come back NaN)."""
    if not t > 0:
        raise ValueError(f"time must be positive, got {t}")
    g = _gen(rng)
    if size is None:
        path = GridPath(dt=dt)
        h, _ = invert_exp_functional(path, t, g)
        return math.sqrt(h) * g.standard_normal()
    res = clock_inversions_batched([[t]] * size, rng, dt0=dt)
    h = res.H
    return np.sqrt(h) * g.standard_normal(size)


def exp_functional_at_exponential_time(
    nu: float, p: float, dt: float, rng, size: int
):
    """Path-based draws of the drifted exponential functional stopped at an
    independent exponential(p) time: simulate each drifted path to its own
    exponential horizon (final partial step included) and read off A."""
    if not p > 0:
        raise ValueError(f"rate must be positive, got {p}")
    g = _gen(rng)
    horizons = g.exponential(scale=1.0 / p, size=size)
    out = np.empty(size)
    order = np.argsort(horizons)
    row_chunk = 2048
    for start in range(0, size, row_chunk):
        sel = order[start : start + row_chunk]
        full_steps = np.floor(horizons[sel] / dt).astype(np.int64)
        steps = int(full_steps.max())
        rows = len(sel)
        da_total = np.zeros(rows)
        b_run = np.zeros(rows)
        if steps:
            col_chunk = max(1, int(4e6 // rows))
            done_cols = 0
            while done_cols < steps:
                cols = min(col_chunk, steps - done_cols)
                db = nu * dt + math.sqrt(dt) * g.standard_normal((rows, cols))
                bexp = b_run[:, None] + np.cumsum(db, axis=1)
                b_prev = np.concatenate([b_run[:, None], bexp[:, :-1]], axis=1)
                # a step is live only if it lies fully before the horizon;
                # the leftover fraction is handled as one exact partial step
                live = (done_cols + np.arange(cols))[None, :] < full_steps[:, None]
                da = _step_integrals(b_prev, db, dt) * live
                db_eff = db * live
                da_total += da.sum(axis=1)
                b_run += db_eff.sum(axis=1)
                done_cols += cols
        frac = horizons[sel] - full_steps * dt
        db_last = nu * frac + np.sqrt(frac) * g.standard_normal(rows)
        da_total += _step_integrals(b_run, db_last, frac)
        out[sel] = da_total
    return out


def brownian_time_integrals(
    integrands,
    rng,
    size: int,
    horizon: float = 40.0,
    dt_tail: float = 2.0 ** -9,
    head_t0: float = 0.25,
    head_points: int = 64,
):
    """Per-path time integrals int_0^horizon f(t, B_t, A_t) dt for several
    integrands over common paths.

    integrands is a list of (f, limit0) pairs: f vectorized over (t, B, A)
    arrays, limit0 the analytic limit of f(t)*2*sqrt(t) as t -> 0 (paths
    start at B=0, A ~ t). The head [0, head_t0] is integrated on a
    quadratic grid in sqrt(t), where integrable endpoint singularities like
    A^{-1/2} and t*A^{-3/2} flatten out; the tail is a uniform trapezoid.
    Returns one array of per-path integrals per integrand.
    """
    g = _gen(rng)
    u_head = math.sqrt(head_t0) * np.arange(head_points + 1) / head_points
    t_grid = np.concatenate(
        [u_head ** 2, np.arange(head_t0 + dt_tail, horizon + 1e-12, dt_tail)]
    )
    dt_steps = np.diff(t_grid)
    t_mid = t_grid[1:]
    u_mid = np.sqrt(t_mid)
    nh = head_points
    outs = [np.empty(size) for _ in integrands]
    row_chunk = max(1, int(4e6 // len(dt_steps)))
    done = 0
    while done < size:
        rows = min(row_chunk, size - done)
        db = np.sqrt(dt_steps) * g.standard_normal((rows, len(dt_steps)))
        b = np.cumsum(db, axis=1)
        b_prev = np.concatenate([np.zeros((rows, 1)), b[:, :-1]], axis=1)
        a = np.cumsum(_step_integrals(b_prev, db, dt_steps), axis=1)
        for (f, limit0), out in zip(integrands, outs):
            vals = f(t_mid, b, a)
            head = np.concatenate(
                [np.full((rows, 1), limit0), vals[:, :nh] * 2.0 * u_mid[:nh]],
                axis=1,
            )
            ih = np.trapezoid(head, np.concatenate([[0.0], u_mid[:nh]]), axis=1)
            it = np.trapezoid(vals[:, nh - 1 :], t_mid[nh - 1 :], axis=1)
            out[done : done + rows] = ih + it
        done += rows
    return outs
