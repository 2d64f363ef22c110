"""Exact (non-discretized) random generators.

Primitive scalar laws, the joint draw of reflected Brownian motion with its
local time, stable(1/2) subordinator marginals and truncated jump sets, and
the beta/gamma representation of the exponential functional at an
independent exponential time.

All samplers accept an RngStream (or a bare numpy Generator) and an
optional `size`; with size=None they return scalars.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from bougerol.special_functions import MellinParams

__all__ = [
    "RngStream",
    "JumpSet",
    "sample_primitive",
    "sample_abs_bm_with_local_time",
    "sample_stable_half",
    "sample_stable_half_jumps",
    "sample_exp_functional_beta_gamma",
]


class RngStream:
    """Reproducible random stream keyed by (master_seed, stream_id).

    stream_id is a tuple of nonnegative integers fed to numpy's SeedSequence
    as a spawn key, so distinct ids give statistically independent streams
    and identical ids give bit-identical sequences. `child(i)` derives a
    subordinate stream deterministically; worker layout never changes the
    mapping from ids to draws.
    """

    def __init__(self, master_seed: int, stream_id: tuple = ()):
        if isinstance(stream_id, int):
            stream_id = (stream_id,)
        self.master_seed = int(master_seed)
        self.stream_id = tuple(int(i) for i in stream_id)
        seq = np.random.SeedSequence(self.master_seed, spawn_key=self.stream_id)
        self.generator = np.random.default_rng(seq)

    def child(self, *indices: int) -> "RngStream":
        return RngStream(self.master_seed, self.stream_id + tuple(indices))

    def __repr__(self):
        return f"RngStream(master_seed={self.master_seed}, stream_id={self.stream_id})"


def _gen(rng) -> np.random.Generator:
    return getattr(rng, "generator", rng)


@dataclass
class JumpSet:
    """Truncated jump representation of a stable(1/2) subordinator on a
    local-time interval [0, level_horizon].

    Jumps below `threshold` are replaced by their deterministic mean
    level_horizon * sqrt(2*threshold/pi), spread as linear drift in the
    local-time variable. Locations are sorted increasing.
    """

    level_horizon: float
    threshold: float
    locations: np.ndarray
    sizes: np.ndarray
    small_jump_mean: float = field(init=False)

    def __post_init__(self):
        self.small_jump_mean = self.level_horizon * math.sqrt(
            2.0 * self.threshold / math.pi
        )

    @property
    def drift_rate(self) -> float:
        """Small-jump compensation per unit local time."""
        return math.sqrt(2.0 * self.threshold / math.pi)

    def total(self) -> float:
        """Subordinator value at the full horizon."""
        return float(self.sizes.sum()) + self.small_jump_mean

    def sigma_at(self, u: float) -> float:
        """Subordinator value at local time u <= level_horizon."""
        mask = self.locations <= u
        return float(self.sizes[mask].sum()) + self.drift_rate * u

    def levels_before_after(self, horizon: float = None):
        """Pre- and post-jump subordinator levels for jumps located at or
        below `horizon` (default: all jumps). Returns (locations, before,
        after) arrays; before[i] < after[i] and the interleaving is sorted.
        """
        if horizon is None:
            horizon = self.level_horizon
        mask = self.locations <= horizon
        locs = self.locations[mask]
        sizes = self.sizes[mask]
        # exclusive cumsum: subtracting a huge jump from the inclusive sum
        # would cancel catastrophically and break level ordering
        prior = np.concatenate([[0.0], np.cumsum(sizes)])[: len(sizes)]
        before = prior + self.drift_rate * locs
        after = before + sizes
        return locs, before, after


def sample_primitive(dist: str, rng, size=None, **params):
    """Draw from a named primitive law.

    dist is one of uniform01, normal, exponential (param rate), cauchy,
    beta (params u, v), gamma (param shape), chi3. Cauchy uses the inverse
    CDF tan(pi*(U-1/2)) so it consumes exactly one uniform per draw; chi3
    is the norm of three independent standard normals.
    """
    g = _gen(rng)
    scalar = size is None
    n = 1 if scalar else size
    if dist == "uniform01":
        out = g.uniform(size=n)
    elif dist == "normal":
        out = g.standard_normal(n)
    elif dist == "exponential":
        rate = params.get("rate", 1.0)
        if not rate > 0:
            raise ValueError(f"exponential rate must be positive, got {rate}")
        out = g.exponential(scale=1.0 / rate, size=n)
    elif dist == "cauchy":
        u = g.uniform(size=n)
        out = np.tan(np.pi * (u - 0.5))
    elif dist == "beta":
        u, v = params.get("u", 1.0), params.get("v", 1.0)
        if not (u > 0 and v > 0):
            raise ValueError(f"beta parameters must be positive, got ({u}, {v})")
        out = g.beta(u, v, size=n)
    elif dist == "gamma":
        shape = params.get("shape", 1.0)
        if not shape > 0:
            raise ValueError(f"gamma shape must be positive, got {shape}")
        out = g.gamma(shape, size=n)
    elif dist == "chi3":
        z = g.standard_normal((n if not scalar else 1, 3))
        out = np.sqrt((z * z).sum(axis=1))
    else:
        raise ValueError(f"unknown primitive distribution {dist!r}")
    return float(out[0]) if scalar else np.asarray(out)


def sample_abs_bm_with_local_time(t: float, rng, size=None):
    """Joint draw of (|B_t|, L_t): reflected Brownian motion at time t and
    its local time at zero.

    Uses the exact factorization of their joint density: the sum S = x + l
    is sqrt(t) times a chi(3) variable and, given S, the split point is
    uniform. Returns (x, l)."""
    if not t > 0:
        raise ValueError(f"time must be positive, got {t}")
    g = _gen(rng)
    scalar = size is None
    n = 1 if scalar else size
    s = math.sqrt(t) * sample_primitive("chi3", g, size=n)
    u = g.uniform(size=n)
    x = u * s
    l = (1.0 - u) * s
    if scalar:
        return float(x[0]), float(l[0])
    return x, l


def sample_stable_half(delta: float, rng, size=None):
    """Exact stable(1/2) subordinator increment over local-time interval
    delta, distributed as delta^2 / N^2 with N standard normal; Laplace
    transform exp(-delta*sqrt(2q))."""
    if not delta > 0:
        raise ValueError(f"increment must be positive, got {delta}")
    g = _gen(rng)
    scalar = size is None
    n = 1 if scalar else size
    z = g.standard_normal(n)
    bad = z == 0.0
    while np.any(bad):
        z[bad] = g.standard_normal(int(bad.sum()))
        bad = z == 0.0
    out = (delta / z) ** 2
    return float(out[0]) if scalar else out


def sample_stable_half_jumps(l: float, epsilon: float, rng) -> JumpSet:
    """Jump decomposition of the stable(1/2) subordinator on [0, l], keeping
    jumps above epsilon.

    Jump count is Poisson(l * sqrt(2/(pi*epsilon))), locations i.i.d.
    uniform on [0, l], sizes i.i.d. epsilon/U^2 (the normalized tail of the
    Levy measure dt/sqrt(2 pi t^3)); the mean of the discarded small jumps,
    l*sqrt(2*epsilon/pi), is recorded on the JumpSet."""
    if not (l > 0 and epsilon > 0):
        raise ValueError(f"need positive horizon and threshold, got ({l}, {epsilon})")
    g = _gen(rng)
    rate = l * math.sqrt(2.0 / (math.pi * epsilon))
    count = g.poisson(rate) if rate > 0 else 0
    locs = np.sort(g.uniform(0.0, l, size=count))
    u = g.uniform(size=count)
    sizes = epsilon / (u * u)
    return JumpSet(level_horizon=l, threshold=epsilon, locations=locs, sizes=sizes)


def sample_exp_functional_beta_gamma(nu: float, p: float, rng, size=None):
    """Exact draw of the drifted exponential functional at an independent
    exponential(p) time, via its beta/gamma factorization
    beta(1, a) / (2 * gamma(b)) with the shape pair (a, b) derived from
    (nu, p)."""
    params = MellinParams(r=0.0, nu=nu, p=p)
    g = _gen(rng)
    scalar = size is None
    n = 1 if scalar else size
    num = g.beta(1.0, params.a, size=n)
    den = g.gamma(params.b, size=n)
    out = num / (2.0 * den)
    return float(out[0]) if scalar else out
