"""Exact analysis of the layer one-fraction Markov chain.

In the random-DAG model the fraction of ones at level k is a sufficient
statistic for the root bit.  Conditioned on the previous fraction sigma,
the next level's one-count is Binomial(L_next, g(sigma)) where g is the
gate's conditional-mean curve.  This module propagates the two
root-conditional distributions of that chain exactly, analyzes the
g-curves (fixed points, Lipschitz constants), and provides the coupled
and quenched Monte Carlo estimators.

Two named models are supported:

* ``maj3``: degree 3, 3-input majority at every level.
* ``andor2``: degree 2, AND gates at even levels and OR gates at odd
  levels; quantities of interest are reported at even levels.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .model import BudgetExceededError, DagRealization, Gate, LayerSchedule, as_delta, convolve
from .rng import derive_seed, uniform_matrix
from .stats import wilson_interval

__all__ = [
    "MODEL_MAJ3",
    "MODEL_ANDOR2",
    "DELTA_MAJ",
    "DELTA_ANDOR",
    "DegenerateThresholdError",
    "SigmaDistribution",
    "FixedPoint",
    "FixedPointReport",
    "CoupledChainStats",
    "QuenchedEstimate",
    "g_majority",
    "g_and",
    "g_or",
    "g_andor",
    "g_derivative",
    "fixed_points",
    "bisect_fixed_point",
    "lipschitz",
    "binomial_pmf_table",
    "exact_step",
    "exact_chain",
    "tv",
    "ml_error",
    "ml_rule",
    "mutual_information",
    "majority_rule",
    "biased_rule",
    "coupled_mc",
    "quenched_error_estimate",
    "almost_sure_limit_check",
]

MODEL_MAJ3 = "maj3"
MODEL_ANDOR2 = "andor2"

DELTA_MAJ = 1.0 / 6.0
DELTA_ANDOR = (3.0 - math.sqrt(7.0)) / 4.0

# Branch point of the andor2 Lipschitz formula.
_ANDOR_LIP_BRANCH = (9.0 - math.sqrt(33.0)) / 12.0

TAG_COUPLED = 4
TAG_LIMIT = 5


class DegenerateThresholdError(ValueError):
    """Raised when fixed points are requested exactly at a critical delta."""


def _check_model(model: str) -> str:
    m = model.lower()
    if m not in (MODEL_MAJ3, MODEL_ANDOR2):
        raise ValueError(f"unknown model {model!r}")
    return m


# ---------------------------------------------------------------------------
# g-curves


def g_majority(sigma, delta):
    """Conditional mean map for the degree-3 majority model."""
    m = convolve(np.asarray(sigma, dtype=float), delta)
    return m ** 2 * (3.0 - 2.0 * m)


def g_and(sigma, delta):
    """AND-stage map: probability both noisy inputs are 1."""
    m = convolve(np.asarray(sigma, dtype=float), delta)
    return m ** 2


def g_or(sigma, delta):
    """OR-stage map: probability at least one noisy input is 1."""
    m = convolve(np.asarray(sigma, dtype=float), delta)
    return 1.0 - (1.0 - m) ** 2


def g_andor(sigma, delta):
    """Two-level composition: OR stage followed by AND stage."""
    return g_and(g_or(sigma, delta), delta)


def g_derivative(model: str, sigma, delta):
    """d/dsigma of the model's g-curve (closed forms)."""
    model = _check_model(model)
    d = as_delta(delta, noiseless_ok=True)
    s = np.asarray(sigma, dtype=float)
    if model == MODEL_MAJ3:
        m = convolve(s, d)
        return 6.0 * (1.0 - 2.0 * d) * m * (1.0 - m)
    inner = convolve(g_or(s, d), d)
    return 4.0 * (1.0 - 2.0 * d) ** 2 * inner * (1.0 - convolve(s, d))


def _g_for(model: str, delta: float):
    if model == MODEL_MAJ3:
        return lambda s: g_majority(s, delta)
    return lambda s: g_andor(s, delta)


# ---------------------------------------------------------------------------
# Fixed points and Lipschitz constants


@dataclass(frozen=True)
class FixedPoint:
    value: float
    stable: bool


@dataclass(frozen=True)
class FixedPointReport:
    model: str
    delta: float
    points: tuple[FixedPoint, ...]
    lipschitz: float


def bisect_fixed_point(g, lo: float, hi: float, tol: float = 1e-14, max_iter: int = 200) -> float:
    """Locate a root of g(x) - x in [lo, hi] by bisection.

    The bracket must have a sign change.  This is the generic fallback for
    gates without closed-form fixed points, and the cross-check oracle for
    the ones that have them.
    """
    f_lo = g(lo) - lo
    f_hi = g(hi) - hi
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if (f_lo > 0) == (f_hi > 0):
        raise ValueError("bracket does not contain a sign change")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = g(mid) - mid
        if f_mid == 0.0 or hi - lo < tol:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    return 0.5 * (lo + hi)


def _cross_check(g, value: float, tol: float = 1e-10) -> None:
    """Verify a closed-form fixed point against a local bisection."""
    for h in (1e-6, 1e-5, 1e-4, 1e-3, 1e-2):
        lo = max(0.0, value - h)
        hi = min(1.0, value + h)
        f_lo = g(lo) - lo
        f_hi = g(hi) - hi
        if (f_lo > 0) != (f_hi > 0) or f_lo == 0.0 or f_hi == 0.0:
            root = bisect_fixed_point(g, lo, hi)
            if abs(root - value) > tol:
                raise ArithmeticError(
                    f"closed-form fixed point {value} disagrees with bisection {root}"
                )
            return
    raise ArithmeticError(f"no bisection bracket found around fixed point {value}")


def lipschitz(model: str, delta) -> float:
    """Lipschitz constant of the model's g-curve over [0, 1]."""
    model = _check_model(model)
    d = as_delta(delta, noiseless_ok=True)
    if model == MODEL_MAJ3:
        return 1.5 * (1.0 - 2.0 * d)
    if d <= _ANDOR_LIP_BRANCH:
        return (4.0 * (1.0 - d) * (1.0 - 2.0 * d) / 3.0) ** 1.5
    return 4.0 * d * (1.0 - d) ** 2 * (1.0 - 2.0 * d) ** 2 * (3.0 - 2.0 * d)


def fixed_points(model: str, delta) -> FixedPointReport:
    """Closed-form fixed points of g, cross-validated by bisection.

    Below the critical delta the map has three fixed points, above it a
    single one.  Exactly at the critical value the roots merge; that case
    is reported as degenerate rather than returning a near-singular list.
    """
    model = _check_model(model)
    d = as_delta(delta, noiseless_ok=True)
    g = _g_for(model, d)

    if model == MODEL_MAJ3:
        if abs(d - DELTA_MAJ) < 1e-12:
            raise DegenerateThresholdError("delta = 1/6 is the degenerate triple root")
        values = [0.5]
        if d < DELTA_MAJ:
            sigma_hat = 0.5 * (1.0 + math.sqrt((1.0 - 6.0 * d) / (1.0 - 2.0 * d) ** 3))
            values = [1.0 - sigma_hat, 0.5, sigma_hat]
    else:
        if abs(d - DELTA_ANDOR) < 1e-12:
            raise DegenerateThresholdError("delta = (3 - sqrt(7))/4 is degenerate")
        b = 2.0 * (1.0 - d) * (1.0 - 2.0 * d)
        denom = 2.0 * (1.0 - 2.0 * d) ** 2
        a = 4.0 * (1.0 - d) * (1.0 - 2.0 * d) - 3.0
        # t = (b + 1 - sqrt(a + 4)) / denom, rationalized to avoid the
        # catastrophic cancellation near delta = 1/2 (note a + 4 = 2b + 1)
        t = b * b / (denom * (b + 1.0 + math.sqrt(2.0 * b + 1.0)))
        values = [t]
        if d < DELTA_ANDOR:
            t0 = (b - 1.0 - math.sqrt(a)) / denom
            t1 = (b - 1.0 + math.sqrt(a)) / denom
            values = sorted([t0, t, t1])

    points = []
    for v in values:
        if abs(g(v) - v) >= 1e-12:
            raise ArithmeticError(f"fixed-point residual too large at {v}")
        _cross_check(g, v)
        slope = float(np.abs(g_derivative(model, v, d)))
        points.append(FixedPoint(value=float(v), stable=slope < 1.0))
    return FixedPointReport(model, d, tuple(points), lipschitz(model, d))


# ---------------------------------------------------------------------------
# Exact chain


@dataclass(frozen=True)
class SigmaDistribution:
    """Root-conditional distributions of the level-k one-count.

    ``plus[m]`` is P(one-count = m | root = 1), ``minus`` the same for
    root = 0, over m in {0, ..., L}.
    """

    level: int
    L: int
    plus: np.ndarray
    minus: np.ndarray

    def __post_init__(self) -> None:
        for vec in (self.plus, self.minus):
            if len(vec) != self.L + 1:
                raise ValueError("distribution length must be L + 1")
            if vec.min() < 0 or abs(vec.sum() - 1.0) > 1e-12:
                raise ValueError("distribution must be normalized and nonnegative")


def binomial_pmf_table(n: int, p: np.ndarray) -> np.ndarray:
    """Rows of Binomial(n, p_i) pmfs, computed in log space.

    Log-gamma keeps the computation stable for n in the thousands; rows
    are renormalized when accumulated drift exceeds 1e-12.
    """
    p = np.asarray(p, dtype=float)
    k = np.arange(n + 1, dtype=float)
    log_comb = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
    safe = np.clip(p, 1e-300, 1.0 - 1e-16)
    with np.errstate(divide="ignore"):
        log_pmf = log_comb[None, :] + k[None, :] * np.log(safe)[:, None]
        log_pmf += (n - k)[None, :] * np.log1p(-safe)[:, None]
    pmf = np.exp(log_pmf)
    pmf[p <= 0.0] = 0.0
    pmf[p <= 0.0, 0] = 1.0
    pmf[p >= 1.0] = 0.0
    pmf[p >= 1.0, n] = 1.0
    sums = pmf.sum(axis=1)
    drift = np.abs(sums - 1.0)
    if drift.max() > 1e-12:
        pmf = pmf / sums[:, None]
    return pmf


def _renorm(vec: np.ndarray) -> np.ndarray:
    """Remove float round-off drift; refuse anything beyond round-off scale."""
    total = vec.sum()
    if abs(total - 1.0) > 1e-9:
        raise ArithmeticError(f"probability mass drifted to {total}")
    return vec / total


def exact_step(dist: SigmaDistribution, g, L_next: int) -> SigmaDistribution:
    """One exact transition of the conditional pair.

    ``g`` maps an array of sigma values to next-level Bernoulli means.
    """
    sig = np.arange(dist.L + 1, dtype=float) / dist.L
    kernel = binomial_pmf_table(L_next, np.asarray(g(sig), dtype=float))
    return SigmaDistribution(
        level=dist.level + 1,
        L=L_next,
        plus=_renorm(dist.plus @ kernel),
        minus=_renorm(dist.minus @ kernel),
    )


def _stage_g(model: str, delta: float, k: int):
    """g-curve used for the step into level k."""
    if model == MODEL_MAJ3:
        return lambda s: g_majority(s, delta)
    if k % 2 == 1:
        return lambda s: g_or(s, delta)
    return lambda s: g_and(s, delta)


def exact_chain(
    model: str,
    delta,
    schedule: LayerSchedule,
    depth: int,
    budget: int = 4096,
) -> list[SigmaDistribution]:
    """Propagate the conditional pair exactly from the root to ``depth``.

    For ``andor2`` the OR stage is applied entering odd levels and the
    AND stage entering even levels; meaningful comparisons for that model
    should be made at even levels.  Kernels are cached per (stage, layer
    sizes), so constant schedules pay the O(L^2) kernel cost once.
    """
    model = _check_model(model)
    d = as_delta(delta, noiseless_ok=True)
    if depth < 1:
        raise ValueError("depth must be >= 1")
    dists = [
        SigmaDistribution(0, 1, np.array([0.0, 1.0]), np.array([1.0, 0.0]))
    ]
    kernel_cache: dict[tuple[int, int, int], np.ndarray] = {}
    for k in range(1, depth + 1):
        L_next = schedule.size(k)
        if L_next > budget:
            raise BudgetExceededError(
                f"layer size {L_next} at level {k} exceeds budget {budget}"
            )
        prev = dists[-1]
        stage = 0 if model == MODEL_MAJ3 else (k % 2 + 1)
        key = (stage, prev.L, L_next)
        kernel = kernel_cache.get(key)
        if kernel is None:
            sig = np.arange(prev.L + 1, dtype=float) / prev.L
            kernel = binomial_pmf_table(L_next, _stage_g(model, d, k)(sig))
            kernel_cache[key] = kernel
        dists.append(
            SigmaDistribution(
                k, L_next, _renorm(prev.plus @ kernel), _renorm(prev.minus @ kernel)
            )
        )
    return dists


# ---------------------------------------------------------------------------
# Functionals of the conditional pair


def tv(dist: SigmaDistribution) -> float:
    """Total variation distance between the two root-conditionals."""
    return 0.5 * float(np.abs(dist.plus - dist.minus).sum())


def ml_error(dist: SigmaDistribution) -> float:
    """Minimum error probability of guessing the root, uniform prior."""
    return 0.5 * (1.0 - tv(dist))


def ml_rule(dist: SigmaDistribution) -> np.ndarray:
    """Optimal decision per observed one-count; ties resolved to 0."""
    return (dist.plus > dist.minus).astype(np.int64)


def mutual_information(dist: SigmaDistribution) -> float:
    """I(root; one-count) in bits under the uniform root prior."""
    mix = 0.5 * (dist.plus + dist.minus)
    total = 0.0
    for vec in (dist.plus, dist.minus):
        mask = vec > 0
        total += 0.5 * float(np.sum(vec[mask] * np.log2(vec[mask] / mix[mask])))
    return max(0.0, total)


def majority_rule(sigma: float) -> int:
    """Guess 1 iff at least half the level is ones (boundary inclusive)."""
    return int(sigma >= 0.5)


def biased_rule(sigma: float, t: float) -> int:
    """Guess 1 iff the one-fraction reaches the threshold t."""
    return int(sigma >= t)


# ---------------------------------------------------------------------------
# Monte Carlo


@dataclass(frozen=True)
class CoupledChainStats:
    """Per-level statistics of the monotone coupled pair of chains."""

    levels: np.ndarray
    prob_unequal: np.ndarray
    mean_gap: np.ndarray
    sem_gap: np.ndarray
    min_gap: float
    monotone_fraction: float
    final_plus: np.ndarray
    final_minus: np.ndarray


def coupled_mc(
    model: str,
    delta,
    schedule: LayerSchedule,
    depth: int,
    trials: int,
    seed: int,
) -> CoupledChainStats:
    """Simulate the root=1 and root=0 chains under a monotone coupling.

    Each node's Bernoulli draw in the two chains shares one uniform, so
    the draws are comonotone given the pair of success probabilities and
    the plus-chain fraction dominates the minus-chain fraction pathwise.
    """
    model = _check_model(model)
    d = as_delta(delta, noiseless_ok=True)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    sp = np.ones(trials)
    sm = np.zeros(trials)
    prob_unequal = np.empty(depth)
    mean_gap = np.empty(depth)
    sem_gap = np.empty(depth)
    min_gap = np.inf
    monotone = 0
    total_pairs = 0
    for k in range(1, depth + 1):
        L = schedule.size(k)
        g = _stage_g(model, d, k)
        pp = np.asarray(g(sp))
        pm = np.asarray(g(sm))
        u = uniform_matrix(derive_seed(seed, TAG_COUPLED, k), (trials, L))
        sp = (u < pp[:, None]).mean(axis=1)
        sm = (u < pm[:, None]).mean(axis=1)
        gap = sp - sm
        prob_unequal[k - 1] = float((gap != 0).mean())
        mean_gap[k - 1] = float(gap.mean())
        sem_gap[k - 1] = float(gap.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
        min_gap = min(min_gap, float(gap.min()))
        monotone += int((gap >= 0).sum())
        total_pairs += trials
    return CoupledChainStats(
        levels=np.arange(1, depth + 1),
        prob_unequal=prob_unequal,
        mean_gap=mean_gap,
        sem_gap=sem_gap,
        min_gap=min_gap,
        monotone_fraction=monotone / total_pairs,
        final_plus=sp,
        final_minus=sm,
    )


@dataclass(frozen=True)
class QuenchedEstimate:
    """Monte Carlo error estimate on one frozen DAG realization."""

    p_err: float
    ci_low: float
    ci_high: float
    trials: int


def quenched_error_estimate(
    dag: DagRealization,
    gates,
    delta,
    rule,
    trials: int,
    seed: int,
) -> QuenchedEstimate:
    """Estimate P(rule(final fraction) != root) on a fixed realization.

    The root prior is made exactly uniform by alternating root bits across
    trials.  Used to certify a sampled DAG as a reconstruction witness.
    """
    from .model import propagate_many

    if trials < 1:
        raise ValueError("trials must be >= 1")
    roots = (np.arange(trials) % 2).astype(np.uint8)
    final = propagate_many(dag, gates, delta, roots, seed)
    sig = final.mean(axis=1)
    guesses = np.fromiter((rule(s) for s in sig), dtype=np.int64, count=trials)
    errors = int((guesses != roots).sum())
    lo, hi = wilson_interval(errors, trials)
    return QuenchedEstimate(errors / trials, lo, hi, trials)


def almost_sure_limit_check(
    model: str,
    delta,
    schedule: LayerSchedule,
    depth: int,
    trials: int,
    seed: int,
    tol: float = 0.05,
) -> float:
    """Fraction of simulated chains ending within ``tol`` of the limit point.

    Above the critical delta the chain has a unique attracting fixed point
    (1/2 for maj3, t for andor2) and converges to it almost surely.  Below
    threshold the limit claim does not apply; a warning is issued and the
    unique-regime target is still used.
    """
    model = _check_model(model)
    d = as_delta(delta)
    threshold = DELTA_MAJ if model == MODEL_MAJ3 else DELTA_ANDOR
    if d <= threshold:
        warnings.warn(
            "delta is at or below the critical value; the almost-sure limit "
            "claim does not apply",
            stacklevel=2,
        )
    if model == MODEL_MAJ3:
        target = 0.5
        stop = depth
    else:
        report = fixed_points(model, d)
        # t is the unique point above threshold, the middle one below.
        target = report.points[0].value if len(report.points) == 1 else report.points[1].value
        stop = depth if depth % 2 == 0 else depth - 1
    sig = np.ones(trials)
    for k in range(1, stop + 1):
        L = schedule.size(k)
        p = np.asarray(_stage_g(model, d, k)(sig))
        u = uniform_matrix(derive_seed(seed, TAG_LIMIT, k), (trials, L))
        sig = (u < p[:, None]).mean(axis=1)
    return float((np.abs(sig - target) < tol).mean())
