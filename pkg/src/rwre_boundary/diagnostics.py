"""Estimators and exact computations deciding localization vs delocalization.

* gap_estimate: Monte Carlo mean of (1/n) log W_n over independent replica
  environments.  Its limit is the quenched-minus-annealed free-energy
  difference p - log c <= 0; a strictly negative value is the localization
  signal.
* doob_decompose: the split -log W_n = M_n + A_n into a martingale part and
  a non-decreasing compensator, from the multiplicative increments
  U_n = W_n / W_{n-1} - 1.  Conditional moments of U_n given the past are
  estimated by resampling the disorder of the newest slice K times; the key
  exact identities are E[U_n | past] = 0 and E[U_n^2 | past] = sigma2 * I_n.
* fractional_moment: (1/(theta n)) log mean W_n^theta, an upper bound on the
  gap that decreases to it as theta -> 0 and is ~0 at theta = 1.
* second_moment_exact: E[W_n^2] computed exactly by collapsing the two-replica
  average onto the replica-difference walk with collision factors rho(e, e').
* classify_growth: tags a second-moment curve bounded/diverging from its tail
  log-increments (a labeled heuristic; the true dichotomy is asymptotic).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import logsumexp

from . import rng
from .errors import ModelValidationError, ResourceBudgetError
from .lattice import SliceIndexer
from .transfer import (
    DEFAULT_MEMORY_BUDGET,
    _push_forward,
    batch_log_w,
    replica_log_w,
)

MIN_RESAMPLES = 16


@dataclass(frozen=True)
class GapEstimate:
    """Replica mean and standard error of (1/n) log W_n."""

    n: int
    epsilon: float | None
    mean_gap: float
    stderr: float
    replicas: int


@dataclass(frozen=True, eq=False)
class DoobDecomposition:
    """Per-step arrays (index k holds step n = k+1) of the -log W_n split.

    u: exact increments W_n/W_{n-1} - 1; m, a: martingale part and
    compensator with m + a = -log W_n (to float dust); cond_*: resampled
    conditional moments of U_n given the past, with standard errors;
    ratio: cond_neglog_mean / I_n, checked against [1/ratio_bound,
    ratio_bound] with 4-stderr slack when the disorder is non-degenerate;
    neglogw_over_cumi: the empirical ratio -log W_n / sum_{k<=n} I_k,
    reported (not asserted) as the proportionality range between the two
    localization quantifiers.
    """

    n: np.ndarray
    u: np.ndarray
    m: np.ndarray
    a: np.ndarray
    u_recomputed: np.ndarray
    cond_u_mean: np.ndarray
    cond_u_stderr: np.ndarray
    cond_u2_mean: np.ndarray
    cond_u2_stderr: np.ndarray
    cond_neglog_mean: np.ndarray
    cond_neglog_stderr: np.ndarray
    ratio: np.ndarray
    ratio_bound: float
    ratio_applicable: bool
    ratio_ok: np.ndarray
    neglogw_over_cumi: np.ndarray
    resamples: int


@dataclass(frozen=True)
class GrowthClassification:
    """Tail-slope verdict on a second-moment curve (labeled heuristic)."""

    tag: str  # "bounded-trend" | "diverging-trend"
    tail_slope: float
    threshold: float
    window: int


@dataclass(frozen=True, eq=False)
class SecondMomentCurve:
    """Exact E[W_n^2] for n = 1..N (ew2 overflows to inf gracefully; log_ew2 is primary)."""

    n: np.ndarray
    ew2: np.ndarray
    log_ew2: np.ndarray
    classification: GrowthClassification | None = None

    def classified(self, classification: GrowthClassification) -> "SecondMomentCurve":
        return replace(self, classification=classification)


def gap_estimate(
    family,
    epsilon,
    n_steps: int,
    replicas: int,
    seed: int,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
) -> GapEstimate:
    """Mean and stderr of (1/n) log W_n over independent replica environments.

    Deterministic given (family, epsilon, n_steps, replicas, seed).  For a
    degenerate law (constant forward mass) every sample is exactly 0, so the
    estimate is (0, 0) with no noise.
    """
    if replicas < 2:
        raise ModelValidationError(f"need at least 2 replicas, got {replicas}")
    model = family.model(epsilon, seed)
    keys = rng.replica_env_keys(seed, replicas)
    return gap_from_keys(model, epsilon, keys, n_steps, memory_budget)


def gap_from_keys(
    model, epsilon, keys, n_steps: int, memory_budget: int = DEFAULT_MEMORY_BUDGET
) -> GapEstimate:
    """gap_estimate over explicit environment keys (sweeps reuse keys across eps)."""
    lw = batch_log_w(model, keys, n_steps, memory_budget)[:, -1]
    g = lw / n_steps
    r = g.shape[0]
    return GapEstimate(
        n=n_steps,
        epsilon=None if epsilon is None else float(epsilon),
        mean_gap=float(g.mean()),
        stderr=float(g.std(ddof=1) / np.sqrt(r)),
        replicas=r,
    )


def fractional_moment(
    family,
    epsilon,
    n_steps: int,
    theta: float,
    replicas: int,
    seed: int,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
) -> float:
    """(1/(theta n)) log of the replica mean of W_n^theta.

    An upper bound on the gap for theta in (0, 1]; at theta = 1 the mean is
    ~1 so the value is ~0.  Replicas are derived exactly as in gap_estimate,
    so on shared seeds the estimates are monotone in theta sample-by-sample.
    """
    theta = float(theta)
    if not 0.0 < theta <= 1.0:
        raise ModelValidationError(f"theta must lie in (0, 1], got {theta!r}")
    model = family.model(epsilon, seed)
    lw = replica_log_w(model, seed, replicas, n_steps, memory_budget)[:, -1]
    return float((logsumexp(theta * lw) - np.log(lw.shape[0])) / (theta * n_steps))


def doob_decompose(
    series,
    model,
    resamples: int = 256,
    ratio_bound: float | None = None,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
) -> DoobDecomposition:
    """Doob split of -log W_n for the realization behind `series`.

    The series must come from run_walk on this same model (same seed): the
    walk is replayed, and at each step n the disorder of slice n-1 is
    resampled `resamples` times (earlier slices held fixed) to estimate
    E[U_n | past], E[U_n^2 | past] and E[-log(1+U_n) | past].  The
    compensator uses the resampled means; the martingale part is the
    remainder, so m + a telescopes back to -log W_n.
    """
    if resamples < MIN_RESAMPLES:
        raise ModelValidationError(
            f"need at least {MIN_RESAMPLES} resamples for a meaningful estimate, "
            f"got {resamples}"
        )
    n_steps = len(series.records)
    stats = model.stats
    c = stats.c
    if ratio_bound is None:
        ratio_bound = max(8.0, 4.0 / stats.sigma2) if stats.fluctuation_active else 8.0
    ratio_bound = float(ratio_bound)

    rkeys = rng.resample_env_keys(model.seed, resamples)
    own = np.asarray([model.env_key], dtype=np.uint64)
    k_sqrt = np.sqrt(resamples)

    cond_u = np.empty((2, n_steps))
    cond_u2 = np.empty((2, n_steps))
    cond_neglog = np.empty((2, n_steps))
    u_recomputed = np.empty(n_steps)

    idx = SliceIndexer(model.d, 0)
    logz = np.zeros((1, 1))
    for n in range(1, n_steps + 1):
        pts = idx.points()
        mx = logz[0].max()
        p = np.exp(logz[0] - mx)
        p /= p.sum()
        s_fresh = model.weights_plus(pts, rkeys).sum(axis=-1)  # (K, m)
        u_samples = (s_fresh / c - 1.0) @ p
        neg_samples = -np.log1p(u_samples)
        cond_u[:, n - 1] = u_samples.mean(), u_samples.std(ddof=1) / k_sqrt
        cond_u2[:, n - 1] = (u_samples**2).mean(), (u_samples**2).std(ddof=1) / k_sqrt
        cond_neglog[:, n - 1] = neg_samples.mean(), neg_samples.std(ddof=1) / k_sqrt

        w_own = model.weights_plus(pts, own)
        u_recomputed[n - 1] = float(p @ (w_own[0].sum(axis=-1) / c - 1.0))
        nxt_idx = SliceIndexer(model.d, n)
        logz = _push_forward(logz, np.log(w_own), nxt_idx, idx)
        idx = nxt_idx

    log_w = series.log_w
    u = np.expm1(np.diff(np.concatenate([[0.0], log_w])))
    increments = -np.log1p(u)
    a = np.cumsum(cond_neglog[0])
    m = np.cumsum(increments - cond_neglog[0])

    i_vals = series.i
    ratio = cond_neglog[0] / i_vals
    ratio_se = cond_neglog[1] / i_vals
    applicable = stats.fluctuation_active
    if applicable:
        ratio_ok = (ratio + 4 * ratio_se >= 1.0 / ratio_bound) & (
            ratio - 4 * ratio_se <= ratio_bound
        )
    else:
        ratio_ok = np.zeros(n_steps, dtype=bool)

    cum_i = np.cumsum(i_vals)
    return DoobDecomposition(
        n=np.arange(1, n_steps + 1),
        u=u,
        m=m,
        a=a,
        u_recomputed=u_recomputed,
        cond_u_mean=cond_u[0].copy(),
        cond_u_stderr=cond_u[1].copy(),
        cond_u2_mean=cond_u2[0].copy(),
        cond_u2_stderr=cond_u2[1].copy(),
        cond_neglog_mean=cond_neglog[0].copy(),
        cond_neglog_stderr=cond_neglog[1].copy(),
        ratio=ratio,
        ratio_bound=ratio_bound,
        ratio_applicable=applicable,
        ratio_ok=ratio_ok,
        neglogw_over_cumi=-log_w / cum_i,
        resamples=resamples,
    )


def _difference_shifts(d: int) -> list[tuple[int, int, tuple[int, ...]]]:
    """Step-pair shifts of the replica-difference walk, projected to d-1 coords."""
    out = []
    for i, j in itertools.product(range(d), repeat=2):
        s = [0] * (d - 1)
        if i < d - 1:
            s[i] += 1
        if j < d - 1:
            s[j] -= 1
        out.append((i, j, tuple(s)))
    return out


def second_moment_exact(
    model, n_steps: int, memory_budget: int = DEFAULT_MEMORY_BUDGET
) -> SecondMomentCurve:
    """E[W_n^2] for n = 1..N, exactly.

    Two independent annealed replicas, each with step law q(e)/c, are tracked
    through their difference (projected to d-1 coordinates; the last is
    determined by time).  Directed paths visit a fresh slice every step, so
    sites factorize: a step pair (e, e') weighs q(e)q(e')/c^2 times the
    collision factor rho(e, e') exactly when the replicas currently coincide.
    Mass is renormalized per step and accumulated in log domain.
    """
    if n_steps < 1:
        raise ModelValidationError(f"need at least one step, got n={n_steps}")
    stats = model.stats
    d = model.d
    q_hat = stats.q_plus / stats.c
    rho = stats.rho

    if d == 1:
        log_inc = np.full(n_steps, np.log(rho[0, 0]))
        log_ew2 = np.cumsum(log_inc)
    else:
        dims = (2 * n_steps + 1,) * (d - 1)
        cells = int(np.prod(np.asarray(dims, dtype=np.int64)))
        needed = 8 * 2 * cells
        if needed > memory_budget:
            raise ResourceBudgetError("difference-walk DP", needed, memory_budget)
        origin = (n_steps,) * (d - 1)
        A = np.zeros(dims)
        A[origin] = 1.0
        shifts = _difference_shifts(d)
        log_ew2 = np.empty(n_steps)
        log_total = 0.0
        for n in range(n_steps):
            B = np.zeros(dims)
            at_origin = A[origin]
            for i, j, s in shifts:
                w = q_hat[i] * q_hat[j]
                src = tuple(
                    slice(None, -1) if sk == 1 else slice(1, None) if sk == -1 else slice(None)
                    for sk in s
                )
                dst = tuple(
                    slice(1, None) if sk == 1 else slice(None, -1) if sk == -1 else slice(None)
                    for sk in s
                )
                B[dst] += w * A[src]
                if at_origin != 0.0:
                    target = tuple(o + sk for o, sk in zip(origin, s))
                    B[target] += at_origin * w * (rho[i, j] - 1.0)
            total = B.sum()
            log_total += np.log(total)
            log_ew2[n] = log_total
            A = B / total

    with np.errstate(over="ignore"):
        ew2 = np.exp(log_ew2)
    return SecondMomentCurve(n=np.arange(1, n_steps + 1), ew2=ew2, log_ew2=log_ew2)


def classify_growth(curve: SecondMomentCurve, threshold: float = 1e-4) -> GrowthClassification:
    """Tag a curve by the mean of its tail log-increments.

    The tail is the last half of the curve; a mean increment above
    `threshold` per step reads as exponential divergence, below as
    boundedness.  Needs at least 20 points to say anything.
    """
    n = curve.log_ew2.shape[0]
    if n < 20:
        raise ModelValidationError(f"need a curve of length >= 20 to classify, got {n}")
    increments = np.diff(np.concatenate([[0.0], curve.log_ew2]))
    window = n // 2
    tail_slope = float(increments[-window:].mean())
    tag = "diverging-trend" if tail_slope > threshold else "bounded-trend"
    return GrowthClassification(tag=tag, tail_slope=tail_slope, threshold=float(threshold), window=window)
