"""Quenched transfer-matrix core.

Forward dynamic programming for the directed-path partition values
Z_n(x) = P_{0,w}(X_n = x) over boundary slices, in log domain throughout
(Z_n decays exponentially and underflows linear float64 by n of a few
hundred).  From the same sweep come the per-step statistics:

* log W_n = log sum_x Z_n(x) - n log c, the normalized boundary-crossing
  weight (a mean-one martingale in n over the disorder);
* J_n = max_x p_{n-1}(x) and I_n = sum_x p_{n-1}(x)^2, where p_{n-1} is the
  endpoint distribution of the walk conditioned to reach slice n-1 (J_1 =
  I_1 = 1: the walk starts at the origin); their Cesaro means are the
  localization diagnostics;
* the argmax endpoint site, ties broken by lowest slice index.

J_n^2 <= I_n <= J_n is checked at every step of every run and raising on
failure, since a violation can only be a bug.

A batched engine runs R independent replica environments in one sweep
(arrays shaped (R, slice size)); run_walk is the single-replica view.  A
box-restricted DP computes point quantities Z_n(x_n) (and max-plus path
functionals) without touching whole slices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import InvariantViolation, ModelValidationError, ResourceBudgetError
from .lattice import SliceIndexer, slice_size

DEFAULT_MEMORY_BUDGET = 2**31  # bytes
SANDWICH_TOL = 1e-12
_NEG_INF = -np.inf


@dataclass(frozen=True, eq=False)
class SliceField:
    """Log-domain field over one slice: logz[t] = log Z_n(point_t)."""

    indexer: SliceIndexer
    logz: np.ndarray
    n: int


@dataclass(frozen=True)
class StepRecord:
    """Per-step statistics of one environment realization.

    j and i are the endpoint max and overlap of the slice n-1 distribution;
    argmax_site is its maximizer; log_w = log_p_boundary - n log c.
    """

    n: int
    log_w: float
    j: float
    i: float
    argmax_site: tuple[int, ...]
    log_p_boundary: float


@dataclass(frozen=True, eq=False)
class LocalizationSeries:
    """run_walk output: records for n = 1..N plus running Cesaro means."""

    d: int
    records: tuple[StepRecord, ...]
    cesaro_j: np.ndarray
    cesaro_i: np.ndarray

    @property
    def log_w(self) -> np.ndarray:
        return np.array([r.log_w for r in self.records])

    @property
    def j(self) -> np.ndarray:
        return np.array([r.j for r in self.records])

    @property
    def i(self) -> np.ndarray:
        return np.array([r.i for r in self.records])


def psi_pi_split(w) -> tuple[np.ndarray, float]:
    """Split a full weight vector into its forward kernel and log forward mass.

    pi(e) = w(e) / sum_{V+} w and psi = log sum_{V+} w, so that
    w = pi * e^psi on the positive steps.  The conditioned walk moves with
    kernel pi and pays e^psi per step.
    """
    w = np.asarray(w, dtype=np.float64)
    d = w.size // 2
    s = float(w[:d].sum())
    return w[:d] / s, float(np.log(s))


def initial_field(d: int) -> SliceField:
    """The n=0 field: all mass at the origin."""
    return SliceField(indexer=SliceIndexer(d, 0), logz=np.zeros(1), n=0)


def endpoint_distribution(field: SliceField) -> np.ndarray:
    """Normalized endpoint distribution of the conditioned walk on field.n."""
    m = float(field.logz.max())
    p = np.exp(field.logz - m)
    p /= p.sum()
    return p


def forward_step(field: SliceField, model) -> SliceField:
    """One slice forward: logz_n(x) = LSE_e [logz_{n-1}(x-e) + log w(x-e, e)]."""
    nxt_idx = SliceIndexer(field.indexer.d, field.n + 1)
    logw = np.log(model.weights_plus(field.indexer.points()))[0]
    nxt = _push_forward(field.logz[None, :], logw[None, :, :], nxt_idx, field.indexer)[0]
    return SliceField(indexer=nxt_idx, logz=nxt, n=field.n + 1)


def _push_forward(
    logz: np.ndarray, logw: np.ndarray, nxt_idx: SliceIndexer, idx: SliceIndexer
) -> np.ndarray:
    srcs = nxt_idx.step_sources(idx)
    R = logz.shape[0]
    nxt = np.full((R, nxt_idx.size), _NEG_INF)
    for e in range(idx.d):
        s = srcs[e]
        ok = s >= 0
        contrib = logz[:, s[ok]] + logw[:, s[ok], e]
        nxt[:, ok] = np.logaddexp(nxt[:, ok], contrib)
    return nxt


def _check_slice_budget(d: int, n_steps: int, replicas: int, budget: int, what: str) -> None:
    sz_prev = slice_size(d, max(n_steps - 1, 0))
    sz = slice_size(d, n_steps)
    needed = 8 * replicas * (sz_prev * (d + 4) + sz) + 24 * d * sz
    if needed > budget:
        raise ResourceBudgetError(what, needed, budget)


def _endpoint_stats(logz: np.ndarray) -> tuple[np.ndarray, ...]:
    m = logz.max(axis=1, keepdims=True)
    p = np.exp(logz - m)
    p /= p.sum(axis=1, keepdims=True)
    j = p.max(axis=1)
    i = np.einsum("rt,rt->r", p, p)
    if np.any(j * j > i + SANDWICH_TOL) or np.any(i > j + SANDWICH_TOL):
        raise InvariantViolation(
            "endpoint overlap left the sandwich J^2 <= I <= J; this is a bug"
        )
    return p, j, i


def _logsumexp_rows(logz: np.ndarray) -> np.ndarray:
    m = logz.max(axis=1)
    return m + np.log(np.exp(logz - m[:, None]).sum(axis=1))


def _series_batch(
    model,
    keys: np.ndarray,
    n_steps: int,
    memory_budget: int,
    want_series: bool,
) -> dict:
    """Shared DP sweep over R replica environments.

    Returns per-replica arrays: log_w (R, N) always; with want_series also
    j, i (R, N), argmax (R, N, d) and log_p_boundary (R, N).
    """
    if n_steps < 1:
        raise ModelValidationError(f"need at least one step, got n={n_steps}")
    keys = np.asarray(keys, dtype=np.uint64)
    R = keys.shape[0]
    d = model.d
    _check_slice_budget(d, n_steps, R, memory_budget, "slice sweep")
    lam = model.stats.lam
    degenerate = not model.stats.fluctuation_active

    idx = SliceIndexer(d, 0)
    logz = np.zeros((R, 1))
    log_w = np.empty((R, n_steps))
    if want_series:
        j_arr = np.empty((R, n_steps))
        i_arr = np.empty((R, n_steps))
        lpb_arr = np.empty((R, n_steps))
        argmax = np.empty((R, n_steps, d), dtype=np.int64)

    for n in range(1, n_steps + 1):
        if want_series:
            p, j, i = _endpoint_stats(logz)
            j_arr[:, n - 1] = j
            i_arr[:, n - 1] = i
            argmax[:, n - 1] = idx.points()[p.argmax(axis=1)]
        logw = np.log(model.weights_plus(idx.points(), keys))
        nxt_idx = SliceIndexer(d, n)
        logz = _push_forward(logz, logw, nxt_idx, idx)
        idx = nxt_idx
        lpb = _logsumexp_rows(logz)
        if np.any(lpb > 1e-9):
            raise InvariantViolation(
                "boundary-crossing probability exceeded 1; this is a bug"
            )
        # When the forward mass e^{Psi} is constant, W_n = 1 identically
        # (the DP value only re-derives it with float dust), so pin it.
        log_w[:, n - 1] = 0.0 if degenerate else lpb - n * lam
        if want_series:
            lpb_arr[:, n - 1] = lpb

    out = {"log_w": log_w}
    if want_series:
        out.update(j=j_arr, i=i_arr, log_p_boundary=lpb_arr, argmax=argmax)
    return out


def batch_log_w(
    model, keys, n_steps: int, memory_budget: int = DEFAULT_MEMORY_BUDGET
) -> np.ndarray:
    """log W_n trajectories, shape (len(keys), n_steps), one row per environment key."""
    return _series_batch(model, keys, n_steps, memory_budget, want_series=False)["log_w"]


def batch_series_arrays(
    model, keys, n_steps: int, memory_budget: int = DEFAULT_MEMORY_BUDGET
) -> dict:
    """Full per-step statistics for a batch of environment keys.

    Dict of arrays: log_w, j, i, log_p_boundary (R, N); argmax (R, N, d);
    cesaro_j, cesaro_i (R, N).
    """
    out = _series_batch(model, keys, n_steps, memory_budget, want_series=True)
    denom = np.arange(1, n_steps + 1, dtype=np.float64)
    out["cesaro_j"] = np.cumsum(out["j"], axis=1) / denom
    out["cesaro_i"] = np.cumsum(out["i"], axis=1) / denom
    return out


def run_walk(
    model, n_steps: int, memory_budget: int = DEFAULT_MEMORY_BUDGET
) -> LocalizationSeries:
    """Full localization series of one environment realization (the model's seed)."""
    keys = np.asarray([model.env_key], dtype=np.uint64)
    arrs = batch_series_arrays(model, keys, n_steps, memory_budget)
    records = tuple(
        StepRecord(
            n=n,
            log_w=float(arrs["log_w"][0, n - 1]),
            j=float(arrs["j"][0, n - 1]),
            i=float(arrs["i"][0, n - 1]),
            argmax_site=tuple(int(v) for v in arrs["argmax"][0, n - 1]),
            log_p_boundary=float(arrs["log_p_boundary"][0, n - 1]),
        )
        for n in range(1, n_steps + 1)
    )
    return LocalizationSeries(
        d=model.d,
        records=records,
        cesaro_j=arrs["cesaro_j"][0].copy(),
        cesaro_i=arrs["cesaro_i"][0].copy(),
    )


def replica_log_w(
    model,
    master_seed: int,
    replicas: int,
    n_steps: int,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
) -> np.ndarray:
    """log W_n over independent replica environments derived from master_seed."""
    keys = rng.replica_env_keys(master_seed, replicas)
    return batch_log_w(model, keys, n_steps, memory_budget)


def _box_dp(
    model,
    target,
    keys,
    mode: str,
    force_sign,
    memory_budget: int,
) -> np.ndarray:
    """Directed-path DP restricted to the box [0, target].

    Every directed path to `target` stays in the box, so this is exact while
    allocating only prod(target_i + 1) cells instead of whole slices.  The
    free coordinates are the first d-1 (the last is determined by the slice
    level); one dense array per slice level is reused.

    mode "sum": returns log Z_n(target) = log-sum over paths of prod w.
    mode "max": returns max over paths of sum_{k<n} phi(x_k) with the site
    potential phi(x) = log(1 + eps * xi(x)) (SharedSign disorder), or the
    constant log(1 + eps * force_sign) when force_sign is given.
    """
    target = np.asarray(target, dtype=np.int64)
    d = model.d
    if target.shape != (d,) or np.any(target < 0):
        raise ModelValidationError(f"target must be {d} nonnegative integers")
    n = int(target.sum())
    if n < 1:
        raise ModelValidationError("target must lie on a slice with n >= 1")
    keys = model._key_array(keys)
    R = keys.shape[0]

    dims = tuple(int(t) + 1 for t in target[:-1])
    ncells = int(np.prod(dims, dtype=np.int64)) if dims else 1
    per_dir = d if mode == "sum" else 1
    needed = 8 * R * ncells * (2 + per_dir) + 16 * ncells * d
    if needed > memory_budget:
        raise ResourceBudgetError("box DP", needed, memory_budget)

    if d == 1:
        cells = np.zeros((1, 0), dtype=np.int64)
    else:
        cells = np.indices(dims).reshape(d - 1, -1).T.astype(np.int64)
    cell_sum = cells.sum(axis=1)
    t_last = int(target[-1])

    combine = np.logaddexp if mode == "sum" else np.maximum
    A = np.full((R, ncells), _NEG_INF)
    A[:, 0] = 0.0  # origin cell: all free coords zero is flat index 0 in C order

    for k in range(n):
        x_last = k - cell_sum
        valid = (x_last >= 0) & (x_last <= t_last)
        sites = np.concatenate([cells[valid], x_last[valid, None]], axis=1)
        if mode == "sum":
            w = np.log(model.weights_plus(sites, keys))  # (R, m, d)
            dense = np.full((R, ncells, d), _NEG_INF)
            dense[:, valid, :] = w
        else:
            if force_sign is None:
                phi = np.log1p(model.epsilon * model.xi_field(sites, keys))
            else:
                phi = np.full((R, sites.shape[0]), np.log1p(model.epsilon * float(force_sign)))
            dense = np.full((R, ncells, 1), _NEG_INF)
            dense[:, valid, 0] = phi

        shaped_A = A.reshape((R,) + dims) if dims else A.reshape((R,))
        new = np.full_like(A, _NEG_INF)
        shaped_new = new.reshape((R,) + dims) if dims else new.reshape((R,))
        for e in range(d):
            col = dense[:, :, e] if mode == "sum" else dense[:, :, 0]
            shaped_c = (shaped_A + col.reshape(shaped_A.shape)) if dims else (
                shaped_A + col.reshape(R)
            )
            if e < d - 1:
                src = (slice(None),) * (1 + e) + (slice(None, -1),)
                dst = (slice(None),) * (1 + e) + (slice(1, None),)
                shaped_new[dst] = combine(shaped_new[dst], shaped_c[src])
            else:
                shaped_new[...] = combine(shaped_new, shaped_c)
        A = new

    t_flat = 0
    for j, v in enumerate(target[:-1]):
        stride = int(np.prod(dims[j + 1 :], dtype=np.int64)) if j + 1 < len(dims) else 1
        t_flat += int(v) * stride
    return A[:, t_flat]


def box_point_logz(
    model, target, keys=None, memory_budget: int = DEFAULT_MEMORY_BUDGET
) -> np.ndarray:
    """log Z_n(target) per environment key, via the box-restricted DP."""
    return _box_dp(model, target, keys, "sum", None, memory_budget)


def box_path_max(
    model,
    target,
    keys=None,
    force_sign=None,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
) -> np.ndarray:
    """Max over directed paths to target of the summed site potential (max-plus DP)."""
    return _box_dp(model, target, keys, "max", force_sign, memory_budget)
