"""Directed-slice geometry.

The walk takes steps from {e_1, ..., e_d} only, so after n steps it sits on
the slice of compositions {x >= 0, sum x_i = n}, of size C(n+d-1, d-1).
This module gives that slice a dense index (lexicographic on the first d-1
coordinates), maps between indices and points, locates each point's
predecessors on the previous slice, rounds a direction vector on the
simplex to a lattice point, and counts directed paths to a point.
"""

from __future__ import annotations

import math
from functools import cached_property

import numpy as np
from scipy.special import gammaln

from .errors import ModelValidationError

DIRECTION_TOL = 1e-12


def slice_size(d: int, n: int) -> int:
    """Number of points on the slice: compositions of n into d nonnegative parts."""
    if d < 1:
        raise ModelValidationError(f"dimension must be >= 1, got {d}")
    if n < 0:
        raise ModelValidationError(f"slice level must be >= 0, got {n}")
    return math.comb(n + d - 1, d - 1)


def check_direction(y) -> np.ndarray:
    """Validate a direction on the boundary simplex {y >= 0, sum y = 1}."""
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1 or y.size < 1:
        raise ModelValidationError("direction must be a 1-d vector")
    if np.any(y < 0):
        raise ModelValidationError(f"direction has negative entries: {y.tolist()}")
    if abs(float(y.sum()) - 1.0) > DIRECTION_TOL:
        raise ModelValidationError(
            f"direction entries must sum to 1 within {DIRECTION_TOL}, got {float(y.sum())!r}"
        )
    return y


class SliceIndexer:
    """Bijection between slice points of {|x|_1 = n, x >= 0} and [0, size).

    Enumeration order is lexicographic on (x_1, ..., x_{d-1}); the last
    coordinate is determined.  rank/unrank are O(d) per point via a
    cumulative-binomial table, so fields over a slice can live in dense
    arrays.
    """

    def __init__(self, d: int, n: int):
        self.d = int(d)
        self.n = int(n)
        self.size = slice_size(self.d, self.n)
        if self.size > np.iinfo(np.int64).max // 2:
            raise ModelValidationError(
                f"slice (d={d}, n={n}) has {self.size} points, beyond int64 indexing"
            )
        # _T[k, m] = C(m + k, k): points of the sub-simplex {|x|_1 <= m} in k
        # parts.  Built by the Pascal recurrence so every entry is exact.
        self._T = np.ones((self.d, self.n + 1), dtype=np.int64)
        for k in range(1, self.d):
            self._T[k] = np.cumsum(self._T[k - 1])

    def __repr__(self) -> str:
        return f"SliceIndexer(d={self.d}, n={self.n}, size={self.size})"

    @cached_property
    def _points(self) -> np.ndarray:
        return _compositions(self.d, self.n)

    def points(self) -> np.ndarray:
        """All slice points as an int64 array (size, d), in index order. Read-only."""
        return self._points

    def rank(self, pts) -> np.ndarray:
        """Dense indices of points (..., d) -> int64 (...)."""
        pts = np.asarray(pts, dtype=np.int64)
        if pts.shape[-1] != self.d:
            raise ModelValidationError(
                f"points must have {self.d} coordinates, got shape {pts.shape}"
            )
        if np.any(pts < 0) or np.any(pts.sum(axis=-1) != self.n):
            raise ModelValidationError(
                f"points must lie on the slice {{x >= 0, |x|_1 = {self.n}}}"
            )
        if self.d == 1:
            return np.zeros(pts.shape[:-1], dtype=np.int64)
        rem = self.n - np.cumsum(pts, axis=-1) + pts  # rem_j = n - sum_{t<j} x_t
        idx = np.zeros(pts.shape[:-1], dtype=np.int64)
        for j in range(self.d - 1):
            k = self.d - 1 - j
            idx += self._T[k, rem[..., j]] - self._T[k, rem[..., j] - pts[..., j]]
        return idx

    def unrank(self, idx) -> np.ndarray:
        """Points for dense indices (...,) -> int64 (..., d)."""
        return self._points[np.asarray(idx, dtype=np.int64)]

    def step_sources(self, prev: "SliceIndexer") -> np.ndarray:
        """Predecessor indices on the previous slice, per step direction.

        Returns int64 (d, size): entry [i, t] is prev.rank(point_t - e_i), or
        -1 when coordinate i of point_t is zero.  Every point of a slice with
        n >= 1 has at least one valid predecessor.
        """
        if prev.d != self.d or prev.n != self.n - 1:
            raise ModelValidationError(
                f"expected predecessor slice (d={self.d}, n={self.n - 1}), "
                f"got (d={prev.d}, n={prev.n})"
            )
        pts = self._points
        src = np.full((self.d, self.size), -1, dtype=np.int64)
        for i in range(self.d):
            ok = pts[:, i] >= 1
            q = pts[ok].copy()
            q[:, i] -= 1
            src[i, ok] = prev.rank(q)
        return src


def _compositions(d: int, n: int) -> np.ndarray:
    """All compositions of n into d nonnegative parts, lex order on x_1..x_{d-1}."""
    if d == 1:
        out = np.array([[n]], dtype=np.int64)
    else:
        blocks = []
        for x0 in range(n + 1):
            sub = _compositions(d - 1, n - x0)
            head = np.full((sub.shape[0], 1), x0, dtype=np.int64)
            blocks.append(np.hstack([head, sub]))
        out = np.vstack(blocks)
    out.setflags(write=False)
    return out


def round_to_slice(y, n: int) -> np.ndarray:
    """Largest-remainder rounding of n*y to a composition of n.

    Remainder ties award the extra unit to the lowest coordinate index, so
    the result is deterministic.  Guarantees |result - n*y|_inf <= d, hence
    result/n -> y as n grows.
    """
    y = check_direction(y)
    if n < 1:
        raise ModelValidationError(f"slice level must be >= 1, got {n}")
    scaled = y * n
    base = np.floor(scaled).astype(np.int64)
    short = n - int(base.sum())
    if short > 0:
        order = np.argsort(-(scaled - base), kind="stable")
        base[order[:short]] += 1
    return base


def multinomial_log_count(x) -> float:
    """log of the number of directed paths from the origin to slice point x.

    Computed as log(n! / prod x_i!) with log-gamma, exact to ~1e-10 relative
    up to n around 1e6.
    """
    x = np.asarray(x, dtype=np.int64)
    if np.any(x < 0):
        raise ModelValidationError(f"slice point has negative entries: {x.tolist()}")
    n = int(x.sum())
    return float(gammaln(n + 1) - gammaln(x + 1).sum())
