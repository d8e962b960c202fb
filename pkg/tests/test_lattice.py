"""Slice indexing: sizes, rank/point bijection, step sources, rounding."""

import math

import numpy as np
import pytest

import oracles
from rwre_boundary.errors import ModelValidationError
from rwre_boundary.lattice import (
    SliceIndexer,
    check_direction,
    multinomial_log_count,
    round_to_slice,
    slice_size,
)


@pytest.mark.parametrize("d", [1, 2, 3, 4, 6])
@pytest.mark.parametrize("n", [0, 1, 2, 5, 9])
def test_slice_size_is_binomial(d, n):
    assert slice_size(d, n) == math.comb(n + d - 1, d - 1)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
@pytest.mark.parametrize("n", [0, 1, 3, 6])
def test_rank_points_roundtrip(d, n):
    ix = SliceIndexer(d, n)
    pts = ix.points()
    assert pts.shape == (ix.size, d)
    assert np.all(pts >= 0)
    assert np.all(pts.sum(axis=1) == n)
    assert np.array_equal(ix.rank(pts), np.arange(ix.size))


def test_points_are_lex_sorted_on_free_coords():
    ix = SliceIndexer(3, 4)
    pts = ix.points()
    keys = [tuple(p[:-1]) for p in pts]
    assert keys == sorted(keys)


@pytest.mark.parametrize("d,n", [(2, 5), (3, 4), (4, 3)])
def test_step_sources_match_bruteforce(d, n):
    prev = SliceIndexer(d, n - 1)
    cur = SliceIndexer(d, n)
    lookup = {tuple(p): r for r, p in enumerate(prev.points())}
    srcs = cur.step_sources(prev)
    assert srcs.shape == (d, cur.size)
    for r, p in enumerate(cur.points()):
        for e in range(d):
            q = list(p)
            q[e] -= 1
            expect = lookup.get(tuple(q), -1)
            assert srcs[e, r] == expect


def test_rank_rejects_points_off_slice():
    ix = SliceIndexer(2, 3)
    with pytest.raises(ModelValidationError):
        ix.rank(np.array([1, 1]))


def test_round_to_slice_basics():
    y = np.array([0.5, 0.5])
    x = round_to_slice(y, 7)
    assert x.sum() == 7 and np.all(x >= 0)
    # largest-remainder: each coordinate within one unit of the target
    assert np.all(np.abs(x - 7 * y) <= 1.0 + 1e-12)


def test_round_to_slice_tie_goes_to_lowest_index():
    x = round_to_slice(np.array([1 / 3, 1 / 3, 1 / 3]), 10)
    assert tuple(x) == (4, 3, 3)


def test_round_to_slice_exact_lattice_point():
    x = round_to_slice(np.array([0.25, 0.75]), 8)
    assert tuple(x) == (2, 6)


def test_round_to_slice_spec_direction():
    x = round_to_slice(np.array([0.97, 0.01, 0.01, 0.01]), 400)
    assert tuple(x) == (388, 4, 4, 4)


@pytest.mark.parametrize("x", [(0, 0), (3, 2), (5, 0), (2, 3, 4), (1, 1, 1, 1)])
def test_multinomial_log_count_matches_exact(x):
    expect = math.log(oracles.multinomial_count(x))
    assert multinomial_log_count(np.array(x)) == pytest.approx(expect, abs=1e-10)


def test_check_direction_validation():
    assert np.allclose(check_direction([0.2, 0.8]), [0.2, 0.8])
    with pytest.raises(ModelValidationError):
        check_direction([0.5, 0.6])
    with pytest.raises(ModelValidationError):
        check_direction([-0.1, 1.1])


def test_indexer_guards_int64_overflow():
    # C(98, 34) is far beyond int64; the table must refuse, not wrap
    with pytest.raises(ModelValidationError):
        SliceIndexer(35, 64)
