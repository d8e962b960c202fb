"""Epsilon sweeps, transition detection, and the face-point certificate."""

import numpy as np
import pytest

from rwre_boundary.env import FiniteTable, PerturbedFamily, uniform_alpha
from rwre_boundary.errors import ModelValidationError
from rwre_boundary.sweep import (
    MIN_SWEEP_REPLICAS,
    bound_margin,
    entropy,
    epsilon_sweep,
    example_d4_verify,
    hoeffding_threshold,
    lpp_max,
)

CERT_Y = (0.97, 0.01, 0.01, 0.01)
CERT_F = 0.16770053683981007


def family(d=2, xi=None):
    return PerturbedFamily(alpha=uniform_alpha(d), xi=xi)


def balanced_table(d=2):
    v = np.zeros(2 * d)
    v[0], v[1] = 1.0, -1.0
    return FiniteTable(np.stack([v, -v]), np.array([0.5, 0.5]))


# ---------------------------------------------------------------- validation


@pytest.mark.parametrize(
    "grid,msg",
    [
        ([], "non-empty"),
        ([0.3, 0.3], "strictly increasing"),
        ([0.6, 0.3], "strictly increasing"),
        ([-0.1, 0.5], "lie in"),
        ([0.5, 1.0], "lie in"),
    ],
)
def test_sweep_rejects_bad_grids(grid, msg):
    with pytest.raises(ModelValidationError, match=msg):
        epsilon_sweep(family(), grid, n_steps=10, replicas=50, seed=0)


def test_sweep_rejects_grid_beyond_ellipticity_cap():
    # uniform d=2 alpha has min 0.25, so kappa=0.1 caps eps at 0.6
    with pytest.raises(ModelValidationError, match="eps_max"):
        epsilon_sweep(
            family(), [0.3, 0.9], n_steps=10, replicas=50, seed=0, kappa_target=0.1
        )
    # at or below the cap is fine
    epsilon_sweep(family(), [0.3, 0.6], n_steps=10, replicas=50, seed=0, kappa_target=0.1)


def test_sweep_requires_enough_replicas():
    with pytest.raises(ModelValidationError, match=str(MIN_SWEEP_REPLICAS)):
        epsilon_sweep(family(), [0.5], n_steps=10, replicas=49, seed=0)


# ---------------------------------------------------------------- frozen run


def test_sweep_frozen_table_and_detection():
    table = epsilon_sweep(family(), [0.0, 0.3, 0.6, 0.9], n_steps=50, replicas=100, seed=11)
    expected = [
        (0.0, 0.0, 0.0, False),
        (0.3, -0.008445510755226798, 0.001857511402799487, True),
        (0.6, -0.04459298741302065, 0.004397387264036055, True),
        (0.9, -0.19254333324144707, 0.009632545835894698, True),
    ]
    assert len(table.rows) == 4
    for row, (eps, mean, se, loc) in zip(table.rows, expected):
        assert row.epsilon == eps
        assert row.gap.mean_gap == pytest.approx(mean, abs=1e-12)
        assert row.gap.stderr == pytest.approx(se, abs=1e-12)
        assert row.localized is loc
    assert table.eps_bar_est == 0.3
    assert table.eps_bar_bracket == (0.0, 0.3)
    assert table.monotonicity_violations == ()
    assert table.common_noise is True
    assert table.threshold == 0.0


def test_sweep_is_pure_in_its_arguments():
    t1 = epsilon_sweep(family(), [0.3, 0.7], n_steps=20, replicas=50, seed=4)
    t2 = epsilon_sweep(family(), [0.3, 0.7], n_steps=20, replicas=50, seed=4)
    for a, b in zip(t1.rows, t2.rows):
        assert a.gap == b.gap and a.localized == b.localized
    assert t1.eps_bar_est == t2.eps_bar_est


def test_sweep_common_noise_toggle_changes_draws_not_conclusions():
    shared = epsilon_sweep(family(), [0.4, 0.8], n_steps=25, replicas=60, seed=2)
    fresh = epsilon_sweep(
        family(), [0.4, 0.8], n_steps=25, replicas=60, seed=2, common_noise=False
    )
    assert shared.common_noise is True and fresh.common_noise is False
    # first grid point shares the key derivation path, later ones must not
    assert shared.rows[0].gap.mean_gap != fresh.rows[0].gap.mean_gap or (
        shared.rows[1].gap.mean_gap != fresh.rows[1].gap.mean_gap
    )
    # the strong-disorder point is localized regardless of the noise scheme
    assert shared.rows[1].localized and fresh.rows[1].localized
    assert shared.eps_bar_est == fresh.eps_bar_est == 0.8


def test_sweep_threshold_suppresses_detection():
    table = epsilon_sweep(
        family(), [0.3, 0.9], n_steps=20, replicas=50, seed=7, threshold=10.0
    )
    assert table.eps_bar_est is None
    assert table.eps_bar_bracket is None
    assert not any(r.localized for r in table.rows)


def test_sweep_bracket_at_first_grid_point_starts_at_zero():
    table = epsilon_sweep(family(), [0.9], n_steps=30, replicas=60, seed=3)
    assert table.rows[0].localized
    assert table.eps_bar_est == 0.9
    assert table.eps_bar_bracket == (0.0, 0.9)


def test_sweep_degenerate_disorder_never_detects():
    table = epsilon_sweep(
        family(xi=balanced_table(2)), [0.2, 0.5, 0.8], n_steps=15, replicas=50, seed=0
    )
    assert table.eps_bar_est is None
    for row in table.rows:
        assert row.gap.mean_gap == 0.0 and row.gap.stderr == 0.0


# ---------------------------------------------------------------- lpp / bounds


@pytest.mark.parametrize("sign,eps", [(1, 0.5), (-1, 0.5), (1, 0.9), (-1, 0.9)])
def test_lpp_max_forced_sign_closed_form(sign, eps):
    m = family().model(eps, seed=0)
    val = lpp_max(m, (0.5, 0.5), 12, force_sign=sign)
    assert val == pytest.approx(np.log1p(eps * sign), rel=1e-14)


def test_lpp_max_bounded_by_extreme_site_values():
    m = family().model(0.7, seed=5)
    val = lpp_max(m, (0.5, 0.5), 16)
    assert np.log1p(-0.7) - 1e-12 <= val <= np.log1p(0.7) + 1e-12
    assert lpp_max(m, (0.5, 0.5), 16) == val  # deterministic


def test_lpp_max_requires_scalar_sign_disorder():
    m = family(xi=balanced_table(2)).model(0.5, seed=0)
    with pytest.raises(ModelValidationError, match="SharedSign"):
        lpp_max(m, (0.5, 0.5), 10)
    # but a forced sign bypasses the field entirely
    assert lpp_max(m, (0.5, 0.5), 10, force_sign=1) == pytest.approx(np.log(1.5), rel=1e-14)


def test_entropy_values():
    assert entropy(CERT_Y) == pytest.approx(CERT_F, abs=1e-16)
    assert entropy((0.25, 0.25, 0.25, 0.25)) == pytest.approx(np.log(4.0), rel=1e-15)
    assert entropy((1.0, 0.0)) == 0.0
    with pytest.raises(ModelValidationError, match="sum to 1"):
        entropy((0.5, 0.4))


def test_hoeffding_threshold_and_margin_frozen_values():
    assert bound_margin(0.95, CERT_F) == pytest.approx(-0.10309717180796274, abs=1e-15)
    assert bound_margin(0.5, CERT_F) == pytest.approx(0.17428314445401394, abs=1e-15)
    a = hoeffding_threshold(0.95, CERT_F)
    assert a == pytest.approx(
        np.log(1.95 / 0.05) * np.sqrt(CERT_F / 2.0), rel=1e-15
    )
    for bad in (0.0, 1.0, -0.2, 1.3):
        with pytest.raises(ModelValidationError, match="epsilon"):
            hoeffding_threshold(bad, CERT_F)


# ---------------------------------------------------------------- certificate


def test_certificate_requires_interior_direction():
    with pytest.raises(ModelValidationError, match="interior"):
        example_d4_verify((0.5, 0.5, 0.0, 0.0), 0.95, n_steps=40, seeds=4)


def test_certificate_report_wiring_and_matched_alpha():
    rep = example_d4_verify(CERT_Y, 0.95, n_steps=40, seeds=8, seed=0)
    assert rep.f_y == pytest.approx(CERT_F, abs=1e-16)
    # matched alpha makes y the annealed drift direction: ia(y) = -log c = log 2
    assert rep.ia_y == pytest.approx(np.log(2.0), abs=1e-12)
    assert rep.mu == pytest.approx(0.5 * np.log1p(-0.95**2), rel=1e-15)
    assert rep.bound_margin == pytest.approx(rep.a_star + rep.mu, abs=1e-16)
    assert rep.lpp_threshold == pytest.approx(rep.mu + rep.a_star, abs=1e-16)
    assert rep.bound_margin < 0 and rep.verdict == "certified-localized"
    assert len(rep.lpp_values) == 8
    assert rep.lpp_mean == pytest.approx(np.mean(rep.lpp_values), rel=1e-15)
    assert 0.0 <= rep.frac_within <= 1.0


def test_certificate_inconclusive_at_weak_disorder():
    rep = example_d4_verify(CERT_Y, 0.5, n_steps=40, seeds=4, seed=0)
    assert rep.bound_margin > 0
    assert rep.verdict == "inconclusive"


def test_certificate_deterministic():
    r1 = example_d4_verify(CERT_Y, 0.9, n_steps=40, seeds=6, seed=1)
    r2 = example_d4_verify(CERT_Y, 0.9, n_steps=40, seeds=6, seed=1)
    assert r1.lpp_values == r2.lpp_values
    r3 = example_d4_verify(CERT_Y, 0.9, n_steps=40, seeds=6, seed=2)
    assert r3.lpp_values != r1.lpp_values
