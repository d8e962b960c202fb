"""Environment laws: validation, exact statistics, sampling semantics."""

import numpy as np
import pytest

import oracles
from rwre_boundary.env import (
    FiniteIIDFamily,
    FiniteIIDModel,
    FiniteTable,
    PerturbedFamily,
    PerturbedModel,
    SharedSign,
    eps_max,
    epsilon_range,
    uniform_alpha,
)
from rwre_boundary.errors import ModelValidationError


def balanced_table(d=2):
    """Mean-zero disorder that only moves mass within the positive steps.

    The positive-step total is untouched, so the law is degenerate for the
    boundary-crossing weight even though individual weights fluctuate.
    """
    v = np.zeros(2 * d)
    v[0], v[1] = 1.0, -1.0
    return FiniteTable(np.stack([v, -v]), np.array([0.5, 0.5]))


def test_uniform_alpha():
    a = uniform_alpha(3)
    assert a.shape == (6,)
    assert np.allclose(a, 1 / 6)
    with pytest.raises(ModelValidationError):
        uniform_alpha(0)


@pytest.mark.parametrize(
    "alpha",
    [
        [0.5, 0.5, 0.5],          # odd length
        [0.6, 0.2, 0.1, 0.2],     # sum != 1
        [0.5, 0.5, 0.0, 0.0],     # zero entry
        [0.7, -0.2, 0.3, 0.2],    # negative entry
    ],
)
def test_alpha_validation(alpha):
    with pytest.raises(ModelValidationError):
        PerturbedModel(alpha, 0.1, SharedSign(), seed=0)


@pytest.mark.parametrize("eps", [-0.1, 1.0, 1.5])
def test_epsilon_domain(eps):
    with pytest.raises(ModelValidationError):
        PerturbedModel(uniform_alpha(2), eps, SharedSign(), seed=0)


def test_shared_sign_needs_half_mass_on_positive_steps():
    alpha = np.array([0.4, 0.2, 0.2, 0.2])  # positive mass 0.6
    with pytest.raises(ModelValidationError, match="1/2"):
        PerturbedModel(alpha, 0.3, SharedSign(), seed=0)


def test_xi_table_admissibility_rejections():
    alpha = uniform_alpha(2)
    bad_sup = FiniteTable(np.array([[0.5, -0.5, 0.5, -0.5]] * 2) * np.array([[1], [-1]]),
                          np.array([0.5, 0.5]))
    with pytest.raises(ModelValidationError, match="sup-norm"):
        PerturbedModel(alpha, 0.3, bad_sup, seed=0)
    bad_dot = FiniteTable(np.array([[1.0, 1.0, 1.0, -1.0], [-1.0, -1.0, -1.0, 1.0]]),
                          np.array([0.5, 0.5]))
    with pytest.raises(ModelValidationError, match="admissible"):
        PerturbedModel(alpha, 0.3, bad_dot, seed=0)
    bad_mean = FiniteTable(np.array([[1.0, -1.0, 1.0, -1.0]]), np.array([1.0]))
    with pytest.raises(ModelValidationError, match="mean zero"):
        PerturbedModel(alpha, 0.3, bad_mean, seed=0)


@pytest.mark.parametrize("d,eps", [(1, 0.3), (2, 0.6), (3, 0.9), (4, 0.1)])
def test_shared_sign_stats_closed_forms(d, eps):
    m = PerturbedModel(uniform_alpha(d), eps, SharedSign(), seed=0)
    s = m.stats
    assert s.c == pytest.approx(0.5, abs=1e-15)
    assert s.lam == pytest.approx(np.log(0.5), abs=1e-15)
    assert s.sigma2 == pytest.approx(eps**2, abs=1e-14)
    assert s.second_moment_const == pytest.approx(0.5 * eps**2, abs=1e-14)
    assert np.allclose(s.rho, 1.0 + eps**2, atol=1e-14)
    assert s.kappa == pytest.approx((1 - eps) / (2 * d), abs=1e-14)
    assert s.fluctuation_active == (eps > 0)
    assert np.allclose(s.q_plus, 1 / (2 * d))
    assert np.allclose(s.s_atoms, [0.5 * (1 + eps), 0.5 * (1 - eps)])


def test_second_moment_const_spec_value():
    # d=2 uniform, eps=0.6: (E[S^2] - c^2)/c = c * eps^2 = 0.18
    m = PerturbedModel(uniform_alpha(2), 0.6, SharedSign(), seed=0)
    assert m.stats.second_moment_const == pytest.approx(0.18, abs=1e-14)


def test_degenerate_laws_detected_exactly():
    assert PerturbedModel(uniform_alpha(2), 0.0, SharedSign(), seed=0).stats.fluctuation_active is False
    mb = PerturbedModel(uniform_alpha(2), 0.8, balanced_table(), seed=0)
    assert mb.stats.fluctuation_active is False
    assert mb.stats.sigma2 == 0.0
    assert mb.stats.second_moment_const == 0.0
    # but the law is genuinely random sitewise
    assert len(np.unique(mb.stats.atom_weights[:, 0])) == 2


def test_eps_max_formula_and_domain():
    alpha = uniform_alpha(2)  # min alpha = 1/4
    assert eps_max(alpha, 0.1) == pytest.approx(1 - 0.1 / 0.25, abs=1e-15)
    r = epsilon_range(alpha, 0.2)
    assert r.eps_max == pytest.approx(0.2, abs=1e-12)
    for kappa in (0.0, 0.25, 0.3, -1.0):
        with pytest.raises(ModelValidationError):
            eps_max(alpha, kappa)


def test_weights_positive_and_normalized_sitewise():
    m = PerturbedModel(uniform_alpha(3), 0.97, SharedSign(), seed=5)
    for x in [(0, 0, 0), (2, 1, 0), (5, 5, 5), (-1, 3, 0)]:
        w = m.site_weights(np.array(x))
        assert w.shape == (6,)
        assert np.all(w > 0)
        assert w.sum() == pytest.approx(1.0, abs=1e-12)


def test_weights_plus_batch_matches_site_weights():
    m = PerturbedModel(uniform_alpha(2), 0.5, SharedSign(), seed=9)
    pts = np.array([[0, 0], [1, 0], [0, 1], [3, 4]])
    batch = m.weights_plus(pts)
    assert batch.shape == (1, 4, 2)
    for i, p in enumerate(pts):
        assert np.allclose(batch[0, i], m.site_weights(p)[:2], atol=0)


def test_xi_field_consistent_with_weights():
    m = PerturbedModel(uniform_alpha(2), 0.5, SharedSign(), seed=3)
    pts = np.array([[i, j] for i in range(5) for j in range(5)])
    signs = m.xi_field(pts)[0]
    assert set(np.unique(signs)) <= {-1.0, 1.0}
    w = m.weights_plus(pts)[0]
    expect = 0.25 * (1 + 0.5 * signs)
    assert np.allclose(w[:, 0], expect, atol=1e-15)
    assert np.allclose(w[:, 1], expect, atol=1e-15)


def test_xi_field_requires_shared_sign():
    mb = PerturbedModel(uniform_alpha(2), 0.5, balanced_table(), seed=3)
    with pytest.raises(ModelValidationError):
        mb.xi_field(np.array([[0, 0]]))


def test_face_reflection_sees_same_disorder():
    # the reflected model at face-local point p samples the physical site
    # p * face, so its weights match the default model evaluated there
    base = PerturbedModel(uniform_alpha(2), 0.7, SharedSign(), seed=11)
    refl = PerturbedModel(uniform_alpha(2), 0.7, SharedSign(), seed=11, face=(-1, 1))
    pts = np.array([[2, 3], [0, 0], [5, 1]])
    phys = pts * np.array([-1, 1])
    assert np.allclose(refl.weights_plus(pts)[0], base.weights_plus(phys)[0], atol=0)


def test_face_validation():
    with pytest.raises(ModelValidationError):
        PerturbedModel(uniform_alpha(2), 0.1, SharedSign(), seed=0, face=(1, 0))
    with pytest.raises(ModelValidationError):
        PerturbedModel(uniform_alpha(2), 0.1, SharedSign(), seed=0, face=(1, 1, 1))


def test_finite_iid_model_validation_and_stats():
    support = np.array([[0.4, 0.3, 0.2, 0.1], [0.1, 0.2, 0.3, 0.4]])
    probs = np.array([0.25, 0.75])
    m = FiniteIIDModel(support, probs, seed=0)
    q = probs @ support
    assert np.allclose(m.stats.q, q, atol=1e-15)
    assert m.stats.c == pytest.approx(q[:2].sum(), abs=1e-15)
    assert m.stats.kappa == pytest.approx(0.1, abs=1e-15)
    with pytest.raises(ModelValidationError):
        FiniteIIDModel(support * 0.9, probs, seed=0)  # rows no longer sum to 1
    with pytest.raises(ModelValidationError):
        FiniteIIDModel(support, np.array([0.5, 0.6]), seed=0)
    with pytest.raises(ModelValidationError):
        FiniteIIDModel(np.array([[0.5, 0.5, 0.0, 0.0]]), np.array([1.0]), seed=0)


def test_finite_iid_family_rejects_epsilon():
    support = np.array([[0.4, 0.3, 0.2, 0.1], [0.1, 0.2, 0.3, 0.4]])
    fam = FiniteIIDFamily(support, np.array([0.5, 0.5]))
    assert fam.d == 2
    fam.model(None, seed=1)
    with pytest.raises(ModelValidationError):
        fam.model(0.5, seed=1)


def test_family_defaults_to_shared_sign():
    fam = PerturbedFamily(alpha=uniform_alpha(2))
    assert isinstance(fam.xi, SharedSign)
    assert fam.d == 2
    m = fam.model(0.25, 4)
    assert m.epsilon == 0.25 and m.seed == 4


def test_atoms_match_oracle_construction():
    alpha = uniform_alpha(2)
    eps = 0.37
    m = PerturbedModel(alpha, eps, SharedSign(), seed=0)
    atoms, probs = oracles.shared_sign_atoms(alpha, eps)
    assert np.allclose(np.sort(m.stats.atom_weights[:, 0]), np.sort(atoms[:, 0]), atol=1e-15)
    assert np.allclose(m.stats.atom_probs, probs, atol=0)
