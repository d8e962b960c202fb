"""Environment laws: validation, exact disorder statistics, site sampling.

An environment assigns every lattice site x an i.i.d. jump-probability
vector w(x, .) over the 2d nearest-neighbor steps (order e_1..e_d,
-e_1..-e_d).  Two families are supported:

* Perturbed: w(x, e) = alpha(e) * (1 + eps * xi(x, e)) for a base vector
  alpha and a bounded mean-zero disorder law xi.  Admissible xi vectors r
  satisfy sum_e r(e) alpha(e) = 0 (so w stays a probability vector) and
  sup_e |r(e)| = 1 (so eps fixes the disorder scale).
* FiniteIID: an explicit finite support of weight vectors with probabilities.

Everything is finite-support, so the moment statistics (mean weights q, the
positive-step mass c = sum_{V+} q, its log, the variance parameter sigma2 of
e^{Psi}/c - 1 where Psi(x) = log sum_{V+} w(x, .), and the collision factors
rho(e, e') used by the exact second moment) are computed by exact summation
over the support atoms, never by sampling.

Site draws are pure functions of (seed, site) via the counter-based hash in
rng.py: one uniform per site selects a support atom.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import ModelValidationError

WEIGHT_TOL = 1e-12
# Below this relative spread the positive-step mass is treated as constant
# (the disorder cannot move the boundary-crossing weight at all).
DEGENERACY_TOL = 1e-12


@dataclass(frozen=True)
class SharedSign:
    """Disorder that flips all positive steps together: r = +1 on V+, -1 on V-.

    The site variable is a single fair sign.  Admissible only when the base
    vector puts mass exactly 1/2 on the positive steps, since the zero-mean
    constraint sum_e r(e) alpha(e) = 0 forces sum_{V+} alpha = sum_{V-} alpha.
    """

    def table(self, d: int) -> tuple[np.ndarray, np.ndarray]:
        r = np.concatenate([np.ones(d), -np.ones(d)])
        return np.stack([r, -r]), np.array([0.5, 0.5])


@dataclass(frozen=True, eq=False)
class FiniteTable:
    """Explicit finite-support disorder law: vectors (k, 2d) with probabilities (k,)."""

    vectors: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        vectors = np.asarray(self.vectors, dtype=np.float64)
        probs = np.asarray(self.probs, dtype=np.float64)
        if vectors.ndim != 2 or probs.ndim != 1 or vectors.shape[0] != probs.shape[0]:
            raise ModelValidationError(
                "disorder table needs vectors (k, 2d) and probabilities (k,)"
            )
        if np.any(probs <= 0) or abs(float(probs.sum()) - 1.0) > WEIGHT_TOL:
            raise ModelValidationError(
                "disorder table probabilities must be positive and sum to 1"
            )
        vectors.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "probs", probs)

    def table(self, d: int) -> tuple[np.ndarray, np.ndarray]:
        if self.vectors.shape[1] != 2 * d:
            raise ModelValidationError(
                f"disorder table vectors have {self.vectors.shape[1]} entries, "
                f"expected {2 * d} for dimension {d}"
            )
        return self.vectors, self.probs


@dataclass(frozen=True, eq=False)
class DisorderStats:
    """Exact moment statistics of one environment law (face-local step order).

    q: mean weight per step (2d,);  q_plus: its positive-step part (d,);
    c: sum of q_plus;  lam: log c;  kappa: uniform ellipticity constant
    (smallest weight in the support);  fluctuation_active: whether the
    positive-step mass S(x) = e^{Psi(x)} is non-constant (constant S makes
    W_n identically 1 and every localization statistic trivial);  sigma2:
    E[(S/c - 1)^2];  second_moment_const: (E[S^2] - c^2)/c;  rho: (d, d)
    collision factors E[w_e w_e'] / (q_e q_e') for e, e' positive;
    atom_weights/atom_probs: the full weight-vector support, for exact
    enumeration by callers.
    """

    q: np.ndarray
    q_plus: np.ndarray
    c: float
    lam: float
    kappa: float
    fluctuation_active: bool
    sigma2: float
    second_moment_const: float
    rho: np.ndarray
    atom_weights: np.ndarray
    atom_probs: np.ndarray

    @property
    def s_atoms(self) -> np.ndarray:
        """Support values of the positive-step mass S = e^{Psi}, one per atom."""
        d = self.q_plus.shape[0]
        return self.atom_weights[:, :d].sum(axis=1)


@dataclass(frozen=True)
class EpsilonRange:
    """Largest perturbation keeping a target ellipticity constant."""

    kappa_target: float
    eps_max: float


def eps_max(alpha, kappa: float) -> float:
    """Largest eps for which every perturbed weight stays >= kappa.

    The extreme weight is min alpha * (1 - eps), so the answer is
    1 - kappa / min alpha, valid for 0 < kappa < min alpha.
    """
    alpha = _check_alpha(alpha)
    amin = float(alpha.min())
    if not 0 < kappa < amin:
        raise ModelValidationError(
            f"ellipticity target must satisfy 0 < kappa < min alpha = {amin!r}, "
            f"got kappa={kappa!r}"
        )
    return 1.0 - kappa / amin


def epsilon_range(alpha, kappa: float) -> EpsilonRange:
    return EpsilonRange(kappa_target=float(kappa), eps_max=eps_max(alpha, kappa))


def _check_alpha(alpha) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=np.float64)
    if alpha.ndim != 1 or alpha.size % 2 != 0 or alpha.size < 2:
        raise ModelValidationError("alpha must be a flat vector of 2d step weights")
    if np.any(alpha <= 0):
        raise ModelValidationError("alpha entries must be strictly positive")
    if abs(float(alpha.sum()) - 1.0) > WEIGHT_TOL:
        raise ModelValidationError(
            f"alpha must sum to 1 within {WEIGHT_TOL}, got {float(alpha.sum())!r}"
        )
    return alpha


def _check_face(face, d: int) -> tuple[int, ...]:
    if face is None:
        return (1,) * d
    face = tuple(int(s) for s in face)
    if len(face) != d or any(s not in (-1, 1) for s in face):
        raise ModelValidationError(f"face must be d signs in {{-1, +1}}, got {face}")
    return face


def _face_index_map(face: tuple[int, ...]) -> np.ndarray:
    """Full-step permutation: face-local index -> physical index.

    Face-local step i (0 <= i < d) is the physical step face[i]*e_i, stored at
    physical index i (positive) or d+i (negative); face-local negative steps
    are the reflections.
    """
    d = len(face)
    out = np.empty(2 * d, dtype=np.int64)
    for i, s in enumerate(face):
        out[i] = i if s == 1 else d + i
        out[d + i] = d + i if s == 1 else i
    return out


class _ModelBase:
    """Shared sampling/statistics plumbing for validated environment models."""

    d: int
    seed: int
    face: tuple[int, ...]
    stats: DisorderStats
    env_key: int
    # Atom decomposition, face-local step order: weight vectors (k, 2d),
    # probabilities (k,), cumulative probabilities for inverse-CDF sampling.
    atom_weights: np.ndarray
    atom_probs: np.ndarray

    def _finish_init(self, d, seed, face, atom_weights, atom_probs):
        self.d = int(d)
        self.seed = int(seed)
        self.face = _check_face(face, self.d)
        atom_weights = np.asarray(atom_weights, dtype=np.float64)
        atom_weights.setflags(write=False)
        self.atom_weights = atom_weights
        self.atom_probs = np.asarray(atom_probs, dtype=np.float64)
        self._atom_cum = np.cumsum(self.atom_probs)
        self._face_arr = np.asarray(self.face, dtype=np.int64)
        self.env_key = rng.derive_key(self.seed, rng.STREAM_ENV)
        self.stats = _stats_from_atoms(atom_weights, self.atom_probs)

    def _atom_index(self, keys: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Support-atom index per (key, site): keys (..., 1)-broadcastable, points (m, d)."""
        phys = np.asarray(points, dtype=np.int64) * self._face_arr
        u = rng.coord_uniform(keys, phys)
        return np.searchsorted(self._atom_cum, u, side="right").clip(0, len(self.atom_probs) - 1)

    def weights_plus(self, points, keys=None) -> np.ndarray:
        """Positive-step weights at slice points, batched over environment keys.

        points: (m, d) int; keys: uint64 (R,) environment keys (default: this
        model's own).  Returns float64 (R, m, d), linear domain.
        """
        keys = self._key_array(keys)
        idx = self._atom_index(keys[:, None], points)
        return self.atom_weights[:, : self.d][idx]

    def site_weights(self, x) -> np.ndarray:
        """Full weight vector w(x, .) over all 2d steps, face-local order."""
        x = np.asarray(x, dtype=np.int64)
        if x.shape != (self.d,):
            raise ModelValidationError(f"site must have {self.d} integer coordinates")
        keys = self._key_array(None)
        idx = self._atom_index(keys[:, None], x[None, :])
        return self.atom_weights[int(idx[0, 0])].copy()

    def _key_array(self, keys) -> np.ndarray:
        if keys is None:
            return np.asarray([self.env_key], dtype=np.uint64)
        return np.asarray(keys, dtype=np.uint64)


class PerturbedModel(_ModelBase):
    """w(x, e) = alpha(e) * (1 + eps * xi(x, e)) with finite-support xi.

    alpha: 2d step weights in physical order e_1..e_d, -e_1..-e_d;
    0 <= eps < 1; xi: SharedSign or FiniteTable (table vectors in the same
    physical order as alpha); seed: master seed for the site hash; face:
    optional sign vector s reflecting the walk to the orthant of s (default
    all +1).  Sampling happens at physical sites, so a reflected model sees
    the same disorder field as the default one; SharedSign is face-local by
    definition (+1 on the face's forward steps).
    """

    def __init__(self, alpha, epsilon: float, xi, seed: int, face=None):
        alpha = _check_alpha(alpha)
        d = alpha.size // 2
        face_t = _check_face(face, d)
        perm = _face_index_map(face_t)
        alpha_eff = alpha[perm]
        epsilon = float(epsilon)
        if not 0.0 <= epsilon < 1.0:
            raise ModelValidationError(f"epsilon must lie in [0, 1), got {epsilon!r}")
        vectors, probs = xi.table(d)
        vectors = np.asarray(vectors, dtype=np.float64)
        if not isinstance(xi, SharedSign):
            vectors = vectors[:, perm]
        _check_xi_membership(vectors, probs, alpha_eff)
        weights = alpha_eff[None, :] * (1.0 + epsilon * vectors)
        self.alpha = alpha
        self.epsilon = epsilon
        self.xi = xi
        self._finish_init(d, seed, face_t, weights, probs)

    def xi_field(self, points, keys=None) -> np.ndarray:
        """Site signs xi(x) for SharedSign disorder: (R, m) of +-1."""
        if not isinstance(self.xi, SharedSign):
            raise ModelValidationError(
                "xi_field needs SharedSign disorder (a single sign per site)"
            )
        keys = self._key_array(keys)
        idx = self._atom_index(keys[:, None], points)
        # Atom 0 is the +1 sign by construction of SharedSign.table.
        return 1.0 - 2.0 * idx


class FiniteIIDModel(_ModelBase):
    """General finite-support i.i.d. law: explicit weight vectors and probabilities."""

    def __init__(self, support, probs, seed: int, face=None):
        support = np.asarray(support, dtype=np.float64)
        probs = np.asarray(probs, dtype=np.float64)
        if support.ndim != 2 or support.shape[1] % 2 != 0:
            raise ModelValidationError("support must be a (k, 2d) array of weight vectors")
        d = support.shape[1] // 2
        if probs.shape != (support.shape[0],) or np.any(probs <= 0):
            raise ModelValidationError("support probabilities must be positive, one per vector")
        if abs(float(probs.sum()) - 1.0) > WEIGHT_TOL:
            raise ModelValidationError("support probabilities must sum to 1")
        if np.any(support <= 0):
            raise ModelValidationError(
                "support weight vectors must be strictly positive (uniform ellipticity)"
            )
        sums = support.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > WEIGHT_TOL):
            raise ModelValidationError("every support weight vector must sum to 1")
        face_t = _check_face(face, d)
        perm = _face_index_map(face_t)
        self._finish_init(d, seed, face_t, support[:, perm], probs)


def _check_xi_membership(vectors: np.ndarray, probs: np.ndarray, alpha: np.ndarray) -> None:
    """Admissibility of a disorder law for a given base vector.

    Per support vector r: sum_e r(e) alpha(e) = 0 (weights stay normalized)
    and sup_e |r(e)| = 1 (unit disorder scale); across the law: componentwise
    mean zero.  All at 1e-12 absolute.
    """
    dots = vectors @ alpha
    if np.any(np.abs(dots) > WEIGHT_TOL):
        bad = int(np.argmax(np.abs(dots)))
        raise ModelValidationError(
            "disorder vector is not admissible for this alpha: "
            f"sum_e r(e) alpha(e) = {dots[bad]!r} for vector {vectors[bad].tolist()} "
            "(must be 0 so weights stay normalized; for SharedSign this means "
            "the positive steps must carry alpha-mass exactly 1/2)"
        )
    sups = np.abs(vectors).max(axis=1)
    if np.any(np.abs(sups - 1.0) > WEIGHT_TOL):
        bad = int(np.argmax(np.abs(sups - 1.0)))
        raise ModelValidationError(
            f"disorder vectors must have sup-norm exactly 1, got {sups[bad]!r}"
        )
    mean = probs @ vectors
    if np.any(np.abs(mean) > WEIGHT_TOL):
        raise ModelValidationError(
            f"disorder law must have componentwise mean zero, got {mean.tolist()}"
        )


def _stats_from_atoms(weights: np.ndarray, probs: np.ndarray) -> DisorderStats:
    d = weights.shape[1] // 2
    kappa = float(weights.min())
    if kappa <= 0:
        raise ModelValidationError("environment support contains non-positive weights")
    q = probs @ weights
    q_plus = q[:d].copy()
    c = float(q_plus.sum())
    s = weights[:, :d].sum(axis=1)  # positive-step mass per atom
    spread = float(np.abs(s - c).max())
    degenerate = spread <= DEGENERACY_TOL * max(c, 1.0)
    if degenerate:
        sigma2 = 0.0
        smc = 0.0
    else:
        sigma2 = float(probs @ (s / c - 1.0) ** 2)
        smc = float((probs @ s**2 - c * c) / c)
    wp = weights[:, :d]
    rho = (wp.T * probs) @ wp / np.outer(q_plus, q_plus)
    q.setflags(write=False)
    q_plus.setflags(write=False)
    rho.setflags(write=False)
    return DisorderStats(
        q=q,
        q_plus=q_plus,
        c=c,
        lam=float(np.log(c)),
        kappa=kappa,
        fluctuation_active=not degenerate,
        sigma2=sigma2,
        second_moment_const=smc,
        rho=rho,
        atom_weights=weights,
        atom_probs=probs,
    )


@dataclass(frozen=True, eq=False)
class PerturbedFamily:
    """A perturbed law with the disorder strength left free.

    model(epsilon, seed) instantiates a member; sweeps and estimators move
    epsilon while reusing the alpha/xi structure (and, with common noise,
    the same site signs).
    """

    alpha: np.ndarray
    xi: object = None
    face: tuple | None = None

    def __post_init__(self):
        alpha = _check_alpha(self.alpha)
        object.__setattr__(self, "alpha", alpha)
        if self.xi is None:
            object.__setattr__(self, "xi", SharedSign())

    @property
    def d(self) -> int:
        return self.alpha.size // 2

    def model(self, epsilon: float, seed: int) -> PerturbedModel:
        return PerturbedModel(self.alpha, epsilon, self.xi, seed, face=self.face)


@dataclass(frozen=True, eq=False)
class FiniteIIDFamily:
    """Adapter giving a fixed finite-support law the family interface.

    The law has no strength parameter, so `epsilon` must be passed as None.
    """

    support: np.ndarray
    probs: np.ndarray
    face: tuple | None = None

    @property
    def d(self) -> int:
        return np.asarray(self.support).shape[1] // 2

    def model(self, epsilon, seed: int) -> FiniteIIDModel:
        if epsilon is not None:
            raise ModelValidationError(
                "a fixed finite-support law has no epsilon; pass epsilon=None"
            )
        return FiniteIIDModel(self.support, self.probs, seed, face=self.face)


def uniform_alpha(d: int) -> np.ndarray:
    """The symmetric base vector: every one of the 2d steps gets mass 1/(2d)."""
    if d < 1:
        raise ModelValidationError(f"dimension must be >= 1, got {d}")
    return np.full(2 * d, 1.0 / (2 * d))
