"""Quantitative perturbation results for projection and positive tuples.

Covers the spectral window of sum T_i^2 for nearly orthogonal positive
tuples, the near-identity completeness test, the 2(n-1)*delta
orthogonalization of nearly orthogonal projections, symmetric
orthonormalization of vector frames, and the completeness stability
radius.
"""

import math
from dataclasses import dataclass

import numpy as np

from .completeness import Verdict, require_complete
from .errors import CertificationFailed, DependentFrame, HypothesisViolated
from .linalg import DEFAULT_TOL, as_cmatrix, dagger, opnorm, pinv, psd_power, spectral_info, span_projection
from .model import PositiveTuple, max_pairwise_product, range_basis, validate_tuple

__all__ = [
    "PerturbationParams",
    "WindowReport",
    "VectorFrame",
    "make_frame",
    "spectral_window",
    "near_identity_test",
    "orthogonalize_nearby",
    "orthonormalize_frame",
    "orthogonalize_vectors_nearby",
    "stability_radius",
    "classical_constant",
]


@dataclass(frozen=True)
class PerturbationParams:
    """rho: lower bound on the least nonzero eigenvalues; eta: max |T_i T_j|;
    delta: window half-width parameter in [eta, rho^2/(n-1)); epsilon: target
    distance in (0, 1) for orthogonalization."""

    rho: float
    eta: float
    delta: float = None
    epsilon: float = None

    def validate(self, n):
        """Raise :class:`HypothesisViolated` unless the window hypotheses hold."""
        if not self.rho > 0:
            raise HypothesisViolated("rho > 0", self.rho, 0.0)
        limit = self.rho ** 2 / (n - 1)
        if not self.eta < limit:
            raise HypothesisViolated("eta < rho^2/(n-1)", self.eta, limit)
        delta = self.eta if self.delta is None else self.delta
        if delta < self.eta:
            raise HypothesisViolated("delta >= eta", delta, self.eta)
        if not delta < limit:
            raise HypothesisViolated("delta < rho^2/(n-1)", delta, limit)
        if self.epsilon is not None and not 0 < self.epsilon < 1:
            raise HypothesisViolated("0 < epsilon < 1", self.epsilon, 1.0)
        return delta


@dataclass
class WindowReport:
    n: int
    gamma: float
    rho: float
    eta: float
    delta: float
    window: tuple
    sound_window: tuple
    nonzero_eigenvalues: np.ndarray
    excursions: list
    sound_excursions: list
    zero_isolated: bool
    direct_sum: bool

    @property
    def ok(self):
        return not self.excursions and self.zero_isolated and self.direct_sum


def spectral_window(ts: PositiveTuple, params=None, edge_tol=1e-8):
    """Locate the nonzero spectrum of sum T_i^2 for a nearly orthogonal
    positive tuple.

    With gamma = min beta(T_i), rho in (0, gamma] and
    eta = max |T_i T_j| < rho^2/(n-1), every nonzero eigenvalue is at
    least ``rho^2 - (n-1) delta``.  ``window`` records the symmetric
    interval ``[rho^2 - (n-1) delta, rho^2 + (n-1) delta]``; its upper edge
    is only valid when every |T_i| <= rho (projections, for instance), so
    ``sound_window`` uses ``max |T_i|^2 + (n-1) delta`` instead.

    Without ``params`` the tightest admissible choice is used:
    rho = gamma and delta = measured eta.
    """
    tol = ts.tol
    n = ts.n
    mats = list(ts)
    gamma = min(spectral_info(t, tol).beta for t in mats)
    eta = max_pairwise_product(mats)
    if params is None:
        params = PerturbationParams(rho=gamma, eta=eta)
    else:
        if params.rho > gamma + tol.residual_atol:
            raise HypothesisViolated("rho <= gamma", params.rho, gamma)
        if eta > params.eta + tol.residual_atol:
            raise HypothesisViolated("measured eta <= declared eta", eta, params.eta)
    delta = params.validate(n)
    rho = params.rho
    spread = (n - 1) * delta
    lo, hi = rho ** 2 - spread, rho ** 2 + spread
    sound_hi = max(opnorm(t) for t in mats) ** 2 + spread

    sq = sum(t @ t for t in mats)
    info = spectral_info(0.5 * (sq + dagger(sq)), tol)
    nonzero = info.eigenvalues[info.eigenvalues > info.cutoff_used]
    excursions = [float(x) for x in nonzero if x < lo - edge_tol or x > hi + edge_tol]
    sound = [float(x) for x in nonzero if x < lo - edge_tol or x > sound_hi + edge_tol]

    s_info = spectral_info(sum(mats), tol)
    zero_isolated = s_info.rank == ts.k or (s_info.zero_isolated and not s_info.ambiguous)

    ranks = [spectral_info(t, tol).rank for t in mats]
    basis = np.hstack([range_basis(_support(t, tol), tol) for t in mats])
    _, span_rank, _ = span_projection(basis, tol)
    direct_sum = span_rank == sum(ranks) == s_info.rank

    return WindowReport(n, gamma, rho, eta, delta, (lo, hi), (lo, sound_hi),
                        nonzero, excursions, sound, zero_isolated, direct_sum)


def _support(t, tol):
    # range projection T T^+ of a positive matrix
    p = t @ pinv(t, tol)
    return 0.5 * (p + dagger(p))


def near_identity_test(t, tol=None):
    """One-sided test: |sum P_i - 1| < (n-1)^-2 implies completeness.

    Returns Complete, NotApplicable (hypothesis fails, nothing is proved),
    or Indeterminate at the boundary.
    """
    tol = tol or t.tol
    dist = opnorm(t.sum() - np.eye(t.k))
    bound = 1.0 / (t.n - 1) ** 2
    band = tol.margin_factor * tol.residual_atol
    if dist < bound - band:
        return Verdict.COMPLETE
    if dist >= bound + band:
        return Verdict.NOT_APPLICABLE
    return Verdict.INDETERMINATE


def classical_constant(n):
    """Constant 12^(n-1) n! of the inductive orthogonalization argument."""
    return 12 ** (n - 1) * math.factorial(n)


def orthogonalize_nearby(t, epsilon):
    """Mutually orthogonal projections P_i' = (A^+)^{1/2} P_i (A^+)^{1/2}
    with |P_i - P_i'| < epsilon, given max |P_i P_j| < epsilon / (2(n-1)).

    The result carries ``diagnostics`` entries ``eta``, ``delta_bound``,
    ``distances`` and ``max_distance``.
    """
    if not 0 < epsilon < 1:
        raise HypothesisViolated("0 < epsilon < 1", epsilon, 1.0)
    tol = t.tol
    n = t.n
    eta = max_pairwise_product(t.mats)
    delta_bound = epsilon / (2 * (n - 1))
    if not eta < delta_bound:
        raise HypothesisViolated("max |P_i P_j| < epsilon/(2(n-1))", eta, delta_bound)
    root = psd_power(t.sum(), -0.5, pseudo=True, tol=tol)
    new = []
    for p in t:
        q = root @ p @ root
        new.append(0.5 * (q + dagger(q)))
    out = validate_tuple(new, tol)
    cross = max_pairwise_product(out.mats)
    if not tol.small(cross):
        raise CertificationFailed(f"outputs not mutually orthogonal: {cross:.3e}")
    dists = [opnorm(p - q) for p, q in zip(t, out)]
    if not max(dists) < epsilon:
        raise CertificationFailed(f"distance {max(dists):.3e} >= epsilon {epsilon}")
    out.diagnostics.update(eta=eta, delta_bound=delta_bound, distances=dists,
                           max_distance=max(dists), max_cross=cross)
    return out


@dataclass(frozen=True)
class VectorFrame:
    """n linearly independent unit vectors in C^k, stored as rows."""

    vectors: np.ndarray
    tol: object = DEFAULT_TOL

    @property
    def n(self):
        return self.vectors.shape[0]

    @property
    def k(self):
        return self.vectors.shape[1]


def make_frame(vectors, tol=DEFAULT_TOL):
    vecs = as_cmatrix(vectors, "vectors")
    n, k = vecs.shape
    if n > k:
        raise DependentFrame(f"{n} vectors in dimension {k} are dependent")
    norms = np.linalg.norm(vecs, axis=1)
    bad = np.abs(norms - 1.0) > tol.residual_atol
    if np.any(bad):
        raise ValueError(f"vectors {np.flatnonzero(bad).tolist()} are not unit vectors")
    _, rank, ambiguous = span_projection(vecs.T, tol)
    if rank < n or ambiguous:
        raise DependentFrame(f"frame spans only {rank} of {n} dimensions")
    vecs.setflags(write=False)
    return VectorFrame(vecs, tol)


def orthonormalize_frame(f: VectorFrame):
    """Positive invertible K with K alpha_i orthonormal.

    K is the inverse square root of the frame operator sum alpha_i alpha_i*
    on the span of the frame, plus the identity on its complement.

    Returns ``(K, gammas)`` with ``gammas[i] = K @ alpha_i``.
    """
    tol = f.tol
    x = f.vectors.T
    a0 = x @ dagger(x)
    root = psd_power(a0, -0.5, pseudo=True, tol=tol)
    support = pinv(a0, tol) @ a0
    k_op = root + (np.eye(f.k) - 0.5 * (support + dagger(support)))
    k_op = 0.5 * (k_op + dagger(k_op))
    gammas = (k_op @ x).T
    gram = gammas.conj() @ gammas.T
    res = opnorm(gram - np.eye(f.n))
    if not tol.small(res, opnorm(k_op) ** 2):
        raise CertificationFailed(f"orthonormality residual {res:.3e}")
    return k_op, gammas


def orthogonalize_vectors_nearby(f: VectorFrame, epsilon):
    """Orthonormal beta_i with |alpha_i - beta_i| < 2 epsilon, given
    max |<alpha_i, alpha_j>| < epsilon / (2(n-1))."""
    n = f.n
    if n < 2:
        raise ValueError("need at least two vectors")
    gram = f.vectors.conj() @ f.vectors.T
    off = np.abs(gram - np.diag(np.diag(gram))).max()
    bound = epsilon / (2 * (n - 1))
    if not off < bound:
        raise HypothesisViolated("max |<alpha_i, alpha_j>| < epsilon/(2(n-1))", off, bound)
    projs = [np.outer(a, a.conj()) for a in f.vectors]
    t = validate_tuple(projs, f.tol)
    new = orthogonalize_nearby(t, epsilon)
    betas = np.array([p @ a for p, a in zip(new, f.vectors)])
    betas /= np.linalg.norm(betas, axis=1, keepdims=True)
    res = opnorm(betas.conj() @ betas.T - np.eye(n))
    if not f.tol.small(res):
        raise CertificationFailed(f"orthonormality residual {res:.3e}")
    dist = np.linalg.norm(f.vectors - betas, axis=1)
    if not dist.max() < 2 * epsilon:
        raise CertificationFailed(f"distance {dist.max():.3e} >= 2*epsilon")
    return betas


def stability_radius(t, report=None):
    """r = [4 n^2 (n-1) |A^-1|^2 (n |A^-1| + 1)]^-1; every tuple within r of a
    complete tuple (componentwise) is complete."""
    rep = report or require_complete(t)
    n = t.n
    ainv = opnorm(rep.A_inv)
    return 1.0 / (4 * n ** 2 * (n - 1) * ainv ** 2 * (n * ainv + 1))
