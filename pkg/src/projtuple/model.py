"""Projection tuples, positive tuples, idempotents and random generators."""

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import (
    BadRanks,
    DimensionMismatch,
    NotHermitian,
    NotIdempotent,
    NotProjection,
    NotPSD,
    GapTooSmall,
    TrivialProjection,
)
from .linalg import (
    DEFAULT_TOL,
    as_cmatrix,
    dagger,
    herm_eig,
    opnorm,
    spectral_info,
)

__all__ = [
    "ProjectionTuple",
    "PositiveTuple",
    "IdempotentTuple",
    "validate_tuple",
    "validate_positive_tuple",
    "range_projection",
    "range_basis",
    "max_pairwise_product",
    "tuple_from_transform",
    "gen_complete",
    "gen_random",
    "gen_degenerate",
    "gen_near_orthogonal",
    "gen_positive",
    "random_unitary",
]

MAX_COND = 100.0


def _freeze(mats):
    out = []
    for m in mats:
        m = np.array(m, dtype=np.complex128)
        m.setflags(write=False)
        out.append(m)
    return tuple(out)


@dataclass(frozen=True)
class ProjectionTuple:
    """A validated n-tuple of non-trivial orthogonal projections in M_k(C).

    Build instances through :func:`validate_tuple`; the constructor does
    not check anything.
    """

    mats: tuple
    tol: object = DEFAULT_TOL
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def n(self):
        return len(self.mats)

    @property
    def k(self):
        return self.mats[0].shape[0]

    @property
    def ranks(self):
        return tuple(self.diagnostics["ranks"])

    def sum(self):
        return sum(self.mats[1:], self.mats[0].copy())

    def __getitem__(self, i):
        return self.mats[i]

    def __iter__(self):
        return iter(self.mats)

    def __len__(self):
        return len(self.mats)


@dataclass(frozen=True)
class PositiveTuple:
    """n positive semidefinite matrices, each with zero isolated in its spectrum."""

    mats: tuple
    tol: object = DEFAULT_TOL
    betas: tuple = ()

    @property
    def n(self):
        return len(self.mats)

    @property
    def k(self):
        return self.mats[0].shape[0]

    def __iter__(self):
        return iter(self.mats)


@dataclass(frozen=True)
class IdempotentTuple:
    """n idempotents; ``complete_system`` marks E_iE_j = 0 and sum E_i = 1."""

    mats: tuple
    complete_system: bool = False

    @property
    def n(self):
        return len(self.mats)

    def __iter__(self):
        return iter(self.mats)


def _square_stack(mats):
    mats = [as_cmatrix(m, name=f"matrix {i}") for i, m in enumerate(mats)]
    if not mats:
        raise DimensionMismatch("empty tuple")
    k = mats[0].shape[0]
    for i, m in enumerate(mats):
        if m.shape != (k, k):
            raise DimensionMismatch(f"matrix {i} has shape {m.shape}, expected {(k, k)}")
    return mats


def validate_tuple(mats, tol=DEFAULT_TOL):
    """Check that ``mats`` is an n-tuple (n >= 2) of non-trivial projections.

    Raises
    ------
    DimensionMismatch, NotProjection, TrivialProjection
    """
    mats = _square_stack(mats)
    k = mats[0].shape[0]
    ranks, idem, herm = [], [], []
    for i, p in enumerate(mats):
        r_idem = opnorm(p @ p - p)
        r_herm = opnorm(p - dagger(p))
        if r_idem > tol.residual_atol or r_herm > tol.residual_atol:
            raise NotProjection(i, r_idem, r_herm)
        rank = int(round(np.trace(p).real))
        if rank < 1 or rank > k - 1:
            raise TrivialProjection(i, rank)
        ranks.append(rank)
        idem.append(r_idem)
        herm.append(r_herm)
    if len(mats) < 2:
        raise DimensionMismatch(f"a tuple needs at least 2 projections, got {len(mats)}")
    diag = {"ranks": ranks, "idempotency": idem, "hermiticity": herm}
    return ProjectionTuple(_freeze(mats), tol, diag)


def validate_positive_tuple(mats, tol=DEFAULT_TOL):
    """Check Hermitian PSD matrices whose zero eigenvalue (if any) is isolated."""
    mats = _square_stack(mats)
    betas = []
    for i, t in enumerate(mats):
        try:
            info = spectral_info(t, tol)
        except NotHermitian as exc:
            raise NotHermitian(f"matrix {i}: {exc}") from None
        if info.lambda_min < -info.cutoff_used:
            raise NotPSD(f"matrix {i} has eigenvalue {info.lambda_min:.3e}")
        if info.rank == 0:
            raise NotPSD(f"matrix {i} is zero")
        if info.ambiguous:
            raise GapTooSmall(f"matrix {i}: isolated zero cannot be certified")
        betas.append(info.beta)
    return PositiveTuple(_freeze(mats), tol, tuple(betas))


def range_projection(e, tol=DEFAULT_TOL):
    """Orthogonal projection onto the range of the idempotent ``e``.

    Uses ``R = e (e + e* - 1)^{-1}``, the unique projection with
    ``e R = R`` and ``R e = e``.
    """
    e = as_cmatrix(e)
    k = e.shape[0]
    res = opnorm(e @ e - e)
    if not tol.small(res, opnorm(e)):
        raise NotIdempotent(f"|e^2 - e| = {res:.3e}")
    s = e + dagger(e) - np.eye(k)
    r = np.linalg.solve(s.T, e.T).T
    return 0.5 * (r + dagger(r))


def range_basis(p, tol=DEFAULT_TOL):
    """Orthonormal basis (columns) of Ran(p) for a projection ``p``.

    Columns come in ascending eigenvalue order of ``p``.
    """
    w, v = herm_eig(p, tol)
    return v[:, w > 0.5]


def max_pairwise_product(mats):
    """max over i != j of |M_i M_j|."""
    mats = list(mats)
    best = 0.0
    for i, j in combinations(range(len(mats)), 2):
        # |M_i M_j| = |M_j M_i| for Hermitian factors
        best = max(best, opnorm(mats[i] @ mats[j]))
    return best


def _check_ranks(k, ranks, exact):
    ranks = [int(r) for r in ranks]
    if len(ranks) < 2:
        raise BadRanks("need at least two ranks")
    if any(r < 1 or r > k - 1 for r in ranks):
        raise BadRanks(f"each rank must lie in [1, {k - 1}], got {ranks}")
    total = sum(ranks)
    if exact and total != k:
        raise BadRanks(f"ranks {ranks} sum to {total}, expected {k}")
    if not exact and total > k:
        raise BadRanks(f"ranks {ranks} sum to {total} > {k}")
    return ranks


def _complex_gaussian(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def _conditioned_matrix(rng, k, max_cond=MAX_COND):
    while True:
        s = _complex_gaussian(rng, (k, k))
        if np.linalg.cond(s) < max_cond:
            return s


def _column_projection(cols):
    q, _ = np.linalg.qr(cols)
    p = q @ dagger(q)
    return 0.5 * (p + dagger(p))


def _block_projections(s, ranks):
    out, start = [], 0
    for r in ranks:
        out.append(_column_projection(s[:, start:start + r]))
        start += r
    return out


def tuple_from_transform(s, ranks, tol=DEFAULT_TOL):
    """Projections onto the images ``S(block_i)`` of consecutive coordinate blocks."""
    s = as_cmatrix(s)
    ranks = _check_ranks(s.shape[0], ranks, exact=False)
    return validate_tuple(_block_projections(s, ranks), tol)


def gen_complete(k, ranks, seed, tol=DEFAULT_TOL):
    """Random complete tuple: ranges are images of coordinate blocks under a
    random invertible S (complex Gaussian, redrawn until cond(S) < 100)."""
    ranks = _check_ranks(k, ranks, exact=True)
    rng = np.random.default_rng(seed)
    return tuple_from_transform(_conditioned_matrix(rng, k), ranks, tol)


def gen_random(k, ranks, seed, tol=DEFAULT_TOL):
    """Independent random subspaces of the given ranks (no sum constraint).

    Ranks summing to less than k give a singular sum; ranks summing to
    more than k give a tuple that cannot be complete.
    """
    ranks = [int(r) for r in ranks]
    if len(ranks) < 2 or any(r < 1 or r > k - 1 for r in ranks):
        raise BadRanks(f"each rank must lie in [1, {k - 1}], got {ranks}")
    rng = np.random.default_rng(seed)
    mats = [_column_projection(_complex_gaussian(rng, (k, r))) for r in ranks]
    return validate_tuple(mats, tol)


def gen_degenerate(k, ranks, seed, tol=DEFAULT_TOL):
    """Ranks summing to k whose ranges nevertheless fail to span C^k.

    One column of the second block repeats a column of the first block,
    so Ran(P_1) and Ran(P_2) intersect.
    """
    ranks = _check_ranks(k, ranks, exact=True)
    rng = np.random.default_rng(seed)
    s = _conditioned_matrix(rng, k)
    s[:, ranks[0]] = s[:, 0]
    return validate_tuple(_block_projections(s, ranks), tol)


def random_unitary(rng, k, angle):
    """exp(i * angle * h) with h random Hermitian of norm 1."""
    g = _complex_gaussian(rng, (k, k))
    h = 0.5 * (g + dagger(g))
    h /= opnorm(h)
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * angle * w)) @ dagger(v)


def gen_near_orthogonal(k, ranks, noise, seed, tol=DEFAULT_TOL):
    """Mutually orthogonal coordinate projections, each rotated by its own
    random unitary ``exp(i * noise * h)``.

    The achieved ``max |P_i P_j|`` is stored in ``diagnostics["eta"]``.
    """
    ranks = _check_ranks(k, ranks, exact=False)
    if noise < 0:
        raise ValueError("noise must be >= 0")
    rng = np.random.default_rng(seed)
    mats, start = [], 0
    for r in ranks:
        p0 = np.zeros((k, k), dtype=np.complex128)
        idx = np.arange(start, start + r)
        p0[idx, idx] = 1.0
        start += r
        if noise > 0:
            u = random_unitary(rng, k, noise)
            p0 = u @ p0 @ dagger(u)
            p0 = 0.5 * (p0 + dagger(p0))
        mats.append(p0)
    t = validate_tuple(mats, tol)
    t.diagnostics["eta"] = max_pairwise_product(t.mats)
    return t


def gen_positive(k, ranks, noise, seed, spread=(1.0, 1.0), tol=DEFAULT_TOL):
    """Positive tuple T_i = V_i diag(s) V_i* on near-orthogonal ranges.

    The nonzero eigenvalues of each T_i are drawn uniformly from
    ``spread``; ``spread=(1, 1)`` reproduces the projections of
    :func:`gen_near_orthogonal`.
    """
    base = gen_near_orthogonal(k, ranks, noise, seed, tol)
    rng = np.random.default_rng([seed, 1])
    lo, hi = spread
    mats = []
    for p in base:
        basis = range_basis(p, tol)
        s = rng.uniform(lo, hi, basis.shape[1])
        t = (basis * s) @ dagger(basis)
        mats.append(0.5 * (t + dagger(t)))
    return validate_positive_tuple(mats, tol)
