"""Decision procedures for completeness of projection tuples.

A tuple (P_1, ..., P_n) in M_k(C) is complete when C^k is the (not
necessarily orthogonal) direct sum of the ranges.  The primary test is
that A = sum P_i is invertible and P_i A^{-1} P_j vanishes off the
diagonal; a quantitative version, sampled pencil invertibility and an
independent rank/span oracle are provided as cross-checks.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CertificationFailed,
    NotComplete,
    NotPSD,
    PencilSingular,
    ZeroWeight,
)
from .linalg import (
    DEFAULT_TOL,
    as_cmatrix,
    dagger,
    invertibility,
    opnorm,
    psd_power,
    spectral_info,
    span_projection,
)
from .model import IdempotentTuple, ProjectionTuple, range_basis

__all__ = [
    "Verdict",
    "CompletenessReport",
    "PencilEntry",
    "oracle_direct_sum",
    "is_complete",
    "is_complete_quantitative",
    "require_complete",
    "default_pencil_grid",
    "pencil_check",
    "split_projection",
    "weighted_sum_inverse",
]


class Verdict(enum.Enum):
    COMPLETE = "Complete"
    INCOMPLETE = "Incomplete"
    INDETERMINATE = "Indeterminate"
    NOT_APPLICABLE = "NotApplicable"

    def __str__(self):
        return self.value


@dataclass
class CompletenessReport:
    verdict: Verdict
    A: np.ndarray
    A_spectrum: object
    A_inv: np.ndarray = None
    offdiag_norms: np.ndarray = None
    threshold: float = float("nan")
    observed: float = float("nan")
    idempotents: IdempotentTuple = None
    orthogonalized: tuple = None
    criteria_log: list = field(default_factory=list)

    def log(self, name, passed, residual):
        self.criteria_log.append((name, passed, float(residual)))


def oracle_direct_sum(t: ProjectionTuple):
    """Brute-force completeness: compare rank sum with k, then check that the
    concatenated orthonormal range bases span C^k."""
    tol = t.tol
    ranks = []
    for p in t:
        info = spectral_info(p, tol)
        if info.ambiguous:
            return Verdict.INDETERMINATE
        ranks.append(info.rank)
    if sum(ranks) != t.k:
        return Verdict.INCOMPLETE
    basis = np.hstack([range_basis(p, tol) for p in t])
    _, rank, ambiguous = span_projection(basis, tol)
    if ambiguous:
        return Verdict.INDETERMINATE
    return Verdict.COMPLETE if rank == t.k else Verdict.INCOMPLETE


def _inverse_from_spectrum(a, tol):
    w, v = np.linalg.eigh(a)
    inv = (v / w) @ dagger(v)
    return 0.5 * (inv + dagger(inv))


def _base_report(t, tol):
    """Fill in A, its spectrum, A^{-1} and the |P_i A^{-1} P_j| table.

    Returns the report with verdict already set when A is singular or
    ambiguous, else with verdict None.
    """
    a = t.sum()
    spec = spectral_info(a, tol)
    rep = CompletenessReport(verdict=None, A=a, A_spectrum=spec)
    rep.log("A invertible (least eigenvalue)", spec.certified_invertible, spec.lambda_min)
    if spec.certified_singular:
        rep.verdict = Verdict.INCOMPLETE
        return rep
    if not spec.certified_invertible:
        rep.verdict = Verdict.INDETERMINATE
        return rep
    a_inv = _inverse_from_spectrum(a, tol)
    rep.A_inv = a_inv
    n = t.n
    table = np.zeros((n, n))
    for i in range(n):
        left = t[i] @ a_inv
        for j in range(n):
            table[i, j] = opnorm(left @ t[j])
    rep.offdiag_norms = table
    off = table[~np.eye(n, dtype=bool)]
    rep.observed = float(off.max())
    rep.threshold = 1.0 / ((n - 1) * opnorm(a_inv) * opnorm(a) ** 2)
    return rep


def _attach_certificates(t, rep, tol):
    a_inv = rep.A_inv
    # E_i = A^{-1} P_i satisfies E_i P_i = E_i and P_i E_i = P_i
    es = tuple(a_inv @ p for p in t)
    rep.idempotents = IdempotentTuple(es, complete_system=True)
    root = psd_power(rep.A, -0.5, tol=tol)
    qs = []
    for p in t:
        q = root @ p @ root
        qs.append(0.5 * (q + dagger(q)))
    rep.orthogonalized = tuple(qs)
    diag = max(opnorm(p @ a_inv @ p - p) for p in t)
    rep.log("P_i A^-1 P_i = P_i", tol.small(diag), diag)
    total = opnorm(sum(es) - np.eye(t.k))
    rep.log("sum E_i = 1", tol.small(total), total)


def is_complete(t: ProjectionTuple, tol=None):
    """Primary completeness test: A invertible and P_i A^{-1} P_j = 0 for i != j.

    Complete when every off-diagonal norm is at most ``residual_atol``,
    Incomplete when A is certified singular or some norm reaches
    ``margin_factor * residual_atol``, Indeterminate in between.
    """
    tol = tol or t.tol
    rep = _base_report(t, tol)
    if rep.verdict is not None:
        return rep
    obs = rep.observed
    rep.log("P_i A^-1 P_j = 0 (i != j)", tol.small(obs), obs)
    if obs <= tol.residual_atol:
        rep.verdict = Verdict.COMPLETE
        _attach_certificates(t, rep, tol)
    elif obs >= tol.margin_factor * tol.residual_atol:
        rep.verdict = Verdict.INCOMPLETE
    else:
        rep.verdict = Verdict.INDETERMINATE
    return rep


def is_complete_quantitative(t: ProjectionTuple, tol=None):
    """Completeness from the strict bound
    ``max |P_i A^{-1} P_j| < [(n-1) |A^{-1}| |A|^2]^{-1}``.

    Values within ``margin_factor * residual_atol`` of the threshold are
    Indeterminate.
    """
    tol = tol or t.tol
    rep = _base_report(t, tol)
    if rep.verdict is not None:
        return rep
    band = tol.margin_factor * tol.residual_atol
    gap = rep.threshold - rep.observed
    rep.log("max |P_i A^-1 P_j| < threshold", gap > band, gap)
    if gap > band:
        rep.verdict = Verdict.COMPLETE
        _attach_certificates(t, rep, tol)
    elif gap < -band:
        rep.verdict = Verdict.INCOMPLETE
    else:
        rep.verdict = Verdict.INDETERMINATE
    return rep


def require_complete(t: ProjectionTuple, tol=None):
    """Return the :func:`is_complete` report or raise :class:`NotComplete`."""
    rep = is_complete(t, tol)
    if rep.verdict is not Verdict.COMPLETE:
        raise NotComplete(f"tuple is not certified complete (verdict {rep.verdict})")
    return rep


def default_pencil_grid(n):
    return [1 - n, (1 - n) / 2, -1.0, -0.5, -0.1, 0.1, 0.5, 1.0, 2.0, float(n), 1j, -1j]


@dataclass(frozen=True)
class PencilEntry:
    index: int
    lam: complex
    form: str
    sigma_min: float
    invertible: object  # True, False, or None when ambiguous


def pencil_check(t: ProjectionTuple, lambdas=None, tol=None):
    """Sampled invertibility of the two pencils

    * ``sum_{j != i} P_j + lam * P_i``  (form ``"others+lam*Pi"``)
    * ``lam * sum_{j != i} P_j + P_i``  (form ``"lam*others+Pi"``)

    for every index i (0-based) and every lam.  The default grid is the
    real grid ``1-n, (1-n)/2, -1, -0.5, -0.1, 0.1, 0.5, 1, 2, n`` plus
    ``+-1j``.
    """
    tol = tol or t.tol
    lambdas = default_pencil_grid(t.n) if lambdas is None else list(lambdas)
    if any(lam == 0 for lam in lambdas):
        raise ZeroWeight("pencil parameters must be nonzero")
    total = t.sum()
    out = []
    for i, p in enumerate(t):
        others = total - p
        for lam in lambdas:
            for form, m in (("others+lam*Pi", others + lam * p), ("lam*others+Pi", lam * others + p)):
                ok, smin = invertibility(m, tol)
                out.append(PencilEntry(i, lam, form, smin, ok))
    return out


_SPLIT_GRID = (-10.0, -2.0, -1.0, -0.5, -0.1, 0.1, 0.5, 1.0, 2.0, 10.0)


def split_projection(b, c, tol=DEFAULT_TOL):
    """Projection P with b = D^{1/2} P D^{1/2}, c = D^{1/2} (1-P) D^{1/2}, D = b + c.

    Requires that ``lam * b + c`` be invertible for real nonzero lam; this
    is sampled on a fixed grid and then confirmed by checking that
    ``D^{-1/2} b D^{-1/2}`` really is a projection.
    """
    b = as_cmatrix(b, "b")
    c = as_cmatrix(c, "c")
    for name, m in (("b", b), ("c", c)):
        info = spectral_info(m, tol)
        if info.lambda_min < -info.cutoff_used:
            raise NotPSD(f"{name} is not positive semidefinite")
        if info.rank == 0:
            raise NotPSD(f"{name} is zero")
    d = b + c
    ok, smin = invertibility(d, tol)
    if ok is not True:
        raise PencilSingular(f"b + c is not certified invertible (sigma_min={smin:.3e})")
    for lam in _SPLIT_GRID:
        ok, smin = invertibility(lam * b + c, tol)
        if ok is not True:
            raise PencilSingular(f"lam*b + c not invertible at lam={lam} (sigma_min={smin:.3e})")
    scale = opnorm(d)
    root = psd_power(d, 0.5, tol=tol)
    inv_root = psd_power(d, -0.5, tol=tol)
    p = inv_root @ b @ inv_root
    p = 0.5 * (p + dagger(p))
    idem = opnorm(p @ p - p)
    if not tol.small(idem, opnorm(inv_root) ** 2 * scale):
        raise PencilSingular(f"D^-1/2 b D^-1/2 is not a projection (|P^2-P|={idem:.3e})")
    one = np.eye(b.shape[0])
    rb = opnorm(root @ p @ root - b)
    rc = opnorm(root @ (one - p) @ root - c)
    if not (tol.small(rb, scale) and tol.small(rc, scale)):
        raise CertificationFailed(f"factorization residuals {rb:.3e}, {rc:.3e}")
    return p


def weighted_sum_inverse(t: ProjectionTuple, lambdas, report=None):
    """``(sum lam_i P_i)^{-1} = A^{-1} (sum lam_i^{-1} P_i) A^{-1}`` for a complete tuple."""
    lambdas = np.asarray(lambdas, dtype=np.complex128)
    if lambdas.shape != (t.n,):
        raise ValueError(f"need {t.n} weights, got {lambdas.shape}")
    if np.any(lambdas == 0):
        raise ZeroWeight("weights must be nonzero")
    rep = report or require_complete(t)
    if rep.verdict is not Verdict.COMPLETE:
        raise NotComplete("tuple is not certified complete")
    a_inv = rep.A_inv
    m = sum(lam * p for lam, p in zip(lambdas, t))
    inner = sum(p / lam for lam, p in zip(lambdas, t))
    x = a_inv @ inner @ a_inv
    one = np.eye(t.k)
    res = max(opnorm(m @ x - one), opnorm(x @ m - one))
    if not t.tol.small(res, opnorm(m) * opnorm(x)):
        raise CertificationFailed(f"weighted-sum inverse residual {res:.3e}")
    return x
