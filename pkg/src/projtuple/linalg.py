"""Dense complex linear algebra primitives.

Everything here works on plain ``numpy.ndarray`` values of dtype
``complex128``.  Hermitian eigenproblems go through LAPACK
(``numpy.linalg.eigh``); the contracts below are residual-based, so the
backend only has to be accurate, not of any particular algorithm.

Rank decisions follow a three-band policy.  With
``cutoff = rank_rel * max(1, |a|)``:

* eigenvalues ``<= cutoff`` count as zero,
* eigenvalues ``> margin_factor * cutoff`` count as nonzero,
* anything in between is ambiguous, and rank-sensitive operations refuse
  to guess (:class:`~projtuple.errors.GapTooSmall`).
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, GapTooSmall, NonFinite, NotHermitian, NotPSD

__all__ = [
    "TolerancePolicy",
    "DEFAULT_TOL",
    "SpectralInfo",
    "as_cmatrix",
    "opnorm",
    "herm_eig",
    "herm_fn",
    "psd_power",
    "pinv",
    "spectral_info",
    "invertibility",
    "span_projection",
    "dagger",
]


@dataclass(frozen=True)
class TolerancePolicy:
    """Numerical thresholds shared by every decision procedure.

    Parameters
    ----------
    rank_rel : float
        Relative rank cutoff, applied to ``max(1, |a|)``.
    residual_atol : float
        Absolute tolerance for algebraic identities such as ``P^2 = P``.
    margin_factor : float
        Width of the ambiguous band, as a multiple of the cutoff (or of
        ``residual_atol`` for residual-based verdicts).
    """

    rank_rel: float = 1e-10
    residual_atol: float = 1e-9
    margin_factor: float = 10.0

    def __post_init__(self):
        for name in ("rank_rel", "residual_atol", "margin_factor"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
        if self.rank_rel >= 1:
            raise ValueError("rank_rel must be < 1")

    def cutoff(self, scale):
        return self.rank_rel * max(1.0, float(scale))

    def small(self, residual, scale=1.0):
        """``residual <= residual_atol * max(1, scale)``."""
        return residual <= self.residual_atol * max(1.0, float(scale))

    def replace(self, **changes):
        fields = {
            "rank_rel": self.rank_rel,
            "residual_atol": self.residual_atol,
            "margin_factor": self.margin_factor,
        }
        fields.update({k: v for k, v in changes.items() if v is not None})
        return TolerancePolicy(**fields)


DEFAULT_TOL = TolerancePolicy()


@dataclass(frozen=True)
class SpectralInfo:
    """Spectrum summary of a Hermitian (normally positive) matrix.

    ``beta`` is the least eigenvalue above the cutoff (0 when there is
    none); for a positive element it is the least nonzero spectral point.
    ``ambiguous`` flags eigenvalues inside the band
    ``(cutoff, margin_factor * cutoff]``.
    """

    eigenvalues: np.ndarray
    rank: int
    beta: float
    zero_isolated: bool
    cutoff_used: float
    ambiguous: bool
    margin_factor: float

    @property
    def lambda_min(self):
        return float(self.eigenvalues[0])

    @property
    def lambda_max(self):
        return float(self.eigenvalues[-1])

    @property
    def certified_invertible(self):
        return self.lambda_min > self.margin_factor * self.cutoff_used

    @property
    def certified_singular(self):
        return self.lambda_min <= self.cutoff_used


def as_cmatrix(a, name="matrix"):
    """Coerce ``a`` to a 2-D complex128 array and reject NaN/Inf."""
    m = np.array(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFinite(f"{name} has non-finite entries")
    return m


def dagger(a):
    return a.conj().T


def opnorm(a):
    """Operator (spectral) norm: the largest singular value."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def _check_square(a):
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")


def herm_eig(a, tol=DEFAULT_TOL):
    """Eigendecomposition of a Hermitian matrix.

    Returns
    -------
    w : ndarray of float, ascending
    v : ndarray, unitary, columns are eigenvectors
    """
    a = as_cmatrix(a)
    _check_square(a)
    scale = max(1.0, opnorm(a))
    asym = opnorm(a - dagger(a))
    if asym > tol.residual_atol * scale:
        raise NotHermitian(f"|a - a*| = {asym:.3e} exceeds tolerance")
    w, v = np.linalg.eigh(0.5 * (a + dagger(a)))
    return w, v


def _check_gap(w, cutoff, tol):
    mag = np.abs(w)
    band = (mag > cutoff) & (mag <= tol.margin_factor * cutoff)
    if np.any(band):
        raise GapTooSmall(
            f"eigenvalue(s) {mag[band]} inside ambiguous band "
            f"({cutoff:.3e}, {tol.margin_factor * cutoff:.3e}]"
        )


def herm_fn(a, f, *, pseudo=False, tol=DEFAULT_TOL):
    """Apply the scalar function ``f`` to Hermitian ``a`` by spectral calculus.

    ``f`` receives the array of eigenvalues and must return an array of
    the same shape.  In ``pseudo`` mode eigenvalues with magnitude at or
    below the rank cutoff are mapped to 0 and ``f`` only sees the rest;
    the spectral gap must then be certified.
    """
    w, v = herm_eig(a, tol)
    if pseudo:
        cutoff = tol.cutoff(np.max(np.abs(w)) if w.size else 0.0)
        _check_gap(w, cutoff, tol)
        keep = np.abs(w) > cutoff
        vals = np.asarray(f(w[keep]))
        fw = np.zeros(w.shape, dtype=np.result_type(vals, np.float64))
        fw[keep] = vals
    else:
        with np.errstate(all="ignore"):
            fw = np.asarray(f(w))
    if not np.all(np.isfinite(fw)):
        raise DomainError(f"function undefined at eigenvalue(s) {w[~np.isfinite(fw)]}")
    out = (v * fw) @ dagger(v)
    if np.isrealobj(fw):
        out = 0.5 * (out + dagger(out))
    return out


def psd_power(a, p, *, pseudo=False, tol=DEFAULT_TOL):
    """Real power ``a**p`` of a positive semidefinite matrix.

    For ``p > 0`` tiny negative rounding eigenvalues are clipped to zero.
    For ``p < 0`` the matrix must be invertible unless ``pseudo`` is set.
    """
    w = np.linalg.eigvalsh(0.5 * (as_cmatrix(a) + dagger(as_cmatrix(a))))
    cutoff = tol.cutoff(np.max(np.abs(w)) if w.size else 0.0)
    if w.size and w[0] < -cutoff:
        raise NotPSD(f"least eigenvalue {w[0]:.3e} is negative")
    if p == 0:
        return np.eye(a.shape[0], dtype=np.complex128)

    def power(x):
        if p > 0:
            return np.maximum(x, 0.0) ** p
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(x > cutoff, np.abs(x) ** p, np.inf)

    return herm_fn(a, power, pseudo=pseudo, tol=tol)


def pinv(b, tol=DEFAULT_TOL):
    """Moore-Penrose inverse of a positive semidefinite matrix.

    Raises
    ------
    GapTooSmall
        If some eigenvalue sits in the ambiguous band, i.e. zero cannot
        be certified as an isolated spectral point.
    """
    w, v = herm_eig(b, tol)
    cutoff = tol.cutoff(np.max(np.abs(w)) if w.size else 0.0)
    if w.size and w[0] < -cutoff:
        raise NotPSD(f"least eigenvalue {w[0]:.3e} is negative")
    _check_gap(w, cutoff, tol)
    inv = np.zeros_like(w)
    keep = w > cutoff
    inv[keep] = 1.0 / w[keep]
    out = (v * inv) @ dagger(v)
    return 0.5 * (out + dagger(out))


def spectral_info(a, tol=DEFAULT_TOL):
    """Summarize the spectrum of Hermitian ``a`` under the rank policy.

    For a non-Hermitian ``C`` pass ``|C| = (C*C)^{1/2}`` instead; its
    ``beta`` is then the reduced minimum modulus of ``C``.
    """
    w, _ = herm_eig(a, tol)
    cutoff = tol.cutoff(np.max(np.abs(w)) if w.size else 0.0)
    above = w > cutoff
    rank = int(np.count_nonzero(above))
    beta = float(w[above].min()) if rank else 0.0
    has_zero = bool(np.any(w <= cutoff))
    ambiguous = bool(np.any(above & (w <= tol.margin_factor * cutoff)))
    w.setflags(write=False)
    return SpectralInfo(
        eigenvalues=w,
        rank=rank,
        beta=beta,
        zero_isolated=has_zero and beta > cutoff,
        cutoff_used=cutoff,
        ambiguous=ambiguous,
        margin_factor=tol.margin_factor,
    )


def invertibility(m, tol=DEFAULT_TOL):
    """Three-band invertibility test by the smallest singular value.

    Returns ``(verdict, sigma_min)`` where verdict is True (certified
    invertible), False (certified singular) or None (ambiguous).
    """
    s = np.linalg.svd(as_cmatrix(m), compute_uv=False)
    cutoff = tol.cutoff(s[0] if s.size else 0.0)
    smin = float(s[-1])
    if smin <= cutoff:
        return False, smin
    if smin > tol.margin_factor * cutoff:
        return True, smin
    return None, smin


def span_projection(basis, tol=DEFAULT_TOL):
    """Orthogonal projection onto the column span of ``basis``.

    Returns ``(proj, rank, ambiguous)``.  The rank is decided by singular
    values against ``rank_rel * max(1, |basis|)``.
    """
    basis = as_cmatrix(basis)
    k = basis.shape[0]
    if basis.shape[1] == 0:
        return np.zeros((k, k), dtype=np.complex128), 0, False
    u, s, _ = np.linalg.svd(basis, full_matrices=False)
    cutoff = tol.cutoff(s[0])
    rank = int(np.count_nonzero(s > cutoff))
    ambiguous = bool(np.any((s > cutoff) & (s <= tol.margin_factor * cutoff)))
    q = u[:, :rank]
    return q @ dagger(q), rank, ambiguous
