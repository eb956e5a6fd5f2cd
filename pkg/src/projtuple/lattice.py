"""Joins of sub-tuples of a complete projection tuple.

For a complete tuple with A = sum P_i and Q_i = A^{-1/2} P_i A^{-1/2},
the join of the selected projections is computed three ways:

* definitional: A_0^+ A_0 with A_0 the sum of the selected P_i,
* conjugated corner inverse: A^{1/2} (Q_0 A Q_0)^+ A^{1/2}, Q_0 = sum Q_i,
* rational form: A_0 (A_0^2 + sum of the unselected P_j)^{-1} A_0,

and compared against the orthogonal projection onto the span of the
selected ranges.  Indices are 1-based.
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .completeness import require_complete
from .errors import CertificationFailed, EmptyIndices
from .linalg import dagger, opnorm, pinv, psd_power, span_projection
from .model import range_basis

__all__ = ["JoinResult", "join", "join_minimality_check", "normalize_indices"]


@dataclass
class JoinResult:
    indices: tuple
    join: np.ndarray
    via_formula_b: np.ndarray
    via_formula_c: np.ndarray
    oracle: np.ndarray
    residuals: dict

    @property
    def max_residual(self):
        return max(self.residuals.values()) if self.residuals else 0.0


def normalize_indices(indices, n):
    idx = sorted({int(i) for i in indices})
    if not idx:
        raise EmptyIndices("index set is empty")
    if idx[0] < 1 or idx[-1] > n:
        raise IndexError(f"indices must lie in 1..{n}, got {idx}")
    return tuple(idx)


def _herm(m):
    return 0.5 * (m + dagger(m))


def join(t, indices, report=None):
    """Join of ``P_i`` for the given 1-based ``indices`` of a complete tuple."""
    rep = report or require_complete(t)
    tol = t.tol
    idx = normalize_indices(indices, t.n)
    chosen = [t[i - 1] for i in idx]
    rest = [t[i - 1] for i in range(1, t.n + 1) if i not in idx]
    k = t.k
    one = np.eye(k, dtype=np.complex128)

    a0 = sum(chosen[1:], chosen[0].copy())
    definitional = _herm(pinv(a0, tol) @ a0)

    a = rep.A
    root = psd_power(a, 0.5, tol=tol)
    q0 = sum(rep.orthogonalized[i - 1] for i in idx)
    formula_b = _herm(root @ pinv(_herm(q0 @ a @ q0), tol) @ root)

    if rest:
        b0 = sum(rest[1:], rest[0].copy())
        formula_c = _herm(a0 @ np.linalg.solve(a0 @ a0 + b0, a0))
    else:
        formula_c = one.copy()

    basis = np.hstack([range_basis(p, tol) for p in chosen])
    oracle, _, _ = span_projection(basis, tol)

    forms = {"definitional": definitional, "formula_b": formula_b,
             "formula_c": formula_c, "oracle": oracle}
    residuals = {f"{x}-{y}": opnorm(forms[x] - forms[y]) for x, y in combinations(forms, 2)}
    result = JoinResult(idx, definitional, formula_b, formula_c, oracle, residuals)
    cond = opnorm(a) * opnorm(rep.A_inv)
    if not tol.small(result.max_residual, cond):
        raise CertificationFailed(f"join formulas disagree by {result.max_residual:.3e}")
    return result


def join_minimality_check(t, indices, report=None):
    """True when the join dominates every selected P_i and coincides with the
    independently built span projection (which is the least upper bound)."""
    res = join(t, indices, report)
    tol = t.tol
    j = res.join
    dominates = all(tol.small(opnorm(j @ t[i - 1] - t[i - 1])) for i in res.indices)
    return dominates and tol.small(opnorm(res.oracle - j))
