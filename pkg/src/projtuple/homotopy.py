"""Equivalences, homotopies and components of complete projection tuples.

In M_k(C) Murray-von Neumann equivalence of tuples reduces to
componentwise rank equality, and two complete tuples lie in the same
path component exactly when their first n-1 traces agree.  Both the
general-linear and unitary groups of M_k(C) are connected, so no
component bookkeeping for invertibles is needed.
"""

from dataclasses import dataclass, field

import numpy as np

from .completeness import Verdict, is_complete, require_complete
from .errors import (
    CertificationFailed,
    DimensionMismatch,
    HypothesisViolated,
    NonIntegerTrace,
    NotEquivalent,
    NotPSD,
    PathBreakdown,
    ProjTupleError,
)
from .linalg import dagger, herm_eig, invertibility, opnorm, psd_power
from .model import range_basis, range_projection, validate_tuple

__all__ = [
    "EquivalenceWitness",
    "HomotopyPath",
    "retract",
    "homotopy_path",
    "conjugation_path",
    "mvn_equivalent",
    "equivalence_witness",
    "check_unitary_equivalence",
    "trace_vector",
    "same_component_matrix_algebra",
]


def _herm(m):
    return 0.5 * (m + dagger(m))


@dataclass
class EquivalenceWitness:
    partial_isometries: tuple
    W: np.ndarray
    D: np.ndarray
    residuals: dict = field(default_factory=dict)


@dataclass
class HomotopyPath:
    samples: list  # (t, ProjectionTuple)
    kind: str
    C: np.ndarray = None
    max_step: float = 0.0
    trace_drift: float = 0.0
    endpoint_residuals: dict = field(default_factory=dict)

    @property
    def tuples(self):
        return [s for _, s in self.samples]


def retract(t, report=None):
    """Orthogonal system Q_i = A^{-1/2} P_i A^{-1/2} attached to a complete tuple."""
    rep = report or require_complete(t)
    tol = t.tol
    qs = [_herm(q) for q in rep.orthogonalized]
    out = validate_tuple(qs, tol)
    cross = max(opnorm(qs[i] @ qs[j]) for i in range(t.n) for j in range(t.n) if i != j)
    total = opnorm(sum(qs) - np.eye(t.k))
    if not (tol.small(cross) and tol.small(total)) or out.ranks != t.ranks:
        raise PathBreakdown(1.0, f"retraction not orthogonal (cross={cross:.3e}, sum={total:.3e})")
    out.diagnostics.update(max_cross=cross, sum_residual=total)
    return out


def _sample_grid(num_samples):
    if num_samples < 2:
        raise ValueError("need at least 2 samples")
    return np.linspace(0.0, 1.0, num_samples)


def _certify_samples(samples, tol, max_step):
    prev = None
    steps = [0.0]
    traces = []
    for tval, tup in samples:
        rep = is_complete(tup)
        if rep.verdict is not Verdict.COMPLETE:
            raise PathBreakdown(tval, f"sample verdict {rep.verdict}")
        traces.append([np.trace(p).real for p in tup])
        if prev is not None:
            steps.append(max(opnorm(a - b) for a, b in zip(prev, tup)))
        prev = tup
    step = max(steps)
    if max_step is not None and step >= max_step:
        raise PathBreakdown(float("nan"), f"consecutive step {step:.3e} exceeds {max_step}")
    traces = np.array(traces)
    drift = float(np.max(traces.max(axis=0) - traces.min(axis=0)))
    return step, drift


def _power_pair(a, s, tol):
    w, v = herm_eig(a, tol)
    if w[0] <= 0:
        raise NotPSD("matrix is not positive definite")
    plus = _herm((v * w ** s) @ dagger(v))
    minus = _herm((v * w ** -s) @ dagger(v))
    return plus, minus


def homotopy_path(t, num_samples=11, max_step=None, report=None):
    """Sample the deformation of a complete tuple onto its retraction.

    Each component at time s is the range projection of the idempotent
    ``A^{-s/2} P_i A^{s/2}``, computed as
    ``X (X + X* - 1)^{-1}`` with ``X = A^{-s/2} P_i A^{s/2}``.
    """
    rep = report or require_complete(t)
    tol = t.tol
    a = rep.A
    samples = []
    for s in _sample_grid(num_samples):
        plus, minus = _power_pair(a, s / 2, tol)
        comps = []
        for p in t:
            x = minus @ p @ plus
            try:
                comps.append(range_projection(x, tol))
            except ProjTupleError as exc:
                raise PathBreakdown(s, str(exc)) from None
        try:
            samples.append((float(s), validate_tuple(comps, tol)))
        except ProjTupleError as exc:
            raise PathBreakdown(s, str(exc)) from None
    step, drift = _certify_samples(samples, tol, max_step)
    target = retract(t, rep)
    start_res = max(opnorm(x - y) for x, y in zip(samples[0][1], t))
    end_res = max(opnorm(x - y) for x, y in zip(samples[-1][1], target))
    if not (tol.small(start_res) and tol.small(end_res)):
        raise PathBreakdown(1.0, f"endpoint mismatch ({start_res:.3e}, {end_res:.3e})")
    return HomotopyPath(samples, "retraction", None, step, drift,
                        {"start": start_res, "end": end_res})


def conjugation_path(t, c, num_samples=11, max_step=None, report=None):
    """Path from ``t`` to ``(C P_1 C, ..., C P_n C)`` for positive invertible C
    with ``P_i C^2 P_i = P_i``.

    The component at time s is the range projection of ``C^s P_i C^{-s}``.
    """
    rep = report or require_complete(t)
    tol = t.tol
    c = _herm(np.asarray(c, dtype=np.complex128))
    ok, _ = invertibility(c, tol)
    if ok is not True or np.linalg.eigvalsh(c)[0] <= 0:
        raise HypothesisViolated("C positive invertible", float(np.linalg.eigvalsh(c)[0]), 0.0)
    c2 = c @ c
    scale = opnorm(c2)
    for i, p in enumerate(t):
        res = opnorm(p @ c2 @ p - p)
        if not tol.small(res, scale):
            raise HypothesisViolated(f"P_{i + 1} C^2 P_{i + 1} = P_{i + 1}", res, tol.residual_atol * max(1, scale))
    samples = []
    for s in _sample_grid(num_samples):
        plus, minus = _power_pair(c, s, tol)
        comps = []
        for p in t:
            try:
                comps.append(range_projection(plus @ p @ minus, tol))
            except ProjTupleError as exc:
                raise PathBreakdown(s, str(exc)) from None
        try:
            samples.append((float(s), validate_tuple(comps, tol)))
        except ProjTupleError as exc:
            raise PathBreakdown(s, str(exc)) from None
    step, drift = _certify_samples(samples, tol, max_step)
    ends = [_herm(c @ p @ c) for p in t]
    try:
        validate_tuple(ends, tol)
    except ProjTupleError as exc:
        raise PathBreakdown(1.0, f"C P_i C is not a projection: {exc}") from None
    start_res = max(opnorm(x - y) for x, y in zip(samples[0][1], t))
    end_res = max(opnorm(x - y) for x, y in zip(samples[-1][1], ends))
    if not (tol.small(start_res) and tol.small(end_res, scale)):
        raise PathBreakdown(1.0, f"endpoint mismatch ({start_res:.3e}, {end_res:.3e})")
    return HomotopyPath(samples, "conjugation", c, step, drift,
                        {"start": start_res, "end": end_res})


def _check_pair(t, t2):
    if t.k != t2.k or t.n != t2.n:
        raise DimensionMismatch(f"tuples differ in shape: (k={t.k}, n={t.n}) vs (k={t2.k}, n={t2.n})")


def mvn_equivalent(t, t2):
    """Componentwise rank equality of two complete tuples."""
    _check_pair(t, t2)
    require_complete(t)
    require_complete(t2)
    return t.ranks == t2.ranks


def equivalence_witness(t, t2, reports=(None, None)):
    """Partial isometries U_i, unitary W and invertible D with
    ``D* P_i D = P_i'`` and ``P_i D D* P_i = P_i``.

    U_i pairs orthonormal eigenbases of P_i and P_i' in ascending
    eigenvalue order; W = A^{-1/2} (sum P_i U_i* P_i') A'^{-1/2} and
    D = A^{-1/2} W A'^{1/2}.
    """
    _check_pair(t, t2)
    rep = reports[0] or require_complete(t)
    rep2 = reports[1] or require_complete(t2)
    if t.ranks != t2.ranks:
        raise NotEquivalent(f"rank vectors differ: {t.ranks} vs {t2.ranks}")
    tol = t.tol
    us = []
    for p, q in zip(t, t2):
        us.append(range_basis(q, tol) @ dagger(range_basis(p, tol)))
    a_half_inv = psd_power(rep.A, -0.5, tol=tol)
    a2_half_inv = psd_power(rep2.A, -0.5, tol=tol)
    a2_half = psd_power(rep2.A, 0.5, tol=tol)
    middle = sum(p @ dagger(u) @ q for p, u, q in zip(t, us, t2))
    w = a_half_inv @ middle @ a2_half_inv
    d = a_half_inv @ w @ a2_half
    one = np.eye(t.k)
    residuals = {
        "U*U - P": max(opnorm(dagger(u) @ u - p) for u, p in zip(us, t)),
        "UU* - P'": max(opnorm(u @ dagger(u) - q) for u, q in zip(us, t2)),
        "W*W - 1": opnorm(dagger(w) @ w - one),
        "D*PD - P'": max(opnorm(dagger(d) @ p @ d - q) for p, q in zip(t, t2)),
        "PDD*P - P": max(opnorm(p @ d @ dagger(d) @ p - p) for p in t),
    }
    scale = opnorm(d) ** 2
    worst = max(residuals.values())
    if not tol.small(worst, scale):
        raise CertificationFailed(f"witness residual {worst:.3e}")
    return EquivalenceWitness(tuple(us), w, d, residuals)


def check_unitary_equivalence(t, t2, u, tol=None):
    """Verify a supplied unitary: U U* = 1 and U P_i U* = P_i' for all i."""
    _check_pair(t, t2)
    tol = tol or t.tol
    u = np.asarray(u, dtype=np.complex128)
    if not tol.small(opnorm(dagger(u) @ u - np.eye(t.k))):
        return False
    return all(tol.small(opnorm(u @ p @ dagger(u) - q)) for p, q in zip(t, t2))


def trace_vector(t, atol=1e-6):
    """Integer traces (Tr P_1, ..., Tr P_{n-1})."""
    out = []
    for i, p in enumerate(t.mats[:-1]):
        tr = np.trace(p).real
        r = round(tr)
        if abs(tr - r) > atol:
            raise NonIntegerTrace(f"trace of P_{i + 1} is {tr!r}")
        out.append(int(r))
    return tuple(out)


def same_component_matrix_algebra(t, t2):
    """Complete tuples in M_k(C) share a path component iff their first n-1
    traces coincide."""
    _check_pair(t, t2)
    require_complete(t)
    require_complete(t2)
    return trace_vector(t) == trace_vector(t2)
