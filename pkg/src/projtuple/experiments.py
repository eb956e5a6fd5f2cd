"""Randomized experiments behind ``projtuple sweep`` and the acceptance suite.

Every experiment is a function ``(rng, k, n) -> Trial``.  ``k`` and
``n`` fix the dimensions when given; otherwise they are drawn at desk
scale.  A sweep runs trial ``i`` with ``np.random.default_rng(seed + i)``,
so results depend only on the master seed.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .completeness import Verdict, is_complete, is_complete_quantitative, oracle_direct_sum
from .errors import HypothesisViolated, ProjTupleError, UnknownExperiment
from .homotopy import equivalence_witness, homotopy_path, mvn_equivalent, retract, same_component_matrix_algebra
from .lattice import join
from .linalg import dagger, invertibility, opnorm, pinv
from .model import (
    gen_complete,
    gen_degenerate,
    gen_near_orthogonal,
    gen_positive,
    gen_random,
    validate_tuple,
)
from .perturbation import classical_constant, orthogonalize_nearby, spectral_window, stability_radius

__all__ = ["Trial", "SweepResult", "EXPERIMENTS", "run_sweep", "certificate_residuals"]

VERDICT_CODE = {Verdict.COMPLETE: 1, Verdict.INCOMPLETE: 0, Verdict.INDETERMINATE: -1}


@dataclass
class Trial:
    k: int
    n: int
    metrics: dict
    violation: bool = False
    skipped: bool = False


@dataclass
class SweepResult:
    experiment: str
    seed: int
    trials: list
    summary: dict = field(default_factory=dict)

    def rows(self):
        for i, tr in enumerate(self.trials):
            for name, value in tr.metrics.items():
                yield i, self.seed + i, tr.k, tr.n, name, value


def _seed(rng):
    return int(rng.integers(2 ** 31))


def _dims(rng, k, n, kmax, nmax, kmin=2):
    if n is None:
        n = int(rng.integers(2, nmax + 1))
    if k is None:
        k = int(rng.integers(max(kmin, n), max(kmax, n) + 1))
    if n < 2 or k < n:
        raise ValueError(f"need 2 <= n <= k, got k={k}, n={n}")
    return k, n


def _composition(rng, k, n):
    """n positive integers summing to k."""
    cuts = np.sort(rng.choice(np.arange(1, k), size=n - 1, replace=False))
    return np.diff(np.concatenate([[0], cuts, [k]])).tolist()


def _ranks_upto(rng, k, n):
    """n positive integers with sum at most k."""
    return _composition(rng, int(rng.integers(n, k + 1)), n)


def certificate_residuals(t, rep):
    """Residuals of the idempotent system attached to a Complete report."""
    es = list(rep.idempotents)
    one = np.eye(t.k)
    cross = max(opnorm(es[i] @ es[j]) for i in range(t.n) for j in range(t.n) if i != j)
    return {
        "PAinvP-P": max(opnorm(p @ rep.A_inv @ p - p) for p in t),
        "sumE-1": opnorm(sum(es) - one),
        "EiEj": cross,
        "EiPi-Ei": max(opnorm(e @ p - e) for e, p in zip(es, t)),
        "PiEi-Pi": max(opnorm(p @ e - p) for e, p in zip(es, t)),
    }


def _mixed_instance(rng, k, n, kinds=("complete", "near", "random", "degenerate")):
    kind = kinds[int(rng.integers(len(kinds)))]
    seed = _seed(rng)
    if kind == "complete":
        t = gen_complete(k, _composition(rng, k, n), seed)
    elif kind == "degenerate":
        t = gen_degenerate(k, _composition(rng, k, n), seed)
    elif kind == "near":
        t = gen_near_orthogonal(k, _ranks_upto(rng, k, n), float(rng.uniform(0.0, 0.6)), seed)
    else:
        t = gen_random(k, rng.integers(1, k, size=n).tolist(), seed)
    return kind, t


def exp_oracle_equivalence(rng, k=None, n=None):
    k, n = _dims(rng, k, n, 12, 5)
    kind, t = _mixed_instance(rng, k, n)
    primary = is_complete(t)
    quant = is_complete_quantitative(t)
    oracle = oracle_direct_sum(t)
    codes = [VERDICT_CODE[v] for v in (primary.verdict, quant.verdict, oracle)]
    decided = [c for c in codes if c >= 0]
    disagree = len(set(decided)) > 1
    metrics = {"is_complete": codes[0], "quantitative": codes[1], "oracle": codes[2],
               "disagree": int(disagree)}
    cert = 0.0
    for rep in (primary, quant):
        if rep.verdict is Verdict.COMPLETE:
            cert = max(cert, max(certificate_residuals(t, rep).values()))
    metrics["certificate_residual"] = cert
    return Trial(k, n, metrics, violation=disagree or cert > 1e-8, skipped=not decided)


def exp_buckholdtz(rng, k=None, n=None):
    k, _ = _dims(rng, k, 2, 12, 2)
    kind, t = _mixed_instance(rng, k, 2)
    verdict = is_complete(t).verdict
    inv, smin = invertibility(t[0] - t[1], t.tol)
    decided = verdict is not Verdict.INDETERMINATE and inv is not None
    match = (verdict is Verdict.COMPLETE) == bool(inv)
    metrics = {"verdict": VERDICT_CODE[verdict], "difference_invertible": -1 if inv is None else int(inv),
               "sigma_min": smin, "match": int(match)}
    return Trial(k, 2, metrics, violation=decided and not match, skipped=not decided)


def exp_weighted_inverse(rng, k=None, n=None):
    k, n = _dims(rng, k, n, 12, 5)
    t = gen_complete(k, _composition(rng, k, n), _seed(rng))
    rep = is_complete(t)
    mags = rng.uniform(0.2, 5.0, n) * rng.choice([-1, 1], n)
    lambdas = mags * np.exp(1j * rng.uniform(0, 2 * np.pi, n) * rng.integers(0, 2, n))
    m = sum(lam * p for lam, p in zip(lambdas, t))
    x = rep.A_inv @ sum(p / lam for lam, p in zip(lambdas, t)) @ rep.A_inv
    res = opnorm(m @ x - np.eye(k))
    return Trial(k, n, {"residual": res}, violation=not res <= 1e-7)


def exp_joins(rng, k=None, n=None):
    k, n = _dims(rng, k, n, 12, 5)
    t = gen_complete(k, _composition(rng, k, n), _seed(rng))
    size = int(rng.integers(1, n + 1))
    idx = sorted((rng.choice(n, size=size, replace=False) + 1).tolist())
    res = join(t, idx)
    rank = int(round(np.trace(res.join).real))
    additive = rank == sum(t.ranks[i - 1] for i in idx)
    metrics = {"subset_size": size, "max_residual": res.max_residual, "rank_additive": int(additive)}
    return Trial(k, n, metrics, violation=not (res.max_residual <= 1e-7 and additive))


def exp_orthogonalization_bound(rng, k=None, n=None):
    k, n = _dims(rng, k, n, 16, 6)
    ranks = _ranks_upto(rng, k, n)
    while True:
        noise = float(rng.uniform(0.002, 0.2)) / (n - 1)
        t = gen_near_orthogonal(k, ranks, noise, _seed(rng))
        eta = t.diagnostics["eta"]
        if 2 * (n - 1) * eta < 0.999:
            break
    bound = 2 * (n - 1) * eta
    epsilon = min(0.999, bound * float(rng.uniform(1.01, 2.0)))
    out = orthogonalize_nearby(t, epsilon)
    dist = out.diagnostics["max_distance"]
    classical = classical_constant(n) * eta
    # nonzero spectrum of A^+ must sit in [(1+(n-1)eta)^-1, (1-(n-1)eta)^-1]
    w = np.linalg.eigvalsh(pinv(t.sum(), t.tol))
    w = w[w > t.tol.cutoff(w.max())]
    lo, hi = 1 / (1 + (n - 1) * eta) - 1e-8, 1 / (1 - (n - 1) * eta) + 1e-8
    contained = bool(np.all((w >= lo) & (w <= hi)))
    metrics = {"eta": eta, "epsilon": epsilon, "max_distance": dist, "bound": bound,
               "ratio": dist / bound, "classical_ratio": dist / classical,
               "bound_over_classical": bound / classical, "max_cross": out.diagnostics["max_cross"],
               "pinv_spectrum_contained": int(contained)}
    bad = not (dist < bound and dist < classical and out.diagnostics["max_cross"] <= 1e-9 and contained)
    return Trial(k, n, metrics, violation=bad)


def _window_trial(rng, k, n, spread):
    k, n = _dims(rng, k, n, 12, 5)
    ranks = _ranks_upto(rng, k, n)
    while True:
        noise = float(rng.uniform(0.001, 0.08)) / (n - 1)
        ts = gen_positive(k, ranks, noise, _seed(rng), spread=spread)
        try:
            rep = spectral_window(ts)
        except HypothesisViolated:
            continue
        break
    nz = rep.nonzero_eigenvalues
    metrics = {"rho": rep.rho, "eta": rep.eta, "window_lo": rep.window[0], "window_hi": rep.window[1],
               "sound_hi": rep.sound_window[1], "eig_min": float(nz.min()), "eig_max": float(nz.max()),
               "excursions": len(rep.excursions), "sound_excursions": len(rep.sound_excursions),
               "zero_isolated": int(rep.zero_isolated), "direct_sum": int(rep.direct_sum)}
    bad = bool(rep.excursions) or not rep.zero_isolated or not rep.direct_sum
    return Trial(k, n, metrics, violation=bad)


def exp_spectral_window(rng, k=None, n=None):
    """General positive tuples: nonzero eigenvalues of each T_i in [0.5, 2]."""
    return _window_trial(rng, k, n, (0.5, 2.0))


def exp_spectral_window_projections(rng, k=None, n=None):
    """Nearly orthogonal projections (every nonzero eigenvalue of T_i is 1)."""
    return _window_trial(rng, k, n, (1.0, 1.0))


def _rotate_to_distance(rng, p, target):
    """U p U* with |U p U* - p| = target for U = exp(i theta h)."""
    k = p.shape[0]
    g = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    h = 0.5 * (g + dagger(g))
    h /= opnorm(h)
    w, v = np.linalg.eigh(h)

    def rotated(theta):
        u = (v * np.exp(1j * theta * w)) @ dagger(v)
        q = u @ p @ dagger(u)
        return 0.5 * (q + dagger(q))

    def gap(theta):
        return opnorm(rotated(theta) - p) - target

    hi = 2 * target / max(opnorm(h @ p - p @ h), 1e-12)
    while gap(hi) < 0:
        hi *= 2
    while gap(hi / 2) > 0:
        hi /= 2
    theta = brentq(gap, hi / 2, hi, xtol=1e-13 * hi)
    return rotated(theta)


MIN_RADIUS = 1e-9


def exp_stability(rng, k=None, n=None, fraction=0.9):
    k, n = _dims(rng, k, n, 10, 4)
    # the radius shrinks like |A^-1|^-3; below MIN_RADIUS a perturbation of
    # size 0.9 r is lost in rounding, so such draws are replaced
    while True:
        t = gen_complete(k, _composition(rng, k, n), _seed(rng))
        r = stability_radius(t)
        if r >= MIN_RADIUS:
            break
    moved = validate_tuple([_rotate_to_distance(rng, p, fraction * r) for p in t], t.tol)
    dist = max(opnorm(p - q) for p, q in zip(t, moved))
    verdict = is_complete(moved).verdict
    metrics = {"radius": r, "distance_over_radius": dist / r, "verdict": VERDICT_CODE[verdict]}
    return Trial(k, n, metrics, violation=verdict is not Verdict.COMPLETE or not dist < r)


def exp_homotopy(rng, k=None, n=None):
    k, n = _dims(rng, k, n, 10, 4)
    t = gen_complete(k, _composition(rng, k, n), _seed(rng))
    metrics = {}
    try:
        path = homotopy_path(t, num_samples=11)
    except ProjTupleError:
        return Trial(k, n, {"breakdown": 1}, violation=True)
    q = retract(t)
    qq = retract(q)
    all_complete = all(is_complete(s).verdict is Verdict.COMPLETE for s in path.tuples)
    metrics.update(breakdown=0, start_residual=path.endpoint_residuals["start"],
                   end_residual=path.endpoint_residuals["end"], trace_drift=path.trace_drift,
                   max_step=path.max_step, retract_idempotency=max(opnorm(a - b) for a, b in zip(q, qq)),
                   all_complete=int(all_complete))
    bad = not (metrics["start_residual"] <= 1e-8 and metrics["end_residual"] <= 1e-8
               and path.trace_drift <= 1e-6 and metrics["retract_idempotency"] <= 1e-10 and all_complete)
    return Trial(k, n, metrics, violation=bad)


def exp_witness(rng, k=None, n=None):
    k, n = _dims(rng, k, n, 10, 4)
    ranks = _composition(rng, k, n)
    t = gen_complete(k, ranks, _seed(rng))
    other = list(rng.permutation(ranks)) if rng.random() < 0.3 else ranks
    t2 = gen_complete(k, other, _seed(rng))
    traces = [tuple(int(round(np.trace(p).real)) for p in x.mats[:-1]) for x in (t, t2)]
    same = same_component_matrix_algebra(t, t2)
    equiv = mvn_equivalent(t, t2)
    consistent = same == (traces[0] == traces[1]) and (not same or equiv)
    metrics = {"rank_matched": int(equiv), "same_component": int(same), "consistent": int(consistent)}
    bad = not consistent
    if equiv:
        wit = equivalence_witness(t, t2)
        metrics["witness_residual"] = max(wit.residuals.values())
        bad = bad or not metrics["witness_residual"] <= 1e-7
    return Trial(k, n, metrics, violation=bad)


EXPERIMENTS = {
    "oracle-equivalence": exp_oracle_equivalence,
    "buckholdtz": exp_buckholdtz,
    "weighted-inverse": exp_weighted_inverse,
    "joins": exp_joins,
    "orthogonalization-bound": exp_orthogonalization_bound,
    "spectral-window": exp_spectral_window,
    "spectral-window-projections": exp_spectral_window_projections,
    "stability": exp_stability,
    "homotopy": exp_homotopy,
    "witness": exp_witness,
}


def _summarize(trials):
    summary = {"trials": len(trials), "violations": sum(t.violation for t in trials),
               "skipped": sum(t.skipped for t in trials), "metrics": {}}
    names = sorted({m for t in trials for m in t.metrics})
    for name in names:
        vals = np.array([t.metrics[name] for t in trials if name in t.metrics], dtype=float)
        summary["metrics"][name] = {"min": float(vals.min()), "max": float(vals.max()),
                                    "mean": float(vals.mean())}
    return summary


def run_sweep(experiment, trials, seed, k=None, n=None):
    try:
        fn = EXPERIMENTS[experiment]
    except KeyError:
        raise UnknownExperiment(f"unknown experiment {experiment!r}; choose from {sorted(EXPERIMENTS)}") from None
    out = [fn(np.random.default_rng(seed + i), k, n) for i in range(trials)]
    return SweepResult(experiment, seed, out, _summarize(out))
