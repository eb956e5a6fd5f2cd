"""Command-line frontend.

Each subcommand reads a JSON file (``-`` for standard input), runs one
analysis and writes a JSON report to standard output or ``--json-out``.

Exit codes: 0 success or Complete, 1 sweep found violations, 2 input
error, 3 Incomplete / NotComplete, 4 Indeterminate / GapTooSmall /
PathBreakdown, 5 HypothesisViolated / NotEquivalent / PencilSingular /
DependentFrame.
"""

import argparse
import csv
import io as _stdio
import platform
import sys

import numpy as np
import scipy

from . import __version__
from . import io as tio
from .completeness import (
    Verdict,
    is_complete,
    is_complete_quantitative,
    oracle_direct_sum,
    pencil_check,
    require_complete,
)
from .errors import (
    BadRanks,
    CertificationFailed,
    DependentFrame,
    DimensionMismatch,
    EmptyIndices,
    GapTooSmall,
    HypothesisViolated,
    InputError,
    NonFinite,
    NotComplete,
    NotEquivalent,
    NotHermitian,
    NotProjection,
    PathBreakdown,
    PencilSingular,
    ProjTupleError,
    TrivialProjection,
    UnknownExperiment,
)
from .experiments import EXPERIMENTS, run_sweep
from .homotopy import (
    equivalence_witness,
    homotopy_path,
    mvn_equivalent,
    retract,
    same_component_matrix_algebra,
    trace_vector,
)
from .lattice import join
from .linalg import DEFAULT_TOL
from .model import gen_complete, gen_degenerate, gen_near_orthogonal, gen_random, validate_tuple
from .perturbation import (
    make_frame,
    near_identity_test,
    orthogonalize_nearby,
    orthogonalize_vectors_nearby,
    orthonormalize_frame,
)

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_INPUT = 2
EXIT_INCOMPLETE = 3
EXIT_INDETERMINATE = 4
EXIT_HYPOTHESIS = 5

VERDICT_EXIT = {
    Verdict.COMPLETE: EXIT_OK,
    Verdict.INCOMPLETE: EXIT_INCOMPLETE,
    Verdict.INDETERMINATE: EXIT_INDETERMINATE,
}

ERROR_EXIT = [
    ((InputError, NotProjection, TrivialProjection, DimensionMismatch, NotHermitian, NonFinite,
      BadRanks, EmptyIndices, UnknownExperiment, IndexError), EXIT_INPUT),
    ((NotComplete,), EXIT_INCOMPLETE),
    ((GapTooSmall, PathBreakdown, CertificationFailed), EXIT_INDETERMINATE),
    ((HypothesisViolated, NotEquivalent, PencilSingular, DependentFrame), EXIT_HYPOTHESIS),
]

# arguments that name output files are left out of the command echo so
# the report does not depend on where it is written
_UNECHOED = {"json_out", "csv", "tuple_out", "func"}


def _exit_code_for(exc):
    for types, code in ERROR_EXIT:
        if isinstance(exc, types):
            return code
    return 1


def _runtime():
    return {
        "projtuple": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


def _policy(args, overrides=None):
    tol = DEFAULT_TOL.replace(**(overrides or {}))
    return tol.replace(rank_rel=args.tol_rank, residual_atol=args.tol_residual,
                       margin_factor=args.margin)


def _load_tuple(path, args, validate=True):
    raw = tio.read_source(path)
    mats, overrides = tio.parse_tuple(raw)
    tol = _policy(args, overrides)
    t = validate_tuple(mats, tol) if validate else None
    return raw, mats, t, tol


def _tolerances(tol):
    return {"rank_rel": tol.rank_rel, "residual_atol": tol.residual_atol,
            "margin_factor": tol.margin_factor}


def _validation(t):
    return {key: t.diagnostics[key] for key in ("ranks", "idempotency", "hermiticity")}


def _completeness_section(rep):
    out = {"verdict": str(rep.verdict),
           "A_spectrum": rep.A_spectrum.eigenvalues,
           "observed_max_offdiag": rep.observed,
           "threshold": rep.threshold,
           "residual_log": [{"criterion": name, "passed": bool(ok), "residual": res}
                            for name, ok, res in rep.criteria_log]}
    if rep.offdiag_norms is not None:
        out["offdiag_norms"] = rep.offdiag_norms
    return out


def _pencil_section(entries):
    return [{"index": e.index + 1, "lambda": complex(e.lam), "form": e.form,
             "sigma_min": e.sigma_min,
             "invertible": "ambiguous" if e.invertible is None else bool(e.invertible)}
            for e in entries]


# subcommands return (report fields, exit code)

def cmd_check(args):
    raw, _, t, tol = _load_tuple(args.input, args)
    primary = is_complete(t)
    quant = is_complete_quantitative(t)
    report = {
        "input_digest": tio.digest(raw),
        "tolerances": _tolerances(tol),
        "validation": _validation(t),
        "verdicts": {
            "is_complete": str(primary.verdict),
            "is_complete_quantitative": str(quant.verdict),
            "oracle_direct_sum": str(oracle_direct_sum(t)),
            "near_identity_test": str(near_identity_test(t)),
        },
        "certificates": {
            "is_complete": _completeness_section(primary),
            "is_complete_quantitative": _completeness_section(quant),
            "pencil": _pencil_section(pencil_check(t)),
        },
    }
    return report, VERDICT_EXIT[primary.verdict]


def _write_tuple(path, mats, tol):
    if path:
        with open(path, "w") as fh:
            fh.write(tio.dumps(tio.tuple_to_dict(mats, tol)))


def cmd_orthogonalize(args):
    raw, _, t, tol = _load_tuple(args.input, args)
    out = orthogonalize_nearby(t, args.epsilon)
    _write_tuple(args.tuple_out, out.mats, tol)
    d = out.diagnostics
    report = {
        "input_digest": tio.digest(raw),
        "tolerances": _tolerances(tol),
        "validation": _validation(t),
        "certificates": {"eta": d["eta"], "delta_bound": d["delta_bound"], "epsilon": args.epsilon,
                         "distances": d["distances"], "max_distance": d["max_distance"],
                         "bound_2(n-1)eta": 2 * (t.n - 1) * d["eta"], "max_cross": d["max_cross"]},
        "outputs": {"tuple": tio.tuple_to_dict(out.mats)},
    }
    return report, EXIT_OK


def _parse_indices(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"--indices must be comma-separated integers, got {text!r}") from None


def cmd_join(args):
    raw, _, t, tol = _load_tuple(args.input, args)
    rep = require_complete(t)
    res = join(t, _parse_indices(args.indices), rep)
    report = {
        "input_digest": tio.digest(raw),
        "tolerances": _tolerances(tol),
        "validation": _validation(t),
        "verdicts": {"is_complete": str(rep.verdict)},
        "certificates": {"indices": list(res.indices), "agreement_residuals": res.residuals,
                         "max_residual": res.max_residual,
                         "rank": int(round(np.trace(res.join).real))},
        "outputs": {"join": res.join},
    }
    return report, EXIT_OK


def cmd_retract(args):
    raw, _, t, tol = _load_tuple(args.input, args)
    rep = require_complete(t)
    out = retract(t, rep)
    _write_tuple(args.tuple_out, out.mats, tol)
    report = {
        "input_digest": tio.digest(raw),
        "tolerances": _tolerances(tol),
        "validation": _validation(t),
        "verdicts": {"is_complete": str(rep.verdict)},
        "certificates": {"max_cross": out.diagnostics["max_cross"],
                         "sum_residual": out.diagnostics["sum_residual"],
                         "ranks": list(out.ranks)},
        "outputs": {"tuple": tio.tuple_to_dict(out.mats)},
    }
    return report, EXIT_OK


def cmd_path(args):
    raw, _, t, tol = _load_tuple(args.input, args)
    rep = require_complete(t)
    path = homotopy_path(t, num_samples=args.samples, report=rep)
    report = {
        "input_digest": tio.digest(raw),
        "tolerances": _tolerances(tol),
        "validation": _validation(t),
        "verdicts": {"is_complete": str(rep.verdict), "samples_complete": True},
        "certificates": {"kind": path.kind, "max_step": path.max_step,
                         "trace_drift": path.trace_drift,
                         "endpoint_residuals": path.endpoint_residuals},
        "outputs": {"samples": [{"t": s, "tuple": tio.tuple_to_dict(x.mats)} for s, x in path.samples]},
    }
    return report, EXIT_OK


def cmd_equiv(args):
    raw, _, t, tol = _load_tuple(args.input, args)
    raw2, _, t2, _ = _load_tuple(args.input2, args)
    t2 = validate_tuple(t2.mats, tol)
    reps = (require_complete(t), require_complete(t2))
    report = {
        "input_digest": tio.digest(raw),
        "input2_digest": tio.digest(raw2),
        "tolerances": _tolerances(tol),
        "verdicts": {
            "mvn_equivalent": mvn_equivalent(t, t2),
            "same_component": same_component_matrix_algebra(t, t2),
        },
        "certificates": {"ranks": [list(t.ranks), list(t2.ranks)],
                         "trace_vectors": [list(trace_vector(t)), list(trace_vector(t2))]},
    }
    if not report["verdicts"]["mvn_equivalent"]:
        raise NotEquivalent(f"rank vectors differ: {t.ranks} vs {t2.ranks}")
    wit = equivalence_witness(t, t2, reps)
    report["certificates"]["witness_residuals"] = wit.residuals
    report["outputs"] = {"D": wit.D, "W": wit.W, "partial_isometries": list(wit.partial_isometries)}
    return report, EXIT_OK


def cmd_frame(args):
    raw = tio.read_source(args.input)
    vecs, overrides = tio.parse_frame(raw)
    tol = _policy(args, overrides)
    f = make_frame(vecs, tol)
    k_op, gammas = orthonormalize_frame(f)
    report = {
        "input_digest": tio.digest(raw),
        "tolerances": _tolerances(tol),
        "outputs": {"K": k_op, "gammas": tio.frame_to_dict(gammas)},
    }
    if args.epsilon is not None:
        betas = orthogonalize_vectors_nearby(f, args.epsilon)
        dist = np.linalg.norm(f.vectors - betas, axis=1)
        report["certificates"] = {"epsilon": args.epsilon, "distances": dist,
                                  "max_distance": float(dist.max())}
        report["outputs"]["betas"] = tio.frame_to_dict(betas)
    return report, EXIT_OK


def cmd_sweep(args):
    res = run_sweep(args.experiment, args.trials, args.seed, args.k, args.n)
    if args.csv:
        buf = _stdio.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["trial", "seed", "k", "n", "metric", "value"])
        for row in res.rows():
            writer.writerow([*row[:5], repr(float(row[5]))])
        with open(args.csv, "w") as fh:
            fh.write(buf.getvalue())
    report = {"seed": args.seed, "experiment": args.experiment, "summary": res.summary}
    return report, EXIT_OK if res.summary["violations"] == 0 else EXIT_VIOLATIONS


_GENERATORS = {
    "complete": lambda a, ranks: gen_complete(a.k, ranks, a.seed),
    "degenerate": lambda a, ranks: gen_degenerate(a.k, ranks, a.seed),
    "random": lambda a, ranks: gen_random(a.k, ranks, a.seed),
    "near-orthogonal": lambda a, ranks: gen_near_orthogonal(a.k, ranks, a.noise, a.seed),
}


def cmd_generate(args):
    ranks = _parse_indices(args.ranks)
    t = _GENERATORS[args.kind](args, ranks)
    return tio.tuple_to_dict(t.mats), EXIT_OK


COMMANDS = {
    "check": cmd_check,
    "orthogonalize": cmd_orthogonalize,
    "join": cmd_join,
    "retract": cmd_retract,
    "path": cmd_path,
    "equiv": cmd_equiv,
    "frame": cmd_frame,
    "sweep": cmd_sweep,
    "generate": cmd_generate,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-rank", type=float, help="relative rank cutoff")
    common.add_argument("--tol-residual", type=float, help="absolute residual tolerance")
    common.add_argument("--margin", type=float, help="ambiguous-band factor")
    common.add_argument("--json-out", metavar="PATH", help="write the report here instead of stdout")

    parser = argparse.ArgumentParser(prog="projtuple", description="Completeness of projection tuples in M_k(C).")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        return sub.add_parser(name, parents=[common], help=help_text)

    p = add("check", "decide completeness of a tuple")
    p.add_argument("input", help="tuple file, or - for stdin")

    p = add("orthogonalize", "orthogonalize a nearly orthogonal tuple")
    p.add_argument("input")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--tuple-out", metavar="PATH", help="also write the result as a tuple file")

    p = add("join", "join of selected projections of a complete tuple")
    p.add_argument("input")
    p.add_argument("--indices", required=True, help="1-based, comma separated, e.g. 1,2")

    p = add("retract", "orthogonal retraction of a complete tuple")
    p.add_argument("input")
    p.add_argument("--tuple-out", metavar="PATH")

    p = add("path", "sample the homotopy from a complete tuple to its retraction")
    p.add_argument("input")
    p.add_argument("--samples", type=int, default=11)

    p = add("equiv", "equivalence witness between two complete tuples")
    p.add_argument("input")
    p.add_argument("input2")

    p = add("frame", "orthonormalize a frame of unit vectors")
    p.add_argument("input", help="vector frame file, or - for stdin")
    p.add_argument("--epsilon", type=float)

    p = add("sweep", "run a randomized experiment")
    p.add_argument("--experiment", required=True, help=", ".join(sorted(EXPERIMENTS)))
    p.add_argument("--k", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", metavar="PATH", help="per-trial rows")

    p = add("generate", "write a random tuple file")
    p.add_argument("--kind", choices=sorted(_GENERATORS), default="complete")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--ranks", required=True, help="comma separated, e.g. 2,2,2")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", type=float, default=0.05)
    return parser


def _echo(args):
    return {"name": args.command,
            "args": {k: v for k, v in sorted(vars(args).items()) if k not in _UNECHOED and k != "command"}}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        body, code = COMMANDS[args.command](args)
    except (ProjTupleError, IndexError, ValueError) as exc:
        code = _exit_code_for(exc)
        if code == 1 and isinstance(exc, ValueError):
            code = EXIT_INPUT
        body = {"error": {"type": type(exc).__name__, "message": str(exc), "exit_code": code}}
        print(f"projtuple {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)

    if args.command == "generate" and "error" not in body:
        doc = body
    else:
        doc = {"command": _echo(args), **body, "runtime": _runtime()}
    text = tio.dumps(doc)
    if args.json_out:
        with open(args.json_out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
