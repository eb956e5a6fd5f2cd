"""Exception hierarchy.

Every error raised on purpose by this package derives from
:class:`ProjTupleError`, so callers (and the CLI) can catch one type.
"""


class ProjTupleError(Exception):
    """Base class for all package errors."""


class NonFinite(ProjTupleError, ValueError):
    pass


class NotHermitian(ProjTupleError, ValueError):
    pass


class NotPSD(ProjTupleError, ValueError):
    pass


class DomainError(ProjTupleError, ValueError):
    """A spectral function is undefined at some eigenvalue."""


class GapTooSmall(ProjTupleError, ArithmeticError):
    """Eigenvalues fall inside the ambiguous band above the rank cutoff.

    Raised when "zero is an isolated point of the spectrum" cannot be
    certified at the current tolerances.
    """


class DimensionMismatch(ProjTupleError, ValueError):
    pass


class NotProjection(ProjTupleError, ValueError):
    def __init__(self, index, idempotency, hermiticity):
        self.index = index
        self.idempotency = idempotency
        self.hermiticity = hermiticity
        super().__init__(
            f"matrix {index} is not an orthogonal projection "
            f"(|P^2-P|={idempotency:.3e}, |P-P*|={hermiticity:.3e})"
        )


class TrivialProjection(ProjTupleError, ValueError):
    def __init__(self, index, rank):
        self.index = index
        self.rank = rank
        super().__init__(f"matrix {index} is a trivial projection (rank {rank})")


class NotIdempotent(ProjTupleError, ValueError):
    pass


class BadRanks(ProjTupleError, ValueError):
    pass


class NotComplete(ProjTupleError):
    pass


class ZeroWeight(ProjTupleError, ValueError):
    pass


class EmptyIndices(ProjTupleError, ValueError):
    pass


class PencilSingular(ProjTupleError):
    pass


class HypothesisViolated(ProjTupleError):
    """A quantitative hypothesis failed.

    ``which`` names the inequality, ``value`` and ``bound`` give the
    measured quantity and the limit it had to respect.
    """

    def __init__(self, which, value, bound, message=None):
        self.which = which
        self.value = value
        self.bound = bound
        super().__init__(
            message or f"hypothesis '{which}' violated: {value:.6g} vs bound {bound:.6g}"
        )


class DependentFrame(ProjTupleError, ValueError):
    pass


class PathBreakdown(ProjTupleError):
    def __init__(self, t, reason):
        self.t = t
        super().__init__(f"homotopy path breaks down at t={t:.6g}: {reason}")


class NotEquivalent(ProjTupleError):
    pass


class NonIntegerTrace(ProjTupleError, ArithmeticError):
    pass


class CertificationFailed(ProjTupleError, ArithmeticError):
    """A computed object failed its own post-condition check."""


class UnknownExperiment(ProjTupleError, ValueError):
    pass


class InputError(ProjTupleError, ValueError):
    """Malformed input file (parse or schema problem)."""
