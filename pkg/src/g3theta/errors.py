"""Exception hierarchy shared across the package."""


class G3Error(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(G3Error):
    """Operands have incompatible dimensions."""


class NonDistinct(G3Error):
    """Characteristic arguments are required to be pairwise distinct classes."""


class WrongCount(G3Error):
    """A list of characteristics has the wrong length."""


class SearchFailed(G3Error):
    """A combinatorial search that must succeed came up empty (fatal)."""


class CoverageFailure(G3Error):
    """Pencil representatives failed to cover each even class exactly once (fatal)."""


class NoDecomposition(G3Error):
    """No four-element subset of the fundamental system has the required product (fatal)."""


class BadCharacteristic(G3Error):
    """A characteristic does not satisfy the parity/admissibility precondition."""


class NotPositiveDefinite(G3Error):
    """The imaginary part of a period matrix is not positive definite."""


class IllConditioned(G3Error):
    """A linear system in the symplectic action is too ill-conditioned to trust."""


class NearPole(G3Error):
    """Evaluation point is numerically on the divisor of the denominator."""


class NoVanishingNull(G3Error):
    """No even theta constant vanishes at this period matrix."""


class AmbiguousVanishingNull(G3Error):
    """Two or more even theta constants vanish (decomposable locus)."""

    def __init__(self, chars):
        self.chars = tuple(chars)
        super().__init__(
            "multiple vanishing even theta constants: "
            + ", ".join(str(c) for c in self.chars)
        )


class NotHyperelliptic(G3Error):
    """The period matrix has no (unique) vanishing even theta constant."""


class NoConvergence(G3Error):
    """Newton iteration did not converge within the allowed number of steps."""


class LostPositivity(G3Error):
    """No admissible Newton step keeps the imaginary part positive definite."""
