"""Custom exceptions for fiberlevel."""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from fractions import Fraction

    from fiberlevel.gl2 import MatMod


class FiberlevelError(Exception):
    """Base exception for all fiberlevel errors.

    All fiberlevel exceptions inherit from this class, making it easy to
    catch any fiberlevel-specific error.

    Example:
        ```python
        try:
            tree = build_tree(curve, 3, depth=2)
        except FiberlevelError as e:
            print(f"fiberlevel error: {e}")
        ```
    """


class SingularCurveError(FiberlevelError):
    """Raised when a Weierstrass model has zero discriminant."""

    def __init__(self, ainvs: tuple[Fraction, ...]) -> None:
        self.ainvs = ainvs
        """The a-invariants (a1, a2, a3, a4, a6) of the rejected model."""
        shown = ", ".join(str(a) for a in ainvs)
        super().__init__(f"Singular Weierstrass model [{shown}]: discriminant is zero")


class InexactDivisionError(FiberlevelError):
    """Raised when a division polynomial quotient leaves a remainder.

    The quotient of consecutive prime-power division polynomials is exact
    for every nonsingular curve, so this signals a bug rather than bad input.
    """

    def __init__(self, dividend_degree: int, divisor_degree: int, remainder_degree: int) -> None:
        self.dividend_degree = dividend_degree
        """Degree of the dividend."""

        self.divisor_degree = divisor_degree
        """Degree of the divisor."""

        self.remainder_degree = remainder_degree
        """Degree of the nonzero remainder."""
        super().__init__(
            f"Division of a degree-{dividend_degree} polynomial by a degree-{divisor_degree} polynomial "
            f"left a remainder of degree {remainder_degree}"
        )


class LinkageError(FiberlevelError):
    """Raised when a factor cannot be attached to exactly one parent.

    Multiplication by the prime is a function, so every factor at level k
    divides exactly one cleared composition from level k-1.
    """

    def __init__(self, level: int, factor_degree: int, parent_count: int) -> None:
        self.level = level
        """Level exponent of the offending factor."""

        self.factor_degree = factor_degree
        """Degree of the offending factor."""

        self.parent_count = parent_count
        """Number of candidate parents found (0, or 2 and more)."""
        super().__init__(
            f"Factor of degree {factor_degree} at level {level} has {parent_count} parents (expected exactly 1)"
        )


class DegreeSumViolationError(FiberlevelError):
    """Raised when the children of a node do not carry the expected total degree."""

    def __init__(self, node_id: str, expected: int, actual: int) -> None:
        self.node_id = node_id
        """Id of the node whose children were checked."""

        self.expected = expected
        """Degree sum predicted from the node degree and the map degree."""

        self.actual = actual
        """Degree sum actually observed."""
        super().__init__(f"Degree sum below node {node_id} is {actual}, expected {expected}")


class UncertifiedError(FiberlevelError):
    """Raised when a certified answer is requested from an uncertified tree.

    Degree prediction past the tree depth needs an adic level exponent that
    the tree depth reaches.
    """

    def __init__(self, depth: int, certified_exponent: int | None) -> None:
        self.depth = depth
        """Depth of the tree."""

        self.certified_exponent = certified_exponent
        """The adic level exponent, or None if none was supplied."""
        if certified_exponent is None:
            detail = "no adic level exponent was supplied"
        else:
            detail = f"depth {depth} is below the adic level exponent {certified_exponent}"
        super().__init__(f"Tree is not certified: {detail}")


class UnknownNodeError(FiberlevelError):
    """Raised when a node id is not present in a tree."""

    def __init__(self, node_id: str) -> None:
        self.node_id = node_id
        """The id that was looked up."""
        super().__init__(f"Unknown node id: {node_id}")


class NonInvertibleMatrixError(FiberlevelError):
    """Raised when a matrix that must lie in GL2 has a non-unit determinant."""

    def __init__(self, matrix: MatMod) -> None:
        self.matrix = matrix
        """The offending matrix."""
        super().__init__(f"Matrix {matrix} is not invertible")


class InvalidSubgroupError(FiberlevelError):
    """Raised when a subgroup description is not a group or is malformed."""

    def __init__(self, reason: str) -> None:
        self.reason = reason
        """Human-readable description of the problem."""
        super().__init__(f"Invalid subgroup: {reason}")


class HypothesisViolatedError(FiberlevelError):
    """Raised when the power-map injectivity check is run without its hypothesis.

    Injectivity is only claimed when the fixer of the first basis vector is
    trivial at the lower level.
    """

    def __init__(self, n: int, z_size: int) -> None:
        self.n = n
        """The exponent n of the check."""

        self.z_size = z_size
        """Size of the fixer group at exponent n+1."""
        super().__init__(f"Fixer group at exponent {n + 1} has {z_size} elements; it must be trivial")


class OddPrimeRequiredError(FiberlevelError):
    """Raised when an odd-prime-only check is asked about the prime 2."""

    def __init__(self, ell: int) -> None:
        self.ell = ell
        """The rejected prime."""
        super().__init__(f"This check requires an odd prime, got {ell}")


class SerializationError(FiberlevelError):
    """Raised when a tree, subgroup or registry document cannot be read or written.

    This can occur when parsing a malformed file or when a document lacks
    required fields.
    """

    def __init__(self, message: str, cause: Exception | None = None) -> None:
        self.cause = cause
        """The underlying exception, if any."""
        super().__init__(message)


class CacheWriteError(FiberlevelError):
    """Raised when a division polynomial cannot be written to the disk cache.

    This can occur due to permission issues, disk full, or other I/O errors.
    """

    def __init__(self, path: str, cause: Exception) -> None:
        self.path = path
        """Path where the cache entry was being written."""

        self.cause = cause
        """The underlying exception that caused the write failure."""
        super().__init__(f"Failed to write cache entry {path}: {cause}")


class RegistryError(FiberlevelError):
    """Raised when a curve or subgroup name is not in the registry."""

    def __init__(self, name: str, kind: str) -> None:
        self.name = name
        """The name that was looked up."""

        self.kind = kind
        """Either "curve" or "spec"."""
        super().__init__(f"Unknown {kind} in registry: {name}")


class InvalidSettingsError(FiberlevelError, ValueError):
    """Raised when a settings object is given an out-of-range value."""

    def __init__(self, name: str, value: object, requirement: str) -> None:
        self.name = name
        """The offending field."""

        self.value = value
        """The rejected value."""
        super().__init__(f"Invalid setting {name}={value!r}: {requirement}")
