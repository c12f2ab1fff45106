"""Exact rational arithmetic and univariate polynomials over Q.

Polynomials are held in sympy's dense representation over `QQ` (leading
coefficient first) and exposed with `fractions.Fraction` coefficients
(lowest degree first). Factorisation over Q runs a Zassenhaus driver on top
of sympy's finite-field factoriser and Hensel lifter.

Example:
    ```python
    from fiberlevel.exact_arith import RatPoly, factor_over_Q

    f = RatPoly.from_coeffs([-147, 104, 42, 0, 1])
    factorization = factor_over_Q(f)
    print([str(g) for g, _ in factorization.factors])
    # ['x - 1', 'x + 3', 'x^2 - 2*x + 49']
    ```
"""

from __future__ import annotations

import itertools
import logging
import re
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any

from sympy import nextprime
from sympy.polys.densearith import (
    dup_add,
    dup_div,
    dup_mul,
    dup_mul_ground,
    dup_neg,
    dup_pow,
    dup_sub,
)
from sympy.polys.densebasic import dup_convert, dup_degree, dup_LC, dup_strip
from sympy.polys.densetools import (
    dup_clear_denoms,
    dup_compose,
    dup_diff,
    dup_eval,
    dup_monic,
    dup_primitive,
    dup_trunc,
)
from sympy.polys.domains import QQ, ZZ
from sympy.polys.euclidtools import dup_gcd
from sympy.polys.factortools import dup_zz_hensel_lift, dup_zz_mignotte_bound
from sympy.polys.galoistools import gf_factor_sqf, gf_from_int_poly, gf_sqf_p, gf_to_int_poly
from sympy.polys.sqfreetools import dup_sqf_list

from fiberlevel.errors import InexactDivisionError, InvalidSettingsError

logger = logging.getLogger(__name__)

Rat = Fraction
"""Exact rational scalar. Always in lowest terms with a positive denominator."""

DEGREE_OF_ZERO = float("-inf")
"""Degree reported for the zero polynomial."""

_RATIONAL_PATTERN = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")

Scalar = int | Fraction


def parse_rational(value: str | int | Fraction) -> Fraction:
    """Parse a rational written as ``"p/q"`` or ``"p"``.

    Args:
        value: String, integer or Fraction.

    Returns:
        The value as a Fraction in lowest terms.

    Raises:
        ValueError: If the string is not of the form ``p`` or ``p/q``, or q is zero.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    match = _RATIONAL_PATTERN.match(value)
    if match is None:
        raise ValueError(f"Not a rational number of the form p or p/q: {value!r}")
    numerator, denominator = match.groups()
    if denominator is not None and int(denominator) == 0:
        raise ValueError(f"Zero denominator in {value!r}")
    return Fraction(int(numerator), int(denominator or 1))


def format_rational(value: Fraction) -> str:
    """Format a rational as ``"p"`` or ``"p/q"``."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def _to_qq(value: Scalar) -> Any:
    value = Fraction(value)
    return QQ(value.numerator, value.denominator)


def _from_qq(value: Any) -> Fraction:
    return Fraction(int(value.numerator), int(value.denominator))


@dataclass(frozen=True)
class RatPoly:
    """A univariate polynomial with exact rational coefficients.

    Instances are immutable and hashable. Arithmetic operators accept other
    polynomials as well as `int` and `Fraction` scalars.

    Example:
        ```python
        x = RatPoly.x()
        f = (x - 1) * (x**2 + x - 1)
        assert f == RatPoly.from_coeffs([1, -2, 0, 1])
        q, r = divmod(f, x - 1)
        ```
    """

    rep: tuple[Any, ...] = ()
    """Dense coefficients over sympy's QQ, leading coefficient first, no leading zeros."""

    @classmethod
    def from_dense(cls, rep: Iterable[Any], domain: Any = QQ) -> RatPoly:
        """Build from a sympy dense list (leading coefficient first) over `domain`."""
        dense = list(rep)
        if domain != QQ:
            dense = dup_convert(dense, domain, QQ)
        return cls(tuple(dup_strip(dense)))

    @classmethod
    def from_coeffs(cls, coeffs: Iterable[Scalar | str]) -> RatPoly:
        """Build from coefficients listed lowest degree first."""
        values = [parse_rational(c) if isinstance(c, str) else c for c in coeffs]
        return cls(tuple(dup_strip([_to_qq(c) for c in reversed(values)])))

    @classmethod
    def from_strings(cls, coeffs: Sequence[str]) -> RatPoly:
        """Build from base-10 coefficient strings, lowest degree first."""
        return cls.from_coeffs(parse_rational(c) for c in coeffs)

    @classmethod
    def constant(cls, value: Scalar) -> RatPoly:
        """The constant polynomial `value`."""
        return cls.from_coeffs([value])

    @classmethod
    def x(cls) -> RatPoly:
        """The polynomial x."""
        return cls.from_coeffs([0, 1])

    @cached_property
    def coeffs(self) -> tuple[Fraction, ...]:
        """Coefficients as Fractions, lowest degree first."""
        return tuple(_from_qq(c) for c in reversed(self.rep))

    @property
    def degree(self) -> int | float:
        """Degree, or `DEGREE_OF_ZERO` for the zero polynomial."""
        if not self.rep:
            return DEGREE_OF_ZERO
        return len(self.rep) - 1

    @property
    def is_zero(self) -> bool:
        return not self.rep

    @property
    def leading_coefficient(self) -> Fraction:
        """Leading coefficient (zero for the zero polynomial)."""
        if not self.rep:
            return Fraction(0)
        return _from_qq(self.rep[0])

    def _coerce(self, other: RatPoly | Scalar) -> RatPoly:
        if isinstance(other, RatPoly):
            return other
        if isinstance(other, int | Fraction):
            return RatPoly.constant(other)
        return NotImplemented

    def __add__(self, other: RatPoly | Scalar) -> RatPoly:
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        return RatPoly(tuple(dup_add(list(self.rep), list(rhs.rep), QQ)))

    __radd__ = __add__

    def __sub__(self, other: RatPoly | Scalar) -> RatPoly:
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        return RatPoly(tuple(dup_sub(list(self.rep), list(rhs.rep), QQ)))

    def __rsub__(self, other: Scalar) -> RatPoly:
        return RatPoly.constant(other) - self

    def __neg__(self) -> RatPoly:
        return RatPoly(tuple(dup_neg(list(self.rep), QQ)))

    def __mul__(self, other: RatPoly | Scalar) -> RatPoly:
        if isinstance(other, int | Fraction):
            return RatPoly(tuple(dup_strip(dup_mul_ground(list(self.rep), _to_qq(other), QQ))))
        if not isinstance(other, RatPoly):
            return NotImplemented
        return RatPoly(tuple(dup_mul(list(self.rep), list(other.rep), QQ)))

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> RatPoly:
        if exponent < 0:
            raise ValueError("Negative powers of polynomials are not polynomials")
        return RatPoly(tuple(dup_pow(list(self.rep), exponent, QQ)))

    def divrem(self, divisor: RatPoly) -> tuple[RatPoly, RatPoly]:
        """Euclidean division: ``self = q * divisor + r`` with ``deg r < deg divisor``.

        Raises:
            ZeroDivisionError: If `divisor` is the zero polynomial.
        """
        if divisor.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        q, r = dup_div(list(self.rep), list(divisor.rep), QQ)
        return RatPoly(tuple(q)), RatPoly(tuple(r))

    def __divmod__(self, divisor: RatPoly) -> tuple[RatPoly, RatPoly]:
        return self.divrem(divisor)

    def __floordiv__(self, divisor: RatPoly) -> RatPoly:
        return self.divrem(divisor)[0]

    def __mod__(self, divisor: RatPoly) -> RatPoly:
        return self.divrem(divisor)[1]

    def exact_quotient(self, divisor: RatPoly) -> RatPoly:
        """Quotient of an exact division.

        Raises:
            InexactDivisionError: If the remainder is nonzero.
        """
        q, r = self.divrem(divisor)
        if not r.is_zero:
            raise InexactDivisionError(int(self.degree), int(divisor.degree), int(r.degree))
        return q

    def divides(self, other: RatPoly) -> bool:
        """Whether this polynomial divides `other`."""
        return (other % self).is_zero

    def compose(self, inner: RatPoly) -> RatPoly:
        """The composition ``self(inner(x))``."""
        return RatPoly(tuple(dup_compose(list(self.rep), list(inner.rep), QQ)))

    def monic(self) -> RatPoly:
        """Divide by the leading coefficient. The zero polynomial is returned unchanged."""
        if not self.rep:
            return self
        return RatPoly(tuple(dup_monic(list(self.rep), QQ)))

    def derivative(self) -> RatPoly:
        return RatPoly(tuple(dup_diff(list(self.rep), 1, QQ)))

    def __call__(self, value: Scalar) -> Fraction:
        return _from_qq(dup_eval(list(self.rep), _to_qq(value), QQ))

    def sort_key(self) -> tuple[int | float, tuple[Fraction, ...]]:
        """Ordering key: degree first, then coefficients lowest degree first."""
        return (self.degree, self.coeffs)

    def to_strings(self) -> list[str]:
        """Base-10 coefficient strings, lowest degree first."""
        return [format_rational(c) for c in self.coeffs]

    def integer_primitive(self) -> list[Any]:
        """Dense primitive integer multiple with positive leading coefficient."""
        _, cleared = dup_clear_denoms(list(self.rep), QQ, ZZ, convert=True)
        _, primitive = dup_primitive(cleared, ZZ)
        if primitive and dup_LC(primitive, ZZ) < 0:
            primitive = dup_neg(primitive, ZZ)
        return list(primitive)

    def __str__(self) -> str:
        if not self.rep:
            return "0"
        terms: list[str] = []
        for power in range(len(self.rep) - 1, -1, -1):
            c = self.coeffs[power]
            if c == 0:
                continue
            sign = "-" if c < 0 else "+"
            magnitude = abs(c)
            if power == 0:
                body = format_rational(magnitude)
            else:
                monomial = "x" if power == 1 else f"x^{power}"
                body = monomial if magnitude == 1 else f"{format_rational(magnitude)}*{monomial}"
            terms.append(f"{sign} {body}")
        text = " ".join(terms)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]

    def __repr__(self) -> str:
        return f"RatPoly('{self}')"


def poly_gcd(a: RatPoly, b: RatPoly) -> RatPoly:
    """Monic greatest common divisor.

    Raises:
        ValueError: If both arguments are zero.
    """
    if a.is_zero and b.is_zero:
        raise ValueError("gcd(0, 0) is undefined")
    return RatPoly(tuple(dup_gcd(list(a.rep), list(b.rep), QQ))).monic()


def squarefree_decompose(a: RatPoly) -> list[tuple[RatPoly, int]]:
    """Squarefree decomposition of ``monic(a)``.

    Returns:
        Pairs ``(part, multiplicity)`` with monic, squarefree, pairwise coprime
        parts, ordered by multiplicity. Constants decompose to an empty list.

    Raises:
        ValueError: If `a` is zero.
    """
    if a.is_zero:
        raise ValueError("Cannot decompose the zero polynomial")
    _, parts = dup_sqf_list(list(a.rep), QQ)
    return [(RatPoly(tuple(part)).monic(), multiplicity) for part, multiplicity in parts]


@dataclass(frozen=True)
class FactorSettings:
    """Tuning knobs for the Zassenhaus factoriser. None of them changes the result."""

    prime_candidates: int = 5
    """How many admissible primes to try before choosing the one with fewest modular factors."""

    min_prime: int = 5
    """Smallest prime considered."""

    def __post_init__(self) -> None:
        if self.prime_candidates < 1:
            raise InvalidSettingsError("prime_candidates", self.prime_candidates, "at least one prime must be tried")
        if self.min_prime < 2:
            raise InvalidSettingsError("min_prime", self.min_prime, "must be at least 2")


@dataclass(frozen=True)
class Factorization:
    """A complete factorization ``unit * prod(f ** m)`` into monic irreducibles over Q."""

    unit: Fraction
    """Leading coefficient of the factored polynomial."""

    factors: tuple[tuple[RatPoly, int], ...] = field(default_factory=tuple)
    """Monic irreducible factors with multiplicities, sorted by `RatPoly.sort_key`."""

    def expand(self) -> RatPoly:
        """Multiply the factorization back out."""
        product = RatPoly.constant(self.unit)
        for factor, multiplicity in self.factors:
            product = product * factor**multiplicity
        return product

    def degrees(self) -> list[int]:
        """Factor degrees, repeated by multiplicity, in ascending order."""
        return sorted(int(f.degree) for f, m in self.factors for _ in range(m))

    def __iter__(self) -> Iterator[tuple[RatPoly, int]]:
        return iter(self.factors)

    def __len__(self) -> int:
        return len(self.factors)


def factor_over_Q(a: RatPoly, settings: FactorSettings | None = None) -> Factorization:
    """Factor a polynomial into monic irreducibles over Q.

    Squarefree decomposition first; each squarefree part is cleared to a
    primitive integer polynomial and factored by Zassenhaus (modular
    factorisation, Hensel lifting past the Mignotte bound, subset
    recombination with degree-set pruning and exact trial division).

    Args:
        a: The polynomial to factor.
        settings: Prime-selection settings.

    Returns:
        The factorization; constants factor as a unit only.

    Raises:
        ValueError: If `a` is zero.

    Example:
        ```python
        f = RatPoly.from_coeffs([1, -2, 0, 1])
        factor_over_Q(f).degrees()  # [1, 2]
        ```
    """
    if a.is_zero:
        raise ValueError("Cannot factor the zero polynomial")
    settings = settings or FactorSettings()
    factors: list[tuple[RatPoly, int]] = []
    for part, multiplicity in squarefree_decompose(a):
        for g in _factor_squarefree(part, settings):
            factors.append((g, multiplicity))
    factors.sort(key=lambda item: item[0].sort_key())
    return Factorization(unit=a.leading_coefficient, factors=tuple(factors))


def _factor_squarefree(part: RatPoly, settings: FactorSettings) -> list[RatPoly]:
    if part.degree <= 1:
        return [part]
    f = part.integer_primitive()
    found: list[list[Any]] = []
    if f[-1] == 0:
        found.append([ZZ(1), ZZ(0)])
        f = f[:-1]
    if dup_degree(f) == 1:
        found.append(f)
    elif dup_degree(f) > 1:
        found.extend(_zassenhaus(f, settings))
    return [RatPoly.from_dense(g, ZZ).monic() for g in found]


def _subset_degree_sums(degrees: Sequence[int]) -> set[int]:
    sums = {0}
    for d in degrees:
        sums |= {s + d for s in sums}
    return sums


def _modular_candidates(f: list[Any], settings: FactorSettings) -> list[tuple[int, list[list[Any]]]]:
    lc = dup_LC(f, ZZ)
    candidates: list[tuple[int, list[list[Any]]]] = []
    p = settings.min_prime - 1
    while len(candidates) < settings.prime_candidates:
        p = nextprime(p)
        if lc % p == 0:
            continue
        reduced = gf_from_int_poly(f, p)
        if not gf_sqf_p(reduced, p, ZZ):
            continue
        _, modular = gf_factor_sqf(reduced, p, ZZ)
        candidates.append((p, modular))
        if len(modular) == 1:
            break
    return candidates


def _zassenhaus(f: list[Any], settings: FactorSettings) -> list[list[Any]]:
    """Factor a primitive squarefree integer polynomial with nonzero constant term."""
    n = dup_degree(f)
    candidates = _modular_candidates(f, settings)
    p, modular = min(candidates, key=lambda c: (len(c[1]), c[0]))
    allowed = set.intersection(*(_subset_degree_sums([len(g) - 1 for g in m]) for _, m in candidates))
    logger.debug("degree %d: prime %d gives %d modular factors", n, p, len(modular))
    if len(modular) == 1 or allowed <= {0, n}:
        return [f]

    lc = dup_LC(f, ZZ)
    bound = 2 * abs(lc) * dup_zz_mignotte_bound(f, ZZ) + 1
    exponent = 1
    while p**exponent <= bound:
        exponent += 1
    modulus = p**exponent
    logger.debug("lifting %d factors to %d^%d", len(modular), p, exponent)
    lifted = dup_zz_hensel_lift(ZZ(p), f, [gf_to_int_poly(g, p) for g in modular], exponent, ZZ)

    factors: list[list[Any]] = []
    remaining = list(range(len(lifted)))
    size = 1
    while 2 * size <= len(remaining):
        for subset in itertools.combinations(remaining, size):
            if sum(len(lifted[i]) - 1 for i in subset) not in allowed:
                continue
            candidate = _recombine(f, [lifted[i] for i in subset], modulus)
            if candidate is None:
                continue
            quotient, remainder = dup_div(f, candidate, ZZ)
            if remainder:
                continue
            factors.append(candidate)
            f = quotient
            remaining = [i for i in remaining if i not in subset]
            break
        else:
            size += 1
    factors.append(f)
    return factors


def _recombine(f: list[Any], pieces: list[list[Any]], modulus: int) -> list[Any] | None:
    """Candidate true factor from a subset of lifted factors, or None if the constant-term test fails."""
    lc = dup_LC(f, ZZ)
    constant = lc
    for piece in pieces:
        constant = constant * piece[-1] % modulus
    if constant > modulus // 2:
        constant -= modulus
    if constant == 0 or (lc * f[-1]) % constant != 0:
        return None
    product = [lc]
    for piece in pieces:
        product = dup_mul(product, piece, ZZ)
    _, candidate = dup_primitive(dup_trunc(product, modulus, ZZ), ZZ)
    if not candidate or candidate[-1] == 0 or f[-1] % candidate[-1] != 0:
        return None
    return list(candidate)
