"""Weierstrass curves, division polynomials and multiplication-by-n x-maps.

All polynomials here follow the x-only convention: for odd n the division
polynomial psi_n is already a polynomial in x; for even n it is divided by
``2y + a1*x + a3`` (whose square is the two-torsion cubic
``4x^3 + b2*x^2 + 2*b4*x + b6``).

Example:
    ```python
    from fiberlevel.elliptic import curve_from_ainvs, primitive_division_poly

    curve = curve_from_ainvs(1, -1, 1, -14, 29)
    print(curve.j)                              # -1167051/512
    print(primitive_division_poly(curve, 3, 1))  # x^4 - x^3 - 27*x^2 + 117*x - 90
    ```
"""

from __future__ import annotations

import logging
import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING

from sympy import integer_nthroot, isprime

from fiberlevel.errors import SingularCurveError
from fiberlevel.exact_arith import RatPoly, Scalar, factor_over_Q, parse_rational, poly_gcd

if TYPE_CHECKING:
    from fiberlevel.cache import PsiCache
    from fiberlevel.exact_arith import FactorSettings

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WeierstrassCurve:
    """A nonsingular Weierstrass model ``y^2 + a1xy + a3y = x^3 + a2x^2 + a4x + a6`` over Q.

    The b-invariants, discriminant and j-invariant are derived on
    construction.

    Raises:
        SingularCurveError: If the discriminant is zero.
    """

    a1: Fraction
    a2: Fraction
    a3: Fraction
    a4: Fraction
    a6: Fraction

    b2: Fraction = field(init=False)
    b4: Fraction = field(init=False)
    b6: Fraction = field(init=False)
    b8: Fraction = field(init=False)
    discriminant: Fraction = field(init=False)
    j: Fraction = field(init=False)

    def __post_init__(self) -> None:
        for name in ("a1", "a2", "a3", "a4", "a6"):
            object.__setattr__(self, name, parse_rational(getattr(self, name)))
        a1, a2, a3, a4, a6 = self.ainvs
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        discriminant = -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6
        if discriminant == 0:
            raise SingularCurveError(self.ainvs)
        c4 = b2 * b2 - 24 * b4
        object.__setattr__(self, "b2", b2)
        object.__setattr__(self, "b4", b4)
        object.__setattr__(self, "b6", b6)
        object.__setattr__(self, "b8", b8)
        object.__setattr__(self, "discriminant", discriminant)
        object.__setattr__(self, "j", c4**3 / discriminant)

    @property
    def ainvs(self) -> tuple[Fraction, Fraction, Fraction, Fraction, Fraction]:
        """The a-invariants (a1, a2, a3, a4, a6)."""
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    def two_torsion_polynomial(self) -> RatPoly:
        """``4x^3 + b2*x^2 + 2*b4*x + b6``, the square of ``2y + a1*x + a3`` on the curve."""
        return RatPoly.from_coeffs([self.b6, 2 * self.b4, self.b2, 4])

    def __str__(self) -> str:
        return "[" + ",".join(str(a) for a in self.ainvs) + "]"


def curve_from_ainvs(a1: Scalar | str, a2: Scalar | str, a3: Scalar | str, a4: Scalar | str, a6: Scalar | str) -> WeierstrassCurve:
    """Build a curve from its a-invariants (ints, Fractions or ``"p/q"`` strings).

    Raises:
        SingularCurveError: If the model is singular.
        ValueError: If a string is not a rational number.
    """
    return WeierstrassCurve(*(parse_rational(a) for a in (a1, a2, a3, a4, a6)))


def _require_prime(ell: int) -> None:
    if not isprime(ell):
        raise ValueError(f"Expected a prime, got {ell}")


class DivisionPolynomials:
    """Memoised x-only division polynomials of one curve.

    Indexing computes on demand with the doubling recurrences and remembers
    every intermediate value. With a `PsiCache`, entries are loaded from and
    stored to disk as well.

    Example:
        ```python
        table = DivisionPolynomials(curve_from_ainvs(0, 0, 0, 21, 26))
        table[3]   # 3*x^4 + 126*x^2 + 312*x - 441
        ```
    """

    def __init__(self, curve: WeierstrassCurve, cache: PsiCache | None = None) -> None:
        self.curve = curve
        self.cache = cache
        self._lock = threading.RLock()
        b2, b4, b6, b8 = curve.b2, curve.b4, curve.b6, curve.b8
        self._two_torsion = curve.two_torsion_polynomial()
        self._two_torsion_squared = self._two_torsion**2
        self._values: dict[int, RatPoly] = {
            0: RatPoly(),
            1: RatPoly.constant(1),
            2: RatPoly.constant(1),
            3: RatPoly.from_coeffs([b8, 3 * b6, 3 * b4, b2, 3]),
            4: RatPoly.from_coeffs([b4 * b8 - b6 * b6, b2 * b8 - b4 * b6, 10 * b8, 10 * b6, 5 * b4, b2, 2]),
        }

    def __getitem__(self, n: int) -> RatPoly:
        if n < 0:
            raise ValueError(f"Division polynomial index must be nonnegative, got {n}")
        with self._lock:
            return self._get(n)

    def _get(self, n: int) -> RatPoly:
        known = self._values.get(n)
        if known is not None:
            return known
        if self.cache is not None:
            stored = self.cache.load(self.curve, n)
            if stored is not None:
                self._values[n] = stored
                return stored
        value = self._compute(n)
        self._values[n] = value
        if self.cache is not None:
            self.cache.store(self.curve, n, value)
        return value

    def _compute(self, n: int) -> RatPoly:
        m = n // 2
        if n % 2 == 1:
            lhs = self._get(m + 2) * self._get(m) ** 3
            rhs = self._get(m - 1) * self._get(m + 1) ** 3
            if m % 2 == 0:
                return self._two_torsion_squared * lhs - rhs
            return lhs - self._two_torsion_squared * rhs
        return self._get(m) * (
            self._get(m + 2) * self._get(m - 1) ** 2 - self._get(m - 2) * self._get(m + 1) ** 2
        )


MAX_DIVISION_TABLES = 8
"""How many curves keep a shared memo table; the least recently used is dropped first."""

_tables: OrderedDict[WeierstrassCurve, DivisionPolynomials] = OrderedDict()
_tables_lock = threading.Lock()


def division_table(curve: WeierstrassCurve, cache: PsiCache | None = None) -> DivisionPolynomials:
    """The shared memo table of `curve`, attaching `cache` if one is given.

    At most `MAX_DIVISION_TABLES` curves are kept; `clear_division_tables`
    drops them all.
    """
    with _tables_lock:
        table = _tables.get(curve)
        if table is None:
            table = _tables[curve] = DivisionPolynomials(curve, cache)
            while len(_tables) > MAX_DIVISION_TABLES:
                evicted, _ = _tables.popitem(last=False)
                logger.debug("dropping division polynomial table of %s", evicted)
        else:
            _tables.move_to_end(curve)
            if cache is not None:
                table.cache = cache
        return table


def clear_division_tables() -> None:
    """Forget every shared memo table."""
    with _tables_lock:
        _tables.clear()


def division_polynomial(curve: WeierstrassCurve, n: int, *, cache: PsiCache | None = None) -> RatPoly:
    """The x-only division polynomial f_n.

    Odd n gives psi_n; even n gives ``psi_n / (2y + a1*x + a3)``. The leading
    coefficient is n for odd n and n/2 for even n.

    Args:
        curve: The curve.
        n: Positive index.
        cache: Optional disk cache.

    Raises:
        ValueError: If n < 1.
    """
    if n < 1:
        raise ValueError(f"Division polynomial index must be positive, got {n}")
    return division_table(curve, cache)[n]


def primitive_division_poly(curve: WeierstrassCurve, ell: int, k: int, *, cache: PsiCache | None = None) -> RatPoly:
    """Monic polynomial whose roots are the x-coordinates of points of exact order ``ell**k``.

    ``F_ell = monic(psi_ell)`` for odd ell, ``F_2`` is the monic two-torsion
    cubic, and ``F_{ell^k} = monic(psi_{ell^k} / psi_{ell^(k-1)})`` for k >= 2.

    Raises:
        ValueError: If ell is not prime or k < 1.
        InexactDivisionError: If the quotient is not exact.
    """
    _require_prime(ell)
    if k < 1:
        raise ValueError(f"Exponent must be positive, got {k}")
    if k == 1:
        if ell == 2:
            return curve.two_torsion_polynomial().monic()
        return division_polynomial(curve, ell, cache=cache).monic()
    upper = division_polynomial(curve, ell**k, cache=cache)
    lower = division_polynomial(curve, ell ** (k - 1), cache=cache)
    return upper.exact_quotient(lower).monic()


@dataclass(frozen=True)
class XRationalMap:
    """A rational function ``numerator / denominator`` in x, in lowest terms."""

    numerator: RatPoly
    denominator: RatPoly

    def __post_init__(self) -> None:
        common = poly_gcd(self.numerator, self.denominator)
        if common.degree > 0:
            object.__setattr__(self, "numerator", self.numerator // common)
            object.__setattr__(self, "denominator", self.denominator // common)

    def __call__(self, value: Scalar) -> Fraction:
        """Evaluate at a rational x.

        Raises:
            ZeroDivisionError: If `value` is a pole.
        """
        return self.numerator(value) / self.denominator(value)

    @property
    def degree(self) -> int:
        """Degree of the map: the larger of the numerator and denominator degrees."""
        return int(max(self.numerator.degree, self.denominator.degree))


def mult_by_n_x_map(curve: WeierstrassCurve, n: int, *, cache: PsiCache | None = None) -> XRationalMap:
    """The map x(P) -> x(nP) for n >= 2.

    With ``F = 4x^3 + b2*x^2 + 2*b4*x + b6``: odd n gives
    ``(x*f_n^2 - F*f_(n-1)*f_(n+1)) / f_n^2`` and even n gives
    ``(x*F*f_n^2 - f_(n-1)*f_(n+1)) / (F*f_n^2)``.
    """
    if n < 2:
        raise ValueError(f"Multiplier must be at least 2, got {n}")
    x = RatPoly.x()
    two_torsion = curve.two_torsion_polynomial()
    f_n = division_polynomial(curve, n, cache=cache)
    neighbours = division_polynomial(curve, n - 1, cache=cache) * division_polynomial(curve, n + 1, cache=cache)
    if n % 2 == 1:
        return XRationalMap(x * f_n**2 - two_torsion * neighbours, f_n**2)
    return XRationalMap(x * two_torsion * f_n**2 - neighbours, two_torsion * f_n**2)


def mult_by_ell_x_map(curve: WeierstrassCurve, ell: int, *, cache: PsiCache | None = None) -> XRationalMap:
    """The map x(Q) -> x(ell*Q) for a prime ell.

    For ell = 2 this is ``(x^4 - b4*x^2 - 2*b6*x - b8) / (4x^3 + b2*x^2 + 2*b4*x + b6)``.

    Raises:
        ValueError: If ell is not prime.
    """
    _require_prime(ell)
    return mult_by_n_x_map(curve, ell, cache=cache)


def cleared_compose(h: RatPoly, xi: XRationalMap) -> RatPoly:
    """``sum(h_i * num^i * den^(deg h - i))``, the numerator of ``h(xi(x))`` with the denominator cleared.

    A polynomial g with g(x) = 0 exactly when xi(x) is a root of h divides this.
    """
    if h.is_zero:
        return h
    degree = int(h.degree)
    coeffs = h.coeffs
    den_powers = [RatPoly.constant(1)]
    for _ in range(degree):
        den_powers.append(den_powers[-1] * xi.denominator)
    acc = RatPoly.constant(coeffs[degree])
    for i in range(degree - 1, -1, -1):
        acc = acc * xi.numerator + den_powers[degree - i] * coeffs[i]
    return acc


def is_rational_square(value: Fraction) -> bool:
    """Whether a rational number is the square of a rational number."""
    if value < 0:
        return False
    _, numerator_exact = integer_nthroot(value.numerator, 2)
    _, denominator_exact = integer_nthroot(value.denominator, 2)
    return bool(numerator_exact and denominator_exact)


def rational_torsion_points(
    curve: WeierstrassCurve,
    ell: int,
    k: int,
    *,
    cache: PsiCache | None = None,
    settings: FactorSettings | None = None,
) -> list[Fraction]:
    """x-coordinates of rational points of exact order ``ell**k``.

    A rational root x0 of ``F_{ell^k}`` comes from a rational point exactly
    when ``4x0^3 + b2*x0^2 + 2*b4*x0 + b6`` is a rational square.
    """
    primitive = primitive_division_poly(curve, ell, k, cache=cache)
    two_torsion = curve.two_torsion_polynomial()
    roots = [-g.coeffs[0] for g, _ in factor_over_Q(primitive, settings) if g.degree == 1]
    return sorted(x0 for x0 in roots if is_rational_square(two_torsion(x0)))
