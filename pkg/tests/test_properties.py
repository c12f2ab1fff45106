"""Property-based tests."""

from collections import Counter
from fractions import Fraction

from hypothesis import assume, given, settings
from hypothesis import strategies as st
from sympy import Poly, Rational, factor_list, symbols

from fiberlevel.exact_arith import RatPoly, factor_over_Q
from fiberlevel.fiber_tree import map_degree
from fiberlevel.gl2 import MatMod, VectorMod

small_ints = st.integers(min_value=-20, max_value=20)


@st.composite
def matrices(draw: st.DrawFn) -> MatMod:
    ell = draw(st.sampled_from([2, 3, 5]))
    exponent = draw(st.integers(min_value=1, max_value=3))
    a, b, c, d = draw(st.lists(st.integers(min_value=0, max_value=10**4), min_size=4, max_size=4))
    return MatMod(ell, exponent, a, b, c, d)


@st.composite
def polynomials(draw: st.DrawFn, max_degree: int = 6) -> RatPoly:
    coeffs = draw(st.lists(small_ints, min_size=1, max_size=max_degree + 1))
    poly = RatPoly.from_coeffs(coeffs)
    assume(not poly.is_zero)
    return poly


@st.composite
def products(draw: st.DrawFn) -> RatPoly:
    """Products of up to four small polynomials, degree at most 20, often with repeated factors."""
    parts = draw(st.lists(polynomials(max_degree=5), min_size=1, max_size=4))
    if draw(st.booleans()):
        parts.append(parts[0])
        parts = parts[:4]
    product = RatPoly.constant(1)
    for part in parts:
        product = product * part
    return product


def sympy_factors(poly: RatPoly) -> Counter[tuple[RatPoly, int]]:
    x = symbols("x")
    expr = sum(Rational(c.numerator, c.denominator) * x**i for i, c in enumerate(poly.coeffs))
    _, factors = factor_list(expr, x)
    found: Counter[tuple[RatPoly, int]] = Counter()
    for f, m in factors:
        coeffs = reversed(Poly(f, x, domain="QQ").monic().all_coeffs())
        found[(RatPoly.from_coeffs([Fraction(int(c.p), int(c.q)) for c in coeffs]), int(m))] += 1
    return found


class TestMapDegreeProperties:
    @given(
        st.integers(min_value=1, max_value=30),
        st.integers(min_value=1, max_value=30),
        st.integers(min_value=1, max_value=30),
    )
    def test_composition_multiplies(self, a: int, b: int, c: int) -> None:
        assert map_degree(a, b * c) == map_degree(a, b) * map_degree(a * b, c)

    @given(st.integers(min_value=1, max_value=50), st.integers(min_value=1, max_value=50))
    def test_is_a_positive_integer(self, a: int, b: int) -> None:
        degree = map_degree(a, b)
        assert degree.denominator == 1
        assert degree >= 1


class TestMatModProperties:
    @given(matrices())
    def test_inverse(self, m: MatMod) -> None:
        assume(m.is_invertible)
        identity = MatMod.identity(m.ell, m.exponent)
        assert m * m.inverse() == identity
        assert m.inverse() * m == identity

    @given(matrices(), st.data())
    def test_det_is_multiplicative(self, m: MatMod, data: st.DataObject) -> None:
        entries = data.draw(st.lists(st.integers(min_value=0, max_value=10**4), min_size=4, max_size=4))
        other = MatMod(m.ell, m.exponent, *entries)
        assert (m * other).det == m.det * other.det % m.modulus

    @given(matrices(), st.integers(min_value=1, max_value=3))
    def test_reduction_is_a_homomorphism(self, m: MatMod, k: int) -> None:
        assume(k <= m.exponent)
        assert (m * m).reduce(k) == m.reduce(k) * m.reduce(k)

    @given(matrices())
    def test_power_matches_repeated_product(self, m: MatMod) -> None:
        assert m**3 == m * m * m


class TestVectorModProperties:
    @given(st.sampled_from([2, 3, 5]), st.integers(min_value=1, max_value=3), small_ints, small_ints)
    def test_order_exponent_bounds(self, ell: int, exponent: int, x: int, y: int) -> None:
        v = VectorMod(ell, exponent, x, y)
        k = v.order_exponent
        assert 0 <= k <= exponent
        assert v.scale(ell**k) == VectorMod(ell, exponent, 0, 0)


class TestPolynomialProperties:
    @given(polynomials(), polynomials())
    def test_divrem_identity(self, f: RatPoly, g: RatPoly) -> None:
        q, r = f.divrem(g)
        assert q * g + r == f
        assert r.is_zero or r.degree < g.degree

    @settings(deadline=None, max_examples=50)
    @given(polynomials())
    def test_factorization_expands_back(self, f: RatPoly) -> None:
        factorization = factor_over_Q(f)
        assert factorization.expand() == f
        assert all(g.leading_coefficient == 1 for g, _ in factorization)

    @settings(deadline=None, max_examples=30)
    @given(polynomials(), polynomials())
    def test_factor_degrees_add_under_products(self, f: RatPoly, g: RatPoly) -> None:
        left = factor_over_Q(f).degrees() + factor_over_Q(g).degrees()
        assert sorted(left) == sorted(factor_over_Q(f * g).degrees())

    @given(polynomials(), st.fractions(max_denominator=10))
    def test_scaling_keeps_roots(self, f: RatPoly, c: Fraction) -> None:
        assume(c != 0)
        assert (f * c).monic() == f.monic()

    @settings(deadline=None, max_examples=25)
    @given(products())
    def test_factors_match_sympy(self, f: RatPoly) -> None:
        assume(f.degree >= 1)
        assert Counter(factor_over_Q(f).factors) == sympy_factors(f)

    @settings(deadline=None, max_examples=10)
    @given(polynomials(max_degree=20))
    def test_dense_factors_match_sympy(self, f: RatPoly) -> None:
        assume(f.degree >= 1)
        assert Counter(factor_over_Q(f).factors) == sympy_factors(f)
