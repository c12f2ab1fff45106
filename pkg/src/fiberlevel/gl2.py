"""Matrix groups over Z/ell^m: subgroup specs, orbit trees, coset families and power-map checks.

Matrices act on column vectors. The first basis vector (1, 0) stands for
the point P, the second (0, 1) for its partner Q, so a matrix
``[[a, b], [c, d]]`` sends P to aP + cQ and Q to bP + dQ.

A `SubgroupSpec` describes an open subgroup G of GL2(Z_ell) by its
explicit image G_d at a defining exponent d: above d the group is the full
preimage of G_d, below d it is the image of G_d.

Example:
    ```python
    from fiberlevel.gl2 import SubgroupSpec, detect_level, orbit_tree, power_map_well_defined

    borel = SubgroupSpec.borel(3)
    len(borel.at(2))                 # 972
    detect_level(borel)              # 3
    orbit_tree(borel, 1).degrees_at(1)  # [1, 3]
    power_map_well_defined(borel, 2).holds  # False
    ```
"""

from __future__ import annotations

import itertools
import logging
from collections import deque
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field

from sympy import isprime

from fiberlevel.errors import (
    HypothesisViolatedError,
    InvalidSubgroupError,
    NonInvertibleMatrixError,
    OddPrimeRequiredError,
)
from fiberlevel.fiber_tree import ROOT_ID, FiberTree, PendingNode, assemble_tree

logger = logging.getLogger(__name__)

Entries = tuple[int, int, int, int]
"""Matrix entries (a, b, c, d) of ``[[a, b], [c, d]]``."""

_KNOWN_WITNESSES: dict[tuple[int, int], tuple[Entries, Entries]] = {
    (3, 2): ((10, 1, 18, 4), (10, 6, 18, 13)),
}


def _mul(x: Entries, y: Entries, modulus: int) -> Entries:
    return (
        (x[0] * y[0] + x[1] * y[2]) % modulus,
        (x[0] * y[1] + x[1] * y[3]) % modulus,
        (x[2] * y[0] + x[3] * y[2]) % modulus,
        (x[2] * y[1] + x[3] * y[3]) % modulus,
    )


def _pow(x: Entries, exponent: int, modulus: int) -> Entries:
    result: Entries = (1 % modulus, 0, 0, 1 % modulus)
    base = x
    while exponent:
        if exponent & 1:
            result = _mul(result, base, modulus)
        base = _mul(base, base, modulus)
        exponent >>= 1
    return result


def _reduce(x: Entries, modulus: int) -> Entries:
    return (x[0] % modulus, x[1] % modulus, x[2] % modulus, x[3] % modulus)


def gl2_order(ell: int, m: int) -> int:
    """``|GL2(Z/ell^m)| = ell^(4(m-1)) * (ell^2 - 1) * (ell^2 - ell)``."""
    return ell ** (4 * (m - 1)) * (ell * ell - 1) * (ell * ell - ell)


@dataclass(frozen=True, order=True)
class VectorMod:
    """A vector (x, y) over Z/ell^exponent."""

    ell: int
    exponent: int
    x: int
    y: int

    def __post_init__(self) -> None:
        modulus = self.modulus
        object.__setattr__(self, "x", self.x % modulus)
        object.__setattr__(self, "y", self.y % modulus)

    @property
    def modulus(self) -> int:
        return self.ell**self.exponent

    @property
    def order_exponent(self) -> int:
        """k such that the vector has exact order ell^k."""
        shared = 0
        x, y = self.x, self.y
        while shared < self.exponent and x % self.ell == 0 and y % self.ell == 0:
            x //= self.ell
            y //= self.ell
            shared += 1
        return self.exponent - shared

    def scale(self, k: int) -> VectorMod:
        return VectorMod(self.ell, self.exponent, k * self.x, k * self.y)

    def reduce(self, m: int) -> VectorMod:
        if not 1 <= m <= self.exponent:
            raise ValueError(f"Cannot reduce from exponent {self.exponent} to {m}")
        return VectorMod(self.ell, m, self.x, self.y)

    def __neg__(self) -> VectorMod:
        return self.scale(-1)


@dataclass(frozen=True, order=True)
class MatMod:
    """A 2x2 matrix ``[[a, b], [c, d]]`` over Z/ell^exponent, entries kept reduced.

    Instances order lexicographically by (ell, exponent, a, b, c, d).
    """

    ell: int
    exponent: int
    a: int = 1
    b: int = 0
    c: int = 0
    d: int = 1

    def __post_init__(self) -> None:
        if self.exponent < 1:
            raise ValueError(f"Exponent must be positive, got {self.exponent}")
        modulus = self.modulus
        for name in ("a", "b", "c", "d"):
            object.__setattr__(self, name, getattr(self, name) % modulus)

    @classmethod
    def identity(cls, ell: int, exponent: int) -> MatMod:
        return cls(ell, exponent)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], ell: int, exponent: int) -> MatMod:
        """Build from ``[[a, b], [c, d]]``."""
        (a, b), (c, d) = rows
        return cls(ell, exponent, a, b, c, d)

    @classmethod
    def from_entries(cls, entries: Entries, ell: int, exponent: int) -> MatMod:
        return cls(ell, exponent, *entries)

    @property
    def modulus(self) -> int:
        return self.ell**self.exponent

    @property
    def entries(self) -> Entries:
        return (self.a, self.b, self.c, self.d)

    @property
    def rows(self) -> list[list[int]]:
        return [[self.a, self.b], [self.c, self.d]]

    @property
    def det(self) -> int:
        return (self.a * self.d - self.b * self.c) % self.modulus

    @property
    def is_invertible(self) -> bool:
        """Invertible exactly when the determinant is a unit mod ell."""
        return self.det % self.ell != 0

    def inverse(self) -> MatMod:
        """Matrix inverse.

        Raises:
            NonInvertibleMatrixError: If the determinant is not a unit.
        """
        if not self.is_invertible:
            raise NonInvertibleMatrixError(self)
        inv = pow(self.det, -1, self.modulus)
        return MatMod(self.ell, self.exponent, self.d * inv, -self.b * inv, -self.c * inv, self.a * inv)

    def _check_compatible(self, other: MatMod | VectorMod) -> None:
        if (other.ell, other.exponent) != (self.ell, self.exponent):
            raise ValueError(f"Modulus mismatch: {self.modulus} vs {other.modulus}")

    def __mul__(self, other: MatMod) -> MatMod:
        if not isinstance(other, MatMod):
            return NotImplemented
        self._check_compatible(other)
        return MatMod.from_entries(_mul(self.entries, other.entries, self.modulus), self.ell, self.exponent)

    def apply(self, vector: VectorMod) -> VectorMod:
        """The image of a column vector."""
        self._check_compatible(vector)
        return VectorMod(
            self.ell,
            self.exponent,
            self.a * vector.x + self.b * vector.y,
            self.c * vector.x + self.d * vector.y,
        )

    def __pow__(self, exponent: int) -> MatMod:
        if exponent < 0:
            return self.inverse() ** (-exponent)
        return MatMod.from_entries(_pow(self.entries, exponent, self.modulus), self.ell, self.exponent)

    def __neg__(self) -> MatMod:
        return MatMod(self.ell, self.exponent, -self.a, -self.b, -self.c, -self.d)

    def reduce(self, m: int) -> MatMod:
        """Entrywise reduction to Z/ell^m.

        Raises:
            ValueError: If m is not between 1 and the current exponent.
        """
        if not 1 <= m <= self.exponent:
            raise ValueError(f"Cannot reduce from exponent {self.exponent} to {m}")
        return MatMod(self.ell, m, self.a, self.b, self.c, self.d)

    @property
    def first_column(self) -> VectorMod:
        return VectorMod(self.ell, self.exponent, self.a, self.c)

    def __str__(self) -> str:
        return f"[[{self.a},{self.b}],[{self.c},{self.d}]] mod {self.modulus}"


def reduce(matrix: MatMod, m: int) -> MatMod:
    """Reduce a matrix to Z/ell^m; see `MatMod.reduce`."""
    return matrix.reduce(m)


def close_under_product(
    generators: Iterable[MatMod],
    *,
    ell: int | None = None,
    exponent: int | None = None,
) -> frozenset[MatMod]:
    """The subgroup generated by `generators`, by breadth-first closure.

    `ell` and `exponent` are only needed when there are no generators.

    Raises:
        NonInvertibleMatrixError: If a generator is not invertible.
        ValueError: If the generators do not share a modulus, or the modulus is unknown.
    """
    gens = list(generators)
    for g in gens:
        if not g.is_invertible:
            raise NonInvertibleMatrixError(g)
    if gens:
        ell, exponent = gens[0].ell, gens[0].exponent
        if any((g.ell, g.exponent) != (ell, exponent) for g in gens):
            raise ValueError("Generators must share a modulus")
    if ell is None or exponent is None:
        raise ValueError("ell and exponent are required when there are no generators")
    modulus = ell**exponent
    identity: Entries = (1 % modulus, 0, 0, 1 % modulus)
    gen_entries = [g.entries for g in gens]
    seen = {identity}
    queue = deque([identity])
    while queue:
        current = queue.popleft()
        for g in gen_entries:
            product = _mul(current, g, modulus)
            if product not in seen:
                seen.add(product)
                queue.append(product)
    return frozenset(MatMod.from_entries(e, ell, exponent) for e in seen)


@dataclass(frozen=True)
class SubgroupSpec:
    """An open subgroup of GL2(Z_ell), given by its image at a defining exponent.

    Raises:
        InvalidSubgroupError: If the elements are not an inverse-closed set
            of invertible matrices at modulus ell^d containing the identity.
    """

    ell: int
    """The prime."""

    defining_exponent: int
    """Exponent d; the group is the full preimage of its image mod ell^d."""

    elements: frozenset[MatMod]
    """The image G_d, explicitly."""

    name: str | None = None
    """Optional label, e.g. a registry name."""

    _entries: frozenset[Entries] = field(init=False, repr=False, compare=False)
    _images: dict[int, frozenset[Entries]] = field(init=False, repr=False, compare=False, default_factory=dict)

    def __post_init__(self) -> None:
        if not isprime(self.ell):
            raise InvalidSubgroupError(f"{self.ell} is not prime")
        if self.defining_exponent < 1:
            raise InvalidSubgroupError(f"defining exponent must be positive, got {self.defining_exponent}")
        for element in self.elements:
            if (element.ell, element.exponent) != (self.ell, self.defining_exponent):
                raise InvalidSubgroupError(f"{element} is not at modulus {self.ell}^{self.defining_exponent}")
            if not element.is_invertible:
                raise InvalidSubgroupError(f"{element} is not invertible")
        entries = frozenset(e.entries for e in self.elements)
        if (1 % self.modulus, 0, 0, 1 % self.modulus) not in entries:
            raise InvalidSubgroupError("identity is missing")
        for element in self.elements:
            if element.inverse().entries not in entries:
                raise InvalidSubgroupError(f"inverse of {element} is missing")
        object.__setattr__(self, "_entries", entries)

    @property
    def modulus(self) -> int:
        return self.ell**self.defining_exponent

    @classmethod
    def from_generators(
        cls, ell: int, defining_exponent: int, generators: Iterable[MatMod], name: str | None = None
    ) -> SubgroupSpec:
        """The subgroup whose image at ell^d is generated by `generators`."""
        elements = close_under_product(generators, ell=ell, exponent=defining_exponent)
        return cls(ell, defining_exponent, elements, name)

    @classmethod
    def from_elements(
        cls, ell: int, defining_exponent: int, elements: Iterable[MatMod], name: str | None = None
    ) -> SubgroupSpec:
        """The subgroup with explicit image `elements`, checked to be closed under products."""
        given = frozenset(elements)
        spec = cls(ell, defining_exponent, given, name)
        modulus = spec.modulus
        for x in spec._entries:
            for y in spec._entries:
                if _mul(x, y, modulus) not in spec._entries:
                    raise InvalidSubgroupError("elements are not closed under products")
        return spec

    @classmethod
    def full(cls, ell: int, defining_exponent: int = 1) -> SubgroupSpec:
        """All of GL2(Z_ell)."""
        modulus = ell**defining_exponent
        elements = frozenset(
            MatMod(ell, defining_exponent, a, b, c, d)
            for a, b, c, d in itertools.product(range(modulus), repeat=4)
            if (a * d - b * c) % ell != 0
        )
        return cls(ell, defining_exponent, elements, f"full-gl2-{ell}")

    @classmethod
    def trivial(cls, ell: int, defining_exponent: int = 1) -> SubgroupSpec:
        """The kernel of reduction mod ell^d."""
        return cls(ell, defining_exponent, frozenset({MatMod.identity(ell, defining_exponent)}), "trivial")

    @classmethod
    def borel(cls, ell: int, defining_exponent: int = 1) -> SubgroupSpec:
        """Preimage of the upper-triangular matrices mod ell^d."""
        modulus = ell**defining_exponent
        elements = frozenset(
            MatMod(ell, defining_exponent, a, b, 0, d)
            for a, b, d in itertools.product(range(modulus), repeat=3)
            if a % ell and d % ell
        )
        return cls(ell, defining_exponent, elements, f"borel-{ell}")

    def image(self, m: int) -> frozenset[Entries]:
        """Entries of the image mod ell^m for m <= d."""
        if m >= self.defining_exponent:
            raise ValueError(f"image() is for exponents below {self.defining_exponent}")
        cached = self._images.get(m)
        if cached is None:
            cached = self._images[m] = frozenset(_reduce(e, self.ell**m) for e in self._entries)
        return cached

    def contains_entries(self, entries: Entries, m: int) -> bool:
        """Membership of a matrix given by its entries mod ell^m."""
        if m >= self.defining_exponent:
            return _reduce(entries, self.modulus) in self._entries
        return _reduce(entries, self.ell**m) in self.image(m)

    def __contains__(self, matrix: object) -> bool:
        if not isinstance(matrix, MatMod) or matrix.ell != self.ell:
            return False
        return self.contains_entries(matrix.entries, matrix.exponent)

    def order_at(self, m: int) -> int:
        """``|G_m|``."""
        if m >= self.defining_exponent:
            return self.ell ** (4 * (m - self.defining_exponent)) * len(self._entries)
        return len(self.image(m))

    def at(self, m: int) -> GroupAtLevel:
        """The group G_m; see `elements_at`."""
        if m < 1:
            raise ValueError(f"Exponent must be positive, got {m}")
        return GroupAtLevel(self, m)


@dataclass(frozen=True)
class GroupAtLevel:
    """G_m as a membership predicate with exact size and lazy enumeration.

    Iteration yields the image set in sorted order for m <= d; above d it
    walks the sorted elements of G_d and, for each, its lifts in
    lexicographic order of the offsets.
    """

    spec: SubgroupSpec
    exponent: int

    @property
    def modulus(self) -> int:
        return self.spec.ell**self.exponent

    def __contains__(self, matrix: object) -> bool:
        if not isinstance(matrix, MatMod) or (matrix.ell, matrix.exponent) != (self.spec.ell, self.exponent):
            return False
        return self.spec.contains_entries(matrix.entries, self.exponent)

    def __len__(self) -> int:
        return self.spec.order_at(self.exponent)

    def iter_entries(self) -> Iterator[Entries]:
        spec, m = self.spec, self.exponent
        if m < spec.defining_exponent:
            yield from sorted(spec.image(m))
            return
        step = spec.modulus
        offsets = range(spec.ell ** (m - spec.defining_exponent))
        for a, b, c, d in sorted(spec._entries):
            for u, v, s, t in itertools.product(offsets, repeat=4):
                yield (a + step * u, b + step * v, c + step * s, d + step * t)

    def __iter__(self) -> Iterator[MatMod]:
        for entries in self.iter_entries():
            yield MatMod.from_entries(entries, self.spec.ell, self.exponent)

    def explicit(self) -> frozenset[MatMod]:
        """Materialise the whole set."""
        return frozenset(self)


def elements_at(spec: SubgroupSpec, m: int) -> GroupAtLevel:
    """G_m: the image for m <= d, the full preimage above d."""
    return spec.at(m)


def index_sequence(spec: SubgroupSpec, m_max: int) -> list[int]:
    """``[i_1, ..., i_{m_max}]`` with ``i_m = |GL2(Z/ell^m)| / |G_m|``."""
    if m_max < 1:
        raise ValueError(f"m_max must be positive, got {m_max}")
    return [gl2_order(spec.ell, m) // spec.order_at(m) for m in range(1, m_max + 1)]


def detect_level(spec: SubgroupSpec, m_max: int | None = None) -> int | None:
    """The level ell^n read off the first stabilisation ``i_{n+1} = i_n``.

    n starts at 1, or at 2 when ell = 2. Returns None when no stabilisation
    is seen up to `m_max` (default: one past the defining exponent, and at least 3).
    """
    if m_max is None:
        m_max = max(spec.defining_exponent, 2) + 1
    indices = index_sequence(spec, m_max)
    first = 2 if spec.ell == 2 else 1
    for n in range(first, m_max):
        if indices[n] == indices[n - 1]:
            logger.info("index sequence %s stabilises at exponent %d", indices, n)
            return spec.ell**n
    logger.info("index sequence %s does not stabilise up to exponent %d", indices, m_max)
    return None


def _exact_order_vectors(ell: int, m: int) -> list[tuple[int, int]]:
    modulus = ell**m
    return [(x, y) for x in range(modulus) for y in range(modulus) if x % ell or y % ell]


def orbit_tree(spec: SubgroupSpec, depth: int) -> FiberTree:
    """The tree of orbits of ``<G_m, -I>`` on vectors of exact order ell^m, m <= depth.

    An orbit of size s has degree s/2 when ell^m >= 3 and s when ell^m = 2;
    the parent of the orbit of v is the orbit of ell*v, which in the
    compatible bases is v reduced mod ell^(m-1).
    """
    if depth < 0:
        raise ValueError(f"Depth must be nonnegative, got {depth}")
    ell = spec.ell
    pending: dict[str, PendingNode] = {ROOT_ID: PendingNode(level_exponent=0, degree=1)}
    previous: dict[tuple[int, int], str] = {}
    for m in range(1, depth + 1):
        modulus = ell**m
        group = list(spec.at(m).iter_entries())
        assignment: dict[tuple[int, int], int] = {}
        orbits: list[list[tuple[int, int]]] = []
        for v in _exact_order_vectors(ell, m):
            if v in assignment:
                continue
            orbit: set[tuple[int, int]] = set()
            for a, b, c, d in group:
                w = ((a * v[0] + b * v[1]) % modulus, (c * v[0] + d * v[1]) % modulus)
                orbit.add(w)
                orbit.add((-w[0] % modulus, -w[1] % modulus))
            for w in orbit:
                assignment[w] = len(orbits)
            orbits.append(sorted(orbit))

        halve = modulus >= 3
        ranked = sorted(orbits, key=lambda o: (len(o) // 2 if halve else len(o), o[0]))
        current: dict[tuple[int, int], str] = {}
        for index, orbit in enumerate(ranked):
            node_id = f"{m}:{index}"
            lower = ell ** (m - 1)
            parent = ROOT_ID if m == 1 else previous[(orbit[0][0] % lower, orbit[0][1] % lower)]
            pending[node_id] = PendingNode(
                level_exponent=m,
                degree=len(orbit) // 2 if halve else len(orbit),
                parent=parent,
                representative=orbit[0],
            )
            for w in orbit:
                current[w] = node_id
        logger.info("orbit level %d: %d orbits", m, len(orbits))
        previous = current
    return assemble_tree(ell, depth, pending, certified_exponent=spec.defining_exponent, source="orbits")


@dataclass(frozen=True)
class CosetFamily:
    """The fixer group Z_m, the congruence set W_m and the classes H_m of W_m modulo Z_m."""

    ell: int
    exponent: int

    z: frozenset[MatMod]
    """``[[1, c], [0, d]]`` in G_m: the elements fixing the first basis vector."""

    w: frozenset[MatMod]
    """``[[1 + ell^(m-1) a, c], [ell^(m-1) b, 1 + d]]`` in G_m."""

    h: tuple[frozenset[MatMod], ...]
    """Classes ``alpha * Z_m`` for alpha in W_m, ordered by smallest member."""


def _fixer_entries(spec: SubgroupSpec, m: int) -> list[Entries]:
    modulus = spec.ell**m
    return [
        (1 % modulus, b, 0, d)
        for b in range(modulus)
        for d in range(modulus)
        if d % spec.ell and spec.contains_entries((1, b, 0, d), m)
    ]


def _congruence_entries(spec: SubgroupSpec, m: int) -> Iterator[Entries]:
    """W-shaped entries of G_m in lexicographic parameter order."""
    ell = spec.ell
    modulus = ell**m
    step = ell ** (m - 1)
    for s, t in itertools.product(range(ell), repeat=2):
        for b, d in itertools.product(range(modulus), repeat=2):
            entries = ((1 + step * s) % modulus, b, (step * t) % modulus, d)
            if spec.contains_entries(entries, m):
                yield entries


def coset_family(spec: SubgroupSpec, m: int) -> CosetFamily:
    """Z_m, W_m and H_m for G at exponent m >= 1 (at m = 1, W_1 is all of G_1).

    For alpha, beta in G, ``beta^-1 * alpha`` lies in Z_m exactly when both
    send the first basis vector to the same place, so the classes of H_m are
    the W_m elements grouped by first column.
    """
    if m < 1:
        raise ValueError(f"Exponent must be positive, got {m}")
    ell = spec.ell
    z = frozenset(MatMod.from_entries(e, ell, m) for e in _fixer_entries(spec, m))
    classes: dict[tuple[int, int], set[MatMod]] = {}
    for entries in _congruence_entries(spec, m):
        classes.setdefault((entries[0], entries[2]), set()).add(MatMod.from_entries(entries, ell, m))
    w = frozenset(itertools.chain.from_iterable(classes.values()))
    h = tuple(sorted((frozenset(c) for c in classes.values()), key=min))
    return CosetFamily(ell=ell, exponent=m, z=z, w=w, h=h)


@dataclass(frozen=True)
class PowerMapVerdict:
    """Outcome of a power-map check."""

    holds: bool
    """Whether the property holds."""

    witness: tuple[MatMod, MatMod] | None = None
    """(A, B) with ``B^-1 A`` in Z_{n+1} but ``(B^ell)^-1 A^ell`` outside Z_{n+2}."""

    def __bool__(self) -> bool:
        return self.holds


def _lifted_power_keys(spec: SubgroupSpec, n: int) -> Iterator[tuple[Entries, tuple[int, int], tuple[int, int]]]:
    """Every A in G_{n+2} reducing into W_{n+1}, with its H_{n+1} and H_{n+2} class keys.

    The class of A mod ell^(n+1) is its first column mod ell^(n+1); the
    class of A^ell mod ell^(n+2) is the first column of A^ell.
    """
    ell = spec.ell
    low, high = ell ** (n + 1), ell ** (n + 2)
    for base in _congruence_entries(spec, n + 1):
        key_low = (base[0], base[2])
        for u in itertools.product(range(ell), repeat=4):
            lifted: Entries = (
                base[0] + low * u[0],
                base[1] + low * u[1],
                base[2] + low * u[2],
                base[3] + low * u[3],
            )
            if not spec.contains_entries(lifted, n + 2):
                continue
            power = _pow(lifted, ell, high)
            yield lifted, key_low, (power[0], power[2])


def _known_witness(spec: SubgroupSpec, n: int) -> tuple[MatMod, MatMod] | None:
    known = _KNOWN_WITNESSES.get((spec.ell, n))
    if known is None:
        return None
    ell = spec.ell
    low, high = ell ** (n + 1), ell ** (n + 2)
    a_entries, b_entries = (_reduce(e, high) for e in known)
    for entries in (a_entries, b_entries):
        if not spec.contains_entries(entries, n + 2):
            return None
        if entries[0] % ell**n != 1 % ell**n or entries[2] % ell**n != 0:
            return None
    if (a_entries[0] % low, a_entries[2] % low) != (b_entries[0] % low, b_entries[2] % low):
        return None
    a_power, b_power = _pow(a_entries, ell, high), _pow(b_entries, ell, high)
    if (a_power[0], a_power[2]) == (b_power[0], b_power[2]):
        return None
    return MatMod.from_entries(a_entries, ell, n + 2), MatMod.from_entries(b_entries, ell, n + 2)


def power_map_well_defined(spec: SubgroupSpec, n: int) -> PowerMapVerdict:
    """Whether ``A -> A^ell`` induces a map from H_{n+1} to H_{n+2}.

    Fails when some A, B in G_{n+2} reducing into W_{n+1} lie in the same
    H_{n+1} class while A^ell and B^ell lie in different H_{n+2} classes.
    A recorded witness is tried first; the search then runs in a fixed
    order and stops at the first failure.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    witness = _known_witness(spec, n)
    if witness is not None:
        logger.info("recorded witness applies at ell=%d, n=%d", spec.ell, n)
        return PowerMapVerdict(False, witness)
    first_seen: dict[tuple[int, int], tuple[Entries, tuple[int, int]]] = {}
    for entries, key_low, key_high in _lifted_power_keys(spec, n):
        seen = first_seen.setdefault(key_low, (entries, key_high))
        if seen[1] != key_high:
            a = MatMod.from_entries(entries, spec.ell, n + 2)
            b = MatMod.from_entries(seen[0], spec.ell, n + 2)
            return PowerMapVerdict(False, (a, b))
    return PowerMapVerdict(True)


def power_map_injective(spec: SubgroupSpec, n: int) -> bool:
    """Whether distinct H_{n+1} classes have distinct ell-th powers in H_{n+2}.

    Raises:
        HypothesisViolatedError: If Z_{n+1} is not trivial.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    fixer = _fixer_entries(spec, n + 1)
    if len(fixer) != 1:
        raise HypothesisViolatedError(n, len(fixer))
    preimage: dict[tuple[int, int], tuple[int, int]] = {}
    for _, key_low, key_high in _lifted_power_keys(spec, n):
        if preimage.setdefault(key_high, key_low) != key_low:
            return False
    return True


def raising_lemma_failures(ell: int, n: int) -> list[tuple[int, int, int, int, int, int]]:
    """Parameters (a, b, j, k, s, t) for which the raising shape fails.

    ``A = [[1 + ell^n a + ell^(n+1) s, ell^(n+1) j], [ell^n b + ell^(n+1) t, 1 + ell^(n+1) k]]``
    should satisfy ``A^ell = [[1 + ell^(n+1) a, 0], [ell^(n+1) b, 1]]`` mod
    ell^(n+2). All parameters range over 0..ell-1. Any prime is accepted.
    """
    if not isprime(ell):
        raise ValueError(f"Expected a prime, got {ell}")
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    low, mid, high = ell**n, ell ** (n + 1), ell ** (n + 2)
    failures = []
    for a, b, j, k, s, t in itertools.product(range(ell), repeat=6):
        matrix: Entries = _reduce((1 + low * a + mid * s, mid * j, low * b + mid * t, 1 + mid * k), high)
        expected = _reduce((1 + mid * a, 0, mid * b, 1), high)
        if _pow(matrix, ell, high) != expected:
            failures.append((a, b, j, k, s, t))
    return failures


def verify_raising_lemma(ell: int, n: int) -> bool:
    """Exhaustively check the raising shape for an odd prime.

    Raises:
        OddPrimeRequiredError: If ell is 2.
    """
    if ell == 2:
        raise OddPrimeRequiredError(ell)
    failures = raising_lemma_failures(ell, n)
    if failures:
        logger.warning("raising shape fails for ell=%d, n=%d at %s", ell, n, failures[0])
    return not failures


def hypothesis_check(spec: SubgroupSpec, n: int) -> bool:
    """Whether every M in G_{n+1} fixing (1, 0) mod ell^n fixes (0, 1) mod ell^(n+1)."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    ell = spec.ell
    modulus = ell ** (n + 1)
    step = ell**n
    for s, t in itertools.product(range(ell), repeat=2):
        for b, d in itertools.product(range(modulus), repeat=2):
            entries = ((1 + step * s) % modulus, b, step * t, d)
            if spec.contains_entries(entries, n + 1) and (b, d) != (0, 1):
                return False
    return True
