"""The truncated tree of closed points over a curve, and fiber levels.

Level k of the tree holds the closed points on X1(ell^k) lying over j(E),
one per irreducible factor of the primitive division polynomial
``F_{ell^k}``. A level-k point is a direct lift of the level-(k-1) point
whose factor vanishes on its image under multiplication by ell.

Example:
    ```python
    from fiberlevel import build_tree, curve_from_ainvs, fiber_levels

    curve = curve_from_ainvs(0, 0, 0, 21, 26)
    tree = build_tree(curve, 3, 2, certified_exponent=2)
    tree.degrees_at(2)                            # [3, 3, 3, 9, 18]
    sorted(f.level for f in fiber_levels(tree))  # [3, 3, 9, 9, 9]
    ```
"""

from __future__ import annotations

import logging
from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING, Literal

from sympy import isprime, primefactors

from fiberlevel.elliptic import (
    WeierstrassCurve,
    XRationalMap,
    cleared_compose,
    is_rational_square,
    mult_by_ell_x_map,
    mult_by_n_x_map,
    primitive_division_poly,
)
from fiberlevel.errors import DegreeSumViolationError, LinkageError, UncertifiedError, UnknownNodeError
from fiberlevel.exact_arith import FactorSettings, RatPoly, factor_over_Q, poly_gcd

if TYPE_CHECKING:
    from fiberlevel.cache import PsiCache

logger = logging.getLogger(__name__)

ROOT_ID = "0:0"
"""Id of the root node, the point j(E) on X1(1)."""

Certification = Literal["adic", "independence"]


def map_degree(a: int, b: int) -> Fraction:
    """Degree of the natural map X1(ab) -> X1(a) sending (E, P) to (E, bP).

    ``c * b^2 * prod(1 - 1/p^2)`` over primes p dividing b but not a, where
    c is 1/2 when a <= 2 and ab > 2, else 1.

    Example:
        ```python
        map_degree(3, 3)  # Fraction(9, 1)
        map_degree(1, 2)  # Fraction(3, 1)
        map_degree(2, 2)  # Fraction(2, 1)
        ```
    """
    if a < 1 or b < 1:
        raise ValueError(f"map_degree needs positive integers, got ({a}, {b})")
    result = Fraction(b * b)
    for p in primefactors(b):
        if a % p != 0:
            result *= 1 - Fraction(1, p * p)
    if a <= 2 and a * b > 2:
        result /= 2
    return result


@dataclass(frozen=True)
class FiberNode:
    """A closed point of the tree."""

    id: str
    """Identifier ``"k:i"``: level exponent k, index i in the sorted level."""

    level_exponent: int
    """The point lies on X1(ell^k)."""

    degree: int
    """Degree of the closed point."""

    factor: RatPoly | None = None
    """Monic irreducible factor of F_{ell^k}; None for the root and for orbit nodes."""

    parent: str | None = None
    """Id of the parent, None for the root."""

    children: tuple[str, ...] = ()
    """Ids of the direct lifts, in id order."""

    representative: tuple[int, int] | None = None
    """Smallest vector of the orbit, for trees built from a matrix group."""


@dataclass(frozen=True)
class FiberTree:
    """The tree truncated at `depth`.

    Nodes are immutable and the tree is safe to share between threads.
    """

    ell: int
    """The prime."""

    depth: int
    """Deepest level exponent present."""

    nodes: Mapping[str, FiberNode]
    """All nodes keyed by id, in level-then-index order."""

    curve: WeierstrassCurve | None = None
    """The curve, or None for a tree built from a matrix group."""

    certified_exponent: int | None = None
    """Exponent d of the ell-adic level ell^d, when known."""

    source: Literal["division", "orbits"] = "division"
    """How the tree was built."""

    rational_points: tuple[tuple[int, Fraction], ...] = field(default_factory=tuple)
    """(k, x) for every rational point of exact order ell^k, k <= depth."""

    @property
    def root(self) -> FiberNode:
        return self.nodes[ROOT_ID]

    @property
    def is_certified(self) -> bool:
        """Whether the supplied adic exponent is reached by the depth."""
        return self.certified_exponent is not None and self.depth >= self.certified_exponent

    def node(self, node_id: str) -> FiberNode:
        """Look up a node.

        Raises:
            UnknownNodeError: If the id is not in the tree.
        """
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownNodeError(node_id) from None

    def level(self, k: int) -> list[FiberNode]:
        """Nodes at level exponent k in id order."""
        return [n for n in self.nodes.values() if n.level_exponent == k]

    def degrees_at(self, k: int) -> list[int]:
        """Sorted degree multiset at level exponent k."""
        return sorted(n.degree for n in self.level(k))

    def children_of(self, node_id: str) -> list[FiberNode]:
        return [self.nodes[c] for c in self.node(node_id).children]

    def path_to(self, node_id: str) -> tuple[str, ...]:
        """Ids from the root down to `node_id`."""
        path = [node_id]
        current = self.node(node_id)
        while current.parent is not None:
            path.append(current.parent)
            current = self.nodes[current.parent]
        return tuple(reversed(path))

    def leaves(self) -> list[FiberNode]:
        """Nodes at the deepest level."""
        return self.level(self.depth)

    def __iter__(self) -> Iterator[FiberNode]:
        return iter(self.nodes.values())

    def __len__(self) -> int:
        return len(self.nodes)

    def export(self, fmt: Literal["json", "dot"] = "json") -> bytes:
        """Serialize the tree; see `fiberlevel.serialization.export`."""
        from fiberlevel.serialization import export

        return export(self, fmt)


@dataclass(frozen=True)
class TreeSettings:
    """How `build_tree` links levels. The resulting tree does not depend on these."""

    split_by_parent: bool = True
    """Split F_{ell^k} by gcd with each parent's cleared composition before factoring.
    When False, factor F_{ell^k} whole and search each factor's parent."""

    factor: FactorSettings = field(default_factory=FactorSettings)
    """Settings passed to the factoriser."""


@dataclass
class PendingNode:
    level_exponent: int
    degree: int
    factor: RatPoly | None = None
    parent: str | None = None
    representative: tuple[int, int] | None = None


def assemble_tree(
    ell: int,
    depth: int,
    pending: Mapping[str, PendingNode],
    *,
    curve: WeierstrassCurve | None = None,
    certified_exponent: int | None = None,
    source: Literal["division", "orbits"] = "division",
    rational_points: Sequence[tuple[int, Fraction]] = (),
) -> FiberTree:
    """Freeze pending nodes into a tree, filling in children and checking degree sums."""
    children: dict[str, list[str]] = {node_id: [] for node_id in pending}
    for node_id, record in pending.items():
        if record.parent is not None:
            children[record.parent].append(node_id)
    ordered = sorted(pending, key=_id_key)
    nodes = {
        node_id: FiberNode(
            id=node_id,
            level_exponent=pending[node_id].level_exponent,
            degree=pending[node_id].degree,
            factor=pending[node_id].factor,
            parent=pending[node_id].parent,
            children=tuple(sorted(children[node_id], key=_id_key)),
            representative=pending[node_id].representative,
        )
        for node_id in ordered
    }
    tree = FiberTree(
        ell=ell,
        depth=depth,
        nodes=nodes,
        curve=curve,
        certified_exponent=certified_exponent,
        source=source,
        rational_points=tuple(rational_points),
    )
    verify_degree_sums(tree)
    return tree


def _id_key(node_id: str) -> tuple[int, int]:
    level, index = node_id.split(":")
    return int(level), int(index)


def verify_degree_sums(tree: FiberTree) -> None:
    """Check that the children of every non-leaf node carry ``map_degree(ell^k, ell)`` times its degree.

    Raises:
        DegreeSumViolationError: At the first node where the identity fails.
    """
    for node in tree:
        if node.level_exponent >= tree.depth:
            continue
        expected = map_degree(tree.ell**node.level_exponent, tree.ell) * node.degree
        actual = sum(child.degree for child in tree.children_of(node.id))
        if actual != expected:
            raise DegreeSumViolationError(node.id, int(expected), actual)


def _validate(ell: int, depth: int, certified_exponent: int | None) -> None:
    if not isprime(ell):
        raise ValueError(f"Expected a prime, got {ell}")
    if depth < 0:
        raise ValueError(f"Depth must be nonnegative, got {depth}")
    if certified_exponent is not None and certified_exponent < 0:
        raise ValueError(f"Adic level exponent must be nonnegative, got {certified_exponent}")


def _irreducible_factors(poly: RatPoly, level: int, settings: FactorSettings) -> list[RatPoly]:
    factors = []
    for g, multiplicity in factor_over_Q(poly, settings):
        if multiplicity != 1:
            raise LinkageError(level, int(g.degree), multiplicity)
        factors.append(g)
    return factors


def _split_by_parent(
    primitive: RatPoly,
    parents: Sequence[tuple[str, RatPoly]],
    xi: XRationalMap,
    level: int,
    ell: int,
    settings: FactorSettings,
) -> list[tuple[RatPoly, str]]:
    growth = map_degree(ell ** (level - 1), ell)
    linked: list[tuple[RatPoly, str]] = []
    product = RatPoly.constant(1)
    for parent_id, h in sorted(parents, key=lambda p: (-p[1].degree, _id_key(p[0]))):
        piece = poly_gcd(primitive, cleared_compose(h, xi))
        expected = growth * int(h.degree)
        if piece.degree != expected:
            raise DegreeSumViolationError(parent_id, int(expected), int(piece.degree))
        product = product * piece
        linked.extend((g, parent_id) for g in _irreducible_factors(piece, level, settings))
    if product != primitive:
        # overlapping pieces: the direct search names the factor with several parents
        return _link_directly(primitive, parents, xi, level, settings)
    return linked


def _link_directly(
    primitive: RatPoly,
    parents: Sequence[tuple[str, RatPoly]],
    xi: XRationalMap,
    level: int,
    settings: FactorSettings,
) -> list[tuple[RatPoly, str]]:
    ordered = sorted(parents, key=lambda p: (-p[1].degree, _id_key(p[0])))
    composed = [(parent_id, cleared_compose(h, xi)) for parent_id, h in ordered]
    linked: list[tuple[RatPoly, str]] = []
    for g in _irreducible_factors(primitive, level, settings):
        owners = [parent_id for parent_id, c in composed if g.divides(c)]
        if len(owners) != 1:
            raise LinkageError(level, int(g.degree), len(owners))
        linked.append((g, owners[0]))
    return linked


def build_tree(
    curve: WeierstrassCurve,
    ell: int,
    depth: int,
    certified_exponent: int | None = None,
    *,
    cache: PsiCache | None = None,
    settings: TreeSettings | None = None,
) -> FiberTree:
    """Build the tree of closed points over `curve` down to X1(ell^depth).

    Args:
        curve: A curve with rational j-invariant, assumed without CM.
        ell: The prime.
        depth: Deepest level exponent; 0 gives the root alone.
        certified_exponent: Exponent d of the ell-adic level ell^d, if known.
        cache: Optional disk cache for division polynomials.
        settings: Linkage and factorisation settings.

    Returns:
        The tree, with the degree-sum identity verified at every node.

    Raises:
        ValueError: If ell is not prime or depth is negative.
        LinkageError: If a factor does not have exactly one parent.
        DegreeSumViolationError: If the degree-sum identity fails.
    """
    _validate(ell, depth, certified_exponent)
    settings = settings or TreeSettings()
    pending: dict[str, PendingNode] = {ROOT_ID: PendingNode(level_exponent=0, degree=1)}
    rational_points: list[tuple[int, Fraction]] = []
    two_torsion = curve.two_torsion_polynomial()
    xi = mult_by_ell_x_map(curve, ell, cache=cache) if depth >= 2 else None
    parents: list[tuple[str, RatPoly]] = []

    for k in range(1, depth + 1):
        primitive = primitive_division_poly(curve, ell, k, cache=cache)
        if k == 1:
            linked = [(g, ROOT_ID) for g in _irreducible_factors(primitive, k, settings.factor)]
        elif settings.split_by_parent:
            assert xi is not None
            linked = _split_by_parent(primitive, parents, xi, k, ell, settings.factor)
        else:
            assert xi is not None
            linked = _link_directly(primitive, parents, xi, k, settings.factor)
        linked.sort(key=lambda item: item[0].sort_key())

        parents = []
        for index, (g, parent_id) in enumerate(linked):
            node_id = f"{k}:{index}"
            pending[node_id] = PendingNode(level_exponent=k, degree=int(g.degree), factor=g, parent=parent_id)
            parents.append((node_id, g))
            if g.degree == 1:
                root = -g.coeffs[0]
                if is_rational_square(two_torsion(root)):
                    rational_points.append((k, root))
        logger.info("level %d: %d closed points of degrees %s", k, len(linked), sorted(int(g.degree) for g, _ in linked))

    return assemble_tree(
        ell,
        depth,
        pending,
        curve=curve,
        certified_exponent=certified_exponent,
        rational_points=rational_points,
    )


def branch_vertices(tree: FiberTree) -> frozenset[str]:
    """Ids of nodes above the deepest level with two or more children."""
    return frozenset(n.id for n in tree if n.level_exponent < tree.depth and len(n.children) >= 2)


def max_growth_check(tree: FiberTree, node_id: str) -> bool:
    """Whether a node has the largest degree a direct lift of its parent can have.

    Raises:
        UnknownNodeError: If the id is not in the tree.
        ValueError: If the node is the root.
    """
    node = tree.node(node_id)
    if node.parent is None:
        raise ValueError("The root has no parent")
    parent = tree.node(node.parent)
    return node.degree == map_degree(tree.ell ** (node.level_exponent - 1), tree.ell) * parent.degree


@dataclass(frozen=True)
class Fiber:
    """A fiber, represented by its prefix down to the tree depth."""

    path: tuple[str, ...]
    """Node ids from the root to a deepest node."""

    level: int | None
    """Certified level ell^m, or None when uncertified."""

    observed_level: int | None = None
    """Level read off the truncated tree (None for a depth-0 tree)."""

    certification: Certification | None = None
    """Why `level` is final: "adic" (supplied adic exponent reached) or "independence"."""

    @property
    def level_label(self) -> str:
        """The level as text, or "uncertified"."""
        return "uncertified" if self.level is None else str(self.level)


def _observed_exponent(tree: FiberTree, path: Sequence[str]) -> int | None:
    depth = tree.depth
    if depth == 0:
        return None
    exponent = depth
    while exponent > 1 and len(tree.node(path[exponent - 1]).children) == 1:
        exponent -= 1
    return exponent


class _IndependenceCertifier:
    """Certifies fibers through a maximal-growth node at level n+1 given a suitable rational point.

    If y at level n+1 has maximal degree over its parent and the curve has
    a rational point T of exact order ell^(n+1) such that the level-1
    ancestor of y is not a point of the subgroup generated by ell^n*T, the
    fiber through y has level at most ell^n.
    """

    def __init__(self, tree: FiberTree, curve: WeierstrassCurve) -> None:
        self.tree = tree
        self.curve = curve
        self._subgroups: dict[int, list[list[Fraction]]] = {}

    def certifies(self, path: Sequence[str], observed_exponent: int) -> bool:
        if self.tree.depth < 2:
            return False
        ancestor = self.tree.node(path[1]).factor
        assert ancestor is not None
        for n in range(1, self.tree.depth):
            if not max_growth_check(self.tree, path[n + 1]):
                continue
            for subgroup in self._subgroup_x_coordinates(n + 1):
                if all(ancestor(x) != 0 for x in subgroup):
                    if observed_exponent > n:
                        logger.warning("fiber %s branches below level %d despite certification", path[-1], n)
                        continue
                    return True
        return False

    def _subgroup_x_coordinates(self, k: int) -> list[list[Fraction]]:
        """For each rational T of exact order ell^k, the x-coordinates of the nonzero multiples of ell^(k-1)*T."""
        cached = self._subgroups.get(k)
        if cached is not None:
            return cached
        ell = self.tree.ell
        xi = mult_by_ell_x_map(self.curve, ell)
        subgroups = []
        for level, x in self.tree.rational_points:
            if level != k:
                continue
            for _ in range(k - 1):
                x = xi(x)
            multiples = [x] + [mult_by_n_x_map(self.curve, j)(x) for j in range(2, ell // 2 + 1)]
            subgroups.append(multiples)
        self._subgroups[k] = subgroups
        return subgroups


def fiber_levels(tree: FiberTree) -> list[Fiber]:
    """One fiber per deepest node, with its level.

    The level of a fiber is ell^m for the smallest m >= 1 such that the
    fiber's node at level m and every later node on it have exactly one
    child. Levels are final ("adic") when the depth reaches the supplied adic
    exponent, since no branching occurs past it. For curve trees they are
    also final ("independence") when a maximal-growth node at level n+1
    sits over a rational point of exact order ell^(n+1) independent of the
    fiber, which bounds the level by ell^n. The independence rule applies to
    odd ell only; at ell = 2 only a supplied adic exponent certifies.
    Otherwise the observed level is reported and `level` is None.
    """
    certifier = None
    if tree.curve is not None and not tree.is_certified and tree.ell != 2:
        certifier = _IndependenceCertifier(tree, tree.curve)
    fibers = []
    for leaf in tree.leaves():
        path = tree.path_to(leaf.id)
        exponent = _observed_exponent(tree, path)
        if exponent is None:
            fibers.append(Fiber(path=path, level=None))
            continue
        observed = tree.ell**exponent
        certification: Certification | None = None
        if tree.is_certified:
            certification = "adic"
            assert tree.certified_exponent is not None
            if exponent > tree.certified_exponent:
                logger.warning(
                    "fiber %s branches at level %d, past the adic exponent %d",
                    leaf.id,
                    exponent - 1,
                    tree.certified_exponent,
                )
        elif certifier is not None and certifier.certifies(path, exponent):
            certification = "independence"
        fibers.append(
            Fiber(
                path=path,
                level=observed if certification else None,
                observed_level=observed,
                certification=certification,
            )
        )
    logger.info(
        "%d fibers, %d certified",
        len(fibers),
        sum(1 for f in fibers if f.certification is not None),
    )
    return fibers


def predict_degrees(tree: FiberTree, n: int) -> list[int]:
    """Degrees of the closed points at level n >= depth, from a certified tree.

    Past the adic level every point has exactly one lift, of degree
    ``map_degree(ell^k, ell)`` times its own.

    Raises:
        UncertifiedError: If the tree is not certified.
        ValueError: If n is below the tree depth.
    """
    if not tree.is_certified:
        raise UncertifiedError(tree.depth, tree.certified_exponent)
    if n < tree.depth:
        raise ValueError(f"Prediction level {n} is below the tree depth {tree.depth}")
    degrees = tree.degrees_at(tree.depth)
    for k in range(tree.depth, n):
        growth = map_degree(tree.ell**k, tree.ell)
        degrees = [int(d * growth) for d in degrees]
    return sorted(degrees)
