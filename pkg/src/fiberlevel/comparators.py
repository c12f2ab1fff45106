"""Strategies for comparing two fiber trees.

Used to cross-check a curve tree against the orbit tree of its Galois
image, and a freshly built tree against a stored one.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from collections import Counter
from collections.abc import Callable
from dataclasses import dataclass, field

from fiberlevel.fiber_tree import FiberTree


class TreeComparator(ABC):
    """Base class for tree comparators.

    A comparator reports the differences it finds as readable strings; an
    empty list means the trees agree. Comparators combine with `&`.

    Example:
        ```python
        comparator = LevelDegreeComparator() & ChildDegreeComparator()
        differences = comparator.compare(curve_tree, orbit_tree(spec, 2))
        ```
    """

    @abstractmethod
    def compare(self, expected: FiberTree, actual: FiberTree) -> list[str]:
        """Compare two trees.

        Args:
            expected: The reference tree.
            actual: The tree under test.

        Returns:
            Human-readable differences, empty when the trees agree.
        """
        ...

    def __and__(self, other: TreeComparator) -> AllComparator:
        """Combine with another comparator; the result reports both sets of differences."""
        if isinstance(self, AllComparator):
            return AllComparator(comparators=[*self.comparators, other])
        return AllComparator(comparators=[self, other])


def _shared_levels(expected: FiberTree, actual: FiberTree) -> range:
    return range(1, min(expected.depth, actual.depth) + 1)


@dataclass
class LevelDegreeComparator(TreeComparator):
    """Compares the degree multiset at each level.

    Example:
        ```python
        # Only look at the first level
        LevelDegreeComparator(levels=[1])
        ```
    """

    levels: list[int] | None = None
    """If set, only these level exponents are compared."""

    def compare(self, expected: FiberTree, actual: FiberTree) -> list[str]:
        differences = []
        if self.levels is None and expected.depth != actual.depth:
            differences.append(f"depth: expected {expected.depth}, got {actual.depth}")
        levels = self.levels if self.levels is not None else _shared_levels(expected, actual)
        for k in levels:
            want, got = expected.degrees_at(k), actual.degrees_at(k)
            if want != got:
                differences.append(f"level {k} degrees: expected {want}, got {got}")
        return differences


@dataclass
class ChildDegreeComparator(TreeComparator):
    """Compares, per level, the multiset of (node degree, sorted child degrees).

    Two trees agreeing here have the same shape up to relabelling of
    nodes with equal degree.
    """

    def compare(self, expected: FiberTree, actual: FiberTree) -> list[str]:
        differences = []
        for k in range(0, min(expected.depth, actual.depth)):
            want, got = self._profile(expected, k), self._profile(actual, k)
            if want != got:
                differences.append(
                    f"level {k} branching: expected {sorted(want.elements())}, got {sorted(got.elements())}"
                )
        return differences

    @staticmethod
    def _profile(tree: FiberTree, k: int) -> Counter[tuple[int, tuple[int, ...]]]:
        return Counter(
            (node.degree, tuple(sorted(child.degree for child in tree.children_of(node.id)))) for node in tree.level(k)
        )


@dataclass
class CustomComparator(TreeComparator):
    """Compares trees with a custom function.

    Example:
        ```python
        def same_fiber_count(expected: FiberTree, actual: FiberTree) -> list[str]:
            if len(expected.leaves()) != len(actual.leaves()):
                return ["fiber counts differ"]
            return []

        comparator = LevelDegreeComparator() & CustomComparator(func=same_fiber_count, name="fibers")
        ```
    """

    func: Callable[[FiberTree, FiberTree], list[str]]
    """Takes (expected, actual) and returns differences."""

    name: str | None = None
    """Optional name, prefixed to each difference."""

    def compare(self, expected: FiberTree, actual: FiberTree) -> list[str]:
        differences = self.func(expected, actual)
        if self.name:
            return [f"{self.name}: {d}" for d in differences]
        return list(differences)


@dataclass
class AllComparator(TreeComparator):
    """Runs several comparators and concatenates their differences.

    Usually created implicitly via the `&` operator.
    """

    comparators: list[TreeComparator] = field(default_factory=list)

    def compare(self, expected: FiberTree, actual: FiberTree) -> list[str]:
        return [d for c in self.comparators for d in c.compare(expected, actual)]


DEFAULT_COMPARATOR: TreeComparator = LevelDegreeComparator() & ChildDegreeComparator()
"""Level degrees and branching profile."""


def compare_trees(
    expected: FiberTree,
    actual: FiberTree,
    comparator: TreeComparator = DEFAULT_COMPARATOR,
) -> list[str]:
    """Differences between two trees under `comparator`.

    Example:
        ```python
        if differences := compare_trees(build_tree(curve, 3, 2), orbit_tree(spec, 2)):
            print("\\n".join(differences))
        ```
    """
    return comparator.compare(expected, actual)
