"""Shared test fixtures and configuration."""

from __future__ import annotations

from pathlib import Path

import pytest

from fiberlevel.elliptic import WeierstrassCurve, curve_from_ainvs
from fiberlevel.fiber_tree import FiberTree, build_tree
from fiberlevel.gl2 import MatMod, SubgroupSpec

pytest_plugins = ["pytester"]


@pytest.fixture(scope="session")
def graphexample() -> WeierstrassCurve:
    """y^2 = x^3 + 21x + 26, 3-adic level 9."""
    return curve_from_ainvs(0, 0, 0, 21, 26)


@pytest.fixture(scope="session")
def curve_54b2() -> WeierstrassCurve:
    """54.b2, with a rational point of order 9."""
    return curve_from_ainvs(1, -1, 1, -14, 29)


@pytest.fixture(scope="session")
def counterexample_curve() -> WeierstrassCurve:
    """y^2 = x^3 - 2x + 1, 2-adic level 16."""
    return curve_from_ainvs(0, 0, 0, -2, 1)


@pytest.fixture(scope="session")
def graphexample_tree(graphexample: WeierstrassCurve) -> FiberTree:
    return build_tree(graphexample, 3, 2, certified_exponent=2)


@pytest.fixture(scope="session")
def tree_54b2(curve_54b2: WeierstrassCurve) -> FiberTree:
    return build_tree(curve_54b2, 3, 2)


@pytest.fixture(scope="session")
def borel3() -> SubgroupSpec:
    return SubgroupSpec.borel(3)


@pytest.fixture(scope="session")
def unipotent_spec() -> SubgroupSpec:
    """``[[1 + 3a, 0], [3b, 1]]`` mod 9: Z_2 is trivial and the second basis vector is fixed."""
    generators = [MatMod(3, 2, 4, 0, 0, 1), MatMod(3, 2, 1, 0, 3, 1)]
    return SubgroupSpec.from_generators(3, 2, generators, name="unipotent-9")


@pytest.fixture(scope="session")
def det_pm1_spec() -> SubgroupSpec:
    """Determinant +-1 mod 9."""
    generators = [MatMod(3, 2, 1, 1, 0, 1), MatMod(3, 2, 1, 0, 1, 1), MatMod(3, 2, 8, 0, 0, 1)]
    return SubgroupSpec.from_generators(3, 2, generators, name="det-pm1-9")


@pytest.fixture
def tmp_cache_dir(tmp_path: Path) -> Path:
    """Temporary directory for division polynomial cache files."""
    return tmp_path / "psi"
