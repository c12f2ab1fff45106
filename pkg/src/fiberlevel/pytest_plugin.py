"""pytest plugin for fiberlevel.

Provides a shared division polynomial cache and builds trees named by a
marker, so test suites of downstream projects can pin known curves.

Example:
    ```python
    @pytest.mark.fiberlevel("graphexample", ell=3, depth=2, adic_exponent=2)
    def test_graphexample_levels(fiberlevel_tree):
        assert fiberlevel_tree.degrees_at(2) == [3, 3, 3, 9, 18]
    ```
"""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING, Any

import pytest

from fiberlevel.cache import PsiCache
from fiberlevel.cache_modes import CacheMode
from fiberlevel.fiber_tree import FiberTree, build_tree
from fiberlevel.registry import Registry, load_registry

if TYPE_CHECKING:
    from _pytest.config import Config
    from _pytest.fixtures import FixtureRequest


def pytest_addoption(parser: pytest.Parser) -> None:
    """Add fiberlevel command line options to pytest."""
    group = parser.getgroup("fiberlevel")
    group.addoption(
        "--fiberlevel-cache-dir",
        action="store",
        default=None,
        help="Division polynomial cache directory (default: a per-session temporary directory)",
    )
    group.addoption(
        "--fiberlevel-cache-mode",
        action="store",
        default=None,
        choices=[m.value for m in CacheMode],
        help="Override the cache mode for all tests",
    )


def pytest_configure(config: Config) -> None:
    """Register fiberlevel markers with pytest."""
    config.addinivalue_line(
        "markers",
        "fiberlevel(curve, ell, depth, adic_exponent, cache_mode): Build the tree of a registry curve",
    )


def resolve_cache_mode(cli_mode: str | None, marker: pytest.Mark | None) -> CacheMode:
    """Pick the cache mode.

    Priority order:
    1. CLI option (--fiberlevel-cache-mode)
    2. ``cache_mode`` on the fiberlevel marker
    3. Default (READ_WRITE)
    """
    if cli_mode:
        return CacheMode(cli_mode)
    if marker is not None and "cache_mode" in marker.kwargs:
        return CacheMode(marker.kwargs["cache_mode"])
    return CacheMode.READ_WRITE


def tree_arguments(marker: pytest.Mark) -> dict[str, Any]:
    """Read (curve, ell, depth, adic_exponent) from the marker's args and kwargs."""
    names = ("curve", "ell", "depth", "adic_exponent")
    values: dict[str, Any] = dict(zip(names, marker.args, strict=False))
    for name in names:
        if name in marker.kwargs:
            values[name] = marker.kwargs[name]
    missing = [name for name in names[:3] if name not in values]
    if missing:
        raise pytest.UsageError(f"fiberlevel marker is missing {', '.join(missing)}")
    values.setdefault("adic_exponent", None)
    return values


def tree_from_marker(marker: pytest.Mark, registry: Registry, cache: PsiCache | None) -> FiberTree:
    """Build the tree a fiberlevel marker names."""
    arguments = tree_arguments(marker)
    curve, _ = registry.resolve_curve(arguments["curve"])
    return build_tree(curve, arguments["ell"], arguments["depth"], arguments["adic_exponent"], cache=cache)


@pytest.fixture(scope="session")
def fiberlevel_cache_dir(request: FixtureRequest, tmp_path_factory: pytest.TempPathFactory) -> Path:
    """The cache directory shared by the session."""
    option = request.config.getoption("--fiberlevel-cache-dir")
    if option:
        return Path(option).expanduser()
    return tmp_path_factory.mktemp("fiberlevel-psi")


@pytest.fixture
def fiberlevel_cache_mode(request: FixtureRequest) -> CacheMode:
    """The cache mode for the current test."""
    return resolve_cache_mode(
        request.config.getoption("--fiberlevel-cache-mode"),
        request.node.get_closest_marker("fiberlevel"),
    )


@pytest.fixture
def fiberlevel_cache(fiberlevel_cache_dir: Path, fiberlevel_cache_mode: CacheMode) -> PsiCache:
    """A division polynomial cache for the current test."""
    return PsiCache(fiberlevel_cache_dir, mode=fiberlevel_cache_mode)


@pytest.fixture(scope="session")
def fiberlevel_registry() -> Registry:
    """The bundled registry."""
    return load_registry()


@pytest.fixture
def fiberlevel_tree(request: FixtureRequest, fiberlevel_registry: Registry, fiberlevel_cache: PsiCache) -> FiberTree:
    """The tree named by the ``fiberlevel`` marker.

    Example:
        ```python
        @pytest.mark.fiberlevel("54.b2", ell=3, depth=2)
        def test_54b2(fiberlevel_tree):
            ...
        ```
    """
    marker = request.node.get_closest_marker("fiberlevel")
    if marker is None:
        raise pytest.UsageError("fiberlevel_tree needs @pytest.mark.fiberlevel(curve, ell, depth)")
    return tree_from_marker(marker, fiberlevel_registry, fiberlevel_cache)
