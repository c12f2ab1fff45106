"""Disk cache for division polynomials.

One JSON file per (curve, n) holds the coefficients of the x-only division
polynomial as base-10 strings behind a versioned header. Writers replace
files atomically, so concurrent readers never see a partial entry.
"""

from __future__ import annotations

import contextlib
import hashlib
import json
import logging
import os
import tempfile
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Any

from fiberlevel.cache_modes import CacheMode
from fiberlevel.errors import CacheWriteError
from fiberlevel.exact_arith import RatPoly, format_rational

if TYPE_CHECKING:
    from fiberlevel.elliptic import WeierstrassCurve

logger = logging.getLogger(__name__)

CACHE_DIR_ENV = "FIBERLEVEL_CACHE_DIR"
"""Environment variable overriding the cache directory."""

CACHE_MODE_ENV = "FIBERLEVEL_CACHE_MODE"
"""Environment variable selecting the cache mode."""

FORMAT_NAME = "fiberlevel-psi"
FORMAT_VERSION = 1


def curve_key(curve: WeierstrassCurve) -> str:
    """Stable hex digest of a curve's a-invariants."""
    text = ",".join(format_rational(a) for a in curve.ainvs)
    return hashlib.sha256(text.encode("ascii")).hexdigest()


def default_cache_dir() -> Path:
    """Cache directory from the environment.

    `FIBERLEVEL_CACHE_DIR` wins; otherwise `$XDG_CACHE_HOME/fiberlevel`,
    falling back to `~/.cache/fiberlevel`.
    """
    override = os.environ.get(CACHE_DIR_ENV)
    if override:
        return Path(override).expanduser()
    xdg = os.environ.get("XDG_CACHE_HOME")
    base = Path(xdg).expanduser() if xdg else Path.home() / ".cache"
    return base / "fiberlevel"


@dataclass
class PsiCache:
    """On-disk store of division polynomials keyed by curve and index.

    Example:
        ```python
        from fiberlevel import CacheMode, PsiCache, build_tree, curve_from_ainvs

        cache = PsiCache("/tmp/psi", mode=CacheMode.READ_WRITE)
        curve = curve_from_ainvs(0, 0, 0, 21, 26)
        tree = build_tree(curve, 3, 2, cache=cache)  # psi_3 and psi_9 land in /tmp/psi
        ```
    """

    directory: Path
    """Directory holding the cache files."""

    mode: CacheMode = CacheMode.READ_WRITE
    """How stored entries are used."""

    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)

    def __post_init__(self) -> None:
        if isinstance(self.directory, str):
            self.directory = Path(self.directory).expanduser()

    @classmethod
    def from_env(cls, mode: CacheMode | None = None) -> PsiCache:
        """Build a cache from `FIBERLEVEL_CACHE_DIR` and `FIBERLEVEL_CACHE_MODE`.

        Args:
            mode: Explicit mode, taking precedence over the environment.
        """
        if mode is None:
            mode = CacheMode(os.environ.get(CACHE_MODE_ENV, CacheMode.READ_WRITE.value))
        return cls(directory=default_cache_dir(), mode=mode)

    def path_for(self, curve: WeierstrassCurve, n: int) -> Path:
        """File holding the n-th division polynomial of `curve`."""
        return self.directory / f"{curve_key(curve)}-{n}.json"

    def load(self, curve: WeierstrassCurve, n: int) -> RatPoly | None:
        """Return the stored polynomial, or None on a miss.

        Unreadable entries and entries whose header does not match are
        logged and treated as misses.
        """
        if not self.mode.can_read:
            return None
        path = self.path_for(curve, n)
        if not path.exists():
            logger.debug("psi cache miss: n=%d (%s)", n, path.name)
            return None
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
            poly = self._decode(data, curve, n)
        except (OSError, ValueError, KeyError, TypeError) as e:
            logger.warning("Ignoring unreadable psi cache entry %s: %s", path, e)
            return None
        logger.debug("psi cache hit: n=%d (%s)", n, path.name)
        return poly

    def store(self, curve: WeierstrassCurve, n: int, poly: RatPoly) -> None:
        """Write a polynomial atomically.

        Raises:
            CacheWriteError: If the file cannot be written.
        """
        if not self.mode.can_write:
            return
        path = self.path_for(curve, n)
        content = json.dumps(self._encode(curve, n, poly), indent=2) + "\n"
        with self._lock:
            try:
                self.directory.mkdir(parents=True, exist_ok=True)
                fd, tmp_name = tempfile.mkstemp(dir=self.directory, prefix=f".{path.name}.", suffix=".tmp")
                try:
                    with os.fdopen(fd, "w", encoding="utf-8") as handle:
                        handle.write(content)
                    Path(tmp_name).replace(path)
                except BaseException:
                    with contextlib.suppress(OSError):
                        Path(tmp_name).unlink()
                    raise
            except OSError as e:
                raise CacheWriteError(str(path), e) from e
        logger.debug("psi cache store: n=%d (%s)", n, path.name)

    @staticmethod
    def _encode(curve: WeierstrassCurve, n: int, poly: RatPoly) -> dict[str, Any]:
        return {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "ainvs": [format_rational(a) for a in curve.ainvs],
            "n": n,
            "coefficients": poly.to_strings(),
        }

    @staticmethod
    def _decode(data: dict[str, Any], curve: WeierstrassCurve, n: int) -> RatPoly:
        if data["format"] != FORMAT_NAME or data["version"] != FORMAT_VERSION:
            raise ValueError(f"unsupported header {data['format']!r} v{data['version']}")
        if data["ainvs"] != [format_rational(a) for a in curve.ainvs] or data["n"] != n:
            raise ValueError("entry belongs to a different curve or index")
        return RatPoly.from_strings(data["coefficients"])
