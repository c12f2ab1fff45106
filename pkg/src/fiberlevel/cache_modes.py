"""Cache mode definitions."""

from enum import Enum


class CacheMode(Enum):
    """Controls how the division polynomial disk cache is used.

    Example:
        ```python
        from fiberlevel import CacheMode, PsiCache

        # Load stored polynomials, store newly computed ones (default)
        cache = PsiCache("~/.cache/fiberlevel", mode=CacheMode.READ_WRITE)

        # Use stored polynomials but never write (shared or read-only media)
        cache = PsiCache("/mnt/shared/psi", mode=CacheMode.READ_ONLY)

        # Recompute everything and overwrite what is stored
        cache = PsiCache("~/.cache/fiberlevel", mode=CacheMode.REFRESH)
        ```
    """

    OFF = "off"
    """Never touch the disk. Polynomials are still memoised in memory."""

    READ_WRITE = "read_write"
    """Load stored polynomials, store newly computed ones.
    Default mode for the command line."""

    READ_ONLY = "read_only"
    """Load stored polynomials, never write.
    Use in CI against a pre-populated cache directory."""

    REFRESH = "refresh"
    """Ignore stored polynomials, recompute and overwrite them.
    Use after changing the recurrence or the file format."""

    @property
    def can_read(self) -> bool:
        """Whether stored entries are consulted."""
        return self in (CacheMode.READ_WRITE, CacheMode.READ_ONLY)

    @property
    def can_write(self) -> bool:
        """Whether computed entries are written."""
        return self in (CacheMode.READ_WRITE, CacheMode.REFRESH)
