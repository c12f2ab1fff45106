"""Named curves and subgroup specs, loaded from a bundled YAML document."""

from __future__ import annotations

import logging
from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any

import yaml

from fiberlevel.elliptic import WeierstrassCurve, curve_from_ainvs
from fiberlevel.errors import RegistryError, SerializationError
from fiberlevel.exact_arith import parse_rational
from fiberlevel.gl2 import SubgroupSpec
from fiberlevel.serialization import load_spec, read_document, spec_from_dict

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CurveRegistryEntry:
    """A named curve with what is known about its Galois image."""

    name: str
    """Registry name, e.g. an LMFDB label."""

    ainvs: tuple[Fraction, Fraction, Fraction, Fraction, Fraction]
    """The a-invariants (a1, a2, a3, a4, a6)."""

    adic_exponents: Mapping[int, int] = field(default_factory=dict)
    """Known ell-adic level exponents, keyed by prime."""

    spec: str | None = None
    """Name of the registry spec for the mod-ell^d image, if recorded."""

    def curve(self) -> WeierstrassCurve:
        return curve_from_ainvs(*self.ainvs)

    def adic_exponent(self, ell: int) -> int | None:
        return self.adic_exponents.get(ell)


@dataclass(frozen=True)
class Registry:
    """Curves and specs by name.

    Example:
        ```python
        registry = load_registry()
        curve, entry = registry.resolve_curve("graphexample")
        entry.adic_exponent(3)          # 2
        registry.spec("50.b1").order_at(1)  # 12
        ```
    """

    curves: Mapping[str, CurveRegistryEntry]
    specs: Mapping[str, Mapping[str, Any]]
    version: int = 1

    def curve_entry(self, name: str) -> CurveRegistryEntry:
        """Look up a curve.

        Raises:
            RegistryError: If the name is unknown.
        """
        try:
            return self.curves[name]
        except KeyError:
            raise RegistryError(name, "curve") from None

    def spec(self, name: str) -> SubgroupSpec:
        """Build a named spec.

        Raises:
            RegistryError: If the name is unknown.
        """
        try:
            document = self.specs[name]
        except KeyError:
            raise RegistryError(name, "spec") from None
        return spec_from_dict(dict(document), name=name)

    def resolve_curve(self, text: str) -> tuple[WeierstrassCurve, CurveRegistryEntry | None]:
        """A registry name, or five comma-separated rationals ``a1,a2,a3,a4,a6``.

        Raises:
            RegistryError: If `text` is neither a known name nor a list of rationals.
            ValueError: If a list has the wrong length or bad rationals.
            SingularCurveError: If the curve is singular.
        """
        if text in self.curves:
            entry = self.curves[text]
            return entry.curve(), entry
        if "," not in text:
            raise RegistryError(text, "curve")
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 5:
            raise ValueError(f"Expected five a-invariants, got {len(parts)}")
        return curve_from_ainvs(*parts), None

    def resolve_spec(self, text: str) -> SubgroupSpec:
        """A registry spec name, or a path to a spec document.

        Raises:
            RegistryError: If `text` is neither a known name nor an existing file.
        """
        if text in self.specs:
            return self.spec(text)
        path = Path(text)
        if path.is_file():
            return load_spec(path)
        raise RegistryError(text, "spec")


def _entry_from_dict(name: str, data: Mapping[str, Any]) -> CurveRegistryEntry:
    ainvs = tuple(parse_rational(str(a)) for a in data["ainvs"])
    if len(ainvs) != 5:
        raise ValueError(f"curve {name} needs five a-invariants")
    return CurveRegistryEntry(
        name=name,
        ainvs=ainvs,  # type: ignore[arg-type]
        adic_exponents={int(p): int(e) for p, e in (data.get("adic_exponents") or {}).items()},
        spec=data.get("spec"),
    )


def registry_from_dict(data: Mapping[str, Any]) -> Registry:
    """Build a registry from its document form.

    Raises:
        SerializationError: If the document is malformed.
    """
    try:
        curves = {str(name): _entry_from_dict(str(name), entry) for name, entry in (data.get("curves") or {}).items()}
        specs = {str(name): dict(spec) for name, spec in (data.get("specs") or {}).items()}
        return Registry(curves=curves, specs=specs, version=int(data.get("version", 1)))
    except (AttributeError, KeyError, TypeError, ValueError) as e:
        raise SerializationError("Malformed registry document", e) from e


def load_registry(path: Path | None = None) -> Registry:
    """Load a registry file, or the bundled one when `path` is None."""
    if path is not None:
        data = read_document(path)
    else:
        text = resources.files("fiberlevel").joinpath("data/registry.yaml").read_text(encoding="utf-8")
        data = yaml.safe_load(text)
    if not isinstance(data, Mapping):
        raise SerializationError("Registry document is not a mapping")
    registry = registry_from_dict(data)
    logger.debug("registry: %d curves, %d specs", len(registry.curves), len(registry.specs))
    return registry
