"""Tree and subgroup-spec documents: JSON, YAML and DOT."""

from __future__ import annotations

import json
from collections.abc import Iterable
from pathlib import Path
from typing import Any, Literal

import yaml

from fiberlevel.elliptic import curve_from_ainvs
from fiberlevel.errors import SerializationError
from fiberlevel.exact_arith import RatPoly, format_rational, parse_rational
from fiberlevel.fiber_tree import ROOT_ID, FiberTree, PendingNode, assemble_tree, fiber_levels
from fiberlevel.gl2 import MatMod, SubgroupSpec, close_under_product

_CURVE_KEYS = ("a1", "a2", "a3", "a4", "a6")


def tree_to_dict(tree: FiberTree) -> dict[str, Any]:
    """Plain-data form of a tree, including its fibers.

    Nodes come in level-then-index order; the root carries no factor.
    """
    curve = None
    if tree.curve is not None:
        curve = {key: format_rational(a) for key, a in zip(_CURVE_KEYS, tree.curve.ainvs, strict=True)}
    return {
        "curve": curve,
        "ell": tree.ell,
        "depth": tree.depth,
        "certified_exponent": tree.certified_exponent,
        "source": tree.source,
        "rational_points": [{"level_exponent": k, "x": format_rational(x)} for k, x in tree.rational_points],
        "nodes": [
            {
                "id": node.id,
                "level_exponent": node.level_exponent,
                "degree": node.degree,
                "parent": node.parent,
                "children": list(node.children),
                "factor": node.factor.to_strings() if node.factor is not None else None,
                "representative": list(node.representative) if node.representative is not None else None,
            }
            for node in tree
        ],
        "fibers": [
            {
                "path": list(fiber.path),
                "level": fiber.level_label,
                "observed_level": fiber.observed_level,
                "certification": fiber.certification,
            }
            for fiber in fiber_levels(tree)
        ],
    }


def tree_from_dict(data: dict[str, Any]) -> FiberTree:
    """Rebuild a tree from `tree_to_dict` output.

    Fibers are recomputed rather than read back; children are rebuilt from
    the parent links.

    Raises:
        SerializationError: If the document is malformed.
    """
    try:
        curve = None
        if data.get("curve") is not None:
            curve = curve_from_ainvs(*(data["curve"][key] for key in _CURVE_KEYS))
        pending: dict[str, PendingNode] = {}
        for entry in data["nodes"]:
            factor = entry.get("factor")
            representative = entry.get("representative")
            pending[entry["id"]] = PendingNode(
                level_exponent=int(entry["level_exponent"]),
                degree=int(entry["degree"]),
                factor=RatPoly.from_strings(factor) if factor is not None else None,
                parent=entry.get("parent"),
                representative=tuple(representative) if representative is not None else None,  # type: ignore[arg-type]
            )
        if ROOT_ID not in pending:
            raise ValueError("document has no root node")
        rational_points = [
            (int(point["level_exponent"]), parse_rational(point["x"])) for point in data.get("rational_points", [])
        ]
        return assemble_tree(
            int(data["ell"]),
            int(data["depth"]),
            pending,
            curve=curve,
            certified_exponent=data.get("certified_exponent"),
            source=data.get("source", "division"),
            rational_points=rational_points,
        )
    except (KeyError, TypeError, ValueError) as e:
        raise SerializationError("Malformed tree document", e) from e


def _dump_json(data: Any) -> str:
    return json.dumps(data, indent=2) + "\n"


def _dump_yaml(data: Any) -> str:
    return yaml.safe_dump(data, default_flow_style=False, allow_unicode=True, sort_keys=False)


def _to_dot(tree: FiberTree) -> str:
    lines = ["digraph fiber_tree {"]
    for node in tree:
        label = "j" if node.id == ROOT_ID else f"deg={node.degree}"
        lines.append(f'  "{node.id}" [label="{label}"];')
    for node in tree:
        if node.parent is not None:
            lines.append(f'  "{node.parent}" -> "{node.id}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def export(tree: FiberTree, fmt: Literal["json", "dot"] = "json") -> bytes:
    """Serialize a tree deterministically.

    Args:
        tree: The tree.
        fmt: ``"json"`` for the tree document, ``"dot"`` for a Graphviz digraph
            with one edge per non-root node.

    Returns:
        UTF-8 bytes.

    Example:
        ```python
        Path("tree.dot").write_bytes(export(tree, "dot"))
        ```
    """
    if fmt == "json":
        return _dump_json(tree_to_dict(tree)).encode("utf-8")
    if fmt == "dot":
        return _to_dot(tree).encode("utf-8")
    raise ValueError(f"Unknown export format: {fmt!r}")


def read_document(path: Path) -> Any:
    """Parse a JSON or YAML file by suffix.

    Raises:
        FileNotFoundError: If the file doesn't exist.
        SerializationError: If the file cannot be parsed.
    """
    if not path.exists():
        raise FileNotFoundError(path)
    content = path.read_text(encoding="utf-8")
    try:
        if path.suffix == ".json":
            return json.loads(content)
        return yaml.safe_load(content)
    except Exception as e:
        raise SerializationError(f"Failed to parse {path}", e) from e


def _write_document(path: Path, data: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        content = _dump_json(data) if path.suffix == ".json" else _dump_yaml(data)
        path.write_text(content, encoding="utf-8")
    except Exception as e:
        raise SerializationError(f"Failed to write {path}", e) from e


class TreeSerializer:
    """Reads and writes tree documents.

    The format follows the file extension: `.json` for JSON, anything else
    (including `.yaml`, `.yml`) for YAML.

    Example:
        ```python
        TreeSerializer.save(Path("graphexample.json"), tree)
        tree = TreeSerializer.load(Path("graphexample.json"))
        ```
    """

    @staticmethod
    def load(path: Path) -> FiberTree:
        """Load a tree.

        Raises:
            FileNotFoundError: If the file doesn't exist.
            SerializationError: If the file cannot be parsed.
        """
        data = read_document(path)
        if not isinstance(data, dict):
            raise SerializationError(f"{path} does not hold a tree document")
        return tree_from_dict(data)

    @staticmethod
    def save(path: Path, tree: FiberTree) -> None:
        """Save a tree, creating parent directories.

        Raises:
            SerializationError: If the file cannot be written.
        """
        _write_document(path, tree_to_dict(tree))


def minimal_generators(spec: SubgroupSpec) -> list[MatMod]:
    """A small generating set of G_d, picked greedily in sorted order."""
    generators: list[MatMod] = []
    generated: frozenset[MatMod] = frozenset({MatMod.identity(spec.ell, spec.defining_exponent)})
    for element in sorted(spec.elements):
        if element not in generated:
            generators.append(element)
            generated = close_under_product(generators)
    return generators


def spec_to_dict(spec: SubgroupSpec, generators: Iterable[MatMod] | None = None) -> dict[str, Any]:
    """Spec document ``{name?, ell, defining_exponent, generators}``."""
    gens = list(generators) if generators is not None else minimal_generators(spec)
    data: dict[str, Any] = {}
    if spec.name is not None:
        data["name"] = spec.name
    data["ell"] = spec.ell
    data["defining_exponent"] = spec.defining_exponent
    data["generators"] = [g.rows for g in gens]
    return data


def spec_from_dict(data: dict[str, Any], name: str | None = None) -> SubgroupSpec:
    """Build a spec from a document, closing the generators.

    Raises:
        SerializationError: If fields are missing or not integers.
        InvalidSubgroupError: If ell is not prime or the exponent is not positive.
        NonInvertibleMatrixError: If a generator is not invertible.
    """
    try:
        ell = int(data["ell"])
        exponent = int(data["defining_exponent"])
        generators = [
            MatMod.from_rows([[int(x) for x in row] for row in rows], ell, exponent) for rows in data["generators"]
        ]
    except (KeyError, TypeError, ValueError) as e:
        raise SerializationError("Malformed subgroup spec document", e) from e
    return SubgroupSpec.from_generators(ell, exponent, generators, name=data.get("name", name))


def load_spec(path: Path) -> SubgroupSpec:
    """Load a spec document; see `spec_from_dict`."""
    data = read_document(path)
    if not isinstance(data, dict):
        raise SerializationError(f"{path} does not hold a subgroup spec")
    return spec_from_dict(data, name=path.stem)


def save_spec(path: Path, spec: SubgroupSpec) -> None:
    """Save a spec document with a greedy generating set."""
    _write_document(path, spec_to_dict(spec))

