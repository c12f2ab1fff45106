"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 certification requested beyond
the tree depth, 3 a negative verdict (power-map failure or tree mismatch).

Example:
    ```
    fiberlevel tree --curve graphexample --ell 3 --depth 2 --adic-exponent 2
    fiberlevel orbits --spec 50.b1 --depth 1
    fiberlevel powermap --mode welldef --spec 50.b1 --n 2
    fiberlevel verify --curve 50.b1 --ell 3 --depth 2
    ```
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from fiberlevel.cache import PsiCache
from fiberlevel.cache_modes import CacheMode
from fiberlevel.comparators import compare_trees
from fiberlevel.errors import FiberlevelError
from fiberlevel.fiber_tree import FiberTree, build_tree
from fiberlevel.gl2 import (
    power_map_injective,
    power_map_well_defined,
    verify_raising_lemma,
)
from fiberlevel.gl2 import orbit_tree as build_orbit_tree
from fiberlevel.registry import Registry, load_registry
from fiberlevel.serialization import export

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_UNCERTIFIABLE = 2
EXIT_NEGATIVE = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fiberlevel", description="Fiber trees of closed points on X1(ell^k).")
    parser.add_argument("--cache-dir", type=Path, default=None, help="Division polynomial cache directory.")
    parser.add_argument(
        "--cache-mode",
        choices=[m.value for m in CacheMode],
        default=None,
        help="Cache mode (default: $FIBERLEVEL_CACHE_MODE or read_write).",
    )
    parser.add_argument("--registry", type=Path, default=None, help="Registry file replacing the bundled one.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG.")
    commands = parser.add_subparsers(dest="command", required=True)

    tree = commands.add_parser("tree", help="Build the fiber tree of a curve.")
    tree.add_argument("--curve", required=True, help="Registry name or a1,a2,a3,a4,a6.")
    tree.add_argument("--ell", type=int, required=True)
    tree.add_argument("--depth", type=int, required=True)
    tree.add_argument("--adic-exponent", type=int, default=None, help="Known ell-adic level exponent d.")
    tree.add_argument("--format", choices=["json", "dot"], default="json")
    tree.add_argument("--out", type=Path, default=None)

    orbits = commands.add_parser("orbits", help="Build the orbit tree of a subgroup spec.")
    orbits.add_argument("--spec", required=True, help="Registry spec name or spec file.")
    orbits.add_argument("--depth", type=int, required=True)
    orbits.add_argument("--format", choices=["json", "dot"], default="json")
    orbits.add_argument("--out", type=Path, default=None)

    powermap = commands.add_parser("powermap", help="Check the ell-power map on coset classes.")
    powermap.add_argument("--mode", choices=["welldef", "inject", "raising"], required=True)
    powermap.add_argument("--spec", default=None, help="Registry spec name or spec file (welldef, inject).")
    powermap.add_argument("--ell", type=int, default=None, help="Prime for --mode raising.")
    powermap.add_argument("--n", type=int, default=1)

    verify = commands.add_parser("verify", help="Compare a curve tree with the orbit tree of its image.")
    verify.add_argument("--curve", required=True)
    verify.add_argument("--ell", type=int, required=True)
    verify.add_argument("--depth", type=int, required=True)
    verify.add_argument("--spec", default=None, help="Defaults to the registry spec of the curve.")
    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def _make_cache(args: argparse.Namespace) -> PsiCache:
    mode = CacheMode(args.cache_mode) if args.cache_mode else None
    cache = PsiCache.from_env(mode)
    if args.cache_dir is not None:
        cache = PsiCache(args.cache_dir, mode=cache.mode)
    return cache


def _emit(tree: FiberTree, fmt: str, out: Path | None) -> None:
    payload = export(tree, "dot" if fmt == "dot" else "json")
    if out is None:
        sys.stdout.write(payload.decode("utf-8"))
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_bytes(payload)


def _cmd_tree(args: argparse.Namespace, registry: Registry) -> int:
    curve, _ = registry.resolve_curve(args.curve)
    if args.adic_exponent is not None and args.adic_exponent > args.depth:
        print(
            f"error: certification needs depth >= {args.adic_exponent}, got --depth {args.depth}",
            file=sys.stderr,
        )
        return EXIT_UNCERTIFIABLE
    tree = build_tree(curve, args.ell, args.depth, args.adic_exponent, cache=_make_cache(args))
    _emit(tree, args.format, args.out)
    return EXIT_OK


def _cmd_orbits(args: argparse.Namespace, registry: Registry) -> int:
    spec = registry.resolve_spec(args.spec)
    _emit(build_orbit_tree(spec, args.depth), args.format, args.out)
    return EXIT_OK


def _cmd_powermap(args: argparse.Namespace, registry: Registry) -> int:
    if args.mode == "raising":
        if args.ell is None:
            raise ValueError("--mode raising needs --ell")
        holds = verify_raising_lemma(args.ell, args.n)
        print(f"raising: {str(holds).lower()}")
        return EXIT_OK if holds else EXIT_NEGATIVE

    if args.spec is None:
        raise ValueError(f"--mode {args.mode} needs --spec")
    spec = registry.resolve_spec(args.spec)
    if args.mode == "inject":
        injective = power_map_injective(spec, args.n)
        print(f"injective: {str(injective).lower()}")
        return EXIT_OK if injective else EXIT_NEGATIVE

    verdict = power_map_well_defined(spec, args.n)
    print(f"well-defined: {str(verdict.holds).lower()}")
    if verdict.witness is None:
        return EXIT_OK
    a, b = verdict.witness
    ell, n = spec.ell, args.n
    print(f"A = {a}")
    print(f"B = {b}")
    print(f"B^-1 A = {b.reduce(n + 1).inverse() * a.reduce(n + 1)}")
    print(f"(B^{ell})^-1 A^{ell} = {(b**ell).inverse() * a**ell}")
    return EXIT_NEGATIVE


def _cmd_verify(args: argparse.Namespace, registry: Registry) -> int:
    curve, entry = registry.resolve_curve(args.curve)
    spec_name = args.spec or (entry.spec if entry is not None else None)
    if spec_name is None:
        raise ValueError(f"No subgroup spec recorded for {args.curve}; pass --spec")
    spec = registry.resolve_spec(spec_name)
    if spec.ell != args.ell:
        raise ValueError(f"Spec {spec_name} is for ell={spec.ell}, not {args.ell}")
    curve_tree = build_tree(curve, args.ell, args.depth, cache=_make_cache(args))
    differences = compare_trees(curve_tree, build_orbit_tree(spec, args.depth))
    if differences:
        print("mismatch:")
        for difference in differences:
            print(f"  {difference}")
        return EXIT_NEGATIVE
    print("equal")
    return EXIT_OK


_COMMANDS = {
    "tree": _cmd_tree,
    "orbits": _cmd_orbits,
    "powermap": _cmd_powermap,
    "verify": _cmd_verify,
}


def main(argv: Sequence[str] | None = None) -> int:
    """Run the command line and return the exit code."""
    parser = _build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    try:
        registry = load_registry(args.registry)
        return _COMMANDS[args.command](args, registry)
    except (FiberlevelError, ValueError, FileNotFoundError) as e:
        logger.debug("command failed", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
