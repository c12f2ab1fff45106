"""fiberlevel - Fiber trees of closed points on X1(ell^k) over rational elliptic curves.

fiberlevel builds the tree of closed points on the modular curves X1(ell^k)
lying over the j-invariant of a curve over Q, reads off the level at which
each fiber stops branching, and checks the matrix-group side of the story
(orbit trees, coset families, the ell-power map) by exhaustive computation.

Example:
    ```python
    from fiberlevel import SubgroupSpec, build_tree, curve_from_ainvs, fiber_levels, orbit_tree

    curve = curve_from_ainvs(0, 0, 0, 21, 26)
    tree = build_tree(curve, 3, 2, certified_exponent=2)
    print(tree.degrees_at(2))                        # [3, 3, 3, 9, 18]
    print(sorted(f.level for f in fiber_levels(tree)))  # [3, 3, 9, 9, 9]

    print(orbit_tree(SubgroupSpec.borel(3), 1).degrees_at(1))  # [1, 3]
    ```
"""

from fiberlevel._version import __version__
from fiberlevel.cache import PsiCache
from fiberlevel.cache_modes import CacheMode
from fiberlevel.comparators import (
    DEFAULT_COMPARATOR,
    AllComparator,
    ChildDegreeComparator,
    CustomComparator,
    LevelDegreeComparator,
    TreeComparator,
    compare_trees,
)
from fiberlevel.elliptic import (
    WeierstrassCurve,
    clear_division_tables,
    cleared_compose,
    curve_from_ainvs,
    division_polynomial,
    mult_by_ell_x_map,
    mult_by_n_x_map,
    primitive_division_poly,
    rational_torsion_points,
)
from fiberlevel.errors import (
    CacheWriteError,
    DegreeSumViolationError,
    FiberlevelError,
    HypothesisViolatedError,
    InexactDivisionError,
    InvalidSettingsError,
    InvalidSubgroupError,
    LinkageError,
    NonInvertibleMatrixError,
    OddPrimeRequiredError,
    RegistryError,
    SerializationError,
    SingularCurveError,
    UncertifiedError,
    UnknownNodeError,
)
from fiberlevel.exact_arith import FactorSettings, Factorization, RatPoly, factor_over_Q, parse_rational
from fiberlevel.fiber_tree import (
    Fiber,
    FiberNode,
    FiberTree,
    TreeSettings,
    branch_vertices,
    build_tree,
    fiber_levels,
    map_degree,
    max_growth_check,
    predict_degrees,
)
from fiberlevel.gl2 import (
    CosetFamily,
    GroupAtLevel,
    MatMod,
    PowerMapVerdict,
    SubgroupSpec,
    VectorMod,
    close_under_product,
    coset_family,
    detect_level,
    elements_at,
    gl2_order,
    hypothesis_check,
    index_sequence,
    orbit_tree,
    power_map_injective,
    power_map_well_defined,
    raising_lemma_failures,
    verify_raising_lemma,
)
from fiberlevel.registry import CurveRegistryEntry, Registry, load_registry
from fiberlevel.serialization import TreeSerializer, export, load_spec, save_spec

__all__ = [
    "__version__",
    "DEFAULT_COMPARATOR",
    "AllComparator",
    "CacheMode",
    "CacheWriteError",
    "ChildDegreeComparator",
    "CosetFamily",
    "CurveRegistryEntry",
    "CustomComparator",
    "DegreeSumViolationError",
    "FactorSettings",
    "Factorization",
    "Fiber",
    "FiberNode",
    "FiberTree",
    "FiberlevelError",
    "GroupAtLevel",
    "HypothesisViolatedError",
    "InexactDivisionError",
    "InvalidSettingsError",
    "InvalidSubgroupError",
    "LevelDegreeComparator",
    "LinkageError",
    "MatMod",
    "NonInvertibleMatrixError",
    "OddPrimeRequiredError",
    "PowerMapVerdict",
    "PsiCache",
    "RatPoly",
    "Registry",
    "RegistryError",
    "SerializationError",
    "SingularCurveError",
    "SubgroupSpec",
    "TreeComparator",
    "TreeSerializer",
    "TreeSettings",
    "UncertifiedError",
    "UnknownNodeError",
    "VectorMod",
    "WeierstrassCurve",
    "branch_vertices",
    "build_tree",
    "clear_division_tables",
    "cleared_compose",
    "close_under_product",
    "compare_trees",
    "coset_family",
    "curve_from_ainvs",
    "detect_level",
    "division_polynomial",
    "elements_at",
    "export",
    "factor_over_Q",
    "fiber_levels",
    "gl2_order",
    "hypothesis_check",
    "index_sequence",
    "load_registry",
    "load_spec",
    "map_degree",
    "max_growth_check",
    "mult_by_ell_x_map",
    "mult_by_n_x_map",
    "orbit_tree",
    "parse_rational",
    "power_map_injective",
    "power_map_well_defined",
    "predict_degrees",
    "primitive_division_poly",
    "rational_torsion_points",
    "raising_lemma_failures",
    "save_spec",
    "verify_raising_lemma",
]
