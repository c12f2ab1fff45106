"""Tests for gl2 module."""

import pytest

from fiberlevel import gl2
from fiberlevel.errors import (
    HypothesisViolatedError,
    InvalidSubgroupError,
    NonInvertibleMatrixError,
    OddPrimeRequiredError,
)
from fiberlevel.fiber_tree import ROOT_ID, branch_vertices
from fiberlevel.gl2 import (
    MatMod,
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
    reduce,
    verify_raising_lemma,
)
from fiberlevel.registry import load_registry

A = MatMod.from_rows([[10, 1], [18, 4]], 3, 4)
B = MatMod.from_rows([[10, 6], [18, 13]], 3, 4)


def assert_same_class_different_cubes(a: MatMod, b: MatMod, n: int) -> None:
    """A and B agree on the first basis vector mod 3^(n+1) while their cubes disagree mod 3^(n+2)."""
    low = b.reduce(n + 1).inverse() * a.reduce(n + 1)
    assert (low.a, low.c) == (1, 0)
    high = (b**3).inverse() * a**3
    assert (high.a, high.c) != (1, 0)


class TestMatMod:
    def test_entries_are_reduced(self) -> None:
        m = MatMod(3, 1, 4, -1, 9, 5)
        assert m.entries == (1, 2, 0, 2)

    def test_inverse_mod_27(self) -> None:
        b = B.reduce(3)
        assert b.inverse().rows == [[19, 12], [9, 25]]
        assert b.inverse() * b == MatMod.identity(3, 3)

    def test_witness_quotient_mod_27(self) -> None:
        assert (B.reduce(3).inverse() * A.reduce(3)).rows == [[1, 13], [0, 1]]

    def test_cubes_mod_81(self) -> None:
        assert (A**3).rows == [[55, 12], [54, 64]]
        assert (B**3).rows == [[28, 45], [54, 10]]
        assert (B**3).inverse().rows == [[55, 36], [27, 73]]
        assert ((B**3).inverse() * A**3).rows == [[28, 48], [0, 55]]

    def test_negative_power(self) -> None:
        assert A**-1 == A.inverse()

    def test_non_invertible(self) -> None:
        singular = MatMod(3, 2, 3, 0, 0, 1)
        assert not singular.is_invertible
        with pytest.raises(NonInvertibleMatrixError) as exc_info:
            singular.inverse()
        assert exc_info.value.matrix == singular

    def test_modulus_mismatch(self) -> None:
        with pytest.raises(ValueError):
            _ = A * MatMod.identity(3, 2)

    def test_reduce(self) -> None:
        assert reduce(A, 2) == MatMod(3, 2, 1, 1, 0, 4)
        with pytest.raises(ValueError):
            reduce(A, 5)
        with pytest.raises(ValueError):
            reduce(A, 0)

    def test_apply_and_first_column(self) -> None:
        v = VectorMod(3, 4, 1, 0)
        assert A.apply(v) == A.first_column == VectorMod(3, 4, 10, 18)

    def test_ordering_is_lexicographic(self) -> None:
        assert sorted([MatMod(3, 1, 2, 0, 0, 1), MatMod(3, 1, 1, 2, 0, 1)])[0] == MatMod(3, 1, 1, 2, 0, 1)

    def test_str(self) -> None:
        assert str(A) == "[[10,1],[18,4]] mod 81"


class TestVectorMod:
    @pytest.mark.parametrize(("x", "y", "order"), [(1, 0, 2), (3, 6, 1), (0, 0, 0), (2, 3, 2)])
    def test_order_exponent(self, x: int, y: int, order: int) -> None:
        assert VectorMod(3, 2, x, y).order_exponent == order

    def test_negation(self) -> None:
        assert -VectorMod(3, 2, 1, 4) == VectorMod(3, 2, 8, 5)


class TestGroupOrders:
    @pytest.mark.parametrize(("ell", "m"), [(2, 1), (3, 1), (2, 2), (2, 3), (3, 2)])
    def test_gl2_order_by_enumeration(self, ell: int, m: int) -> None:
        assert len(SubgroupSpec.full(ell, m).elements) == gl2_order(ell, m)

    def test_gl2_mod_two(self) -> None:
        assert len(SubgroupSpec.full(2).elements) == 6

    def test_borel(self, borel3: SubgroupSpec) -> None:
        assert len(borel3.elements) == 12
        assert len(elements_at(borel3, 2)) == 972


class TestSubgroupSpec:
    def test_from_generators_closes(self) -> None:
        gens = [MatMod(3, 1, 1, 1, 0, 1), MatMod(3, 1, 2, 0, 0, 1), MatMod(3, 1, 1, 0, 0, 2)]
        assert SubgroupSpec.from_generators(3, 1, gens).elements == SubgroupSpec.borel(3).elements

    def test_empty_generators_give_trivial_group(self) -> None:
        spec = SubgroupSpec.from_generators(3, 1, [])
        assert spec.elements == frozenset({MatMod.identity(3, 1)})

    def test_close_under_product_needs_modulus(self) -> None:
        with pytest.raises(ValueError):
            close_under_product([])

    def test_non_invertible_generator(self) -> None:
        with pytest.raises(NonInvertibleMatrixError):
            SubgroupSpec.from_generators(3, 1, [MatMod(3, 1, 0, 0, 0, 1)])

    def test_mixed_moduli(self) -> None:
        with pytest.raises(ValueError):
            close_under_product([MatMod.identity(3, 1), MatMod.identity(3, 2)])

    def test_from_elements_rejects_non_group(self) -> None:
        elements = [MatMod.identity(3, 1), MatMod(3, 1, 1, 1, 0, 1), MatMod(3, 1, 1, 2, 0, 1), MatMod(3, 1, 2, 0, 0, 1)]
        with pytest.raises(InvalidSubgroupError):
            SubgroupSpec.from_elements(3, 1, elements)

    def test_missing_identity(self) -> None:
        with pytest.raises(InvalidSubgroupError, match="identity"):
            SubgroupSpec(3, 1, frozenset({MatMod(3, 1, 2, 0, 0, 2)}))

    def test_rejects_composite_ell(self) -> None:
        with pytest.raises(InvalidSubgroupError):
            SubgroupSpec(4, 1, frozenset({MatMod.identity(4, 1)}))

    def test_membership_full_preimage(self, borel3: SubgroupSpec) -> None:
        assert MatMod(3, 3, 10, 5, 24, 7) in borel3
        assert MatMod(3, 3, 10, 5, 25, 7) not in borel3
        assert MatMod(3, 3, 10, 5, 24, 7) in borel3.at(3)
        assert MatMod(3, 2, 1, 0, 0, 1) not in borel3.at(3)

    def test_membership_below_defining_exponent(self, det_pm1_spec: SubgroupSpec) -> None:
        assert MatMod(3, 1, 0, 1, 1, 0) in det_pm1_spec
        assert det_pm1_spec.order_at(1) == 48

    def test_iteration_matches_size(self, borel3: SubgroupSpec) -> None:
        level = borel3.at(2)
        elements = list(level)
        assert len(elements) == len(level) == 972
        assert len(set(elements)) == 972
        assert all(m in level for m in elements)

    def test_iteration_is_sorted_below_defining_exponent(self, det_pm1_spec: SubgroupSpec) -> None:
        elements = list(det_pm1_spec.at(1))
        assert elements == sorted(elements)

    def test_named_constructors(self) -> None:
        assert SubgroupSpec.full(3).name == "full-gl2-3"
        assert SubgroupSpec.trivial(3).order_at(2) == 81


class TestIndexSequence:
    def test_borel(self, borel3: SubgroupSpec) -> None:
        assert index_sequence(borel3, 3) == [4, 4, 4]
        assert detect_level(borel3) == 3

    def test_level_nine(self, det_pm1_spec: SubgroupSpec) -> None:
        assert det_pm1_spec.order_at(2) == 1296
        assert index_sequence(det_pm1_spec, 3) == [1, 3, 3]
        assert detect_level(det_pm1_spec) == 9

    def test_full_group(self) -> None:
        assert index_sequence(SubgroupSpec.full(3), 2) == [1, 1]

    def test_ell_two_skips_first_step(self) -> None:
        # index 1 at every level, so stabilisation is read at n = 2
        assert detect_level(SubgroupSpec.full(2)) == 4

    def test_no_stabilisation(self, det_pm1_spec: SubgroupSpec) -> None:
        assert detect_level(det_pm1_spec, m_max=2) is None

    def test_m_max_must_be_positive(self, borel3: SubgroupSpec) -> None:
        with pytest.raises(ValueError):
            index_sequence(borel3, 0)


class TestOrbitTree:
    def test_borel_level_one(self, borel3: SubgroupSpec) -> None:
        assert orbit_tree(borel3, 1).degrees_at(1) == [1, 3]

    def test_borel_level_two(self, borel3: SubgroupSpec) -> None:
        tree = orbit_tree(borel3, 2)
        assert tree.degrees_at(2) == [9, 27]
        assert tree.source == "orbits"
        assert tree.certified_exponent == 1

    def test_full_group_is_transitive(self) -> None:
        assert orbit_tree(SubgroupSpec.full(3), 1).degrees_at(1) == [4]

    def test_trivial_group(self) -> None:
        tree = orbit_tree(SubgroupSpec.trivial(3), 2)
        assert tree.degrees_at(1) == [1, 1, 1, 1]
        assert tree.degrees_at(2) == [9, 9, 9, 9]

    def test_ell_two(self) -> None:
        tree = orbit_tree(SubgroupSpec.full(2), 2)
        assert tree.degrees_at(1) == [3]
        assert tree.degrees_at(2) == [6]

    def test_depth_zero(self, borel3: SubgroupSpec) -> None:
        tree = orbit_tree(borel3, 0)
        assert len(tree) == 1
        assert tree.curve is None

    def test_representatives_are_smallest(self, borel3: SubgroupSpec) -> None:
        tree = orbit_tree(borel3, 1)
        assert [n.representative for n in tree.level(1)] == [(1, 0), (0, 1)]

    @pytest.mark.parametrize("spec", [SubgroupSpec.borel(3), SubgroupSpec.trivial(3)], ids=["borel", "trivial"])
    def test_no_branching_past_the_level(self, spec: SubgroupSpec) -> None:
        level = detect_level(spec)
        assert level == 3
        tree = orbit_tree(spec, 3)
        branches = branch_vertices(tree)
        assert ROOT_ID in branches
        assert all(tree.node(node_id).level_exponent < 1 for node_id in branches)


class TestCosetFamily:
    def test_level_one_w_is_whole_group(self, borel3: SubgroupSpec) -> None:
        family = coset_family(borel3, 1)
        assert family.w == frozenset(borel3.elements)
        assert len(family.z) == 6
        assert len(family.h) == 2

    def test_classes_partition_w(self, borel3: SubgroupSpec) -> None:
        family = coset_family(borel3, 2)
        union = frozenset().union(*family.h)
        assert union == family.w
        assert sum(len(c) for c in family.h) == len(family.w)

    def test_classes_are_left_cosets_of_z(self, borel3: SubgroupSpec) -> None:
        family = coset_family(borel3, 2)
        for cls in family.h:
            alpha = min(cls)
            assert frozenset(alpha * z for z in family.z) == cls

    def test_w_shape(self, borel3: SubgroupSpec) -> None:
        for m in coset_family(borel3, 2).w:
            assert m.a % 3 == 1
            assert m.c % 3 == 0

    def test_unipotent_spec(self, unipotent_spec: SubgroupSpec) -> None:
        assert len(unipotent_spec.elements) == 9
        family = coset_family(unipotent_spec, 2)
        assert family.z == frozenset({MatMod.identity(3, 2)})
        assert len(family.h) == 9
        assert len(coset_family(unipotent_spec, 3).h) == 9

    def test_fixer_contains_upper_unipotent(self) -> None:
        family = coset_family(load_registry().spec("50.b1"), 3)
        assert MatMod.from_rows([[1, 13], [0, 1]], 3, 3) in family.z
        assert MatMod.from_rows([[1, 13], [3, 1]], 3, 3) not in family.z

    def test_rejects_nonpositive(self, borel3: SubgroupSpec) -> None:
        with pytest.raises(ValueError):
            coset_family(borel3, 0)


class TestPowerMap:
    def test_borel_recorded_witness(self, borel3: SubgroupSpec) -> None:
        verdict = power_map_well_defined(borel3, 2)
        assert not verdict
        assert verdict.witness == (A, B)

    @pytest.mark.parametrize("n", [1, 2])
    def test_witness_semantics(self, n: int) -> None:
        verdict = power_map_well_defined(load_registry().spec("50.b1"), n)
        assert not verdict
        assert verdict.witness is not None
        assert_same_class_different_cubes(*verdict.witness, n)

    def test_search_finds_witness_without_record(self, borel3: SubgroupSpec, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setattr(gl2, "_KNOWN_WITNESSES", {})
        verdict = power_map_well_defined(borel3, 2)
        assert not verdict
        assert verdict.witness == (MatMod.from_rows([[1, 0], [27, 2]], 3, 4), MatMod.identity(3, 4))
        assert_same_class_different_cubes(*verdict.witness, 2)

    def test_search_at_lowest_level(self, borel3: SubgroupSpec, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setattr(gl2, "_KNOWN_WITNESSES", {})
        verdict = power_map_well_defined(borel3, 1)
        assert verdict.witness == (MatMod.from_rows([[1, 0], [9, 2]], 3, 3), MatMod.identity(3, 3))

    def test_unipotent_well_defined_and_injective(self, unipotent_spec: SubgroupSpec) -> None:
        assert power_map_well_defined(unipotent_spec, 1).holds
        assert power_map_injective(unipotent_spec, 1)

    def test_injective_requires_trivial_fixer(self, borel3: SubgroupSpec) -> None:
        with pytest.raises(HypothesisViolatedError) as exc_info:
            power_map_injective(borel3, 1)
        assert exc_info.value.z_size == 54

    def test_n_must_be_positive(self, borel3: SubgroupSpec) -> None:
        with pytest.raises(ValueError):
            power_map_well_defined(borel3, 0)


class TestRaisingLemma:
    @pytest.mark.parametrize(("ell", "n"), [(3, 1), (3, 2), (5, 1)])
    def test_holds_for_odd_primes(self, ell: int, n: int) -> None:
        assert verify_raising_lemma(ell, n)

    def test_refuses_two(self) -> None:
        with pytest.raises(OddPrimeRequiredError) as exc_info:
            verify_raising_lemma(2, 1)
        assert exc_info.value.ell == 2

    def test_ell_two_failures_recorded(self) -> None:
        failures = raising_lemma_failures(2, 1)
        assert len(failures) == 32
        assert all(a == 1 for a, *_ in failures)

    def test_rejects_composite(self) -> None:
        with pytest.raises(ValueError):
            verify_raising_lemma(9, 1)

    def test_rejects_nonpositive_n(self) -> None:
        with pytest.raises(ValueError):
            verify_raising_lemma(3, 0)


class TestHypothesisCheck:
    def test_full_group_fails(self) -> None:
        assert not hypothesis_check(SubgroupSpec.full(3, 2), 1)

    def test_fixing_second_vector_holds(self, unipotent_spec: SubgroupSpec) -> None:
        assert hypothesis_check(unipotent_spec, 1)

    def test_borel_fails(self, borel3: SubgroupSpec) -> None:
        assert not hypothesis_check(borel3, 1)
