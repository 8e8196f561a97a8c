import itertools

import numpy as np
import pytest

import brute
from conftest import random_joint
from cainfer.discrete import DiscreteMeasure, fair_coin, make_copies, make_parity, uniform
from cainfer.errors import ForeignElementError, OverlapError, SizeGuardError
from cainfer.measure import (
    GroundSet,
    InfoMeasure,
    audit_axioms,
    audit_derived,
    cmi,
    disjoint_tuples,
    is_independent,
    submasks,
)


class TestGroundSet:
    def test_rejects_duplicates_and_empty_names(self):
        with pytest.raises(ValueError):
            GroundSet(["a", "a"])
        with pytest.raises(ValueError):
            GroundSet(["a", ""])

    def test_subset_roundtrip(self):
        g = GroundSet(["a", "b", "c"])
        s = g.subset(["c", "a"])
        assert s.mask == 0b101
        assert s.names == ("a", "c")
        assert s.members == frozenset({0, 2})
        assert len(s) == 2

    def test_unknown_element(self):
        with pytest.raises(ForeignElementError):
            GroundSet(["a"]).subset(["z"])


def test_submasks_are_ascending_and_complete():
    free = 0b1011
    subs = list(submasks(free))
    assert subs == sorted(subs)
    assert set(subs) == {m for m in range(16) if m & ~free == 0}


def test_disjoint_tuples_count():
    # each element goes to one of arity slots or none
    for k in range(5):
        assert sum(1 for _ in disjoint_tuples(k, 3)) == 4**k
        assert sum(1 for _ in disjoint_tuples(k, 4)) == 5**k


class TestCmi:
    def test_normalization(self, rng):
        m = DiscreteMeasure(random_joint(rng, 3))
        assert cmi(m, ["V1"], [], ["V2"]) == 0.0
        assert cmi(m, [], ["V1"]) == 0.0

    def test_copy_pair_is_one_bit(self):
        m = DiscreteMeasure(make_copies(2, fair_coin()))
        assert cmi(m, ["X1"], ["X2"]) == pytest.approx(brute.cmi(brute.copies_outcomes(2), [0], [1]), abs=1e-12)
        assert cmi(m, ["X1"], ["X2"]) == pytest.approx(1.0, abs=1e-12)

    def test_independent_coins(self):
        m = DiscreteMeasure(uniform([2, 2]))
        assert cmi(m, ["X1"], ["X2"]) == pytest.approx(0.0, abs=1e-12)

    def test_overlap_rejected(self):
        m = DiscreteMeasure(uniform([2, 2]))
        with pytest.raises(OverlapError):
            cmi(m, ["X1"], ["X1", "X2"])

    def test_foreign_subset_rejected(self):
        m = DiscreteMeasure(uniform([2, 2]))
        other = GroundSet(["X1", "X2", "X3"])
        with pytest.raises(ForeignElementError):
            cmi(m, other.subset(["X1"]), ["X2"])

    def test_symmetry_is_bitwise(self, rng):
        m = DiscreteMeasure(random_joint(rng, 5))
        g = m.ground
        for a, b, c in disjoint_tuples(5, 3):
            assert m.cmi_masks(a, b, c) == m.cmi_masks(b, a, c)
        assert cmi(m, g.subset(["V1"]), g.subset(["V2", "V3"])) == cmi(m, ["V2", "V3"], ["V1"])


class TestIsIndependent:
    def test_independent_coins(self):
        assert is_independent(DiscreteMeasure(uniform([2, 2])), ["X1"], ["X2"], tol=1e-9)

    def test_copy_pair(self):
        assert not is_independent(DiscreteMeasure(make_copies(2, fair_coin())), ["X1"], ["X2"], tol=1e-9)

    def test_copy_chain_screened_by_middle(self):
        m = DiscreteMeasure(make_copies(3, fair_coin()))
        assert is_independent(m, ["X1"], ["X3"], ["X2"], tol=1e-9)

    def test_negative_tol(self):
        with pytest.raises(ValueError):
            is_independent(DiscreteMeasure(uniform([2])), ["X1"], [], tol=-1)


class _Corrupted(InfoMeasure):
    """Wraps a measure and returns -1 on one unordered pair (A, B) given C."""

    def __init__(self, inner, a, b, c):
        self.inner = inner
        self.ground = inner.ground
        self.bad = (frozenset({a, b}), c)

    def cmi_masks(self, a, b, c=0):
        if (frozenset({a, b}), c) == self.bad:
            return -1.0
        return self.inner.cmi_masks(a, b, c)


class TestAuditAxioms:
    def test_valid_discrete_measure(self, rng):
        for n in range(1, 7):
            report = audit_axioms(DiscreteMeasure(random_joint(rng, n)), tol=1e-9)
            assert report.passed, report.violations[:3]
            assert report.worst_violation == 0.0
            assert report.checked_triples == 4**n

    def test_fault_injection_reports_exactly_touching_instances(self):
        inner = DiscreteMeasure(make_parity(4, float("inf")))
        a, b, c = 0b0001, 0b0010, 0b0100
        report = audit_axioms(_Corrupted(inner, a, b, c), tol=1e-9)
        key = (frozenset({a, b}), c)

        expected = {("non-negativity", (a, b, c)), ("non-negativity", (b, a, c))}
        for q in disjoint_tuples(4, 4):
            qa, qb, qc, qd = q
            terms = [((qa, qb | qc, qd), +1), ((qa, qb, qc | qd), -1), ((qa, qc, qd), -1)]
            weight = sum(s for (x, y, z), s in terms if (frozenset({x, y}), z) == key)
            if weight:
                expected.add(("chain rule", q))
        g = inner.ground
        got = {(v.axiom, tuple(g.subset(names).mask for names in v.arguments)) for v in report.violations}
        assert got == expected

    def test_size_guard(self):
        class Big(InfoMeasure):
            ground = GroundSet([f"e{i}" for i in range(13)])

            def cmi_masks(self, a, b, c=0):
                return 0.0

        with pytest.raises(SizeGuardError):
            audit_axioms(Big())
        # an explicit family bypasses the guard
        assert audit_axioms(Big(), family=[(["e0"], ["e1"], ["e2"])]).passed

    def test_report_dict(self, rng):
        d = audit_axioms(DiscreteMeasure(random_joint(rng, 2))).to_dict()
        assert d["violations"] == [] and d["worst_violation_bits"] == 0.0


class TestAuditDerived:
    def test_noisy_chain_data_processing(self):
        # X -> Y -> Z with 10% flips on each link
        flip = 0.1
        table = np.zeros((2, 2, 2))
        for x, y, z in itertools.product(range(2), repeat=3):
            table[x, y, z] = 0.5 * (flip if x != y else 1 - flip) * (flip if y != z else 1 - flip)
        from cainfer.discrete import JointDistribution, VariableDecl

        dist = JointDistribution([VariableDecl(n, 2) for n in "XYZ"], table)
        m = DiscreteMeasure(dist)
        assert cmi(m, ["X"], ["Z"], ["Y"]) == pytest.approx(0.0, abs=1e-12)
        assert cmi(m, ["X"], ["Y"]) >= cmi(m, ["X"], ["Z"])
        assert audit_derived(m).passed

    def test_conditioning_difference(self, rng):
        # A, C independent coins, B and Y arbitrary functions/noise of them
        base = random_joint(rng, 2, prefix="W")
        from cainfer.discrete import JointDistribution, VariableDecl

        pa, pc = rng.dirichlet([1, 1]), rng.dirichlet([1, 1])
        rest = rng.dirichlet(np.ones(4), size=4).reshape(2, 2, 2, 2)  # p(b, y | a, c)
        table = np.einsum("a,c,acby->abcy", pa, pc, rest)
        dist = JointDistribution([VariableDecl(n, 2) for n in ("A", "B", "C", "Y")], table)
        m = DiscreteMeasure(dist)
        assert base  # fixture sanity
        lhs = cmi(m, ["Y"], ["A"], ["B", "C"]) - cmi(m, ["Y"], ["A"], ["B"])
        rhs = cmi(m, ["A"], ["C"], ["B", "Y"]) - cmi(m, ["A"], ["C"], ["B"])
        assert lhs == pytest.approx(rhs, abs=1e-12)
        # with B empty the premise I(A:C)=0 holds and the difference is I(A:C|Y)
        diff = cmi(m, ["Y"], ["A"], ["C"]) - cmi(m, ["Y"], ["A"])
        assert diff == pytest.approx(cmi(m, ["A"], ["C"], ["Y"]), abs=1e-12)

    def test_random_measures_have_no_semi_graphoid_violations(self, rng):
        for n in range(2, 6):
            assert audit_derived(DiscreteMeasure(random_joint(rng, n))).passed

    def test_structured_measures(self):
        for dist in (make_parity(4, float("inf")), make_copies(4, fair_coin()), uniform([2, 2, 2, 2])):
            report = audit_derived(DiscreteMeasure(dist))
            assert report.passed, report.violations[:3]

    def test_corrupted_measure_is_caught(self):
        inner = DiscreteMeasure(make_copies(3, fair_coin()))
        # claim X1 independent of X2 although they are copies
        report = audit_derived(_Corrupted(inner, 0b001, 0b010, 0))
        assert not report.passed
