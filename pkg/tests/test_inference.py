import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_joint, threshold_instance
from cainfer.dag import Dag, ObservationGroups
from cainfer.discrete import (
    DiscreteMeasure,
    JointDistribution,
    VariableDecl,
    add_copy_variable,
    add_function_variable,
    entropy,
    fair_coin,
    make_copies,
    make_parity,
    multi_information_c,
    uniform,
)
from cainfer.errors import MarkovPreconditionError, MissingAssumptionError, SizeGuardError
from cainfer.inference import (
    ObservationValues,
    ancestor_entropy_bound,
    check_decomposition,
    epsilon_and_bound,
    infer_multiplicity,
    submodularity_audit,
    synergy_decomposition,
)
from cainfer.oracle import build_hub_net, build_triple_overlap_net, exact_joint, random_bayes_net

GROUPS3 = [["X1"], ["X2"], ["X3"]]


def copy_values(dist, groups, **kw):
    y = add_copy_variable(dist, "Y", [v for g in groups for v in g])
    return ObservationValues.from_distribution(y, groups, ["Y"], **kw)


def additive_values(singles):
    n = len(singles)
    return ObservationValues(
        n,
        {frozenset(s): sum(singles[i] for i in s) for r in range(n + 1) for s in itertools.combinations(range(n), r)},
        y_is_function_of_obs=True,
    )


class TestObservationValues:
    def test_requires_all_subsets(self):
        with pytest.raises(MissingAssumptionError):
            ObservationValues(2, {frozenset(): 0.0, frozenset({0}): 1.0})

    def test_empty_value_zero(self):
        with pytest.raises(ValueError):
            ObservationValues(1, {frozenset(): 0.5, frozenset({0}): 1.0})

    def test_monotone(self):
        with pytest.raises(ValueError, match="monotone"):
            ObservationValues(2, {frozenset(): 0, frozenset({0}): 1, frozenset({1}): 0, frozenset({0, 1}): 0.5})

    def test_ancestral_consistency(self):
        vals = additive_values([1.0, 1.0]).values
        with pytest.raises(ValueError):
            ObservationValues(2, vals, ancestral_info=5.0, y_is_function_of_obs=True)

    def test_ancestral_requires_assumption(self):
        obs = ObservationValues(1, {frozenset(): 0.0, frozenset({0}): 1.0})
        with pytest.raises(MissingAssumptionError):
            obs.ancestral()
        assert ObservationValues(1, obs.values, ancestral_info=2.0).ancestral() == 2.0

    def test_from_distribution(self):
        obs = copy_values(make_copies(3, fair_coin()), GROUPS3)
        assert obs.singles == pytest.approx([1.0, 1.0, 1.0])
        assert obs.total == pytest.approx(1.0)
        assert obs[[0, 2]] == pytest.approx(1.0)


class TestInferMultiplicity:
    def test_three_copies(self):
        r = infer_multiplicity(dist=make_copies(3, fair_coin()), groups=GROUPS3)
        assert r.largest_c == 2
        assert r.result(2).criterion == pytest.approx(0.5, abs=1e-12)
        assert r.conclusions[-1]["claim"] == "common_ancestor_ge" and r.conclusions[-1]["k"] == 3

    def test_parity(self):
        r = infer_multiplicity(dist=make_parity(3, float("inf")), groups=GROUPS3)
        assert r.largest_c == 1
        assert r.result(1).criterion == pytest.approx(1.0, abs=1e-12)
        assert r.result(2).criterion == pytest.approx(-0.5, abs=1e-12)
        assert r.conclusions[1]["claim"] == "no_conclusion"

    def test_entropy_below_three_halves(self):
        d = threshold_instance(1.4)
        assert entropy(d, ["X1", "X2", "X3"]) == pytest.approx(1.4, abs=1e-12)
        assert infer_multiplicity(dist=d, groups=GROUPS3).largest_c == 2

    def test_entropy_above_three_halves(self):
        assert infer_multiplicity(dist=threshold_instance(1.6), groups=GROUPS3).largest_c == 1

    def test_value_mode_matches_redundancy(self):
        obs = copy_values(make_copies(3, fair_coin()), GROUPS3, y_is_function_of_obs=True)
        r = infer_multiplicity(obs)
        assert r.mode == "values" and r.largest_c == 2
        assert r.result(2).bound == pytest.approx(1.0, abs=1e-12)

    def test_value_mode_requires_assumption(self):
        obs = copy_values(make_copies(3, fair_coin()), GROUPS3)
        with pytest.raises(MissingAssumptionError):
            infer_multiplicity(obs)

    def test_redundancy_mode(self):
        d = add_copy_variable(make_copies(3, fair_coin()), "Y", ["X1", "X2", "X3"])
        r = infer_multiplicity(dist=d, groups=GROUPS3, y=["Y"])
        assert r.mode == "redundancy" and r.largest_c == 2
        assert r.quantities["r_2_bits"] == pytest.approx(0.5)

    def test_unobserved_flag(self):
        r = infer_multiplicity(dist=make_copies(3, fair_coin()), groups=GROUPS3, assume_no_direct_influence=True)
        assert r.conclusions[-1]["claim"] == "unobserved_common_ancestor_ge"
        assert any("caller assertion" in a for a in r.assumptions)

    def test_needs_input(self):
        with pytest.raises(MissingAssumptionError):
            infer_multiplicity()

    def test_report_dict(self):
        d = infer_multiplicity(dist=make_copies(3, fair_coin()), groups=GROUPS3).to_dict()
        assert d["largest_c"] == 2 and d["tolerance_bits"] == 1e-6
        assert d["quantities"]["I_1_bits"] == pytest.approx(2.0)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(min_value=0, max_value=2**32 - 1))
    def test_conclusions_are_downward_closed(self, seed):
        d = random_joint(np.random.default_rng(seed), 4)
        r = infer_multiplicity(dist=d, groups=[["V1"], ["V2"], ["V3"], ["V4"]])
        flags = [res.qualifies for res in r.per_c]
        assert flags == sorted(flags, reverse=True)


class TestAncestorEntropyBound:
    def test_three_copies(self):
        assert ancestor_entropy_bound([1, 1, 1], 1.0, 2) == pytest.approx(1.0)
        assert ancestor_entropy_bound([1, 1, 1], 1.0, 1) == pytest.approx(1.0)

    def test_tight_on_hub(self):
        net = build_hub_net(3)
        assert entropy(exact_joint(net), ["U"]) == pytest.approx(ancestor_entropy_bound([1, 1, 1], 1.0, 2))

    def test_product_has_no_bound(self):
        assert ancestor_entropy_bound([1, 1, 1], 3.0, 1) is None
        assert ancestor_entropy_bound([1, 1, 1], 3.0, 2) is None

    def test_range(self):
        with pytest.raises(ValueError):
            ancestor_entropy_bound([1, 1, 1], 1.0, 3)

    def test_never_exceeds_hub_source_entropy(self, rng):
        for _ in range(20):
            k = int(rng.integers(2, 5))
            src = rng.dirichlet(np.ones(k))
            n = int(rng.integers(2, 5))
            joint = exact_joint(build_hub_net(n, src))
            xs = [f"X{i + 1}" for i in range(n)]
            h_u = entropy(joint, ["U"])
            for c in range(1, n):
                b = ancestor_entropy_bound([entropy(joint, [x]) for x in xs], entropy(joint, xs), c)
                assert b is None or b <= h_u + 1e-9


class TestEpsilonAndBound:
    def test_three_copies(self):
        obs = copy_values(make_copies(3, fair_coin()), GROUPS3, y_is_function_of_obs=True)
        eps, bound = epsilon_and_bound(obs, [2, 2, 2])
        assert eps == pytest.approx(0.5, abs=1e-12)
        assert bound == pytest.approx(1.0, abs=1e-12)

    def test_independent_case(self):
        eps, bound = epsilon_and_bound(additive_values([0.3, 0.5, 0.9]), [1, 1, 1])
        assert eps == pytest.approx(0.0, abs=1e-12) and bound is None

    def test_parity(self):
        obs = copy_values(make_parity(3, float("inf")), GROUPS3, y_is_function_of_obs=True)
        eps, bound = epsilon_and_bound(obs, [2, 2, 2])
        assert eps == pytest.approx(-0.5, abs=1e-12) and bound is None

    def test_mixed_vector(self):
        obs = copy_values(make_copies(3, fair_coin()), GROUPS3, y_is_function_of_obs=True)
        eps, bound = epsilon_and_bound(obs, [1, 2, 2])
        assert eps == pytest.approx(1.0) and bound == pytest.approx(1.0)

    def test_range_and_length(self):
        obs = additive_values([1.0, 1.0, 1.0])
        with pytest.raises(ValueError):
            epsilon_and_bound(obs, [3, 1, 1])
        with pytest.raises(ValueError):
            epsilon_and_bound(obs, [1, 1])

    def test_missing_ancestral(self):
        obs = copy_values(make_copies(3, fair_coin()), GROUPS3)
        with pytest.raises(MissingAssumptionError):
            epsilon_and_bound(obs, [2, 2, 2])


def with_leaf_y(net, groups, name="Y"):
    joint = exact_joint(net)
    obs_nodes = [v for g in groups for v in g]
    joint = add_copy_variable(joint, name, obs_nodes)
    dag = Dag(net.dag.nodes + (name,), net.dag.edges + tuple((v, name) for v in obs_nodes))
    return dag, joint


class TestCheckDecomposition:
    def test_triple_overlap(self):
        net = build_triple_overlap_net()
        groups = [["X1"], ["X2"], ["X3"], ["X4"]]
        dag, joint = with_leaf_y(net, groups)
        rep = check_decomposition(dag, DiscreteMeasure(joint), ObservationGroups(dag, groups, ["Y"]))
        assert rep.d == [3, 3, 3, 3]
        assert rep.observed_total == pytest.approx(3.0)
        assert rep.observed_weighted == pytest.approx(3.0)
        assert rep.observed_slack == pytest.approx(0.0, abs=1e-12)
        assert rep.node_slack >= -1e-9
        assert rep.ancestral_slack >= -1e-9

    def test_single_group(self):
        net = random_bayes_net(4, 0.5, seed=1)
        dag, joint = with_leaf_y(net, [["X2"]])
        rep = check_decomposition(dag, DiscreteMeasure(joint), ObservationGroups(dag, [["X2"]], ["Y"]))
        assert rep.d == [1]
        assert rep.observed_slack == pytest.approx(0.0, abs=1e-12)
        assert rep.observed_total == pytest.approx(entropy(joint, ["X2"]))

    def test_full_copy_equality(self):
        for seed in range(15):
            net = random_bayes_net(5, 0.5, seed=seed)
            dag, joint = with_leaf_y(net, [[v] for v in net.dag.nodes])
            obs = ObservationGroups(dag, [[v] for v in net.dag.nodes], ["Y"])
            rep = check_decomposition(dag, DiscreteMeasure(joint), obs)
            assert rep.node_slack >= -1e-9
            # a full copy of every node preserves all local independences
            assert rep.node_equality_expected and rep.node_equality_achieved

    def test_random_groups(self, rng):
        for seed in range(20):
            net = random_bayes_net(6, 0.5, seed=seed)
            picks = rng.permutation(6)[: int(rng.integers(2, 5))]
            groups = [[net.dag.nodes[i]] for i in picks]
            dag, joint = with_leaf_y(net, groups)
            rep = check_decomposition(dag, DiscreteMeasure(joint), ObservationGroups(dag, groups, ["Y"]))
            for key, value in rep.slacks().items():
                if key != "y_screening_residual_bits":
                    assert value >= -1e-9, key
            assert rep.y_screened_residual <= 1e-9

    def test_values_only(self):
        net = build_triple_overlap_net()
        groups = [["X1"], ["X2"], ["X3"], ["X4"]]
        obs = ObservationGroups(net.dag, groups)
        values = copy_values(exact_joint(net), groups)
        rep = check_decomposition(net.dag, None, obs, values)
        assert rep.observed_slack == pytest.approx(0.0, abs=1e-12)
        assert rep.node_lhs is None

    def test_markov_precondition(self):
        joint = add_copy_variable(make_copies(2, fair_coin()), "Y", ["X1", "X2"])
        dag = Dag(["X1", "X2", "Y"], [("X1", "Y"), ("X2", "Y")])
        with pytest.raises(MarkovPreconditionError):
            check_decomposition(dag, DiscreteMeasure(joint), ObservationGroups(dag, [["X1"], ["X2"]], ["Y"]))


class TestSubmodularity:
    def test_independent_groups(self, rng):
        d = add_function_variable(uniform([2, 2, 2]), "Y", ["X1", "X2", "X3"], lambda v: (v[0] + 2 * v[1] * v[2]) % 3, 3)
        assert submodularity_audit(DiscreteMeasure(d), ["Y"], GROUPS3) == []

    def test_copies_of_y(self):
        d = add_copy_variable(make_copies(2, fair_coin()), "Y", ["X1"])
        out = submodularity_audit(DiscreteMeasure(d), ["Y"], [["X1"], ["X2"]])
        assert [(s, t) for s, t, _ in out] == [(frozenset({0}), frozenset({1}))]
        assert out[0][2] == pytest.approx(1.0)

    def test_single_group(self):
        assert submodularity_audit(DiscreteMeasure(make_copies(2, fair_coin())), ["X1"], [["X2"]]) == []

    def test_guards(self):
        m = DiscreteMeasure(uniform([2] * 14))
        with pytest.raises(SizeGuardError):
            submodularity_audit(m, ["X14"], [[f"X{i}"] for i in range(1, 14)])
        with pytest.raises(ValueError):
            submodularity_audit(m, ["X1"], [["X1"], ["X2"]])


def xor_instance(n):
    return add_function_variable(uniform([2] * n, prefix="O"), "Y", [f"O{i + 1}" for i in range(n)], lambda v: sum(v) % 2, 2)


class TestSynergy:
    def test_xor(self):
        r_y, r_o, r_oy = synergy_decomposition(xor_instance(3), [["O1"], ["O2"], ["O3"]], ["Y"], 1)
        assert (r_y, r_o, r_oy) == pytest.approx((-1.0, 0.0, 1.0), abs=1e-12)

    def test_independent_y(self, rng):
        base = random_joint(rng, 3, prefix="O")
        probs = np.einsum("a,y->ay", base.probs, [0.3, 0.7]).ravel()
        d = JointDistribution(base.variables + (VariableDecl("Y", 2),), probs)
        r_y, r_o, r_oy = synergy_decomposition(d, [["O1"], ["O2"], ["O3"]], ["Y"], 2)
        assert r_y == pytest.approx(0.0, abs=1e-12)
        assert r_oy == pytest.approx(r_o, abs=1e-12)

    def test_copy_is_not_synergistic(self, rng):
        base = random_joint(rng, 3, prefix="O")
        d = add_copy_variable(base, "Y", ["O1", "O2", "O3"])
        r_y, _, _ = synergy_decomposition(d, [["O1"], ["O2"], ["O3"]], ["Y"], 1)
        assert r_y == pytest.approx(multi_information_c(base, [["O1"], ["O2"], ["O3"]], 1), abs=1e-12)
        assert r_y >= 0

    def test_identity_on_random_instances(self, rng):
        for _ in range(30):
            d = random_joint(rng, 4)
            for c in (1, 2, 3):
                r_y, r_o, r_oy = synergy_decomposition(d, [["V1"], ["V2"], ["V3"]], ["V4"], c)
                assert abs(r_y - (r_o - r_oy)) <= 1e-9

    def test_needs_distribution(self):
        with pytest.raises(TypeError):
            synergy_decomposition(DiscreteMeasure(fair_coin()), [["X"]], ["X"], 1)
