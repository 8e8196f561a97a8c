"""Brute-force verification backend.

Builds Bayesian nets with exact joint tables (random ones and a few fixed
constructions) and checks the information inequalities on them trial by
trial. Every trial draws from its own generator seeded with
``(seed, trial_index)``, so a failing trial can be replayed in isolation.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from cainfer.dag import Dag, ObservationGroups, ancestor_multiplicities, d_separated, local_markov_holds
from cainfer.discrete import (
    DiscreteMeasure,
    JointDistribution,
    MAX_TABLE_SIZE,
    VariableDecl,
    add_copy_variable,
    add_function_variable,
)
from cainfer.errors import SizeGuardError
from cainfer.inference import check_decomposition, submodularity_audit
from cainfer.measure import DEFAULT_TOL, disjoint_tuples

ROW_TOL = 1e-12


@dataclass(frozen=True)
class Cpt:
    """``p(node | parents)``; ``table`` has shape ``(*parent_cards, node_card)``."""

    node: str
    parents: tuple[str, ...]
    table: np.ndarray

    def __post_init__(self):
        table = np.asarray(self.table, dtype=float)
        if table.ndim != len(self.parents) + 1:
            raise ValueError(f"CPT of {self.node!r} needs {len(self.parents) + 1} axes")
        if np.any(table < 0) or np.any(np.abs(table.sum(axis=-1) - 1) > ROW_TOL):
            raise ValueError(f"CPT rows of {self.node!r} must be probability vectors")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)


class BayesNet:
    def __init__(self, dag: Dag, cpts: Sequence[Cpt]):
        by_node = {c.node: c for c in cpts}
        if set(by_node) != set(dag.nodes) or len(cpts) != len(dag.nodes):
            raise ValueError("need exactly one CPT per node")
        cards = {n: by_node[n].table.shape[-1] for n in dag.nodes}
        for n in dag.nodes:
            cpt = by_node[n]
            if set(cpt.parents) != set(dag.parents(n)) or len(cpt.parents) != len(dag.parents(n)):
                raise ValueError(f"CPT parents of {n!r} {cpt.parents} do not match the DAG {dag.parents(n)}")
            expected = tuple(cards[p] for p in cpt.parents)
            if cpt.table.shape[:-1] != expected:
                raise ValueError(f"CPT of {n!r} has shape {cpt.table.shape}, parents need {expected}")
        self.dag = dag
        self.cpts = by_node
        self.cardinalities = cards

    def __repr__(self):
        return f"BayesNet({self.dag!r})"


def _guard_size(cards: Sequence[int]) -> None:
    size = math.prod(cards)
    if size > MAX_TABLE_SIZE:
        raise SizeGuardError(f"joint table of {size} entries exceeds the guard of {MAX_TABLE_SIZE}")


def random_bayes_net(n_nodes: int, edge_prob: float, max_card: int = 2, seed: int = 0) -> BayesNet:
    """Random DAG (edges along a random node permutation) with flat-Dirichlet CPT rows."""
    if n_nodes < 1:
        raise ValueError("n_nodes must be >= 1")
    if max_card < 2:
        raise ValueError("max_card must be >= 2")
    if not 0.0 <= edge_prob <= 1.0:
        raise ValueError("edge_prob must lie in [0, 1]")
    if max_card**n_nodes > MAX_TABLE_SIZE:
        raise SizeGuardError(f"{n_nodes} nodes of cardinality up to {max_card} may exceed the table guard")
    rng = np.random.default_rng(seed)
    names = [f"X{i + 1}" for i in range(n_nodes)]
    order = rng.permutation(n_nodes)
    edges = [
        (names[order[i]], names[order[j]])
        for i in range(n_nodes)
        for j in range(i + 1, n_nodes)
        if rng.random() < edge_prob
    ]
    cards = {n: int(rng.integers(2, max_card + 1)) for n in names}
    dag = Dag(names, edges)
    cpts = []
    for n in names:
        pa = dag.parents(n)
        shape = tuple(cards[p] for p in pa)
        rows = rng.dirichlet(np.ones(cards[n]), size=math.prod(shape))
        cpts.append(Cpt(n, pa, rows.reshape(shape + (cards[n],))))
    return BayesNet(dag, cpts)


def exact_joint(net: BayesNet) -> JointDistribution:
    """Dense joint ``Π p(x_v | x_pa(v))`` over the nodes in declaration order."""
    nodes = net.dag.nodes
    _guard_size([net.cardinalities[n] for n in nodes])
    axis = {n: i for i, n in enumerate(nodes)}
    operands = []
    for n in nodes:
        cpt = net.cpts[n]
        operands += [cpt.table, [axis[p] for p in cpt.parents] + [axis[n]]]
    table = np.einsum(*operands, list(range(len(nodes))))
    decls = [VariableDecl(n, net.cardinalities[n]) for n in nodes]
    return JointDistribution(decls, table, normalize=True)


def _copy_cpt(node: str, parent: str, k: int) -> Cpt:
    return Cpt(node, (parent,), np.eye(k))


def build_parity_net() -> BayesNet:
    """Three uniform pairwise sources, each observation the spin product of two.

    With categories 0 = -1 and 1 = +1, the product of two spins is +1 exactly
    when the two categories agree.
    """
    sources = ["U12", "U13", "U23"]
    parents = {"X1": ("U12", "U13"), "X2": ("U12", "U23"), "X3": ("U13", "U23")}
    agree = np.zeros((2, 2, 2))
    for u in range(2):
        for v in range(2):
            agree[u, v, int(u == v)] = 1.0
    cpts = [Cpt(u, (), np.array([0.5, 0.5])) for u in sources]
    cpts += [Cpt(x, pa, agree) for x, pa in parents.items()]
    edges = [(p, x) for x, pa in parents.items() for p in pa]
    return BayesNet(Dag(sources + list(parents), edges), cpts)


def build_hub_net(n: int, source: Sequence[float] = (0.5, 0.5)) -> BayesNet:
    """Source ``U`` copied into ``X1..Xn``."""
    source = np.asarray(source, dtype=float)
    k = len(source)
    xs = [f"X{i + 1}" for i in range(n)]
    cpts = [Cpt("U", (), source)] + [_copy_cpt(x, "U", k) for x in xs]
    return BayesNet(Dag(["U"] + xs, [("U", x) for x in xs]), cpts)


def build_triple_overlap_net() -> BayesNet:
    """Four observations fed by three uniform bits, each bit shared by three observations.

    Every observation records the tuple of its sources, so no source reaches
    all four and the largest ancestor multiplicity is 3.
    """
    sources = {"X1": ("Ua", "Uc"), "X2": ("Ua", "Ub"), "X3": ("Ua", "Ub", "Uc"), "X4": ("Ub", "Uc")}
    cpts = [Cpt(u, (), np.array([0.5, 0.5])) for u in ("Ua", "Ub", "Uc")]
    for x, pa in sources.items():
        k = 2 ** len(pa)
        table = np.zeros((2,) * len(pa) + (k,))
        for state in np.ndindex(*(2,) * len(pa)):
            table[state + (int(np.ravel_multi_index(state, (2,) * len(pa))),)] = 1.0
        cpts.append(Cpt(x, pa, table))
    edges = [(p, x) for x, pa in sources.items() for p in pa]
    return BayesNet(Dag(["Ua", "Ub", "Uc", *sources], edges), cpts)


def independent_roots(cards: Sequence[int], rng: np.random.Generator, prefix: str = "R") -> BayesNet:
    names = [f"{prefix}{i + 1}" for i in range(len(cards))]
    cpts = [Cpt(n, (), rng.dirichlet(np.ones(k))) for n, k in zip(names, cards)]
    return BayesNet(Dag(names), cpts)


# -- batch verification ---------------------------------------------------------


@dataclass
class CheckTally:
    passed: int = 0
    failed: int = 0
    worst_slack: float = math.inf
    failing_trials: list[int] = field(default_factory=list)

    def add(self, slack: float, trial: int, tol: float) -> None:
        self.worst_slack = min(self.worst_slack, slack)
        if slack < -tol:
            self.failed += 1
            if trial not in self.failing_trials:
                self.failing_trials.append(trial)
        else:
            self.passed += 1


@dataclass(frozen=True)
class VerifyConfig:
    trials: int = 200
    n_nodes: int = 6
    edge_prob: float = 0.5
    max_groups: int = 3
    seed: int = 0
    tol: float = DEFAULT_TOL
    global_markov: bool = True

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 2 <= self.n_nodes <= 6:
            raise SizeGuardError("verification nets are limited to 2..6 binary nodes")
        if self.max_groups < 2:
            raise ValueError("max_groups must be >= 2")


@dataclass
class VerificationReport:
    config: VerifyConfig
    checks: dict[str, CheckTally] = field(default_factory=dict)

    @property
    def trials(self) -> int:
        return self.config.trials

    @property
    def violations(self) -> int:
        return sum(t.failed for t in self.checks.values())

    @property
    def worst_slack(self) -> float:
        return min((t.worst_slack for t in self.checks.values()), default=math.inf)

    def to_dict(self) -> dict:
        checks = {}
        for name, t in sorted(self.checks.items()):
            checks[name] = {
                "passed": t.passed,
                "failed": t.failed,
                "worst_slack_bits": None if math.isinf(t.worst_slack) else t.worst_slack,
                "failing_trials": list(t.failing_trials),
            }
        return {
            "config": asdict(self.config),
            "trials": self.trials,
            "checks": checks,
            "violations": self.violations,
            "tolerance_bits": self.config.tol,
            "seed": self.config.seed,
        }


def _pick_disjoint_groups(rng: np.random.Generator, nodes: Sequence[str], max_groups: int) -> list[list[str]]:
    pool = list(rng.permutation(len(nodes)))
    groups = []
    while pool and len(groups) < max_groups:
        size = min(int(rng.integers(1, 3)), len(pool))
        groups.append(sorted((nodes[i] for i in pool[:size]), key=nodes.index))
        pool = pool[size:]
    return groups


def _random_function(rng: np.random.Generator, n_inputs: int, k: int):
    table = rng.integers(0, k, size=n_inputs)
    return lambda vals, cards: int(table[int(np.ravel_multi_index(vals, cards))])


def _add_random_function(dist: JointDistribution, name: str, inputs: Sequence[str], rng) -> JointDistribution:
    cards = tuple(dist.cardinalities[dist.index(v)] for v in inputs)
    k = int(rng.integers(2, 5))
    fn = _random_function(rng, math.prod(cards), k)
    return add_function_variable(dist, name, inputs, lambda vals: fn(vals, cards), k)


def _max_dseparated_cmi(dag: Dag, measure) -> float:
    n = len(dag.nodes)
    worst = 0.0
    for am, bm, cm in disjoint_tuples(n, 3):
        if not am or not bm or am > bm:
            continue
        a, b, c = ([dag.nodes[i] for i in range(n) if m >> i & 1] for m in (am, bm, cm))
        if d_separated(dag, a, b, c):
            worst = max(worst, measure.cmi_masks(am, bm, cm))
    return worst


def _trial(config: VerifyConfig, t: int) -> list[tuple[str, float]]:
    rng = np.random.default_rng([config.seed, t])
    out: list[tuple[str, float]] = []
    net = random_bayes_net(config.n_nodes, config.edge_prob, 2, seed=int(rng.integers(2**32)))
    joint = exact_joint(net)
    measure = DiscreteMeasure(joint)
    local = local_markov_holds(net.dag, measure, tol=-math.inf)
    out.append(("local_markov", -max((v for _, v in local.violations), default=0.0)))
    if config.global_markov:
        out.append(("global_markov", -_max_dseparated_cmi(net.dag, measure)))

    groups = _pick_disjoint_groups(rng, net.dag.nodes, config.max_groups)
    observed = [v for v in net.dag.nodes if any(v in g for g in groups)]
    for scheme in ("copy", "function"):
        if scheme == "copy":
            dist_y = add_copy_variable(joint, "Y", observed)
        else:
            dist_y = _add_random_function(joint, "Y", observed, rng)
        model = Dag(net.dag.nodes + ("Y",), net.dag.edges + tuple((v, "Y") for v in observed))
        obs = ObservationGroups(model, groups, ["Y"])
        rep = check_decomposition(model, DiscreteMeasure(dist_y), obs, tol=config.tol)
        out.append(("y_screening", -rep.y_screened_residual))
        out.append(("node_decomposition", rep.node_slack))
        if rep.node_equality_expected:
            out.append(("node_decomposition_equality", -abs(rep.node_slack)))
        out.append(("ancestral_decomposition", rep.ancestral_slack))
        out.append(("ancestral_monotone", rep.ancestral_monotone_slack))
        out.append(("observed_decomposition", rep.observed_slack))

    # independent elements: overlapping groups of roots, arbitrary Y
    roots = independent_roots([2] * config.n_nodes, rng)
    root_joint = exact_joint(roots)
    names = roots.dag.nodes
    n_groups = int(rng.integers(2, config.max_groups + 2))
    overlapping = []
    for _ in range(n_groups):
        size = int(rng.integers(1, len(names) // 2 + 2))
        overlapping.append([names[i] for i in sorted(rng.choice(len(names), size=size, replace=False))])
    dist_y = _add_random_function(root_joint, "Y", list(names), rng)
    m = DiscreteMeasure(dist_y)
    d = ancestor_multiplicities(roots.dag, ObservationGroups(roots.dag, overlapping))
    union = sorted({v for g in overlapping for v in g}, key=names.index)
    lhs = m.cmi(["Y"], union)
    rhs = math.fsum(m.cmi(["Y"], g) / di for g, di in zip(overlapping, d))
    out.append(("independent_elements_decomposition", lhs - rhs))
    # identical groups O_1 = O_2 give d = 2 for both, so the bound is attained
    twin = overlapping[0]
    d_twin = ancestor_multiplicities(roots.dag, ObservationGroups(roots.dag, [twin, twin]))
    twin_info = m.cmi(["Y"], twin)
    out.append(("identical_groups_decomposition", twin_info - math.fsum(twin_info / di for di in d_twin)))

    disjoint = _pick_disjoint_groups(rng, names, config.max_groups)
    excess = submodularity_audit(m, ["Y"], disjoint, tol=-math.inf)
    out.append(("submodularity", -max((e for _, _, e in excess), default=0.0)))
    return out


def verify_batch(config: VerifyConfig | None = None, threads: int = 1, **kw) -> VerificationReport:
    """Run ``config.trials`` seeded trials and tally the slack of every check.

    A slack is ``lhs - rhs`` for an inequality ``lhs >= rhs`` and ``-|value|``
    for a quantity that must vanish; a check fails below ``-config.tol``.
    """
    config = config or VerifyConfig(**kw)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(lambda t: _trial(config, t), range(config.trials)))
    else:
        results = [_trial(config, t) for t in range(config.trials)]
    report = VerificationReport(config)
    for t, rows in enumerate(results):
        for name, slack in rows:
            report.checks.setdefault(name, CheckTally()).add(slack, t, config.tol)
    return report


def hub_source_entropy(net: BayesNet, source: str = "U") -> float:
    p = net.cpts[source].table
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())
