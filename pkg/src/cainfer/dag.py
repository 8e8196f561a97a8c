"""Directed acyclic graphs, d-separation and Markov-condition checks.

A node counts as its own ancestor throughout: ``ancestral_closure(S)``
contains ``S``. Node iteration always follows declaration order.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from cainfer.errors import (
    CycleError,
    ForeignElementError,
    MissingAssumptionError,
    OverlapError,
    SizeGuardError,
    UnknownNodeError,
)
from cainfer.measure import DEFAULT_TOL, InfoMeasure, disjoint_tuples

MAX_GLOBAL_MARKOV_NODES = 8


class Dag:
    """Immutable DAG over named nodes. Acyclicity is checked on construction."""

    def __init__(self, nodes: Iterable[str], edges: Iterable[tuple[str, str]] = ()):
        self.nodes: tuple[str, ...] = tuple(str(n) for n in nodes)
        if len(set(self.nodes)) != len(self.nodes):
            raise ValueError(f"duplicate node names in {self.nodes}")
        self._pos = {n: i for i, n in enumerate(self.nodes)}
        edge_list = [(str(u), str(v)) for u, v in edges]
        if len(set(edge_list)) != len(edge_list):
            raise ValueError("duplicate edges")
        parents: dict[str, list[str]] = {n: [] for n in self.nodes}
        children: dict[str, list[str]] = {n: [] for n in self.nodes}
        for u, v in edge_list:
            for x in (u, v):
                if x not in self._pos:
                    raise UnknownNodeError(f"edge ({u!r}, {v!r}) references unknown node {x!r}")
            if u == v:
                raise CycleError(f"self-loop on {u!r}")
            parents[v].append(u)
            children[u].append(v)
        order = self._pos.__getitem__
        self._parents = {n: tuple(sorted(ps, key=order)) for n, ps in parents.items()}
        self._children = {n: tuple(sorted(cs, key=order)) for n, cs in children.items()}
        self.edges: tuple[tuple[str, str], ...] = tuple(
            sorted(edge_list, key=lambda e: (order(e[0]), order(e[1])))
        )
        self.topological_order = self._toposort()

    def _toposort(self) -> tuple[str, ...]:
        indeg = {n: len(self._parents[n]) for n in self.nodes}
        ready = [n for n in self.nodes if indeg[n] == 0]
        out = []
        while ready:
            n = ready.pop(0)
            out.append(n)
            for ch in self._children[n]:
                indeg[ch] -= 1
                if indeg[ch] == 0:
                    ready.append(ch)
            ready.sort(key=self._pos.__getitem__)
        if len(out) != len(self.nodes):
            raise CycleError("graph contains a directed cycle")
        return tuple(out)

    def __repr__(self):
        return f"Dag(nodes={list(self.nodes)}, edges={[list(e) for e in self.edges]})"

    def __eq__(self, other):
        return isinstance(other, Dag) and self.nodes == other.nodes and set(self.edges) == set(other.edges)

    def __hash__(self):
        return hash((self.nodes, frozenset(self.edges)))

    def check_nodes(self, nodes: Iterable[str]) -> frozenset[str]:
        nodes = frozenset(nodes)
        unknown = nodes - self._pos.keys()
        if unknown:
            raise UnknownNodeError(f"unknown nodes {sorted(unknown)}")
        return nodes

    def sorted(self, nodes: Iterable[str]) -> tuple[str, ...]:
        return tuple(sorted(nodes, key=self._pos.__getitem__))

    def parents(self, node: str) -> tuple[str, ...]:
        self.check_nodes([node])
        return self._parents[node]

    def children(self, node: str) -> tuple[str, ...]:
        self.check_nodes([node])
        return self._children[node]

    def descendants(self, node: str) -> frozenset[str]:
        """Strict descendants of ``node``."""
        self.check_nodes([node])
        seen: set[str] = set()
        stack = list(self._children[node])
        while stack:
            v = stack.pop()
            if v not in seen:
                seen.add(v)
                stack.extend(self._children[v])
        return frozenset(seen)

    def non_descendants(self, node: str) -> frozenset[str]:
        return frozenset(self.nodes) - self.descendants(node) - {node}

    def is_leaf(self, node: str) -> bool:
        return not self.children(node)

    def subgraph(self, nodes: Iterable[str]) -> "Dag":
        keep = self.check_nodes(nodes)
        return Dag(
            [n for n in self.nodes if n in keep],
            [(u, v) for u, v in self.edges if u in keep and v in keep],
        )


def ancestral_closure(dag: Dag, s: Iterable[str]) -> frozenset[str]:
    """Smallest ancestral node set containing ``s``."""
    s = dag.check_nodes(s)
    seen = set(s)
    stack = list(s)
    while stack:
        for p in dag._parents[stack.pop()]:
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return frozenset(seen)


def _check_triple(dag: Dag, a, b, c) -> tuple[frozenset, frozenset, frozenset]:
    a, b, c = dag.check_nodes(a), dag.check_nodes(b), dag.check_nodes(c)
    if a & b or a & c or b & c:
        raise OverlapError(f"d-separation arguments overlap: {sorted(a)}, {sorted(b)}, {sorted(c)}")
    return a, b, c


def d_separated(dag: Dag, a: Iterable[str], b: Iterable[str], c: Iterable[str] = ()) -> bool:
    """Whether ``c`` d-separates ``a`` from ``b``.

    Reachability formulation: walk (node, direction) states from ``a``; a
    trail may pass a non-collider only if it is outside ``c`` and a collider
    only if the collider or one of its descendants is in ``c``.
    """
    a, b, c = _check_triple(dag, a, b, c)
    if not a or not b:
        return True
    opens_collider = ancestral_closure(dag, c)
    # "up": arrived from a child (or start); "down": arrived from a parent
    queue = deque((n, "up") for n in dag.sorted(a))
    visited: set[tuple[str, str]] = set()
    while queue:
        node, direction = queue.popleft()
        if (node, direction) in visited:
            continue
        visited.add((node, direction))
        if node in b:
            return False
        if direction == "up" and node not in c:
            queue.extend((p, "up") for p in dag._parents[node])
            queue.extend((ch, "down") for ch in dag._children[node])
        elif direction == "down":
            if node not in c:
                queue.extend((ch, "down") for ch in dag._children[node])
            if node in opens_collider:
                queue.extend((p, "up") for p in dag._parents[node])
    return True


def d_separated_by_paths(dag: Dag, a: Iterable[str], b: Iterable[str], c: Iterable[str] = ()) -> bool:
    """d-separation by enumerating every undirected simple path.

    Exponential; meant as an independent cross-check on small graphs.
    """
    a, b, c = _check_triple(dag, a, b, c)
    if not a or not b:
        return True
    edges = set(dag.edges)
    neighbors = {n: dag._parents[n] + dag._children[n] for n in dag.nodes}
    desc_or_self = {n: dag.descendants(n) | {n} for n in dag.nodes}

    def blocked(path: list[str]) -> bool:
        for i in range(1, len(path) - 1):
            prev, x, nxt = path[i - 1], path[i], path[i + 1]
            collider = (prev, x) in edges and (nxt, x) in edges
            if collider:
                if not desc_or_self[x] & c:
                    return True
            elif x in c:
                return True
        return False

    def walk(path: list[str], on_path: set[str]) -> bool:
        """True if some extension of ``path`` reaching ``b`` is unblocked."""
        last = path[-1]
        if last in b and len(path) > 1:
            return not blocked(path)
        for nb in neighbors[last]:
            if nb in on_path or nb in a:
                continue
            path.append(nb)
            on_path.add(nb)
            found = walk(path, on_path)
            path.pop()
            on_path.discard(nb)
            if found:
                return True
        return False

    return not any(walk([s], {s}) for s in dag.sorted(a))


# -- Markov conditions -------------------------------------------------------


@dataclass
class MarkovCheckResult:
    violations: list[tuple] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        out = []
        for v in self.violations:
            if len(v) == 2:
                out.append({"node": v[0], "cmi_bits": v[1]})
            elif len(v) == 4:
                out.append({"a": list(v[0]), "b": list(v[1]), "c": list(v[2]), "cmi_bits": v[3]})
            else:
                out.append({"condition": v[0], "detail": v[1], "magnitude_bits": v[2]})
        return {"holds": self.holds, "violations": out, "notes": list(self.notes)}


def _require_nodes_in_measure(dag: Dag, measure: InfoMeasure) -> None:
    missing = [n for n in dag.nodes if n not in measure.ground]
    if missing:
        raise ForeignElementError(f"DAG nodes {missing} are not elements of the measure")


def local_markov_holds(dag: Dag, measure: InfoMeasure, tol: float = DEFAULT_TOL) -> MarkovCheckResult:
    """Check ``I(v : nd(v) \\ pa(v) | pa(v)) <= tol`` for every node ``v``."""
    _require_nodes_in_measure(dag, measure)
    result = MarkovCheckResult()
    for v in dag.nodes:
        pa = dag._parents[v]
        rest = dag.non_descendants(v) - set(pa)
        value = measure.cmi([v], dag.sorted(rest), pa)
        if value > tol:
            result.violations.append((v, value))
    return result


def global_markov_holds(dag: Dag, measure: InfoMeasure, tol: float = DEFAULT_TOL) -> MarkovCheckResult:
    """Check ``I(A:B|C) <= tol`` for every d-separated disjoint triple.

    Each unordered pair ``{A, B}`` is visited once.
    """
    n = len(dag.nodes)
    if n > MAX_GLOBAL_MARKOV_NODES:
        raise SizeGuardError(f"global Markov check limited to {MAX_GLOBAL_MARKOV_NODES} nodes, got {n}")
    _require_nodes_in_measure(dag, measure)
    result = MarkovCheckResult()
    names = dag.nodes
    unpack = lambda m: [names[i] for i in range(n) if m >> i & 1]  # noqa: E731
    for am, bm, cm in disjoint_tuples(n, 3):
        if not am or not bm or am > bm:
            continue
        a, b, c = unpack(am), unpack(bm), unpack(cm)
        if d_separated(dag, a, b, c):
            value = measure.cmi(a, b, c)
            if value > tol:
                result.violations.append((tuple(a), tuple(b), tuple(c), value))
    return result


@dataclass(frozen=True)
class ObservationGroups:
    """Observed node groups ``O_1..O_n`` and the reference nodes ``Y``.

    ``y_nodes`` may name elements outside the DAG (Y external to the model).
    """

    dag: Dag
    groups: tuple[frozenset[str], ...]
    y_nodes: frozenset[str] = frozenset()

    def __init__(self, dag: Dag, groups: Sequence[Iterable[str]], y_nodes: Iterable[str] = ()):
        groups = tuple(frozenset(g) for g in groups)
        y_nodes = frozenset(y_nodes)
        for i, g in enumerate(groups):
            if not g:
                raise ValueError(f"group {i} is empty")
            dag.check_nodes(g)
            if g & y_nodes:
                raise OverlapError(f"group {i} overlaps the Y nodes")
        object.__setattr__(self, "dag", dag)
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "y_nodes", y_nodes)

    @property
    def n(self) -> int:
        return len(self.groups)

    @property
    def y_internal(self) -> bool:
        return bool(self.y_nodes) and all(y in self.dag._pos for y in self.y_nodes)

    def union(self, indices: Iterable[int] | None = None) -> frozenset[str]:
        idx = range(self.n) if indices is None else indices
        out: frozenset[str] = frozenset()
        for i in idx:
            out |= self.groups[i]
        return out

    def ancestral_sets(self) -> list[frozenset[str]]:
        return [ancestral_closure(self.dag, g) for g in self.groups]


def ancestor_multiplicity(dag: Dag, obs: ObservationGroups, i: int) -> int:
    """Largest number of groups whose ancestral sets share one node of ``an(O_i)``."""
    if not 0 <= i < obs.n:
        raise IndexError(f"group index {i} out of range for {obs.n} groups")
    ancestral = [ancestral_closure(dag, g) for g in obs.groups]
    return max(sum(1 for an_j in ancestral if v in an_j) for v in dag.sorted(ancestral[i]))


def ancestor_multiplicities(dag: Dag, obs: ObservationGroups) -> list[int]:
    return [ancestor_multiplicity(dag, obs, i) for i in range(obs.n)]


def validate_dag_model(
    dag: Dag,
    measure: InfoMeasure,
    obs: ObservationGroups,
    observed_values: Mapping[frozenset[int], float],
    tol: float = DEFAULT_TOL,
) -> MarkovCheckResult:
    """Check that ``dag`` with ``measure`` is a DAG-model of an observation.

    Conditions: (i) groups are node subsets, (ii) local Markov holds,
    (iii) ``I(Y:O_S)`` reproduces ``observed_values[S]`` for all index sets
    ``S`` (0-based), (iv) Y nodes are leaves. When Y is not part of the DAG
    (iv) is reported as not applicable.
    """
    result = MarkovCheckResult()
    subsets = [frozenset(s) for r in range(obs.n + 1) for s in combinations(range(obs.n), r)]
    missing = [sorted(s) for s in subsets if s not in observed_values]
    if missing:
        raise MissingAssumptionError(f"observed_values lacks subsets {missing}")
    for i, g in enumerate(obs.groups):
        unknown = [x for x in g if x not in dag._pos]
        if unknown:
            result.violations.append(("i", f"group {i} has non-nodes {unknown}", 0.0))
    for v, value in local_markov_holds(dag, measure, tol).violations:
        result.violations.append(("ii", f"local Markov fails at {v}", value))
    y = sorted(obs.y_nodes)
    for s in subsets:
        nodes = dag.sorted(obs.union(s))
        model = measure.cmi(y, nodes) if y else 0.0
        gap = abs(model - observed_values[s])
        if gap > tol:
            result.violations.append(("iii", f"I(Y:O_S) mismatch for S={sorted(i + 1 for i in s)}", gap))
    if obs.y_internal:
        for yn in y:
            if dag._children[yn]:
                result.violations.append(("iv", f"Y node {yn} has children {list(dag._children[yn])}", 0.0))
    else:
        result.notes.append("condition (iv) not applicable: Y is not a node of the DAG")
    return result
