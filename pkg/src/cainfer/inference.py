"""From observed information values to common-ancestor conclusions.

Two entry modes are supported:

* **value mode**: an :class:`ObservationValues` holding ``I(Y:O_S)`` for all
  index sets ``S``;
* **distribution mode**: a :class:`~cainfer.discrete.JointDistribution` plus
  observed groups, with ``Y`` either a copy of the observations (entropies) or
  a named set of variables.

The basic criterion is the weighted redundancy
``(1/c) Σ I(Y:O_i) - I(Y:an(O_[n]))``. Whenever it is positive, every
DAG-model of the observation contains a node that is an ancestor of at least
``c + 1`` of the observed groups.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, Optional, Sequence

from cainfer.dag import Dag, ObservationGroups, ancestor_multiplicities, ancestral_closure, local_markov_holds
from cainfer.discrete import JointDistribution, VarSet, VarSetLike, cmi_discrete, entropy, redundancy_c
from cainfer.errors import (
    DegenerateConfigurationError,
    MarkovPreconditionError,
    MissingAssumptionError,
    SizeGuardError,
)
from cainfer.measure import DEFAULT_TOL, InfoMeasure

DEFAULT_DECISION_TOL = 1e-6
MAX_SUBMODULAR_GROUPS = 12


@dataclass(frozen=True)
class ObservationValues:
    """``I(Y:O_S)`` for every subset ``S`` of ``range(n)`` (0-based)."""

    n: int
    values: Mapping[frozenset[int], float]
    ancestral_info: Optional[float] = None
    y_is_function_of_obs: bool = False

    def __post_init__(self):
        values = {frozenset(k): float(v) for k, v in self.values.items()}
        for r in range(self.n + 1):
            for s in combinations(range(self.n), r):
                if frozenset(s) not in values:
                    raise MissingAssumptionError(f"no value for subset {[i + 1 for i in s]}")
        if abs(values[frozenset()]) > DEFAULT_TOL:
            raise ValueError("the value of the empty subset must be 0")
        for s, v in values.items():
            for i in s:
                if values[s - {i}] > v + DEFAULT_TOL:
                    raise ValueError(
                        f"values must be monotone: I(Y:O_S) for S={sorted(j + 1 for j in s)} "
                        f"is below its subset without {i + 1}"
                    )
        if (
            self.y_is_function_of_obs
            and self.ancestral_info is not None
            and abs(self.ancestral_info - values[frozenset(range(self.n))]) > DEFAULT_TOL
        ):
            raise ValueError("ancestral_info must equal I(Y:O_[n]) when Y is a function of the observations")
        object.__setattr__(self, "values", values)

    def __getitem__(self, s) -> float:
        return self.values[frozenset(s)]

    @property
    def singles(self) -> list[float]:
        return [self.values[frozenset({i})] for i in range(self.n)]

    @property
    def total(self) -> float:
        return self.values[frozenset(range(self.n))]

    def ancestral(self) -> float:
        """``I(Y:an(O_[n]))``: supplied directly, or ``I(Y:O_[n])`` under the function assumption."""
        if self.ancestral_info is not None:
            return self.ancestral_info
        if self.y_is_function_of_obs:
            return self.total
        raise MissingAssumptionError(
            "need ancestral_info or y_is_function_of_obs to bound the information about all ancestors"
        )

    @classmethod
    def from_distribution(
        cls, dist: JointDistribution, groups: Sequence[VarSetLike], y: VarSetLike, **kw
    ) -> "ObservationValues":
        groups = [VarSet.of(dist, g) for g in groups]
        y = VarSet.of(dist, y)
        values = {}
        for r in range(len(groups) + 1):
            for s in combinations(range(len(groups)), r):
                union = VarSet(dist, tuple(sorted({i for j in s for i in groups[j].indices})))
                values[frozenset(s)] = cmi_discrete(dist, y, union) if s else 0.0
        return cls(len(groups), values, **kw)


@dataclass(frozen=True)
class CResult:
    c: int
    criterion: float
    qualifies: bool
    bound: Optional[float] = None

    def claim(self, unobserved: bool) -> dict:
        if not self.qualifies:
            return {"c": self.c, "claim": "no_conclusion", "criterion_bits": self.criterion}
        return {
            "c": self.c,
            "claim": "unobserved_common_ancestor_ge" if unobserved else "common_ancestor_ge",
            "k": self.c + 1,
            "criterion_bits": self.criterion,
            "bound_bits": self.bound,
        }


@dataclass
class InferenceReport:
    mode: str
    n: int
    per_c: list[CResult] = field(default_factory=list)
    decision_tol: float = DEFAULT_DECISION_TOL
    epsilon: Optional[float] = None
    c_vec: Optional[tuple[int, ...]] = None
    epsilon_bound: Optional[float] = None
    slacks: dict[str, float] = field(default_factory=dict)
    quantities: dict[str, float] = field(default_factory=dict)
    assumptions: list[str] = field(default_factory=list)
    unobserved_ancestors: bool = False

    @property
    def largest_c(self) -> int:
        """Largest qualifying ``c``; 0 when none qualifies."""
        return max((r.c for r in self.per_c if r.qualifies), default=0)

    def result(self, c: int) -> CResult:
        for r in self.per_c:
            if r.c == c:
                return r
        raise KeyError(c)

    @property
    def conclusions(self) -> list[dict]:
        return [r.claim(self.unobserved_ancestors) for r in self.per_c]

    def to_dict(self) -> dict:
        out = {
            "mode": self.mode,
            "n": self.n,
            "quantities": dict(self.quantities),
            "conclusions": self.conclusions,
            "largest_c": self.largest_c,
            "slacks": dict(self.slacks),
            "assumptions": list(self.assumptions),
            "tolerance_bits": self.decision_tol,
        }
        if self.c_vec is not None:
            out["c_vec"] = list(self.c_vec)
            out["epsilon_bits"] = self.epsilon
            out["epsilon_bound_bits"] = self.epsilon_bound
        return out


def _positive(value: float, tol: float) -> Optional[float]:
    return value if value > tol else None


def ancestor_entropy_bound(
    group_entropies: Sequence[float], joint_entropy: float, c: int, decision_tol: float = 0.0
) -> Optional[float]:
    """Lower bound ``c/(n-c) * I_c`` on the entropy of all ancestors of more than ``c`` variables.

    Returns ``None`` ("no bound") when the bound is not positive.
    """
    n = len(group_entropies)
    if not 1 <= c <= n - 1:
        raise ValueError(f"c must lie in [1, {n - 1}], got {c}")
    i_c = math.fsum(group_entropies) / c - joint_entropy
    return _positive(c / (n - c) * i_c, decision_tol)


def epsilon_and_bound(obs: ObservationValues, c_vec: Sequence[int]) -> tuple[float, Optional[float]]:
    """Excess ``ε_c`` of weighted single-group information over ancestral information.

    Returns ``(ε_c, bound)`` where ``bound = ε_c / (Σ 1/c_i - 1)`` lower-bounds
    the information about the union of all ancestors shared by ``c_i + 1``
    groups, or ``None`` when ``ε_c <= 0`` (no conclusion).
    """
    c_vec = tuple(int(c) for c in c_vec)
    if len(c_vec) != obs.n:
        raise ValueError(f"need {obs.n} entries in c_vec, got {len(c_vec)}")
    if any(not 1 <= c <= obs.n - 1 for c in c_vec):
        raise ValueError(f"every c_i must lie in [1, {obs.n - 1}], got {c_vec}")
    weighted = math.fsum(v / c for v, c in zip(obs.singles, c_vec))
    eps = weighted - obs.ancestral()
    if eps <= 0:
        return eps, None
    coefficient = math.fsum(1 / c for c in c_vec) - 1
    if coefficient <= 0:
        raise DegenerateConfigurationError(f"Σ 1/c_i = {coefficient + 1} <= 1; bound is undefined")
    return eps, eps / coefficient


def _value_mode(obs: ObservationValues, decision_tol: float) -> InferenceReport:
    report = InferenceReport("values", obs.n, decision_tol=decision_tol)
    ancestral = obs.ancestral()
    report.quantities["info_singles_bits"] = obs.singles
    report.quantities["info_total_bits"] = obs.total
    report.quantities["info_ancestral_bits"] = ancestral
    if obs.ancestral_info is None:
        report.assumptions.append("Y depends on the system only through O_[n]; I(Y:an(O_[n])) = I(Y:O_[n])")
    else:
        report.assumptions.append("I(Y:an(O_[n])) supplied by caller")
    for c in range(1, obs.n):
        eps, bound = epsilon_and_bound(obs, [c] * obs.n)
        report.per_c.append(CResult(c, eps, eps > decision_tol, bound if eps > decision_tol else None))
    return report


def _distribution_mode(
    dist: JointDistribution, groups: Sequence[VarSetLike], y: VarSetLike, decision_tol: float
) -> InferenceReport:
    groups = [VarSet.of(dist, g) for g in groups]
    n = len(groups)
    h_single = [entropy(dist, g) for g in groups]
    union = VarSet(dist, tuple(sorted({i for g in groups for i in g.indices})))
    h_joint = entropy(dist, union)
    if y is None:
        report = InferenceReport("entropy", n, decision_tol=decision_tol)
        report.assumptions.append("Y is a copy of O_[n] (criterion is the multi-information I_c)")
        report.quantities["entropy_groups_bits"] = h_single
        report.quantities["entropy_joint_bits"] = h_joint
        for c in range(1, n + 1):
            i_c = math.fsum(h_single) / c - h_joint
            report.quantities[f"I_{c}_bits"] = i_c
            if c < n:
                ok = i_c > decision_tol
                bound = ancestor_entropy_bound(h_single, h_joint, c, decision_tol) if ok else None
                report.per_c.append(CResult(c, i_c, ok, bound))
        return report
    obs = ObservationValues.from_distribution(dist, groups, y, y_is_function_of_obs=True)
    report = _value_mode(obs, decision_tol)
    report.mode = "redundancy"
    for c in range(1, n + 1):
        report.quantities[f"r_{c}_bits"] = redundancy_c(dist, groups, y, c)
    report.assumptions.append("Y is a designated variable set of the distribution")
    return report


def infer_multiplicity(
    obs: ObservationValues | None = None,
    *,
    dist: JointDistribution | None = None,
    groups: Sequence[VarSetLike] | None = None,
    y: VarSetLike = None,
    decision_tol: float = DEFAULT_DECISION_TOL,
    assume_no_direct_influence: bool = False,
) -> InferenceReport:
    """Evaluate the common-ancestor criterion for every ``c`` in ``1..n-1``.

    ``report.largest_c`` is the largest ``c`` whose criterion exceeds
    ``decision_tol``; any DAG-model then has an ancestor of ``c + 1`` groups.
    Setting ``assume_no_direct_influence`` relabels conclusions as
    unobserved common ancestors (a caller assertion, not an inference).
    """
    if obs is not None:
        report = _value_mode(obs, decision_tol)
    elif dist is not None and groups is not None:
        report = _distribution_mode(dist, groups, y, decision_tol)
    else:
        raise MissingAssumptionError("pass ObservationValues, or a distribution with groups")
    report.unobserved_ancestors = assume_no_direct_influence
    if assume_no_direct_influence:
        report.assumptions.append("no direct influence among observed groups (caller assertion)")
    else:
        report.assumptions.append("inferred ancestors may be observed variables themselves")
    return report


# -- inequality checks on a model ---------------------------------------------


@dataclass
class DecompositionReport:
    node_lhs: Optional[float] = None
    node_rhs: Optional[float] = None
    node_equality_expected: Optional[bool] = None
    node_equality_achieved: Optional[bool] = None
    d: list[int] = field(default_factory=list)
    ancestral_total: Optional[float] = None
    ancestral_weighted: Optional[float] = None
    observed_weighted: float = 0.0
    observed_total: float = 0.0
    y_screened_residual: Optional[float] = None

    @property
    def node_slack(self) -> Optional[float]:
        return None if self.node_lhs is None else self.node_lhs - self.node_rhs

    @property
    def ancestral_slack(self) -> Optional[float]:
        """``I(Y:an(O)) - Σ I(Y:an(O_i))/d_i``."""
        return None if self.ancestral_total is None else self.ancestral_total - self.ancestral_weighted

    @property
    def ancestral_monotone_slack(self) -> Optional[float]:
        """``Σ I(Y:an(O_i))/d_i - Σ I(Y:O_i)/d_i``."""
        return None if self.ancestral_weighted is None else self.ancestral_weighted - self.observed_weighted

    @property
    def observed_slack(self) -> float:
        """``I(Y:O_[n]) - Σ I(Y:O_i)/d_i``; guaranteed non-negative when Y is screened by O_[n]."""
        return self.observed_total - self.observed_weighted

    def slacks(self) -> dict[str, float]:
        out = {"observed_bits": self.observed_slack}
        if self.node_lhs is not None:
            out["node_decomposition_bits"] = self.node_slack
            out["ancestral_bits"] = self.ancestral_slack
            out["ancestral_monotone_bits"] = self.ancestral_monotone_slack
        if self.y_screened_residual is not None:
            out["y_screening_residual_bits"] = self.y_screened_residual
        return out

    def to_dict(self) -> dict:
        return {
            "d": list(self.d),
            "slacks": self.slacks(),
            "node_equality_expected": self.node_equality_expected,
            "node_equality_achieved": self.node_equality_achieved,
        }


def check_decomposition(
    dag: Dag,
    measure: InfoMeasure | None,
    obs: ObservationGroups,
    y: Sequence[str] | ObservationValues | None = None,
    tol: float = DEFAULT_TOL,
) -> DecompositionReport:
    """Both sides of the node-level and group-level information decompositions.

    Node level (over the DAG without Y):
    ``I(Y:X) >= Σ_v I(Y:v | pa(v))``, with equality expected when every
    ``v ⫫ nd(v) | pa(v), Y``.
    Group level: ``I(Y:an(O)) >= Σ I(Y:an(O_i))/d_i >= Σ I(Y:O_i)/d_i`` and,
    when ``Y ⫫ rest | O_[n]``, ``I(Y:O_[n]) >= Σ I(Y:O_i)/d_i``.

    ``y`` defaults to ``obs.y_nodes``. Passing :class:`ObservationValues`
    instead evaluates only the last inequality from those values.
    """
    report = DecompositionReport(d=ancestor_multiplicities(dag, obs))
    if isinstance(y, ObservationValues):
        if y.n != obs.n:
            raise ValueError("ObservationValues and groups disagree on n")
        report.observed_total = y.total
        report.observed_weighted = math.fsum(v / d for v, d in zip(y.singles, report.d))
        return report
    if measure is None:
        raise ValueError("a measure is required unless observation values are given")
    y_nodes = sorted(obs.y_nodes if y is None else y)
    if not y_nodes:
        raise MissingAssumptionError("no Y nodes given")
    markov = local_markov_holds(dag, measure, tol)
    if not markov.holds:
        raise MarkovPreconditionError(f"local Markov condition fails: {markov.violations}")

    body = dag.subgraph([v for v in dag.nodes if v not in y_nodes])
    report.node_lhs = measure.cmi(y_nodes, body.nodes)
    report.node_rhs = math.fsum(measure.cmi(y_nodes, [v], body.parents(v)) for v in body.nodes)
    residuals = [
        measure.cmi([v], body.sorted(body.non_descendants(v) - set(body.parents(v))), list(body.parents(v)) + y_nodes)
        for v in body.nodes
    ]
    report.node_equality_expected = all(r <= tol for r in residuals)
    report.node_equality_achieved = abs(report.node_slack) <= tol

    ancestral = [body.sorted(ancestral_closure(body, g)) for g in obs.groups]
    all_ancestral = body.sorted(ancestral_closure(body, obs.union()))
    report.ancestral_total = measure.cmi(y_nodes, all_ancestral)
    report.ancestral_weighted = math.fsum(measure.cmi(y_nodes, a) / d for a, d in zip(ancestral, report.d))
    report.observed_weighted = math.fsum(
        measure.cmi(y_nodes, body.sorted(g)) / d for g, d in zip(obs.groups, report.d)
    )
    observed = body.sorted(obs.union())
    report.observed_total = measure.cmi(y_nodes, observed)
    rest = [v for v in body.nodes if v not in obs.union()]
    report.y_screened_residual = measure.cmi(y_nodes, rest, observed)
    return report


def submodularity_audit(
    measure: InfoMeasure, y, groups: Sequence, tol: float = DEFAULT_TOL
) -> list[tuple[frozenset[int], frozenset[int], float]]:
    """Pairs ``(S, T)`` violating ``I(Y:O_S) + I(Y:O_T) <= I(Y:O_{S∪T}) + I(Y:O_{S∩T})``.

    Any violation certifies that the groups are not mutually independent.
    Returned index sets are 0-based.
    """
    n = len(groups)
    if n > MAX_SUBMODULAR_GROUPS:
        raise SizeGuardError(f"submodularity audit limited to {MAX_SUBMODULAR_GROUPS} groups, got {n}")
    y_mask = measure.subset(y).mask
    masks = [measure.subset(g).mask for g in groups]
    union_all = 0
    for m in masks:
        union_all |= m
    if union_all & y_mask:
        raise ValueError("Y must be disjoint from the observed groups")
    info = []
    for s in range(1 << n):
        m = 0
        for i in range(n):
            if s >> i & 1:
                m |= masks[i]
        info.append(measure.cmi_masks(y_mask, m))
    out = []
    for s in range(1 << n):
        for t in range(s + 1, 1 << n):
            if s & t in (s, t):
                continue
            excess = info[s] + info[t] - info[s | t] - info[s & t]
            if excess > tol:
                idx = lambda mask: frozenset(i for i in range(n) if mask >> i & 1)  # noqa: E731
                out.append((idx(s), idx(t), excess))
    return out


def synergy_decomposition(
    dist: JointDistribution, groups: Sequence[VarSetLike], y: VarSetLike, c: int
) -> tuple[float, float, float]:
    """``(r_c(Y), r_c(O), r_c(O|Y))``; the first equals the second minus the third."""
    if not isinstance(dist, JointDistribution):
        raise TypeError("synergy decomposition needs a discrete distribution (overlapping arguments)")
    groups = [VarSet.of(dist, g) for g in groups]
    union = VarSet(dist, tuple(sorted({i for g in groups for i in g.indices})))
    r_y = redundancy_c(dist, groups, y, c)
    r_o = redundancy_c(dist, groups, union, c, allow_overlap=True)
    r_o_given_y = redundancy_c(dist, groups, union, c, given=y, allow_overlap=True)
    return r_y, r_o, r_o_given_y
