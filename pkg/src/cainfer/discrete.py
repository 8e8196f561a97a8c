"""Exact discrete joint distributions and the information quantities on them.

Tables are dense numpy arrays with one axis per variable (C order, so the
last variable varies fastest in the flattened view). All quantities are in
bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from cainfer.errors import EmptySetError, OverlapError, SizeGuardError
from cainfer.measure import EntropicMeasure, GroundSet

MAX_TABLE_SIZE = 2**24
ZERO_PROB = 1e-15
SUM_TOL = 1e-12


@dataclass(frozen=True)
class VariableDecl:
    name: str
    cardinality: int

    def __post_init__(self):
        if not self.name:
            raise ValueError("variable name must be non-empty")
        if int(self.cardinality) != self.cardinality or self.cardinality < 1:
            raise ValueError(f"cardinality of {self.name!r} must be an integer >= 1")


class JointDistribution:
    """Exact joint probability table over named finite variables."""

    def __init__(self, variables: Sequence[VariableDecl], probs, *, normalize: bool = False):
        variables = tuple(variables)
        names = [v.name for v in variables]
        if len(set(names)) != len(names):
            raise ValueError(f"variable names must be unique: {names}")
        shape = tuple(v.cardinality for v in variables)
        size = math.prod(shape)
        if size > MAX_TABLE_SIZE:
            raise SizeGuardError(f"joint table of {size} entries exceeds the guard of {MAX_TABLE_SIZE}")
        table = np.array(probs, dtype=float)
        if table.size != size:
            raise ValueError(f"expected {size} probabilities for shape {shape}, got {table.size}")
        table = table.reshape(shape)
        if np.any(table < 0) or not np.all(np.isfinite(table)):
            raise ValueError("probabilities must be finite and non-negative")
        total = math.fsum(table.ravel())
        if normalize:
            if total <= 0:
                raise ValueError("cannot normalize an all-zero table")
            table = table / total
        elif abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        table.setflags(write=False)
        self.variables = variables
        self.table = table
        self._index = {n: i for i, n in enumerate(names)}

    def __repr__(self):
        decl = ", ".join(f"{v.name}:{v.cardinality}" for v in self.variables)
        return f"JointDistribution([{decl}])"

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def cardinalities(self) -> tuple[int, ...]:
        return self.table.shape

    @property
    def probs(self) -> np.ndarray:
        """Flattened row-major probabilities (last variable fastest)."""
        return self.table.ravel()

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown variable {name!r}; have {self.names}") from None

    def varset(self, spec: "VarSetLike") -> "VarSet":
        return VarSet.of(self, spec)

    def allclose(self, other: "JointDistribution", atol: float = 1e-12) -> bool:
        return (
            self.names == other.names
            and self.cardinalities == other.cardinalities
            and bool(np.allclose(self.table, other.table, rtol=0.0, atol=atol))
        )


@dataclass(frozen=True)
class VarSet:
    """A set of variables of one distribution, stored as sorted indices."""

    dist: JointDistribution
    indices: tuple[int, ...]

    @classmethod
    def of(cls, dist: JointDistribution, spec: "VarSetLike") -> "VarSet":
        if isinstance(spec, VarSet):
            if spec.dist is not dist:
                raise ValueError("VarSet belongs to a different distribution")
            return spec
        if spec is None:
            spec = ()
        elif isinstance(spec, (str, int)):
            spec = (spec,)
        idx = set()
        for item in spec:
            if isinstance(item, (int, np.integer)):
                if not 0 <= item < len(dist.variables):
                    raise IndexError(f"variable index {item} out of range")
                idx.add(int(item))
            else:
                idx.add(dist.index(item))
        return cls(dist, tuple(sorted(idx)))

    def __len__(self):
        return len(self.indices)

    def __or__(self, other: "VarSet") -> "VarSet":
        return VarSet(self.dist, tuple(sorted(set(self.indices) | set(other.indices))))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.dist.variables[i].name for i in self.indices)


VarSetLike = Union[VarSet, Iterable[Union[str, int]], str, int, None]


def _nonempty(dist: JointDistribution, spec: VarSetLike) -> VarSet:
    s = VarSet.of(dist, spec)
    if not s.indices:
        raise EmptySetError("variable set must be non-empty")
    return s


def marginal(dist: JointDistribution, s: VarSetLike) -> JointDistribution:
    s = _nonempty(dist, s)
    drop = tuple(i for i in range(len(dist.variables)) if i not in s.indices)
    table = dist.table.sum(axis=drop) if drop else dist.table
    # renormalize away round-off accumulated by the sum
    return JointDistribution([dist.variables[i] for i in s.indices], table, normalize=True)


def _entropy_of_table(table: np.ndarray) -> float:
    p = table.ravel()
    p = p[p > ZERO_PROB]
    return math.fsum((-p * np.log2(p)).tolist())


def _entropy_indices(dist: JointDistribution, indices: tuple[int, ...]) -> float:
    if not indices:
        return 0.0
    drop = tuple(i for i in range(len(dist.variables)) if i not in indices)
    table = dist.table.sum(axis=drop) if drop else dist.table
    return _entropy_of_table(table)


def entropy(dist: JointDistribution, s: VarSetLike) -> float:
    """Shannon entropy ``H(X_S)`` in bits (``0 log 0 = 0``)."""
    return _entropy_indices(dist, _nonempty(dist, s).indices)


def _union(*sets: VarSet) -> tuple[int, ...]:
    out = set()
    for s in sets:
        out.update(s.indices)
    return tuple(sorted(out))


def cmi_discrete(
    dist: JointDistribution,
    a: VarSetLike,
    b: VarSetLike,
    c: VarSetLike = None,
    *,
    allow_overlap: bool = False,
) -> float:
    """``I(A:B|C) = H(A∪C) + H(B∪C) - H(A∪B∪C) - H(C)`` in bits.

    The entropy identity is well defined for overlapping arguments too
    (e.g. ``I(X:X) = H(X)``); that extension must be requested explicitly.
    """
    a, b, c = (VarSet.of(dist, x) for x in (a, b, c))
    sa, sb, sc = set(a.indices), set(b.indices), set(c.indices)
    if not allow_overlap and (sa & sb or sa & sc or sb & sc):
        raise OverlapError(f"arguments overlap: {a.names}, {b.names}, {c.names}")
    if not sa or not sb:
        return 0.0
    h = lambda *xs: _entropy_indices(dist, _union(*xs))  # noqa: E731
    return (h(a, c) + h(b, c)) - h(a, b, c) - h(c)


def multi_information_c(dist: JointDistribution, groups: Sequence[VarSetLike], c: int) -> float:
    """Parametrized multi-information ``(1/c) Σ H(O_i) - H(O_1 ∪ ... ∪ O_n)``."""
    groups = [_nonempty(dist, g) for g in groups]
    _check_disjoint(groups)
    if not 1 <= c <= len(groups):
        raise ValueError(f"c must lie in [1, {len(groups)}], got {c}")
    singles = math.fsum(_entropy_indices(dist, g.indices) for g in groups)
    return singles / c - _entropy_indices(dist, _union(*groups))


def redundancy_c(
    dist: JointDistribution,
    groups: Sequence[VarSetLike],
    y: VarSetLike,
    c: int,
    given: VarSetLike = None,
    *,
    allow_overlap: bool = False,
) -> float:
    """``r_c(Y|Z) = (1/c) Σ I(Y:O_i|Z) - I(Y:O_[n]|Z)`` in bits."""
    groups = [_nonempty(dist, g) for g in groups]
    _check_disjoint(groups)
    if not 1 <= c <= len(groups):
        raise ValueError(f"c must lie in [1, {len(groups)}], got {c}")
    y = _nonempty(dist, y)
    given = VarSet.of(dist, given)
    union = VarSet(dist, _union(*groups))
    kw = {"allow_overlap": allow_overlap}
    singles = math.fsum(cmi_discrete(dist, y, g, given, **kw) for g in groups)
    return singles / c - cmi_discrete(dist, y, union, given, **kw)


def _check_disjoint(groups: Sequence[VarSet]) -> None:
    seen: set[int] = set()
    for g in groups:
        if seen & set(g.indices):
            raise OverlapError("groups must be pairwise disjoint")
        seen.update(g.indices)


# -- construction ----------------------------------------------------------


@dataclass(frozen=True)
class SampleTable:
    variables: tuple[VariableDecl, ...]
    rows: tuple[tuple[int, ...], ...]


def from_samples(table: SampleTable) -> JointDistribution:
    """Plug-in (relative frequency) estimate of the joint distribution."""
    if not table.rows:
        raise EmptySetError("sample table has no rows")
    cards = tuple(v.cardinality for v in table.variables)
    data = np.asarray(table.rows, dtype=np.int64)
    if data.ndim != 2 or data.shape[1] != len(cards):
        raise ValueError(f"rows must have {len(cards)} columns")
    for j, v in enumerate(table.variables):
        col = data[:, j]
        bad = np.flatnonzero((col < 0) | (col >= v.cardinality))
        if bad.size:
            r = int(bad[0])
            raise ValueError(f"row {r}: value {int(col[r])} of {v.name!r} outside [0, {v.cardinality})")
    flat = np.ravel_multi_index(data.T, cards) if cards else np.zeros(len(data), dtype=np.int64)
    counts = np.bincount(flat, minlength=math.prod(cards))
    return JointDistribution(table.variables, counts / counts.sum())


def _binary_names(n: int, prefix: str) -> list[VariableDecl]:
    return [VariableDecl(f"{prefix}{i + 1}", 2) for i in range(n)]


def make_parity(n: int, beta: float, prefix: str = "X") -> JointDistribution:
    """Pure ``n``-interaction ``p(x) ∝ exp(beta * x_1 ... x_n)`` on ±1 spins.

    Category 0 encodes spin -1 and category 1 encodes +1. ``beta = ±inf``
    gives the uniform distribution on tuples whose spin product is ``sign(beta)``.
    """
    if n < 2:
        raise ValueError("parity distribution needs n >= 2")
    states = np.indices((2,) * n).reshape(n, -1).T
    spin_product = np.prod(2 * states - 1, axis=1)
    if math.isinf(beta):
        weights = (spin_product == (1 if beta > 0 else -1)).astype(float)
    else:
        weights = np.exp(beta * spin_product - abs(beta))
    return JointDistribution(_binary_names(n, prefix), weights, normalize=True)


def make_copies(n: int, base: JointDistribution, prefix: str = "X") -> JointDistribution:
    """``n`` variables that all equal one draw from the single-variable ``base``."""
    if len(base.variables) != 1:
        raise ValueError("base must have exactly one variable")
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return base
    k = base.variables[0].cardinality
    table = np.zeros((k,) * n)
    for v in range(k):
        table[(v,) * n] = base.table[v]
    return JointDistribution([VariableDecl(f"{prefix}{i + 1}", k) for i in range(n)], table)


def uniform(cardinalities: Sequence[int], prefix: str = "X") -> JointDistribution:
    decls = [VariableDecl(f"{prefix}{i + 1}", k) for i, k in enumerate(cardinalities)]
    size = math.prod(cardinalities)
    return JointDistribution(decls, np.full(size, 1.0 / size))


def fair_coin(name: str = "X") -> JointDistribution:
    return JointDistribution([VariableDecl(name, 2)], [0.5, 0.5])


def add_function_variable(
    dist: JointDistribution,
    name: str,
    inputs: VarSetLike,
    fn: Callable[[tuple[int, ...]], int],
    cardinality: int,
) -> JointDistribution:
    """Append a variable that is a deterministic function of ``inputs``.

    ``fn`` receives the tuple of input values (in variable order) and must
    return an integer in ``[0, cardinality)``.
    """
    inputs = VarSet.of(dist, inputs)
    shape = dist.cardinalities
    table = np.zeros(shape + (cardinality,))
    for state in np.ndindex(*shape):
        p = dist.table[state]
        if p == 0:
            continue
        out = int(fn(tuple(state[i] for i in inputs.indices)))
        if not 0 <= out < cardinality:
            raise ValueError(f"function value {out} outside [0, {cardinality})")
        table[state + (out,)] = p
    return JointDistribution(dist.variables + (VariableDecl(name, cardinality),), table)


def add_copy_variable(dist: JointDistribution, name: str, inputs: VarSetLike) -> JointDistribution:
    """Append a variable carrying the joint value of ``inputs`` (a copy)."""
    inputs = _nonempty(dist, inputs)
    cards = tuple(dist.cardinalities[i] for i in inputs.indices)
    return add_function_variable(
        dist, name, inputs, lambda vals: int(np.ravel_multi_index(vals, cards)), math.prod(cards)
    )


class DiscreteMeasure(EntropicMeasure):
    """Shannon conditional mutual information of a :class:`JointDistribution`.

    Ground-set elements are the variable names.
    """

    def __init__(self, dist: JointDistribution):
        super().__init__(GroundSet(dist.names))
        self.dist = dist

    def _h(self, mask: int) -> float:
        idx = tuple(i for i in range(len(self.ground)) if mask >> i & 1)
        return _entropy_indices(self.dist, idx)

    def cmi_overlapping(self, a, b, c=None) -> float:
        """Entropy-identity extension for arguments that may overlap."""
        a, b, c = self.subset(a), self.subset(b), self.subset(c)
        if not a.mask or not b.mask:
            return 0.0
        h = self.h
        return (h(a.mask | c.mask) + h(b.mask | c.mask)) - h(a.mask | b.mask | c.mask) - h(c.mask)
