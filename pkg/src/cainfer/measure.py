"""Axiomatized conditional mutual information and audits of its axioms.

A measure assigns a real number ``I(A:B|C)`` (in bits) to every triple of
pairwise disjoint subsets of a finite ground set. Valid measures satisfy

* normalization   ``I(A:∅|C) = 0``
* non-negativity  ``I(A:B|C) >= 0``
* symmetry        ``I(A:B|C) = I(B:A|C)``
* chain rule      ``I(A:B∪C|D) = I(A:B|C∪D) + I(A:C|D)``

Subsets are stored as integer bitmasks over the ground set, which keeps the
exhaustive audits cheap and gives them a reproducible enumeration order.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Sequence, Union

from cainfer.errors import ForeignElementError, OverlapError, SizeGuardError

DEFAULT_TOL = 1e-9
MAX_AUDIT_ELEMENTS = 12


@dataclass(frozen=True)
class GroundSet:
    """Ordered, finite collection of uniquely named elements."""

    elements: tuple[str, ...]
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __init__(self, elements: Iterable[str]):
        elements = tuple(str(e) for e in elements)
        if any(not e for e in elements):
            raise ValueError("element names must be non-empty")
        if len(set(elements)) != len(elements):
            raise ValueError(f"element names must be unique: {elements}")
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "_index", {e: i for i, e in enumerate(elements)})

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, name) -> bool:
        return name in self._index

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ForeignElementError(f"{name!r} is not an element of {self.elements}") from None

    @property
    def full_mask(self) -> int:
        return (1 << len(self.elements)) - 1

    def subset(self, names: Iterable[str] = ()) -> "ElementSubset":
        mask = 0
        for name in names:
            mask |= 1 << self.index(name)
        return ElementSubset(self, mask)

    def from_mask(self, mask: int) -> "ElementSubset":
        return ElementSubset(self, mask)

    def names(self, mask: int) -> tuple[str, ...]:
        return tuple(e for i, e in enumerate(self.elements) if mask >> i & 1)


@dataclass(frozen=True)
class ElementSubset:
    """A subset of a :class:`GroundSet`, held as a bitmask of element indices."""

    ground: GroundSet
    mask: int

    def __post_init__(self):
        if self.mask < 0 or self.mask & ~self.ground.full_mask:
            raise ForeignElementError(f"mask {self.mask:#x} has bits outside the ground set")

    @property
    def members(self) -> frozenset[int]:
        return frozenset(i for i in range(len(self.ground)) if self.mask >> i & 1)

    @property
    def names(self) -> tuple[str, ...]:
        return self.ground.names(self.mask)

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def __iter__(self) -> Iterator[str]:
        return iter(self.names)

    def _same_ground(self, other: "ElementSubset") -> None:
        if other.ground != self.ground:
            raise ForeignElementError("subsets belong to different ground sets")

    def __or__(self, other: "ElementSubset") -> "ElementSubset":
        self._same_ground(other)
        return ElementSubset(self.ground, self.mask | other.mask)

    def __and__(self, other: "ElementSubset") -> "ElementSubset":
        self._same_ground(other)
        return ElementSubset(self.ground, self.mask & other.mask)

    def __sub__(self, other: "ElementSubset") -> "ElementSubset":
        self._same_ground(other)
        return ElementSubset(self.ground, self.mask & ~other.mask)

    def isdisjoint(self, other: "ElementSubset") -> bool:
        self._same_ground(other)
        return not self.mask & other.mask


SubsetLike = Union[ElementSubset, Iterable[str], None]


class InfoMeasure(abc.ABC):
    """A conditional mutual information function over a ground set.

    Subclasses implement :meth:`cmi_masks`; the public :meth:`cmi` validates
    its arguments first.
    """

    ground: GroundSet

    @abc.abstractmethod
    def cmi_masks(self, a: int, b: int, c: int = 0) -> float:
        """Evaluate ``I(A:B|C)`` on raw bitmasks without validation."""

    def subset(self, value: SubsetLike) -> ElementSubset:
        if value is None:
            return ElementSubset(self.ground, 0)
        if isinstance(value, ElementSubset):
            if value.ground != self.ground:
                raise ForeignElementError(
                    f"subset over {value.ground.elements} used with measure over {self.ground.elements}"
                )
            return value
        if isinstance(value, str):
            value = [value]
        return self.ground.subset(value)

    def cmi(self, a: SubsetLike, b: SubsetLike, c: SubsetLike = None) -> float:
        a, b, c = self.subset(a), self.subset(b), self.subset(c)
        if a.mask & b.mask or a.mask & c.mask or b.mask & c.mask:
            raise OverlapError(f"arguments are not pairwise disjoint: {a.names}, {b.names}, {c.names}")
        return self.cmi_masks(a.mask, b.mask, c.mask)


class EntropicMeasure(InfoMeasure):
    """Measure defined through a set function ``h`` with ``h(∅) = 0``.

    ``I(A:B|C) = h(A∪C) + h(B∪C) - h(A∪B∪C) - h(C)``. The first two terms are
    added before anything else so that swapping A and B gives a bitwise-equal
    result. Values of ``h`` are memoized per mask; the cache only ever stores
    the deterministic value of ``h`` so concurrent readers see the same thing.
    """

    def __init__(self, ground: GroundSet):
        self.ground = ground
        self._h_cache: dict[int, float] = {0: 0.0}

    @abc.abstractmethod
    def _h(self, mask: int) -> float:
        """Joint quantity for a non-empty mask."""

    def h(self, mask: int) -> float:
        try:
            return self._h_cache[mask]
        except KeyError:
            value = float(self._h(mask))
            self._h_cache[mask] = value
            return value

    def cmi_masks(self, a: int, b: int, c: int = 0) -> float:
        if not a or not b:
            return 0.0
        return (self.h(a | c) + self.h(b | c)) - self.h(a | b | c) - self.h(c)


def cmi(measure: InfoMeasure, a: SubsetLike, b: SubsetLike, c: SubsetLike = None) -> float:
    """``I(A:B|C)`` in bits for pairwise disjoint ``a``, ``b``, ``c``."""
    return measure.cmi(a, b, c)


def is_independent(
    measure: InfoMeasure, a: SubsetLike, b: SubsetLike, c: SubsetLike = None, tol: float = DEFAULT_TOL
) -> bool:
    if tol < 0:
        raise ValueError("tol must be non-negative")
    return abs(measure.cmi(a, b, c)) <= tol


# -- audits -----------------------------------------------------------------


class Violation(NamedTuple):
    axiom: str
    arguments: tuple[tuple[str, ...], ...]
    magnitude: float


@dataclass
class AxiomAuditReport:
    checked_triples: int = 0
    violations: list[Violation] = field(default_factory=list)

    @property
    def worst_violation(self) -> float:
        return max((v.magnitude for v in self.violations), default=0.0)

    @property
    def passed(self) -> bool:
        return not self.violations

    def record(self, ground: GroundSet, axiom: str, masks: Sequence[int], magnitude: float) -> None:
        self.violations.append(Violation(axiom, tuple(ground.names(m) for m in masks), magnitude))

    def to_dict(self) -> dict:
        return {
            "checked_triples": self.checked_triples,
            "worst_violation_bits": self.worst_violation,
            "violations": [
                {"axiom": v.axiom, "arguments": [list(a) for a in v.arguments], "magnitude_bits": v.magnitude}
                for v in self.violations
            ],
        }


def submasks(free: int) -> Iterator[int]:
    """All submasks of ``free`` in increasing numeric order, starting at 0."""
    sub = 0
    while True:
        yield sub
        if sub == free:
            return
        sub = (sub - free) & free


def disjoint_tuples(n_elements: int, arity: int) -> Iterator[tuple[int, ...]]:
    """Pairwise disjoint mask tuples, lexicographic in (mask_1, mask_2, ...)."""

    def rec(prefix: tuple[int, ...], used: int) -> Iterator[tuple[int, ...]]:
        if len(prefix) == arity:
            yield prefix
            return
        for m in submasks(full & ~used):
            yield from rec(prefix + (m,), used | m)

    full = (1 << n_elements) - 1
    yield from rec((), 0)


def _guard(measure: InfoMeasure) -> None:
    if len(measure.ground) > MAX_AUDIT_ELEMENTS:
        raise SizeGuardError(
            f"exhaustive audit over {len(measure.ground)} elements exceeds the guard of "
            f"{MAX_AUDIT_ELEMENTS}; pass an explicit family of argument tuples instead"
        )


def _quadruples(measure: InfoMeasure, family) -> Iterable[tuple[int, int, int, int]]:
    if family is None:
        _guard(measure)
        return disjoint_tuples(len(measure.ground), 4)
    out = []
    for tup in family:
        masks = [measure.subset(s).mask for s in tup]
        masks += [0] * (4 - len(masks))
        acc = 0
        for m in masks:
            if acc & m:
                raise OverlapError(f"family tuple {tup!r} is not pairwise disjoint")
            acc |= m
        out.append(tuple(masks))
    return out


def audit_axioms(measure: InfoMeasure, tol: float = DEFAULT_TOL, family=None) -> AxiomAuditReport:
    """Report every axiom instance violated by more than ``tol`` bits.

    With ``family=None`` all pairwise disjoint quadruples ``(A, B, C, D)`` of
    the ground set are enumerated; normalization, non-negativity and symmetry
    are checked on the triples ``(A, B, C)`` with ``D = ∅`` and the chain rule
    on every quadruple. Otherwise ``family`` is an iterable of 3- or
    4-tuples of subsets to check.
    """
    report = AxiomAuditReport()
    ground = measure.ground
    f = measure.cmi_masks
    for a, b, c, d in _quadruples(measure, family):
        if d == 0:
            report.checked_triples += 1
            v_ab = f(a, b, c)
            if b == 0 and abs(v_ab) > tol:
                report.record(ground, "normalization", (a, b, c), abs(v_ab))
            if v_ab < -tol:
                report.record(ground, "non-negativity", (a, b, c), -v_ab)
            asym = abs(v_ab - f(b, a, c))
            if asym > tol:
                report.record(ground, "symmetry", (a, b, c), asym)
        residual = abs(f(a, b | c, d) - f(a, b, c | d) - f(a, c, d))
        if residual > tol:
            report.record(ground, "chain rule", (a, b, c, d), residual)
    return report


def audit_derived(measure: InfoMeasure, tol: float = DEFAULT_TOL, family=None) -> AxiomAuditReport:
    """Check consequences of the axioms that relate independence statements.

    For every disjoint ``(A, B, C)`` with ``I(A:C|B) <= tol``:

    * data processing: ``I(A:B) >= I(A:C) - tol``
    * conditioning on an independent set, for each disjoint ``Y``:
      ``I(Y:A|B) <= I(Y:A|B,C) + tol``, and the gap equals
      ``I(A:C|B,Y) - I(A:C|B)`` within ``tol``.

    Semi-graphoid implications (symmetry, decomposition, weak union,
    contraction) are checked for every disjoint ``(X, Y, W, Z)``. Premises are
    read as ``<= tol``. Contraction's conclusion may legitimately reach the
    sum of its two premises, so it is checked against that sum plus ``tol``.
    """
    report = AxiomAuditReport()
    ground = measure.ground
    f = measure.cmi_masks
    for a, b, c, y in _quadruples(measure, family):
        report.checked_triples += 1
        premise = f(a, c, b)
        if premise <= tol:
            if y == 0:
                gap = f(a, c) - f(a, b) - tol
                if gap > 0:
                    report.record(ground, "data processing", (a, b, c), gap)
            else:
                low, high = f(y, a, b), f(y, a, b | c)
                if low - high > tol:
                    report.record(ground, "conditioning on independent set", (a, b, c, y), low - high)
                mismatch = abs((high - low) - (f(a, c, b | y) - premise))
                if mismatch > tol:
                    report.record(ground, "conditioning difference", (a, b, c, y), mismatch)
        _semi_graphoid(report, ground, f, a, b, c, y, tol)
    return report


def _semi_graphoid(report, ground, f, x, y, w, z, tol) -> None:
    x_y = f(x, y, z)
    if x_y <= tol and f(y, x, z) > tol:
        report.record(ground, "semi-graphoid symmetry", (x, y, z), f(y, x, z) - tol)
    x_yw = f(x, y | w, z)
    if x_yw <= tol:
        for part, axiom in ((y, "semi-graphoid decomposition"), (w, "semi-graphoid decomposition")):
            v = f(x, part, z)
            if v > tol:
                report.record(ground, axiom, (x, y, w, z), v - tol)
        v = f(x, y, z | w)
        if v > tol:
            report.record(ground, "semi-graphoid weak union", (x, y, w, z), v - tol)
    x_w_zy = f(x, w, z | y)
    if x_w_zy <= tol and x_y <= tol:
        excess = x_yw - (x_w_zy + x_y) - tol
        if x_yw > tol and excess > 0:
            report.record(ground, "semi-graphoid contraction", (x, y, w, z), excess)
