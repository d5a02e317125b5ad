"""Closure systems, generic derivations, grafting, and finite strict orders.

Everything here is independent of syntax: derivations are trees over an
arbitrary carrier set X.  Families are ordered finite tuples; the index
set of a family is its positions, so duplicates are allowed and uses of
an element stay tagged with where it came from.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Generic, Iterable, TypeVar

from .errors import (
    ChildCountMismatch,
    FillerConclusionMismatch,
    IndexOutOfRange,
    PremiseMismatch,
)

X = TypeVar("X")


@dataclass(frozen=True)
class ClosureRule(Generic[X]):
    """Finitely many premises and one conclusion, all in the same carrier."""

    premises: tuple[X, ...]
    conclusion: X


# A closure system is just a family of closure rules.
ClosureSystem = tuple


@dataclass(frozen=True)
class GHyp:
    """Leaf citing a hypothesis by its position in the hypothesis family."""

    index: int


@dataclass(frozen=True)
class GStep:
    """Node citing a rule, with one child derivation per premise."""

    rule: int
    children: tuple


GenericDerivation = GHyp | GStep


def _default_eq(a, b) -> bool:
    return a == b


def check_generic_derivation(
    system: ClosureSystem,
    hyps: tuple[X, ...],
    d: GenericDerivation,
    eq: Callable[[X, X], bool] = _default_eq,
    _path: tuple[int, ...] = (),
) -> X:
    """Check ``d`` over ``system`` and ``hyps`` and return its conclusion.

    Checking is deterministic: at a GHyp the conclusion is the cited
    hypothesis, at a GStep each child's conclusion must equal the
    corresponding premise of the cited rule.
    """
    match d:
        case GHyp(index=k):
            if not 0 <= k < len(hyps):
                raise IndexOutOfRange(f"hypothesis {k} of {len(hyps)}")
            return hyps[k]
        case GStep(rule=r, children=children):
            if not 0 <= r < len(system):
                raise IndexOutOfRange(f"rule {r} of {len(system)}")
            rule = system[r]
            if len(children) != len(rule.premises):
                raise ChildCountMismatch(
                    f"rule {r} has {len(rule.premises)} premises, got {len(children)} children"
                )
            for i, (child, premise) in enumerate(zip(children, rule.premises)):
                got = check_generic_derivation(system, hyps, child, eq, _path + (i,))
                if not eq(got, premise):
                    raise PremiseMismatch(_path + (i,), premise, got)
            return rule.conclusion
    raise TypeError(f"not a derivation node: {d!r}")


def graft(
    system: ClosureSystem,
    outer: GenericDerivation,
    fillers: tuple[GenericDerivation, ...],
) -> GenericDerivation:
    """Replace each hypothesis leaf of ``outer`` by the corresponding filler.

    If ``outer`` derives c from H and ``fillers[h]`` derives H[h] from H',
    the result derives c from H'.  Conclusion agreement between fillers and
    hypotheses is the caller's obligation; ``check_generic_derivation`` on
    the result will catch violations.
    """
    match outer:
        case GHyp(index=k):
            if not 0 <= k < len(fillers):
                raise FillerConclusionMismatch(f"no filler for hypothesis {k}")
            return fillers[k]
        case GStep(rule=r, children=children):
            return GStep(r, tuple(graft(system, c, fillers) for c in children))
    raise TypeError(f"not a derivation node: {outer!r}")


def map_derivation(
    rule_images: tuple[GenericDerivation, ...],
    target_system: ClosureSystem,
    d: GenericDerivation,
) -> GenericDerivation:
    """Push ``d`` along a map of closure systems.

    ``rule_images[r]`` must be a derivation, over ``target_system``, of the
    image of rule r's conclusion from the images of its premises (premise i
    appearing as hypothesis i).  Hypothesis leaves are kept.
    """
    match d:
        case GHyp(index=k):
            return GHyp(k)
        case GStep(rule=r, children=children):
            if not 0 <= r < len(rule_images):
                raise IndexOutOfRange(f"rule {r} of {len(rule_images)}")
            mapped = tuple(map_derivation(rule_images, target_system, c) for c in children)
            return graft(target_system, rule_images[r], mapped)
    raise TypeError(f"not a derivation node: {d!r}")


@dataclass(frozen=True)
class FinitePoset:
    """A relation on {0..size-1}; well-founded iff its transitive closure is irreflexive."""

    size: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        for i, j in self.edges:
            if not (0 <= i < self.size and 0 <= j < self.size):
                raise IndexOutOfRange(f"edge ({i},{j}) outside 0..{self.size - 1}")

    @staticmethod
    def of(size: int, edges: Iterable[tuple[int, int]] = ()) -> "FinitePoset":
        return FinitePoset(size, frozenset(edges))

    def transitive_closure(self) -> frozenset[tuple[int, int]]:
        reach = {i: {j for (a, j) in self.edges if a == i} for i in range(self.size)}
        changed = True
        while changed:
            changed = False
            for i in range(self.size):
                extra = set()
                for j in reach[i]:
                    extra |= reach[j] - reach[i]
                if extra:
                    reach[i] |= extra
                    changed = True
        return frozenset((i, j) for i in range(self.size) for j in reach[i])

    def predecessors(self, x: int) -> set[int]:
        closure = self.transitive_closure()
        return {i for (i, j) in closure if j == x}


def check_well_founded(p: FinitePoset) -> bool:
    """True iff the transitive closure of p.edges is acyclic."""
    return all(i != j for i, j in p.transitive_closure())


def topological_respects(p: FinitePoset) -> bool:
    """True iff every edge goes from a lower to a higher index."""
    return all(i < j for i, j in p.edges)
