"""Scopes, renamings, and the two de Bruijn scope systems.

Scopes are plain naturals; a scope n has positions 0..n-1 and the sum of
scopes is addition, so both systems are strict: gamma+0 == gamma and sums
associate on the nose.  The two systems differ only in the coproduct
position maps: indices shift old variables up when entering a binder,
levels give new variables the higher positions.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import IndexOutOfRange, ScopeMismatch

Scope = int

EMPTY_SCOPE: Scope = 0


class ScopeKind(Enum):
    INDICES = "debruijn-indices"
    LEVELS = "debruijn-levels"

    def inl(self, left: Scope, right: Scope, i: int) -> int:
        if not 0 <= i < left:
            raise IndexOutOfRange(f"position {i} of scope {left}")
        return i + right if self is ScopeKind.INDICES else i

    def inr(self, left: Scope, right: Scope, j: int) -> int:
        if not 0 <= j < right:
            raise IndexOutOfRange(f"position {j} of scope {right}")
        return j if self is ScopeKind.INDICES else j + left

    def unsum(self, left: Scope, right: Scope, p: int) -> tuple[str, int]:
        """Invert the coproduct: returns ("left", i) or ("right", j)."""
        if not 0 <= p < left + right:
            raise IndexOutOfRange(f"position {p} of scope {left + right}")
        if self is ScopeKind.INDICES:
            return ("right", p) if p < right else ("left", p - right)
        return ("left", p) if p < left else ("right", p - left)


def sum_scope(gamma: Scope, delta: Scope) -> Scope:
    return gamma + delta


@dataclass(frozen=True)
class Renaming:
    """A total map positions(src) -> positions(dst)."""

    src: Scope
    dst: Scope
    table: tuple[int, ...]

    def __post_init__(self):
        if len(self.table) != self.src:
            raise ScopeMismatch(f"table of length {len(self.table)} for scope {self.src}")
        for v in self.table:
            if not 0 <= v < self.dst:
                raise IndexOutOfRange(f"image {v} outside scope {self.dst}")

    def __call__(self, i: int) -> int:
        if not 0 <= i < self.src:
            raise IndexOutOfRange(f"position {i} of scope {self.src}")
        return self.table[i]

    @staticmethod
    def identity(scope: Scope) -> "Renaming":
        return Renaming(scope, scope, tuple(range(scope)))

    def is_identity(self) -> bool:
        return self.src == self.dst and all(self.table[i] == i for i in range(self.src))

    def compose(self, earlier: "Renaming") -> "Renaming":
        """self o earlier: apply ``earlier`` first."""
        if earlier.dst != self.src:
            raise ScopeMismatch(f"cannot compose {self.src}<-? with ?->{earlier.dst}")
        return Renaming(earlier.src, self.dst, tuple(self.table[v] for v in earlier.table))


def inl_renaming(kind: ScopeKind, gamma: Scope, delta: Scope) -> Renaming:
    return Renaming(gamma, gamma + delta, tuple(kind.inl(gamma, delta, i) for i in range(gamma)))


def inr_renaming(kind: ScopeKind, gamma: Scope, delta: Scope) -> Renaming:
    return Renaming(delta, gamma + delta, tuple(kind.inr(gamma, delta, j) for j in range(delta)))


def sum_renaming(kind: ScopeKind, r: Renaming, s: Renaming) -> Renaming:
    """The coproduct map r+s : (r.src + s.src) -> (r.dst + s.dst)."""
    src = r.src + s.src
    dst = r.dst + s.dst
    table = [0] * src
    for i in range(r.src):
        table[kind.inl(r.src, s.src, i)] = kind.inl(r.dst, s.dst, r(i))
    for j in range(s.src):
        table[kind.inr(r.src, s.src, j)] = kind.inr(r.dst, s.dst, s(j))
    return Renaming(src, dst, tuple(table))


def extend_renaming(kind: ScopeKind, r: Renaming, binder: Scope) -> Renaming:
    """r + id_binder, the extension used when descending under a binder."""
    return sum_renaming(kind, r, Renaming.identity(binder))
