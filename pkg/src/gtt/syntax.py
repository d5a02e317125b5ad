"""Arities, signatures, scoped expressions, substitution, and instantiation.

A signature owns the scope kind and may carry a marked trailing segment of
metavariable symbols described by an arity.  Expressions index base
symbols with SymApp and metavariable symbols with MetaApp, so translating
along the inclusion of a signature into its metavariable extension is a
structural no-op on trees: base symbol indices stay valid and MetaApp
nodes keep referring to the newest segment.

Expressions carry their scope and syntactic class; the mk_* constructors
validate argument counts, classes, and scopes, so everything downstream
works with well-scoped, well-classed trees by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import (
    ArityMismatch,
    ClassMismatch,
    IndexOutOfRange,
    ScopeMismatch,
)
from .scopes import (
    Renaming,
    Scope,
    ScopeKind,
    extend_renaming,
    inl_renaming,
    sum_scope,
)


class SyntacticClass(Enum):
    TY = "Ty"
    TM = "Tm"


TY = SyntacticClass.TY
TM = SyntacticClass.TM


@dataclass(frozen=True)
class Argument:
    """One argument slot of an arity: its class and how many variables it binds."""

    cls: SyntacticClass
    binder: Scope


Arity = tuple[Argument, ...]


def arity(*pairs: tuple[SyntacticClass, int]) -> Arity:
    return tuple(Argument(c, b) for c, b in pairs)


def simple_arity(gamma: Scope) -> Arity:
    """gamma-many binder-free term arguments."""
    return tuple(Argument(TM, 0) for _ in range(gamma))


@dataclass(frozen=True)
class Symbol:
    name: str
    cls: SyntacticClass
    arity: Arity


@dataclass(frozen=True)
class Signature:
    """Symbols plus an optional trailing metavariable segment.

    ``symbols`` holds the base symbols only; the metavariable segment is
    generated from ``mv_arity`` (argument i becomes a symbol of class
    argclass(i) with the simple arity of its binder).
    """

    symbols: tuple[Symbol, ...]
    kind: ScopeKind = ScopeKind.INDICES
    mv_arity: Arity | None = None
    mv_names: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        names = [s.name for s in self.symbols]
        if len(set(names)) != len(names):
            raise ArityMismatch(f"duplicate symbol names in signature: {names}")
        if self.mv_arity is not None and self.mv_names and len(self.mv_names) != len(self.mv_arity):
            raise ArityMismatch("metavariable name list does not match arity length")

    @property
    def base_count(self) -> int:
        return len(self.symbols)

    @property
    def mv_count(self) -> int:
        return 0 if self.mv_arity is None else len(self.mv_arity)

    def symbol(self, i: int) -> Symbol:
        if not 0 <= i < self.base_count:
            raise IndexOutOfRange(f"symbol {i} of {self.base_count}")
        return self.symbols[i]

    def symbol_index(self, name: str) -> int:
        for i, s in enumerate(self.symbols):
            if s.name == name:
                return i
        raise IndexOutOfRange(f"no symbol named {name!r}")

    def mv_class(self, i: int) -> SyntacticClass:
        return self._mv_arg(i).cls

    def mv_binder(self, i: int) -> Scope:
        return self._mv_arg(i).binder

    def _mv_arg(self, i: int) -> Argument:
        if self.mv_arity is None or not 0 <= i < len(self.mv_arity):
            raise IndexOutOfRange(f"metavariable {i} of {self.mv_count}")
        return self.mv_arity[i]

    def mv_name(self, i: int) -> str:
        self._mv_arg(i)
        return self.mv_names[i] if self.mv_names else f"?{i}"

    def mv_index(self, name: str) -> int:
        for i in range(self.mv_count):
            if self.mv_name(i) == name:
                return i
        raise IndexOutOfRange(f"no metavariable named {name!r}")


def mv_extend_signature(sig: Signature, alpha: Arity, names: tuple[str, ...] = ()) -> Signature:
    """The metavariable extension of ``sig`` by the arity ``alpha``.

    A previous metavariable segment is absorbed into the base: its symbols
    become ordinary symbols of the extended signature, mirroring how
    (Sigma+alpha)+beta treats the alpha-segment as plain symbols.
    """
    base = sig.symbols
    if sig.mv_arity is not None:
        absorbed = tuple(
            Symbol(_fresh_name(base, sig.mv_name(i), i), sig.mv_class(i), simple_arity(sig.mv_binder(i)))
            for i in range(sig.mv_count)
        )
        base = base + absorbed
    return Signature(base, sig.kind, alpha, names)


def _fresh_name(existing: tuple[Symbol, ...], candidate: str, i: int) -> str:
    taken = {s.name for s in existing}
    name = candidate
    while name in taken:
        name = f"{name}~{i}"
    return name


@dataclass(frozen=True)
class Var:
    pos: int
    scope: Scope

    @property
    def cls(self) -> SyntacticClass:
        return TM


@dataclass(frozen=True)
class SymApp:
    sym: int
    args: tuple["Expr", ...]
    scope: Scope
    cls: SyntacticClass


@dataclass(frozen=True)
class MetaApp:
    idx: int
    args: tuple["Expr", ...]
    scope: Scope
    cls: SyntacticClass


Expr = Var | SymApp | MetaApp


def mk_var(scope: Scope, pos: int) -> Var:
    if not 0 <= pos < scope:
        raise IndexOutOfRange(f"variable {pos} of scope {scope}")
    return Var(pos, scope)


def mk_sym(sig: Signature, sym: int | str, args: tuple[Expr, ...], scope: Scope) -> SymApp:
    if isinstance(sym, str):
        sym = sig.symbol_index(sym)
    decl = sig.symbol(sym)
    _check_args(sig, decl.arity, args, scope, decl.name)
    return SymApp(sym, tuple(args), scope, decl.cls)


def mk_meta(sig: Signature, idx: int | str, args: tuple[Expr, ...], scope: Scope) -> MetaApp:
    if isinstance(idx, str):
        idx = sig.mv_index(idx)
    cls = sig.mv_class(idx)
    _check_args(sig, simple_arity(sig.mv_binder(idx)), args, scope, sig.mv_name(idx))
    return MetaApp(idx, tuple(args), scope, cls)


def _check_args(sig: Signature, ar: Arity, args: tuple[Expr, ...], scope: Scope, name: str) -> None:
    if len(args) != len(ar):
        raise ArityMismatch(f"{name} expects {len(ar)} arguments, got {len(args)}")
    for i, (arg, slot) in enumerate(zip(args, ar)):
        if arg.cls is not slot.cls:
            raise ClassMismatch(f"argument {i} of {name}: expected {slot.cls}, got {arg.cls}")
        if arg.scope != sum_scope(scope, slot.binder):
            raise ScopeMismatch(
                f"argument {i} of {name}: expected scope {sum_scope(scope, slot.binder)}, got {arg.scope}"
            )


def validate_expr(sig: Signature, e: Expr, scope: Scope, cls: SyntacticClass | None = None) -> None:
    """Recursively re-validate an expression tree against a signature."""
    if cls is not None and e.cls is not cls:
        raise ClassMismatch(f"expected {cls}, got {e.cls} at {e!r}")
    if e.scope != scope:
        raise ScopeMismatch(f"expected scope {scope}, got {e.scope} at {e!r}")
    match e:
        case Var(pos=p):
            if not 0 <= p < scope:
                raise IndexOutOfRange(f"variable {p} of scope {scope}")
        case SymApp(sym=s, args=args):
            decl = sig.symbol(s)
            if e.cls is not decl.cls:
                raise ClassMismatch(f"{decl.name} has class {decl.cls}, node says {e.cls}")
            _check_args(sig, decl.arity, args, scope, decl.name)
            for arg, slot in zip(args, decl.arity):
                validate_expr(sig, arg, sum_scope(scope, slot.binder), slot.cls)
        case MetaApp(idx=m, args=args):
            if e.cls is not sig.mv_class(m):
                raise ClassMismatch(f"metavariable {m} has class {sig.mv_class(m)}")
            _check_args(sig, simple_arity(sig.mv_binder(m)), args, scope, sig.mv_name(m))
            for arg in args:
                validate_expr(sig, arg, scope, TM)


def rename_expr(kind: ScopeKind, r: Renaming, e: Expr, binders: tuple[Scope, ...] | None = None) -> Expr:
    """Apply a renaming; under the i-th argument of a node the renaming is
    extended by the identity on that argument's binder."""
    if e.scope != r.src:
        raise ScopeMismatch(f"expression in scope {e.scope}, renaming from {r.src}")
    match e:
        case Var(pos=p):
            return Var(r(p), r.dst)
        case SymApp(sym=s, args=args, cls=cls):
            new_args = tuple(
                rename_expr(kind, extend_renaming(kind, r, arg.scope - e.scope), arg)
                for arg in args
            )
            return SymApp(s, new_args, r.dst, cls)
        case MetaApp(idx=m, args=args, cls=cls):
            new_args = tuple(rename_expr(kind, r, arg) for arg in args)
            return MetaApp(m, new_args, r.dst, cls)
    raise TypeError(f"not an expression: {e!r}")


def weaken_expr(kind: ScopeKind, e: Expr, by: Scope) -> Expr:
    """Rename along the left coproduct inclusion scope -> scope + by."""
    return rename_expr(kind, inl_renaming(kind, e.scope, by), e)


@dataclass(frozen=True)
class SignatureMap:
    """A class- and arity-preserving relabelling of symbols.

    ``sym_table`` maps base symbols; ``mv_table`` maps metavariable indices
    (identity when both signatures carry the same metavariable arity).
    """

    src: Signature
    dst: Signature
    sym_table: tuple[int, ...]
    mv_table: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.src.kind is not self.dst.kind:
            raise ScopeMismatch("signature map across scope kinds")
        if len(self.sym_table) != self.src.base_count:
            raise ArityMismatch("symbol table length mismatch")
        for i, j in enumerate(self.sym_table):
            a, b = self.src.symbol(i), self.dst.symbol(j)
            if a.cls is not b.cls or a.arity != b.arity:
                raise ArityMismatch(f"map does not preserve class/arity at symbol {a.name}")
        table = self._mv_map()
        for i, j in enumerate(table):
            if self.src.mv_class(i) is not self.dst.mv_class(j) or self.src.mv_binder(i) != self.dst.mv_binder(j):
                raise ArityMismatch(f"map does not preserve metavariable {i}")

    def _mv_map(self) -> tuple[int, ...]:
        if self.mv_table is not None:
            return self.mv_table
        if self.src.mv_count == 0:
            return ()
        if self.src.mv_arity != self.dst.mv_arity:
            raise ArityMismatch("implicit metavariable map needs equal metavariable arities")
        return tuple(range(self.src.mv_count))

    @staticmethod
    def identity(sig: Signature) -> "SignatureMap":
        return SignatureMap(sig, sig, tuple(range(sig.base_count)))

    def compose(self, earlier: "SignatureMap") -> "SignatureMap":
        if earlier.dst is not self.src and earlier.dst != self.src:
            raise ArityMismatch("signature maps do not chain")
        sym = tuple(self.sym_table[v] for v in earlier.sym_table)
        mv = tuple(self._mv_map()[v] for v in earlier._mv_map()) if earlier.src.mv_count else None
        return SignatureMap(earlier.src, self.dst, sym, mv)


def translate_expr(fmap: SignatureMap, e: Expr) -> Expr:
    match e:
        case Var():
            return e
        case SymApp(sym=s, args=args, scope=scope, cls=cls):
            return SymApp(fmap.sym_table[s], tuple(translate_expr(fmap, a) for a in args), scope, cls)
        case MetaApp(idx=m, args=args, scope=scope, cls=cls):
            return MetaApp(fmap._mv_map()[m], tuple(translate_expr(fmap, a) for a in args), scope, cls)
    raise TypeError(f"not an expression: {e!r}")


@dataclass(frozen=True)
class Substitution:
    """A raw substitution src -> dst: one term over ``src`` per position of ``dst``."""

    src: Scope
    dst: Scope
    table: tuple[Expr, ...]

    def __post_init__(self):
        if len(self.table) != self.dst:
            raise ScopeMismatch(f"table of length {len(self.table)} for scope {self.dst}")
        for t in self.table:
            if t.cls is not TM:
                raise ClassMismatch("substitution entries must be terms")
            if t.scope != self.src:
                raise ScopeMismatch(f"entry in scope {t.scope}, expected {self.src}")

    def __call__(self, i: int) -> Expr:
        if not 0 <= i < self.dst:
            raise IndexOutOfRange(f"position {i} of scope {self.dst}")
        return self.table[i]

    @staticmethod
    def identity(scope: Scope) -> "Substitution":
        return Substitution(scope, scope, tuple(Var(i, scope) for i in range(scope)))

    @staticmethod
    def of_renaming(r: Renaming) -> "Substitution":
        """The substitution r.dst -> r.src induced by a renaming r: src -> dst."""
        return Substitution(r.dst, r.src, tuple(Var(r(i), r.dst) for i in range(r.src)))


def extend_substitution(kind: ScopeKind, f: Substitution, eta: Scope) -> Substitution:
    """f + eta : (src+eta) -> (dst+eta); new positions map to themselves."""
    src, dst = f.src + eta, f.dst + eta
    table: list[Expr] = [None] * dst  # type: ignore[list-item]
    inl = inl_renaming(kind, f.src, eta)
    for i in range(f.dst):
        table[kind.inl(f.dst, eta, i)] = rename_expr(kind, inl, f(i))
    for j in range(eta):
        table[kind.inr(f.dst, eta, j)] = Var(kind.inr(f.src, eta, j), src)
    return Substitution(src, dst, tuple(table))


def substitute_expr(kind: ScopeKind, f: Substitution, e: Expr) -> Expr:
    """The contravariant action: e over f.dst becomes an expression over f.src."""
    if e.scope != f.dst:
        raise ScopeMismatch(f"expression in scope {e.scope}, substitution into {f.dst}")
    match e:
        case Var(pos=p):
            return f(p)
        case SymApp(sym=s, args=args, cls=cls):
            new_args = tuple(
                substitute_expr(kind, extend_substitution(kind, f, arg.scope - e.scope), arg)
                for arg in args
            )
            return SymApp(s, new_args, f.src, cls)
        case MetaApp(idx=m, args=args, cls=cls):
            return MetaApp(m, tuple(substitute_expr(kind, f, a) for a in args), f.src, cls)
    raise TypeError(f"not an expression: {e!r}")


def compose_subst(kind: ScopeKind, g: Substitution, f: Substitution) -> Substitution:
    """g after f in the contravariant sense: (g o f)(k) = substitute(f, g(k)).

    With f : gamma -> delta and g : delta -> theta this is gamma -> theta.
    """
    if g.src != f.dst:
        raise ScopeMismatch(f"cannot compose {g.src}<-? with ?->{f.dst}")
    return Substitution(f.src, g.dst, tuple(substitute_expr(kind, f, g(k)) for k in range(g.dst)))


def translate_subst(fmap: SignatureMap, f: Substitution) -> Substitution:
    return Substitution(f.src, f.dst, tuple(translate_expr(fmap, t) for t in f.table))


@dataclass(frozen=True)
class Instantiation:
    """Expressions for the metavariables of an arity, over an ambient scope.

    Entry i has the class of argument i and lives in scope ``scope + binder(i)``.
    """

    arity: Arity
    scope: Scope
    exprs: tuple[Expr, ...]

    def __post_init__(self):
        if len(self.exprs) != len(self.arity):
            raise ArityMismatch(f"{len(self.exprs)} entries for arity of length {len(self.arity)}")
        for i, (e, slot) in enumerate(zip(self.exprs, self.arity)):
            if e.cls is not slot.cls:
                raise ClassMismatch(f"entry {i}: expected {slot.cls}, got {e.cls}")
            if e.scope != sum_scope(self.scope, slot.binder):
                raise ScopeMismatch(
                    f"entry {i}: expected scope {sum_scope(self.scope, slot.binder)}, got {e.scope}"
                )

    def __call__(self, i: int) -> Expr:
        return self.exprs[i]


def validate_instantiation(sig: Signature, inst: Instantiation) -> None:
    """Check every entry against the target signature ``sig``."""
    for i, slot in enumerate(inst.arity):
        validate_expr(sig, inst.exprs[i], sum_scope(inst.scope, slot.binder), slot.cls)


def generic_instantiation(sig_ext: Signature, scope: Scope = 0) -> Instantiation:
    """The instantiation sending each metavariable of ``sig_ext`` to its generic application."""
    alpha = sig_ext.mv_arity or ()
    exprs = tuple(
        MetaApp(
            i,
            tuple(Var(j, scope + a.binder) for j in range(a.binder)),
            scope + a.binder,
            a.cls,
        )
        for i, a in enumerate(alpha)
    )
    return Instantiation(alpha, scope, exprs)


def instantiate_expr(kind: ScopeKind, inst: Instantiation, e: Expr) -> Expr:
    """Replace metavariables by their instantiation, landing in scope I.scope + e.scope."""
    gamma, delta = inst.scope, e.scope
    target = sum_scope(gamma, delta)
    match e:
        case Var(pos=p):
            return Var(kind.inr(gamma, delta, p), target)
        case SymApp(sym=s, args=args, cls=cls):
            return SymApp(s, tuple(instantiate_expr(kind, inst, a) for a in args), target, cls)
        case MetaApp(idx=m, args=args, cls=cls):
            binder = inst.arity[m].binder
            table: list[Expr] = [None] * (gamma + binder)  # type: ignore[list-item]
            for i in range(gamma):
                table[kind.inl(gamma, binder, i)] = Var(kind.inl(gamma, delta, i), target)
            for j, arg in enumerate(args):
                table[kind.inr(gamma, binder, j)] = instantiate_expr(kind, inst, arg)
            f = Substitution(target, gamma + binder, tuple(table))
            return substitute_expr(kind, f, inst(m))
    raise TypeError(f"not an expression: {e!r}")


def inst_act_subst(kind: ScopeKind, inst: Instantiation, f: Substitution) -> Substitution:
    """I acting on f : delta' -> delta gives gamma+delta' -> gamma+delta."""
    gamma = inst.scope
    src, dst = sum_scope(gamma, f.src), sum_scope(gamma, f.dst)
    table: list[Expr] = [None] * dst  # type: ignore[list-item]
    for i in range(gamma):
        table[kind.inl(gamma, f.dst, i)] = Var(kind.inl(gamma, f.src, i), src)
    for j in range(f.dst):
        table[kind.inr(gamma, f.dst, j)] = instantiate_expr(kind, inst, f(j))
    return Substitution(src, dst, tuple(table))


def inst_act_inst(kind: ScopeKind, inst: Instantiation, other: Instantiation) -> Instantiation:
    """I acting on J pointwise; the result lives in scope I.scope + J.scope."""
    return Instantiation(
        other.arity,
        sum_scope(inst.scope, other.scope),
        tuple(instantiate_expr(kind, inst, e) for e in other.exprs),
    )


def subst_act_inst(kind: ScopeKind, f: Substitution, inst: Instantiation) -> Instantiation:
    """A substitution f : delta -> gamma acting on an instantiation over gamma."""
    if f.dst != inst.scope:
        raise ScopeMismatch(f"substitution into scope {f.dst}, instantiation over {inst.scope}")
    exprs = tuple(
        substitute_expr(kind, extend_substitution(kind, f, slot.binder), e)
        for e, slot in zip(inst.exprs, inst.arity)
    )
    return Instantiation(inst.arity, f.src, exprs)


def translate_inst(fmap: SignatureMap, inst: Instantiation) -> Instantiation:
    return Instantiation(inst.arity, inst.scope, tuple(translate_expr(fmap, e) for e in inst.exprs))


def concat_inst(left: Instantiation, right: Instantiation) -> Instantiation:
    """Pair two instantiations over the same scope into one of the summed arity."""
    if left.scope != right.scope:
        raise ScopeMismatch("instantiations over different scopes")
    return Instantiation(left.arity + right.arity, left.scope, left.exprs + right.exprs)


def expr_symbols(e: Expr) -> frozenset[int]:
    """Base symbol indices occurring anywhere in the expression."""
    match e:
        case Var():
            return frozenset()
        case SymApp(sym=s, args=args):
            out = frozenset({s})
        case MetaApp(args=args):
            out = frozenset()
        case _:
            raise TypeError(f"not an expression: {e!r}")
    for a in args:
        out |= expr_symbols(a)
    return out
