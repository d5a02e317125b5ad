"""Raw flat contexts, the four judgement forms, boundaries, presuppositions.

Contexts are flat: a scope together with one type per position, each over
the whole scope, with no ordering assumed.  Sequentiality is layered on
top in the presentation module.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import (
    ClassMismatch,
    HeadForbidden,
    HeadRequired,
    IndexOutOfRange,
    ScopeMismatch,
)
from .scopes import Renaming, Scope, ScopeKind, inl_renaming, sum_scope
from .syntax import (
    TM,
    TY,
    Expr,
    Instantiation,
    Signature,
    SignatureMap,
    Substitution,
    SyntacticClass,
    instantiate_expr,
    rename_expr,
    substitute_expr,
    translate_expr,
    validate_expr,
)


@dataclass(frozen=True)
class RawContext:
    scope: Scope
    types: tuple[Expr, ...]

    def __post_init__(self):
        if len(self.types) != self.scope:
            raise ScopeMismatch(f"{len(self.types)} types for scope {self.scope}")
        for t in self.types:
            if t.cls is not TY:
                raise ClassMismatch("context entries must be types")
            if t.scope != self.scope:
                raise ScopeMismatch(f"context entry in scope {t.scope}, expected {self.scope}")

    def type_at(self, i: int) -> Expr:
        if not 0 <= i < self.scope:
            raise IndexOutOfRange(f"position {i} of scope {self.scope}")
        return self.types[i]


EMPTY_CONTEXT = RawContext(0, ())


class JudgementForm(Enum):
    IS_TY = "IsTy"
    IS_TM = "IsTm"
    TY_EQ = "TyEq"
    TM_EQ = "TmEq"

    @property
    def boundary_classes(self) -> tuple[SyntacticClass, ...]:
        return _BOUNDARY[self]

    @property
    def head_class(self) -> SyntacticClass | None:
        return _HEAD[self]

    @property
    def is_object(self) -> bool:
        return self in (JudgementForm.IS_TY, JudgementForm.IS_TM)

    @property
    def slot_names(self) -> tuple[str, ...]:
        return _SLOT_NAMES[self]


_BOUNDARY = {
    JudgementForm.IS_TY: (),
    JudgementForm.IS_TM: (TY,),
    JudgementForm.TY_EQ: (TY, TY),
    JudgementForm.TM_EQ: (TM, TM, TY),
}
_HEAD = {
    JudgementForm.IS_TY: TY,
    JudgementForm.IS_TM: TM,
    JudgementForm.TY_EQ: None,
    JudgementForm.TM_EQ: None,
}
_SLOT_NAMES = {
    JudgementForm.IS_TY: (),
    JudgementForm.IS_TM: ("type",),
    JudgementForm.TY_EQ: ("lhs", "rhs"),
    JudgementForm.TM_EQ: ("lhs", "rhs", "type"),
}


@dataclass(frozen=True)
class Judgement:
    context: RawContext
    form: JudgementForm
    boundary: tuple[Expr, ...]
    head: Expr | None

    def __post_init__(self):
        _check_slots(self.context, self.form, self.boundary, self.head, head_required=True)

    @property
    def is_object(self) -> bool:
        return self.form.is_object


@dataclass(frozen=True)
class Boundary:
    context: RawContext
    form: JudgementForm
    boundary: tuple[Expr, ...]

    def __post_init__(self):
        _check_slots(self.context, self.form, self.boundary, None, head_required=False)


def _check_slots(ctx, form, boundary, head, head_required):
    classes = form.boundary_classes
    if len(boundary) != len(classes):
        raise ClassMismatch(f"{form.value} takes {len(classes)} boundary slots, got {len(boundary)}")
    for e, c in zip(boundary, classes):
        if e.cls is not c:
            raise ClassMismatch(f"boundary slot of {form.value}: expected {c}, got {e.cls}")
        if e.scope != ctx.scope:
            raise ScopeMismatch(f"slot in scope {e.scope}, context scope {ctx.scope}")
    if head_required:
        hc = form.head_class
        if hc is None:
            if head is not None:
                raise HeadForbidden(f"{form.value} has no head slot")
        else:
            if head is None:
                raise HeadRequired(f"{form.value} requires a head")
            if head.cls is not hc:
                raise ClassMismatch(f"head of {form.value}: expected {hc}, got {head.cls}")
            if head.scope != ctx.scope:
                raise ScopeMismatch(f"head in scope {head.scope}, context scope {ctx.scope}")


def is_type(ctx: RawContext, a: Expr) -> Judgement:
    return Judgement(ctx, JudgementForm.IS_TY, (), a)

def is_term(ctx: RawContext, t: Expr, a: Expr) -> Judgement:
    return Judgement(ctx, JudgementForm.IS_TM, (a,), t)

def ty_eq(ctx: RawContext, a: Expr, b: Expr) -> Judgement:
    return Judgement(ctx, JudgementForm.TY_EQ, (a, b), None)

def tm_eq(ctx: RawContext, s: Expr, t: Expr, a: Expr) -> Judgement:
    return Judgement(ctx, JudgementForm.TM_EQ, (s, t, a), None)


def validate_context(sig: Signature, ctx: RawContext) -> None:
    for t in ctx.types:
        validate_expr(sig, t, ctx.scope, TY)


def validate_judgement(sig: Signature, j: Judgement) -> None:
    validate_context(sig, j.context)
    for e, c in zip(j.boundary, j.form.boundary_classes):
        validate_expr(sig, e, j.context.scope, c)
    if j.head is not None:
        validate_expr(sig, j.head, j.context.scope, j.form.head_class)


def extend_context(kind: ScopeKind, ctx: RawContext, new_types: tuple[Expr, ...]) -> RawContext:
    """Extend by delta-many types already scoped over the sum; old types are weakened."""
    delta = len(new_types)
    total = sum_scope(ctx.scope, delta)
    inl = inl_renaming(kind, ctx.scope, delta)
    types: list[Expr] = [None] * total  # type: ignore[list-item]
    for i in range(ctx.scope):
        types[kind.inl(ctx.scope, delta, i)] = rename_expr(kind, inl, ctx.type_at(i))
    for j, t in enumerate(new_types):
        types[kind.inr(ctx.scope, delta, j)] = t
    return RawContext(total, tuple(types))


def instantiate_context(kind: ScopeKind, inst: Instantiation, ctx: RawContext, inner: RawContext) -> RawContext:
    """Context extension of ``ctx`` by the instantiations of ``inner``'s types."""
    gamma, delta = ctx.scope, inner.scope
    if inst.scope != gamma:
        raise ScopeMismatch(f"instantiation over scope {inst.scope}, context scope {gamma}")
    return extend_context(kind, ctx, tuple(instantiate_expr(kind, inst, t) for t in inner.types))


def translate_context(fmap: SignatureMap, ctx: RawContext) -> RawContext:
    return RawContext(ctx.scope, tuple(translate_expr(fmap, t) for t in ctx.types))


def translate_judgement(fmap: SignatureMap, j: Judgement) -> Judgement:
    return Judgement(
        translate_context(fmap, j.context),
        j.form,
        tuple(translate_expr(fmap, e) for e in j.boundary),
        None if j.head is None else translate_expr(fmap, j.head),
    )


def translate_boundary(fmap: SignatureMap, b: Boundary) -> Boundary:
    return Boundary(
        translate_context(fmap, b.context),
        b.form,
        tuple(translate_expr(fmap, e) for e in b.boundary),
    )


def instantiate_judgement(kind: ScopeKind, inst: Instantiation, ctx: RawContext, j: Judgement) -> Judgement:
    """The judgement instantiation: context extension plus pointwise action on slots."""
    new_ctx = instantiate_context(kind, inst, ctx, j.context)
    return Judgement(
        new_ctx,
        j.form,
        tuple(instantiate_expr(kind, inst, e) for e in j.boundary),
        None if j.head is None else instantiate_expr(kind, inst, j.head),
    )


def instantiate_boundary(kind: ScopeKind, inst: Instantiation, ctx: RawContext, b: Boundary) -> Boundary:
    new_ctx = instantiate_context(kind, inst, ctx, b.context)
    return Boundary(new_ctx, b.form, tuple(instantiate_expr(kind, inst, e) for e in b.boundary))


def substitute_judgement(kind: ScopeKind, f: Substitution, target: RawContext, j: Judgement) -> Judgement:
    """The judgement target |- f*J for f : target -> j.context."""
    if f.src != target.scope or f.dst != j.context.scope:
        raise ScopeMismatch("substitution endpoints do not match the contexts")
    return Judgement(
        target,
        j.form,
        tuple(substitute_expr(kind, f, e) for e in j.boundary),
        None if j.head is None else substitute_expr(kind, f, j.head),
    )


def rename_judgement(kind: ScopeKind, r: Renaming, target: RawContext, j: Judgement) -> Judgement:
    if r.src != j.context.scope or r.dst != target.scope:
        raise ScopeMismatch("renaming endpoints do not match the contexts")
    return Judgement(
        target,
        j.form,
        tuple(rename_expr(kind, r, e) for e in j.boundary),
        None if j.head is None else rename_expr(kind, r, j.head),
    )


def boundary_of(j: Judgement) -> tuple[Boundary, Expr | None]:
    return Boundary(j.context, j.form, j.boundary), j.head


def complete_boundary(b: Boundary, head: Expr | None) -> Judgement:
    """Fill an object boundary with a head; equality boundaries take none."""
    hc = b.form.head_class
    if hc is None:
        if head is not None:
            raise HeadForbidden(f"{b.form.value} boundary takes no head")
        return Judgement(b.context, b.form, b.boundary, None)
    if head is None:
        raise HeadRequired(f"{b.form.value} boundary needs a head")
    if head.cls is not hc:
        raise ClassMismatch(f"head of class {head.cls}, boundary wants {hc}")
    return Judgement(b.context, b.form, b.boundary, head)


def presuppositions(j: Judgement) -> tuple[Judgement, ...]:
    """The judgements obtained by promoting boundary slots to heads."""
    ctx = j.context
    match j.form:
        case JudgementForm.IS_TY:
            return ()
        case JudgementForm.IS_TM:
            return (is_type(ctx, j.boundary[0]),)
        case JudgementForm.TY_EQ:
            a, b = j.boundary
            return (is_type(ctx, a), is_type(ctx, b))
        case JudgementForm.TM_EQ:
            s, t, a = j.boundary
            return (is_type(ctx, a), is_term(ctx, s, a), is_term(ctx, t, a))
    raise TypeError(j.form)


def boundary_presuppositions(b: Boundary) -> tuple[Judgement, ...]:
    """Presuppositions of a boundary: same clauses, no head needed."""
    ctx = b.context
    match b.form:
        case JudgementForm.IS_TY:
            return ()
        case JudgementForm.IS_TM:
            return (is_type(ctx, b.boundary[0]),)
        case JudgementForm.TY_EQ:
            a, bb = b.boundary
            return (is_type(ctx, a), is_type(ctx, bb))
        case JudgementForm.TM_EQ:
            s, t, a = b.boundary
            return (is_type(ctx, a), is_term(ctx, s, a), is_term(ctx, t, a))
    raise TypeError(b.form)
