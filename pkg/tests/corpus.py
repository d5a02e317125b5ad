"""A corpus of checked derivations over the base MLTT theory.

Closed-symbol rules instantiate at any ambient context directly, so the
builders below parameterise over the context.  Every item is re-checked
by the tests that consume the corpus.
"""

from __future__ import annotations

from dataclasses import dataclass

from gtt import derive
from gtt.bundled import mltt_base
from gtt.judgements import EMPTY_CONTEXT, Judgement, RawContext, is_term, is_type, tm_eq, ty_eq
from gtt.syntax import Instantiation, Substitution, Var, mk_sym
from gtt.theories import (
    Hyp,
    RawTypeTheory,
    Specific,
    Structural,
    SubstInst,
    TheoryDerivation,
    VariableInst,
)

THEORY, WITNESSES = mltt_base()
SIG = THEORY.signature
KIND = THEORY.kind

PI_FORM = THEORY.rule_index("Pi-form")
LAM_INTRO = THEORY.rule_index("lam-intro")
APP_ELIM = THEORY.rule_index("app-elim")
BETA = THEORY.rule_index("beta")
UNIT_FORM = THEORY.rule_index("unit-form")
TT_INTRO = THEORY.rule_index("tt-intro")

PI_ARITY = SIG.symbol(0).arity
LAM_ARITY = SIG.symbol(1).arity
APP_ARITY = SIG.symbol(2).arity
BETA_ARITY = THEORY.rule(BETA).arity


@dataclass(frozen=True)
class TypedTerm:
    """A term expression with derivations of its type and its typing."""

    ctx: RawContext
    term: object
    type: object
    d_type: TheoryDerivation
    d_term: TheoryDerivation


@dataclass(frozen=True)
class TypedType:
    ctx: RawContext
    type: object
    d_type: TheoryDerivation


def unit_at(ctx: RawContext) -> TypedType:
    e = mk_sym(SIG, "unit", (), ctx.scope)
    return TypedType(ctx, e, Specific(UNIT_FORM, Instantiation((), ctx.scope, ()), ctx, ()))


def tt_at(ctx: RawContext) -> TypedTerm:
    u = unit_at(ctx)
    e = mk_sym(SIG, "tt", (), ctx.scope)
    return TypedTerm(
        ctx, e, u.type, u.d_type, Specific(TT_INTRO, Instantiation((), ctx.scope, ()), ctx, ())
    )


def extend(ctx: RawContext, ty: TypedType) -> RawContext:
    """Extend a context by one type given over it (weakening the new entry)."""
    from gtt.judgements import extend_context
    from gtt.syntax import weaken_expr

    return extend_context(KIND, ctx, (weaken_expr(KIND, ty.type, 1),))


def pi(a: TypedType, b: TypedType) -> TypedType:
    """Pi over a.ctx; b must live over a.ctx extended by a."""
    ctx = a.ctx
    e = mk_sym(SIG, "Pi", (a.type, b.type), ctx.scope)
    inst = Instantiation(PI_ARITY, ctx.scope, (a.type, b.type))
    return TypedType(ctx, e, Specific(PI_FORM, inst, ctx, (a.d_type, b.d_type)))


def lam(a: TypedType, b: TypedType, body: TypedTerm) -> TypedTerm:
    ctx = a.ctx
    e = mk_sym(SIG, "lam", (a.type, b.type, body.term), ctx.scope)
    inst = Instantiation(LAM_ARITY, ctx.scope, (a.type, b.type, body.term))
    p = pi(a, b)
    return TypedTerm(
        ctx, e, p.type, p.d_type,
        Specific(LAM_INTRO, inst, ctx, (a.d_type, b.d_type, body.d_term)),
    )


def app(a: TypedType, b: TypedType, f: TypedTerm, arg: TypedTerm) -> TypedTerm:
    from gtt.syntax import substitute_expr, extend_substitution

    ctx = a.ctx
    e = mk_sym(SIG, "app", (a.type, b.type, f.term, arg.term), ctx.scope)
    inst = Instantiation(APP_ARITY, ctx.scope, (a.type, b.type, f.term, arg.term))
    single = Substitution(ctx.scope, ctx.scope + 1, _single_table(ctx.scope, arg.term))
    b_of_t = substitute_expr(KIND, single, b.type)
    d_type = Structural(
        SubstInst(single, ctx, frozenset(range_positions(ctx.scope)), _b_judgement(a, b)),
        (b.d_type, arg.d_term),
    )
    d_term = Specific(APP_ELIM, inst, ctx, (a.d_type, b.d_type, f.d_term, arg.d_term))
    return TypedTerm(ctx, e, b_of_t, d_type, d_term)


def _single_table(scope: int, term):
    """The substitution table sending the newest variable to ``term``."""
    table = [None] * (scope + 1)
    for i in range(scope):
        table[KIND.inl(scope, 1, i)] = Var(i, scope)
    table[KIND.inr(scope, 1, 0)] = term
    return tuple(table)


def range_positions(scope: int) -> frozenset[int]:
    return frozenset(KIND.inl(scope, 1, i) for i in range(scope))


def _b_judgement(a: TypedType, b: TypedType) -> Judgement:
    ctx2 = extend(a.ctx, a)
    return is_type(ctx2, b.type)


def var(ctx: RawContext, i: int, d_entry_type: TheoryDerivation) -> TypedTerm:
    return TypedTerm(
        ctx, Var(i, ctx.scope), ctx.type_at(i), d_entry_type,
        Structural(VariableInst(ctx, i), (d_entry_type,)),
    )


def beta_eq(a: TypedType, b: TypedType, body: TypedTerm, arg: TypedTerm) -> tuple[TheoryDerivation, Judgement]:
    from gtt.syntax import substitute_expr

    ctx = a.ctx
    inst = Instantiation(BETA_ARITY, ctx.scope, (a.type, b.type, body.term, arg.term))
    d = Specific(BETA, inst, ctx, (a.d_type, b.d_type, body.d_term, arg.d_term))
    single = Substitution(ctx.scope, ctx.scope + 1, _single_table(ctx.scope, arg.term))
    lam_e = mk_sym(SIG, "lam", (a.type, b.type, body.term), ctx.scope)
    app_e = mk_sym(SIG, "app", (a.type, b.type, lam_e, arg.term), ctx.scope)
    j = tm_eq(
        ctx, app_e,
        substitute_expr(KIND, single, body.term),
        substitute_expr(KIND, single, b.type),
    )
    return d, j


def conv_wrap(t: TypedTerm) -> TypedTerm:
    """The same typing, wrapped in a conversion along reflexivity."""
    refl = derive.refl_ty(t.ctx, t.type, t.d_type)
    d = derive.conv(t.ctx, t.type, t.type, t.term, t.d_type, t.d_type, t.d_term, refl)
    return TypedTerm(t.ctx, t.term, t.type, t.d_type, d)


def weaken_closed_item(ctx: RawContext, j: Judgement, d: TheoryDerivation) -> TheoryDerivation:
    return derive.weaken_closed(ctx, j, d)


def build_corpus() -> list[tuple[TheoryDerivation, Judgement]]:
    """At least fifty substitution-free checked derivations, closed."""
    items: list[tuple[TheoryDerivation, Judgement]] = []

    def add_type(t: TypedType):
        items.append((t.d_type, is_type(t.ctx, t.type)))

    def add_term(t: TypedTerm):
        items.append((t.d_term, is_term(t.ctx, t.term, t.type)))

    e = EMPTY_CONTEXT
    u0 = unit_at(e)
    add_type(u0)
    add_term(tt_at(e))

    # a few contexts: [unit], [unit, unit], [Pi(unit,unit)], [unit, Pi(unit,unit)]
    ctx1 = extend(e, u0)
    u1 = unit_at(ctx1)
    ctx2 = extend(ctx1, u1)
    u2 = unit_at(ctx2)
    pid0 = pi(u0, u1)
    ctxp = extend(e, pid0)
    up = unit_at(ctxp)
    ctx1p = extend(ctx1, pi(u1, unit_at(ctx2)))

    for ctx, uat in [(e, u0), (ctx1, u1), (ctx2, u2), (ctxp, up)]:
        add_type(uat)
        add_term(tt_at(ctx))

    # variables at each position of each context
    for ctx in [ctx1, ctx2, ctxp, ctx1p]:
        for i in range(ctx.scope):
            entry = ctx.type_at(i)
            d_entry = _derive_type_in(ctx, entry)
            items.append(
                (
                    Structural(
                        VariableInst(ctx, i),
                        (d_entry,),
                    ),
                    is_term(ctx, Var(i, ctx.scope), entry),
                )
            )

    # Pi types, nested, over several contexts
    for ctx in [e, ctx1, ctxp]:
        a = unit_at(ctx)
        b = unit_at(extend(ctx, a))
        p1 = pi(a, b)
        add_type(p1)
        inner = extend(ctx, a)
        p2 = pi(a, pi(unit_at(inner), unit_at(extend(inner, unit_at(inner)))))
        add_type(p2)

    # identity functions and applications
    for ctx in [e, ctx1, ctxp]:
        a = unit_at(ctx)
        b = unit_at(extend(ctx, a))
        ctx_a = extend(ctx, a)
        x0 = var(ctx_a, newest_position(ctx.scope), unit_at(ctx_a).d_type)
        idf = lam(a, b, x0)
        add_term(idf)
        ap = app(a, b, idf, tt_at(ctx))
        add_term(ap)
        items.append((ap.d_type, is_type(ctx, ap.type)))

    # beta equations
    for ctx in [e, ctx1]:
        a = unit_at(ctx)
        ctx_a = extend(ctx, a)
        b = unit_at(ctx_a)
        x0 = var(ctx_a, newest_position(ctx.scope), unit_at(ctx_a).d_type)
        d, j = beta_eq(a, b, x0, tt_at(ctx))
        items.append((d, j))
        d2, j2 = beta_eq(a, b, tt_at(ctx_a), tt_at(ctx))
        items.append((d2, j2))

    # equivalence and conversion instances
    for ctx in [e, ctx1]:
        a = unit_at(ctx)
        t = tt_at(ctx)
        items.append((derive.refl_ty(ctx, a.type, a.d_type), ty_eq(ctx, a.type, a.type)))
        items.append(
            (derive.refl_tm(ctx, a.type, t.term, a.d_type, t.d_term),
             tm_eq(ctx, t.term, t.term, a.type))
        )
        refl = derive.refl_ty(ctx, a.type, a.d_type)
        items.append(
            (derive.sym_ty(ctx, a.type, a.type, a.d_type, a.d_type, refl),
             ty_eq(ctx, a.type, a.type))
        )
        items.append(
            (derive.trans_ty(ctx, a.type, a.type, a.type, a.d_type, a.d_type, a.d_type, refl, refl),
             ty_eq(ctx, a.type, a.type))
        )
        wrapped = conv_wrap(t)
        add_term(wrapped)

    # lambda typed at a nested Pi
    a = unit_at(e)
    ctx_a = extend(e, a)
    b_in = unit_at(ctx_a)
    inner_pi = pi(b_in, unit_at(extend(ctx_a, b_in)))
    inner_lam = lam(b_in, unit_at(extend(ctx_a, b_in)), tt_at(extend(ctx_a, b_in)))
    outer = lam(a, inner_pi, inner_lam)
    add_term(outer)
    items.append((outer.d_type, is_type(e, outer.type)))
    items.append((inner_pi.d_type, is_type(ctx_a, inner_pi.type)))

    # constant functions at several argument types
    for ctx in [e, ctx1]:
        a = unit_at(ctx)
        ctx_a = extend(ctx, a)
        b = unit_at(ctx_a)
        const = lam(a, b, tt_at(ctx_a))
        add_term(const)
        ap = app(a, b, const, tt_at(ctx))
        add_term(ap)
        items.append((derive.refl_tm(ctx, a.type, ap.term, a.d_type, ap.d_term),
                      tm_eq(ctx, ap.term, ap.term, a.type)))
        wrapped = conv_wrap(ap)
        add_term(wrapped)

    assert len(items) >= 50, len(items)
    return items


def newest_position(outer_scope: int) -> int:
    return KIND.inr(outer_scope, 1, 0)


def pi_over(b: TypedType) -> TypedType:
    """Pi of unit over b's context (b treated as the codomain family)."""
    a = unit_at(b.ctx)
    return pi(a, unit_at(extend(b.ctx, a)))


def _derive_type_in(ctx: RawContext, entry) -> TheoryDerivation:
    """Re-derive a context entry type in place (unit and Pi towers only)."""
    from gtt.syntax import SymApp

    assert isinstance(entry, SymApp)
    name = SIG.symbol(entry.sym).name
    if name == "unit":
        return unit_at(ctx).d_type
    if name == "Pi":
        a_e, b_e = entry.args
        a = TypedType(ctx, a_e, _derive_type_in(ctx, a_e))
        ctx2 = extend(ctx, a)
        b = TypedType(ctx2, b_e, _derive_type_in(ctx2, b_e))
        return pi(a, b).d_type
    raise AssertionError(name)


def substitution_corpus() -> list[tuple[TheoryDerivation, Judgement]]:
    """Derivations that genuinely use substitution and equality-substitution nodes."""
    items: list[tuple[TheoryDerivation, Judgement]] = []
    e = EMPTY_CONTEXT
    u0 = unit_at(e)
    ctx1 = extend(e, u0)
    u1 = unit_at(ctx1)

    # weakening a closed judgement
    t = tt_at(e)
    j = is_term(e, t.term, t.type)
    t1 = tt_at(ctx1)
    items.append((derive.weaken_closed(ctx1, j, t.d_term), is_term(ctx1, t1.term, u1.type)))

    # single-variable substitution [tt/x] into x:unit |- x : unit
    x = var(ctx1, 0, u1.d_type)
    f = Substitution(0, 1, (tt_at(e).term,))
    sub = derive.subst(
        f, e, frozenset(), is_term(ctx1, x.term, u1.type), x.d_term, (t.d_term,)
    )
    items.append((sub, is_term(e, t.term, u0.type)))

    # app's derived type via an explicit substitution node
    a = u0
    b = unit_at(ctx1)
    ctx_a = ctx1
    x0 = var(ctx_a, 0, unit_at(ctx_a).d_type)
    idf = lam(a, b, x0)
    ap = app(a, b, idf, t)
    items.append((ap.d_type, is_type(e, ap.type)))

    # equality substitution: [tt/x] == [app(id,tt)/x] into x:unit |- unit type
    ap_term = ap
    eq_beta, eq_j = beta_eq(a, b, x0, t)
    f1 = Substitution(0, 1, (ap_term.term,))
    f2 = Substitution(0, 1, (t.term,))
    eq_term = tm_eq(e, ap_term.term, t.term, u0.type)
    d_eq_term = eq_beta  # beta: app(unit,unit,lam(...),tt) == tt : unit
    triple = (ap_term.d_term, t.d_term, d_eq_term)
    eqsub = derive.eq_subst(
        f1, f2, e, frozenset(), is_type(ctx1, u1.type), u1.d_type, (triple,)
    )
    items.append((eqsub, ty_eq(e, u0.type, u0.type)))
    return items


def hypothetical_app_rule():
    """The hypothetical form of application: its rule and a derivation of it
    from the universal form, using substitution nodes."""
    from gtt.judgements import extend_context
    from gtt.rules import RawRule
    from gtt.syntax import mv_extend_signature, mk_meta, weaken_expr

    ext = mv_extend_signature(SIG, PI_ARITY, ("A", "B"))
    A0 = mk_meta(ext, "A", (), 0)
    A1 = mk_meta(ext, "A", (), 1)
    A2 = mk_meta(ext, "A", (), 2)
    B1 = mk_meta(ext, "B", (Var(0, 1),), 1)
    pi0 = mk_sym(ext, "Pi", (A0, B1), 0)
    ctx_x = RawContext(1, (A1,))
    ctx_xy = extend_context(KIND, ctx_x, (weaken_expr(KIND, pi0, 2),))
    x = Var(KIND.inl(1, 1, 0), 2)
    y = Var(KIND.inr(1, 1, 0), 2)
    B2 = mk_meta(ext, "B", (x,), 2)
    app_e = mk_sym(ext, "app", (A2, mk_meta(ext, "B", (Var(0, 3),), 3), y, x), 2)
    rule = RawRule(
        PI_ARITY,
        (is_type(EMPTY_CONTEXT, A0), is_type(ctx_x, B1)),
        is_term(ctx_xy, app_e, B2),
        ("A", "B"),
    )

    # witness: instantiate the universal rule at s := y, t := x over ctx_xy,
    # with the premises carried into ctx_xy by weakening substitutions
    a_w = derive.weaken_closed(ctx_xy, is_type(EMPTY_CONTEXT, A0), Hyp(0))
    # [x:A, y:Pi] |- B(x') type for the bound x' of an extended context:
    ctx_xy_a = extend_context(KIND, ctx_xy, (weaken_expr(KIND, A2, 1),))
    fb = Substitution(3, 1, (Var(KIND.inr(2, 1, 0), 3),))
    b_w = Structural(
        SubstInst(fb, ctx_xy_a, frozenset(), is_type(ctx_x, B1)),
        (
            Hyp(1),
            Structural(
                VariableInst(ctx_xy_a, KIND.inr(2, 1, 0)),
                (derive.weaken_closed(ctx_xy_a, is_type(EMPTY_CONTEXT, A0), Hyp(0)),),
            ),
        ),
    )
    pi_w = derive.weaken_closed(ctx_xy, is_type(EMPTY_CONTEXT, pi0), _pi_meta_derivation())
    y_w = Structural(
        VariableInst(ctx_xy, y.pos),
        (pi_w,),
    )
    x_w = Structural(
        VariableInst(ctx_xy, x.pos),
        (a_w,),
    )
    inst = Instantiation(APP_ARITY, 2, (A2, mk_meta(ext, "B", (Var(0, 3),), 3), y, x))
    witness = Specific(APP_ELIM, inst, ctx_xy, (a_w, b_w, y_w, x_w))
    return rule, witness


def _pi_meta_derivation() -> TheoryDerivation:
    """|- Pi(A, B(x)) type from the two hypothetical premises."""
    from gtt.syntax import mv_extend_signature, mk_meta

    ext = mv_extend_signature(SIG, PI_ARITY, ("A", "B"))
    inst = Instantiation(
        PI_ARITY, 0, (mk_meta(ext, "A", (), 0), mk_meta(ext, "B", (Var(0, 1),), 1))
    )
    return Specific(PI_FORM, inst, EMPTY_CONTEXT, (Hyp(0), Hyp(1)))
