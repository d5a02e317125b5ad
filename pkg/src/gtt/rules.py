"""Raw rules, structural closure-rule constructors, and congruence rules.

A raw rule is a template: premises and conclusion live over the ambient
signature extended by the rule's arity, and every instantiation of that
arity over a context yields one closure rule on judgements.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    ArityMismatch,
    NotObjectRule,
    ScopeMismatch,
    TrivialityViolated,
)
from .foundations import ClosureRule
from .scopes import ScopeKind
from .syntax import (
    TM,
    TY,
    Argument,
    Arity,
    Expr,
    Instantiation,
    MetaApp,
    Signature,
    SignatureMap,
    Substitution,
    SymApp,
    Var,
    mv_extend_signature,
    substitute_expr,
    translate_expr,
)
from .judgements import (
    EMPTY_CONTEXT,
    Judgement,
    JudgementForm,
    RawContext,
    instantiate_judgement,
    is_term,
    is_type,
    substitute_judgement,
    tm_eq,
    translate_judgement,
    ty_eq,
)


@dataclass(frozen=True)
class RawRule:
    """Premises and conclusion over the metavariable extension by ``arity``."""

    arity: Arity
    premises: tuple[Judgement, ...]
    conclusion: Judgement
    meta_names: tuple[str, ...] = field(default=(), compare=False)

    @property
    def is_object(self) -> bool:
        return self.conclusion.is_object

    def object_premises(self) -> tuple[int, ...]:
        return tuple(i for i, p in enumerate(self.premises) if p.is_object)


def rule_signature(sig: Signature, rule: RawRule) -> Signature:
    """The signature the rule's judgements live over."""
    return mv_extend_signature(sig, rule.arity, rule.meta_names)


def instantiate_rule(
    kind: ScopeKind, inst: Instantiation, ctx: RawContext, rule: RawRule
) -> ClosureRule:
    """The closure rule obtained by instantiating the rule's arity over ``ctx``."""
    if inst.arity != rule.arity:
        raise ArityMismatch("instantiation arity differs from rule arity")
    if inst.scope != ctx.scope:
        raise ScopeMismatch("instantiation scope differs from context scope")
    return ClosureRule(
        tuple(instantiate_judgement(kind, inst, ctx, p) for p in rule.premises),
        instantiate_judgement(kind, inst, ctx, rule.conclusion),
    )


def translate_rule(fmap: SignatureMap, rule: RawRule) -> RawRule:
    """Translate premises and conclusion along ``fmap`` extended by the rule's arity."""
    ext = SignatureMap(
        mv_extend_signature(fmap.src, rule.arity, rule.meta_names),
        mv_extend_signature(fmap.dst, rule.arity, rule.meta_names),
        fmap.sym_table,
        tuple(range(len(rule.arity))),
    )
    return RawRule(
        rule.arity,
        tuple(translate_judgement(ext, p) for p in rule.premises),
        translate_judgement(ext, rule.conclusion),
        rule.meta_names,
    )


def variable_rule(kind: ScopeKind, ctx: RawContext, i: int) -> ClosureRule:
    """Premise: the type of position i is a type; conclusion: the variable inhabits it."""
    a = ctx.type_at(i)
    return ClosureRule(
        (is_type(ctx, a),),
        is_term(ctx, Var(i, ctx.scope), a),
    )


def acts_trivially(kind: ScopeKind, f: Substitution, target: RawContext, source: RawContext, i: int) -> bool:
    """f : target -> source acts trivially at position i of the source context."""
    e = f(i)
    if not isinstance(e, Var):
        return False
    j = e.pos
    return target.type_at(j) == substitute_expr(kind, f, source.type_at(i))


def act_jointly_trivially(
    kind: ScopeKind,
    f: Substitution,
    g: Substitution,
    target: RawContext,
    source: RawContext,
    i: int,
) -> bool:
    e, e2 = f(i), g(i)
    if not (isinstance(e, Var) and isinstance(e2, Var) and e.pos == e2.pos):
        return False
    j = e.pos
    fi = substitute_expr(kind, f, source.type_at(i))
    gi = substitute_expr(kind, g, source.type_at(i))
    return target.type_at(j) == fi and target.type_at(j) == gi


def substitution_rule(
    kind: ScopeKind,
    f: Substitution,
    target: RawContext,
    trivial: frozenset[int],
    j: Judgement,
) -> ClosureRule:
    """The substitution closure rule for f : target -> j.context, checked on K."""
    source = j.context
    if f.src != target.scope or f.dst != source.scope:
        raise ScopeMismatch("substitution endpoints do not match the contexts")
    for i in sorted(trivial):
        if not acts_trivially(kind, f, target, source, i):
            raise TrivialityViolated(i)
    premises = [j]
    for i in range(source.scope):
        if i in trivial:
            continue
        premises.append(is_term(target, f(i), substitute_expr(kind, f, source.type_at(i))))
    return ClosureRule(tuple(premises), substitute_judgement(kind, f, target, j))


def equality_substitution_rule(
    kind: ScopeKind,
    f: Substitution,
    g: Substitution,
    target: RawContext,
    trivial: frozenset[int],
    j: Judgement,
) -> ClosureRule:
    """The equality-substitution closure rule for an object judgement j.

    Premises: j itself, then for each unchecked position the f-typing,
    g-typing, and equality of the two images.  The conclusion equates the
    f- and g-images of j's head over the f-image of its boundary.
    """
    if not j.is_object:
        raise NotObjectRule("equality substitution applies to object judgements")
    source = j.context
    if f.src != target.scope or f.dst != source.scope:
        raise ScopeMismatch("substitution endpoints do not match the contexts")
    if g.src != target.scope or g.dst != source.scope:
        raise ScopeMismatch("substitution endpoints do not match the contexts")
    for i in sorted(trivial):
        if not act_jointly_trivially(kind, f, g, target, source, i):
            raise TrivialityViolated(i)
    premises = [j]
    for i in range(source.scope):
        if i in trivial:
            continue
        ty_i = source.type_at(i)
        f_ty = substitute_expr(kind, f, ty_i)
        g_ty = substitute_expr(kind, g, ty_i)
        premises.append(is_term(target, f(i), f_ty))
        premises.append(is_term(target, g(i), g_ty))
        premises.append(tm_eq(target, f(i), g(i), f_ty))
    if j.form is JudgementForm.IS_TY:
        conclusion = ty_eq(
            target, substitute_expr(kind, f, j.head), substitute_expr(kind, g, j.head)
        )
    else:
        conclusion = tm_eq(
            target,
            substitute_expr(kind, f, j.head),
            substitute_expr(kind, g, j.head),
            substitute_expr(kind, f, j.boundary[0]),
        )
    return ClosureRule(tuple(premises), conclusion)


# --- the eight structural raw rules -----------------------------------------
#
# These use no symbols, so one tree serves every signature; scopes in them
# are all zero, so they are also independent of the scope kind.

def _meta(i: int, cls) -> MetaApp:
    return MetaApp(i, (), 0, cls)


def _mk_structural(names, args, premises, conclusion) -> RawRule:
    return RawRule(tuple(Argument(c, 0) for c in args), tuple(premises), conclusion, tuple(names))


def _equivalence_rules() -> tuple[RawRule, ...]:
    c = EMPTY_CONTEXT
    A, B, C_ = _meta(0, TY), _meta(1, TY), _meta(2, TY)
    ty_refl = _mk_structural(
        ("A",), (TY,),
        [is_type(c, A)],
        ty_eq(c, A, A),
    )
    ty_sym = _mk_structural(
        ("A", "B"), (TY, TY),
        [is_type(c, A), is_type(c, B), ty_eq(c, A, B)],
        ty_eq(c, B, A),
    )
    ty_trans = _mk_structural(
        ("A", "B", "C"), (TY, TY, TY),
        [is_type(c, A), is_type(c, B), is_type(c, C_), ty_eq(c, A, B), ty_eq(c, B, C_)],
        ty_eq(c, A, C_),
    )
    s1, t1, u1 = _meta(1, TM), _meta(2, TM), _meta(3, TM)
    tm_refl = _mk_structural(
        ("A", "s"), (TY, TM),
        [is_type(c, A), is_term(c, s1, A)],
        tm_eq(c, s1, s1, A),
    )
    tm_sym = _mk_structural(
        ("A", "s", "t"), (TY, TM, TM),
        [is_type(c, A), is_term(c, s1, A), is_term(c, t1, A), tm_eq(c, s1, t1, A)],
        tm_eq(c, t1, s1, A),
    )
    tm_trans = _mk_structural(
        ("A", "s", "t", "u"), (TY, TM, TM, TM),
        [
            is_type(c, A),
            is_term(c, s1, A),
            is_term(c, t1, A),
            is_term(c, u1, A),
            tm_eq(c, s1, t1, A),
            tm_eq(c, t1, u1, A),
        ],
        tm_eq(c, s1, u1, A),
    )
    return (ty_refl, ty_sym, ty_trans, tm_refl, tm_sym, tm_trans)


def _conversion_rules() -> tuple[RawRule, ...]:
    c = EMPTY_CONTEXT
    A, B = _meta(0, TY), _meta(1, TY)
    s, t = _meta(2, TM), _meta(3, TM)
    conv = _mk_structural(
        ("A", "B", "s"), (TY, TY, TM),
        [is_type(c, A), is_type(c, B), is_term(c, s, A), ty_eq(c, A, B)],
        is_term(c, s, B),
    )
    conv_eq = _mk_structural(
        ("A", "B", "s", "t"), (TY, TY, TM, TM),
        [
            is_type(c, A),
            is_type(c, B),
            is_term(c, s, A),
            is_term(c, t, A),
            tm_eq(c, s, t, A),
            ty_eq(c, A, B),
        ],
        tm_eq(c, s, t, B),
    )
    return (conv, conv_eq)


EQUIVALENCE_RULES = _equivalence_rules()
CONVERSION_RULES = _conversion_rules()

EQUIV_TY_REFL, EQUIV_TY_SYM, EQUIV_TY_TRANS, EQUIV_TM_REFL, EQUIV_TM_SYM, EQUIV_TM_TRANS = range(6)
CONV_TM, CONV_EQ = range(2)

EQUIVALENCE_RULE_NAMES = ("ty-refl", "ty-sym", "ty-trans", "tm-refl", "tm-sym", "tm-trans")
CONVERSION_RULE_NAMES = ("conv", "conv-eq")


def equivalence_rules() -> tuple[RawRule, ...]:
    return EQUIVALENCE_RULES


def conversion_rules() -> tuple[RawRule, ...]:
    return CONVERSION_RULES


# --- congruence rules --------------------------------------------------------

def congruence_maps(sig: Signature, rule: RawRule) -> tuple[SignatureMap, SignatureMap]:
    """The two relabellings of Sigma+alpha into Sigma+(alpha+alpha)."""
    n = len(rule.arity)
    src = mv_extend_signature(sig, rule.arity, rule.meta_names)
    doubled_names = _doubled_names(rule)
    dst = mv_extend_signature(sig, rule.arity + rule.arity, doubled_names)
    base = tuple(range(src.base_count))
    left = SignatureMap(src, dst, base, tuple(range(n)))
    right = SignatureMap(src, dst, base, tuple(range(n, 2 * n)))
    return left, right


def _doubled_names(rule: RawRule) -> tuple[str, ...]:
    names = rule.meta_names or tuple(f"?{i}" for i in range(len(rule.arity)))
    return tuple(f"{n}'" for n in names) + tuple(f"{n}''" for n in names)


def assoc_equality_judgement(left: SignatureMap, right: SignatureMap, j: Judgement) -> Judgement:
    """The equality judgement associated to an object judgement: context and
    boundary through the left map, the second head through the right map."""
    if not j.is_object:
        raise NotObjectRule("associated equality exists only for object judgements")
    ctx = RawContext(j.context.scope, tuple(translate_expr(left, t) for t in j.context.types))
    if j.form is JudgementForm.IS_TY:
        return ty_eq(ctx, translate_expr(left, j.head), translate_expr(right, j.head))
    return tm_eq(
        ctx,
        translate_expr(left, j.head),
        translate_expr(right, j.head),
        translate_expr(left, j.boundary[0]),
    )


def congruence_rule(sig: Signature, rule: RawRule) -> RawRule:
    """The congruence rule of an object rule: doubled arity, premises in the
    order left block, right block, equation block, and an equality conclusion."""
    if not rule.is_object:
        raise NotObjectRule("congruence rules exist only for object rules")
    left, right = congruence_maps(sig, rule)
    premises = [translate_judgement(left, p) for p in rule.premises]
    premises += [translate_judgement(right, p) for p in rule.premises]
    premises += [
        assoc_equality_judgement(left, right, rule.premises[k]) for k in rule.object_premises()
    ]
    return RawRule(
        rule.arity + rule.arity,
        tuple(premises),
        assoc_equality_judgement(left, right, rule.conclusion),
        _doubled_names(rule),
    )


def generic_application(sig: Signature, sym: int, alpha: Arity | None = None) -> Expr:
    """S applied to the generic metavariable pattern M_i(x_0, ..)."""
    decl = sig.symbol(sym)
    ar = decl.arity if alpha is None else alpha
    if ar != decl.arity:
        raise ArityMismatch(f"generic application of {decl.name} at wrong arity")
    args = tuple(
        MetaApp(i, tuple(Var(j, a.binder) for j in range(a.binder)), a.binder, a.cls)
        for i, a in enumerate(ar)
    )
    return SymApp(sym, args, 0, decl.cls)
