"""Synthesis of presupposition witnesses for congruence rules.

Given a tight object rule R with its own presupposition witnesses, the
congruence rule inherits witnesses: the left and right premise blocks
reuse R's witnesses relabelled into the two metavariable copies, the
equation premises combine the object hypotheses with context transports,
and the conclusion's right-hand typing converts along a synthesised
equality of the two images of the conclusion type.

The equality synthesis walks R's own witness derivations, sending each
node to its congruence counterpart.  It covers the node kinds bundled
witnesses produce: hypotheses, variable, equivalence and conversion
instances, specific rules, and closing substitutions into metavariable-
free targets.  Anything else raises MissingWitness, so theory files can
ship hand-written congruence witnesses instead.
"""

from __future__ import annotations

from .errors import MissingWitness
from . import derive
from .judgements import (
    EMPTY_CONTEXT,
    Judgement,
    JudgementForm,
    RawContext,
    is_type,
    presuppositions,
    ty_eq,
)
from .rules import congruence_rule, instantiate_rule
from .syntax import (
    Expr,
    Instantiation,
    MetaApp,
    Substitution,
    SymApp,
    Var,
    concat_inst,
    substitute_expr,
)
from .theories import (
    ConvInst,
    EquivInst,
    EqSubstInst,
    Hyp,
    RawTypeTheory,
    Specific,
    Structural,
    SubstInst,
    TheoryDerivation,
    VariableInst,
)


def _relabel_expr(e: Expr, shift: int) -> Expr:
    match e:
        case Var():
            return e
        case SymApp(sym=s, args=args, scope=sc, cls=c):
            return SymApp(s, tuple(_relabel_expr(a, shift) for a in args), sc, c)
        case MetaApp(idx=m, args=args, scope=sc, cls=c):
            return MetaApp(m + shift, tuple(_relabel_expr(a, shift) for a in args), sc, c)
    raise TypeError(e)


def _relabel_context(ctx: RawContext, shift: int) -> RawContext:
    return RawContext(ctx.scope, tuple(_relabel_expr(t, shift) for t in ctx.types))


def _relabel_judgement(j: Judgement, shift: int) -> Judgement:
    return Judgement(
        _relabel_context(j.context, shift),
        j.form,
        tuple(_relabel_expr(e, shift) for e in j.boundary),
        None if j.head is None else _relabel_expr(j.head, shift),
    )


def _relabel_inst(inst: Instantiation, shift: int) -> Instantiation:
    return Instantiation(inst.arity, inst.scope, tuple(_relabel_expr(e, shift) for e in inst.exprs))


def _relabel_subst(f: Substitution, shift: int) -> Substitution:
    return Substitution(f.src, f.dst, tuple(_relabel_expr(e, shift) for e in f.table))


def relabel_derivation(d: TheoryDerivation, shift: int, hyp_shift: int) -> TheoryDerivation:
    """Move a derivation to one copy of the doubled metavariable segment."""
    match d:
        case Hyp(index=k):
            return Hyp(k + hyp_shift)
        case Specific(rule=r, inst=i, context=g, children=children):
            return Specific(
                r,
                _relabel_inst(i, shift),
                _relabel_context(g, shift),
                tuple(relabel_derivation(c, shift, hyp_shift) for c in children),
            )
        case Structural(instance=data, children=children):
            new_children = tuple(relabel_derivation(c, shift, hyp_shift) for c in children)
            match data:
                case VariableInst(context=ctx, pos=i):
                    new = VariableInst(_relabel_context(ctx, shift), i)
                case EquivInst(which=w, inst=i, context=ctx):
                    new = EquivInst(w, _relabel_inst(i, shift), _relabel_context(ctx, shift))
                case ConvInst(which=w, inst=i, context=ctx):
                    new = ConvInst(w, _relabel_inst(i, shift), _relabel_context(ctx, shift))
                case SubstInst(subst=f, context=ctx, trivial=K, judgement=j):
                    new = SubstInst(
                        _relabel_subst(f, shift), _relabel_context(ctx, shift), K,
                        _relabel_judgement(j, shift),
                    )
                case EqSubstInst(left=f, right=g2, context=ctx, trivial=K, judgement=j):
                    new = EqSubstInst(
                        _relabel_subst(f, shift), _relabel_subst(g2, shift),
                        _relabel_context(ctx, shift), K, _relabel_judgement(j, shift),
                    )
                case _:
                    raise TypeError(data)
            return Structural(new, new_children)
    raise TypeError(d)


class _CongruenceEngine:
    def __init__(self, theory: RawTypeTheory, rule_index: int, base, witness_table):
        from .metatheory import check_tight

        self.theory = theory
        self.kind = theory.kind
        self.rule = theory.rule(rule_index)
        self.rule_index = rule_index
        self.base = base
        self.witness_table = witness_table
        self.n = len(self.rule.premises)
        self.shift = len(self.rule.arity)
        self.objects = self.rule.object_premises()
        self.tight = check_tight(self.rule)
        self.cong = congruence_rule(theory.signature, self.rule)

    # -- little helpers -------------------------------------------------------

    def eq_hyp(self, premise: int) -> int:
        return 2 * self.n + self.objects.index(premise)

    def left(self, d):
        return relabel_derivation(d, 0, 0)

    def right(self, d):
        return relabel_derivation(d, self.shift, self.n)

    def l_expr(self, e):
        return _relabel_expr(e, 0)

    def r_expr(self, e):
        return _relabel_expr(e, self.shift)

    def find_hyp(self, judgement: Judgement) -> TheoryDerivation:
        for k, p in enumerate(self.cong.premises):
            if p == judgement:
                return Hyp(k)
        raise MissingWitness(f"no congruence hypothesis matches {judgement!r}")

    # -- (left, right, equality) images of derivations over R's premises -------

    def triple(self, d: TheoryDerivation):
        match d:
            case Hyp(index=k):
                eq = Hyp(self.eq_hyp(k)) if self.rule.premises[k].is_object else None
                return self.left(d), self.right(d), eq
            case Structural(instance=VariableInst(context=ctx, pos=i), children=children):
                d_fa, _, _ = self.triple(children[0])
                lctx = _relabel_context(ctx, 0)
                la = lctx.type_at(i)
                x = Var(i, lctx.scope)
                dvar = Structural(VariableInst(lctx, i), (d_fa,))
                return self.left(d), self.right(d), derive.refl_tm(lctx, la, x, d_fa, dvar)
            case Structural(instance=SubstInst()):
                return self._subst_triple(d)
            case Structural() | Specific():
                return self._rule_triple(d)
        raise MissingWitness(f"congruence synthesis cannot handle {type(d).__name__} nodes")

    def _rule_triple(self, node):
        from .metatheory import _cited_rule, _node_inst, find_congruence

        rule, _ = _cited_rule(self.theory, node)
        inst, ctx = _node_inst(node)
        d_l, d_r = self.left(node), self.right(node)
        if not rule.conclusion.is_object:
            return d_l, d_r, None
        lctx = _relabel_context(ctx, 0)
        match node:
            case Specific(rule=r):
                cidx = find_congruence(self.theory, r)
                if cidx is None:
                    raise MissingWitness(f"no congruence rule for {self.theory.rule_name(r)}")
                eq_children = [self.triple(node.children[k])[2] for k in rule.object_premises()]
                ii = concat_inst(_relabel_inst(inst, 0), _relabel_inst(inst, self.shift))
                children = (
                    [self.left(c) for c in node.children]
                    + [self.right(c) for c in node.children]
                    + eq_children
                )
                return d_l, d_r, Specific(cidx, ii, lctx, tuple(children))
            case Structural(instance=ConvInst(which=0), children=children):
                la, ra = self.l_expr(inst.exprs[0]), self.r_expr(inst.exprs[0])
                lb = self.l_expr(inst.exprs[1])
                ls, rs = self.l_expr(inst.exprs[2]), self.r_expr(inst.exprs[2])
                tA = self.triple(children[0])
                tS = self.triple(children[2])
                sym = derive.sym_ty(lctx, la, ra, tA[0], tA[1], tA[2])
                rs_at_la = derive.conv(lctx, ra, la, rs, tA[1], tA[0], tS[1], sym)
                d_e = derive.conv_eq(
                    lctx, la, lb, ls, rs,
                    tA[0], self.left(children[1]), tS[0], rs_at_la, tS[2],
                    self.left(children[3]),
                )
                return d_l, d_r, d_e
        raise MissingWitness(f"congruence synthesis cannot handle object node {node!r}")

    def _subst_triple(self, node):
        """A closing substitution node: chase the equality through both legs."""
        kind = self.kind
        data = node.instance
        f, tgt, K, jj = data.subst, data.context, data.trivial, data.judgement
        d_l, d_r = self.left(node), self.right(node)
        if not jj.is_object:
            return d_l, d_r, None
        if jj.form is not JudgementForm.IS_TY:
            raise MissingWitness(
                "congruence synthesis supports substitution nodes into type judgements only"
            )
        if K or _relabel_context(tgt, 0) != _relabel_context(tgt, self.shift):
            raise MissingWitness(
                "congruence synthesis supports substitution nodes only with no checked "
                "positions and a metavariable-free target context"
            )
        lctx = _relabel_context(tgt, 0)
        src = jj.context
        lf, rf = _relabel_subst(f, 0), _relabel_subst(f, self.shift)
        d_j = node.children[0]
        typ = {i: node.children[1 + i] for i in range(src.scope)}
        tJ = self.triple(d_j)
        r_src = _relabel_context(src, self.shift)

        typing_triples = {}
        mid_typings = {}
        for i in range(src.scope):
            t_i = self.triple(typ[i])
            lty = substitute_expr(kind, lf, self.l_expr(src.type_at(i)))
            mixed = substitute_expr(kind, lf, r_src.type_at(i))
            rty = substitute_expr(kind, rf, r_src.type_at(i))
            if mixed != rty:
                raise MissingWitness(
                    "congruence synthesis needs context entry types that close under "
                    "the substitution"
                )
            if lty == rty:
                typing_triples[i] = (t_i[0], t_i[1], t_i[2])
                mid_typings[i] = t_i[0]
                continue
            w_ty = self._presup_type_derivation(typ[i])
            tW = self.triple(w_ty)
            sym = derive.sym_ty(lctx, lty, rty, tW[0], tW[1], tW[2])
            conv_f = derive.conv(lctx, lty, rty, lf(i), tW[0], tW[1], t_i[0], tW[2])
            t_at_lty = derive.conv(lctx, rty, lty, rf(i), tW[1], tW[0], t_i[1], sym)
            conv_e_l = derive.conv_eq(
                lctx, lty, rty, lf(i), rf(i), tW[0], tW[1], t_i[0], t_at_lty, t_i[2], tW[2]
            )
            typing_triples[i] = (conv_f, t_i[1], conv_e_l)
            mid_typings[i] = conv_f

        eq_j = ty_eq(_relabel_context(src, 0), self.l_expr(jj.head), self.r_expr(jj.head))
        step1 = Structural(
            SubstInst(lf, lctx, frozenset(), eq_j),
            (tJ[2],) + tuple(self.left(typ[i]) for i in range(src.scope)),
        )
        r_j = _relabel_judgement(jj, self.shift)
        step2 = Structural(
            EqSubstInst(lf, rf, lctx, frozenset(), r_j),
            (tJ[1],) + tuple(x for i in range(src.scope) for x in typing_triples[i]),
        )
        lh = substitute_expr(kind, lf, self.l_expr(jj.head))
        mid = substitute_expr(kind, lf, self.r_expr(jj.head))
        rh = substitute_expr(kind, rf, self.r_expr(jj.head))
        mid_typing = Structural(
            SubstInst(lf, lctx, frozenset(), r_j),
            (tJ[1],) + tuple(mid_typings[i] for i in range(src.scope)),
        )
        d_e = derive.trans_ty(lctx, lh, mid, rh, d_l, mid_typing, d_r, step1, step2)
        return d_l, d_r, d_e

    def _presup_type_derivation(self, d: TheoryDerivation) -> TheoryDerivation:
        """The derivation of the underlying-type presupposition of a typing."""
        from .metatheory import derive_presuppositions

        hyp_presups = tuple(
            tuple(
                self.base.premises[(k, p)]
                for p in range(len(presuppositions(self.rule.premises[k])))
            )
            for k in range(self.n)
        )
        return derive_presuppositions(
            self.theory, d, self.witness_table, self.rule.arity, hyp_presups=hyp_presups
        )[0]

    # -- context transports ------------------------------------------------------

    def _entry_meta(self, e: Expr) -> int | None:
        if isinstance(e, MetaApp) and not e.args:
            return e.idx % self.shift
        return None

    def _entry_type(self, ctx: RawContext, e: Expr) -> TheoryDerivation:
        m = self._entry_meta(e)
        if m is None:
            raise MissingWitness(
                "congruence synthesis needs context entries that are closed metavariables"
            )
        left_copy = isinstance(e, MetaApp) and e.idx < self.shift
        intro = self.tight.premise_of_arg[m]
        hyp = Hyp(intro + (0 if left_copy else self.n))
        head = self.rule.premises[intro].head
        closed = is_type(EMPTY_CONTEXT, _relabel_expr(head, 0 if left_copy else self.shift))
        return derive.weaken_closed(ctx, closed, hyp)

    def _entry_equality(self, ctx: RawContext, to_ty: Expr, from_ty: Expr) -> TheoryDerivation:
        m, m2 = self._entry_meta(to_ty), self._entry_meta(from_ty)
        if m is None or m != m2:
            raise MissingWitness("congruence synthesis needs matching closed metavariable entries")
        intro = self.tight.premise_of_arg[m]
        head = self.rule.premises[intro].head
        closed = ty_eq(EMPTY_CONTEXT, _relabel_expr(head, 0), _relabel_expr(head, self.shift))
        return derive.weaken_closed(ctx, closed, Hyp(self.eq_hyp(intro)))

    def _transport(self, d, from_ctx: RawContext, to_ctx: RawContext, judgement: Judgement):
        """Carry a derivation between equal-scope contexts with judgementally
        equal entries, by an identity-table substitution."""
        scope = from_ctx.scope
        if scope == 0 or from_ctx == to_ctx:
            return d
        f = Substitution(scope, scope, tuple(Var(i, scope) for i in range(scope)))
        typings = []
        for q in range(scope):
            to_ty = to_ctx.type_at(q)
            from_ty = from_ctx.type_at(q)
            d_to = self._entry_type(to_ctx, to_ty)
            x = Var(q, scope)
            dvar = Structural(VariableInst(to_ctx, q), (d_to,))
            if from_ty == to_ty:
                typings.append(dvar)
                continue
            d_from = self._entry_type(to_ctx, from_ty)
            d_eq = self._entry_equality(to_ctx, to_ty, from_ty)
            typings.append(derive.conv(to_ctx, to_ty, from_ty, x, d_to, d_from, dvar, d_eq))
        return Structural(SubstInst(f, to_ctx, frozenset(), judgement), (d,) + tuple(typings))

    # -- the equality of the two images of a boundary type -------------------------

    def _boundary_equality(self, lctx: RawContext, a: Expr) -> TheoryDerivation:
        la, ra = self.l_expr(a), self.r_expr(a)
        if isinstance(a, MetaApp):
            intro = self.tight.premise_of_arg[a.idx]
            generic = self.rule.premises[intro].head
            intro_lctx = _relabel_context(self.rule.premises[intro].context, 0)
            if a == generic and intro_lctx == lctx:
                return Hyp(self.eq_hyp(intro))
            if not a.args and self.rule.premises[intro].context.scope == 0:
                closed = ty_eq(EMPTY_CONTEXT, self.l_expr(generic), self.r_expr(generic))
                return derive.weaken_closed(lctx, closed, Hyp(self.eq_hyp(intro)))
        if isinstance(a, SymApp):
            from .metatheory import find_congruence, theory_tightness

            beta = theory_tightness(self.theory)
            cidx = find_congruence(self.theory, beta[a.sym])
            if cidx is not None:
                arity = self.theory.signature.symbol(a.sym).arity
                inst = concat_inst(
                    Instantiation(arity, lctx.scope, tuple(self.l_expr(x) for x in a.args)),
                    Instantiation(arity, lctx.scope, tuple(self.r_expr(x) for x in a.args)),
                )
                closure = instantiate_rule(self.kind, inst, lctx, self.theory.rule(cidx))
                if closure.conclusion == ty_eq(lctx, la, ra):
                    children = tuple(self.find_hyp(p) for p in closure.premises)
                    return Specific(cidx, inst, lctx, children)
        raise MissingWitness(
            f"cannot synthesise the equality of the two images of {a!r}; "
            "supply the congruence witnesses by hand"
        )

    # -- assembling the witnesses ----------------------------------------------------

    def build(self):
        from .metatheory import RuleWitnesses

        out = RuleWitnesses()
        n = self.n
        for (i, p), w in self.base.premises.items():
            out.premises[(i, p)] = self.left(w)
            out.premises[(n + i, p)] = self.right(w)
        for pos, k in enumerate(self.objects):
            idx = 2 * n + pos
            premise = self.rule.premises[k]
            lctx = _relabel_context(premise.context, 0)
            rctx = _relabel_context(premise.context, self.shift)
            r_j = _relabel_judgement(premise, self.shift)
            if premise.form is JudgementForm.IS_TY:
                out.premises[(idx, 0)] = Hyp(k)
                out.premises[(idx, 1)] = self._transport(Hyp(n + k), rctx, lctx, r_j)
            else:
                out.premises[(idx, 0)] = self.left(self.base.premises[(k, 0)])
                out.premises[(idx, 1)] = Hyp(k)
                out.premises[(idx, 2)] = self._transported_term(k, premise, lctx, rctx)
        conclusion = self.rule.conclusion
        gen_l = self._generic_instance(0, 0)
        gen_r = self._generic_instance(self.shift, n)
        if conclusion.form is JudgementForm.IS_TY:
            out.conclusion[0] = gen_l
            out.conclusion[1] = gen_r
        else:
            a = conclusion.boundary[0]
            la, ra = self.l_expr(a), self.r_expr(a)
            out.conclusion[0] = self.left(self.base.conclusion[0])
            out.conclusion[1] = gen_l
            if la == ra:
                out.conclusion[2] = gen_r
            else:
                t_a = self.triple(self.base.conclusion[0])
                sym = derive.sym_ty(EMPTY_CONTEXT, la, ra, t_a[0], t_a[1], t_a[2])
                rh = self.r_expr(conclusion.head)
                out.conclusion[2] = derive.conv(
                    EMPTY_CONTEXT, ra, la, rh, t_a[1], t_a[0], gen_r, sym
                )
        return out

    def _generic_instance(self, shift: int, hyp_shift: int) -> Specific:
        exprs = tuple(
            MetaApp(i + shift, tuple(Var(j, a.binder) for j in range(a.binder)), a.binder, a.cls)
            for i, a in enumerate(self.rule.arity)
        )
        inst = Instantiation(self.rule.arity, 0, exprs)
        return Specific(
            self.rule_index, inst, EMPTY_CONTEXT,
            tuple(Hyp(k + hyp_shift) for k in range(self.n)),
        )

    def _transported_term(self, k: int, premise: Judgement, lctx, rctx) -> TheoryDerivation:
        """The right instance of a term premise, carried to the left context
        and converted to the left type."""
        r_j = _relabel_judgement(premise, self.shift)
        moved = self._transport(Hyp(self.n + k), rctx, lctx, r_j)
        a = premise.boundary[0]
        la, ra = self.l_expr(a), self.r_expr(a)
        if la == ra:
            return moved
        rh = self.r_expr(premise.head)
        d_la = self.left(self.base.premises[(k, 0)])
        d_ra = self._transport(
            self.right(self.base.premises[(k, 0)]), rctx, lctx, is_type(rctx, ra)
        )
        d_eq = self._boundary_equality(lctx, a)
        sym = derive.sym_ty(lctx, la, ra, d_la, d_ra, d_eq)
        return derive.conv(lctx, ra, la, rh, d_ra, d_la, moved, sym)


def congruence_witnesses(
    theory: RawTypeTheory, rule_index: int, base, witness_table=None
):
    """Witnesses for the congruence rule of ``rule_index``, from R's own.

    ``witness_table`` supplies other rules' witnesses for presupposition
    side-calls; the empty default is enough when R's witnesses only cite
    hypotheses, structural machinery, and substitution closures.
    """
    engine = _CongruenceEngine(theory, rule_index, base, witness_table or {})
    return engine.build()
