"""Well-behavedness checks and the metatheorems as derivation transformers.

Derivability is undecidable for arbitrary raw theories, so nothing here
searches: presuppositivity and friends are checked against supplied
witness derivations, and the metatheorems are constructive transformers
whose outputs re-check against the kernel.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import derive
from .errors import (
    KernelError,
    MissingWitness,
    NoBijection,
    NotCongruous,
    NotObjectRule,
    NotSubstitutive,
    NotTight,
    NotTypeRespecting,
    TrivialityViolated,
)
from .foundations import FinitePoset, check_well_founded
from .judgements import (
    EMPTY_CONTEXT,
    Judgement,
    JudgementForm,
    RawContext,
    is_type,
    presuppositions,
)
from .rules import (
    CONVERSION_RULES,
    EQUIVALENCE_RULES,
    RawRule,
    congruence_rule,
    generic_application,
)
from .scopes import Renaming, inl_renaming
from .syntax import (
    Arity,
    Expr,
    Instantiation,
    MetaApp,
    Signature,
    Substitution,
    SymApp,
    Var,
    concat_inst,
    expr_symbols,
    extend_substitution,
    instantiate_expr,
    rename_expr,
    subst_act_inst,
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
    check_theory_derivation,
    derivation_nodes,
    instantiate_derivation,
)

# --- tightness ----------------------------------------------------------------

@dataclass(frozen=True)
class TightnessWitness:
    """For each argument of the rule's arity, the introducing object premise."""

    premise_of_arg: tuple[int, ...]


def _generic_meta_head(idx: int, binder: int, cls) -> Expr:
    return MetaApp(idx, tuple(Var(j, binder) for j in range(binder)), binder, cls)


def check_tight(rule: RawRule) -> TightnessWitness:
    """Find the unique bijection arguments <-> object premises, or raise.

    Argument i must be introduced by a premise whose context scope is the
    argument's binder, whose form is the argument's class, and whose head
    is the metavariable applied to exactly the variables of that scope.
    """
    object_premises = rule.object_premises()
    if len(object_premises) != len(rule.arity):
        raise NoBijection(
            f"{len(rule.arity)} arguments but {len(object_premises)} object premises"
        )
    assignment = []
    used = set()
    for i, arg in enumerate(rule.arity):
        expected_head = _generic_meta_head(i, arg.binder, arg.cls)
        expected_form = JudgementForm.IS_TY if arg.cls.value == "Ty" else JudgementForm.IS_TM
        found = None
        for p in object_premises:
            premise = rule.premises[p]
            if (
                premise.form is expected_form
                and premise.context.scope == arg.binder
                and premise.head == expected_head
            ):
                found = p
                break
        if found is None:
            raise NoBijection(f"no introducing premise for argument {i}")
        if found in used:
            raise NoBijection(f"premise {found} introduces two arguments")
        used.add(found)
        assignment.append(found)
    return TightnessWitness(tuple(assignment))


def is_tight(rule: RawRule) -> bool:
    try:
        check_tight(rule)
        return True
    except NoBijection:
        return False


def is_symbol_rule(sig: Signature, rule: RawRule, sym: int) -> bool:
    """Arity, conclusion form, and generic-application head all match the symbol."""
    decl = sig.symbol(sym)
    if rule.arity != decl.arity:
        return False
    if not rule.conclusion.is_object:
        return False
    expected_form = JudgementForm.IS_TY if decl.cls.value == "Ty" else JudgementForm.IS_TM
    if rule.conclusion.form is not expected_form:
        return False
    if rule.conclusion.context.scope != 0:
        return False
    return rule.conclusion.head == generic_application(sig, sym)


def theory_tightness(theory: RawTypeTheory) -> dict[int, int]:
    """The bijection symbol -> rule index witnessing theory tightness."""
    for i, rule in enumerate(theory.rules):
        if not is_tight(rule):
            raise NotTight(f"rule {theory.rule_name(i)} is not tight")
    object_rules = [i for i, r in enumerate(theory.rules) if r.is_object]
    beta: dict[int, int] = {}
    for i in object_rules:
        head = theory.rules[i].conclusion.head
        if not isinstance(head, SymApp):
            raise NotTight(f"object rule {theory.rule_name(i)} does not conclude a symbol application")
        sym = head.sym
        if not is_symbol_rule(theory.signature, theory.rules[i], sym):
            raise NotTight(f"rule {theory.rule_name(i)} is not a symbol rule")
        if sym in beta:
            raise NotTight(
                f"symbol {theory.signature.symbol(sym).name} has two rules: "
                f"{theory.rule_name(beta[sym])} and {theory.rule_name(i)}"
            )
        beta[sym] = i
    missing = set(range(theory.signature.base_count)) - set(beta)
    if missing:
        names = ", ".join(theory.signature.symbol(s).name for s in sorted(missing))
        raise NotTight(f"symbols without rules: {names}")
    return beta


# --- presuppositivity ---------------------------------------------------------

@dataclass
class RuleWitnesses:
    """Derivations of presuppositions, over the rule's premises as hypotheses.

    ``conclusion[p]`` derives the p-th presupposition of the conclusion;
    ``premises[(i, p)]`` the p-th presupposition of premise i.  All are over
    the theory at ambient arity(rule), with Hyp(k) citing premise k (the
    weak reading appends premise presuppositions after the premises; strong
    witnesses never cite those, so the same derivations serve both).
    """

    conclusion: dict[int, TheoryDerivation] = field(default_factory=dict)
    premises: dict[tuple[int, int], TheoryDerivation] = field(default_factory=dict)


TheoryWitnesses = dict[str, RuleWitnesses]


def presupposition_hypotheses(rule: RawRule, weak: bool) -> tuple[Judgement, ...]:
    hyps = rule.premises
    if weak:
        for p in rule.premises:
            hyps = hyps + presuppositions(p)
    return hyps


def check_presuppositive(
    theory: RawTypeTheory,
    rule: RawRule,
    witnesses: RuleWitnesses | None,
    weak: bool = False,
    diagnostics: list[str] | None = None,
) -> bool:
    """Check the supplied witnesses: every presupposition of the conclusion
    (and, unless weak, of every premise) must be derived from the premises."""
    witnesses = witnesses or RuleWitnesses()
    hyps = presupposition_hypotheses(rule, weak)
    ok = True

    def run(target: Judgement, d: TheoryDerivation | None, tag: str) -> bool:
        if d is None:
            _log(diagnostics, f"{tag}: no witness supplied")
            return False
        try:
            got = check_theory_derivation(theory, hyps, d, rule.arity, rule.meta_names)
        except KernelError as e:
            _log(diagnostics, f"{tag}: witness fails to check: {e}")
            return False
        if got != target:
            _log(diagnostics, f"{tag}: witness derives {got!r}, wanted {target!r}")
            return False
        return True

    for p, target in enumerate(presuppositions(rule.conclusion)):
        ok &= run(target, witnesses.conclusion.get(p), f"conclusion/{p}")
    if not weak:
        for i, premise in enumerate(rule.premises):
            for p, target in enumerate(presuppositions(premise)):
                ok &= run(target, witnesses.premises.get((i, p)), f"premise_{i}/{p}")
    return ok


def _log(diagnostics: list[str] | None, msg: str) -> None:
    if diagnostics is not None:
        diagnostics.append(msg)


def _structural_witnesses() -> tuple[list[RuleWitnesses], list[RuleWitnesses]]:
    """Presupposition witnesses for the eight structural raw rules.

    Each conclusion/premise presupposition is a hypothesis outright, except
    the two sides of the equality-conversion conclusion, which convert.
    """
    c = EMPTY_CONTEXT

    def h(k):
        return Hyp(k)

    equiv = [
        RuleWitnesses({0: h(0), 1: h(0)}, {}),
        RuleWitnesses({0: h(1), 1: h(0)}, {(2, 0): h(0), (2, 1): h(1)}),
        RuleWitnesses(
            {0: h(0), 1: h(2)},
            {(3, 0): h(0), (3, 1): h(1), (4, 0): h(1), (4, 1): h(2)},
        ),
        RuleWitnesses({0: h(0), 1: h(1), 2: h(1)}, {(1, 0): h(0)}),
        RuleWitnesses(
            {0: h(0), 1: h(2), 2: h(1)},
            {(1, 0): h(0), (2, 0): h(0), (3, 0): h(0), (3, 1): h(1), (3, 2): h(2)},
        ),
        RuleWitnesses(
            {0: h(0), 1: h(1), 2: h(3)},
            {
                (1, 0): h(0),
                (2, 0): h(0),
                (3, 0): h(0),
                (4, 0): h(0),
                (4, 1): h(1),
                (4, 2): h(2),
                (5, 0): h(0),
                (5, 1): h(2),
                (5, 2): h(3),
            },
        ),
    ]
    conv_w = RuleWitnesses({0: h(1)}, {(2, 0): h(0), (3, 0): h(0), (3, 1): h(1)})
    # conv-eq: metas A B s t; presups of s == t : B are B type, s : B, t : B
    ceq = CONVERSION_RULES[1]
    mA = MetaApp(0, (), 0, ceq.arity[0].cls)
    mB = MetaApp(1, (), 0, ceq.arity[1].cls)
    ms = MetaApp(2, (), 0, ceq.arity[2].cls)
    mt = MetaApp(3, (), 0, ceq.arity[3].cls)
    s_in_B = derive.conv(c, mA, mB, ms, h(0), h(1), h(2), h(5))
    t_in_B = derive.conv(c, mA, mB, mt, h(0), h(1), h(3), h(5))
    conv_eq_w = RuleWitnesses(
        {0: h(1), 1: s_in_B, 2: t_in_B},
        {
            (2, 0): h(0),
            (3, 0): h(0),
            (4, 0): h(0),
            (4, 1): h(2),
            (4, 2): h(3),
            (5, 0): h(0),
            (5, 1): h(1),
        },
    )
    return equiv, [conv_w, conv_eq_w]


EQUIVALENCE_WITNESSES, CONVERSION_WITNESSES = _structural_witnesses()


# --- acceptability ------------------------------------------------------------

@dataclass
class RuleReport:
    name: str
    tight: bool
    presuppositive: bool
    empty_conclusion_context: bool


@dataclass
class AcceptabilityReport:
    rules: list[RuleReport]
    tight: bool
    presuppositive: bool
    substitutive: bool
    congruous: bool
    diagnostics: list[str]
    symbol_rules: dict[int, int] | None

    @property
    def acceptable(self) -> bool:
        return self.tight and self.presuppositive and self.substitutive and self.congruous


def find_congruence(theory: RawTypeTheory, rule_index: int) -> int | None:
    """Index of a rule structurally equal to the congruence rule of ``rule_index``."""
    target = congruence_rule(theory.signature, theory.rule(rule_index))
    for j, r in enumerate(theory.rules):
        if r == target:
            return j
    return None


def check_acceptable_theory(
    theory: RawTypeTheory, witnesses: TheoryWitnesses | None = None
) -> AcceptabilityReport:
    witnesses = witnesses or {}
    diagnostics: list[str] = []
    rule_reports = []
    all_presup = True
    for i, rule in enumerate(theory.rules):
        name = theory.rule_name(i)
        tight = is_tight(rule)
        presup = check_presuppositive(
            theory, rule, witnesses.get(name), weak=False, diagnostics=diagnostics
        )
        empty = rule.conclusion.context.scope == 0
        if not tight:
            diagnostics.append(f"rule {name} is not tight")
        if not presup:
            diagnostics.append(f"rule {name} is not presuppositive with the supplied witnesses")
        if not empty:
            diagnostics.append(f"rule {name} has a non-empty conclusion context")
        all_presup &= presup
        rule_reports.append(RuleReport(name, tight, presup, empty))
    try:
        beta = theory_tightness(theory)
        theory_tight = True
    except NotTight as e:
        beta = None
        theory_tight = False
        diagnostics.append(str(e))
    substitutive = all(r.empty_conclusion_context for r in rule_reports)
    congruous = True
    for i, rule in enumerate(theory.rules):
        if rule.is_object and find_congruence(theory, i) is None:
            congruous = False
            diagnostics.append(f"no congruence rule for {theory.rule_name(i)}")
    return AcceptabilityReport(
        rule_reports, theory_tight, all_presup, substitutive, congruous, diagnostics, beta
    )


def require_substitutive(theory: RawTypeTheory) -> None:
    for i, rule in enumerate(theory.rules):
        if rule.conclusion.context.scope != 0:
            raise NotSubstitutive(f"rule {theory.rule_name(i)} has a non-empty conclusion context")


# --- the presuppositions theorem ----------------------------------------------

def graft_theory(d: TheoryDerivation, fillers: tuple[TheoryDerivation, ...]) -> TheoryDerivation:
    """Replace hypothesis leaves by the corresponding filler derivations."""
    match d:
        case Hyp(index=k):
            if not 0 <= k < len(fillers):
                raise MissingWitness(f"no filler for hypothesis {k}")
            return fillers[k]
        case Structural(instance=data, children=children):
            return Structural(data, tuple(graft_theory(c, fillers) for c in children))
        case Specific(rule=r, inst=i, context=g, children=children):
            return Specific(r, i, g, tuple(graft_theory(c, fillers) for c in children))
    raise TypeError(f"not a derivation node: {d!r}")


def _rule_witnesses_for_node(
    theory: RawTypeTheory, witnesses: TheoryWitnesses, node
) -> tuple[RawRule, RuleWitnesses]:
    match node:
        case Specific(rule=r):
            rule = theory.rule(r)
            w = witnesses.get(theory.rule_name(r))
            if w is None:
                raise MissingWitness(f"no presupposition witnesses for rule {theory.rule_name(r)}")
            return rule, w
        case Structural(instance=EquivInst(which=w_)):
            return EQUIVALENCE_RULES[w_], EQUIVALENCE_WITNESSES[w_]
        case Structural(instance=ConvInst(which=w_)):
            return CONVERSION_RULES[w_], CONVERSION_WITNESSES[w_]
    raise TypeError(f"node cites no raw rule: {node!r}")


def derive_presuppositions(
    theory: RawTypeTheory,
    d: TheoryDerivation,
    witnesses: TheoryWitnesses,
    ambient: Arity | None = None,
    hyp_presups: tuple[tuple[TheoryDerivation, ...], ...] | None = None,
) -> tuple[TheoryDerivation, ...]:
    """Derivations of every presupposition of d's conclusion.

    Requires (weak) presupposition witnesses for every specific rule used.
    Hypothesis leaves are only allowed if ``hyp_presups`` supplies
    derivations of the presuppositions of each hypothesis.
    """
    kind = theory.kind

    def go(node: TheoryDerivation) -> tuple[TheoryDerivation, ...]:
        match node:
            case Hyp(index=k):
                if hyp_presups is None:
                    raise MissingWitness("presuppositions of a hypothesis are not derivable")
                return hyp_presups[k]
            case Structural(instance=VariableInst(), children=children):
                return (children[0],)
            case Structural(instance=SubstInst(subst=f, context=tgt, trivial=K, judgement=jj), children=children):
                sub_presups = go(children[0])
                out = []
                for p, pj in enumerate(presuppositions(jj)):
                    out.append(
                        Structural(
                            SubstInst(f, tgt, K, pj), (sub_presups[p],) + tuple(children[1:])
                        )
                    )
                return tuple(out)
            case Structural(instance=EqSubstInst(left=f, right=g, context=tgt, trivial=K, judgement=jj), children=children):
                return _eq_subst_presups(theory, node, go)
            case Structural() | Specific():
                rule, rw = _rule_witnesses_for_node(theory, witnesses, node)
                inst, ctx = _node_inst(node)
                n = len(rule.premises)
                fillers = list(node.children)
                for j, premise in enumerate(rule.premises):
                    child_presups = go(node.children[j]) if presuppositions(premise) else ()
                    fillers.extend(child_presups)
                out = []
                for p in range(len(presuppositions(rule.conclusion))):
                    w = rw.conclusion.get(p)
                    if w is None:
                        raise MissingWitness(
                            f"missing conclusion presupposition witness {p}"
                        )
                    lowered = instantiate_derivation(theory, inst, ctx, w, ambient)
                    out.append(graft_theory(lowered, tuple(fillers)))
                return tuple(out)
        raise TypeError(f"not a derivation node: {d!r}")

    return go(d)


def _node_inst(node) -> tuple[Instantiation, RawContext]:
    match node:
        case Specific(inst=i, context=g):
            return i, g
        case Structural(instance=EquivInst(inst=i, context=g)):
            return i, g
        case Structural(instance=ConvInst(inst=i, context=g)):
            return i, g
    raise TypeError(node)


def _eq_subst_presups(theory, node, go):
    """Presuppositions at an equality-substitution node, per the theorem's proof."""
    kind = theory.kind
    data = node.instance
    f, g, tgt, K, jj = data.left, data.right, data.context, data.trivial, data.judgement
    children = node.children
    unchecked = [i for i in range(jj.context.scope) if i not in K]
    f_typ = tuple(children[1 + 3 * k] for k in range(len(unchecked)))
    g_typ = tuple(children[2 + 3 * k] for k in range(len(unchecked)))

    def subst_node(h, target_j, d_target, typings):
        return Structural(SubstInst(h, tgt, K, target_j), (d_target,) + tuple(typings))

    if jj.form is JudgementForm.IS_TY:
        d_fa = subst_node(f, jj, children[0], f_typ)
        d_ga = subst_node(g, jj, children[0], g_typ)
        return (d_fa, d_ga)
    # term judgement t : A
    a = jj.boundary[0]
    t = jj.head
    d_a = go(children[0])[0]
    ja = is_type(jj.context, a)
    d_fA = subst_node(f, ja, d_a, f_typ)
    d_gA = subst_node(g, ja, d_a, g_typ)
    d_ft = subst_node(f, jj, children[0], f_typ)
    d_gt = subst_node(g, jj, children[0], g_typ)
    d_eqA = Structural(EqSubstInst(f, g, tgt, K, ja), (d_a,) + tuple(children[1:]))
    fa = substitute_expr(kind, f, a)
    ga = substitute_expr(kind, g, a)
    gt = substitute_expr(kind, g, t)
    d_sym = derive.sym_ty(tgt, fa, ga, d_fA, d_gA, d_eqA)
    d_gt_at_fa = derive.conv(tgt, ga, fa, gt, d_gA, d_fA, d_gt, d_sym)
    return (d_fA, d_ft, d_gt_at_fa)


# --- admissibility of renaming -------------------------------------------------

def is_substitution_free(d: TheoryDerivation) -> bool:
    return not any(
        isinstance(n, Structural) and isinstance(n.instance, (SubstInst, EqSubstInst))
        for n in derivation_nodes(d)
    )


def rename_inst(kind, r: Renaming, inst: Instantiation) -> Instantiation:
    from .scopes import extend_renaming

    exprs = tuple(
        rename_expr(kind, extend_renaming(kind, r, a.binder), e)
        for e, a in zip(inst.exprs, inst.arity)
    )
    return Instantiation(inst.arity, r.dst, exprs)


def _check_type_respecting(kind, r: Renaming, src: RawContext, dst: RawContext) -> None:
    for i in range(src.scope):
        if dst.type_at(r(i)) != rename_expr(kind, r, src.type_at(i)):
            raise NotTypeRespecting(i)


def rename_derivation(
    theory: RawTypeTheory,
    r: Renaming,
    target: RawContext,
    d: TheoryDerivation,
    ambient: Arity | None = None,
) -> TheoryDerivation:
    """Rename a substitution-free derivation along a type-respecting renaming."""
    require_substitutive(theory)
    kind = theory.kind

    def go(node, rn: Renaming, tgt: RawContext):
        match node:
            case Hyp():
                if rn.is_identity():
                    return node
                raise MissingWitness("cannot rename a hypothesis")
            case Structural(instance=VariableInst(context=ctx, pos=i), children=children):
                _check_type_respecting(kind, rn, ctx, tgt)
                return Structural(
                    VariableInst(tgt, rn(i)), (go(children[0], rn, tgt),)
                )
            case Structural() | Specific():
                rule, _inst_ctx = _cited_rule(theory, node)
                inst, ctx = _node_inst(node)
                _check_type_respecting(kind, rn, ctx, tgt)
                new_inst = rename_inst(kind, rn, inst)
                new_children = []
                from .judgements import instantiate_context
                from .scopes import extend_renaming

                for j, premise in enumerate(rule.premises):
                    psi = premise.context.scope
                    child_tgt = instantiate_context(kind, new_inst, tgt, premise.context)
                    child_rn = extend_renaming(kind, rn, psi)
                    new_children.append(go(node.children[j], child_rn, child_tgt))
                return _rebuild(node, new_inst, tgt, tuple(new_children))
        raise TypeError(f"substitution node in a substitution-free derivation: {node!r}")

    return go(d, r, target)


def _cited_rule(theory, node) -> tuple[RawRule, None]:
    match node:
        case Specific(rule=r):
            return theory.rule(r), None
        case Structural(instance=EquivInst(which=w)):
            return EQUIVALENCE_RULES[w], None
        case Structural(instance=ConvInst(which=w)):
            return CONVERSION_RULES[w], None
    raise TypeError(node)


def _rebuild(node, inst, ctx, children):
    match node:
        case Specific(rule=r):
            return Specific(r, inst, ctx, children)
        case Structural(instance=EquivInst(which=w)):
            return Structural(EquivInst(w, inst, ctx), children)
        case Structural(instance=ConvInst(which=w)):
            return Structural(ConvInst(w, inst, ctx), children)
    raise TypeError(node)


# --- admissibility of substitution ----------------------------------------------

def _check_trivial_action(kind, f, target, source, positions):
    from .rules import acts_trivially

    for i in sorted(positions):
        if not acts_trivially(kind, f, target, source, i):
            raise TrivialityViolated(i)


def substitute_derivation(
    theory: RawTypeTheory,
    f: Substitution,
    target: RawContext,
    trivial: frozenset[int],
    typings: dict[int, TheoryDerivation],
    d: TheoryDerivation,
    ambient: Arity | None = None,
) -> TheoryDerivation:
    """Substitute into a substitution-free derivation, keeping it substitution-free.

    ``typings[i]`` must be a substitution-free derivation of
    target |- f(i) : f*(source type i) for every position i outside
    ``trivial``; positions inside it are only required to be trivial.
    """
    require_substitutive(theory)
    kind = theory.kind

    def go(node, fs: Substitution, tgt: RawContext, K: frozenset[int], typ: dict):
        match node:
            case Hyp():
                if fs == Substitution.identity(fs.src):
                    return node
                raise MissingWitness("cannot substitute into a hypothesis")
            case Structural(instance=VariableInst(context=ctx, pos=i), children=children):
                _check_trivial_action(kind, fs, tgt, ctx, K)
                if i in K:
                    image = fs(i)
                    return Structural(
                        VariableInst(tgt, image.pos), (go(children[0], fs, tgt, K, typ),)
                    )
                if i not in typ:
                    raise MissingWitness(f"no typing derivation for position {i}")
                return typ[i]
            case Structural() | Specific():
                rule, _ = _cited_rule(theory, node)
                inst, ctx = _node_inst(node)
                _check_trivial_action(kind, fs, tgt, ctx, K)
                new_inst = subst_act_inst(kind, fs, inst)
                new_children = []
                from .judgements import instantiate_context

                for j, premise in enumerate(rule.premises):
                    psi = premise.context.scope
                    child_tgt = instantiate_context(kind, new_inst, tgt, premise.context)
                    child_f = extend_substitution(kind, fs, psi)
                    child_K = frozenset(kind.inl(fs.dst, psi, i) for i in K) | frozenset(
                        kind.inr(fs.dst, psi, p) for p in range(psi)
                    )
                    child_typ = {
                        kind.inl(fs.dst, psi, i): rename_derivation(
                            theory,
                            inl_renaming(kind, fs.src, psi),
                            child_tgt,
                            dv,
                            ambient,
                        )
                        for i, dv in typ.items()
                    } if psi else dict(typ)
                    new_children.append(go(node.children[j], child_f, child_tgt, child_K, child_typ))
                return _rebuild(node, new_inst, tgt, tuple(new_children))
        raise TypeError(f"substitution node in a substitution-free derivation: {node!r}")

    return go(d, f, target, trivial, dict(typings))


# --- admissibility of equality substitution --------------------------------------

def _check_joint_conditions(kind, f, g, target, source, K):
    for i in sorted(K):
        e1, e2 = f(i), g(i)
        if not (isinstance(e1, Var) and isinstance(e2, Var) and e1.pos == e2.pos):
            raise TrivialityViolated(i, "(jointly)")
        ty = source.type_at(i)
        fi = substitute_expr(kind, f, ty)
        gi = substitute_expr(kind, g, ty)
        if target.type_at(e1.pos) not in (fi, gi):
            raise TrivialityViolated(i, "(jointly)")


def substitute_equal_derivation(
    theory: RawTypeTheory,
    f: Substitution,
    g: Substitution,
    target: RawContext,
    trivial: frozenset[int],
    triples: dict[int, tuple[TheoryDerivation, TheoryDerivation, TheoryDerivation]],
    d: TheoryDerivation,
    ambient: Arity | None = None,
) -> tuple[TheoryDerivation, TheoryDerivation, TheoryDerivation | None]:
    """Substitute two judgementally equal substitutions into a derivation.

    Returns substitution-free derivations of target |- f*J, target |- g*J,
    and, for object J, target |- (f == g)*J.  ``triples[i]`` holds the
    f-typing, g-typing, and equality derivations for each unchecked i.
    """
    require_substitutive(theory)
    kind = theory.kind
    congruence_of: dict[int, int] = {}

    def cong_index(r: int) -> int:
        if r not in congruence_of:
            j = find_congruence(theory, r)
            if j is None:
                raise NotCongruous(f"no congruence rule for {theory.rule_name(r)}")
            congruence_of[r] = j
        return congruence_of[r]

    def go(node, fs, gs, tgt, K, tris):
        match node:
            case Hyp():
                raise MissingWitness("cannot substitute into a hypothesis")
            case Structural(instance=VariableInst(context=ctx, pos=i), children=children):
                _check_joint_conditions(kind, fs, gs, tgt, ctx, K)
                if i not in K:
                    if i not in tris:
                        raise MissingWitness(f"no typing triple for position {i}")
                    return tris[i]
                d_fa, d_ga, d_ea = go(children[0], fs, gs, tgt, K, tris)
                j = fs(i).pos
                fa = substitute_expr(kind, fs, ctx.type_at(i))
                ga = substitute_expr(kind, gs, ctx.type_at(i))
                x = Var(j, tgt.scope)
                if tgt.type_at(j) == fa:
                    dvar = Structural(VariableInst(tgt, j), (d_fa,))
                    d_f = dvar
                    d_g = derive.conv(tgt, fa, ga, x, d_fa, d_ga, dvar, d_ea)
                    d_e = derive.refl_tm(tgt, fa, x, d_fa, dvar)
                else:
                    dvar = Structural(VariableInst(tgt, j), (d_ga,))
                    d_sym = derive.sym_ty(tgt, fa, ga, d_fa, d_ga, d_ea)
                    d_f = derive.conv(tgt, ga, fa, x, d_ga, d_fa, dvar, d_sym)
                    d_g = dvar
                    refl = derive.refl_tm(tgt, ga, x, d_ga, dvar)
                    d_e = derive.conv_eq(tgt, ga, fa, x, x, d_ga, d_fa, dvar, dvar, refl, d_sym)
                return d_f, d_g, d_e
            case Structural() | Specific():
                rule, _ = _cited_rule(theory, node)
                inst, ctx = _node_inst(node)
                _check_joint_conditions(kind, fs, gs, tgt, ctx, K)
                i_f = subst_act_inst(kind, fs, inst)
                i_g = subst_act_inst(kind, gs, inst)
                from .judgements import instantiate_context

                f_children, g_children, eq_components = [], [], []
                for j, premise in enumerate(rule.premises):
                    psi = premise.context.scope
                    if psi == 0:
                        tri = go(node.children[j], fs, gs, tgt, K, tris)
                        f_children.append(tri[0])
                        g_children.append(tri[1])
                        eq_components.append(tri[2])
                        continue
                    child_f = extend_substitution(kind, fs, psi)
                    child_g = extend_substitution(kind, gs, psi)
                    child_K = frozenset(kind.inl(fs.dst, psi, i) for i in K) | frozenset(
                        kind.inr(fs.dst, psi, p) for p in range(psi)
                    )
                    tgt_f = instantiate_context(kind, i_f, tgt, premise.context)
                    tgt_g = instantiate_context(kind, i_g, tgt, premise.context)

                    def lift(tris_ctx, dv):
                        return rename_derivation(
                            theory, inl_renaming(kind, fs.src, psi), tris_ctx, dv, ambient
                        )

                    tris_f = {
                        kind.inl(fs.dst, psi, i): tuple(lift(tgt_f, dv) for dv in t3)
                        for i, t3 in tris.items()
                    }
                    tris_g = {
                        kind.inl(fs.dst, psi, i): tuple(lift(tgt_g, dv) for dv in t3)
                        for i, t3 in tris.items()
                    }
                    tri_f = go(node.children[j], child_f, child_g, tgt_f, child_K, tris_f)
                    tri_g = go(node.children[j], child_f, child_g, tgt_g, child_K, tris_g)
                    f_children.append(tri_f[0])
                    g_children.append(tri_g[1])
                    eq_components.append(tri_f[2])
                d_f = _rebuild(node, i_f, tgt, tuple(f_children))
                d_g = _rebuild(node, i_g, tgt, tuple(g_children))
                conclusion_form = rule.conclusion.form
                if not conclusion_form.is_object:
                    return d_f, d_g, None
                d_e = _equal_image(theory, node, rule, inst, tgt, i_f, i_g,
                                   f_children, g_children, eq_components, cong_index,
                                   fs, gs)
                return d_f, d_g, d_e
        raise TypeError(f"substitution node in a substitution-free derivation: {node!r}")

    result = go(d, f, g, target, trivial, dict(triples))
    return result


def _equal_image(theory, node, rule, inst, tgt, i_f, i_g,
                 f_children, g_children, eq_components, cong_index, fs, gs):
    """The (f == g)-image at an object-rule node: congruence rule for specific
    rules, conversion bookkeeping for the term-conversion rule."""
    kind = theory.kind
    match node:
        case Specific(rule=r):
            cidx = cong_index(r)
            ii = concat_inst(i_f, i_g)
            children = list(f_children) + list(g_children)
            for k in rule.object_premises():
                children.append(eq_components[k])
            return Specific(cidx, ii, tgt, tuple(children))
        case Structural(instance=ConvInst(which=0)):
            # premises A, B, s : A, A == B; conclusion s : B
            t0 = (f_children[0], g_children[0], eq_components[0])
            t1 = (f_children[1], g_children[1], eq_components[1])
            t2 = (f_children[2], g_children[2], eq_components[2])
            t3 = (f_children[3], g_children[3], None)
            fA = substitute_expr(kind, fs, instantiate_expr(kind, inst, _conv_meta(0)))
            gA = substitute_expr(kind, gs, instantiate_expr(kind, inst, _conv_meta(0)))
            fB = substitute_expr(kind, fs, instantiate_expr(kind, inst, _conv_meta(1)))
            fsx = substitute_expr(kind, fs, instantiate_expr(kind, inst, _conv_meta(2)))
            gsx = substitute_expr(kind, gs, instantiate_expr(kind, inst, _conv_meta(2)))
            sym = derive.sym_ty(tgt, fA, gA, t0[0], t0[1], t0[2])
            gs_at_fA = derive.conv(tgt, gA, fA, gsx, t0[1], t0[0], t2[1], sym)
            return derive.conv_eq(
                tgt, fA, fB, fsx, gsx, t0[0], t1[0], t2[0], gs_at_fA, t2[2], t3[0]
            )
    raise NotObjectRule(f"no equality image for node {node!r}")


def _conv_meta(i: int) -> MetaApp:
    rule = CONVERSION_RULES[0]
    return MetaApp(i, (), 0, rule.arity[i].cls)


# --- elimination of substitution --------------------------------------------------

def eliminate_substitution(
    theory: RawTypeTheory, d: TheoryDerivation, ambient: Arity | None = None
) -> TheoryDerivation:
    """A substitution-free derivation of the same judgement.

    Dispatches substitution nodes to substitute_derivation and equality
    substitution nodes to substitute_equal_derivation, bottom-up.
    """

    def go(node):
        match node:
            case Hyp():
                return node
            case Structural(instance=SubstInst(subst=f, context=tgt, trivial=K, judgement=jj), children=children):
                new_children = [go(c) for c in children]
                unchecked = [i for i in range(jj.context.scope) if i not in K]
                typings = {i: new_children[1 + k] for k, i in enumerate(unchecked)}
                return substitute_derivation(theory, f, tgt, K, typings, new_children[0], ambient)
            case Structural(instance=EqSubstInst(left=f, right=g, context=tgt, trivial=K, judgement=jj), children=children):
                new_children = [go(c) for c in children]
                unchecked = [i for i in range(jj.context.scope) if i not in K]
                triples = {
                    i: (new_children[1 + 3 * k], new_children[2 + 3 * k], new_children[3 + 3 * k])
                    for k, i in enumerate(unchecked)
                }
                _, _, d_eq = substitute_equal_derivation(
                    theory, f, g, tgt, K, triples, new_children[0], ambient
                )
                return d_eq
            case Structural(instance=data, children=children):
                return Structural(data, tuple(go(c) for c in children))
            case Specific(rule=r, inst=i, context=ctx, children=children):
                return Specific(r, i, ctx, tuple(go(c) for c in children))
        raise TypeError(f"not a derivation node: {node!r}")

    return go(d)


# --- uniqueness of typing ----------------------------------------------------------

def unique_typing(
    theory: RawTypeTheory,
    d_a: TheoryDerivation,
    d_b: TheoryDerivation,
    d1: TheoryDerivation,
    d2: TheoryDerivation,
    ambient: Arity | None = None,
) -> TheoryDerivation:
    """From derivations of t : A and t : B (plus typings of A and B), a
    derivation of A == B.  Requires a tight, substitutive theory."""
    theory_tightness(theory)
    require_substitutive(theory)
    kind = theory.kind
    d1 = eliminate_substitution(theory, d1, ambient)
    d2 = eliminate_substitution(theory, d2, ambient)

    def type_of(node) -> Expr:
        match node:
            case Structural(instance=VariableInst(context=ctx, pos=i)):
                return ctx.type_at(i)
            case Structural(instance=ConvInst(which=0, inst=inst)):
                return inst.exprs[1]
            case Specific(rule=r, inst=inst):
                c = theory.rule(r).conclusion
                return instantiate_expr(kind, inst, c.boundary[0])
        raise NotTight(f"no term-judgement type at {node!r}")

    def conv_parts(node):
        # children: A' type, A type, s : A', A' == A; instantiation (A', A, s)
        inst = node.instance.inst
        return node.children, inst.exprs[0], inst.exprs[1]

    def go(e1, da, e2, db):
        ctx = _conclusion_context(e1)
        match e1:
            case Structural(instance=ConvInst(which=0)):
                (ca_p, ca, ct, ceq), a_prime, a = conv_parts(e1)
                inner = go(ct, ca_p, e2, db)
                b = type_of(e2)
                sym = derive.sym_ty(ctx, a_prime, a, ca_p, ca, ceq)
                return derive.trans_ty(ctx, a, a_prime, b, ca, ca_p, db, sym, inner)
            case _:
                pass
        match e2:
            case Structural(instance=ConvInst(which=0)):
                (cb_p, cb, ct, ceq), b_prime, b = conv_parts(e2)
                inner = go(e1, da, ct, cb_p)
                a = type_of(e1)
                return derive.trans_ty(ctx, a, b_prime, b, da, cb_p, cb, inner, ceq)
            case _:
                pass
        match e1, e2:
            case (
                Structural(instance=VariableInst(pos=i)),
                Structural(instance=VariableInst(pos=j)),
            ):
                if i != j:
                    raise NotTight("the two derivations type different variables")
                return derive.refl_ty(ctx, type_of(e1), da)
            case (Specific(rule=r1, inst=i1), Specific(rule=r2, inst=i2)):
                if r1 != r2:
                    raise NotTight("the two derivations cite different symbol rules")
                if i1 != i2:
                    raise NotTight("instantiations differ despite equal heads")
                return derive.refl_ty(ctx, type_of(e1), da)
        raise NotTight(f"unexpected node pair {type(e1).__name__}/{type(e2).__name__}")

    return go(d1, d_a, d2, d_b)


def _conclusion_context(node) -> RawContext:
    match node:
        case Structural(instance=VariableInst(context=ctx)):
            return ctx
        case Structural(instance=EquivInst(context=ctx)) | Structural(instance=ConvInst(context=ctx)):
            return ctx
        case Specific(context=ctx):
            return ctx
        case Structural(instance=SubstInst(context=ctx)) | Structural(instance=EqSubstInst(context=ctx)):
            return ctx
    raise TypeError(f"no conclusion context at {node!r}")


def unique_typing_acceptable(
    theory: RawTypeTheory,
    d1: TheoryDerivation,
    d2: TheoryDerivation,
    witnesses: TheoryWitnesses,
    ambient: Arity | None = None,
) -> TheoryDerivation:
    """The corollary form: typings of the two types come from presuppositions."""
    d_a = derive_presuppositions(theory, d1, witnesses, ambient)[0]
    d_b = derive_presuppositions(theory, d2, witnesses, ambient)[0]
    return unique_typing(theory, d_a, d_b, d1, d2, ambient)


# --- natural types and inversion -----------------------------------------------

def natural_type(
    theory: RawTypeTheory, ctx: RawContext, t: Expr, ambient: Arity | None = None
) -> Expr:
    """The type read off the symbol rules: a variable gets its context type,
    a symbol application the instantiated conclusion type of its rule."""
    kind = theory.kind
    match t:
        case Var(pos=i):
            return ctx.type_at(i)
        case SymApp(sym=s, args=args, scope=scope):
            beta = theory_tightness(theory)
            rule = theory.rule(beta[s])
            inst = Instantiation(theory.signature.symbol(s).arity, scope, args)
            return instantiate_expr(kind, inst, rule.conclusion.boundary[0])
        case MetaApp():
            raise NotTight("natural types are undefined at metavariable applications")
    raise TypeError(f"not a term: {t!r}")


def invert(
    theory: RawTypeTheory,
    d: TheoryDerivation,
    witnesses: TheoryWitnesses,
    ambient: Arity | None = None,
) -> TheoryDerivation:
    """Canonical form of a term- or type-judgement derivation.

    Term judgements end with exactly one conversion whose left branch ends in
    the variable or symbol rule at the natural type; type judgements end with
    the symbol rule.  Requires an acceptable theory (witnesses supplied).
    """
    kind = theory.kind
    d = eliminate_substitution(theory, d, ambient)

    def go(node):
        match node:
            case Structural(instance=VariableInst(context=ctx, pos=i), children=children):
                a = ctx.type_at(i)
                refl = derive.refl_ty(ctx, a, children[0])
                return derive.conv(ctx, a, a, Var(i, ctx.scope), children[0], children[0], node, refl)
            case Specific(rule=r, inst=inst, context=ctx):
                conclusion = theory.rule(r).conclusion
                if conclusion.form is JudgementForm.IS_TY:
                    return node
                if conclusion.form is not JudgementForm.IS_TM:
                    raise NotObjectRule("inversion applies to object judgements")
                natty = instantiate_expr(kind, inst, conclusion.boundary[0])
                head = instantiate_expr(kind, inst, conclusion.head)
                d_natty = derive_presuppositions(theory, node, witnesses, ambient)[0]
                refl = derive.refl_ty(ctx, natty, d_natty)
                return derive.conv(ctx, natty, natty, head, d_natty, d_natty, node, refl)
            case Structural(instance=ConvInst(which=0, inst=inst, context=ctx), children=children):
                c_bp, c_b, c_t, c_eq = children
                b_prime, b, term = inst.exprs
                rec = go(c_t)
                r_natty, _, r_term = rec.instance.inst.exprs
                r_dn, r_dbp, r_dt, r_deq = rec.children
                merged = derive.trans_ty(
                    ctx, r_natty, b_prime, b, r_dn, c_bp, c_b, r_deq, c_eq
                )
                return derive.conv(ctx, r_natty, b, term, r_dn, c_b, r_dt, merged)
            case Hyp():
                raise MissingWitness("cannot invert a hypothesis")
        raise NotObjectRule(f"inversion does not apply at {node!r}")

    return go(d)


def is_canonical_inversion(theory: RawTypeTheory, d: TheoryDerivation) -> bool:
    """Shape test: one top conversion over a variable/symbol node at the
    natural type (term case), or a symbol-rule root (type case)."""
    match d:
        case Specific(rule=r):
            return theory.rule(r).conclusion.form is JudgementForm.IS_TY
        case Structural(instance=ConvInst(which=0, inst=inst, context=ctx), children=children):
            left = children[2]
            if not isinstance(left, (Structural, Specific)):
                return False
            if isinstance(left, Structural) and not isinstance(left.instance, VariableInst):
                return False
            term = inst.exprs[2]
            try:
                natty = natural_type(theory, ctx, term)
            except KernelError:
                return False
            return inst.exprs[0] == natty
    return False


# --- well-founded theories ------------------------------------------------------

def judgement_symbols(j: Judgement) -> frozenset[int]:
    out = frozenset()
    for t in j.context.types:
        out |= expr_symbols(t)
    for e in j.boundary:
        out |= expr_symbols(e)
    if j.head is not None:
        out |= expr_symbols(j.head)
    return out


def rule_symbols(rule: RawRule) -> frozenset[int]:
    """Symbols a rule depends on; the defining head of an object rule is the
    symbol being introduced, so only its arguments count there."""
    out = frozenset()
    for p in rule.premises:
        out |= judgement_symbols(p)
    c = rule.conclusion
    for t in c.context.types:
        out |= expr_symbols(t)
    for e in c.boundary:
        out |= expr_symbols(e)
    if c.head is not None:
        if rule.is_object and isinstance(c.head, SymApp):
            for a in c.head.args:
                out |= expr_symbols(a)
        else:
            out |= expr_symbols(c.head)
    return out


def derivation_provenance(d: TheoryDerivation) -> tuple[frozenset[int], frozenset[int]]:
    """(symbols, specific rule indices) a derivation's nodes mention."""
    syms: frozenset[int] = frozenset()
    rules: frozenset[int] = frozenset()

    def ctx_syms(ctx: RawContext):
        nonlocal syms
        for t in ctx.types:
            syms |= expr_symbols(t)

    for node in derivation_nodes(d):
        match node:
            case Specific(rule=r, inst=inst, context=ctx):
                rules |= {r}
                ctx_syms(ctx)
                for e in inst.exprs:
                    syms |= expr_symbols(e)
            case Structural(instance=data):
                match data:
                    case VariableInst(context=ctx):
                        ctx_syms(ctx)
                    case EquivInst(inst=inst, context=ctx) | ConvInst(inst=inst, context=ctx):
                        ctx_syms(ctx)
                        for e in inst.exprs:
                            syms |= expr_symbols(e)
                    case SubstInst(subst=f, context=ctx, judgement=j):
                        ctx_syms(ctx)
                        for e in f.table:
                            syms |= expr_symbols(e)
                        syms |= judgement_symbols(j)
                    case EqSubstInst(left=f, right=g, context=ctx, judgement=j):
                        ctx_syms(ctx)
                        for e in f.table + g.table:
                            syms |= expr_symbols(e)
                        syms |= judgement_symbols(j)
            case Hyp():
                pass
    return syms, rules


@dataclass
class WellFoundedReport:
    ok: bool
    required_edges: frozenset[tuple[int, int]]
    diagnostics: list[str]


def required_precedence(
    theory: RawTypeTheory,
    beta: dict[int, int],
    witnesses: TheoryWitnesses | None = None,
) -> tuple[frozenset[tuple[int, int]], list[str]]:
    """Edges (i, j): rule i must precede rule j, from symbol occurrences and
    witness provenance."""
    edges: set[tuple[int, int]] = set()
    diagnostics: list[str] = []
    for j, rule in enumerate(theory.rules):
        for s in rule_symbols(rule):
            edges.add((beta[s], j))
        w = (witnesses or {}).get(theory.rule_name(j))
        if w is None:
            continue
        for dv in list(w.conclusion.values()) + list(w.premises.values()):
            syms, cited = derivation_provenance(dv)
            for s in syms:
                edges.add((beta[s], j))
            for r in cited:
                edges.add((r, j))
    for i, j in sorted(edges):
        if i == j:
            diagnostics.append(
                f"rule {theory.rule_name(j)} depends on itself"
            )
    return frozenset(edges), diagnostics


def check_well_founded_theory(
    theory: RawTypeTheory,
    order: FinitePoset | None = None,
    witnesses: TheoryWitnesses | None = None,
    beta: dict[int, int] | None = None,
) -> WellFoundedReport:
    """Acyclicity of the dependency constraints, and conformance of a supplied order.

    The constraints: every symbol occurring in a rule must be introduced by an
    earlier rule, and every witness may cite only earlier symbols and rules.
    """
    diagnostics: list[str] = []
    if beta is None:
        try:
            beta = theory_tightness(theory)
        except NotTight as e:
            return WellFoundedReport(False, frozenset(), [str(e)])
    edges, diag = required_precedence(theory, beta, witnesses)
    diagnostics.extend(diag)
    n = len(theory.rules)
    constraint = FinitePoset.of(n, {(i, j) for i, j in edges if i != j})
    if not check_well_founded(constraint):
        cycle = _find_cycle(n, constraint.edges)
        names = " < ".join(theory.rule_name(i) for i in cycle)
        diagnostics.append(f"dependency cycle: {names}")
    if order is not None:
        closure = order.transitive_closure()
        for i, j in sorted(edges):
            if i == j or (i, j) not in closure:
                diagnostics.append(
                    f"order does not place {theory.rule_name(i)} before {theory.rule_name(j)}"
                )
        if not check_well_founded(order):
            diagnostics.append("supplied order is cyclic")
    ok = not diagnostics
    return WellFoundedReport(ok, edges, diagnostics)


def _find_cycle(n: int, edges: frozenset[tuple[int, int]]) -> list[int]:
    adj: dict[int, list[int]] = {i: [] for i in range(n)}
    for i, j in edges:
        adj[i].append(j)
    state = {i: 0 for i in range(n)}
    stack: list[int] = []

    def dfs(v):
        state[v] = 1
        stack.append(v)
        for w in adj[v]:
            if state[w] == 1:
                return stack[stack.index(w):]
            if state[w] == 0:
                found = dfs(w)
                if found:
                    return found
        stack.pop()
        state[v] = 2
        return None

    for v in range(n):
        if state[v] == 0:
            found = dfs(v)
            if found:
                return found
    return []
