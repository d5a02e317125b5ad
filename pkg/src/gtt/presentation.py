"""Sequential contexts, well-founded premise families, and well-presented theories.

A well-presented theory is specified in three stages: shapes (an index
poset plus forms and scopes), raw boundaries over the signature of the
strictly-earlier stage, and well-formedness witnesses over the flattened
earlier theory.  Elaboration realises every rule-boundary, adds the
congruence rules of object rules, and re-checks everything.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    ArityMismatch,
    ScopeMismatch,
    StageViolation,
    SymbolArityMismatch,
    SymbolForbidden,
    SymbolRequired,
    WitnessFailure,
)
from .foundations import FinitePoset, check_well_founded, topological_respects
from .judgements import (
    Boundary,
    EMPTY_CONTEXT,
    Judgement,
    JudgementForm,
    RawContext,
    boundary_presuppositions,
    complete_boundary,
    is_type,
)
from .metatheory import (
    AcceptabilityReport,
    RuleWitnesses,
    TheoryWitnesses,
    check_acceptable_theory,
)
from .rules import RawRule, congruence_rule, generic_application
from .scopes import Renaming, ScopeKind, inl_renaming
from .syntax import (
    Argument,
    Arity,
    Expr,
    MetaApp,
    Signature,
    Symbol,
    SymApp,
    TM,
    TY,
    Var,
    mv_extend_signature,
    rename_expr,
    validate_expr,
)
from .theories import (
    Hyp,
    RawTypeTheory,
    Specific,
    Structural,
    TheoryDerivation,
    check_theory_derivation,
)


# --- sequential contexts --------------------------------------------------------

SequentialContext = tuple  # of Expr; the i-th entry lives in scope i


def subscope_inclusion(kind: ScopeKind, i: int, n: int) -> Renaming:
    """The evident inclusion of the first i positions into scope n."""
    if i > n:
        raise ScopeMismatch(f"no inclusion of scope {i} into {n}")
    r = Renaming.identity(i)
    # iterate i -> i+1 -> ... -> n through left inclusions of singleton sums
    table = list(range(i))
    for m in range(i, n):
        table = [kind.inl(m, 1, p) for p in table]
    return Renaming(i, n, tuple(table))


def flatten_sequential_context(kind: ScopeKind, seq: SequentialContext) -> RawContext:
    """Weaken each entry along the subscope inclusion into the full scope."""
    n = len(seq)
    types: list[Expr] = [None] * n  # type: ignore[list-item]
    for i, entry in enumerate(seq):
        if entry.scope != i:
            raise ScopeMismatch(f"entry {i} has scope {entry.scope}, expected {i}")
        incl = subscope_inclusion(kind, i, n)
        pos = _declared_position(kind, i, n)
        types[pos] = rename_expr(kind, incl, entry)
    return RawContext(n, tuple(types))


def _declared_position(kind: ScopeKind, i: int, n: int) -> int:
    """The position of the i-th declared variable in the flat scope n."""
    p = kind.inr(i, 1, 0)
    for m in range(i + 1, n):
        p = kind.inl(m, 1, p)
    return p


def is_sequential_flat_context(kind: ScopeKind, ctx: RawContext) -> SequentialContext | None:
    """Invert flattening: each type must be in the image of its subscope inclusion."""
    n = ctx.scope
    out = []
    for i in range(n):
        incl = subscope_inclusion(kind, i, n)
        entry = _unrename(kind, incl, ctx.type_at(_declared_position(kind, i, n)))
        if entry is None:
            return None
        out.append(entry)
    return tuple(out)


def _unrename(kind: ScopeKind, r: Renaming, e: Expr) -> Expr | None:
    """Invert a (necessarily injective for this use) renaming on an expression."""
    inverse = {}
    for i in range(r.src):
        if r(i) in inverse:
            return None
        inverse[r(i)] = i

    def go(node: Expr, extra: int) -> Expr | None:
        match node:
            case Var(pos=p, scope=s):
                side, q = kind.unsum(r.dst, extra, p) if extra else ("left", p)
                if side == "right":
                    return Var(kind.inr(r.src, extra, q), s - r.dst + r.src)
                if q not in inverse:
                    return None
                return Var(kind.inl(r.src, extra, inverse[q]) if extra else inverse[q], s - r.dst + r.src)
            case SymApp(sym=sym, args=args, scope=s, cls=c):
                new = []
                for a in args:
                    na = go(a, extra + (a.scope - s))
                    if na is None:
                        return None
                    new.append(na)
                return SymApp(sym, tuple(new), s - r.dst + r.src, c)
            case MetaApp(idx=m, args=args, scope=s, cls=c):
                new = []
                for a in args:
                    na = go(a, extra)
                    if na is None:
                        return None
                    new.append(na)
                return MetaApp(m, tuple(new), s - r.dst + r.src, c)
        raise TypeError(node)

    return go(e, 0)


def sequential_by_occurrence(kind: ScopeKind, ctx: RawContext) -> bool:
    """Definition by variable occurrence: each type mentions only earlier variables."""
    n = ctx.scope
    for i in range(n):
        allowed = {_declared_position(kind, j, n) for j in range(i)}
        pos = _declared_position(kind, i, n)
        if not _occurring_outer(kind, ctx.type_at(pos), n) <= allowed:
            return False
    return True


def _occurring_outer(kind: ScopeKind, e: Expr, outer: int) -> set[int]:
    """Positions of the outer scope that occur free in e (under binders)."""
    match e:
        case Var(pos=p, scope=s):
            extra = s - outer
            if extra:
                side, q = kind.unsum(outer, extra, p)
                return {q} if side == "left" else set()
            return {p}
        case SymApp(args=args) | MetaApp(args=args):
            out: set[int] = set()
            for a in args:
                out |= _occurring_outer(kind, a, outer)
            return out
    raise TypeError(e)


def sequential_by_peeling(kind: ScopeKind, ctx: RawContext) -> bool:
    """Definition by the context-formation rules: peel one extension at a time."""
    n = ctx.scope
    if n == 0:
        return True
    newest = _declared_position(kind, n - 1, n)
    incl = inl_renaming(kind, n - 1, 1)
    peeled_types = []
    for i in range(n - 1):
        pos_old = _declared_position(kind, i, n - 1)
        pos_new = _declared_position(kind, i, n)
        entry = _unrename(kind, incl, ctx.type_at(pos_new))
        if entry is None:
            return False
        peeled_types.append((pos_old, entry))
    if _unrename(kind, incl, ctx.type_at(newest)) is None:
        return False
    types: list[Expr] = [None] * (n - 1)  # type: ignore[list-item]
    for pos_old, entry in peeled_types:
        types[pos_old] = entry
    return sequential_by_peeling(kind, RawContext(n - 1, tuple(types)))


def check_wf_context(
    theory: RawTypeTheory,
    seq: SequentialContext,
    witnesses: tuple[TheoryDerivation, ...],
    hyps: tuple[Judgement, ...] = (),
    ambient: Arity | None = None,
    ambient_names: tuple[str, ...] = (),
) -> bool:
    """Each witness must derive that the i-th entry is a type over the initial segment."""
    if len(witnesses) != len(seq):
        return False
    kind = theory.kind
    for i, entry in enumerate(seq):
        target = is_type(flatten_sequential_context(kind, seq[:i]), entry)
        try:
            got = check_theory_derivation(theory, hyps, witnesses[i], ambient, ambient_names)
        except Exception:
            return False
        if got != target:
            return False
    return True


# --- premises shapes and well-founded premise families ---------------------------

@dataclass(frozen=True)
class PremisesShape:
    """An index poset plus the form and binder scope of each premise."""

    order: FinitePoset
    slots: tuple[tuple[JudgementForm, int], ...]

    def __post_init__(self):
        if self.order.size != len(self.slots):
            raise ArityMismatch("poset size differs from the premise count")
        if not check_well_founded(self.order):
            raise StageViolation("premise order has a cycle")
        if not topological_respects(self.order):
            raise StageViolation("premise indices must respect the order (list a linear extension)")

    def object_indices(self) -> tuple[int, ...]:
        return tuple(i for i, (f, _) in enumerate(self.slots) if f.is_object)

    def arity(self) -> Arity:
        return tuple(
            Argument(TY if f is JudgementForm.IS_TY else TM, sc)
            for f, sc in (self.slots[i] for i in self.object_indices())
        )

    def arity_below(self, i: int) -> tuple[int, ...]:
        """Object premise indices strictly below i in the poset, in index order."""
        preds = self.order.predecessors(i)
        return tuple(j for j in self.object_indices() if j in preds)


@dataclass(frozen=True)
class WellFoundedPremiseFamily:
    """Premise boundaries, each over the extension by its own down-set's arity.

    ``boundaries[i]`` has the declared form and a sequential context of the
    declared scope; its metavariables index ``shape.arity_below(i)``.
    ``witnesses[i]`` derive the presuppositions of boundary i from the
    flattening of the premises strictly below i.
    """

    shape: PremisesShape
    boundaries: tuple[tuple[SequentialContext, tuple[Expr, ...]], ...]
    names: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if len(self.boundaries) != self.shape.order.size:
            raise ArityMismatch("boundary count differs from the shape")

    def premise_count(self) -> int:
        return self.shape.order.size

    def meta_names(self) -> tuple[str, ...]:
        if not self.names:
            return tuple(f"?{i}" for i in self.shape.object_indices())
        return tuple(self.names[i] for i in self.shape.object_indices())


def _reindex_map(sub: tuple[int, ...], full: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(full.index(j) for j in sub)


def _embed_boundary_exprs(
    sig: Signature,
    kind: ScopeKind,
    family: WellFoundedPremiseFamily,
    i: int,
    into_objects: tuple[int, ...],
) -> tuple[RawContext, tuple[Expr, ...]]:
    """Reindex boundary i's metavariables from its down-set arity into a larger one."""
    below = family.shape.arity_below(i)
    mapping = _reindex_map(below, into_objects)
    seq, slots = family.boundaries[i]
    ctx = flatten_sequential_context(kind, seq)

    def remap(e: Expr) -> Expr:
        match e:
            case Var():
                return e
            case SymApp(sym=s, args=args, scope=sc, cls=c):
                return SymApp(s, tuple(remap(a) for a in args), sc, c)
            case MetaApp(idx=m, args=args, scope=sc, cls=c):
                return MetaApp(mapping[m], tuple(remap(a) for a in args), sc, c)
        raise TypeError(e)

    new_ctx = RawContext(ctx.scope, tuple(remap(t) for t in ctx.types))
    return new_ctx, tuple(remap(s) for s in slots)


def flatten_premise_family(
    sig: Signature, family: WellFoundedPremiseFamily
) -> tuple[Judgement, ...]:
    """Judgements over the extension by the full arity: boundaries reindexed,
    object boundaries completed with their generic metavariable head."""
    kind = sig.kind
    objects = family.shape.object_indices()
    out = []
    for i in range(family.premise_count()):
        form, scope = family.shape.slots[i]
        ctx, slots = _embed_boundary_exprs(sig, kind, family, i, objects)
        if ctx.scope != scope:
            raise ScopeMismatch(f"premise {i}: context scope {ctx.scope}, declared {scope}")
        boundary = Boundary(ctx, form, slots)
        if form.is_object:
            arg = objects.index(i)
            head = MetaApp(
                arg,
                tuple(Var(j, scope) for j in range(scope)),
                scope,
                TY if form is JudgementForm.IS_TY else TM,
            )
            out.append(complete_boundary(boundary, head))
        else:
            out.append(complete_boundary(boundary, None))
    return tuple(out)


def flatten_premises_below(
    sig: Signature, family: WellFoundedPremiseFamily, i: int
) -> tuple[tuple[int, ...], tuple[Judgement, ...]]:
    """The flattening of the strict down-set of i, over its own arity.

    Returns the premise indices it contains (in index order) and their
    judgements over the extension by arity(shape below i).
    """
    kind = sig.kind
    preds = sorted(family.shape.order.predecessors(i))
    below_objects = family.shape.arity_below(i)
    out = []
    for j in preds:
        form, scope = family.shape.slots[j]
        ctx, slots = _embed_boundary_exprs(sig, kind, family, j, below_objects)
        boundary = Boundary(ctx, form, slots)
        if form.is_object:
            arg = below_objects.index(j)
            head = MetaApp(
                arg,
                tuple(Var(p, scope) for p in range(scope)),
                scope,
                TY if form is JudgementForm.IS_TY else TM,
            )
            out.append(complete_boundary(boundary, head))
        else:
            out.append(complete_boundary(boundary, None))
    return tuple(preds), tuple(out)


@dataclass
class PremiseWitnesses:
    """Witness derivations for the presuppositions of each premise boundary.

    ``presups[(i, p)]`` derives the p-th presupposition of boundary i from
    the flattening of the premises strictly below i; Hyp(k) cites the k-th
    member of that flattening (in premise-index order).
    """

    presups: dict[tuple[int, int], TheoryDerivation] = field(default_factory=dict)


def check_premise_family(
    theory: RawTypeTheory,
    family: WellFoundedPremiseFamily,
    witnesses: PremiseWitnesses,
    diagnostics: list[str] | None = None,
) -> bool:
    """Validate boundaries (scope, stage discipline) and their witnesses."""
    sig = theory.signature
    kind = sig.kind
    ok = True
    for i in range(family.premise_count()):
        form, scope = family.shape.slots[i]
        below = family.shape.arity_below(i)
        seq, slots = family.boundaries[i]
        sub_arity = tuple(
            Argument(
                TY if family.shape.slots[j][0] is JudgementForm.IS_TY else TM,
                family.shape.slots[j][1],
            )
            for j in below
        )
        sub_sig = mv_extend_signature(sig, sub_arity)
        try:
            ctx = flatten_sequential_context(kind, seq)
            for t in ctx.types:
                validate_expr(sub_sig, t, ctx.scope, TY)
            if ctx.scope != scope:
                raise ScopeMismatch(f"declared scope {scope}, got {ctx.scope}")
            boundary = Boundary(ctx, form, slots)
            for e, c in zip(slots, form.boundary_classes):
                validate_expr(sub_sig, e, scope, c)
        except Exception as e:
            ok = False
            if diagnostics is not None:
                diagnostics.append(f"premise {i}: {e}")
            continue
        _, hyp_family = flatten_premises_below(sig, family, i)
        for p, target in enumerate(boundary_presuppositions(boundary)):
            w = witnesses.presups.get((i, p))
            if w is None:
                ok = False
                if diagnostics is not None:
                    diagnostics.append(f"premise {i}: missing witness for presupposition {p}")
                continue
            try:
                got = check_theory_derivation(theory, hyp_family, w, sub_arity)
            except Exception as e:
                ok = False
                if diagnostics is not None:
                    diagnostics.append(f"premise {i}/presup {p}: witness fails: {e}")
                continue
            if got != target:
                ok = False
                if diagnostics is not None:
                    diagnostics.append(
                        f"premise {i}/presup {p}: witness derives {got!r}, wanted {target!r}"
                    )
    return ok


# --- rule boundaries and realisation ----------------------------------------------

@dataclass(frozen=True)
class RuleBoundarySpec:
    """A premise family plus an empty-context conclusion boundary over its arity."""

    premises: WellFoundedPremiseFamily
    conclusion_form: JudgementForm
    conclusion_slots: tuple[Expr, ...]

    def conclusion_boundary(self) -> Boundary:
        return Boundary(EMPTY_CONTEXT, self.conclusion_form, self.conclusion_slots)

    def arity(self) -> Arity:
        return self.premises.shape.arity()


@dataclass
class RuleBoundaryWitnesses:
    premises: PremiseWitnesses = field(default_factory=PremiseWitnesses)
    conclusion: dict[int, TheoryDerivation] = field(default_factory=dict)


def check_rule_boundary(
    theory: RawTypeTheory,
    spec: RuleBoundarySpec,
    witnesses: RuleBoundaryWitnesses,
    diagnostics: list[str] | None = None,
) -> bool:
    """Premise family well-formed, and conclusion presuppositions derivable
    from the flattened premises."""
    ok = check_premise_family(theory, spec.premises, witnesses.premises, diagnostics)
    sig = theory.signature
    alpha = spec.arity()
    hyps = flatten_premise_family(sig, spec.premises)
    for p, target in enumerate(boundary_presuppositions(spec.conclusion_boundary())):
        w = witnesses.conclusion.get(p)
        if w is None:
            ok = False
            if diagnostics is not None:
                diagnostics.append(f"conclusion: missing witness for presupposition {p}")
            continue
        try:
            got = check_theory_derivation(theory, hyps, w, alpha, spec.premises.meta_names())
        except Exception as e:
            ok = False
            if diagnostics is not None:
                diagnostics.append(f"conclusion/presup {p}: witness fails: {e}")
            continue
        if got != target:
            ok = False
            if diagnostics is not None:
                diagnostics.append(f"conclusion/presup {p}: derives {got!r}, wanted {target!r}")
    return ok


def realise_rule_boundary(
    sig: Signature, spec: RuleBoundarySpec, symbol: int | None = None
) -> RawRule:
    """Complete the conclusion: object boundaries take the generic application
    of the given symbol, equality boundaries stand as they are."""
    premises = flatten_premise_family(sig, spec.premises)
    boundary = spec.conclusion_boundary()
    alpha = spec.arity()
    if boundary.form.is_object:
        if symbol is None:
            raise SymbolRequired("an object rule-boundary needs a symbol to realise it")
        decl = sig.symbol(symbol)
        if decl.arity != alpha:
            raise SymbolArityMismatch(
                f"symbol {decl.name} has arity {decl.arity}, boundary wants {alpha}"
            )
        expected = TY if boundary.form is JudgementForm.IS_TY else TM
        if decl.cls is not expected:
            raise SymbolArityMismatch(f"symbol {decl.name} has the wrong class")
        conclusion = complete_boundary(boundary, generic_application(sig, symbol))
    else:
        if symbol is not None:
            raise SymbolForbidden("an equality rule-boundary takes no symbol")
        conclusion = complete_boundary(boundary, None)
    return RawRule(alpha, premises, conclusion, spec.premises.meta_names())


def is_sequential_rule(rule: RawRule) -> bool:
    """The provisional validator: tight, and each premise uses only
    metavariables introduced by strictly earlier premises."""
    from .metatheory import check_tight
    from .errors import NoBijection

    try:
        beta = check_tight(rule)
    except NoBijection:
        return False
    intro_of = {arg: premise for arg, premise in enumerate(beta.premise_of_arg)}
    for i, premise in enumerate(rule.premises):
        used: set[int] = set()
        for t in premise.context.types:
            used |= _metas_in(t)
        for e in premise.boundary:
            used |= _metas_in(e)
        if premise.head is not None and premise.is_object:
            # the generic head introduces its own metavariable; skip its root
            for a in premise.head.args:
                used |= _metas_in(a)
        elif premise.head is not None:
            used |= _metas_in(premise.head)
        if any(intro_of[m] >= i for m in used):
            return False
    return True


def _metas_in(e: Expr) -> set[int]:
    match e:
        case Var():
            return set()
        case SymApp(args=args):
            out: set[int] = set()
        case MetaApp(idx=m, args=args):
            out = {m}
        case _:
            raise TypeError(e)
    for a in args:
        out |= _metas_in(a)
    return out


# --- well-presented type theories ---------------------------------------------------

@dataclass(frozen=True)
class TheoryRuleSpec:
    name: str
    boundary: RuleBoundarySpec


@dataclass
class WellPresentedTheorySpec:
    """Rules in a well-founded order; rule i's syntax lives over the signature
    of the object-form rules strictly below it."""

    kind: ScopeKind
    order: FinitePoset
    rules: tuple[TheoryRuleSpec, ...]
    witnesses: dict[str, RuleBoundaryWitnesses] = field(default_factory=dict)

    def __post_init__(self):
        if self.order.size != len(self.rules):
            raise ArityMismatch("order size differs from rule count")
        if not check_well_founded(self.order):
            raise StageViolation("rule order has a cycle")
        if not topological_respects(self.order):
            raise StageViolation("rule indices must respect the order (list a linear extension)")


def _symbols_through(spec: WellPresentedTheorySpec, upto: int | None) -> tuple[tuple[int, Symbol], ...]:
    """(rule index, symbol) pairs for object-form rules with index < upto."""
    out = []
    limit = len(spec.rules) if upto is None else upto
    for i in range(limit):
        rs = spec.rules[i]
        form = rs.boundary.conclusion_form
        if form.is_object:
            out.append(
                (
                    i,
                    Symbol(
                        rs.name,
                        TY if form is JudgementForm.IS_TY else TM,
                        rs.boundary.arity(),
                    ),
                )
            )
    return tuple(out)


def theory_signature_of_spec(spec: WellPresentedTheorySpec) -> Signature:
    return Signature(tuple(s for _, s in _symbols_through(spec, None)), spec.kind)


def elaborate_theory(
    spec: WellPresentedTheorySpec,
) -> tuple[Signature, RawTypeTheory, AcceptabilityReport]:
    """Realise every rule-boundary in order, adding congruence rules for the
    object rules, checking stage discipline and every witness along the way.

    The elaborated rule list interleaves each object rule with its congruence
    rule, so each initial segment of the spec flattens to a prefix.
    """
    full_sig = theory_signature_of_spec(spec)
    kind = spec.kind
    rules: list[RawRule] = []
    names: list[str] = []
    witness_table: TheoryWitnesses = {}
    symbol_of_rule = {i: s for i, (j, s) in [(j, (j, s)) for j, s in _symbols_through(spec, None)]}
    sym_index = {spec.rules[i].name: k for k, (i, _) in enumerate(_symbols_through(spec, None))}

    for i, rs in enumerate(spec.rules):
        allowed = {sym_index[spec.rules[j].name] for j in spec.order.predecessors(i)
                   if spec.rules[j].boundary.conclusion_form.is_object}
        stage_theory = RawTypeTheory(full_sig, tuple(rules), tuple(names))
        diagnostics: list[str] = []
        w = spec.witnesses.get(rs.name, RuleBoundaryWitnesses())
        _check_stage_symbols(full_sig, rs, allowed)
        if not check_rule_boundary(stage_theory, rs.boundary, w, diagnostics):
            raise WitnessFailure(f"rule {rs.name}: " + "; ".join(diagnostics))
        symbol = sym_index.get(rs.name) if rs.boundary.conclusion_form.is_object else None
        rule = realise_rule_boundary(full_sig, rs.boundary, symbol)
        rules.append(rule)
        names.append(rs.name)
        witness_table[rs.name] = _boundary_to_rule_witnesses(rule, rs.boundary, w)
        if rule.is_object:
            rules.append(congruence_rule(full_sig, rule))
            names.append(f"{rs.name}-cong")
            from .congruence_witnesses import congruence_witnesses

            witness_table[f"{rs.name}-cong"] = congruence_witnesses(
                RawTypeTheory(full_sig, tuple(rules), tuple(names)),
                len(rules) - 2,
                witness_table[rs.name],
            )
    theory = RawTypeTheory(full_sig, tuple(rules), tuple(names))
    report = check_acceptable_theory(theory, witness_table)
    return full_sig, theory, report


def _check_stage_symbols(sig: Signature, rs: TheoryRuleSpec, allowed: set[int]) -> None:
    used: set[int] = set()
    from .syntax import expr_symbols

    for seq, slots in rs.boundary.premises.boundaries:
        for t in seq:
            used |= expr_symbols(t)
        for e in slots:
            used |= expr_symbols(e)
    for e in rs.boundary.conclusion_slots:
        used |= expr_symbols(e)
    bad = used - allowed
    if bad:
        names = ", ".join(sig.symbol(s).name for s in sorted(bad))
        raise StageViolation(f"rule {rs.name} uses later symbols: {names}")


def _boundary_to_rule_witnesses(
    rule: RawRule, spec: RuleBoundarySpec, w: RuleBoundaryWitnesses
) -> RuleWitnesses:
    """Reindex boundary witnesses as rule witnesses.

    A premise witness at stage i cites the flattening of the premises below i
    by their index order; as a rule witness it must cite absolute premise
    positions, so hypothesis leaves are renumbered.
    """
    out = RuleWitnesses()
    fam = spec.premises
    for (i, p), d in w.premises.presups.items():
        preds = sorted(fam.shape.order.predecessors(i))
        table = {k: preds[k] for k in range(len(preds))}
        out.premises[(i, p)] = _renumber_hyps(d, table)
    for p, d in w.conclusion.items():
        out.conclusion[p] = d
    return out


def _renumber_hyps(d: TheoryDerivation, table: dict[int, int]) -> TheoryDerivation:
    match d:
        case Hyp(index=k):
            return Hyp(table[k])
        case Structural(instance=data, children=children):
            return Structural(data, tuple(_renumber_hyps(c, table) for c in children))
        case Specific(rule=r, inst=i, context=g, children=children):
            return Specific(r, i, g, tuple(_renumber_hyps(c, table) for c in children))
    raise TypeError(d)


def check_well_presented(spec: WellPresentedTheorySpec) -> tuple[bool, list[str]]:
    """Convenience wrapper: elaborate and report."""
    try:
        _, theory, report = elaborate_theory(spec)
    except (StageViolation, WitnessFailure) as e:
        return False, [str(e)]
    return report.acceptable, report.diagnostics
