"""Raw syntax maps, raw theory maps, realisers, and the well-founded replacement.

A raw syntax map interprets each symbol as a compound expression over the
target signature; a raw theory map additionally sends each specific rule
to a derivation of its translation.  The replacement builder adjoins, one
witnessed step at a time, symbols naming realisers of rule-boundaries and
equations reflected from the target theory; the section construction
drives the builder from an acceptable theory's own rules.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    ArityMismatch,
    ClassMismatch,
    KernelError,
    MissingWitness,
    NotAcceptable,
    ScopeMismatch,
    WitnessFailure,
)
from .judgements import (
    Boundary,
    EMPTY_CONTEXT,
    Judgement,
    JudgementForm,
    RawContext,
    complete_boundary,
)
from .metatheory import TheoryWitnesses, graft_theory, theory_tightness
from .presentation import (
    PremisesShape,
    RuleBoundarySpec,
    WellFoundedPremiseFamily,
    flatten_premise_family,
    realise_rule_boundary,
)
from .rules import RawRule, congruence_rule, generic_application
from .foundations import FinitePoset
from .scopes import ScopeKind
from .syntax import (
    Expr,
    Instantiation,
    MetaApp,
    Signature,
    Substitution,
    SymApp,
    Symbol,
    TM,
    TY,
    Var,
    instantiate_expr,
    mv_extend_signature,
    simple_arity,
    validate_expr,
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
)


@dataclass(frozen=True)
class RawSyntaxMap:
    """For each symbol of the source, a closed expression over the target
    extended by the symbol's arguments."""

    src: Signature
    dst: Signature
    exprs: tuple[Expr, ...]

    def __post_init__(self):
        if len(self.exprs) != self.src.base_count:
            raise ArityMismatch("one interpretation per source symbol required")
        for i, e in enumerate(self.exprs):
            decl = self.src.symbol(i)
            ext = mv_extend_signature(self.dst, decl.arity)
            if e.cls is not decl.cls:
                raise ClassMismatch(f"interpretation of {decl.name} has the wrong class")
            validate_expr(ext, e, 0, decl.cls)

    def __call__(self, sym: int) -> Expr:
        return self.exprs[sym]


def identity_syntax_map(sig: Signature) -> RawSyntaxMap:
    return RawSyntaxMap(
        sig, sig, tuple(generic_application(sig, s) for s in range(sig.base_count))
    )


def apply_syntax_map(m: RawSyntaxMap, e: Expr) -> Expr:
    """Variables stay, symbols unfold to their interpretations, metavariables
    of an ambient extension are fixed."""
    kind = m.dst.kind
    match e:
        case Var():
            return e
        case SymApp(sym=s, args=args, scope=scope):
            decl = m.src.symbol(s)
            inst = Instantiation(
                decl.arity, scope, tuple(apply_syntax_map(m, a) for a in args)
            )
            return instantiate_expr(kind, inst, m(s))
        case MetaApp(idx=i, args=args, scope=scope, cls=cls):
            return MetaApp(i, tuple(apply_syntax_map(m, a) for a in args), scope, cls)
    raise TypeError(e)


def compose_syntax_maps(g: RawSyntaxMap, f: RawSyntaxMap) -> RawSyntaxMap:
    """g after f: each symbol's interpretation is pushed through g."""
    if f.dst != g.src:
        raise ArityMismatch("syntax maps do not chain")
    return RawSyntaxMap(f.src, g.dst, tuple(apply_syntax_map(g, e) for e in f.exprs))


def map_context(m: RawSyntaxMap, ctx: RawContext) -> RawContext:
    return RawContext(ctx.scope, tuple(apply_syntax_map(m, t) for t in ctx.types))


def map_judgement(m: RawSyntaxMap, j: Judgement) -> Judgement:
    return Judgement(
        map_context(m, j.context),
        j.form,
        tuple(apply_syntax_map(m, e) for e in j.boundary),
        None if j.head is None else apply_syntax_map(m, j.head),
    )


def map_boundary(m: RawSyntaxMap, b: Boundary) -> Boundary:
    return Boundary(
        map_context(m, b.context), b.form, tuple(apply_syntax_map(m, e) for e in b.boundary)
    )


def map_rule(m: RawSyntaxMap, rule: RawRule) -> RawRule:
    """The metavariable extension of the map acts on a rule's judgements."""
    return RawRule(
        rule.arity,
        tuple(map_judgement(m, p) for p in rule.premises),
        map_judgement(m, rule.conclusion),
        rule.meta_names,
    )


def map_substitution(m: RawSyntaxMap, f: Substitution) -> Substitution:
    return Substitution(f.src, f.dst, tuple(apply_syntax_map(m, e) for e in f.table))


def map_instantiation(m: RawSyntaxMap, inst: Instantiation) -> Instantiation:
    return Instantiation(
        inst.arity, inst.scope, tuple(apply_syntax_map(m, e) for e in inst.exprs)
    )


@dataclass(frozen=True)
class RawTheoryMap:
    """A syntax map together with derivations of the translated rules.

    ``rule_derivations[i]`` derives the translation of rule i of the source
    theory over the target, from its translated premises; entries may be
    missing, in which case only derivations avoiding those rules can be
    pushed forward.
    """

    syntax: RawSyntaxMap
    src: RawTypeTheory
    dst: RawTypeTheory
    rule_derivations: dict[int, TheoryDerivation] = field(default_factory=dict)

    def check(self, diagnostics: list[str] | None = None) -> bool:
        ok = True
        for i, d in sorted(self.rule_derivations.items()):
            rule = map_rule(self.syntax, self.src.rule(i))
            from .theories import check_derived_rule

            if not check_derived_rule(self.dst, rule, d):
                ok = False
                if diagnostics is not None:
                    diagnostics.append(f"rule {self.src.rule_name(i)}: stored derivation fails")
        return ok


def identity_theory_map(theory: RawTypeTheory) -> RawTheoryMap:
    m = identity_syntax_map(theory.signature)
    derivations = {}
    for i, rule in enumerate(theory.rules):
        exprs = tuple(
            MetaApp(k, tuple(Var(j, a.binder) for j in range(a.binder)), a.binder, a.cls)
            for k, a in enumerate(rule.arity)
        )
        derivations[i] = Specific(
            i, Instantiation(rule.arity, 0, exprs), EMPTY_CONTEXT,
            tuple(Hyp(k) for k in range(len(rule.premises))),
        )
    return RawTheoryMap(m, theory, theory, derivations)


def apply_theory_map_derivation(f: RawTheoryMap, d: TheoryDerivation) -> TheoryDerivation:
    """Push a derivation along a theory map: structural nodes map to the same
    kind, specific nodes to the stored derived rule with mapped children
    grafted at its hypotheses."""
    m = f.syntax

    def go(node):
        match node:
            case Hyp():
                return node
            case Structural(instance=data, children=children):
                new_children = tuple(go(c) for c in children)
                match data:
                    case VariableInst(context=ctx, pos=i):
                        new = VariableInst(map_context(m, ctx), i)
                    case EquivInst(which=w, inst=inst, context=ctx):
                        new = EquivInst(w, map_instantiation(m, inst), map_context(m, ctx))
                    case ConvInst(which=w, inst=inst, context=ctx):
                        new = ConvInst(w, map_instantiation(m, inst), map_context(m, ctx))
                    case SubstInst(subst=s, context=ctx, trivial=K, judgement=j):
                        new = SubstInst(
                            map_substitution(m, s), map_context(m, ctx), K, map_judgement(m, j)
                        )
                    case EqSubstInst(left=l, right=r, context=ctx, trivial=K, judgement=j):
                        new = EqSubstInst(
                            map_substitution(m, l), map_substitution(m, r),
                            map_context(m, ctx), K, map_judgement(m, j),
                        )
                    case _:
                        raise TypeError(data)
                return Structural(new, new_children)
            case Specific(rule=r, inst=inst, context=ctx, children=children):
                if r not in f.rule_derivations:
                    raise MissingWitness(
                        f"theory map has no derivation for rule {f.src.rule_name(r)}"
                    )
                stored = f.rule_derivations[r]
                from .theories import instantiate_derivation

                lowered = instantiate_derivation(
                    f.dst, map_instantiation(m, inst), map_context(m, ctx), stored
                )
                return graft_theory(lowered, tuple(go(c) for c in children))
        raise TypeError(node)

    return go(d)


# --- realisers and conservativity ----------------------------------------------

def check_realiser(
    theory: RawTypeTheory,
    spec: RuleBoundarySpec,
    e: Expr,
    witness: TheoryDerivation,
) -> bool:
    """e realises an object rule-boundary when the boundary completed with e
    is derivable from the flattened premises."""
    boundary = spec.conclusion_boundary()
    if not boundary.form.is_object:
        return False
    alpha = spec.arity()
    ext = mv_extend_signature(theory.signature, alpha)
    try:
        validate_expr(ext, e, 0, boundary.form.head_class)
    except KernelError:
        return False
    hyps = flatten_premise_family(theory.signature, spec.premises)
    target = complete_boundary(boundary, e)
    try:
        got = check_theory_derivation(theory, hyps, witness, alpha, spec.premises.meta_names())
    except KernelError:
        return False
    return got == target


@dataclass
class ConservativityWitness:
    """One checked instance of each reflection property of a conservative map."""

    equation: tuple[RawRule, TheoryDerivation, TheoryDerivation] | None = None
    realiser: tuple[RuleBoundarySpec, Expr, TheoryDerivation, Expr, TheoryDerivation] | None = None


def check_conservativity_witness(f: RawTheoryMap, w: ConservativityWitness) -> bool:
    """Validate the reflection data: the image facts hold in the target and
    the reflected facts hold in the source."""
    from .theories import check_derived_rule

    ok = True
    if w.equation is not None:
        rule, d_image, d_source = w.equation
        ok &= check_derived_rule(f.dst, map_rule(f.syntax, rule), d_image)
        ok &= check_derived_rule(f.src, rule, d_source)
    if w.realiser is not None:
        spec, e_image, d_image, e_source, d_source = w.realiser
        image_spec = map_rule_boundary(f.syntax, spec)
        ok &= check_realiser(f.dst, image_spec, e_image, d_image)
        ok &= check_realiser(f.src, spec, e_source, d_source)
    return ok


def map_rule_boundary(m: RawSyntaxMap, spec: RuleBoundarySpec) -> RuleBoundarySpec:
    fam = spec.premises
    new_boundaries = tuple(
        (
            tuple(apply_syntax_map(m, t) for t in seq),
            tuple(apply_syntax_map(m, s) for s in slots),
        )
        for seq, slots in fam.boundaries
    )
    return RuleBoundarySpec(
        WellFoundedPremiseFamily(fam.shape, new_boundaries, fam.names),
        spec.conclusion_form,
        tuple(apply_syntax_map(m, s) for s in spec.conclusion_slots),
    )


# --- promotion and demotion -------------------------------------------------------

def promote(kind: ScopeKind, e: Expr, gamma: int) -> Expr:
    """Replace the gamma-scope variables of e by metavariables; variables
    bound inside e stay put, so the result is closed over the extension by
    the simple arity of gamma."""

    def go(node: Expr, extra: int) -> Expr:
        match node:
            case Var(pos=p, scope=s):
                if extra:
                    side, q = kind.unsum(gamma, extra, p)
                    if side == "right":
                        return Var(q, s - gamma)
                    return MetaApp(q, (), s - gamma, TM)
                return MetaApp(p, (), 0, TM)
            case SymApp(sym=sym, args=args, scope=s, cls=c):
                return SymApp(
                    sym,
                    tuple(go(a, extra + (a.scope - s)) for a in args),
                    s - gamma,
                    c,
                )
            case MetaApp():
                raise MissingWitness("promotion applies to metavariable-free expressions")
        raise TypeError(node)

    if e.scope < gamma:
        raise ScopeMismatch(f"expression in scope {e.scope} cannot promote {gamma} variables")
    return go(e, e.scope - gamma)


def demote(kind: ScopeKind, gamma: int) -> Instantiation:
    """The instantiation taking the promoted metavariables back to variables."""
    return Instantiation(
        simple_arity(gamma), gamma, tuple(Var(i, gamma) for i in range(gamma))
    )


# --- the witness-driven well-founded replacement -------------------------------------

@dataclass(frozen=True)
class SymbolStep:
    name: str
    boundary: RuleBoundarySpec        # over the builder theory so far
    realiser: Expr                    # over the target, realising the image boundary
    witness: TheoryDerivation         # the realisation derivation in the target


@dataclass(frozen=True)
class EquationStep:
    name: str
    rule: RawRule                     # an equality rule over the builder theory so far
    witness: TheoryDerivation         # derivation of its image in the target


class ReplacementBuilder:
    """Grows a well-founded theory mapping onto a fixed target.

    Each object step adjoins a fresh symbol naming a realiser, its symbol
    rule and congruence rule, and extends the syntax map by the realiser;
    each equation step adjoins one reflected equality rule.  Every step is
    validated against the current image before it is committed.
    """

    def __init__(self, target: RawTypeTheory):
        self.target = target
        self.signature = Signature((), target.kind)
        self.rules: tuple[RawRule, ...] = ()
        self.rule_names: tuple[str, ...] = ()
        self.exprs: tuple[Expr, ...] = ()
        self.steps: list[SymbolStep | EquationStep] = []
        self._symbol_keys: dict = {}

    def theory(self) -> RawTypeTheory:
        return RawTypeTheory(self.signature, self.rules, self.rule_names)

    def syntax_map(self) -> RawSyntaxMap:
        return RawSyntaxMap(self.signature, self.target.signature, self.exprs)

    def _image_boundary(self, spec: RuleBoundarySpec) -> RuleBoundarySpec:
        return map_rule_boundary(self.syntax_map(), spec)

    def add_symbol(self, step: SymbolStep) -> int:
        """Validate and commit an object step; returns the new symbol index."""
        image = self._image_boundary(step.boundary)
        if not check_realiser(self.target, image, step.realiser, step.witness):
            raise WitnessFailure(f"step {step.name}: realiser witness fails in the target")
        boundary = step.boundary.conclusion_boundary()
        cls = TY if boundary.form is JudgementForm.IS_TY else TM
        symbol = Symbol(step.name, cls, step.boundary.arity())
        self.signature = Signature(
            self.signature.symbols + (symbol,), self.signature.kind
        )
        sym_index = self.signature.base_count - 1
        rule = realise_rule_boundary(self.signature, step.boundary, sym_index)
        self.rules = self.rules + (rule, congruence_rule(self.signature, rule))
        self.rule_names = self.rule_names + (step.name, f"{step.name}-cong")
        self.exprs = self.exprs + (step.realiser,)
        self.steps.append(step)
        return sym_index

    def add_equation(self, step: EquationStep) -> int:
        """Validate and commit an equation step; returns the new rule index."""
        if step.rule.is_object:
            raise WitnessFailure("equation steps take equality rules")
        image = map_rule(self.syntax_map(), step.rule)
        from .theories import check_derived_rule

        if not check_derived_rule(self.target, image, step.witness):
            raise WitnessFailure(f"step {step.name}: equation witness fails in the target")
        self.rules = self.rules + (step.rule,)
        self.rule_names = self.rule_names + (step.name,)
        self.steps.append(step)
        return len(self.rules) - 1

    def theory_map(self) -> RawTheoryMap:
        """The factor map from the builder theory to the target.

        Symbol rules carry their realiser witnesses; equation rules their
        step witnesses.  Congruence rules of adjoined symbols are derivable
        in any congruous target; their derivations are not synthesised here.
        """
        derivations: dict[int, TheoryDerivation] = {}
        i = 0
        for step in self.steps:
            if isinstance(step, SymbolStep):
                derivations[i] = step.witness
                i += 2  # skip the congruence rule
            else:
                derivations[i] = step.witness
                i += 1
        return RawTheoryMap(self.syntax_map(), self.theory(), self.target, derivations)

    def check_well_founded(self) -> bool:
        """Each rule mentions only symbols adjoined strictly before it."""
        from .metatheory import rule_symbols

        seen: set[int] = set()
        next_symbol = 0
        for name, rule in zip(self.rule_names, self.rules):
            if rule.is_object and not name.endswith("-cong"):
                # the rule introducing symbol `next_symbol`
                if any(s >= next_symbol for s in rule_symbols(rule)):
                    return False
                seen.add(next_symbol)
                next_symbol += 1
            else:
                if any(s >= next_symbol for s in rule_symbols(rule)):
                    return False
        return True


def sequential_boundary_spec(
    kind: ScopeKind,
    premises: tuple[tuple[tuple[Expr, ...], JudgementForm, tuple[Expr, ...]], ...],
    conclusion_form: JudgementForm,
    conclusion_slots: tuple[Expr, ...],
    names: tuple[str, ...] = (),
) -> RuleBoundarySpec:
    """A rule-boundary with totally ordered premises.

    Each premise is (sequential context entries, form, boundary slots) over
    the extension by the arities of the strictly earlier object premises.
    """
    n = len(premises)
    order = FinitePoset.of(n, [(i, j) for i in range(n) for j in range(i + 1, n)])
    shape = PremisesShape(
        order,
        tuple((form, len(seq)) for seq, form, _ in premises),
    )
    fam = WellFoundedPremiseFamily(
        shape,
        tuple((seq, slots) for seq, _, slots in premises),
        names or tuple(f"?{i}" for i in range(n)),
    )
    return RuleBoundarySpec(fam, conclusion_form, conclusion_slots)


# --- the section of the replacement ------------------------------------------------

def sequential_premise_names(rule: RawRule) -> tuple[str, ...]:
    """Per-premise labels: object premises carry their metavariable's name."""
    from .metatheory import check_tight

    names = rule.meta_names or tuple(f"?{i}" for i in range(len(rule.arity)))
    tight = check_tight(rule)
    label = {}
    for arg, premise in enumerate(tight.premise_of_arg):
        label[premise] = names[arg]
    return tuple(label.get(k, f"p{k}") for k in range(len(rule.premises)))


def section_s(
    theory: RawTypeTheory, witnesses: TheoryWitnesses
) -> tuple[ReplacementBuilder, RawTheoryMap]:
    """The section of the replacement's factor map, for an acceptable theory.

    Materialises exactly the c-symbols the construction demands: one per
    context entry, boundary slot, and conclusion boundary of each symbol
    rule, realised by the theory's own expressions with witnesses drawn
    from its presupposition derivations.  Returns the builder holding the
    replacement fragment and the section as a theory map; composing the
    factor map's syntax map after the section's is the identity on the
    source signature.  The section's rule derivations are not synthesised:
    deriving the translated rules needs the bridging equations between the
    pointwise and atomic primings, which stay out of scope here.
    """
    driver = _SectionDriver(theory, witnesses)
    for sym in range(theory.signature.base_count):
        driver.symbol_section(sym)
    exprs = tuple(
        generic_application(driver.builder.signature, driver.c_of_symbol[sym])
        for sym in range(theory.signature.base_count)
    )
    s_map = RawSyntaxMap(theory.signature, driver.builder.signature, exprs)
    return driver.builder, RawTheoryMap(s_map, theory, driver.builder.theory(), {})


def section_d(
    theory: RawTypeTheory, witnesses: TheoryWitnesses, rule_name: str
) -> tuple[ReplacementBuilder, RuleBoundarySpec, RawRule | None]:
    """The d-image of a rule: its premise family and conclusion boundary
    primed through the section's c-symbols, over the builder theory.

    For an object rule the image realised with its c-symbol is returned as
    well; it is a symbol rule of the builder by construction.
    """
    driver = _SectionDriver(theory, witnesses)
    index = theory.rule_index(rule_name)
    rule = theory.rule(index)
    head = rule.conclusion.head
    realized = None
    if rule.is_object and isinstance(head, SymApp):
        c = driver.symbol_section(head.sym)
        step = driver.builder.steps[_step_index_of(driver.builder, c)]
        spec = step.boundary
        realized = realise_rule_boundary(driver.builder.signature, spec, c)
        return driver.builder, spec, realized
    primed = driver._primed_premises(rule, rule_name)
    if rule.conclusion.form.is_object:
        conclusion_slots = (driver._primed_conclusion_type(rule, rule_name, primed),)
    else:
        raise MissingWitness(
            "the d-image of equality conclusions primes both sides; use the "
            "premise-family image via the returned spec instead"
        )
    spec = sequential_boundary_spec(
        theory.kind, primed, rule.conclusion.form, conclusion_slots,
        sequential_premise_names(rule),
    )
    return driver.builder, spec, realized


def _step_index_of(builder: ReplacementBuilder, symbol_index: int) -> int:
    count = -1
    for i, step in enumerate(builder.steps):
        if isinstance(step, SymbolStep):
            count += 1
            if count == symbol_index:
                return i
    raise KernelError("symbol index out of range")


class _SectionDriver:
    def __init__(self, theory: RawTypeTheory, witnesses: TheoryWitnesses):
        self.theory = theory
        self.kind = theory.kind
        self.witnesses = witnesses
        self.beta = theory_tightness(theory)
        self.builder = ReplacementBuilder(theory)
        self.c_of_symbol: dict[int, int] = {}
        self._cache: dict = {}

    def symbol_section(self, sym: int) -> int:
        """The c-symbol realising S's own rule-boundary by genapp(S)."""
        if sym in self.c_of_symbol:
            return self.c_of_symbol[sym]
        rule_index = self.beta[sym]
        rule = self.theory.rule(rule_index)
        decl = self.theory.signature.symbol(sym)
        name = self.theory.rule_name(rule_index)
        primed = self._primed_premises(rule, name)
        if decl.cls is TY:
            form, conclusion_slots = JudgementForm.IS_TY, ()
        else:
            form = JudgementForm.IS_TM
            conclusion_slots = (
                self._primed_conclusion_type(rule, name, primed),
            )
        spec = sequential_boundary_spec(
            self.kind, primed, form, conclusion_slots, sequential_premise_names(rule)
        )
        realiser = generic_application(self.theory.signature, sym)
        witness = Specific(
            rule_index,
            _generic_rule_instantiation(rule),
            EMPTY_CONTEXT,
            tuple(Hyp(k) for k in range(len(rule.premises))),
        )
        c = self._add(f"c.{decl.name}", spec, realiser, witness)
        self.c_of_symbol[sym] = c
        return c

    # -- the d-image of a premise family ------------------------------------------

    def _primed_premises(self, rule: RawRule, name: str) -> tuple:
        out: list[tuple[tuple[Expr, ...], JudgementForm, tuple[Expr, ...]]] = []
        for k, premise in enumerate(rule.premises):
            seq = self._sequential_entries(premise.context)
            primed_seq = tuple(
                self._primed_entry(rule, name, tuple(out), entry, k) for entry in seq
            )
            primed_slots = tuple(
                self._primed_slot(rule, name, tuple(out), premise, slot, cls, k)
                for slot, cls in zip(premise.boundary, premise.form.boundary_classes)
            )
            out.append((primed_seq, premise.form, primed_slots))
        return tuple(out)

    def _sequential_entries(self, ctx: RawContext):
        from .presentation import is_sequential_flat_context

        seq = is_sequential_flat_context(self.kind, ctx)
        if seq is None:
            raise NotAcceptable("the section construction needs sequential contexts")
        return seq

    def _intro_premise(self, rule: RawRule, meta: int) -> int:
        from .metatheory import check_tight

        return check_tight(rule).premise_of_arg[meta]

    def _sub_arity_len(self, rule: RawRule, k: int) -> int:
        return len([p for p in rule.object_premises() if p < k])

    def _sub_meta_index(self, rule: RawRule, meta: int, k: int) -> int:
        """A metavariable's index within the arity of the first k premises.

        Sequential premise families list object premises in order, so the
        index is unchanged; this guards the assumption."""
        objects = [p for p in rule.object_premises() if p < k]
        intro = self._intro_premise(rule, meta)
        if intro not in objects:
            raise MissingWitness("a premise mentions a metavariable introduced later")
        return objects.index(intro)

    def _primed_entry(self, rule, name, prefix, entry: Expr, k: int) -> Expr:
        if not (isinstance(entry, MetaApp) and not entry.args and entry.scope == 0):
            raise MissingWitness(
                "the section construction supports premise contexts whose entries "
                "are bare closed metavariables"
            )
        intro = self._intro_premise(rule, entry.idx)
        spec = sequential_boundary_spec(
            self.kind, prefix, JudgementForm.IS_TY, (),
            sequential_premise_names(rule)[:len(prefix)],
        )
        realiser = MetaApp(self._sub_meta_index(rule, entry.idx, k), (), 0, TY)
        meta_name = (rule.meta_names or ())[entry.idx] if rule.meta_names else f"?{entry.idx}"
        c = self._add(f"c.{name}.{meta_name}", spec, realiser, Hyp(intro))
        return generic_application(self.builder.signature, c)

    def _primed_slot(self, rule, name, prefix, premise, slot: Expr, cls, k: int) -> Expr:
        if cls is not TY:
            raise MissingWitness(
                "the section construction primes type slots only"
            )
        gamma = premise.context.scope
        prefix_family = list(prefix)
        for entry in self._sequential_entries(premise.context):
            primed = self._primed_entry(rule, name, tuple(prefix_family), entry, k)
            prefix_family.append(((), JudgementForm.IS_TM, (primed,)))
        sub = self._sub_arity_len(rule, k)
        promoted = self._promote_slot(rule, slot, k, gamma, sub)
        witness = self._slot_witness(rule, premise, slot, k, gamma, sub)
        spec = sequential_boundary_spec(
            self.kind, tuple(prefix_family), JudgementForm.IS_TY, (),
            sequential_premise_names(rule)[:k] + tuple(f"x{i}" for i in range(gamma)),
        )
        c = self._add(f"c.{name}.p{k}", spec, promoted, witness)
        genapp_c = generic_application(self.builder.signature, c)
        # demote: promotion metavariables become the context variables again,
        # prefix metavariables stay generic at the widened scope
        new_args = []
        for i, a in enumerate(genapp_c.args):
            if i < sub:
                new_args.append(_rescope(self.kind, a, gamma))
            else:
                j = i - sub
                new_args.append(Var(self._declared_position(j, gamma), gamma))
        return SymApp(genapp_c.sym, tuple(new_args), gamma, TY)

    def _declared_position(self, j: int, gamma: int) -> int:
        from .presentation import _declared_position

        return _declared_position(self.kind, j, gamma)

    def _promote_slot(self, rule, slot: Expr, k: int, gamma: int, sub: int) -> Expr:
        """The slot with context variables promoted to fresh metavariables and
        rule metavariables reindexed into the premise-prefix arity."""
        kind = self.kind

        def go(node: Expr, extra: int) -> Expr:
            match node:
                case Var(pos=p, scope=sc):
                    if extra:
                        side, q = kind.unsum(gamma, extra, p)
                        if side == "right":
                            return Var(q, sc - gamma)
                        return MetaApp(sub + self._declared_index(q, gamma), (), sc - gamma, TM)
                    return MetaApp(sub + self._declared_index(p, gamma), (), 0, TM)
                case SymApp(sym=s2, args=args, scope=sc, cls=c):
                    return SymApp(
                        s2, tuple(go(a, extra + (a.scope - sc)) for a in args), sc - gamma, c
                    )
                case MetaApp(idx=m, args=args, scope=sc, cls=c):
                    return MetaApp(
                        self._sub_meta_index(rule, m, k),
                        tuple(go(a, extra) for a in args),
                        sc - gamma,
                        c,
                    )
            raise TypeError(node)

        return go(slot, slot.scope - gamma)

    def _declared_index(self, pos: int, gamma: int) -> int:
        for j in range(gamma):
            if self._declared_position(j, gamma) == pos:
                return j
        raise KernelError("position outside the context")

    def _slot_witness(self, rule, premise, slot, k: int, gamma: int, sub: int):
        """A derivation of the promoted slot's typing over the boundary's
        hypotheses: prefix premises first, then the promotion typings."""
        if isinstance(slot, MetaApp) and _is_generic_args(self.kind, slot.args, gamma, self):
            intro = self._intro_premise(rule, slot.idx)
            if gamma == 0:
                return Hyp(intro)
            intro_premise = rule.premises[intro]
            sub_j = _reindex_judgement_into_prefix(self, rule, intro_premise, k)
            table = [None] * gamma
            for j in range(gamma):
                table[self._declared_position(j, gamma)] = MetaApp(sub + j, (), 0, TM)
            f = Substitution(0, gamma, tuple(table))
            typings = tuple(Hyp(k + j) for j in range(gamma))
            return Structural(
                SubstInst(f, EMPTY_CONTEXT, frozenset(), sub_j),
                (Hyp(intro),) + typings,
            )
        if gamma == 0:
            w = self.witnesses.get(self.theory.rule_name(self.beta_of_rule(rule)))
            if w is not None:
                slot_index = list(premise.boundary).index(slot)
                d = w.premises.get((k, slot_index))
                if d is not None:
                    return d
        raise MissingWitness(
            f"no witness available for the boundary slot {slot!r} of premise {k}"
        )

    def beta_of_rule(self, rule: RawRule) -> int:
        for i, r in enumerate(self.theory.rules):
            if r == rule:
                return i
        raise KernelError("rule not in theory")

    def _primed_conclusion_type(self, rule: RawRule, name: str, primed) -> Expr:
        a = rule.conclusion.boundary[0]
        sub = len(rule.arity)
        promoted = self._promote_slot(rule, a, len(rule.premises), 0, sub)
        w = self.witnesses.get(self.theory.rule_name(self.beta_of_rule(rule)))
        if w is None or 0 not in w.conclusion:
            raise MissingWitness(f"rule {name} has no conclusion-type witness")
        spec = sequential_boundary_spec(
            self.kind, primed, JudgementForm.IS_TY, (), sequential_premise_names(rule)
        )
        c = self._add(f"c.{name}.ty", spec, promoted, w.conclusion[0])
        return generic_application(self.builder.signature, c)

    def _add(self, name: str, spec: RuleBoundarySpec, realiser: Expr, witness) -> int:
        key = (spec, realiser)
        if key in self._cache:
            return self._cache[key]
        unique, n = name, 0
        taken = {s.name for s in self.builder.signature.symbols}
        while unique in taken:
            n += 1
            unique = f"{name}.{n}"
        idx = self.builder.add_symbol(SymbolStep(unique, spec, realiser, witness))
        self._cache[key] = idx
        return idx


def _is_generic_args(kind, args, gamma: int, driver) -> bool:
    """args are exactly the context variables in declaration order."""
    if len(args) != gamma:
        return False
    for j, a in enumerate(args):
        if not (isinstance(a, Var) and a.pos == driver._declared_position(j, gamma)):
            return False
    return True


def _reindex_judgement_into_prefix(driver, rule, premise, k: int) -> Judgement:
    """A premise judgement with its metavariables reindexed into the arity of
    the first k premises (the identity for sequential families)."""

    def go(e: Expr) -> Expr:
        match e:
            case Var():
                return e
            case SymApp(sym=s2, args=args, scope=sc, cls=c):
                return SymApp(s2, tuple(go(a) for a in args), sc, c)
            case MetaApp(idx=m, args=args, scope=sc, cls=c):
                return MetaApp(
                    driver._sub_meta_index(rule, m, k), tuple(go(a) for a in args), sc, c
                )
        raise TypeError(e)

    ctx = RawContext(premise.context.scope, tuple(go(t) for t in premise.context.types))
    return Judgement(
        ctx,
        premise.form,
        tuple(go(e) for e in premise.boundary),
        None if premise.head is None else go(premise.head),
    )


def _rescope(kind: ScopeKind, e: Expr, gamma: int) -> Expr:
    """Weaken a generic metavariable application into an ambient scope: its
    arguments keep naming the variables bound in that argument position."""
    match e:
        case MetaApp(idx=m, args=args, cls=c):
            b = len(args)
            new = tuple(Var(kind.inr(gamma, b, j), gamma + b) for j in range(b))
            return MetaApp(m, new, gamma + b, c)
    raise TypeError(e)


def _generic_rule_instantiation(rule: RawRule) -> Instantiation:
    exprs = tuple(
        MetaApp(i, tuple(Var(j, a.binder) for j in range(a.binder)), a.binder, a.cls)
        for i, a in enumerate(rule.arity)
    )
    return Instantiation(rule.arity, 0, exprs)
