"""Raw type theories, typed derivation trees, and the kernel checker.

A derivation node stores the data of the closure-rule instance it cites
(context, instantiation, substitution, ...); the checker recomputes the
instance's premises and conclusion from that data and matches children
structurally, so nothing in a stored tree is trusted.

Derivations over a metavariable extension of the theory's signature reuse
the same trees: pass the extension arity as ``ambient``.  Base symbol
indices stay valid and MetaApp nodes refer to the ambient extension.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    ArityMismatch,
    ChildCountMismatch,
    DerivationError,
    IndexOutOfRange,
    KernelError,
    PremiseMismatch,
)
from .foundations import ClosureRule
from .scopes import ScopeKind
from .syntax import (
    Arity,
    Instantiation,
    Signature,
    SignatureMap,
    Substitution,
    inst_act_inst,
    inst_act_subst,
    mv_extend_signature,
    translate_inst,
    translate_subst,
    validate_instantiation,
)
from .judgements import (
    Judgement,
    RawContext,
    instantiate_context,
    instantiate_judgement,
    translate_context,
    translate_judgement,
    validate_context,
    validate_judgement,
)
from .rules import (
    CONVERSION_RULES,
    EQUIVALENCE_RULES,
    RawRule,
    equality_substitution_rule,
    instantiate_rule,
    substitution_rule,
    translate_rule,
    variable_rule,
)


@dataclass(frozen=True)
class RawTypeTheory:
    signature: Signature
    rules: tuple[RawRule, ...]
    rule_names: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.rule_names and len(self.rule_names) != len(self.rules):
            raise ArityMismatch("rule name list does not match rule count")

    @property
    def kind(self) -> ScopeKind:
        return self.signature.kind

    def rule(self, i: int) -> RawRule:
        if not 0 <= i < len(self.rules):
            raise IndexOutOfRange(f"rule {i} of {len(self.rules)}")
        return self.rules[i]

    def rule_name(self, i: int) -> str:
        return self.rule_names[i] if self.rule_names else f"rule{i}"

    def rule_index(self, name: str) -> int:
        for i, n in enumerate(self.rule_names):
            if n == name:
                return i
        raise IndexOutOfRange(f"no rule named {name!r}")


# --- derivation nodes --------------------------------------------------------

@dataclass(frozen=True)
class Hyp:
    index: int

    @property
    def children(self) -> tuple:
        return ()


@dataclass(frozen=True)
class VariableInst:
    context: RawContext
    pos: int


@dataclass(frozen=True)
class EquivInst:
    which: int
    inst: Instantiation
    context: RawContext


@dataclass(frozen=True)
class ConvInst:
    which: int
    inst: Instantiation
    context: RawContext


@dataclass(frozen=True)
class SubstInst:
    subst: Substitution
    context: RawContext          # the target context the conclusion lives in
    trivial: frozenset[int]      # positions of the source context not re-checked
    judgement: Judgement         # the judgement being substituted into


@dataclass(frozen=True)
class EqSubstInst:
    left: Substitution
    right: Substitution
    context: RawContext
    trivial: frozenset[int]
    judgement: Judgement


StructuralData = VariableInst | EquivInst | ConvInst | SubstInst | EqSubstInst


@dataclass(frozen=True)
class Structural:
    instance: StructuralData
    children: tuple


@dataclass(frozen=True)
class Specific:
    rule: int
    inst: Instantiation
    context: RawContext
    children: tuple


TheoryDerivation = Hyp | Structural | Specific


def ambient_signature(theory: RawTypeTheory, ambient: Arity | None, names: tuple[str, ...] = ()) -> Signature:
    if ambient is None:
        return theory.signature
    return mv_extend_signature(theory.signature, ambient, names)


def closure_rule_of_structural(sig: Signature, data: StructuralData) -> ClosureRule:
    """Recompute the closure rule cited by a structural node."""
    kind = sig.kind
    match data:
        case VariableInst(context=ctx, pos=i):
            validate_context(sig, ctx)
            return variable_rule(kind, ctx, i)
        case EquivInst(which=w, inst=inst, context=ctx):
            if not 0 <= w < len(EQUIVALENCE_RULES):
                raise IndexOutOfRange(f"equivalence rule {w}")
            validate_context(sig, ctx)
            validate_instantiation(sig, inst)
            return instantiate_rule(kind, inst, ctx, EQUIVALENCE_RULES[w])
        case ConvInst(which=w, inst=inst, context=ctx):
            if not 0 <= w < len(CONVERSION_RULES):
                raise IndexOutOfRange(f"conversion rule {w}")
            validate_context(sig, ctx)
            validate_instantiation(sig, inst)
            return instantiate_rule(kind, inst, ctx, CONVERSION_RULES[w])
        case SubstInst(subst=f, context=ctx, trivial=K, judgement=j):
            validate_context(sig, ctx)
            validate_judgement(sig, j)
            return substitution_rule(kind, f, ctx, K, j)
        case EqSubstInst(left=f, right=g, context=ctx, trivial=K, judgement=j):
            validate_context(sig, ctx)
            validate_judgement(sig, j)
            return equality_substitution_rule(kind, f, g, ctx, K, j)
    raise TypeError(f"not a structural instance: {data!r}")


def closure_rule_of_node(theory: RawTypeTheory, sig: Signature, node: TheoryDerivation) -> ClosureRule:
    match node:
        case Structural(instance=data):
            return closure_rule_of_structural(sig, data)
        case Specific(rule=r, inst=inst, context=ctx):
            rule = theory.rule(r)
            validate_context(sig, ctx)
            validate_instantiation(sig, inst)
            return instantiate_rule(sig.kind, inst, ctx, rule)
    raise TypeError(f"no closure rule at {node!r}")


def check_theory_derivation(
    theory: RawTypeTheory,
    hyps: tuple[Judgement, ...],
    d: TheoryDerivation,
    ambient: Arity | None = None,
    ambient_names: tuple[str, ...] = (),
) -> Judgement:
    """Check ``d`` against the theory's closure system and return its conclusion.

    ``hyps`` are the allowed hypothesis judgements; ``ambient`` moves the
    whole check to the metavariable extension of the theory's signature.
    """
    sig = ambient_signature(theory, ambient, ambient_names)
    return _check(theory, sig, hyps, d, ())


def _check(theory, sig, hyps, d, path) -> Judgement:
    match d:
        case Hyp(index=k):
            if not 0 <= k < len(hyps):
                raise DerivationError(path, IndexOutOfRange(f"hypothesis {k} of {len(hyps)}"))
            return hyps[k]
        case Structural() | Specific():
            try:
                rule = closure_rule_of_node(theory, sig, d)
            except KernelError as e:
                raise DerivationError(path, e) from e
            children = d.children
            if len(children) != len(rule.premises):
                raise DerivationError(
                    path,
                    ChildCountMismatch(
                        f"{len(rule.premises)} premises, {len(children)} children"
                    ),
                )
            for i, (child, premise) in enumerate(zip(children, rule.premises)):
                got = _check(theory, sig, hyps, child, path + (i,))
                if got != premise:
                    raise PremiseMismatch(path + (i,), premise, got)
            return rule.conclusion
    raise DerivationError(path, KernelError(f"not a derivation node: {d!r}"))


def derivation_nodes(d: TheoryDerivation):
    yield d
    for c in d.children:
        yield from derivation_nodes(c)


# --- translation and instantiation of derivations ----------------------------

@dataclass(frozen=True)
class SimpleTheoryMap:
    """A signature map plus a rule-index map with matching rule translations."""

    fmap: SignatureMap
    src: RawTypeTheory
    dst: RawTypeTheory
    rule_table: tuple[int, ...]

    def __post_init__(self):
        if len(self.rule_table) != len(self.src.rules):
            raise ArityMismatch("rule table length mismatch")
        for i, j in enumerate(self.rule_table):
            if translate_rule(self.fmap, self.src.rule(i)) != self.dst.rule(j):
                raise ArityMismatch(
                    f"rule {self.src.rule_name(i)} does not translate to {self.dst.rule_name(j)}"
                )

    @staticmethod
    def identity(theory: RawTypeTheory) -> "SimpleTheoryMap":
        return SimpleTheoryMap(
            SignatureMap.identity(theory.signature),
            theory,
            theory,
            tuple(range(len(theory.rules))),
        )


def translate_derivation(
    tmap: SimpleTheoryMap, d: TheoryDerivation, ambient: Arity | None = None
) -> TheoryDerivation:
    """Relabel a derivation along a simple theory map; conclusions translate pointwise.

    ``ambient`` names the metavariable extension the derivation lives over;
    the signature map then acts as its extension, fixing the metavariables.
    """
    fmap = tmap.fmap
    if ambient is not None:
        fmap = SignatureMap(
            mv_extend_signature(tmap.fmap.src, ambient),
            mv_extend_signature(tmap.fmap.dst, ambient),
            tmap.fmap.sym_table,
            tuple(range(len(ambient))),
        )
    return _translate_nodes(fmap, tmap.rule_table, d)


def _translate_nodes(fmap: SignatureMap, rule_table: tuple[int, ...], d: TheoryDerivation) -> TheoryDerivation:
    match d:
        case Hyp():
            return d
        case Specific(rule=r, inst=inst, context=ctx, children=children):
            return Specific(
                rule_table[r],
                translate_inst(fmap, inst),
                translate_context(fmap, ctx),
                tuple(_translate_nodes(fmap, rule_table, c) for c in children),
            )
        case Structural(instance=data, children=children):
            new_children = tuple(_translate_nodes(fmap, rule_table, c) for c in children)
            match data:
                case VariableInst(context=ctx, pos=i):
                    new = VariableInst(translate_context(fmap, ctx), i)
                case EquivInst(which=w, inst=inst, context=ctx):
                    new = EquivInst(w, translate_inst(fmap, inst), translate_context(fmap, ctx))
                case ConvInst(which=w, inst=inst, context=ctx):
                    new = ConvInst(w, translate_inst(fmap, inst), translate_context(fmap, ctx))
                case SubstInst(subst=f, context=ctx, trivial=K, judgement=j):
                    new = SubstInst(
                        translate_subst(fmap, f),
                        translate_context(fmap, ctx),
                        K,
                        translate_judgement(fmap, j),
                    )
                case EqSubstInst(left=f, right=g, context=ctx, trivial=K, judgement=j):
                    new = EqSubstInst(
                        translate_subst(fmap, f),
                        translate_subst(fmap, g),
                        translate_context(fmap, ctx),
                        K,
                        translate_judgement(fmap, j),
                    )
                case _:
                    raise TypeError(data)
            return Structural(new, new_children)
    raise TypeError(f"not a derivation node: {d!r}")


def instantiate_derivation(
    theory: RawTypeTheory,
    inst: Instantiation,
    ctx: RawContext,
    d: TheoryDerivation,
    outer_ambient: Arity | None = None,
) -> TheoryDerivation:
    """Push a derivation over the extension by ``inst.arity`` down to the base.

    ``d`` must check over the theory at ambient ``inst.arity`` (itself over
    ``outer_ambient`` when nested); the result checks over ``outer_ambient``
    with the instantiated conclusion.  Under strict scopes every node maps to
    a node of the same kind, so the tree shape is preserved.
    """
    kind = theory.kind
    gamma = inst.scope

    def inl_set(sigma: int) -> frozenset[int]:
        return frozenset(kind.inl(gamma, sigma, i) for i in range(gamma))

    def go(node: TheoryDerivation) -> TheoryDerivation:
        match node:
            case Hyp():
                return node
            case Specific(rule=r, inst=j, context=delta, children=children):
                return Specific(
                    r,
                    inst_act_inst(kind, inst, j),
                    instantiate_context(kind, inst, ctx, delta),
                    tuple(go(c) for c in children),
                )
            case Structural(instance=data, children=children):
                new_children = tuple(go(c) for c in children)
                match data:
                    case VariableInst(context=delta, pos=i):
                        new = VariableInst(
                            instantiate_context(kind, inst, ctx, delta),
                            kind.inr(gamma, delta.scope, i),
                        )
                    case EquivInst(which=w, inst=j, context=delta):
                        new = EquivInst(
                            w, inst_act_inst(kind, inst, j), instantiate_context(kind, inst, ctx, delta)
                        )
                    case ConvInst(which=w, inst=j, context=delta):
                        new = ConvInst(
                            w, inst_act_inst(kind, inst, j), instantiate_context(kind, inst, ctx, delta)
                        )
                    case SubstInst(subst=f, context=tgt, trivial=K, judgement=jj):
                        sigma = jj.context.scope
                        new = SubstInst(
                            inst_act_subst(kind, inst, f),
                            instantiate_context(kind, inst, ctx, tgt),
                            inl_set(sigma) | frozenset(kind.inr(gamma, sigma, i) for i in K),
                            instantiate_judgement(kind, inst, ctx, jj),
                        )
                    case EqSubstInst(left=f, right=g, context=tgt, trivial=K, judgement=jj):
                        sigma = jj.context.scope
                        new = EqSubstInst(
                            inst_act_subst(kind, inst, f),
                            inst_act_subst(kind, inst, g),
                            instantiate_context(kind, inst, ctx, tgt),
                            inl_set(sigma) | frozenset(kind.inr(gamma, sigma, i) for i in K),
                            instantiate_judgement(kind, inst, ctx, jj),
                        )
                    case _:
                        raise TypeError(data)
                return Structural(new, new_children)
        raise TypeError(f"not a derivation node: {node!r}")

    return go(d)


def check_derived_rule(
    theory: RawTypeTheory, rule: RawRule, witness: TheoryDerivation
) -> bool:
    """True iff ``witness`` derives the rule's conclusion from its premises."""
    try:
        got = check_theory_derivation(theory, rule.premises, witness, rule.arity, rule.meta_names)
    except KernelError:
        return False
    return got == rule.conclusion


def check_admissible_instance(
    theory: RawTypeTheory,
    rule: RawRule,
    inst: Instantiation,
    ctx: RawContext,
    witness: TheoryDerivation,
) -> bool:
    """True iff ``witness`` derives the instance's conclusion from its premises."""
    closure = instantiate_rule(theory.kind, inst, ctx, rule)
    try:
        got = check_theory_derivation(theory, closure.premises, witness)
    except KernelError:
        return False
    return got == closure.conclusion
