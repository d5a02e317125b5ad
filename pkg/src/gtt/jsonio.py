"""JSON interchange for every kernel object the CLI moves around.

Expressions carry no scopes on the wire; decoding re-validates everything
against the declared signature and the scope implied by context, so a
file round-trips exactly when it is well-formed.  Emission is canonical:
sorted keys, no whitespace (or indented with sorted keys under pretty).
"""

from __future__ import annotations

import json
from typing import Any

from .errors import KernelError, ParseError
from .foundations import FinitePoset
from .judgements import (
    Boundary,
    Judgement,
    JudgementForm,
    RawContext,
)
from .metatheory import RuleWitnesses, TheoryWitnesses
from .presentation import (
    PremisesShape,
    RuleBoundarySpec,
    RuleBoundaryWitnesses,
    TheoryRuleSpec,
    WellFoundedPremiseFamily,
    WellPresentedTheorySpec,
)
from .rules import (
    CONVERSION_RULE_NAMES,
    CONVERSION_RULES,
    EQUIVALENCE_RULE_NAMES,
    EQUIVALENCE_RULES,
    RawRule,
)
from .scopes import ScopeKind
from .syntax import (
    Argument,
    Arity,
    Expr,
    Instantiation,
    MetaApp,
    Signature,
    Substitution,
    SymApp,
    Symbol,
    SyntacticClass,
    TM,
    TY,
    Var,
    mk_meta,
    mk_sym,
    mk_var,
    mv_extend_signature,
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


def dumps(obj: Any, pretty: bool = False) -> str:
    if pretty:
        return json.dumps(obj, sort_keys=True, indent=2)
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e


# --- expressions ------------------------------------------------------------------

def expr_to_json(sig: Signature, e: Expr) -> Any:
    match e:
        case Var(pos=p):
            return {"var": p}
        case SymApp(sym=s, args=args):
            return {"sym": sig.symbol(s).name, "args": [expr_to_json(sig, a) for a in args]}
        case MetaApp(idx=m, args=args):
            return {"meta": sig.mv_name(m), "args": [expr_to_json(sig, a) for a in args]}
    raise TypeError(e)


def expr_from_json(sig: Signature, data: Any, scope: int) -> Expr:
    if not isinstance(data, dict):
        raise ParseError(f"expected an expression object, got {data!r}")
    if "var" in data:
        return mk_var(scope, _nat(data["var"], "var"))
    if "sym" in data:
        try:
            idx = sig.symbol_index(_str(data["sym"], "sym"))
        except KernelError as e:
            raise ParseError(str(e)) from e
        decl = sig.symbol(idx)
        raw_args = data.get("args", [])
        if len(raw_args) != len(decl.arity):
            raise ParseError(f"{decl.name} expects {len(decl.arity)} arguments")
        args = tuple(
            expr_from_json(sig, a, scope + slot.binder)
            for a, slot in zip(raw_args, decl.arity)
        )
        return mk_sym(sig, idx, args, scope)
    if "meta" in data:
        try:
            idx = sig.mv_index(_str(data["meta"], "meta"))
        except KernelError as e:
            raise ParseError(str(e)) from e
        raw_args = data.get("args", [])
        args = tuple(expr_from_json(sig, a, scope) for a in raw_args)
        return mk_meta(sig, idx, args, scope)
    raise ParseError(f"not an expression: {data!r}")


def _nat(v, what) -> int:
    if not isinstance(v, int) or v < 0:
        raise ParseError(f"{what} must be a natural number, got {v!r}")
    return v


def _str(v, what) -> str:
    if not isinstance(v, str):
        raise ParseError(f"{what} must be a string, got {v!r}")
    return v


# --- arities, signatures ------------------------------------------------------------

def arity_to_json(alpha: Arity) -> Any:
    return [[a.cls.value, a.binder] for a in alpha]


def arity_from_json(data: Any) -> Arity:
    if not isinstance(data, list):
        raise ParseError("an arity is a list of [class, binder] pairs")
    out = []
    for item in data:
        if not (isinstance(item, list) and len(item) == 2):
            raise ParseError(f"bad arity entry {item!r}")
        cls = _class_from(item[0])
        out.append(Argument(cls, _nat(item[1], "binder")))
    return tuple(out)


def _class_from(v) -> SyntacticClass:
    if v == "Ty":
        return TY
    if v == "Tm":
        return TM
    raise ParseError(f"bad syntactic class {v!r}")


def signature_to_json(sig: Signature) -> Any:
    return [
        {"name": s.name, "class": s.cls.value, "arity": arity_to_json(s.arity)}
        for s in sig.symbols
    ]


def signature_from_json(data: Any, kind: ScopeKind) -> Signature:
    if not isinstance(data, list):
        raise ParseError("a signature is a list of symbol declarations")
    symbols = tuple(
        Symbol(_str(d["name"], "name"), _class_from(d["class"]), arity_from_json(d.get("arity", [])))
        for d in data
    )
    return Signature(symbols, kind)


# --- contexts, judgements, boundaries -------------------------------------------------

def context_to_json(sig: Signature, ctx: RawContext) -> Any:
    return [expr_to_json(sig, t) for t in ctx.types]


def context_from_json(sig: Signature, data: Any) -> RawContext:
    if not isinstance(data, list):
        raise ParseError("a context is a list of types, indexed by position")
    scope = len(data)
    return RawContext(scope, tuple(expr_from_json(sig, t, scope) for t in data))


_SLOT_KEYS = {
    JudgementForm.IS_TY: ("head",),
    JudgementForm.IS_TM: ("head", "type"),
    JudgementForm.TY_EQ: ("lhs", "rhs"),
    JudgementForm.TM_EQ: ("lhs", "rhs", "type"),
}
_BOUNDARY_KEYS = {
    JudgementForm.IS_TY: (),
    JudgementForm.IS_TM: ("type",),
    JudgementForm.TY_EQ: ("lhs", "rhs"),
    JudgementForm.TM_EQ: ("lhs", "rhs", "type"),
}


def judgement_to_json(sig: Signature, j: Judgement) -> Any:
    slots = {}
    for key, e in zip(_BOUNDARY_KEYS[j.form], j.boundary):
        slots[key] = expr_to_json(sig, e)
    if j.head is not None:
        slots["head"] = expr_to_json(sig, j.head)
    return {
        "cxt": context_to_json(sig, j.context),
        "form": j.form.value,
        "slots": slots,
    }


def _form_from(v) -> JudgementForm:
    try:
        return JudgementForm(v)
    except ValueError:
        raise ParseError(f"bad judgement form {v!r}") from None


def judgement_from_json(sig: Signature, data: Any) -> Judgement:
    form = _form_from(data.get("form"))
    ctx = context_from_json(sig, data.get("cxt", []))
    slots = data.get("slots", {})
    boundary = tuple(
        expr_from_json(sig, slots[k], ctx.scope) for k in _BOUNDARY_KEYS[form]
    )
    head = None
    if form.head_class is not None:
        if "head" not in slots:
            raise ParseError(f"{form.value} judgement needs a head slot")
        head = expr_from_json(sig, slots["head"], ctx.scope)
    return Judgement(ctx, form, boundary, head)


def boundary_to_json(sig: Signature, b: Boundary) -> Any:
    slots = {
        k: expr_to_json(sig, e) for k, e in zip(_BOUNDARY_KEYS[b.form], b.boundary)
    }
    return {"cxt": context_to_json(sig, b.context), "form": b.form.value, "slots": slots}


def boundary_from_json(sig: Signature, data: Any) -> Boundary:
    form = _form_from(data.get("form"))
    ctx = context_from_json(sig, data.get("cxt", []))
    slots = data.get("slots", {})
    boundary = tuple(
        expr_from_json(sig, slots[k], ctx.scope) for k in _BOUNDARY_KEYS[form]
    )
    return Boundary(ctx, form, boundary)


# --- rules ------------------------------------------------------------------------

def rule_to_json(sig: Signature, rule: RawRule, name: str | None = None) -> Any:
    ext = mv_extend_signature(sig, rule.arity, rule.meta_names)
    out = {
        "arity": arity_to_json(rule.arity),
        "metas": [ext.mv_name(i) for i in range(ext.mv_count)],
        "premises": [judgement_to_json(ext, p) for p in rule.premises],
        "conclusion": judgement_to_json(ext, rule.conclusion),
    }
    if name is not None:
        out["name"] = name
    return out


def rule_from_json(sig: Signature, data: Any) -> RawRule:
    alpha = arity_from_json(data.get("arity", []))
    metas = tuple(_str(m, "meta name") for m in data.get("metas", []))
    if metas and len(metas) != len(alpha):
        raise ParseError("meta name list does not match the arity")
    ext = mv_extend_signature(sig, alpha, metas)
    premises = tuple(judgement_from_json(ext, p) for p in data.get("premises", []))
    conclusion = judgement_from_json(ext, data["conclusion"])
    return RawRule(alpha, premises, conclusion, metas)


# --- instantiations and derivations -----------------------------------------------

def instantiation_to_json(sig: Signature, ext: Signature, inst: Instantiation) -> Any:
    return {
        ext.mv_name(i): expr_to_json(sig, e) for i, e in enumerate(inst.exprs)
    }


def instantiation_from_json(
    sig: Signature, ext: Signature, alpha: Arity, data: Any, scope: int
) -> Instantiation:
    exprs = []
    for i, slot in enumerate(alpha):
        key = ext.mv_name(i)
        if key not in data:
            raise ParseError(f"instantiation misses metavariable {key!r}")
        exprs.append(expr_from_json(sig, data[key], scope + slot.binder))
    return Instantiation(alpha, scope, tuple(exprs))


def substitution_to_json(sig: Signature, f: Substitution) -> Any:
    return {"src": f.src, "map": [expr_to_json(sig, e) for e in f.table]}


def substitution_from_json(sig: Signature, data: Any) -> Substitution:
    src = _nat(data.get("src"), "src")
    table = tuple(expr_from_json(sig, e, src) for e in data.get("map", []))
    return Substitution(src, len(table), table)


def derivation_to_json(theory: RawTypeTheory, sig: Signature, d: TheoryDerivation) -> Any:
    match d:
        case Hyp(index=k):
            return {"node": "hyp", "index": k}
        case Specific(rule=r, inst=inst, context=ctx, children=children):
            rule = theory.rule(r)
            ext = mv_extend_signature(sig, rule.arity, rule.meta_names)
            return {
                "node": "rule",
                "name": theory.rule_name(r),
                "cxt": context_to_json(sig, ctx),
                "inst": instantiation_to_json(sig, ext, inst),
                "children": [derivation_to_json(theory, sig, c) for c in children],
            }
        case Structural(instance=data, children=children):
            kids = [derivation_to_json(theory, sig, c) for c in children]
            match data:
                case VariableInst(context=ctx, pos=i):
                    return {
                        "node": "var",
                        "cxt": context_to_json(sig, ctx),
                        "i": i,
                        "children": kids,
                    }
                case EquivInst(which=w, inst=inst, context=ctx):
                    rule = EQUIVALENCE_RULES[w]
                    ext = mv_extend_signature(sig, rule.arity, rule.meta_names)
                    return {
                        "node": "equiv",
                        "which": EQUIVALENCE_RULE_NAMES[w],
                        "cxt": context_to_json(sig, ctx),
                        "inst": instantiation_to_json(sig, ext, inst),
                        "children": kids,
                    }
                case ConvInst(which=w, inst=inst, context=ctx):
                    rule = CONVERSION_RULES[w]
                    ext = mv_extend_signature(sig, rule.arity, rule.meta_names)
                    return {
                        "node": "conv",
                        "which": CONVERSION_RULE_NAMES[w],
                        "cxt": context_to_json(sig, ctx),
                        "inst": instantiation_to_json(sig, ext, inst),
                        "children": kids,
                    }
                case SubstInst(subst=f, context=ctx, trivial=K, judgement=j):
                    return {
                        "node": "subst",
                        "cxt": context_to_json(sig, ctx),
                        "subst": substitution_to_json(sig, f),
                        "trivial": sorted(K),
                        "judgement": judgement_to_json(sig, j),
                        "children": kids,
                    }
                case EqSubstInst(left=f, right=g, context=ctx, trivial=K, judgement=j):
                    return {
                        "node": "eqsubst",
                        "cxt": context_to_json(sig, ctx),
                        "left": substitution_to_json(sig, f),
                        "right": substitution_to_json(sig, g),
                        "trivial": sorted(K),
                        "judgement": judgement_to_json(sig, j),
                        "children": kids,
                    }
    raise TypeError(d)


def derivation_from_json(theory: RawTypeTheory, sig: Signature, data: Any) -> TheoryDerivation:
    node = data.get("node")
    kids = tuple(
        derivation_from_json(theory, sig, c) for c in data.get("children", [])
    )
    if node == "hyp":
        return Hyp(_nat(data.get("index"), "index"))
    if node == "var":
        ctx = context_from_json(sig, data.get("cxt", []))
        return Structural(VariableInst(ctx, _nat(data.get("i"), "i")), kids)
    if node == "equiv":
        w = _which(data.get("which"), EQUIVALENCE_RULE_NAMES)
        rule = EQUIVALENCE_RULES[w]
        ctx = context_from_json(sig, data.get("cxt", []))
        ext = mv_extend_signature(sig, rule.arity, rule.meta_names)
        inst = instantiation_from_json(sig, ext, rule.arity, data.get("inst", {}), ctx.scope)
        return Structural(EquivInst(w, inst, ctx), kids)
    if node == "conv":
        w = _which(data.get("which"), CONVERSION_RULE_NAMES)
        rule = CONVERSION_RULES[w]
        ctx = context_from_json(sig, data.get("cxt", []))
        ext = mv_extend_signature(sig, rule.arity, rule.meta_names)
        inst = instantiation_from_json(sig, ext, rule.arity, data.get("inst", {}), ctx.scope)
        return Structural(ConvInst(w, inst, ctx), kids)
    if node == "rule":
        name = _str(data.get("name"), "rule name")
        r = theory.rule_index(name)
        rule = theory.rule(r)
        ctx = context_from_json(sig, data.get("cxt", []))
        ext = mv_extend_signature(sig, rule.arity, rule.meta_names)
        inst = instantiation_from_json(sig, ext, rule.arity, data.get("inst", {}), ctx.scope)
        return Specific(r, inst, ctx, kids)
    if node == "subst":
        ctx = context_from_json(sig, data.get("cxt", []))
        f = substitution_from_json(sig, data.get("subst", {}))
        j = judgement_from_json(sig, data.get("judgement", {}))
        return Structural(
            SubstInst(f, ctx, frozenset(_nat(i, "trivial") for i in data.get("trivial", [])), j),
            kids,
        )
    if node == "eqsubst":
        ctx = context_from_json(sig, data.get("cxt", []))
        f = substitution_from_json(sig, data.get("left", {}))
        g = substitution_from_json(sig, data.get("right", {}))
        j = judgement_from_json(sig, data.get("judgement", {}))
        return Structural(
            EqSubstInst(
                f, g, ctx, frozenset(_nat(i, "trivial") for i in data.get("trivial", [])), j
            ),
            kids,
        )
    raise ParseError(f"unknown derivation node {node!r}")


def _which(v, names) -> int:
    if isinstance(v, int) and 0 <= v < len(names):
        return v
    if v in names:
        return names.index(v)
    raise ParseError(f"unknown structural rule {v!r}")


# --- theory files ------------------------------------------------------------------

def theory_to_json(
    theory: RawTypeTheory,
    witnesses: TheoryWitnesses | None = None,
    order: FinitePoset | None = None,
) -> Any:
    sig = theory.signature
    out = {
        "scope_system": theory.kind.value,
        "signature": signature_to_json(sig),
        "rules": [
            rule_to_json(sig, rule, theory.rule_name(i))
            for i, rule in enumerate(theory.rules)
        ],
    }
    if witnesses:
        out["witnesses"] = [
            {
                "rule": name,
                "presup_witnesses": _rule_witnesses_to_json(theory, name, w),
            }
            for name, w in sorted(witnesses.items())
        ]
    if order is not None:
        out["order"] = sorted(
            [theory.rule_name(i), theory.rule_name(j)] for i, j in order.edges
        )
    return out


def _rule_witnesses_to_json(theory, name, w: RuleWitnesses) -> Any:
    rule = theory.rule(theory.rule_index(name))
    ext = mv_extend_signature(theory.signature, rule.arity, rule.meta_names)
    out = {}
    for p, d in sorted(w.conclusion.items()):
        out[f"conclusion/{p}"] = derivation_to_json(theory, ext, d)
    for (i, p), d in sorted(w.premises.items()):
        out[f"premise_{i}/{p}"] = derivation_to_json(theory, ext, d)
    return out


def theory_from_json(data: Any) -> tuple[RawTypeTheory, TheoryWitnesses, FinitePoset | None]:
    kind_name = data.get("scope_system", ScopeKind.INDICES.value)
    try:
        kind = ScopeKind(kind_name)
    except ValueError:
        raise ParseError(f"unknown scope system {kind_name!r}") from None
    sig = signature_from_json(data.get("signature", []), kind)
    rules = []
    names = []
    for r in data.get("rules", []):
        rules.append(rule_from_json(sig, r))
        names.append(_str(r.get("name", f"rule{len(names)}"), "rule name"))
    theory = RawTypeTheory(sig, tuple(rules), tuple(names))
    witnesses: TheoryWitnesses = {}
    for entry in data.get("witnesses", []):
        name = _str(entry.get("rule"), "witness rule name")
        idx = theory.rule_index(name)
        rule = theory.rule(idx)
        ext = mv_extend_signature(sig, rule.arity, rule.meta_names)
        w = RuleWitnesses()
        for key, dv in entry.get("presup_witnesses", {}).items():
            d = derivation_from_json(theory, ext, dv)
            if key.startswith("conclusion/"):
                w.conclusion[int(key.split("/")[1])] = d
            elif key.startswith("premise_"):
                head, p = key.split("/")
                w.premises[(int(head[len("premise_"):]), int(p))] = d
            else:
                raise ParseError(f"bad witness key {key!r}")
        witnesses[name] = w
    order = None
    if "order" in data:
        edges = set()
        for pair in data["order"]:
            if not (isinstance(pair, list) and len(pair) == 2):
                raise ParseError(f"bad order entry {pair!r}")
            edges.add((theory.rule_index(pair[0]), theory.rule_index(pair[1])))
        order = FinitePoset.of(len(theory.rules), edges)
    return theory, witnesses, order


# --- well-presented theory specs ------------------------------------------------------

def spec_to_json(spec: WellPresentedTheorySpec) -> Any:
    from .presentation import theory_signature_of_spec

    sig = theory_signature_of_spec(spec)
    rules_out = []
    for i, rs in enumerate(spec.rules):
        fam = rs.boundary.premises
        premises_out = []
        for k in range(fam.premise_count()):
            form, scope = fam.shape.slots[k]
            seq, slots = fam.boundaries[k]
            sub = _sub_signature(sig, fam, k)
            premises_out.append(
                {
                    "name": fam.names[k] if fam.names else f"p{k}",
                    "form": form.value,
                    "cxt_seq": [expr_to_json(sub, t) for t in seq],
                    "boundary": {
                        key: expr_to_json(sub, e)
                        for key, e in zip(_BOUNDARY_KEYS[form], slots)
                    },
                }
            )
        full = mv_extend_signature(sig, rs.boundary.arity(), fam.meta_names())
        w = spec.witnesses.get(rs.name, RuleBoundaryWitnesses())
        witnesses_out = {}
        # premise witnesses are over the sub-extension of their down-set
        for (k, p), d in sorted(w.premises.presups.items()):
            sub = _sub_signature(sig, fam, k)
            stage = _stage_theory_for_json(spec, sig, i)
            witnesses_out[f"premise_{k}/{p}"] = derivation_to_json(stage, sub, d)
        for p, d in sorted(w.conclusion.items()):
            stage = _stage_theory_for_json(spec, sig, i)
            witnesses_out[f"conclusion/{p}"] = derivation_to_json(stage, full, d)
        rules_out.append(
            {
                "name": rs.name,
                "conclusion_form": rs.boundary.conclusion_form.value,
                "premise_order": sorted(list(e) for e in fam.shape.order.edges),
                "premises": premises_out,
                "conclusion_boundary": {
                    key: expr_to_json(full, e)
                    for key, e in zip(
                        _BOUNDARY_KEYS[rs.boundary.conclusion_form], rs.boundary.conclusion_slots
                    )
                },
                "witnesses": witnesses_out,
            }
        )
    return {
        "scope_system": spec.kind.value,
        "well_presented": True,
        "order": sorted([spec.rules[i].name, spec.rules[j].name] for i, j in spec.order.edges),
        "rules": rules_out,
    }


def _sub_signature(sig: Signature, fam: WellFoundedPremiseFamily, k: int):
    below = fam.shape.arity_below(k)
    sub_arity = tuple(
        Argument(
            TY if fam.shape.slots[j][0] is JudgementForm.IS_TY else TM,
            fam.shape.slots[j][1],
        )
        for j in below
    )
    names = tuple((fam.names[j] if fam.names else f"p{j}") for j in below)
    return mv_extend_signature(sig, sub_arity, names)


def _stage_theory_for_json(spec, sig, upto: int) -> RawTypeTheory:
    """The elaborated prefix theory, for naming rules inside witnesses."""
    from .presentation import elaborate_theory

    prefix = WellPresentedTheorySpec(
        spec.kind,
        FinitePoset.of(upto, {(i, j) for i, j in spec.order.edges if j < upto}),
        spec.rules[:upto],
        {rs.name: spec.witnesses[rs.name] for rs in spec.rules[:upto] if rs.name in spec.witnesses},
    )
    _, theory, _ = elaborate_theory(prefix)
    return theory


def spec_from_json(data: Any) -> WellPresentedTheorySpec:
    kind = ScopeKind(data.get("scope_system", ScopeKind.INDICES.value))
    raw_rules = data.get("rules", [])
    names = [_str(r.get("name"), "rule name") for r in raw_rules]
    name_index = {n: i for i, n in enumerate(names)}
    edges = {
        (name_index[a], name_index[b]) for a, b in data.get("order", [])
    }
    order = FinitePoset.of(len(raw_rules), edges)

    # first pass: shapes, to compute the staged signatures
    shapes = []
    for r in raw_rules:
        slots = tuple(
            (_form_from(p.get("form")), len(p.get("cxt_seq", [])))
            for p in r.get("premises", [])
        )
        n = len(slots)
        p_edges = r.get("premise_order")
        if p_edges is None:
            p_edge_set = {(i, j) for i in range(n) for j in range(i + 1, n)}
        else:
            p_edge_set = {(a, b) for a, b in p_edges}
        shapes.append(PremisesShape(FinitePoset.of(n, p_edge_set), slots))

    symbols = []
    for i, r in enumerate(raw_rules):
        form = _form_from(r.get("conclusion_form"))
        if form.is_object:
            symbols.append(
                Symbol(
                    names[i],
                    TY if form is JudgementForm.IS_TY else TM,
                    shapes[i].arity(),
                )
            )
    sig = Signature(tuple(symbols), kind)

    rules = []
    witnesses = {}
    for i, r in enumerate(raw_rules):
        shape = shapes[i]
        fam_names = tuple(
            _str(p.get("name", f"p{k}"), "premise name")
            for k, p in enumerate(r.get("premises", []))
        )
        boundaries = []
        for k, p in enumerate(r.get("premises", [])):
            form = _form_from(p.get("form"))
            sub = _sub_signature_of(sig, shape, fam_names, k)
            seq = tuple(
                expr_from_json(sub, t, pos) for pos, t in enumerate(p.get("cxt_seq", []))
            )
            scope = len(seq)
            slots = tuple(
                expr_from_json(sub, p.get("boundary", {})[key], scope)
                for key in _BOUNDARY_KEYS[form]
            )
            boundaries.append((seq, slots))
        fam = WellFoundedPremiseFamily(shape, tuple(boundaries), fam_names)
        form = _form_from(r.get("conclusion_form"))
        full = mv_extend_signature(sig, fam.shape.arity(), fam.meta_names())
        conclusion_slots = tuple(
            expr_from_json(full, r.get("conclusion_boundary", {})[key], 0)
            for key in _BOUNDARY_KEYS[form]
        )
        rules.append(TheoryRuleSpec(names[i], RuleBoundarySpec(fam, form, conclusion_slots)))
        raw_w = r.get("witnesses", {})
        if raw_w:
            spec_prefix = WellPresentedTheorySpec(
                kind,
                FinitePoset.of(i, {(a, b) for a, b in edges if b < i}),
                tuple(rules[:i]),
                {k: v for k, v in witnesses.items()},
            )
            from .presentation import elaborate_theory

            _, stage, _ = elaborate_theory(spec_prefix)
            w = RuleBoundaryWitnesses()
            for key, dv in raw_w.items():
                if key.startswith("conclusion/"):
                    w.conclusion[int(key.split("/")[1])] = derivation_from_json(stage, full, dv)
                elif key.startswith("premise_"):
                    head, p = key.split("/")
                    k = int(head[len("premise_"):])
                    sub = _sub_signature_of(sig, shape, fam_names, k)
                    w.premises.presups[(k, int(p))] = derivation_from_json(stage, sub, dv)
                else:
                    raise ParseError(f"bad witness key {key!r}")
            witnesses[names[i]] = w
    return WellPresentedTheorySpec(kind, order, tuple(rules), witnesses)


def _sub_signature_of(sig, shape, names, k):
    below = shape.arity_below(k)
    sub_arity = tuple(
        Argument(
            TY if shape.slots[j][0] is JudgementForm.IS_TY else TM,
            shape.slots[j][1],
        )
        for j in below
    )
    sub_names = tuple(names[j] for j in below)
    return mv_extend_signature(sig, sub_arity, sub_names)


def load_theory_file(data: Any):
    """Dispatch on the file shape: a raw theory or a well-presented spec."""
    if data.get("well_presented"):
        return ("spec", spec_from_json(data))
    return ("raw", theory_from_json(data))
