"""Sequential contexts, premise families, realisation, and elaboration."""

import itertools

import pytest

from gtt.bundled import BASE_SIGNATURE, mltt_base, mltt_pi, mltt_pi_presented
from gtt.errors import StageViolation, SymbolArityMismatch, SymbolForbidden, SymbolRequired
from gtt.foundations import FinitePoset
from gtt.judgements import EMPTY_CONTEXT, JudgementForm, RawContext, is_type
from gtt.metatheory import check_acceptable_theory, check_well_founded_theory, is_tight
from gtt.presentation import (
    PremisesShape,
    RuleBoundarySpec,
    WellFoundedPremiseFamily,
    WellPresentedTheorySpec,
    check_wf_context,
    elaborate_theory,
    flatten_premise_family,
    flatten_sequential_context,
    is_sequential_flat_context,
    is_sequential_rule,
    realise_rule_boundary,
    sequential_by_occurrence,
    sequential_by_peeling,
)
from gtt.scopes import ScopeKind
from gtt.syntax import (
    TM,
    TY,
    MetaApp,
    Signature,
    Symbol,
    SymApp,
    Var,
    arity,
    mk_sym,
)

KIND = ScopeKind.INDICES

# the two-symbol signature of the equivalence enumeration
TWO_SIG = Signature((Symbol("b", TY, ()), Symbol("el", TY, arity((TM, 0)))))


def b(scope):
    return mk_sym(TWO_SIG, "b", (), scope)


def el(v):
    return mk_sym(TWO_SIG, "el", (v,), v.scope)


def test_flatten_empty_and_roundtrip():
    assert flatten_sequential_context(KIND, ()) == EMPTY_CONTEXT
    assert is_sequential_flat_context(KIND, EMPTY_CONTEXT) == ()


def test_flatten_two_entry_context():
    # [b, el(x0)]: the first entry is weakened, the second mentions it
    seq = (b(0), el(Var(0, 1)))
    flat = flatten_sequential_context(KIND, seq)
    assert flat.scope == 2
    # indices: entry 0 was declared first, so it sits at position 1
    assert flat.type_at(1) == b(2)
    assert flat.type_at(0) == el(Var(1, 2))
    assert is_sequential_flat_context(KIND, flat) == seq


def test_non_sequential_context_detected():
    # entry 0 mentions entry declared later
    flat = RawContext(2, (b(2), el(Var(0, 2))))
    assert is_sequential_flat_context(KIND, flat) is None
    assert not sequential_by_occurrence(KIND, flat)
    assert not sequential_by_peeling(KIND, flat)


def enumerate_types(scope, depth):
    """All type expressions of the two-symbol signature, bounded depth."""
    out = [b(scope)]
    if depth >= 2:
        for p in range(scope):
            out.append(el(Var(p, scope)))
    return out


def enumerate_flat_contexts(max_scope, depth):
    for n in range(max_scope + 1):
        for types in itertools.product(enumerate_types(n, depth), repeat=n):
            yield RawContext(n, tuple(types))


def test_three_definitions_coincide_exhaustively():
    total = sequential = 0
    for ctx in enumerate_flat_contexts(3, 2):
        total += 1
        via_inverse = is_sequential_flat_context(KIND, ctx)
        d1 = via_inverse is not None
        d2 = sequential_by_occurrence(KIND, ctx)
        d3 = sequential_by_peeling(KIND, ctx)
        assert d1 == d2 == d3, ctx
        if d1:
            sequential += 1
            # data agreement: the unweakened entries flatten back
            assert flatten_sequential_context(KIND, via_inverse) == ctx
    assert total == 1 + 2 + 9 + 64
    assert 0 < sequential < total


def test_three_definitions_coincide_levels():
    kind = ScopeKind.LEVELS
    for n in range(3):
        for types in itertools.product(enumerate_types(n, 2), repeat=n):
            ctx = RawContext(n, tuple(types))
            d1 = is_sequential_flat_context(kind, ctx) is not None
            d2 = sequential_by_occurrence(kind, ctx)
            d3 = sequential_by_peeling(kind, ctx)
            assert d1 == d2 == d3, ctx


def test_check_wf_context():
    from corpus import THEORY, extend, unit_at

    assert check_wf_context(THEORY, (), ())
    u = unit_at(EMPTY_CONTEXT)
    seq = (u.type, unit_at(extend(EMPTY_CONTEXT, u)).type)
    # entry i must be derived over the flattening of the strictly earlier part
    w0 = u.d_type
    w1 = unit_at(extend(EMPTY_CONTEXT, u)).d_type
    assert check_wf_context(THEORY, seq, (w0, w1))
    assert not check_wf_context(THEORY, seq, (w0, w0))
    assert not check_wf_context(THEORY, seq, (w0,))


def test_premises_shape_arities():
    order = FinitePoset.of(3, [(0, 1), (0, 2)])
    shape = PremisesShape(
        order, ((JudgementForm.IS_TY, 0), (JudgementForm.IS_TY, 1), (JudgementForm.TY_EQ, 0))
    )
    assert [a.binder for a in shape.arity()] == [0, 1]
    assert shape.arity_below(0) == ()
    assert shape.arity_below(1) == (0,)
    assert shape.arity_below(2) == (0,)


def test_premises_shape_requires_linear_extension():
    with pytest.raises(StageViolation):
        PremisesShape(FinitePoset.of(2, [(1, 0)]), ((JudgementForm.IS_TY, 0),) * 2)


def test_flatten_pi_premise_family():
    spec = mltt_pi_presented()
    pi_fam = spec.rules[0].boundary.premises
    sig = Signature((Symbol("Pi", TY, arity((TY, 0), (TY, 1))),))
    flat = flatten_premise_family(sig, pi_fam)
    assert len(flat) == 2
    assert flat[0].head == MetaApp(0, (), 0, TY)
    assert flat[1].head == MetaApp(1, (Var(0, 1),), 1, TY)
    assert flat[1].context.types == (MetaApp(0, (), 1, TY),)


def test_flatten_empty_family():
    shape = PremisesShape(FinitePoset.of(0), ())
    fam = WellFoundedPremiseFamily(shape, ())
    assert flatten_premise_family(TWO_SIG, fam) == ()


def test_equality_premise_keeps_arity():
    order = FinitePoset.of(2, [(0, 1)])
    shape = PremisesShape(
        order, ((JudgementForm.IS_TY, 0), (JudgementForm.TY_EQ, 0))
    )
    A0 = MetaApp(0, (), 0, TY)
    fam = WellFoundedPremiseFamily(shape, (((), ()), ((), (A0, A0))), ("A", "e"))
    assert [a.binder for a in shape.arity()] == [0]
    flat = flatten_premise_family(TWO_SIG, fam)
    assert flat[1].form is JudgementForm.TY_EQ
    assert flat[1].head is None


def test_realise_pi_boundary_with_both_symbols():
    spec = mltt_pi_presented()
    pi_boundary = spec.rules[0].boundary
    sig = Signature(
        (
            Symbol("Pi", TY, arity((TY, 0), (TY, 1))),
            Symbol("Sigma", TY, arity((TY, 0), (TY, 1))),
            Symbol("c", TM, ()),
        )
    )
    rule_pi = realise_rule_boundary(sig, pi_boundary, 0)
    rule_sigma = realise_rule_boundary(sig, pi_boundary, 1)
    assert rule_pi.conclusion.head.sym == 0
    assert rule_sigma.conclusion.head.sym == 1
    assert rule_pi.premises == rule_sigma.premises
    assert is_tight(rule_pi) and is_tight(rule_sigma)
    with pytest.raises(SymbolArityMismatch):
        realise_rule_boundary(sig, pi_boundary, 2)
    with pytest.raises(SymbolRequired):
        realise_rule_boundary(sig, pi_boundary, None)


def test_realise_equality_boundary():
    spec = mltt_pi_presented()
    beta_boundary = spec.rules[3].boundary
    sig, theory, _ = elaborate_theory(spec)
    rule = realise_rule_boundary(sig, beta_boundary, None)
    assert rule == theory.rule(theory.rule_index("beta"))
    with pytest.raises(SymbolForbidden):
        realise_rule_boundary(sig, beta_boundary, 0)


def test_elaborate_mltt_matches_bundled():
    spec = mltt_pi_presented()
    sig, theory, report = elaborate_theory(spec)
    ref, _ = mltt_pi()
    assert report.acceptable
    assert theory.rules == ref.rules
    assert [s.name for s in sig.symbols] == ["Pi", "lam", "app"]
    wf = check_well_founded_theory(theory, None)
    assert wf.ok, wf.diagnostics


def test_elaborate_rejects_stage_violations():
    spec = mltt_pi_presented()
    # move beta before lam and app: its expressions cite later symbols
    bad_rules = (spec.rules[0], spec.rules[3], spec.rules[1], spec.rules[2])
    bad = WellPresentedTheorySpec(
        spec.kind,
        FinitePoset.of(4, [(0, 1), (0, 2), (0, 3)]),
        bad_rules,
        spec.witnesses,
    )
    with pytest.raises(StageViolation):
        elaborate_theory(bad)


def test_incomparable_rules_accepted():
    # Pi and a second product-like symbol with no order between them
    spec = mltt_pi_presented()
    pi_rule = spec.rules[0]
    sigma_rule = spec.rules[0].__class__("Sigma", spec.rules[0].boundary)
    two = WellPresentedTheorySpec(
        spec.kind, FinitePoset.of(2, []), (pi_rule, sigma_rule), {}
    )
    sig, theory, report = elaborate_theory(two)
    assert [s.name for s in sig.symbols] == ["Pi", "Sigma"]
    assert report.acceptable


def test_is_sequential_rule_validator():
    theory, _ = mltt_pi()
    for name in ("Pi-form", "lam-intro", "app-elim"):
        assert is_sequential_rule(theory.rule(theory.rule_index(name)))
    # reversing the premises breaks sequentiality
    pi = theory.rule(theory.rule_index("Pi-form"))
    from gtt.rules import RawRule

    reversed_pi = RawRule(pi.arity, pi.premises[::-1], pi.conclusion, pi.meta_names)
    assert not is_sequential_rule(reversed_pi)
