"""The gtt command line: load theory and derivation files, run checks and
metatheorem transformers, emit reports and transformed objects.

Exit codes: 0 all requested checks pass, 1 a check fails, 2 bad input.
Every emitted derivation or rule is re-checked before printing.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import KernelError, ParseError
from .judgements import JudgementForm, presuppositions
from .jsonio import (
    derivation_from_json,
    derivation_to_json,
    dumps,
    expr_from_json,
    expr_to_json,
    judgement_to_json,
    context_from_json,
    load_theory_file,
    loads,
    rule_to_json,
    theory_to_json,
)
from .metatheory import (
    check_acceptable_theory,
    check_well_founded_theory,
    derive_presuppositions,
    eliminate_substitution,
    invert,
    is_canonical_inversion,
    is_substitution_free,
    natural_type,
    unique_typing_acceptable,
)
from .rules import congruence_rule
from .syntax import mv_extend_signature
from .theories import check_theory_derivation


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"no such file: {e.filename}", file=sys.stderr)
        return 2
    except KernelError as e:
        print(f"check failed: {e}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gtt",
        description="a kernel in which dependent type theories are data",
    )
    sub = parser.add_subparsers(required=True)

    def cmd(name, run, help):
        p = sub.add_parser(name, help=help)
        p.set_defaults(run=run)
        p.add_argument("--out", type=Path, help="write the result here instead of stdout")
        p.add_argument("--pretty", action="store_true", help="indent emitted JSON")
        p.add_argument("--json", action="store_true", help="machine-readable report")
        return p

    p = cmd("check-theory", cmd_check_theory, "check a theory file's well-behavedness")
    p.add_argument("theory", type=Path)
    p.add_argument("--acceptable", action="store_true")
    p.add_argument("--well-founded", action="store_true")
    p.add_argument("--well-presented", action="store_true")
    p.add_argument("--weak", action="store_true", help="check weak presuppositivity")

    p = cmd("check-derivation", cmd_check_derivation, "check a derivation against a theory")
    p.add_argument("theory", type=Path)
    p.add_argument("derivation", type=Path)

    p = cmd("flatten", cmd_flatten, "elaborate a well-presented spec to a raw theory")
    p.add_argument("theory", type=Path)

    p = cmd("congruence", cmd_congruence, "emit the congruence rule of an object rule")
    p.add_argument("theory", type=Path)
    p.add_argument("rule")

    p = cmd("presup", cmd_presup, "derive the presuppositions of a derivation's conclusion")
    p.add_argument("theory", type=Path)
    p.add_argument("derivation", type=Path)

    p = cmd("elim-subst", cmd_elim_subst, "eliminate substitution nodes from a derivation")
    p.add_argument("theory", type=Path)
    p.add_argument("derivation", type=Path)

    p = cmd("natural-type", cmd_natural_type, "compute the natural type of a term")
    p.add_argument("theory", type=Path)
    p.add_argument("term", help="term expression as JSON")
    p.add_argument("--cxt", default="[]", help="context as JSON (default empty)")

    p = cmd("invert", cmd_invert, "canonical form of a term or type derivation")
    p.add_argument("theory", type=Path)
    p.add_argument("derivation", type=Path)

    p = cmd("unique-typing", cmd_unique_typing, "derive the type equality of two typings")
    p.add_argument("theory", type=Path)
    p.add_argument("first", type=Path)
    p.add_argument("second", type=Path)

    p = cmd("replace-step", cmd_replace_step, "run a replacement script against a theory")
    p.add_argument("theory", type=Path)
    p.add_argument("script", type=Path)

    return parser


def _load_raw(path: Path):
    kind, payload = load_theory_file(loads(path.read_text()))
    if kind == "spec":
        from .presentation import elaborate_theory

        spec = payload
        _, theory, report = elaborate_theory(spec)
        if not report.acceptable:
            raise KernelError("the elaborated theory is not acceptable")
        witnesses = {}
        return theory, witnesses, None
    return payload


def _emit(args, data) -> None:
    text = dumps(data, pretty=args.pretty)
    if args.out:
        args.out.write_text(text + "\n")
    else:
        print(text)


def cmd_check_theory(args) -> int:
    kind, payload = load_theory_file(loads(args.theory.read_text()))
    report_json = {"file": str(args.theory), "checks": {}}
    failed = False
    if kind == "spec":
        from .presentation import elaborate_theory

        try:
            _, theory, report = elaborate_theory(payload)
            elaborated = True
        except KernelError as e:
            report_json["checks"]["well-presented"] = {"ok": False, "diagnostics": [str(e)]}
            _print_report(args, report_json, ["well-presented: FAIL ({})".format(e)])
            return 1
        lines = []
        if args.well_presented or not (args.acceptable or args.well_founded):
            report_json["checks"]["well-presented"] = {"ok": True, "diagnostics": []}
            lines.append("well-presented: ok")
        if args.acceptable or args.well_founded:
            failed |= _acceptability_into(args, theory, {}, report_json, lines, report)
        if args.well_founded:
            wf = check_well_founded_theory(theory, None)
            report_json["checks"]["well-founded"] = {
                "ok": wf.ok, "diagnostics": wf.diagnostics,
            }
            lines.append(f"well-founded: {'ok' if wf.ok else 'FAIL'}")
            failed |= not wf.ok
        _print_report(args, report_json, lines)
        return 1 if failed else 0

    theory, witnesses, order = payload
    lines = []
    if args.well_presented:
        report_json["checks"]["well-presented"] = {
            "ok": False,
            "diagnostics": ["not a well-presented spec file"],
        }
        lines.append("well-presented: FAIL (not a spec file)")
        failed = True
    if args.acceptable or not (args.well_founded or args.well_presented):
        failed |= _acceptability_into(args, theory, witnesses, report_json, lines)
    if args.well_founded:
        wf = check_well_founded_theory(theory, order, witnesses)
        report_json["checks"]["well-founded"] = {"ok": wf.ok, "diagnostics": wf.diagnostics}
        lines.append(f"well-founded: {'ok' if wf.ok else 'FAIL'}")
        for d in wf.diagnostics:
            lines.append(f"  - {d}")
        failed |= not wf.ok
    _print_report(args, report_json, lines)
    return 1 if failed else 0


def _acceptability_into(args, theory, witnesses, report_json, lines, ready=None) -> bool:
    report = ready or check_acceptable_theory(theory, witnesses)
    report_json["checks"]["acceptable"] = {
        "ok": report.acceptable,
        "tight": report.tight,
        "presuppositive": report.presuppositive,
        "substitutive": report.substitutive,
        "congruous": report.congruous,
        "rules": [
            {
                "name": r.name,
                "tight": r.tight,
                "presuppositive": r.presuppositive,
                "empty_conclusion_context": r.empty_conclusion_context,
            }
            for r in report.rules
        ],
        "diagnostics": report.diagnostics,
    }
    lines.append(f"acceptable: {'ok' if report.acceptable else 'FAIL'}")
    for flag in ("tight", "presuppositive", "substitutive", "congruous"):
        lines.append(f"  {flag}: {'ok' if getattr(report, flag) else 'FAIL'}")
    if not report.acceptable:
        for d in report.diagnostics[:10]:
            lines.append(f"  - {d}")
    return not report.acceptable


def _print_report(args, report_json, lines) -> None:
    if args.json:
        _emit(args, report_json)
    else:
        text = "\n".join(lines)
        if args.out:
            args.out.write_text(text + "\n")
        else:
            print(text)


def _load_derivation(theory, path: Path, witnesses=None):
    data = loads(path.read_text())
    hyps = ()
    if isinstance(data, dict) and "derivation" in data:
        d = derivation_from_json(theory, theory.signature, data["derivation"])
    else:
        d = derivation_from_json(theory, theory.signature, data)
    return d, hyps


def cmd_check_derivation(args) -> int:
    theory, witnesses, _ = _load_raw(args.theory)
    d, hyps = _load_derivation(theory, args.derivation)
    conclusion = check_theory_derivation(theory, hyps, d)
    _emit(args, {"ok": True, "conclusion": judgement_to_json(theory.signature, conclusion)})
    return 0


def cmd_flatten(args) -> int:
    kind, payload = load_theory_file(loads(args.theory.read_text()))
    if kind != "spec":
        print("flatten expects a well-presented spec file", file=sys.stderr)
        return 2
    from .presentation import elaborate_theory

    _, theory, report = elaborate_theory(payload)
    if not report.acceptable:
        print("elaboration produced a non-acceptable theory", file=sys.stderr)
        return 1
    _emit(args, theory_to_json(theory))
    return 0


def cmd_congruence(args) -> int:
    theory, _, _ = _load_raw(args.theory)
    idx = theory.rule_index(args.rule)
    cong = congruence_rule(theory.signature, theory.rule(idx))
    # round-trip discipline: what we print must re-check structurally
    from .jsonio import rule_from_json

    data = rule_to_json(theory.signature, cong, f"{args.rule}-cong")
    assert rule_from_json(theory.signature, data) == cong
    _emit(args, data)
    return 0


def cmd_presup(args) -> int:
    theory, witnesses, _ = _load_raw(args.theory)
    d, hyps = _load_derivation(theory, args.derivation)
    conclusion = check_theory_derivation(theory, hyps, d)
    outs = derive_presuppositions(theory, d, witnesses)
    targets = presuppositions(conclusion)
    emitted = []
    for out, target in zip(outs, targets):
        got = check_theory_derivation(theory, hyps, out)
        if got != target:
            raise KernelError("presupposition derivation does not re-check")
        emitted.append(
            {
                "judgement": judgement_to_json(theory.signature, target),
                "derivation": derivation_to_json(theory, theory.signature, out),
            }
        )
    _emit(args, emitted)
    return 0


def cmd_elim_subst(args) -> int:
    theory, _, _ = _load_raw(args.theory)
    d, hyps = _load_derivation(theory, args.derivation)
    before = check_theory_derivation(theory, hyps, d)
    out = eliminate_substitution(theory, d)
    after = check_theory_derivation(theory, hyps, out)
    if after != before or not is_substitution_free(out):
        raise KernelError("elimination result does not re-check")
    _emit(args, derivation_to_json(theory, theory.signature, out))
    return 0


def cmd_natural_type(args) -> int:
    theory, _, _ = _load_raw(args.theory)
    ctx = context_from_json(theory.signature, loads(args.cxt))
    term = expr_from_json(theory.signature, loads(args.term), ctx.scope)
    ty = natural_type(theory, ctx, term)
    _emit(args, expr_to_json(theory.signature, ty))
    return 0


def cmd_invert(args) -> int:
    theory, witnesses, _ = _load_raw(args.theory)
    d, hyps = _load_derivation(theory, args.derivation)
    before = check_theory_derivation(theory, hyps, d)
    out = invert(theory, d, witnesses)
    after = check_theory_derivation(theory, hyps, out)
    if after != before or not is_canonical_inversion(theory, out):
        raise KernelError("inversion result does not re-check")
    _emit(args, derivation_to_json(theory, theory.signature, out))
    return 0


def cmd_unique_typing(args) -> int:
    theory, witnesses, _ = _load_raw(args.theory)
    d1, _ = _load_derivation(theory, args.first)
    d2, _ = _load_derivation(theory, args.second)
    out = unique_typing_acceptable(theory, d1, d2, witnesses)
    check_theory_derivation(theory, (), out)
    _emit(args, derivation_to_json(theory, theory.signature, out))
    return 0


def cmd_replace_step(args) -> int:
    theory, witnesses, _ = _load_raw(args.theory)
    script = loads(args.script.read_text())
    from .maps import (
        EquationStep,
        ReplacementBuilder,
        SymbolStep,
        sequential_boundary_spec,
    )
    from .jsonio import rule_from_json

    builder = ReplacementBuilder(theory)
    for step in script.get("steps", []):
        kind = step.get("kind")
        if kind == "symbol":
            spec = _script_boundary(builder, step)
            alpha = spec.arity()
            ext = mv_extend_signature(theory.signature, alpha, spec.premises.meta_names())
            realiser = expr_from_json(ext, step["realiser"], 0)
            witness = derivation_from_json(theory, ext, step["witness"])
            builder.add_symbol(SymbolStep(step["name"], spec, realiser, witness))
        elif kind == "equation":
            rule = rule_from_json(builder.signature, step["rule"])
            ext = mv_extend_signature(theory.signature, rule.arity, rule.meta_names)
            witness = derivation_from_json(theory, ext, step["witness"])
            builder.add_equation(EquationStep(step["name"], rule, witness))
        else:
            raise ParseError(f"unknown step kind {kind!r}")
    out = {
        "theory": theory_to_json(builder.theory()),
        "well_founded": builder.check_well_founded(),
        "symbol_images": [
            expr_to_json(
                mv_extend_signature(
                    theory.signature, builder.signature.symbol(i).arity
                ),
                e,
            )
            for i, e in enumerate(builder.syntax_map().exprs)
        ],
    }
    _emit(args, out)
    return 0


def _script_boundary(builder, step):
    from .jsonio import _BOUNDARY_KEYS, expr_from_json as efj
    from .maps import sequential_boundary_spec
    from .syntax import Argument, TM as _TM, TY as _TY

    bsig = builder.signature
    raw_premises = step.get("premises", [])
    names = tuple(p.get("name", f"p{k}") for k, p in enumerate(raw_premises))
    premises = []
    sub_args: list[Argument] = []
    obj_names: list[str] = []
    for k, p in enumerate(raw_premises):
        form = JudgementForm(p["form"])
        sub_sig = mv_extend_signature(bsig, tuple(sub_args), tuple(obj_names))
        seq = tuple(
            efj(sub_sig, t, pos) for pos, t in enumerate(p.get("cxt_seq", []))
        )
        scope = len(seq)
        slots = tuple(
            efj(sub_sig, p.get("boundary", {})[key], scope)
            for key in _BOUNDARY_KEYS[form]
        )
        premises.append((seq, form, slots))
        if form.is_object:
            sub_args.append(Argument(_TY if form is JudgementForm.IS_TY else _TM, scope))
            obj_names.append(names[k])
    form = JudgementForm(step["conclusion_form"])
    full_sig = mv_extend_signature(bsig, tuple(sub_args), tuple(obj_names))
    conclusion_slots = tuple(
        efj(full_sig, step.get("boundary", {})[key], 0) for key in _BOUNDARY_KEYS[form]
    )
    return sequential_boundary_spec(
        bsig.kind, tuple(premises), form, conclusion_slots, names
    )


if __name__ == "__main__":
    sys.exit(main())
