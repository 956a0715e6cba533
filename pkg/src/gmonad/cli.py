"""Batch front end: law suites, grade inference, poset export, operation grading.

Exit codes: 0 success, 1 law failure or tensor mismatch, 2 configuration or
parse error, 3 grade carrier over the enumeration bound, 4 operation grading
requested on a skew instance.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from typing import Optional

from .algebra import LawReport, check_left_normal, check_skew_laws
from .engine import (
    CanonicalGrading,
    build_canonical,
    canonicity_morphism,
    closed_form_agreement_report,
    getput_grading,
    graded_mu_report,
    max_grades_bound,
    nearest_getput,
    tensor_closed_form,
    unit_least_report,
)
from .errors import (
    BoundExceeded,
    CarrierTooLarge,
    ConfigError,
    GmError,
    SkewNotSupported,
)
from .finset import FinFn, FinSet
from .grades import (
    Element,
    ListElem,
    ReaderElem,
    StateElem,
    WriterElem,
    grade_leq,
    grade_to_json,
    grade_from_json,
)
from .monads import (
    ListMonad,
    MonadInstance,
    ReaderMonad,
    StateMonad,
    WriterMonad,
    monad_from_config,
)
from .ops import (
    AlgebraicOp,
    canonical_output_grade,
    check_algebraic,
    custom_op,
    e_membership_report,
    list_concat,
    mk_s,
    psi_from_p,
    PMorphism,
    standing_assumption_reports,
    writer_action,
)
from .shapes import (
    check_coincidence,
    check_stability,
    grade_inclusion,
    shape_bijection_report,
    shape_probes,
)

EXIT_OK = 0
EXIT_LAW_FAILURE = 1
EXIT_CONFIG = 2
EXIT_CARRIER = 3
EXIT_SKEW = 4

NAME = r"[A-Za-z0-9_.\-]+"


def _load_json(arg: str):
    """Inline JSON if the argument looks like a document, else a file path."""
    text = arg
    if not arg.lstrip().startswith(("{", "[")):
        try:
            with open(arg) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read {arg!r}: {exc}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}")


# ---------------------------------------------------------------------------
# Element literals


def parse_element(m: MonadInstance, literal: str) -> Element:
    """Parse an element literal for the monad.

    Writer: ``(z, x)``.  Reader: ``{s0:x, s1:y}``.  State:
    ``{s0:(s1,x), s1:(s1,y)}``.  List: ``[a,b]`` (``[]`` for the empty list).
    """
    text = literal.strip()
    if isinstance(m, WriterMonad):
        got = re.fullmatch(r"\(\s*(%s)\s*,\s*(%s)\s*\)" % (NAME, NAME), text)
        if not got:
            raise ConfigError(f"bad writer literal {literal!r}")
        z, x = got.groups()
        if z not in m.monoid.elements:
            raise ConfigError(f"{z!r} is not a monoid element")
        return WriterElem(z, x, FinSet([x]))
    if isinstance(m, ListMonad):
        got = re.fullmatch(r"\[\s*((?:%s)(?:\s*,\s*(?:%s))*)?\s*\]" % (NAME, NAME), text)
        if not got:
            raise ConfigError(f"bad list literal {literal!r}")
        items = tuple(s.strip() for s in got.group(1).split(",")) if got.group(1) else ()
        if len(items) > m.bound:
            raise ConfigError(f"list longer than the bound {m.bound}")
        return ListElem(items, FinSet(set(items)))
    if isinstance(m, ReaderMonad):
        graph = _parse_graph(text, r"(%s)" % NAME)
        _require_total(m.states, graph, literal)
        probe = FinSet(set(graph.values()))
        return ReaderElem(FinFn(m.states, probe, graph))
    if isinstance(m, StateMonad):
        graph = _parse_graph(text, r"\(\s*(%s)\s*,\s*(%s)\s*\)" % (NAME, NAME))
        _require_total(m.states, graph, literal)
        update, output = {}, {}
        for v, (w, x) in graph.items():
            if w not in m.states:
                raise ConfigError(f"{w!r} is not a state")
            update[v], output[v] = w, x
        probe = FinSet(set(output.values()))
        return StateElem(
            FinFn(m.states, m.states, update), FinFn(m.states, probe, output)
        )
    raise ConfigError(f"no element literals for {m.name}")


def _parse_graph(text: str, value_pattern: str) -> dict:
    if not (text.startswith("{") and text.endswith("}")):
        raise ConfigError(f"bad graph literal {text!r}")
    body = text[1:-1].strip()
    graph = {}
    if not body:
        return graph
    entry = re.compile(r"\s*(%s)\s*:\s*%s\s*$" % (NAME, value_pattern))
    # split on commas not inside parentheses
    parts, depth, cur = [], 0, []
    for ch in body:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    for part in parts:
        got = entry.fullmatch(part)
        if not got:
            raise ConfigError(f"bad graph entry {part.strip()!r}")
        key = got.group(1)
        value = got.groups()[1:]
        graph[key] = value[0] if len(value) == 1 else value
    return graph


def _require_total(states: FinSet, graph: dict, literal: str) -> None:
    if set(graph) != set(states.elements):
        raise ConfigError(
            f"literal {literal!r} must cover exactly the states {list(states.elements)}"
        )


# ---------------------------------------------------------------------------
# Operations from configuration


def op_from_config(m: MonadInstance, doc) -> AlgebraicOp:
    if not isinstance(doc, dict) or "op" not in doc:
        raise ConfigError("operation config must be an object with an 'op' key")
    name = doc["op"]
    if name == "writer-act":
        if not isinstance(m, WriterMonad):
            raise ConfigError("writer-act needs a writer monad")
        if "z" not in doc:
            raise ConfigError("writer-act needs the log entry 'z'")
        return writer_action(m, doc["z"])
    if name == "concat":
        if not isinstance(m, ListMonad):
            raise ConfigError("concat needs the list monad")
        return list_concat(m)
    if name == "custom":
        for key in ("name", "arity", "table"):
            if key not in doc:
                raise ConfigError(f"custom op needs {key!r}")
        return custom_op(m, doc["name"], int(doc["arity"]), doc["table"])
    raise ConfigError(f"unknown operation {name!r}")


# ---------------------------------------------------------------------------
# Law suite assembly


def law_suite(m: MonadInstance, budget: int, seed: int) -> list[LawReport]:
    """The full check-laws report list for one instance, in print order."""
    reports = list(m.law_reports(budget=budget, seed=seed))
    if not all(r.passed for r in reports):
        return reports
    grading = build_canonical(m)
    reports.extend(check_skew_laws(grading.poset))
    if m.flavor == "monoidal":
        reports.append(check_left_normal(grading.poset))
    else:
        inner = check_left_normal(grading.poset)
        reports.append(
            LawReport(
                "left-normal-fails-as-declared",
                not inner.passed,
                None if not inner.passed else "left unitor is an equality",
                detail=inner.counterexample,
            )
        )
    reports.append(unit_least_report(m, grading))
    reports.append(graded_mu_report(m, grading, budget=budget, seed=seed))
    if isinstance(m, (WriterMonad, ListMonad)):
        reports.append(closed_form_agreement_report(m, grading))
    if isinstance(m, (ListMonad, StateMonad)) and m.kind in ("list-shape", "state-shape"):
        reports.append(check_stability())
        reports.append(shape_bijection_report(m))
        probes = shape_probes(2)
        sample = grading.poset.grades
        if len(sample) > 6:
            sample = (sample[0], sample[1], sample[len(sample) // 2], sample[-1])
        for sigma in sample:
            inc = grade_inclusion(m, sigma, probes)
            got = check_coincidence(inc)
            reports.append(
                LawReport(
                    f"coincidence[{sigma.label()}]",
                    got.passed,
                    got.counterexample,
                )
            )
    if isinstance(m, StateMonad) and m.kind == "state-cw" and len(m.states) <= 3:
        _, canon_reports = canonicity_morphism(getput_grading(m), grading)
        reports.extend(canon_reports)
    if m.flavor == "monoidal" and isinstance(m, (WriterMonad, ListMonad)):
        if isinstance(m, WriterMonad):
            for z in m.monoid.elements:
                reports.append(check_algebraic(m, writer_action(m, z), budget, seed))
        else:
            reports.append(check_algebraic(m, list_concat(m), budget, seed))
        reports.extend(standing_assumption_reports())
    return reports


# ---------------------------------------------------------------------------
# Commands


def cmd_check_laws(args) -> int:
    m = monad_from_config(_load_json(args.config))
    reports = law_suite(m, budget=args.budget, seed=args.seed)
    for r in reports:
        print(r.line())
    return EXIT_OK if all(r.passed for r in reports) else EXIT_LAW_FAILURE


def cmd_infer(args) -> int:
    m = monad_from_config(_load_json(args.config))
    elem = parse_element(m, args.element)
    doc = {"monad": m.name, "principal": grade_to_json(m.principal(elem))}
    if args.getput:
        if not isinstance(m, StateMonad):
            raise ConfigError("--getput applies to state configurations")
        doc["getput"] = nearest_getput(elem)
    print(json.dumps(doc, sort_keys=True))
    return EXIT_OK


def cmd_grades(args) -> int:
    m = monad_from_config(_load_json(args.config))
    bound = max_grades_bound()
    if m.grade_count() > bound:
        print(
            f"grade carrier has {m.grade_count()} elements, over the bound {bound}",
            file=sys.stderr,
        )
        return EXIT_CARRIER
    grading = build_canonical(m)
    dot = render_dot(grading)
    with open(args.dot, "w") as fh:
        fh.write(dot)
    return EXIT_OK


def render_dot(grading: CanonicalGrading) -> str:
    """Hasse diagram of the grade poset; the unit is doubly circled."""
    gs = grading.poset.grades
    lines = ["digraph grades {", "  rankdir=BT;"]
    for g in gs:
        attrs = [f'label="{g.label()}"']
        if g == grading.unit:
            attrs.append("peripheries=2")
        lines.append(f'  "{g.label()}" [{", ".join(attrs)}];')
    for a in gs:
        for b in gs:
            if a == b or not grade_leq(a, b):
                continue
            if any(
                c != a and c != b and grade_leq(a, c) and grade_leq(c, b)
                for c in gs
            ):
                continue
            lines.append(f'  "{a.label()}" -> "{b.label()}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def cmd_op_grade(args) -> int:
    m = monad_from_config(_load_json(args.config))
    op = op_from_config(m, _load_json(args.op))
    inputs_doc = _load_json(args.inputs) if args.inputs else []
    if not isinstance(inputs_doc, list) or len(inputs_doc) != op.arity:
        raise ConfigError(f"--inputs must list {op.arity} grade documents")
    inputs = tuple(grade_from_json(d) for d in inputs_doc)
    output = canonical_output_grade(m, op, inputs)
    doc = {"op": op.name, "output": grade_to_json(output)}
    if args.emit_psi:
        psi = psi_from_p(m, op, PMorphism.build(m, op, inputs, output))
        doc["psi"] = render_psi_tables(m, op, psi)
    print(json.dumps(doc, sort_keys=True))
    return EXIT_OK


def render_psi_tables(m, op, psi) -> dict:
    """Per-grade, per-probe graphs of the graded operation."""
    from .engine import tensor_semantic

    tables: dict = {}
    for s in m.all_grades():
        try:
            in_tensored = [tensor_semantic(m, r, s) for r in psi.inputs]
        except BoundExceeded:
            continue
        per_probe = {}
        for x in m.probes():
            if len(x) == 0:
                continue
            pools = [sorted(mk_s(r, x)) for r in in_tensored]
            entries = {}
            import itertools as _it

            for arg_tuple in _it.product(*pools):
                try:
                    got = op.at(x, arg_tuple)
                except BoundExceeded:
                    continue
                entries[";".join(t.token() for t in arg_tuple)] = got.token()
            per_probe["|".join(x.elements)] = entries
        tables[s.label()] = per_probe
    return tables


def cmd_compare_tensor(args) -> int:
    m = monad_from_config(_load_json(args.config))
    if m.kind not in ("writer", "list-shape", "state-shape"):
        raise ConfigError(f"no closed form to compare for {m.name}")
    grading = build_canonical(m)
    agree = mismatch = skipped = 0
    lines = []
    for a in grading.poset.grades:
        for b in grading.poset.grades:
            try:
                closed = tensor_closed_form(m, a, b)
                oracle = grading.poset.tensor(a, b)
            except BoundExceeded:
                skipped += 1
                continue
            if oracle == closed:
                agree += 1
            else:
                mismatch += 1
                lines.append(
                    f"TENSOR {a.label()} {b.label()} MISMATCH "
                    f"oracle={oracle.label()} closed={closed.label()}"
                )
    for line in lines:
        print(line)
    print(f"TENSOR-COMPARE agree={agree} mismatch={mismatch} skipped={skipped}")
    return EXIT_OK if mismatch == 0 else EXIT_LAW_FAILURE


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="gm",
        description="canonical gradings of finite monads: law suites, "
        "effect inference, grade export, operation grading",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", required=True, help="monad config (path or inline JSON)")
        p.add_argument("--seed", type=int, default=0, help="seed for sampled checks")
        p.add_argument("--budget", type=int, default=4000, help="sampling budget")

    p = sub.add_parser("check-laws", help="run the law suites for a configuration")
    add_common(p)
    p.set_defaults(fn=cmd_check_laws)

    p = sub.add_parser("infer", help="least grade of a computation literal")
    add_common(p)
    p.add_argument("--element", required=True, help="element literal")
    p.add_argument("--getput", action="store_true",
                   help="also report the nearest get/put grade (state only)")
    p.set_defaults(fn=cmd_infer)

    p = sub.add_parser("grades", help="export the grade poset as a DOT diagram")
    add_common(p)
    p.add_argument("--dot", required=True, help="output path for the DOT file")
    p.set_defaults(fn=cmd_grades)

    p = sub.add_parser("op-grade", help="canonical output grade of an operation")
    add_common(p)
    p.add_argument("--op", required=True, help="operation config (path or inline JSON)")
    p.add_argument("--inputs", required=True, help="input grades (path or inline JSON list)")
    p.add_argument("--emit-psi", action="store_true", help="also print the graded tables")
    p.set_defaults(fn=cmd_op_grade)

    p = sub.add_parser("compare-tensor", help="image tensor vs closed formula")
    add_common(p)
    p.set_defaults(fn=cmd_compare_tensor)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CarrierTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CARRIER
    except SkewNotSupported as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SKEW
    except GmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
