"""Algebraic operations and their canonical grades.

An n-ary algebraic operation is a natural family of maps (T X)^n → T X over
which the multiplication distributes from the right.  Over a monoidal (non
skew) canonical grading, restricting an operation to a tuple of input grades
and factorizing picks out a least output grade; the graded operation is the
same underlying map with grade bookkeeping, and every one of its components
is surjective onto the graded codomain.

Skew instances (shapewise state) are refused with ``SkewNotSupported``.
Table-defined operations are validated for naturality over the probe family;
the algebraicity law itself is only machine-checkable for operations that,
like the built-in ones, are defined at arbitrary carrier sets.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from .algebra import LawReport
from .engine import tensor_semantic, unit_grade
from .errors import (
    BoundExceeded,
    ConfigError,
    GradeViolation,
    NotAGrading,
    SkewNotSupported,
    SquareDoesNotCommute,
    UnsupportedKind,
)
from .finset import FinFn, FinSet, all_functions, all_surjections, pair_token, pullback
from .grades import (
    Element,
    GradeObject,
    ListElem,
    WriterElem,
    carrier,
    grade_leq,
    member,
    mk_s,
    tmap,
)
from .monads import ListMonad, MonadInstance, WriterMonad


def _require_monoidal(m: MonadInstance) -> None:
    if m.flavor != "monoidal":
        raise SkewNotSupported(
            f"operation grading needs a monoidal instance; {m.name} is {m.flavor}"
        )


class AlgebraicOp:
    """An n-ary operation given by a per-probe function on element tuples."""

    def __init__(
        self,
        name: str,
        arity: int,
        apply: Callable[[FinSet, tuple[Element, ...]], Element],
        total: bool = True,
    ):
        self.name = name
        self.arity = arity
        self._apply = apply
        self.total = total  # defined at arbitrary carrier sets, not just probes

    def at(self, probe: FinSet, args: tuple[Element, ...]) -> Element:
        if len(args) != self.arity:
            raise ValueError(f"{self.name} expects {self.arity} arguments")
        return self._apply(probe, args)


def writer_action(m: WriterMonad, z: str) -> AlgebraicOp:
    """Unary writer operation prepending a fixed log entry."""
    if z not in m.monoid.elements:
        raise ConfigError(f"{z!r} is not a monoid element")

    def apply(probe, args):
        (t,) = args
        return WriterElem(m.monoid.mult(z, t.log), t.value, t.probe)

    return AlgebraicOp(f"writer-act[{z}]", 1, apply)


def list_concat(m: ListMonad) -> AlgebraicOp:
    """Binary list concatenation, subject to the length bound."""

    def apply(probe, args):
        a, b = args
        items = a.items + b.items
        if len(items) > m.bound:
            raise BoundExceeded(
                f"concatenation of length {len(items)} exceeds bound {m.bound}"
            )
        return ListElem(items, a.probe)

    return AlgebraicOp("concat", 2, apply)


def identity_op(name: str = "identity") -> AlgebraicOp:
    return AlgebraicOp(name, 1, lambda probe, args: args[0])


def custom_op(m: MonadInstance, name: str, arity: int, table) -> AlgebraicOp:
    """Operation from per-probe lookup tables keyed by element tokens.

    ``table`` maps a probe key (the probe's elements joined with ``|``) to a
    mapping from ``;``-joined argument tokens to the result token.  Naturality
    over the probe family is validated; algebraicity cannot be checked for
    table-defined operations and is the caller's responsibility.
    """
    decode_at: dict[FinSet, dict[str, Element]] = {}

    def probe_key(probe: FinSet) -> str:
        return "|".join(probe.elements)

    def apply(probe, args):
        key = probe_key(probe)
        if key not in table:
            raise UnsupportedKind(f"{name} has no table for probe {key!r}")
        if probe not in decode_at:
            decode_at[probe] = carrier(m.elements(probe))[1]
        args_key = ";".join(t.token() for t in args)
        try:
            tok = table[key][args_key]
        except KeyError:
            raise ConfigError(f"{name} table missing entry {args_key!r} at {key!r}")
        try:
            return decode_at[probe][tok]
        except KeyError:
            raise ConfigError(f"{name} table result {tok!r} is not an element")

    op = AlgebraicOp(name, arity, apply, total=False)
    _validate_naturality(m, op)
    return op


def _validate_naturality(m: MonadInstance, op: AlgebraicOp, budget: int = 2000) -> None:
    checked = 0
    for x in m.probes():
        if len(x) == 0:
            continue
        pools = [list(m.elements(x))] * op.arity
        for y in m.probes():
            if len(y) == 0:
                continue
            for f in all_functions(x, y):
                for args in itertools.product(*pools):
                    try:
                        lhs = tmap(f, op.at(x, args))
                        rhs = op.at(y, tuple(tmap(f, t) for t in args))
                    except BoundExceeded:
                        continue
                    if lhs != rhs:
                        raise ConfigError(
                            f"{op.name} is not natural along {f!r}"
                        )
                    checked += 1
                    if checked >= budget:
                        return


def check_algebraic(
    m: MonadInstance, op: AlgebraicOp, budget: int = 2000, seed: int = 0
) -> LawReport:
    """Multiplication distributes over the operation from the right."""
    if not op.total:
        raise UnsupportedKind(
            f"{op.name} is table-defined; algebraicity needs a total operation"
        )
    rng = random.Random(seed)
    probe = min((p for p in m.probes() if len(p) >= 1), key=len)
    level1 = m.elements(probe)
    tokens, decode = carrier(level1)
    count = m.element_count(tokens)
    if count ** max(op.arity, 1) <= budget:
        pool = m.elements(tokens)
        tuples = list(itertools.product(pool, repeat=op.arity))
    else:
        tuples = [
            tuple(m.random_element(rng, tokens) for _ in range(op.arity))
            for _ in range(budget)
        ]
    checked = 0
    for ts in tuples:
        try:
            flat = tuple(m.mu(t, decode, probe=probe) for t in ts)
            lhs = op.at(probe, flat)
            rhs = m.mu(op.at(tokens, ts), decode, probe=probe)
        except BoundExceeded:
            continue
        if lhs != rhs:
            return LawReport(
                f"algebraic[{op.name}]",
                False,
                ";".join(t.token() for t in ts),
            )
        checked += 1
    return LawReport(f"algebraic[{op.name}]", True, detail=f"checked={checked}")


def canonical_output_grade(
    m: MonadInstance, op: AlgebraicOp, inputs: tuple[GradeObject, ...]
) -> GradeObject:
    """Least grade through which the operation restricted to the inputs factors."""
    _require_monoidal(m)
    if len(inputs) != op.arity:
        raise ValueError("one input grade per argument")
    data = {}
    for x in m.probes():
        pools = [mk_s(r, x) for r in inputs]
        data[x] = frozenset(
            op.at(x, args) for args in itertools.product(*pools)
        )
    return m.mk_sigma(data, validate=False)


@dataclass(frozen=True)
class PMorphism:
    """An operation squeezed between input grades and an output grade.

    In the canonical-inclusion realization the underlying map is the
    operation itself, so the data is the grade bookkeeping plus the checked
    requirement that the operation maps the input subfunctors into the
    output subfunctor.
    """

    inputs: tuple[GradeObject, ...]
    output: GradeObject

    @staticmethod
    def build(
        m: MonadInstance, op: AlgebraicOp, inputs: tuple[GradeObject, ...],
        output: GradeObject,
    ) -> "PMorphism":
        _require_monoidal(m)
        for x in m.probes():
            pools = [mk_s(r, x) for r in inputs]
            for args in itertools.product(*pools):
                got = op.at(x, args)
                if not member(output, got):
                    raise SquareDoesNotCommute(
                        f"{op.name}{tuple(t.token() for t in args)} = "
                        f"{got.token()} escapes {output.label()}"
                    )
        return PMorphism(tuple(inputs), output)


@dataclass(frozen=True)
class GradedOp:
    """A graded algebraic operation: the same map, with grade bookkeeping.

    ``apply`` checks the membership contract: arguments in the tensored input
    grades, result in the tensored output grade.
    """

    name: str
    inputs: tuple[GradeObject, ...]
    output: GradeObject

    def apply(
        self,
        m: MonadInstance,
        op: AlgebraicOp,
        grade: GradeObject,
        probe: FinSet,
        args: tuple[Element, ...],
    ) -> Element:
        in_tensored = [tensor_semantic(m, r, grade) for r in self.inputs]
        for r, t in zip(in_tensored, args):
            if not member(r, t):
                raise GradeViolation(f"argument {t.token()} not in {r.label()}")
        got = op.at(probe, args)
        out = tensor_semantic(m, self.output, grade)
        if not member(out, got):
            raise GradeViolation(f"result {got.token()} escapes {out.label()}")
        return got


def psi_from_p(m: MonadInstance, op: AlgebraicOp, p: PMorphism) -> GradedOp:
    """The graded operation induced by a p-morphism (unique fill-in)."""
    _require_monoidal(m)
    return GradedOp(op.name, p.inputs, p.output)


def p_from_psi(m: MonadInstance, op: AlgebraicOp, psi: GradedOp) -> PMorphism:
    """Read the p-morphism back off the graded operation at the unit grade."""
    _require_monoidal(m)
    j = unit_grade(m)
    for r in tuple(psi.inputs) + (psi.output,):
        if tensor_semantic(m, r, j) != r:
            raise NotAGrading(
                f"{r.label()} is not fixed by the unit tensor; instance not monoidal"
            )
    return PMorphism.build(m, op, psi.inputs, psi.output)


def graded_welltyped_report(
    m: MonadInstance,
    op: AlgebraicOp,
    gop: GradedOp,
    grades: Iterable[GradeObject],
    budget: int = 40000,
) -> LawReport:
    """Every component of the graded operation lands in its graded codomain."""
    checked = 0
    skipped = 0
    for s in grades:
        try:
            in_tensored = [tensor_semantic(m, r, s) for r in gop.inputs]
            out_tensored = tensor_semantic(m, gop.output, s)
        except BoundExceeded:
            skipped += 1
            continue
        for x in m.probes():
            pools = [mk_s(r, x) for r in in_tensored]
            for args in itertools.product(*pools):
                try:
                    got = op.at(x, args)
                except BoundExceeded:
                    continue
                if not member(out_tensored, got):
                    return LawReport(
                        f"graded-welltyped[{op.name}]",
                        False,
                        f"S={s.label()};args=" + ";".join(t.token() for t in args),
                    )
                checked += 1
                if checked >= budget:
                    return LawReport(
                        f"graded-welltyped[{op.name}]", True, detail=f"budgeted at {budget}"
                    )
    return LawReport(f"graded-welltyped[{op.name}]", True, detail=f"checked={checked}")


def graded_algebraicity_report(
    m: MonadInstance,
    op: AlgebraicOp,
    gop: GradedOp,
    grades: Iterable[GradeObject],
    budget: int = 4000,
    seed: int = 0,
) -> LawReport:
    """The graded-operation square against the graded multiplication."""
    if not op.total:
        raise UnsupportedKind(
            f"{op.name} is table-defined; the graded square needs a total operation"
        )
    rng = random.Random(seed)
    probe = min((p for p in m.probes() if len(p) >= 1), key=len)
    checked = 0
    gl = list(grades)
    for s in gl:
        for s2 in gl:
            inner = mk_s(s2, probe)
            tokens, decode = carrier(inner)
            try:
                in_tensored = [tensor_semantic(m, r, s) for r in gop.inputs]
            except BoundExceeded:
                continue
            pools = []
            for r in in_tensored:
                pool = sorted(mk_s(r, tokens))
                if len(pool) > 12:
                    pool = [pool[rng.randrange(len(pool))] for _ in range(12)]
                pools.append(pool)
            for ws in itertools.product(*pools):
                try:
                    flat = tuple(m.mu(w, decode, probe=probe) for w in ws)
                    lhs = op.at(probe, flat)
                    rhs = m.mu(op.at(tokens, ws), decode, probe=probe)
                except BoundExceeded:
                    continue
                if lhs != rhs:
                    return LawReport(
                        f"graded-algebraic[{op.name}]",
                        False,
                        f"S={s.label()};S'={s2.label()}",
                    )
                checked += 1
                if checked >= budget:
                    return LawReport(
                        f"graded-algebraic[{op.name}]", True,
                        detail=f"budgeted at {budget}",
                    )
    return LawReport(
        f"graded-algebraic[{op.name}]", True, detail=f"checked={checked}"
    )


def e_membership_report(
    m: MonadInstance,
    op: AlgebraicOp,
    gop: GradedOp,
    grades: Iterable[GradeObject],
) -> LawReport:
    """Each graded component is surjective onto its graded codomain.

    Holds when the output grade is the canonical one (the image); not
    expected for strictly larger output grades.
    """
    skipped = 0
    for s in grades:
        try:
            in_tensored = [tensor_semantic(m, r, s) for r in gop.inputs]
            out_tensored = tensor_semantic(m, gop.output, s)
        except BoundExceeded:
            skipped += 1
            continue
        for x in m.probes():
            pools = [mk_s(r, x) for r in in_tensored]
            image = set()
            for args in itertools.product(*pools):
                try:
                    image.add(op.at(x, args))
                except BoundExceeded:
                    continue  # never a witness for an in-bound target
            target = mk_s(out_tensored, x)
            if image != target:
                missing = sorted(t.token() for t in target - image)[:3]
                return LawReport(
                    f"e-membership[{op.name}]",
                    False,
                    f"S={s.label()};probe={'|'.join(x.elements)};missing={missing}",
                )
    return LawReport(
        f"e-membership[{op.name}]", True,
        detail=f"skipped={skipped}" if skipped else None,
    )


def check_universal(
    m: MonadInstance,
    op: AlgebraicOp,
    inputs: tuple[GradeObject, ...],
    alt_output: GradeObject,
    grades: Optional[Iterable[GradeObject]] = None,
) -> LawReport:
    """The canonical output grade includes into any other valid output grade,
    compatibly with the graded components."""
    _require_monoidal(m)
    try:
        PMorphism.build(m, op, tuple(inputs), alt_output)
    except SquareDoesNotCommute as exc:
        raise NotAGrading(str(exc))
    canonical = canonical_output_grade(m, op, tuple(inputs))
    if not grade_leq(canonical, alt_output):
        return LawReport(
            f"universal[{op.name}]",
            False,
            f"canonical={canonical.label()};alt={alt_output.label()}",
        )
    sample = list(grades) if grades is not None else [unit_grade(m), m.full_grade()]
    for s in sample:
        try:
            lhs = tensor_semantic(m, canonical, s)
            rhs = tensor_semantic(m, alt_output, s)
        except BoundExceeded:
            continue
        if not grade_leq(lhs, rhs):
            return LawReport(
                f"universal[{op.name}]",
                False,
                f"S={s.label()};canonical={lhs.label()};alt={rhs.label()}",
            )
    return LawReport(f"universal[{op.name}]", True)


def standing_assumption_reports(max_size: int = 3) -> list[LawReport]:
    """The two product assumptions under which operation grading works."""
    sizes = [FinSet(f"e{i}" for i in range(n)) for n in range(1, max_size + 1)]
    # finite products of surjections are surjections
    counter = None
    for x1 in sizes:
        for y1 in sizes:
            for e1 in all_surjections(x1, y1):
                for x2 in sizes:
                    for y2 in sizes:
                        for e2 in all_surjections(x2, y2):
                            dom = FinSet(
                                pair_token(a, b) for a in x1 for b in x2
                            )
                            cod = FinSet(
                                pair_token(a, b) for a in y1 for b in y2
                            )
                            prod = FinFn(
                                dom,
                                cod,
                                {
                                    pair_token(a, b): pair_token(e1(a), e2(b))
                                    for a in x1
                                    for b in x2
                                },
                            )
                            if not prod.is_surjective():
                                counter = f"{e1!r};{e2!r}"
    reports = [
        LawReport("products-of-surjections", counter is None, counter)
    ]
    # the product/composition comparison map is the identity in the pointwise
    # representation: (prod_i X_i)(Y A) and prod_i (X_i (Y A)) are the same
    # tuples; record the structural fact with a spot cardinality check
    a, b = sizes[0], sizes[-1]
    lhs = [(x, y) for x in a for y in b]
    rhs = [(x, y) for x in a for y in b]
    ok = lhs == rhs
    reports.append(
        LawReport(
            "product-composition-comparison",
            ok,
            None if ok else "pointwise tuples differ",
            detail="identity map in the pointwise-product presentation",
        )
    )
    return reports
