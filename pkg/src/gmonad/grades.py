"""Canonical finite representations of subfunctors (grades) and elements.

A grade denotes a subfunctor of a supported monad's endofunctor.  Each kind
has a canonical form that pins the subfunctor down exactly:

* ``writer``       — a subset of the monoid carrier M
* ``reader``       — an upwards-closed set of equivalence relations on V
* ``state-cw``     — a set of (update, relation) pairs, upwards-closed in the
                     relation for each fixed update (componentwise grading)
* ``state-shape``  — a subset of the update functions V → V
* ``list-shape``   — a subset of the possible list lengths

``mk_s`` maps a grade to its set of elements at a probe set, ``mk_sigma``
recovers the canonical grade from per-probe element data, and the two are
mutually inverse on canonical forms.  ``principal`` computes the least grade
containing a single element, which is what effect inference reports.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

from .errors import KindMismatch, NotFunctorial
from .finset import _memo_hash
from .finset import (
    EquivRel,
    FinFn,
    FinSet,
    all_functions,
    disjoint_union_point,
    equiv_lattice,
    kernel,
    quotient,
    up_closure,
)

WRITER = "writer"
READER = "reader"
STATE_CW = "state-cw"
STATE_SHAPE = "state-shape"
LIST_SHAPE = "list-shape"


# ---------------------------------------------------------------------------
# Elements


@dataclass(frozen=True, order=True)
class WriterElem:
    """A writer computation (z, x) with log entry z and value x."""

    log: str
    value: str
    probe: FinSet

    def __hash__(self):
        return _memo_hash(self, ("we", self.log, self.value, self.probe))

    def token(self) -> str:
        return f"({self.log},{self.value})"


@dataclass(frozen=True, order=True)
class ReaderElem:
    """A reader computation: a function from states to values."""

    fn: FinFn

    def __hash__(self):
        return _memo_hash(self, ("re", self.fn))

    @property
    def probe(self) -> FinSet:
        return self.fn.cod

    def token(self) -> str:
        body = ",".join(f"{v}:{self.fn(v)}" for v in self.fn.dom)
        return "{%s}" % body


@dataclass(frozen=True, order=True)
class StateElem:
    """A state computation split into its update V → V and output V → X."""

    update: FinFn
    output: FinFn

    def __post_init__(self):
        if self.update.dom != self.update.cod or self.update.dom != self.output.dom:
            raise ValueError("update must be an endofunction on the output domain")

    def __hash__(self):
        return _memo_hash(self, ("se", self.update, self.output))

    @property
    def states(self) -> FinSet:
        return self.update.dom

    @property
    def probe(self) -> FinSet:
        return self.output.cod

    def token(self) -> str:
        body = ",".join(
            f"{v}:({self.update(v)},{self.output(v)})" for v in self.states
        )
        return "{%s}" % body


@dataclass(frozen=True, order=True)
class ListElem:
    """A list computation over a probe set, up to the configured bound."""

    items: tuple[str, ...]
    probe: FinSet

    def __post_init__(self):
        for x in self.items:
            if x not in self.probe:
                raise ValueError(f"list entry {x!r} not in probe")

    def __hash__(self):
        return _memo_hash(self, ("le", self.items, self.probe))

    def token(self) -> str:
        return "[%s]" % ",".join(self.items)


Element = Union[WriterElem, ReaderElem, StateElem, ListElem]


def tmap(f: FinFn, elem: Element) -> Element:
    """The functorial action T f on a single element (f : probe → Y)."""
    if isinstance(elem, WriterElem):
        if elem.probe != f.dom:
            raise KindMismatch("probe mismatch in tmap")
        return WriterElem(elem.log, f(elem.value), f.cod)
    if isinstance(elem, ReaderElem):
        return ReaderElem(f.compose(elem.fn))
    if isinstance(elem, StateElem):
        return StateElem(elem.update, f.compose(elem.output))
    if isinstance(elem, ListElem):
        if elem.probe != f.dom:
            raise KindMismatch("probe mismatch in tmap")
        return ListElem(tuple(f(x) for x in elem.items), f.cod)
    raise KindMismatch(f"unknown element {elem!r}")


def carrier(elems: Iterable[Element]) -> tuple[FinSet, dict[str, Element]]:
    """Name each element by its token, producing a probe set plus decoder."""
    decode = {e.token(): e for e in elems}
    return FinSet(decode.keys()), decode


# ---------------------------------------------------------------------------
# Grades


def fn_label(p: FinFn) -> str:
    return "[%s]" % ",".join(p(v) for v in p.dom)


@dataclass(frozen=True, order=True)
class WriterGrade:
    items: tuple[str, ...]

    def __init__(self, items: Iterable[str]):
        object.__setattr__(self, "items", tuple(sorted(set(items))))

    def __hash__(self):
        return _memo_hash(self, ("wg", self.items))

    kind = WRITER

    def label(self) -> str:
        return "{%s}" % ",".join(self.items)


@dataclass(frozen=True, order=True)
class ReaderGrade:
    states: FinSet
    relations: tuple[EquivRel, ...]

    def __init__(self, states: FinSet, relations: Iterable[EquivRel]):
        rels = tuple(sorted(set(relations)))
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "relations", rels)
        closed = up_closure(states, rels)
        if closed != frozenset(rels):
            raise ValueError("reader grade must be upwards-closed")

    def __hash__(self):
        return _memo_hash(self, ("rg", self.states, self.relations))

    kind = READER

    def label(self) -> str:
        return "{%s}" % ";".join(r.label() for r in self.relations)


@dataclass(frozen=True, order=True)
class StateCWGrade:
    states: FinSet
    pairs: tuple[tuple[FinFn, EquivRel], ...]

    def __init__(self, states: FinSet, pairs: Iterable[tuple[FinFn, EquivRel]]):
        ps = tuple(sorted(set(pairs)))
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "pairs", ps)
        lattice = equiv_lattice(states)
        have = set(ps)
        for p, rel in ps:
            for coarser in lattice:
                if rel.refines(coarser) and (p, coarser) not in have:
                    raise ValueError(
                        "componentwise state grade must be upwards-closed per update"
                    )

    def __hash__(self):
        return _memo_hash(self, ("cg", self.states, self.pairs))

    kind = STATE_CW

    def updates(self) -> tuple[FinFn, ...]:
        return tuple(sorted({p for p, _ in self.pairs}))

    def label(self) -> str:
        body = ";".join(f"({fn_label(p)},{r.label()})" for p, r in self.pairs)
        return "{%s}" % body


@dataclass(frozen=True, order=True)
class StateShapeGrade:
    states: FinSet
    shapes: tuple[FinFn, ...]

    def __init__(self, states: FinSet, shapes: Iterable[FinFn]):
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "shapes", tuple(sorted(set(shapes))))

    def __hash__(self):
        return _memo_hash(self, ("sg", self.states, self.shapes))

    kind = STATE_SHAPE

    def label(self) -> str:
        return "{%s}" % ",".join(fn_label(p) for p in self.shapes)


@dataclass(frozen=True, order=True)
class ListShapeGrade:
    lengths: tuple[int, ...]

    def __init__(self, lengths: Iterable[int]):
        ls = tuple(sorted(set(lengths)))
        if any(n < 0 for n in ls):
            raise ValueError("lengths must be non-negative")
        object.__setattr__(self, "lengths", ls)

    def __hash__(self):
        return _memo_hash(self, ("lg", self.lengths))

    kind = LIST_SHAPE

    def label(self) -> str:
        return "{%s}" % ",".join(str(n) for n in self.lengths)


GradeObject = Union[
    WriterGrade, ReaderGrade, StateCWGrade, StateShapeGrade, ListShapeGrade
]


def grade_leq(a: GradeObject, b: GradeObject) -> bool:
    """Inclusion of canonical representations (the grade poset order)."""
    if a.kind != b.kind:
        raise KindMismatch(f"cannot compare {a.kind} with {b.kind}")
    if isinstance(a, WriterGrade):
        return set(a.items) <= set(b.items)
    if isinstance(a, ReaderGrade):
        return set(a.relations) <= set(b.relations)
    if isinstance(a, StateCWGrade):
        return set(a.pairs) <= set(b.pairs)
    if isinstance(a, StateShapeGrade):
        return set(a.shapes) <= set(b.shapes)
    return set(a.lengths) <= set(b.lengths)


def grade_is_empty(g: GradeObject) -> bool:
    if isinstance(g, WriterGrade):
        return not g.items
    if isinstance(g, ReaderGrade):
        return not g.relations
    if isinstance(g, StateCWGrade):
        return not g.pairs
    if isinstance(g, StateShapeGrade):
        return not g.shapes
    return not g.lengths


# ---------------------------------------------------------------------------
# mkS / member / principal


def mk_s(sigma: GradeObject, probe: FinSet) -> frozenset[Element]:
    """The probe component of the subfunctor denoted by a canonical grade."""
    if isinstance(sigma, WriterGrade):
        return frozenset(
            WriterElem(z, x, probe) for z in sigma.items for x in probe
        )
    if isinstance(sigma, ReaderGrade):
        return frozenset(
            ReaderElem(f)
            for f in all_functions(sigma.states, probe)
            if kernel(f) in sigma.relations
        )
    if isinstance(sigma, StateCWGrade):
        have = set(sigma.pairs)
        out = []
        for p in sigma.updates():
            for o in all_functions(sigma.states, probe):
                if (p, kernel(o)) in have:
                    out.append(StateElem(p, o))
        return frozenset(out)
    if isinstance(sigma, StateShapeGrade):
        return frozenset(
            StateElem(p, o)
            for p in sigma.shapes
            for o in all_functions(sigma.states, probe)
        )
    if isinstance(sigma, ListShapeGrade):
        out = []
        for n in sigma.lengths:
            for items in itertools.product(probe.elements, repeat=n):
                out.append(ListElem(items, probe))
        return frozenset(out)
    raise KindMismatch(f"unknown grade {sigma!r}")


def member(sigma: GradeObject, elem: Element) -> bool:
    """Pointwise membership: elem ∈ mk_s(sigma, probe of elem)."""
    if isinstance(sigma, WriterGrade):
        if not isinstance(elem, WriterElem):
            raise KindMismatch("writer grade needs a writer element")
        return elem.log in sigma.items
    if isinstance(sigma, ReaderGrade):
        if not isinstance(elem, ReaderElem):
            raise KindMismatch("reader grade needs a reader element")
        return kernel(elem.fn) in sigma.relations
    if isinstance(sigma, StateCWGrade):
        if not isinstance(elem, StateElem):
            raise KindMismatch("state grade needs a state element")
        return (elem.update, kernel(elem.output)) in set(sigma.pairs)
    if isinstance(sigma, StateShapeGrade):
        if not isinstance(elem, StateElem):
            raise KindMismatch("state grade needs a state element")
        return elem.update in sigma.shapes
    if isinstance(sigma, ListShapeGrade):
        if not isinstance(elem, ListElem):
            raise KindMismatch("list grade needs a list element")
        return len(elem.items) in sigma.lengths
    raise KindMismatch(f"unknown grade {sigma!r}")


def principal(elem: Element, kind: str) -> GradeObject:
    """The least canonical grade of the requested kind containing elem."""
    if kind == WRITER:
        if not isinstance(elem, WriterElem):
            raise KindMismatch("expected a writer element")
        return WriterGrade([elem.log])
    if kind == READER:
        if not isinstance(elem, ReaderElem):
            raise KindMismatch("expected a reader element")
        v = elem.fn.dom
        return ReaderGrade(v, up_closure(v, [kernel(elem.fn)]))
    if kind == STATE_CW:
        if not isinstance(elem, StateElem):
            raise KindMismatch("expected a state element")
        v = elem.states
        rels = up_closure(v, [kernel(elem.output)])
        return StateCWGrade(v, [(elem.update, r) for r in rels])
    if kind == STATE_SHAPE:
        if not isinstance(elem, StateElem):
            raise KindMismatch("expected a state element")
        return StateShapeGrade(elem.states, [elem.update])
    if kind == LIST_SHAPE:
        if not isinstance(elem, ListElem):
            raise KindMismatch("expected a list element")
        return ListShapeGrade([len(elem.items)])
    raise KindMismatch(f"unknown kind {kind!r}")


# ---------------------------------------------------------------------------
# Probe families and mkSigma

GENERIC_ONE = FinSet(["x0"])
GENERIC_TWO = FinSet(["x0", "x1"])


def writer_probes() -> list[FinSet]:
    return [FinSet(()), GENERIC_ONE, GENERIC_TWO]


def state_probes(states: FinSet) -> list[FinSet]:
    """Quotients of the state set plus states-with-an-extra-point.

    Quotient classes are named by joining their members with ``+``, so the
    probes for distinct relations never collide as sets.
    """
    seen: dict[FinSet, None] = {}
    for rel in equiv_lattice(states):
        q, _ = quotient(states, rel)
        seen.setdefault(q, None)
    seen.setdefault(disjoint_union_point(states), None)
    return list(seen)


reader_probes = state_probes


def list_probes() -> list[FinSet]:
    return [GENERIC_ONE, GENERIC_TWO]


def probes_for(kind: str, states: FinSet | None = None) -> list[FinSet]:
    if kind == WRITER:
        return writer_probes()
    if kind in (READER, STATE_CW, STATE_SHAPE):
        if states is None:
            raise ValueError("state/reader probe family needs the state set")
        return state_probes(states)
    if kind == LIST_SHAPE:
        return list_probes()
    raise KindMismatch(f"unknown kind {kind!r}")


ProbeData = Mapping[FinSet, frozenset]


def _probe_of_size_one(data: ProbeData) -> FinSet:
    for x in data:
        if len(x) == 1:
            return x
    raise NotFunctorial("element data is missing a one-element probe")


def mk_sigma(
    kind: str,
    data: ProbeData,
    states: FinSet | None = None,
    validate: bool = True,
) -> GradeObject:
    """Recover the canonical grade whose subfunctor has the given components.

    ``data`` maps each probe of the kind's probe family to the element set at
    that probe.  With ``validate`` on, the data is checked to be closed under
    the functor action along all probe morphisms and to be reproduced exactly
    by ``mk_s`` of the result; either failure raises ``NotFunctorial``.
    """
    if kind == WRITER:
        one = _probe_of_size_one(data)
        x0 = one.elements[0]
        sigma: GradeObject = WriterGrade(
            e.log for e in data[one] if e.value == x0
        )
    elif kind == READER:
        if states is None:
            raise ValueError("reader mkSigma needs the state set")
        rels = []
        for rel in equiv_lattice(states):
            q, proj = quotient(states, rel)
            if q not in data:
                raise NotFunctorial(f"missing quotient probe for {rel.label()}")
            if ReaderElem(proj) in data[q]:
                rels.append(rel)
        sigma = ReaderGrade(states, rels)
    elif kind == STATE_CW:
        if states is None:
            raise ValueError("state mkSigma needs the state set")
        pairs = []
        for rel in equiv_lattice(states):
            q, proj = quotient(states, rel)
            if q not in data:
                raise NotFunctorial(f"missing quotient probe for {rel.label()}")
            for p in all_functions(states, states):
                if StateElem(p, proj) in data[q]:
                    pairs.append((p, rel))
        sigma = StateCWGrade(states, pairs)
    elif kind == STATE_SHAPE:
        if states is None:
            raise ValueError("state mkSigma needs the state set")
        one = _probe_of_size_one(data)
        sigma = StateShapeGrade(states, (e.update for e in data[one]))
    elif kind == LIST_SHAPE:
        one = _probe_of_size_one(data)
        sigma = ListShapeGrade(len(e.items) for e in data[one])
    else:
        raise KindMismatch(f"unknown kind {kind!r}")

    if validate:
        _validate_probe_data(kind, sigma, data)
    return sigma


def _validate_probe_data(kind: str, sigma: GradeObject, data: ProbeData) -> None:
    probes = list(data)
    for x in probes:
        for y in probes:
            for f in all_functions(x, y):
                for t in data[x]:
                    if tmap(f, t) not in data[y]:
                        raise NotFunctorial(
                            f"data not closed under action along {f!r} at {t.token()}"
                        )
    for x in probes:
        if mk_s(sigma, x) != frozenset(data[x]):
            raise NotFunctorial(
                f"data at probe {x!r} is not the subfunctor of any canonical grade"
            )


# ---------------------------------------------------------------------------
# Grade enumeration


def upsets_of_equiv(states: FinSet) -> list[frozenset[EquivRel]]:
    """All upwards-closed sets of equivalence relations on the states."""
    lattice = equiv_lattice(states)
    out = []
    for bits in itertools.product((False, True), repeat=len(lattice)):
        chosen = frozenset(r for r, b in zip(lattice, bits) if b)
        if up_closure(states, chosen) == chosen:
            out.append(chosen)
    return sorted(out, key=lambda s: (len(s), sorted(r.label() for r in s)))


def all_grades(
    kind: str,
    *,
    monoid_elements: FinSet | None = None,
    states: FinSet | None = None,
    bound: int | None = None,
) -> list[GradeObject]:
    """Every canonical grade of the kind, in a deterministic order."""
    if kind == WRITER:
        assert monoid_elements is not None
        items = monoid_elements.elements
        grades: list[GradeObject] = []
        for n in range(len(items) + 1):
            for combo in itertools.combinations(items, n):
                grades.append(WriterGrade(combo))
        return grades
    if kind == READER:
        assert states is not None
        return [ReaderGrade(states, s) for s in upsets_of_equiv(states)]
    if kind == STATE_CW:
        assert states is not None
        upsets = upsets_of_equiv(states)
        updates = sorted(all_functions(states, states))
        grades = []
        for choice in itertools.product(upsets, repeat=len(updates)):
            pairs = [
                (p, r) for p, rels in zip(updates, choice) for r in rels
            ]
            grades.append(StateCWGrade(states, pairs))
        return sorted(grades, key=lambda g: (len(g.pairs), g.label()))
    if kind == STATE_SHAPE:
        assert states is not None
        fns = sorted(all_functions(states, states))
        grades = []
        for n in range(len(fns) + 1):
            for combo in itertools.combinations(fns, n):
                grades.append(StateShapeGrade(states, combo))
        return grades
    if kind == LIST_SHAPE:
        assert bound is not None
        universe = range(bound + 1)
        grades = []
        for n in range(bound + 2):
            for combo in itertools.combinations(universe, n):
                grades.append(ListShapeGrade(combo))
        return grades
    raise KindMismatch(f"unknown kind {kind!r}")


def grade_count(
    kind: str,
    *,
    monoid_elements: FinSet | None = None,
    states: FinSet | None = None,
    bound: int | None = None,
) -> int:
    """Number of canonical grades, computed without enumerating them."""
    if kind == WRITER:
        assert monoid_elements is not None
        return 2 ** len(monoid_elements)
    if kind in (READER, STATE_CW):
        assert states is not None
        u = len(upsets_of_equiv(states))
        if kind == READER:
            return u
        return u ** (len(states) ** len(states))
    if kind == STATE_SHAPE:
        assert states is not None
        return 2 ** (len(states) ** len(states))
    if kind == LIST_SHAPE:
        assert bound is not None
        return 2 ** (bound + 1)
    raise KindMismatch(f"unknown kind {kind!r}")


# ---------------------------------------------------------------------------
# JSON serialization


def _rel_to_json(rel: EquivRel) -> list[list[str]]:
    return [list(b) for b in rel.blocks]


def _rel_from_json(states: FinSet, blocks) -> EquivRel:
    return EquivRel(states, [tuple(b) for b in blocks])


def _fn_to_json(fn: FinFn) -> dict[str, str]:
    return fn.as_dict()


def _endo_from_json(states: FinSet, mapping) -> FinFn:
    return FinFn(states, states, dict(mapping))


def grade_to_json(g: GradeObject) -> dict:
    if isinstance(g, WriterGrade):
        return {"kind": WRITER, "items": list(g.items)}
    if isinstance(g, ReaderGrade):
        return {
            "kind": READER,
            "states": list(g.states.elements),
            "relations": [_rel_to_json(r) for r in g.relations],
        }
    if isinstance(g, StateCWGrade):
        return {
            "kind": STATE_CW,
            "states": list(g.states.elements),
            "pairs": [[_fn_to_json(p), _rel_to_json(r)] for p, r in g.pairs],
        }
    if isinstance(g, StateShapeGrade):
        return {
            "kind": STATE_SHAPE,
            "states": list(g.states.elements),
            "shapes": [_fn_to_json(p) for p in g.shapes],
        }
    if isinstance(g, ListShapeGrade):
        return {"kind": LIST_SHAPE, "lengths": list(g.lengths)}
    raise KindMismatch(f"unknown grade {g!r}")


def grade_from_json(doc: Mapping) -> GradeObject:
    kind = doc.get("kind")
    if kind == WRITER:
        return WriterGrade(doc["items"])
    if kind == READER:
        states = FinSet(doc["states"])
        return ReaderGrade(states, [_rel_from_json(states, r) for r in doc["relations"]])
    if kind == STATE_CW:
        states = FinSet(doc["states"])
        return StateCWGrade(
            states,
            [
                (_endo_from_json(states, p), _rel_from_json(states, r))
                for p, r in doc["pairs"]
            ],
        )
    if kind == STATE_SHAPE:
        states = FinSet(doc["states"])
        return StateShapeGrade(states, [_endo_from_json(states, p) for p in doc["shapes"]])
    if kind == LIST_SHAPE:
        return ListShapeGrade(doc["lengths"])
    raise KindMismatch(f"unknown grade kind {kind!r}")
