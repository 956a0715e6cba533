"""Finite monad presentations: writer, reader, state, and bounded list.

Each instance exposes element enumeration over its probe family, the unit
and multiplication on elements, grade helpers for its grading kind, and a
budgeted law suite.  The multiplication takes an outer element over a
tokenized carrier plus a decoder from tokens back to inner elements; list
flattening past the configured bound raises ``BoundExceeded`` instead of
truncating.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

from .algebra import LawReport
from .errors import BoundExceeded, ConfigError, KindMismatch
from .finset import FinFn, FinSet, all_functions, equiv_lattice
from .grades import (
    LIST_SHAPE,
    READER,
    STATE_CW,
    STATE_SHAPE,
    WRITER,
    Element,
    GradeObject,
    ListElem,
    ListShapeGrade,
    ReaderElem,
    ReaderGrade,
    StateCWGrade,
    StateElem,
    StateShapeGrade,
    WriterElem,
    WriterGrade,
    all_grades,
    carrier,
    grade_count,
    mk_sigma,
    principal,
    probes_for,
    tmap,
)

NAME_RE = re.compile(r"^[A-Za-z0-9_.\-]+$")


def _check_names(names: Iterable[str], what: str) -> None:
    for n in names:
        if not NAME_RE.match(n):
            raise ConfigError(f"invalid {what} name {n!r}")


@dataclass(frozen=True)
class Monoid:
    """A finite monoid given by its multiplication table."""

    elements: FinSet
    unit: str
    table: tuple[tuple[tuple[str, str], str], ...]

    def __init__(self, elements: FinSet, unit: str, table: Mapping):
        if unit not in elements:
            raise ConfigError(f"unit {unit!r} not a monoid element")
        flat: dict[tuple[str, str], str] = {}
        for key, value in table.items():
            if isinstance(value, Mapping):  # nested {a: {b: ab}}
                for b, ab in value.items():
                    flat[(key, b)] = ab
            else:
                flat[key] = value
        for a in elements:
            for b in elements:
                if (a, b) not in flat:
                    raise ConfigError(f"table missing entry for ({a!r}, {b!r})")
                if flat[(a, b)] not in elements:
                    raise ConfigError(f"table value {flat[(a, b)]!r} not an element")
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "unit", unit)
        object.__setattr__(self, "table", tuple(sorted(flat.items())))

    def mult(self, a: str, b: str) -> str:
        return dict(self.table)[(a, b)]

    def law_reports(self) -> list[LawReport]:
        mult = dict(self.table)
        unit_counter = None
        for a in self.elements:
            if mult[(self.unit, a)] != a or mult[(a, self.unit)] != a:
                unit_counter = a
                break
        reports = [
            LawReport(
                "monoid-unit",
                unit_counter is None,
                None if unit_counter is None else f"a={unit_counter}",
            )
        ]
        assoc_counter = None
        for a in self.elements:
            for b in self.elements:
                for c in self.elements:
                    if mult[(mult[(a, b)], c)] != mult[(a, mult[(b, c)])]:
                        assoc_counter = f"a={a};b={b};c={c}"
                        break
                if assoc_counter:
                    break
            if assoc_counter:
                break
        reports.append(LawReport("monoid-assoc", assoc_counter is None, assoc_counter))
        return reports


class MonadInstance:
    """Common helpers shared by the concrete monad presentations."""

    kind: str
    name: str
    flavor: str
    states: Optional[FinSet] = None

    def probes(self) -> list[FinSet]:
        raise NotImplementedError

    def elements(self, probe: FinSet) -> list[Element]:
        raise NotImplementedError

    def eta(self, probe: FinSet, x: str) -> Element:
        raise NotImplementedError

    def mu(self, outer: Element, decode: Mapping[str, Element],
           probe: Optional[FinSet] = None) -> Element:
        raise NotImplementedError

    def random_element(self, rng: random.Random, probe: FinSet) -> Element:
        raise NotImplementedError

    def tmap(self, f: FinFn, t: Element) -> Element:
        return tmap(f, t)

    def full_grade(self) -> GradeObject:
        raise NotImplementedError

    def empty_grade(self) -> GradeObject:
        raise NotImplementedError

    def principal(self, t: Element) -> GradeObject:
        return principal(t, self.kind)

    def mk_sigma(self, data, validate: bool = True) -> GradeObject:
        return mk_sigma(self.kind, data, states=self.states, validate=validate)

    def all_grades(self) -> list[GradeObject]:
        raise NotImplementedError

    def grade_count(self) -> int:
        raise NotImplementedError

    def element_count(self, probe: FinSet) -> int:
        raise NotImplementedError

    # -- law suite ---------------------------------------------------------

    def law_reports(self, budget: int = 4000, seed: int = 0) -> list[LawReport]:
        """Monad laws, element-wise: exhaustive where small, seeded samples above."""
        reports: list[LawReport] = []
        reports.append(self._functor_identity_report(budget, seed))
        reports.append(self._functor_compose_report(budget, seed))
        reports.extend(self._unit_law_reports(budget, seed))
        reports.append(self._assoc_law_report(budget, seed))
        return reports

    def _pool(self, probe: FinSet, budget: int, rng: random.Random) -> list[Element]:
        if self.element_count(probe) <= budget:
            return self.elements(probe)
        return [self.random_element(rng, probe) for _ in range(max(8, budget // 8))]

    def _functor_identity_report(self, budget: int, seed: int) -> LawReport:
        rng = random.Random(seed)
        for probe in self.probes():
            ident = FinFn.identity(probe)
            for t in self._pool(probe, budget, rng):
                if self.tmap(ident, t) != t:
                    return LawReport("functor-identity", False, t.token())
        return LawReport("functor-identity", True)

    def _random_fn(self, rng: random.Random, dom: FinSet, cod: FinSet) -> FinFn:
        return FinFn(dom, cod, {x: rng.choice(cod.elements) for x in dom})

    def _functor_compose_report(self, budget: int, seed: int) -> LawReport:
        rng = random.Random(seed)
        probes = [p for p in self.probes() if len(p) > 0]
        checked = 0
        for x in probes:
            pool = self._pool(x, budget // 8, rng)
            if not pool:
                continue
            for y in probes:
                for z in probes:
                    fs = list(all_functions(x, y)) if len(y) ** len(x) <= 16 \
                        else [self._random_fn(rng, x, y) for _ in range(4)]
                    gs = list(all_functions(y, z)) if len(z) ** len(y) <= 16 \
                        else [self._random_fn(rng, y, z) for _ in range(4)]
                    for f in fs:
                        for g in gs:
                            for t in pool[: max(4, budget // 200)]:
                                if self.tmap(g.compose(f), t) != self.tmap(
                                    g, self.tmap(f, t)
                                ):
                                    return LawReport(
                                        "functor-compose",
                                        False,
                                        f"{t.token()};{f!r};{g!r}",
                                    )
                                checked += 1
                                if checked >= budget:
                                    return LawReport(
                                        "functor-compose", True, detail=f"budgeted at {budget}"
                                    )
        return LawReport("functor-compose", True)

    def _unit_law_reports(self, budget: int, seed: int) -> list[LawReport]:
        rng = random.Random(seed)
        left_counter = right_counter = None
        for probe in self.probes():
            elems = self._pool(probe, budget, rng)
            if not elems:
                continue
            tokens, decode = carrier(elems)
            eta_imgs = {x: self.eta(probe, x) for x in probe}
            img_tokens, img_decode = carrier(eta_imgs.values())
            to_eta = FinFn(probe, img_tokens, {x: eta_imgs[x].token() for x in probe})
            for t in elems:
                # mu after eta at the carrier of T X
                outer = self.eta(tokens, t.token())
                if self.mu(outer, decode, probe=probe) != t and left_counter is None:
                    left_counter = t.token()
                # mu after mapping eta under T
                outer2 = self.tmap(to_eta, t)
                if self.mu(outer2, img_decode, probe=probe) != t and right_counter is None:
                    right_counter = t.token()
        return [
            LawReport("monad-left-unit", left_counter is None, left_counter),
            LawReport("monad-right-unit", right_counter is None, right_counter),
        ]

    def _assoc_law_report(self, budget: int, seed: int) -> LawReport:
        rng = random.Random(seed)
        probe = min((p for p in self.probes() if len(p) >= 1), key=len)
        level1 = self._pool(probe, budget, rng)
        if not level1:
            return LawReport("monad-assoc", True, detail="no elements at base probe")
        y1, d1 = carrier(level1)
        level2 = self._pool(y1, budget, rng)
        # keep only second-level elements that flatten within the length bound
        flat_inner = {}
        kept = []
        for t2 in level2:
            try:
                flat = self.mu(t2, d1, probe=probe)
            except BoundExceeded:
                continue
            flat_inner[t2.token()] = flat
            kept.append(t2)
        if not kept:
            return LawReport("monad-assoc", True, detail="no flattenable elements")
        y2, d2 = carrier(kept)
        fy, fdec = carrier(flat_inner.values())
        rename = FinFn(y2, fy, {tok: flat_inner[tok].token() for tok in y2})
        count = max(20, budget // 50)
        exhaustive = self.element_count(y2) <= count
        top = self.elements(y2) if exhaustive else [
            self.random_element(rng, y2) for _ in range(count)
        ]
        for t3 in top:
            try:
                via_outer = self.mu(self.mu(t3, d2, probe=y1), d1, probe=probe)
                via_inner = self.mu(self.tmap(rename, t3), fdec, probe=probe)
            except BoundExceeded:
                continue  # length bound hit on one path; nothing to compare
            if via_outer != via_inner:
                return LawReport("monad-assoc", False, t3.token())
        return LawReport(
            "monad-assoc", True,
            detail="exhaustive at base probe" if exhaustive else f"sampled={len(top)}",
        )


class WriterMonad(MonadInstance):
    """Writer monad over a finite monoid: T X = M × X."""

    kind = WRITER
    flavor = "monoidal"

    def __init__(self, monoid: Monoid):
        self.monoid = monoid
        self.name = "writer"

    def probes(self) -> list[FinSet]:
        return probes_for(WRITER)

    def elements(self, probe: FinSet) -> list[Element]:
        return [WriterElem(z, x, probe) for z in self.monoid.elements for x in probe]

    def element_count(self, probe: FinSet) -> int:
        return len(self.monoid.elements) * len(probe)

    def eta(self, probe: FinSet, x: str) -> Element:
        return WriterElem(self.monoid.unit, x, probe)

    def mu(self, outer, decode, probe=None):
        inner = decode[outer.value]
        return WriterElem(self.monoid.mult(outer.log, inner.log), inner.value, inner.probe)

    def random_element(self, rng, probe):
        return WriterElem(
            rng.choice(self.monoid.elements.elements), rng.choice(probe.elements), probe
        )

    def full_grade(self):
        return WriterGrade(self.monoid.elements)

    def empty_grade(self):
        return WriterGrade(())

    def all_grades(self):
        return all_grades(WRITER, monoid_elements=self.monoid.elements)

    def grade_count(self):
        return grade_count(WRITER, monoid_elements=self.monoid.elements)

    def law_reports(self, budget: int = 4000, seed: int = 0) -> list[LawReport]:
        reports = self.monoid.law_reports()
        if not all(r.passed for r in reports):
            return reports
        return reports + super().law_reports(budget, seed)


class ReaderMonad(MonadInstance):
    """Reader monad over a finite state set: T X = X^V."""

    kind = READER
    flavor = "monoidal"

    def __init__(self, states: FinSet):
        if len(states) == 0:
            raise ConfigError("reader monad needs a nonempty state set")
        self.states = states
        self.name = "reader"

    def probes(self) -> list[FinSet]:
        return probes_for(READER, self.states)

    def elements(self, probe: FinSet) -> list[Element]:
        return [ReaderElem(f) for f in all_functions(self.states, probe)]

    def element_count(self, probe: FinSet) -> int:
        return len(probe) ** len(self.states)

    def eta(self, probe: FinSet, x: str) -> Element:
        return ReaderElem(FinFn.constant(self.states, probe, x))

    def mu(self, outer, decode, probe=None):
        v0 = self.states.elements[0]
        target = probe or decode[outer.fn(v0)].probe
        return ReaderElem(
            FinFn(self.states, target, {v: decode[outer.fn(v)].fn(v) for v in self.states})
        )

    def random_element(self, rng, probe):
        return ReaderElem(
            FinFn(self.states, probe, {v: rng.choice(probe.elements) for v in self.states})
        )

    def full_grade(self):
        return ReaderGrade(self.states, equiv_lattice(self.states))

    def empty_grade(self):
        return ReaderGrade(self.states, ())

    def all_grades(self):
        return all_grades(READER, states=self.states)

    def grade_count(self):
        return grade_count(READER, states=self.states)


class StateMonad(MonadInstance):
    """State monad T X = (V × X)^V, graded componentwise or by shapes."""

    def __init__(self, states: FinSet, grading: str = "componentwise"):
        if len(states) == 0:
            raise ConfigError("state monad needs a nonempty state set")
        if grading not in ("componentwise", "shapewise"):
            raise ConfigError(f"unknown state grading {grading!r}")
        self.states = states
        self.grading = grading
        self.kind = STATE_CW if grading == "componentwise" else STATE_SHAPE
        self.flavor = "monoidal" if grading == "componentwise" else "right-skew"
        self.name = f"state-{grading}"

    def probes(self) -> list[FinSet]:
        return probes_for(self.kind, self.states)

    def elements(self, probe: FinSet) -> list[Element]:
        updates = list(all_functions(self.states, self.states))
        outputs = list(all_functions(self.states, probe))
        return [StateElem(p, o) for p in updates for o in outputs]

    def element_count(self, probe: FinSet) -> int:
        return (len(self.states) * len(probe)) ** len(self.states)

    def eta(self, probe: FinSet, x: str) -> Element:
        return StateElem(
            FinFn.identity(self.states), FinFn.constant(self.states, probe, x)
        )

    def mu(self, outer, decode, probe=None):
        inner = {v: decode[outer.output(v)] for v in self.states}
        target = probe or next(iter(inner.values())).probe
        update = FinFn(
            self.states, self.states,
            {v: inner[v].update(outer.update(v)) for v in self.states},
        )
        output = FinFn(
            self.states, target,
            {v: inner[v].output(outer.update(v)) for v in self.states},
        )
        return StateElem(update, output)

    def random_element(self, rng, probe):
        update = FinFn(
            self.states, self.states,
            {v: rng.choice(self.states.elements) for v in self.states},
        )
        output = FinFn(
            self.states, probe, {v: rng.choice(probe.elements) for v in self.states}
        )
        return StateElem(update, output)

    def full_grade(self):
        fns = list(all_functions(self.states, self.states))
        if self.kind == STATE_SHAPE:
            return StateShapeGrade(self.states, fns)
        lattice = equiv_lattice(self.states)
        return StateCWGrade(self.states, [(p, r) for p in fns for r in lattice])

    def empty_grade(self):
        if self.kind == STATE_SHAPE:
            return StateShapeGrade(self.states, ())
        return StateCWGrade(self.states, ())

    def all_grades(self):
        return all_grades(self.kind, states=self.states)

    def grade_count(self):
        return grade_count(self.kind, states=self.states)


class ListMonad(MonadInstance):
    """List monad truncated at a length bound; overflow raises, never truncates."""

    kind = LIST_SHAPE
    flavor = "monoidal"

    def __init__(self, bound: int = 6):
        if bound < 1:
            raise ConfigError("list bound must be at least 1")
        self.bound = bound
        self.name = "list"

    def probes(self) -> list[FinSet]:
        return probes_for(LIST_SHAPE)

    def elements(self, probe: FinSet) -> list[Element]:
        import itertools

        out = []
        for n in range(self.bound + 1):
            for items in itertools.product(probe.elements, repeat=n):
                out.append(ListElem(items, probe))
        return out

    def element_count(self, probe: FinSet) -> int:
        return sum(len(probe) ** k for k in range(self.bound + 1))

    def eta(self, probe: FinSet, x: str) -> Element:
        return ListElem((x,), probe)

    def mu(self, outer, decode, probe=None):
        parts = [decode[tok] for tok in outer.items]
        flat: list[str] = []
        for part in parts:
            flat.extend(part.items)
        if len(flat) > self.bound:
            raise BoundExceeded(
                f"flattened length {len(flat)} exceeds bound {self.bound}"
            )
        target = probe or (parts[0].probe if parts else None)
        if target is None:
            raise ValueError("cannot infer probe for an empty flattening")
        return ListElem(tuple(flat), target)

    def random_element(self, rng, probe):
        n = rng.randint(0, self.bound)
        return ListElem(tuple(rng.choice(probe.elements) for _ in range(n)), probe)

    def full_grade(self):
        return ListShapeGrade(range(self.bound + 1))

    def empty_grade(self):
        return ListShapeGrade(())

    def all_grades(self):
        return all_grades(LIST_SHAPE, bound=self.bound)

    def grade_count(self):
        return grade_count(LIST_SHAPE, bound=self.bound)


# ---------------------------------------------------------------------------
# Configuration


def monad_from_config(doc: Mapping) -> MonadInstance:
    """Build a monad instance from a configuration mapping.

    Schemas:
      {"monad": "writer", "monoid": {"elements": [...], "unit": "e",
                                     "table": {"a": {"b": "ab", ...}, ...}}}
      {"monad": "reader", "states": [...]}
      {"monad": "state", "states": [...], "grading": "componentwise"|"shapewise"}
      {"monad": "list", "bound": 6}
    """
    if not isinstance(doc, Mapping):
        raise ConfigError("configuration must be a JSON object")
    kind = doc.get("monad")
    if kind == "writer":
        spec = doc.get("monoid")
        if not isinstance(spec, Mapping):
            raise ConfigError("writer config needs a 'monoid' object")
        try:
            elements = FinSet(spec["elements"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad monoid elements: {exc}")
        _check_names(elements, "monoid element")
        if "unit" not in spec or "table" not in spec:
            raise ConfigError("monoid config needs 'unit' and 'table'")
        return WriterMonad(Monoid(elements, spec["unit"], spec["table"]))
    if kind == "reader":
        states = _states_from(doc)
        return ReaderMonad(states)
    if kind == "state":
        states = _states_from(doc)
        return StateMonad(states, doc.get("grading", "componentwise"))
    if kind == "list":
        bound = doc.get("bound", 6)
        if not isinstance(bound, int):
            raise ConfigError("list bound must be an integer")
        return ListMonad(bound)
    raise ConfigError(f"unknown monad kind {kind!r}")


def _states_from(doc: Mapping) -> FinSet:
    try:
        states = FinSet(doc["states"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad states: {exc}")
    if len(states) == 0:
        raise ConfigError("state set must be nonempty")
    _check_names(states, "state")
    return states
