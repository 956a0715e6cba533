"""Skew-monoidal structure on grade posets and the executable law checker.

Grade categories here are skeletal posets, so the coherence diagrams commute
automatically (hom-sets have at most one element) and a skew-monoidal
structure reduces to monotonicity of the tensor plus three (in)equalities
whose directions depend on the declared flavor:

* ``monoidal``    — J ⊡ x = x,  x ⊡ J = x,  (x ⊡ y) ⊡ z = x ⊡ (y ⊡ z)
* ``left-skew``   — J ⊡ x ≤ x,  x ≤ x ⊡ J,  (x ⊡ y) ⊡ z ≤ x ⊡ (y ⊡ z)
* ``right-skew``  — x ≤ J ⊡ x,  x ⊡ J ≤ x,  x ⊡ (y ⊡ z) ≤ (x ⊡ y) ⊡ z
* ``left-normal`` — left-skew with the left unitor an equality

Partially defined tensors are tolerated: cells that raise ``BoundExceeded``
(length-bounded list grades) are skipped and counted in the report detail.
The checker interns grades as integer indices and precomputes the order and
tensor tables once, so the quantified law loops run on plain ints.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from .errors import BoundExceeded, TensorNotClosed
from .grades import GradeObject, grade_leq

FLAVORS = ("monoidal", "left-skew", "right-skew", "left-normal")


@dataclass(frozen=True)
class LawReport:
    """Outcome of one law check; failures always carry a counterexample."""

    name: str
    passed: bool
    counterexample: Optional[str] = None
    detail: Optional[str] = None

    def __post_init__(self):
        if not self.passed and not self.counterexample:
            raise ValueError("failing law reports must carry a counterexample")

    def line(self) -> str:
        if self.passed:
            return f"LAW {self.name} PASS"
        return f"LAW {self.name} FAIL counterexample={self.counterexample}"


def all_passed(reports: Iterable[LawReport]) -> bool:
    return all(r.passed for r in reports)


class GradePoset:
    """A finite carrier of grades with inclusion order, unit and tensor."""

    def __init__(
        self,
        grades: Iterable[GradeObject],
        unit: GradeObject,
        tensor: Callable[[GradeObject, GradeObject], GradeObject],
        flavor: str,
    ):
        if flavor not in FLAVORS:
            raise ValueError(f"unknown flavor {flavor!r}")
        carrier = sorted(set(grades) | {unit})
        self.grades: tuple[GradeObject, ...] = tuple(carrier)
        self._pos = {g: i for i, g in enumerate(self.grades)}
        self.unit = unit
        self.flavor = flavor
        self._tensor = tensor
        self._cells: dict[tuple[int, int], Optional[int]] = {}
        self._leq: Optional[list[list[bool]]] = None

    def index(self, g: GradeObject) -> int:
        return self._pos[g]

    def leq(self, a: GradeObject, b: GradeObject) -> bool:
        return grade_leq(a, b)

    def tensor(self, a: GradeObject, b: GradeObject) -> GradeObject:
        got = self.cell(a, b)
        if got is None:
            raise BoundExceeded(f"tensor undefined at {a.label()} . {b.label()}")
        return got

    def cell(self, a: GradeObject, b: GradeObject) -> Optional[GradeObject]:
        """Tensor of a pair, or None when the cell is undefined (bound hit)."""
        k = self._cell_index(self._pos[a], self._pos[b])
        return None if k is None else self.grades[k]

    def _cell_index(self, i: int, j: int) -> Optional[int]:
        key = (i, j)
        if key not in self._cells:
            try:
                value = self._tensor(self.grades[i], self.grades[j])
            except BoundExceeded:
                self._cells[key] = None
                return None
            if value not in self._pos:
                raise TensorNotClosed(
                    f"{self.grades[i].label()} . {self.grades[j].label()} = "
                    f"{value.label()} is outside the carrier"
                )
            self._cells[key] = self._pos[value]
        return self._cells[key]

    def leq_table(self) -> list[list[bool]]:
        if self._leq is None:
            gs = self.grades
            self._leq = [[grade_leq(a, b) for b in gs] for a in gs]
        return self._leq


def check_skew_laws(poset: GradePoset) -> list[LawReport]:
    """Check the poset-form skew-monoidal laws for the declared flavor."""
    gs = poset.grades
    n = len(gs)
    leq = poset.leq_table()
    cell = [[poset._cell_index(i, j) for j in range(n)] for i in range(n)]

    reports = [_check_partial_order(gs, leq)]

    # monotonicity of the tensor in both arguments
    leq_pairs = [(i, j) for i in range(n) for j in range(n) if leq[i][j]]
    mono_counter = None
    skipped = 0
    for x, x2 in leq_pairs:
        row_x, row_x2 = cell[x], cell[x2]
        for y, y2 in leq_pairs:
            t1, t2 = row_x[y], row_x2[y2]
            if t1 is None or t2 is None:
                skipped += 1
                continue
            if not leq[t1][t2]:
                mono_counter = (
                    f"x={gs[x].label()};x'={gs[x2].label()};"
                    f"y={gs[y].label()};y'={gs[y2].label()}"
                )
                break
        if mono_counter:
            break
    reports.append(
        LawReport(
            "tensor-monotone",
            mono_counter is None,
            mono_counter,
            detail=f"skipped={skipped}" if skipped else None,
        )
    )

    flavor = poset.flavor
    j = poset.index(poset.unit)

    # left unitor
    counter = None
    skipped = 0
    for x in range(n):
        jx = cell[j][x]
        if jx is None:
            skipped += 1
            continue
        if flavor in ("monoidal", "left-normal"):
            ok = jx == x
        elif flavor == "left-skew":
            ok = leq[jx][x]
        else:  # right-skew: x ≤ J ⊡ x
            ok = leq[x][jx]
        if not ok:
            counter = f"x={gs[x].label()};Jx={gs[jx].label()}"
            break
    reports.append(
        LawReport("left-unitor", counter is None, counter,
                  detail=f"skipped={skipped}" if skipped else None)
    )

    # right unitor
    counter = None
    skipped = 0
    for x in range(n):
        xj = cell[x][j]
        if xj is None:
            skipped += 1
            continue
        if flavor == "monoidal":
            ok = xj == x
        elif flavor == "right-skew":
            ok = leq[xj][x]
        else:  # left-skew, left-normal: x ≤ x ⊡ J
            ok = leq[x][xj]
        if not ok:
            counter = f"x={gs[x].label()};xJ={gs[xj].label()}"
            break
    reports.append(
        LawReport("right-unitor", counter is None, counter,
                  detail=f"skipped={skipped}" if skipped else None)
    )

    # associator
    counter = None
    skipped = 0
    for x in range(n):
        row_x = cell[x]
        for y in range(n):
            xy = row_x[y]
            row_y = cell[y]
            for z in range(n):
                yz = row_y[z]
                lhs = cell[xy][z] if xy is not None else None
                rhs = row_x[yz] if yz is not None else None
                if lhs is None or rhs is None:
                    skipped += 1
                    continue
                if flavor == "monoidal":
                    ok = lhs == rhs
                elif flavor == "right-skew":
                    ok = leq[rhs][lhs]
                else:
                    ok = leq[lhs][rhs]
                if not ok:
                    counter = (
                        f"x={gs[x].label()};y={gs[y].label()};z={gs[z].label()}"
                    )
                    break
            if counter:
                break
        if counter:
            break
    reports.append(
        LawReport("associator", counter is None, counter,
                  detail=f"skipped={skipped}" if skipped else None)
    )

    reports.append(
        LawReport(
            "coherence-m1-m5",
            True,
            detail="vacuous in a poset: hom-sets have at most one element",
        )
    )
    return reports


def _check_partial_order(gs, leq) -> LawReport:
    n = len(gs)
    for a in range(n):
        if not leq[a][a]:
            return LawReport("partial-order", False, f"not reflexive at {gs[a].label()}")
    for a in range(n):
        for b in range(n):
            if a != b and leq[a][b] and leq[b][a]:
                return LawReport(
                    "partial-order",
                    False,
                    f"antisymmetry fails at {gs[a].label()};{gs[b].label()}",
                )
    for a in range(n):
        row = leq[a]
        for b in range(n):
            if not row[b]:
                continue
            rb = leq[b]
            for c in range(n):
                if rb[c] and not row[c]:
                    return LawReport(
                        "partial-order",
                        False,
                        f"transitivity fails at {gs[a].label()};"
                        f"{gs[b].label()};{gs[c].label()}",
                    )
    return LawReport("partial-order", True)


def check_left_normal(poset: GradePoset) -> LawReport:
    """Does the left unitor hold as an equality (J ⊡ x = x for all x)?"""
    skipped = 0
    j = poset.index(poset.unit)
    for x, g in enumerate(poset.grades):
        jx = poset._cell_index(j, x)
        if jx is None:
            skipped += 1
            continue
        if jx != x:
            return LawReport(
                "left-normal", False,
                f"x={g.label()};Jx={poset.grades[jx].label()}",
            )
    return LawReport("left-normal", True, detail=f"skipped={skipped}" if skipped else None)
