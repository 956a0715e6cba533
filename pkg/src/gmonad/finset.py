"""Finite sets, functions, the (surjective, injective) factorization system,
pullbacks, diagonal fill-ins, and the lattice of equivalence relations.

Everything here is immutable and canonically ordered, so values that are
equal mathematically compare equal as Python objects.  Factorizations and
quotients, which are only determined up to isomorphism, are pinned down by
deterministic token choices: images inherit their tokens from the codomain,
pullback elements are pair tokens ``(x,y)``, and quotient classes are named
by joining their members with ``+``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import NonCommutingSquare


def _memo_hash(obj, key) -> int:
    """Cache the hash of a frozen value object (hot in law-check loops)."""
    h = obj.__dict__.get("_hash")
    if h is None:
        h = hash(key)
        object.__setattr__(obj, "_hash", h)
    return h


@dataclass(frozen=True, order=True)
class FinSet:
    """A finite set of distinct string atoms, stored sorted."""

    elements: tuple[str, ...]

    def __init__(self, elements: Iterable[str]):
        elems = tuple(sorted(elements))
        if len(set(elems)) != len(elems):
            raise ValueError(f"duplicate elements in {elems!r}")
        object.__setattr__(self, "elements", elems)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[str]:
        return iter(self.elements)

    def __contains__(self, item: str) -> bool:
        return item in self.elements

    def __hash__(self):
        return _memo_hash(self, ("FinSet", self.elements))

    def __repr__(self) -> str:
        return "FinSet({%s})" % ", ".join(self.elements)


EMPTY = FinSet(())


@dataclass(frozen=True, order=True)
class FinFn:
    """A total function between finite sets, given by its graph."""

    dom: FinSet
    cod: FinSet
    graph: tuple[tuple[str, str], ...]

    def __init__(self, dom: FinSet, cod: FinSet, mapping):
        mp = dict(mapping)
        if set(mp) != set(dom.elements):
            raise ValueError("mapping is not total on the domain")
        for v in mp.values():
            if v not in cod:
                raise ValueError(f"value {v!r} not in codomain")
        graph = tuple((x, mp[x]) for x in dom.elements)
        object.__setattr__(self, "dom", dom)
        object.__setattr__(self, "cod", cod)
        object.__setattr__(self, "graph", graph)

    def __call__(self, x: str) -> str:
        for a, b in self.graph:
            if a == x:
                return b
        raise KeyError(x)

    def as_dict(self) -> dict[str, str]:
        return dict(self.graph)

    def __hash__(self):
        return _memo_hash(self, ("FinFn", self.dom.elements, self.cod.elements, self.graph))

    def __repr__(self) -> str:
        body = ",".join(f"{a}:{b}" for a, b in self.graph)
        return "FinFn{%s}" % body

    @staticmethod
    def identity(s: FinSet) -> "FinFn":
        return FinFn(s, s, {x: x for x in s})

    @staticmethod
    def constant(dom: FinSet, cod: FinSet, value: str) -> "FinFn":
        return FinFn(dom, cod, {x: value for x in dom})

    def compose(self, other: "FinFn") -> "FinFn":
        """self after other (``self ∘ other``)."""
        if other.cod != self.dom:
            raise ValueError("composition mismatch")
        return FinFn(other.dom, self.cod, {x: self(other(x)) for x in other.dom})

    def image(self) -> FinSet:
        return FinSet(set(b for _, b in self.graph))

    def is_surjective(self) -> bool:
        return set(b for _, b in self.graph) == set(self.cod.elements)

    def is_injective(self) -> bool:
        values = [b for _, b in self.graph]
        return len(set(values)) == len(values)

    def is_identity(self) -> bool:
        return self.dom == self.cod and all(a == b for a, b in self.graph)

    def is_constant(self) -> bool:
        return len(set(b for _, b in self.graph)) <= 1 and len(self.dom) > 0


@dataclass(frozen=True)
class Factorization:
    """A surjection-then-injection decomposition ``m ∘ e`` of a function."""

    mid: FinSet
    e: FinFn
    m: FinFn


def factorize_surj_inj(f: FinFn) -> Factorization:
    """Factor f through its image: e x = f x onto the image, m the inclusion."""
    mid = f.image()
    e = FinFn(f.dom, mid, f.as_dict())
    m = FinFn(mid, f.cod, {y: y for y in mid})
    return Factorization(mid, e, m)


def pair_token(x: str, y: str) -> str:
    return f"({x},{y})"


def pullback(f: FinFn, g: FinFn) -> tuple[FinSet, FinFn, FinFn]:
    """Pullback of a cospan f : X → Z ← Y : g, with pair tokens for elements."""
    if f.cod != g.cod:
        raise ValueError("pullback needs a common codomain")
    pairs = [(x, y) for x in f.dom for y in g.dom if f(x) == g(y)]
    p = FinSet(pair_token(x, y) for x, y in pairs)
    p1 = FinFn(p, f.dom, {pair_token(x, y): x for x, y in pairs})
    p2 = FinFn(p, g.dom, {pair_token(x, y): y for x, y in pairs})
    return p, p1, p2


def fillin(e: FinFn, m: FinFn, f: FinFn, g: FinFn) -> FinFn:
    """Unique diagonal d with d ∘ e = f and m ∘ d = g.

    The square has e : X ↠ Y on top, f : X → X' on the left, g : Y → Y' on
    the right and m : X' ↣ Y' at the bottom; requires m ∘ f = g ∘ e.
    """
    if not e.is_surjective():
        raise ValueError("e must be surjective")
    if not m.is_injective():
        raise ValueError("m must be injective")
    if f.dom != e.dom or g.dom != e.cod or f.cod != m.dom or g.cod != m.cod:
        raise ValueError("square boundary mismatch")
    for x in e.dom:
        if m(f(x)) != g(e(x)):
            raise NonCommutingSquare(f"square does not commute at {x!r}")
    d: dict[str, str] = {}
    for x in e.dom:
        y = e(x)
        if y in d and d[y] != f(x):
            # cannot happen when the square commutes and m is injective
            raise NonCommutingSquare(f"no single-valued diagonal at {y!r}")
        d[y] = f(x)
    return FinFn(e.cod, m.dom, d)


def all_functions(dom: FinSet, cod: FinSet) -> Iterator[FinFn]:
    """All |cod|^|dom| total functions, in a deterministic order."""
    if len(dom) == 0:
        yield FinFn(dom, cod, {})
        return
    for values in itertools.product(cod.elements, repeat=len(dom)):
        yield FinFn(dom, cod, dict(zip(dom.elements, values)))


def all_surjections(dom: FinSet, cod: FinSet) -> Iterator[FinFn]:
    return (f for f in all_functions(dom, cod) if f.is_surjective())


def all_injections(dom: FinSet, cod: FinSet) -> Iterator[FinFn]:
    return (f for f in all_functions(dom, cod) if f.is_injective())


@dataclass(frozen=True, order=True)
class EquivRel:
    """An equivalence relation on a finite carrier, stored as a partition.

    Blocks are sorted internally and ordered by their least element, so equal
    relations have equal representations.
    """

    carrier: FinSet
    blocks: tuple[tuple[str, ...], ...]

    def __init__(self, carrier: FinSet, blocks: Iterable[Iterable[str]]):
        canon = tuple(sorted(tuple(sorted(b)) for b in blocks))
        seen = [x for b in canon for x in b]
        if sorted(seen) != list(carrier.elements) or any(len(b) == 0 for b in canon):
            raise ValueError("blocks must partition the carrier")
        object.__setattr__(self, "carrier", carrier)
        object.__setattr__(self, "blocks", canon)

    def __hash__(self):
        return _memo_hash(self, ("EquivRel", self.carrier.elements, self.blocks))

    def block_of(self, x: str) -> tuple[str, ...]:
        for b in self.blocks:
            if x in b:
                return b
        raise KeyError(x)

    def relates(self, x: str, y: str) -> bool:
        return y in self.block_of(x)

    def refines(self, other: "EquivRel") -> bool:
        """True iff self ⊆ other as subsets of carrier × carrier."""
        if self.carrier != other.carrier:
            raise ValueError("carrier mismatch")
        return all(set(b) <= set(other.block_of(b[0])) for b in self.blocks)

    def label(self) -> str:
        return "|".join("+".join(b) for b in self.blocks)

    @staticmethod
    def discrete(carrier: FinSet) -> "EquivRel":
        return EquivRel(carrier, ((x,) for x in carrier))

    @staticmethod
    def total(carrier: FinSet) -> "EquivRel":
        if len(carrier) == 0:
            return EquivRel(carrier, ())
        return EquivRel(carrier, (tuple(carrier.elements),))


def kernel(f: FinFn) -> EquivRel:
    """The finest relation f respects: v ~ v' iff f v = f v'."""
    fibers: dict[str, list[str]] = {}
    for x in f.dom:
        fibers.setdefault(f(x), []).append(x)
    return EquivRel(f.dom, fibers.values())


def respects(f: FinFn, rel: EquivRel) -> bool:
    """True iff v R v' implies f v = f v', i.e. R ⊆ kernel(f)."""
    if rel.carrier != f.dom:
        raise ValueError("relation carrier must be the domain of f")
    return all(len(set(f(x) for x in b)) <= 1 for b in rel.blocks)


def quotient(carrier: FinSet, rel: EquivRel) -> tuple[FinSet, FinFn]:
    """The quotient set with one ``+``-joined token per block, and the projection."""
    if rel.carrier != carrier:
        raise ValueError("relation is not over the given carrier")
    names = {b: "+".join(b) for b in rel.blocks}
    q = FinSet(names.values())
    proj = FinFn(carrier, q, {x: names[rel.block_of(x)] for x in carrier})
    return q, proj


def equiv_lattice(carrier: FinSet) -> list[EquivRel]:
    """All equivalence relations on the carrier (Bell-number many)."""

    def partitions(items: tuple[str, ...]) -> Iterator[list[list[str]]]:
        if not items:
            yield []
            return
        head, rest = items[0], items[1:]
        for part in partitions(rest):
            for i in range(len(part)):
                yield part[:i] + [part[i] + [head]] + part[i + 1 :]
            yield part + [[head]]

    rels = {EquivRel(carrier, p) for p in partitions(carrier.elements)}
    return sorted(rels)


def up_closure(carrier: FinSet, rels: Iterable[EquivRel]) -> frozenset[EquivRel]:
    """All relations containing some member of rels (as subsets of V × V)."""
    base = list(rels)
    return frozenset(
        r for r in equiv_lattice(carrier) if any(s.refines(r) for s in base)
    )


def join_equiv(a: EquivRel, b: EquivRel) -> EquivRel:
    """Smallest equivalence relation containing both a and b."""
    if a.carrier != b.carrier:
        raise ValueError("carrier mismatch")
    parent = {x: x for x in a.carrier}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for rel in (a, b):
        for block in rel.blocks:
            for other in block[1:]:
                parent[find(other)] = find(block[0])
    groups: dict[str, list[str]] = {}
    for x in a.carrier:
        groups.setdefault(find(x), []).append(x)
    return EquivRel(a.carrier, groups.values())


def disjoint_union_point(carrier: FinSet) -> FinSet:
    """carrier ⊎ 1, with a deterministically chosen fresh token for the point."""
    fresh = "pt"
    while fresh in carrier:
        fresh += "_"
    return FinSet(tuple(carrier.elements) + (fresh,))
