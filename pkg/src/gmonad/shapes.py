"""Shape-level factorization of natural transformations.

Functors are presented extensionally: a model carries callables giving its
action on any finite set and any function, and checks quantify over a finite
probe universe.  The shapewise factorization of a transformation into T
factors the component at the one-point probe and pulls the image back along
T-of-the-unique-map, so its subobject part is determined by a subset of T1;
``check_coincidence`` compares this against the plain componentwise image
factorization, which agree on cartesian data over a stable base.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

from .algebra import LawReport
from .errors import PreconditionFailed
from .finset import (
    FinFn,
    FinSet,
    all_functions,
    all_surjections,
    factorize_surj_inj,
    pair_token,
    pullback,
)
from .grades import GradeObject, carrier, mk_s, tmap
from .monads import MonadInstance

GENERIC_THREE = FinSet(["x0", "x1", "x2"])


def shape_probes(max_size: int = 3) -> list[FinSet]:
    return [FinSet(f"x{i}" for i in range(n)) for n in range(1, max_size + 1)]


class FunctorModel:
    """An endofunctor on finite sets, presented by callables with caching."""

    def __init__(
        self,
        name: str,
        on_object: Callable[[FinSet], FinSet],
        on_morphism: Callable[[FinFn], FinFn],
    ):
        self.name = name
        self._on_object = on_object
        self._on_morphism = on_morphism
        self._objs: dict[FinSet, FinSet] = {}
        self._arrs: dict[FinFn, FinFn] = {}

    def obj(self, x: FinSet) -> FinSet:
        if x not in self._objs:
            self._objs[x] = self._on_object(x)
        return self._objs[x]

    def arr(self, f: FinFn) -> FinFn:
        if f not in self._arrs:
            self._arrs[f] = self._on_morphism(f)
        return self._arrs[f]


def monad_functor(m: MonadInstance) -> FunctorModel:
    """The underlying endofunctor of a monad instance, on element tokens."""

    def on_object(x: FinSet) -> FinSet:
        return carrier(m.elements(x))[0]

    def on_morphism(f: FinFn) -> FinFn:
        return FinFn(
            model.obj(f.dom),
            model.obj(f.cod),
            {t.token(): tmap(f, t).token() for t in m.elements(f.dom)},
        )

    model = FunctorModel(m.name, on_object, on_morphism)
    return model


def grade_functor(m: MonadInstance, sigma: GradeObject) -> FunctorModel:
    """The subfunctor picked out by a grade, sharing the monad's tokens."""

    def on_object(x: FinSet) -> FinSet:
        return carrier(mk_s(sigma, x))[0]

    def on_morphism(f: FinFn) -> FinFn:
        return FinFn(
            model.obj(f.dom),
            model.obj(f.cod),
            {t.token(): tmap(f, t).token() for t in mk_s(sigma, f.dom)},
        )

    model = FunctorModel(f"{m.name}[{sigma.label()}]", on_object, on_morphism)
    return model


@dataclass
class NatTrans:
    """A natural transformation presented by its components at probes."""

    source: FunctorModel
    target: FunctorModel
    probes: tuple[FinSet, ...]
    component: Callable[[FinSet], FinFn]

    def __post_init__(self):
        self._at: dict[FinSet, FinFn] = {}
        for f in probe_morphisms(self.probes):
            lhs = self.target.arr(f).compose(self.at(f.dom))
            rhs = self.at(f.cod).compose(self.source.arr(f))
            if lhs != rhs:
                raise ValueError(f"naturality fails along {f!r}")

    def at(self, x: FinSet) -> FinFn:
        if x not in self._at:
            self._at[x] = self.component(x)
        return self._at[x]


def probe_morphisms(probes: Iterable[FinSet]) -> list[FinFn]:
    ps = list(probes)
    out: list[FinFn] = []
    for x in ps:
        for y in ps:
            out.extend(all_functions(x, y))
    return out


def grade_inclusion(
    m: MonadInstance, sigma: GradeObject, probes: Iterable[FinSet]
) -> NatTrans:
    """The inclusion of a grade's subfunctor into the monad functor."""
    sub = grade_functor(m, sigma)
    whole = monad_functor(m)

    def component(x: FinSet) -> FinFn:
        return FinFn(sub.obj(x), whole.obj(x), {t: t for t in sub.obj(x)})

    return NatTrans(sub, whole, tuple(probes), component)


def compose_nt(outer: NatTrans, inner: NatTrans) -> NatTrans:
    """Vertical composition (outer after inner)."""
    return NatTrans(
        inner.source,
        outer.target,
        inner.probes,
        lambda x: outer.at(x).compose(inner.at(x)),
    )


def is_cartesian(t: NatTrans) -> bool:
    """Are all naturality squares over the probe morphisms pullbacks?"""
    for f in probe_morphisms(t.probes):
        sx = t.source.obj(f.dom)
        sf = t.source.arr(f)
        tx = t.at(f.dom)
        # pullback of (t at cod) along (target of f)
        p, _, _ = pullback(t.at(f.cod), t.target.arr(f))
        mediating = {pair_token(sf(s), tx(s)) for s in sx}
        if len(mediating) != len(sx) or len(p) != len(sx):
            return False
        if mediating != set(p.elements):
            return False
    return True


@dataclass
class ShapeFactorization:
    mid: FunctorModel
    e: NatTrans
    m: NatTrans


def _one_probe(probes: Iterable[FinSet]) -> FinSet:
    for p in probes:
        if len(p) == 1:
            return p
    raise PreconditionFailed("the probe universe must contain a one-point set")


def factorize_shapewise(t: NatTrans) -> ShapeFactorization:
    """Factor through the image at the one-point probe, pulled back along T!.

    The middle functor at X collects the target elements whose shape (image
    under the action on X → 1) lies in the image of the component at 1; the
    E-part has the same underlying maps as t, the M-part is the inclusion.
    """
    one = _one_probe(t.probes)
    fac1 = factorize_surj_inj(t.at(one))
    image1 = set(fac1.mid.elements)
    target = t.target

    def mid_obj(x: FinSet) -> FinSet:
        bang = FinFn.constant(x, one, one.elements[0])
        shape = target.arr(bang)
        return FinSet(g for g in target.obj(x) if shape(g) in image1)

    def mid_arr(f: FinFn) -> FinFn:
        whole = target.arr(f)
        return FinFn(
            mid.obj(f.dom), mid.obj(f.cod), {g: whole(g) for g in mid.obj(f.dom)}
        )

    mid = FunctorModel(f"{target.name}|shape", mid_obj, mid_arr)
    e = NatTrans(
        t.source,
        mid,
        t.probes,
        lambda x: FinFn(t.source.obj(x), mid.obj(x), t.at(x).as_dict()),
    )
    m = NatTrans(
        mid, target, t.probes, lambda x: FinFn(mid.obj(x), target.obj(x), {g: g for g in mid.obj(x)})
    )
    return ShapeFactorization(mid, e, m)


def preserves_probe_pullbacks(model: FunctorModel, probes: Iterable[FinSet]) -> bool:
    """Does the functor carry probe cospan pullbacks to pullbacks?"""
    ps = list(probes)
    for z in ps:
        for x in ps:
            for y in ps:
                for f in all_functions(x, z):
                    for g in all_functions(y, z):
                        p, p1, p2 = pullback(f, g)
                        fp = model.obj(p)
                        lhs = {
                            pair_token(model.arr(p1)(u), model.arr(p2)(u))
                            for u in fp
                        }
                        rhs_set, _, _ = pullback(model.arr(f), model.arr(g))
                        if len(lhs) != len(fp) or lhs != set(rhs_set.elements):
                            return False
    return True


def check_coincidence(t: NatTrans) -> LawReport:
    """Componentwise and shapewise factorizations share the same middle.

    Requires t cartesian and both functor presentations cartesian (pullback
    preserving over the probes); raises PreconditionFailed otherwise.
    """
    if not is_cartesian(t):
        raise PreconditionFailed("transformation is not cartesian")
    small = [p for p in t.probes if len(p) <= 2] or list(t.probes)
    if not preserves_probe_pullbacks(t.source, small):
        raise PreconditionFailed("source functor is not cartesian")
    if not preserves_probe_pullbacks(t.target, small):
        raise PreconditionFailed("target functor is not cartesian")
    shapewise = factorize_shapewise(t)
    for x in t.probes:
        componentwise = set(factorize_surj_inj(t.at(x)).mid.elements)
        if componentwise != set(shapewise.mid.obj(x).elements):
            return LawReport(
                "factorization-coincidence",
                False,
                f"probe={sorted(x.elements)}",
            )
    return LawReport("factorization-coincidence", True)


def check_stability(max_size: int = 3) -> LawReport:
    """Pullbacks of surjections are surjections, exhaustively over small sets."""
    sizes = [FinSet(f"e{i}" for i in range(n)) for n in range(max_size + 1)]
    for x in sizes[1:]:
        for z in sizes[1:]:
            for e in all_surjections(x, z):
                for y in sizes:
                    for g in all_functions(y, z):
                        _, _, p2 = pullback(e, g)
                        if not p2.is_surjective():
                            return LawReport(
                                "stability", False, f"e={e!r};g={g!r}"
                            )
    return LawReport("stability", True)


def check_cartesian_closure(m: NatTrans) -> LawReport:
    """A cartesian subobject of a cartesian functor has a cartesian source."""
    small = [p for p in m.probes if len(p) <= 2] or list(m.probes)
    if not is_cartesian(m):
        raise PreconditionFailed("transformation is not cartesian")
    if not preserves_probe_pullbacks(m.target, small):
        raise PreconditionFailed("target functor is not cartesian")
    ok = preserves_probe_pullbacks(m.source, small)
    return LawReport(
        "cartesian-closure", ok, None if ok else "source functor breaks a pullback"
    )


def shape_bijection_report(m: MonadInstance) -> LawReport:
    """Canonical grades correspond one-to-one with subsets of the shapes T1.

    Holds for the shape-graded instances (list, shapewise state), where the
    component at 1 determines the subfunctor.
    """
    one = min((p for p in m.probes() if len(p) >= 1), key=len)
    t1 = carrier(m.elements(one))[0]
    seen = {}
    for sigma in m.all_grades():
        key = frozenset(t.token() for t in mk_s(sigma, one))
        if key in seen:
            return LawReport(
                "shape-grade-bijection",
                False,
                f"{seen[key].label()};{sigma.label()}",
            )
        seen[key] = sigma
    expected = 2 ** len(t1)
    if len(seen) != expected:
        return LawReport(
            "shape-grade-bijection",
            False,
            f"got {len(seen)} grades for {expected} shape subsets",
        )
    return LawReport("shape-grade-bijection", True)
