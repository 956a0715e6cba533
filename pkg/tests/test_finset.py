"""Kernel checks: factorization, pullbacks, fill-ins, equivalence lattices."""

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gmonad.errors import NonCommutingSquare
from gmonad.finset import (
    EquivRel,
    FinFn,
    FinSet,
    all_functions,
    all_injections,
    all_surjections,
    equiv_lattice,
    factorize_surj_inj,
    fillin,
    join_equiv,
    kernel,
    pullback,
    quotient,
    respects,
    up_closure,
)

AB = FinSet(["a", "b"])
ABC = FinSet(["a", "b", "c"])
N3 = FinSet(["0", "1", "2"])


def sized_sets(max_size):
    return [FinSet(f"e{i}" for i in range(n)) for n in range(max_size + 1)]


def small_fn(draw):
    dom = draw(st.sampled_from(sized_sets(4)[1:]))
    cod = draw(st.sampled_from(sized_sets(4)[1:]))
    values = draw(st.lists(st.sampled_from(cod.elements), min_size=len(dom), max_size=len(dom)))
    return FinFn(dom, cod, dict(zip(dom.elements, values)))


fns = st.composite(lambda draw: small_fn(draw))()


def test_factorize_identity():
    f = FinFn.identity(AB)
    fac = factorize_surj_inj(f)
    assert fac.mid == AB
    assert fac.e == f and fac.m == f


def test_factorize_image_forced():
    f = FinFn(ABC, N3, {"a": "0", "b": "0", "c": "2"})
    fac = factorize_surj_inj(f)
    assert fac.mid == FinSet(["0", "2"])


def test_factorize_components_match_definition():
    # e x = f x and m y = y
    f = FinFn(ABC, N3, {"a": "1", "b": "1", "c": "0"})
    fac = factorize_surj_inj(f)
    assert all(fac.e(x) == f(x) for x in f.dom)
    assert all(fac.m(y) == y for y in fac.mid)


@given(fns)
@settings(max_examples=200)
def test_factorize_property(f):
    fac = factorize_surj_inj(f)
    assert fac.e.is_surjective()
    assert fac.m.is_injective()
    assert fac.m.compose(fac.e) == f


def test_factorize_exhaustive_small():
    for dom in sized_sets(3):
        for cod in sized_sets(3):
            for f in all_functions(dom, cod):
                fac = factorize_surj_inj(f)
                assert fac.m.compose(fac.e) == f
                assert fac.e.is_surjective() and fac.m.is_injective()


def test_pullback_identity_diagonal():
    f = FinFn.identity(FinSet(["0", "1"]))
    p, p1, p2 = pullback(f, f)
    assert len(p) == 2
    assert all(p1(x) == p2(x) for x in p)


def test_pullback_counts():
    one = FinSet(["0"])
    f = FinFn(FinSet(["a"]), one, {"a": "0"})
    g = FinFn(FinSet(["b", "c"]), one, {"b": "0", "c": "0"})
    p, _, _ = pullback(f, g)
    assert len(p) == 2


def test_pullback_of_injection_is_injection():
    # pulling back m along g: the leg over dom(g) mirrors m and stays injective
    for z in sized_sets(3)[1:]:
        for y in sized_sets(3):
            for m in all_injections(y, z):
                for x in sized_sets(3)[1:]:
                    for g in all_functions(x, z):
                        _, _, p2 = pullback(m, g)
                        assert p2.is_injective()


def test_pullback_universal_property_small():
    z = FinSet(["z0", "z1"])
    x = FinSet(["x0", "x1"])
    y = FinSet(["y0", "y1", "y2"])
    for f in all_functions(x, z):
        for g in all_functions(y, z):
            p, p1, p2 = pullback(f, g)
            assert f.compose(p1) == g.compose(p2)
            # every commuting cone factors uniquely through the pullback
            w = FinSet(["w"])
            for a in all_functions(w, x):
                for b in all_functions(w, y):
                    if f.compose(a) != g.compose(b):
                        continue
                    mediating = [
                        u
                        for u in all_functions(w, p)
                        if p1.compose(u) == a and p2.compose(u) == b
                    ]
                    assert len(mediating) == 1


def test_fillin_singleton_forced():
    star = FinSet(["*"])
    zero = FinSet(["0"])
    zo = FinSet(["0", "1"])
    e = FinFn(AB, star, {"a": "*", "b": "*"})
    m = FinFn(zero, zo, {"0": "0"})
    f = FinFn(AB, zero, {"a": "0", "b": "0"})
    g = FinFn(star, zo, {"*": "0"})
    d = fillin(e, m, f, g)
    assert d("*") == "0"


def test_fillin_identity_e():
    e = FinFn.identity(AB)
    m = FinFn(AB, ABC, {"a": "a", "b": "b"})
    f = FinFn(AB, AB, {"a": "b", "b": "a"})
    g = m.compose(f)
    assert fillin(e, m, f, g) == f


def test_fillin_rejects_noncommuting():
    star = FinSet(["*"])
    zo = FinSet(["0", "1"])
    e = FinFn(AB, star, {"a": "*", "b": "*"})
    m = FinFn.identity(zo)
    f = FinFn(AB, zo, {"a": "0", "b": "1"})
    g = FinFn(star, zo, {"*": "0"})
    with pytest.raises(NonCommutingSquare):
        fillin(e, m, f, g)


def test_orthogonality_unique_diagonal_exhaustive():
    """Brute force: d returned by fillin is the only diagonal (sets of size ≤ 3)."""
    sizes = sized_sets(3)
    for X, Y in itertools.product(sizes[1:], sizes[1:]):
        for e in all_surjections(X, Y):
            for Xp, Yp in itertools.product(sizes, sizes):
                for m in all_injections(Xp, Yp):
                    for f in all_functions(X, Xp):
                        # e surjective: g is determined by f when consistent
                        try:
                            g = FinFn(Y, Yp, {e(x): m(f(x)) for x in X})
                        except ValueError:
                            continue
                        if any(m(f(x)) != g(e(x)) for x in X):
                            continue
                        d = fillin(e, m, f, g)
                        found = [
                            c
                            for c in all_functions(Y, Xp)
                            if c.compose(e) == f and m.compose(c) == g
                        ]
                        assert found == [d]


def test_kernel_injective_constant():
    f = FinFn(N3, ABC, {"0": "a", "1": "b", "2": "c"})
    assert kernel(f) == EquivRel.discrete(N3)
    g = FinFn.constant(N3, ABC, "a")
    assert kernel(g) == EquivRel.total(N3)


def test_kernel_example():
    f = FinFn(N3, AB, {"0": "a", "1": "a", "2": "b"})
    assert kernel(f) == EquivRel(N3, [["0", "1"], ["2"]])


def test_respects_basics():
    f = FinFn.identity(FinSet(["0", "1"]))
    assert respects(f, EquivRel.discrete(f.dom))
    assert not respects(f, EquivRel.total(f.dom))
    c = FinFn.constant(N3, AB, "a")
    assert respects(c, EquivRel.total(N3))


def test_quotient_shapes():
    v = FinSet(["0", "1"])
    q, proj = quotient(v, EquivRel.discrete(v))
    assert q == v and proj.is_injective() and proj.is_surjective()
    q, proj = quotient(v, EquivRel.total(v))
    assert len(q) == 1
    rel = EquivRel(N3, [["0", "1"], ["2"]])
    q, proj = quotient(N3, rel)
    assert len(q) == 2
    assert kernel(proj) == rel


def test_kernel_quotient_adjunction():
    """respects(f, R) iff f factors through the quotient projection."""
    v = N3
    x = AB
    for rel in equiv_lattice(v):
        q, proj = quotient(v, rel)
        for f in all_functions(v, x):
            factors = any(
                h.compose(proj) == f for h in all_functions(q, x)
            )
            assert respects(f, rel) == factors


def test_equiv_lattice_counts():
    assert len(equiv_lattice(AB)) == 2
    assert len(equiv_lattice(N3)) == 5


def test_up_closure_top_and_props():
    top = EquivRel.total(N3)
    assert up_closure(N3, [top]) == frozenset([top])
    lattice = equiv_lattice(N3)
    for rel in lattice:
        cl = up_closure(N3, [rel])
        # extensive, idempotent
        assert rel in cl
        assert up_closure(N3, cl) == cl
    # monotone
    cl_one = up_closure(N3, [lattice[0]])
    cl_two = up_closure(N3, lattice[:2])
    assert cl_one <= cl_two


def test_join_is_least_upper_bound():
    for a in equiv_lattice(N3):
        for b in equiv_lattice(N3):
            j = join_equiv(a, b)
            assert a.refines(j) and b.refines(j)
            for c in equiv_lattice(N3):
                if a.refines(c) and b.refines(c):
                    assert j.refines(c)


def test_stability_pullback_of_surjection_surjective():
    """(Surj, Inj) is stable: pullbacks of surjections are surjections (≤ 3)."""
    sizes = sized_sets(3)
    for X, Z in itertools.product(sizes[1:], sizes[1:]):
        for e in all_surjections(X, Z):
            for Y in sizes:
                for g in all_functions(Y, Z):
                    _, _, p2 = pullback(e, g)
                    assert p2.is_surjective()


@given(fns)
@settings(max_examples=100)
def test_kernel_is_respected(f):
    assert respects(f, kernel(f))
