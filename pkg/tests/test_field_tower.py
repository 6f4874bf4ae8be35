import pytest

from artifact.errors import (
    InvariantViolation,
    NoPthRootsOfUnity,
    NotEisenstein,
    NotGalois,
    NotIrreducible,
    PrimeMismatch,
    UnsupportedTower,
)
from artifact.field_tower import (
    build_lattice_model,
    default_unramified_poly,
    find_conjugates,
    irreducible_mod_p,
    kummer_extension,
    make_tower,
    poly_eval,
    _top_poly_in,
)
from artifact.padic_arith import AtLeast

from conftest import catalog_model


def eis(poly):
    return {"kind": "eisenstein", "poly": poly}


def test_quadratic_tower_invariants():
    L = make_tower(2, [eis([-2, 0, 1])])
    assert (L.e, L.f, L.degree) == (2, 1, 2)


def test_cubic_tower_invariants():
    L = make_tower(3, [eis([3, 0, -3, 1])])
    assert (L.e, L.f) == (3, 1)


def test_unramified_tower_invariants():
    L = make_tower(2, [{"kind": "unramified", "poly": [1, 1, 1]}])
    assert (L.e, L.f) == (1, 2)


def test_validation_errors():
    with pytest.raises(NotIrreducible):
        make_tower(2, [{"kind": "unramified", "poly": [1, 0, 1]}])
    with pytest.raises(NotEisenstein):
        make_tower(2, [eis([1, 0, 1])])
    with pytest.raises(NotEisenstein):
        make_tower(3, [eis([9, 0, 1])])
    with pytest.raises(PrimeMismatch):
        make_tower(2, [{"kind": "eisenstein", "poly": [-2, 0, 1], "p": 3}])
    with pytest.raises(UnsupportedTower):
        make_tower(2, [eis([-2, 0, 1]), {"kind": "unramified", "poly": [[1, 0], [1, 0], 1]}])


def test_default_unramified_poly_is_smallest_irreducible():
    assert default_unramified_poly(2, 2) == (1, 1, 1)
    assert default_unramified_poly(3, 2) == (1, 0, 1)
    assert irreducible_mod_p([1, 1, 0, 1], 2)
    assert not irreducible_mod_p([1, 0, 0, 1], 2)


def test_valuation_examples():
    L = make_tower(2, [eis([-2, 0, 1])])
    pi = L.generator()
    assert pi.valuation() == 1
    assert L.from_int(2).valuation() == 2
    assert (pi + 1).valuation() == 0
    assert L.zero().valuation() == AtLeast(L.e * L.precision)


def test_valuation_is_multiplicative_and_ultrametric():
    L = make_tower(3, [eis([3, 3, 1]), eis([[0, -1], 0, 0, 1])])
    g = L.generator()
    xs = [g, g + 3, g**2 - g**5, L.from_int(3) + g**4, g**7 + 1]
    for x in xs:
        for y in xs:
            assert (x * y).valuation() == x.valuation() + y.valuation()
            s = (x + y).valuation()
            assert isinstance(s, AtLeast) or s >= min(x.valuation(), y.valuation())
    assert L.from_int(3).valuation() == L.e


def test_inverse():
    L = make_tower(3, [eis([3, 0, -3, 1])])
    x = L.generator() + 3
    assert (x * x.inverse()).agrees_with(L.one())
    assert x.inverse().valuation() == -1


def test_quadratic_conjugates():
    L = make_tower(2, [eis([-2, 0, 1])])
    pi = L.generator()
    roots = find_conjugates(L)
    assert len(roots) == 2
    assert roots[0].agrees_with(pi) and roots[1].agrees_with(-pi)


@pytest.mark.parametrize("layers,p", [
    ([eis([3, 0, -3, 1])], 3),
    ([eis([3, 3, 1]), eis([[0, -1], 0, 0, 1])], 3),
    ([eis([-2, 0, 1]), eis([[2, -1], [2, -1], 1])], 2),
])
def test_conjugates_are_roots(layers, p):
    L = make_tower(p, layers)
    P = _top_poly_in(L)
    roots = find_conjugates(L)
    assert len(roots) == L.layers[-1].degree
    for r in roots:
        v = poly_eval(P, r).valuation()
        assert isinstance(v, AtLeast) or v >= L.precision - 4


def test_not_galois():
    with pytest.raises(NotGalois):
        find_conjugates(make_tower(2, [eis([2, 0, 0, 1])]))


def test_kummer_roots_are_zeta_multiples():
    K = make_tower(3, [eis([3, 3, 1])])
    L = kummer_extension(K)
    m = build_lattice_model(L)
    pi = L.generator()
    zeta = L.embed(K.generator()) + 1
    assert m.apply(1, pi).agrees_with(zeta * pi)
    assert kummer_extension(make_tower(2, [])).degree == 2
    with pytest.raises(NoPthRootsOfUnity):
        kummer_extension(make_tower(3, []))


def test_model_matrices_small_cases():
    m, _ = catalog_model("Q2(sqrt2)/Q2")
    assert [[x.int_coords()[0] % 4 for x in row] for row in m.matrices[1]] == [[1, 0], [0, 3]]
    m, _ = catalog_model("Q2(sqrt-1)/Q2")
    mod = 2**m.precision
    got = [[x.int_coords()[0] % mod for x in row] for row in m.matrices[1]]
    assert got == [[1, 2], [0, mod - 1]]


def test_group_law_on_catalog():
    from artifact.catalog import CATALOG

    for e in CATALOG:
        m, _ = catalog_model(e.name)
        n = m.n
        for i in range(n):
            for j in range(n):
                x = m.apply(i, m.apply(j, m.top.generator() + 1))
                assert x.agrees_with(m.apply((i + j) % n, m.top.generator() + 1))
        for row in m.flat[0]:
            assert sum(row) == 1


def test_model_rejects_compositum_base():
    L = make_tower(2, [eis([-2, 0, 1]), eis([[2, -1], [2, -1], 1])])
    with pytest.raises(UnsupportedTower):
        build_lattice_model(L, L.subtower(0))
