import itertools

import pytest
from sympy.polys.domains import ZZ
from sympy.polys.galoistools import gf_irreducible_p, gf_mul, gf_rem

from cyldisc.errors import NotIrreducible, NotMonic, NotPrime, ValidationError
from cyldisc.finfield import (
    Field,
    FieldElement,
    FieldSpec,
    ff_add,
    ff_element,
    ff_enumerate,
    ff_make,
    ff_mul,
    is_irreducible,
    prime_power,
)

# every field with q <= 9, with a fixed irreducible polynomial
GRID = [
    (2, 1, None),
    (3, 1, None),
    (2, 2, [1, 1, 1]),
    (5, 1, None),
    (7, 1, None),
    (2, 3, [1, 1, 0, 1]),
    (3, 2, [1, 0, 1]),
]


@pytest.fixture(params=GRID, ids=lambda g: f"GF({g[0]}^{g[1]})")
def field(request):
    return Field(ff_make(*request.param))


def E(*coeffs):
    return FieldElement(tuple(coeffs))


def test_make_examples():
    assert ff_make(2, 1, [0, 1]).q == 2
    assert ff_make(2, 2, [1, 1, 1]).q == 4
    with pytest.raises(NotIrreducible):
        ff_make(2, 2, [0, 0, 1])


def test_make_errors():
    with pytest.raises(NotPrime):
        ff_make(4)
    with pytest.raises(NotMonic):
        ff_make(3, 2, [1, 0, 2])
    with pytest.raises(ValidationError):
        ff_make(2, 2)  # extension field without a polynomial
    with pytest.raises(ValidationError):
        ff_make(2, 2, [1, 1])


def test_add_examples():
    gf2, gf3, gf4 = ff_make(2), ff_make(3), ff_make(2, 2, [1, 1, 1])
    assert ff_add(gf2, E(1), E(1)) == E(0)
    assert ff_add(gf3, E(2), E(2)) == E(1)
    # x + (x+1) = 1 in characteristic 2
    assert ff_add(gf4, E(0, 1), E(1, 1)) == E(1, 0)


def test_mul_examples():
    assert ff_mul(ff_make(2), E(1), E(1)) == E(1)
    assert ff_mul(ff_make(3), E(2), E(2)) == E(1)
    assert ff_mul(ff_make(2, 2, [1, 1, 1]), E(0, 1), E(0, 1)) == E(1, 1)


def test_enumerate_examples():
    assert ff_enumerate(ff_make(2)) == [E(0), E(1)]
    assert ff_enumerate(ff_make(3)) == [E(0), E(1), E(2)]
    assert ff_enumerate(ff_make(2, 2, [1, 1, 1])) == [E(0, 0), E(1, 0), E(0, 1), E(1, 1)]


def test_rejects_foreign_elements():
    with pytest.raises(ValidationError):
        ff_add(ff_make(2), E(2), E(0))
    with pytest.raises(ValidationError):
        ff_mul(ff_make(2, 2, [1, 1, 1]), E(1), E(1))


def _sympy_mul(spec: FieldSpec, a: FieldElement, b: FieldElement) -> tuple[int, ...]:
    # sympy wants big-endian coefficient lists
    big = lambda c: [ZZ(x) for x in reversed(c)]
    r = gf_rem(gf_mul(big(a.coeffs), big(b.coeffs), spec.p, ZZ), big(spec.poly), spec.p, ZZ)
    r = [int(x) for x in reversed(r)]
    return tuple(r + [0] * (spec.m - len(r)))


def test_mul_matches_sympy(field):
    spec = field.spec
    for a, b in itertools.product(field.elements, repeat=2):
        assert ff_mul(spec, a, b).coeffs == _sympy_mul(spec, a, b)


@pytest.mark.parametrize("p,m", [(2, 1), (2, 2), (2, 3), (3, 2), (5, 2)])
def test_irreducibility_matches_sympy(p, m):
    for low in itertools.product(range(p), repeat=m):
        poly = list(low) + [1]
        expected = gf_irreducible_p([ZZ(c) for c in reversed(poly)], p, ZZ)
        assert is_irreducible(poly, p) == expected, poly


def test_enumeration_distinct_and_ordered(field):
    elems = field.elements
    assert len(elems) == len(set(elems)) == field.q
    assert [e.index(field.spec.p) for e in elems] == list(range(field.q))
    assert all(c == 0 for c in elems[0].coeffs)


def test_field_axioms(field):
    q, add, mul = field.q, field.add, field.mul
    r = range(q)
    for a in r:
        assert add(a, 0) == a and mul(a, 1) == a
        assert any(add(a, b) == 0 for b in r)
        if a:
            assert mul(a, field.inverse(a)) == 1
    for a, b in itertools.product(r, repeat=2):
        assert add(a, b) == add(b, a)
        assert mul(a, b) == mul(b, a)
    for a, b, c in itertools.product(r, repeat=3):
        assert add(add(a, b), c) == add(a, add(b, c))
        assert mul(mul(a, b), c) == mul(a, mul(b, c))
        assert mul(a, add(b, c)) == add(mul(a, b), mul(a, c))


def test_freshmans_dream(field):
    p = field.spec.p

    def power(a, e):
        out = 1
        for _ in range(e):
            out = field.mul(out, a)
        return out

    for a, b in itertools.product(range(field.q), repeat=2):
        assert power(field.add(a, b), p) == field.add(power(a, p), power(b, p))


def test_element_index_roundtrip(field):
    for i in range(field.q):
        assert ff_element(field.spec, i).index(field.spec.p) == i


@pytest.mark.parametrize("n,expected", [(2, (2, 1)), (8, (2, 3)), (9, (3, 2)), (6, None), (1, None), (49, (7, 2))])
def test_prime_power(n, expected):
    assert prime_power(n) == expected


def test_spec_json_roundtrip():
    spec = ff_make(2, 2, [1, 1, 1])
    assert spec.to_json() == {"p": 2, "m": 2, "poly": [1, 1, 1]}
    assert FieldSpec.from_json(spec.to_json()) == spec


def test_element_str():
    assert str(E(1, 1)) == "x+1"
    assert str(E(0, 0)) == "0"
    assert str(E(2, 0, 1)) == "x^2+2"
