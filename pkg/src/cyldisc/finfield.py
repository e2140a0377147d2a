"""Arithmetic in GF(p^m) given an explicit monic irreducible polynomial.

Elements are little-endian coefficient tuples modulo ``poly``.  Every element
also has an integer index ``sum(c_i * p**i)``; enumeration is in index order,
so index 0 is zero, index 1 is one and index ``p`` is ``x``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .errors import NotIrreducible, NotMonic, NotPrime, ValidationError


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def prime_power(n: int) -> tuple[int, int] | None:
    """Return ``(p, m)`` with ``n == p**m`` and p prime, or None."""
    if n < 2:
        return None
    p = 2
    while p * p <= n and n % p:
        p += 1
    if n % p:
        p = n
    m = 0
    while n % p == 0:
        n //= p
        m += 1
    return (p, m) if n == 1 else None


def is_prime_power(n: int) -> bool:
    return prime_power(n) is not None


def _poly_rem(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    # b is monic
    r = list(a)
    db = len(b) - 1
    for shift in range(len(r) - 1 - db, -1, -1):
        c = r[shift + db] % p
        if c:
            for i, bc in enumerate(b):
                r[shift + i] = (r[shift + i] - c * bc) % p
    r = [c % p for c in r[:db]] if db else []
    return r


def _monic_polys(p: int, d: int) -> Iterable[tuple[int, ...]]:
    for low in itertools.product(range(p), repeat=d):
        yield tuple(reversed(low)) + (1,)


def is_irreducible(poly: Sequence[int], p: int) -> bool:
    """Trial division by every monic polynomial of degree 1..deg/2."""
    m = len(poly) - 1
    for d in range(1, m // 2 + 1):
        for divisor in _monic_polys(p, d):
            if not any(_poly_rem(poly, divisor, p)):
                return False
    return True


@dataclass(frozen=True)
class FieldSpec:
    p: int
    m: int
    poly: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "poly", tuple(int(c) for c in self.poly))
        if not is_prime(self.p):
            raise NotPrime(f"p={self.p} is not prime")
        if self.m < 1:
            raise ValidationError(f"extension degree m={self.m} must be >= 1")
        if len(self.poly) != self.m + 1:
            raise ValidationError(f"poly must have m+1={self.m + 1} coefficients, got {len(self.poly)}")
        if any(not 0 <= c < self.p for c in self.poly):
            raise ValidationError(f"poly coefficients must lie in [0, {self.p})")
        if self.poly[-1] != 1:
            raise NotMonic(f"poly {list(self.poly)} is not monic")
        if not is_irreducible(self.poly, self.p):
            raise NotIrreducible(f"poly {list(self.poly)} is reducible over GF({self.p})")

    @property
    def q(self) -> int:
        return self.p**self.m

    def to_json(self) -> dict:
        return {"p": self.p, "m": self.m, "poly": list(self.poly)}

    @classmethod
    def from_json(cls, obj: dict) -> FieldSpec:
        try:
            p, m = int(obj["p"]), int(obj.get("m", 1))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"field: malformed spec {obj!r}") from exc
        poly = obj.get("poly")
        return ff_make(p, m, poly)


def ff_make(p: int, m: int = 1, poly: Sequence[int] | None = None) -> FieldSpec:
    """Validated field spec; a prime field defaults to the polynomial ``x``."""
    if poly is None:
        if m != 1:
            raise ValidationError("extension fields need an explicit irreducible polynomial")
        poly = (0, 1)
    return FieldSpec(p, m, tuple(poly))


@dataclass(frozen=True, order=True)
class FieldElement:
    coeffs: tuple[int, ...]

    def index(self, p: int) -> int:
        return sum(c * p**i for i, c in enumerate(self.coeffs))

    def __str__(self) -> str:
        terms = []
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            if not mono:
                terms.append(str(c))
            else:
                terms.append(mono if c == 1 else f"{c}{mono}")
        return "+".join(reversed(terms)) or "0"


def _check(spec: FieldSpec, a: FieldElement) -> None:
    if len(a.coeffs) != spec.m or any(not 0 <= c < spec.p for c in a.coeffs):
        raise ValidationError(f"{a!r} is not an element of GF({spec.q})")


def ff_element(spec: FieldSpec, index: int) -> FieldElement:
    if not 0 <= index < spec.q:
        raise ValidationError(f"index {index} out of range for GF({spec.q})")
    coeffs = []
    for _ in range(spec.m):
        index, c = divmod(index, spec.p)
        coeffs.append(c)
    return FieldElement(tuple(coeffs))


def ff_add(spec: FieldSpec, a: FieldElement, b: FieldElement) -> FieldElement:
    _check(spec, a)
    _check(spec, b)
    return FieldElement(tuple((x + y) % spec.p for x, y in zip(a.coeffs, b.coeffs)))


def ff_mul(spec: FieldSpec, a: FieldElement, b: FieldElement) -> FieldElement:
    _check(spec, a)
    _check(spec, b)
    prod = [0] * (2 * spec.m - 1)
    for i, x in enumerate(a.coeffs):
        if x:
            for j, y in enumerate(b.coeffs):
                prod[i + j] += x * y
    rem = _poly_rem(prod, spec.poly, spec.p)
    rem += [0] * (spec.m - len(rem))
    return FieldElement(tuple(rem))


def ff_enumerate(spec: FieldSpec) -> list[FieldElement]:
    return [ff_element(spec, i) for i in range(spec.q)]


class Field:
    """Index-level arithmetic tables for a field spec.

    Downstream code works with element indices; the tables are built once
    from ``ff_add``/``ff_mul``.
    """

    def __init__(self, spec: FieldSpec):
        self.spec = spec
        self.q = spec.q
        self.elements = ff_enumerate(spec)

    @cached_property
    def add_table(self) -> tuple[tuple[int, ...], ...]:
        p = self.spec.p
        return tuple(
            tuple(ff_add(self.spec, a, b).index(p) for b in self.elements) for a in self.elements
        )

    @cached_property
    def mul_table(self) -> tuple[tuple[int, ...], ...]:
        p = self.spec.p
        return tuple(
            tuple(ff_mul(self.spec, a, b).index(p) for b in self.elements) for a in self.elements
        )

    def add(self, a: int, b: int) -> int:
        return self.add_table[a][b]

    def mul(self, a: int, b: int) -> int:
        return self.mul_table[a][b]

    def inverse(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero has no inverse")
        return self.mul_table[a].index(1)
