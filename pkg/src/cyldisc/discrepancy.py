"""Strong discrepancy, generalized inner products and the BHK bound.

All discrepancies are exact ``Fraction``s.  The BHK bound has a fractional
exponent, so comparisons against it go through :meth:`BhkBound.compare_exact`,
which raises both sides to the power ``2**(k-1)``.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from decimal import ROUND_CEILING, Context, Decimal
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Sequence

from .cylinder import (
    DEFAULT_CI_BUDGET,
    CylinderIntersection,
    ProductSpace,
    check_ci_budget,
    ci_from_index,
    iter_ci_masks,
)
from .errors import BudgetExceeded, InvariantViolation, ValidationError
from .finfield import Field, FieldElement, FieldSpec, ff_add, ff_mul, prime_power

DEFAULT_POINT_BUDGET = 1 << 20


@dataclass(frozen=True)
class FiniteFunction:
    """``f: Z -> B`` with Z = range(domain_size), B = range(range_size)."""

    domain_size: int
    range_size: int
    values: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(self.values))
        if self.domain_size < 1 or self.range_size < 1:
            raise ValidationError("domain and range must be nonempty")
        if len(self.values) != self.domain_size:
            raise ValidationError(f"expected {self.domain_size} values, got {len(self.values)}")
        if any(not 0 <= v < self.range_size for v in self.values):
            raise ValidationError("function value outside the range")

    @cached_property
    def fibers(self) -> tuple[int, ...]:
        """Preimage of each range value as a bitmask over Z."""
        fib = [0] * self.range_size
        for z, v in enumerate(self.values):
            fib[v] |= 1 << z
        return tuple(fib)


def _gamma_numerator(f: FiniteFunction, s: int) -> tuple[int, int, int]:
    # |B|*|f^-1(y) & S| - |S| scaled by |B|*|Z|; returns (numerator, argmax, |S|)
    size = s.bit_count()
    nb = f.range_size
    best, arg = -1, 0
    for y, fib in enumerate(f.fibers):
        dev = abs(nb * (fib & s).bit_count() - size)
        if dev > best:
            best, arg = dev, y
    return best, arg, size


def strong_discrepancy(f: FiniteFunction, s: int) -> tuple[Fraction, int]:
    """Return ``(Gamma(f, S), y)`` with ``y`` the smallest maximizing range value."""
    if s < 0 or s >> f.domain_size:
        raise ValidationError("S is not a subset of the domain")
    num, arg, _ = _gamma_numerator(f, s)
    return Fraction(num, f.range_size * f.domain_size), arg


def strong_discrepancy_conditional(f: FiniteFunction, s: int) -> Fraction:
    """Same quantity via ``|S|/|Z| * max_y |Pr_S[f = y] - 1/|B||``."""
    size = s.bit_count()
    if size == 0:
        return Fraction(0)
    dens = Fraction(size, f.domain_size)
    return max(
        dens * abs(Fraction((fib & s).bit_count(), size) - Fraction(1, f.range_size))
        for fib in f.fibers
    )


@dataclass(frozen=True)
class FiberReport:
    holds: bool
    gamma: Fraction
    counts: tuple[int, ...]
    lower_bounds: tuple[Fraction, ...]
    trigger: bool | None  # |S| >= alpha|Z| and gamma < alpha/|B|
    all_fibers_hit: bool


def fiber_bound_holds(f: FiniteFunction, s: int, alpha=None) -> FiberReport:
    """Check ``|f^-1(y) & S| >= |S|/|B| - Gamma * |Z|`` for every y.

    With ``alpha`` given, also evaluate whether the density trigger fires; if
    it does, every fiber must meet S.
    """
    gamma, _ = strong_discrepancy(f, s)
    size = s.bit_count()
    counts = tuple((fib & s).bit_count() for fib in f.fibers)
    lower = Fraction(size, f.range_size) - gamma * f.domain_size
    holds = all(c >= lower for c in counts)
    hit = all(c > 0 for c in counts)
    trigger = None
    if alpha is not None:
        alpha = Fraction(alpha)
        trigger = size >= alpha * f.domain_size and gamma < alpha / f.range_size
        if trigger and not hit:
            holds = False
    return FiberReport(holds, gamma, counts, (lower,) * f.range_size, trigger, hit)


@dataclass(frozen=True)
class GipSpec:
    field: FieldSpec
    s: int
    k: int

    def __post_init__(self) -> None:
        if self.s < 1:
            raise ValidationError("inner length s must be >= 1")
        if self.k < 2:
            raise ValidationError("number of parties k must be >= 2")

    @property
    def q(self) -> int:
        return self.field.q

    @property
    def space(self) -> ProductSpace:
        return ProductSpace((self.q**self.s,) * self.k)

    @property
    def points(self) -> int:
        return self.q ** (self.s * self.k)


def gip_eval(spec: GipSpec, x: Sequence[Sequence[FieldElement]]) -> FieldElement:
    """``sum_i x[0][i] * x[1][i] * ... * x[k-1][i]`` in the field."""
    if len(x) != spec.k or any(len(row) != spec.s for row in x):
        raise ValidationError(f"expected {spec.k} vectors of length {spec.s}")
    fs = spec.field
    zero = FieldElement((0,) * fs.m)
    one = FieldElement((1,) + (0,) * (fs.m - 1))
    total = zero
    for i in range(spec.s):
        term = one
        for row in x:
            term = ff_mul(fs, term, row[i])
        total = ff_add(fs, total, term)
    return total


def decode_gip_point(spec: GipSpec, point: int) -> list[list[int]]:
    """Element indices ``x[party][coordinate]`` of a point of ``(F_q^s)^k``.

    Each factor ``F_q^s`` is itself mixed radix with coordinate 0 most
    significant.
    """
    q, s = spec.q, spec.s
    out = []
    for v in spec.space.decode(point):
        digits = []
        for _ in range(s):
            v, d = divmod(v, q)
            digits.append(d)
        out.append(digits[::-1])
    return out


def gip_function(spec: GipSpec, budget: int = DEFAULT_POINT_BUDGET) -> FiniteFunction:
    """Value table of GIP over ``(F_q^s)^k``; range indices follow field enumeration."""
    n = spec.points
    if n > budget:
        raise BudgetExceeded("GIP materialization", n, budget)
    field = Field(spec.field)
    add, mul = field.add_table, field.mul_table
    q, s = spec.q, spec.s
    vectors = list(itertools.product(range(q), repeat=s))
    values = []
    for combo in itertools.product(vectors, repeat=spec.k):
        acc = 0
        for i in range(s):
            term = 1
            for vec in combo:
                term = mul[term][vec[i]]
            acc = add[acc][term]
        values.append(acc)
    return FiniteFunction(n, q, tuple(values))


def _bhk_rhs(q: int, s: int, k: int) -> Fraction:
    # (1-1/q)^(2^(k-1)) * (1-(1-1/q)^(k-1))^s
    r = 1 - Fraction(1, q)
    return r ** (2 ** (k - 1)) * (1 - r ** (k - 1)) ** s


@dataclass(frozen=True)
class BhkBound:
    """``(1-1/q) * (1-(1-1/q)^(k-1))^(s * 2^(1-k))`` with exact comparison."""

    q: int
    s: int
    k: int

    def __post_init__(self) -> None:
        if self.q < 2 or self.s < 1 or self.k < 2:
            raise ValidationError("need q >= 2, s >= 1, k >= 2")

    @property
    def power(self) -> int:
        return 2 ** (self.k - 1)

    @cached_property
    def rhs_power(self) -> Fraction:
        """The bound raised to ``2**(k-1)``; always rational."""
        return _bhk_rhs(self.q, self.s, self.k)

    @cached_property
    def exact(self) -> Fraction | None:
        """The bound itself when the exponent is an integer, else None."""
        if self.s % self.power:
            return None
        r = 1 - Fraction(1, self.q)
        return r * (1 - r ** (self.k - 1)) ** (self.s // self.power)

    def compare_exact(self, gamma) -> bool:
        """Whether ``gamma <= bound``, decided in exact rationals."""
        gamma = Fraction(gamma)
        if gamma < 0:
            return True
        return gamma**self.power <= self.rhs_power

    @cached_property
    def value(self) -> float:
        """Smallest-found float that is >= the true bound."""
        if self.exact is not None:
            v = float(self.exact)
            return v if Fraction(v) >= self.exact else math.nextafter(v, math.inf)
        r = 1 - 1 / self.q
        v = r * (1 - r ** (self.k - 1)) ** (self.s / self.power)
        while not Fraction(v) ** self.power >= self.rhs_power:
            v = math.nextafter(v, math.inf)
        return v

    def display(self, digits: int = 12) -> str:
        """``value`` rounded up to ``digits`` significant digits."""
        ctx = Context(prec=digits, rounding=ROUND_CEILING)
        return str(ctx.create_decimal(Decimal(self.value)).normalize(ctx))


def bhk_bound(q: int, s: int, k: int) -> BhkBound:
    return BhkBound(q, s, k)


@dataclass(frozen=True)
class MaxDiscrepancy:
    gamma: Fraction
    witness: CylinderIntersection
    index: int
    argmax: int
    cis: int


def _scan_range(values, range_size, factors, budget, start, stop):
    f = FiniteFunction(len(values), range_size, values)
    space = ProductSpace(factors)
    best, best_idx = -1, -1
    for idx, _, mask in iter_ci_masks(space, budget, start, stop):
        num, _, _ = _gamma_numerator(f, mask)
        if num > best:
            best, best_idx = num, idx
    return best, best_idx


def _chunks(count: int, workers: int) -> list[tuple[int, int]]:
    step = -(-count // workers)
    return [(a, min(a + step, count)) for a in range(0, count, step)]


def max_discrepancy_over_cis(
    f: FiniteFunction,
    space: ProductSpace,
    budget: int = DEFAULT_CI_BUDGET,
    workers: int = 1,
) -> MaxDiscrepancy:
    """Exact maximum of ``Gamma(f, C)`` over every cylinder intersection C.

    The witness is the first maximizer in enumeration order; splitting the
    index range across ``workers`` processes does not change the result.
    """
    if f.domain_size != space.total:
        raise ValidationError("function domain does not match the product space")
    count = check_ci_budget(space, budget)
    workers = max(1, min(workers, count))
    args = (f.values, f.range_size, space.factors, budget)
    if workers == 1:
        results = [_scan_range(*args, 0, count)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futs = [pool.submit(_scan_range, *args, a, b) for a, b in _chunks(count, workers)]
            results = [fu.result() for fu in futs]
    # chunks are in index order, so strict > keeps the first maximizer
    best, best_idx = -1, -1
    for num, idx in results:
        if num > best:
            best, best_idx = num, idx
    witness = ci_from_index(space, best_idx)
    gamma, arg = strong_discrepancy(f, witness.mask)
    return MaxDiscrepancy(gamma, witness, best_idx, arg, count)


def prime_powers() -> Iterator[int]:
    n = 2
    while True:
        if prime_power(n):
            yield n
        n += 1


def cor_threshold(k: int, alpha) -> int:
    """Smallest prime power q with ``q > (k-1)^2 / alpha``."""
    alpha = Fraction(alpha)
    if k < 2:
        raise ValidationError("k must be >= 2")
    if not 0 < alpha <= 1:
        raise ValidationError("alpha must lie in (0, 1]")
    limit = Fraction((k - 1) ** 2) / alpha
    for q in prime_powers():
        if q > limit:
            return q
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class ValuesReport:
    attained: bool
    missing: tuple[int, ...]
    trigger: bool


def all_values_attained(f: FiniteFunction, c: int | CylinderIntersection) -> ValuesReport:
    """Whether every range value has a preimage in ``c``.

    Cross-checked against the fiber lemma with ``alpha = |C|/|Z|``: whenever
    the discrepancy is below ``alpha/|B|`` all values must be attained.
    """
    mask = c.mask if isinstance(c, CylinderIntersection) else c
    missing = tuple(y for y, fib in enumerate(f.fibers) if not fib & mask)
    num, _, size = _gamma_numerator(f, mask)
    # gamma < (|C|/|Z|)/|B|  <=>  num/(|B||Z|) < |C|/(|Z||B|)  <=>  num < |C|
    trigger = size > 0 and num < size
    if trigger and missing:
        raise InvariantViolation(f"fiber lemma fired but values {list(missing)} are missing")
    return ValuesReport(not missing, missing, trigger)


def default_workers() -> int:
    env = os.environ.get("CYLDISC_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1
