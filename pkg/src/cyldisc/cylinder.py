"""Product spaces, cylinders, cylinder intersections and homogeneity.

Points of ``X_0 x ... x X_{k-1}`` are indexed in mixed radix with factor 0
most significant.  A cylinder in direction ``i`` is given by a base: a
bitmask over the product of the other factors, indexed the same way with
factor ``i`` dropped.  Point sets are int bitmasks over the whole space.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from .errors import BudgetExceeded, ValidationError

DEFAULT_CI_BUDGET = 1 << 20


@dataclass(frozen=True)
class ProductSpace:
    factors: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "factors", tuple(int(n) for n in self.factors))
        if not self.factors:
            raise ValidationError("a product space needs at least one factor")
        if any(n < 1 for n in self.factors):
            raise ValidationError(f"factor sizes must be >= 1, got {list(self.factors)}")

    @property
    def k(self) -> int:
        return len(self.factors)

    @property
    def total(self) -> int:
        return math.prod(self.factors)

    @property
    def full_mask(self) -> int:
        return (1 << self.total) - 1

    def complement_size(self, i: int) -> int:
        return self.total // self.factors[i]

    def complement_factors(self, i: int) -> tuple[int, ...]:
        return self.factors[:i] + self.factors[i + 1 :]

    def decode(self, x: int) -> tuple[int, ...]:
        if not 0 <= x < self.total:
            raise ValidationError(f"point index {x} out of range")
        coords = []
        for n in reversed(self.factors):
            x, c = divmod(x, n)
            coords.append(c)
        return tuple(reversed(coords))

    def encode(self, coords: Sequence[int]) -> int:
        if len(coords) != self.k:
            raise ValidationError(f"expected {self.k} coordinates, got {list(coords)}")
        x = 0
        for c, n in zip(coords, self.factors):
            if not 0 <= c < n:
                raise ValidationError(f"coordinate {c} out of range for factor of size {n}")
            x = x * n + c
        return x

    def project(self, x: int, i: int) -> int:
        """Index of ``x`` with coordinate ``i`` dropped."""
        coords = self.decode(x)
        y = 0
        for j, (c, n) in enumerate(zip(coords, self.factors)):
            if j != i:
                y = y * n + c
        return y

    def decode_complement(self, i: int, y: int) -> tuple[int, ...]:
        if self.k == 1:
            return ()
        return ProductSpace(self.complement_factors(i)).decode(y)

    def encode_complement(self, i: int, coords: Sequence[int]) -> int:
        if self.k == 1:
            if list(coords):
                raise ValidationError("a 1-factor space has an empty complement")
            return 0
        return ProductSpace(self.complement_factors(i)).encode(coords)

    @cached_property
    def _projections(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(self.project(x, i) for x in range(self.total)) for i in range(self.k))

    def projection(self, i: int) -> tuple[int, ...]:
        return self._projections[i]

    @cached_property
    def _fibers(self) -> tuple[tuple[int, ...], ...]:
        out = []
        for i in range(self.k):
            fib = [0] * self.complement_size(i)
            for x, y in enumerate(self.projection(i)):
                fib[y] |= 1 << x
            out.append(tuple(fib))
        return tuple(out)

    def fibers(self, i: int) -> tuple[int, ...]:
        """Point masks of the lines in direction ``i``, by complementary index."""
        return self._fibers[i]

    def cylinder_mask(self, i: int, base: int) -> int:
        fib = self.fibers(i)
        m = 0
        while base:
            low = base & -base
            m |= fib[low.bit_length() - 1]
            base ^= low
        return m

    def cylinder_masks(self, i: int) -> list[int]:
        """Point masks of every base in direction ``i``, indexed by base."""
        fib = self.fibers(i)
        masks = [0] * (1 << len(fib))
        for b in range(1, len(masks)):
            low = b & -b
            masks[b] = masks[b ^ low] | fib[low.bit_length() - 1]
        return masks


@dataclass(frozen=True)
class Cylinder:
    direction: int
    base: int


@dataclass(frozen=True)
class CylinderIntersection:
    """One optional base per direction; ``None`` is the full cylinder."""

    space: ProductSpace
    bases: tuple[int | None, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "bases", tuple(self.bases))
        if len(self.bases) != self.space.k:
            raise ValidationError(f"expected {self.space.k} bases, got {len(self.bases)}")
        for i, b in enumerate(self.bases):
            if b is not None and (b < 0 or b >> self.space.complement_size(i)):
                raise ValidationError(f"base in direction {i} exceeds the complementary product")

    @classmethod
    def full(cls, space: ProductSpace) -> CylinderIntersection:
        return cls(space, (None,) * space.k)

    @classmethod
    def from_cylinders(cls, space: ProductSpace, cylinders: Iterable[Cylinder]) -> CylinderIntersection:
        bases: list[int | None] = [None] * space.k
        for c in cylinders:
            if bases[c.direction] is not None:
                raise ValidationError(f"two cylinders in direction {c.direction}")
            bases[c.direction] = c.base
        return cls(space, tuple(bases))

    @classmethod
    def rectangle(cls, space: ProductSpace, sides: Sequence[Iterable[int]]) -> CylinderIntersection:
        """Box ``A_0 x ... x A_{k-1}`` as a cylinder intersection."""
        if len(sides) != space.k:
            raise ValidationError("one side per factor")
        sides = [set(s) for s in sides]
        bases = []
        for i in range(space.k):
            b = 0
            for x in range(space.total):
                coords = space.decode(x)
                if all(coords[j] in sides[j] for j in range(space.k) if j != i):
                    b |= 1 << space.projection(i)[x]
            bases.append(b)
        # a box with an empty side in direction i is still empty via base i
        if any(not s for s in sides):
            bases = [0] * space.k
        return cls(space, tuple(bases))

    def cylinders(self) -> list[Cylinder]:
        return [Cylinder(i, b) for i, b in enumerate(self.bases) if b is not None]

    def explicit_bases(self) -> tuple[int, ...]:
        return tuple(
            (1 << self.space.complement_size(i)) - 1 if b is None else b
            for i, b in enumerate(self.bases)
        )

    @cached_property
    def mask(self) -> int:
        m = self.space.full_mask
        for i, b in enumerate(self.bases):
            if b is not None:
                m &= self.space.cylinder_mask(i, b)
        return m


def ci_contains(ci: CylinderIntersection, x: int) -> bool:
    if not 0 <= x < ci.space.total:
        raise ValidationError(f"point index {x} out of range")
    return all(b is None or b >> ci.space.projection(i)[x] & 1 for i, b in enumerate(ci.bases))


def ci_size(ci: CylinderIntersection) -> int:
    return sum(ci_contains(ci, x) for x in range(ci.space.total))


@dataclass(frozen=True)
class Relation:
    space: ProductSpace
    edges: int

    def __post_init__(self) -> None:
        if self.edges < 0 or self.edges >> self.space.total:
            raise ValidationError("edge mask exceeds the product space")

    @classmethod
    def from_tuples(cls, factors: Sequence[int], edges: Iterable[Sequence[int]]) -> Relation:
        space = ProductSpace(tuple(factors))
        m = 0
        for e in edges:
            m |= 1 << space.encode(tuple(e))
        return cls(space, m)

    def complement(self) -> Relation:
        return Relation(self.space, self.space.full_mask & ~self.edges)

    def tuples(self) -> list[tuple[int, ...]]:
        return [self.space.decode(x) for x in range(self.space.total) if self.edges >> x & 1]

    def __contains__(self, x: int) -> bool:
        return bool(self.edges >> x & 1)


class Homogeneity(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    MIXED = "mixed"


def homogeneity_of_mask(points: int, edges: int) -> Homogeneity:
    # the empty set is vacuously inside the edge set
    if points & ~edges == 0:
        return Homogeneity.POSITIVE
    if points & edges == 0:
        return Homogeneity.NEGATIVE
    return Homogeneity.MIXED


def homogeneity(ci: CylinderIntersection, rel: Relation) -> Homogeneity:
    if ci.space != rel.space:
        raise ValidationError("cylinder intersection and relation live on different spaces")
    return homogeneity_of_mask(ci.mask, rel.edges)


def ci_count(space: ProductSpace) -> int:
    return 1 << sum(space.complement_size(i) for i in range(space.k))


def check_ci_budget(space: ProductSpace, budget: int) -> int:
    count = ci_count(space)
    if count > budget:
        raise BudgetExceeded("cylinder-intersection enumeration", count, budget)
    return count


def iter_ci_masks(
    space: ProductSpace,
    budget: int = DEFAULT_CI_BUDGET,
    start: int = 0,
    stop: int | None = None,
) -> Iterator[tuple[int, tuple[int, ...], int]]:
    """Yield ``(index, bases, point_mask)`` for every CI in enumeration order.

    Direction 0's base varies slowest; within a direction bases run in
    increasing integer order.  ``start``/``stop`` select an index range.
    """
    count = check_ci_budget(space, budget)
    stop = count if stop is None else min(stop, count)
    if start >= stop:
        return
    cyl = [space.cylinder_masks(i) for i in range(space.k)]
    radices = [len(c) for c in cyl]
    inner = radices[-1]
    last = cyl[-1]
    outer_radices = radices[:-1]
    full = space.full_mask
    first_outer, first_inner = divmod(start, inner)
    for outer in range(first_outer, (stop - 1) // inner + 1):
        digits = []
        rest = outer
        for r in reversed(outer_radices):
            rest, d = divmod(rest, r)
            digits.append(d)
        digits.reverse()
        prefix = full
        for i, d in enumerate(digits):
            prefix &= cyl[i][d]
        base_index = outer * inner
        lo = first_inner if outer == first_outer else 0
        hi = min(inner, stop - base_index)
        head = tuple(digits)
        for j in range(lo, hi):
            yield base_index + j, head + (j,), prefix & last[j]


def ci_from_index(space: ProductSpace, index: int) -> CylinderIntersection:
    bases = []
    for i in reversed(range(space.k)):
        index, b = divmod(index, 1 << space.complement_size(i))
        bases.append(b)
    return CylinderIntersection(space, tuple(reversed(bases)))


def enumerate_cis(space: ProductSpace, budget: int = DEFAULT_CI_BUDGET) -> Iterator[CylinderIntersection]:
    for _, bases, _ in iter_ci_masks(space, budget):
        yield CylinderIntersection(space, bases)


def base_points(space: ProductSpace, i: int, base: int) -> list[tuple[int, ...]]:
    """Coordinate tuples (over the other factors) of a base's members."""
    out = []
    for y in range(space.complement_size(i)):
        if base >> y & 1:
            out.append(space.decode_complement(i, y))
    return out


def ci_to_json(ci: CylinderIntersection) -> list[list[list[int]]]:
    return [[list(t) for t in base_points(ci.space, i, b)] for i, b in enumerate(ci.explicit_bases())]


def ci_points(ci: CylinderIntersection) -> list[tuple[int, ...]]:
    m = ci.mask
    return [ci.space.decode(x) for x in range(ci.space.total) if m >> x & 1]


def all_rectangles(space: ProductSpace) -> Iterator[tuple[tuple[int, ...], ...]]:
    """Every box as a tuple of sides; helper for comparisons on small spaces."""
    side_sets = [
        [tuple(c for c in range(n) if s >> c & 1) for s in range(1 << n)] for n in space.factors
    ]
    return itertools.product(*side_sets)
