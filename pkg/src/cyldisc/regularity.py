"""Product measures, regularity defect of grid partitions, homogeneous-CI search.

Measures are exact: each factor's weights are scaled to integers over a
common denominator, so the measure of a point set is an integer sum divided
by one fixed denominator.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from .boolalg import points_of
from .cylinder import (
    DEFAULT_CI_BUDGET,
    CylinderIntersection,
    Homogeneity,
    ProductSpace,
    Relation,
    ci_from_index,
    homogeneity_of_mask,
    iter_ci_masks,
)
from .discrepancy import DEFAULT_POINT_BUDGET, GipSpec, gip_function
from .errors import BudgetExhausted, GridTooLarge, ValidationError

DEFAULT_GRID_BUDGET = 1 << 16


@dataclass(frozen=True)
class WeightedMeasure:
    weights: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        w = tuple(Fraction(x) for x in self.weights)
        object.__setattr__(self, "weights", w)
        if not w:
            raise ValidationError("a measure needs at least one point")
        if any(x < 0 for x in w):
            raise ValidationError("measure weights must be non-negative")
        if sum(w) != 1:
            raise ValidationError(f"measure weights sum to {sum(w)}, not 1")

    @classmethod
    def uniform(cls, n: int) -> WeightedMeasure:
        return cls((Fraction(1, n),) * n)

    @property
    def support(self) -> list[int]:
        return [i for i, w in enumerate(self.weights) if w]


def uniform_measures(space: ProductSpace) -> list[WeightedMeasure]:
    return [WeightedMeasure.uniform(n) for n in space.factors]


class ProductMeasure:
    """``mu_0 x ... x mu_{k-1}`` on the points of a product space."""

    def __init__(self, space: ProductSpace, measures: Sequence[WeightedMeasure] | None = None):
        if measures is None:
            measures = uniform_measures(space)
        if len(measures) != space.k:
            raise ValidationError(f"need {space.k} factor measures, got {len(measures)}")
        for n, mu in zip(space.factors, measures):
            if len(mu.weights) != n:
                raise ValidationError(f"measure has {len(mu.weights)} weights for a factor of size {n}")
        self.space = space
        self.measures = tuple(measures)
        dens = [math.lcm(*(w.denominator for w in mu.weights)) for mu in measures]
        self.denominator = math.prod(dens)
        scaled = [[int(w * d) for w in mu.weights] for mu, d in zip(measures, dens)]
        self.point_weights = tuple(
            math.prod(scaled[i][c] for i, c in enumerate(space.decode(x))) for x in range(space.total)
        )
        first = self.point_weights[0]
        self.uniform = all(w == first for w in self.point_weights)

    def numerator(self, mask: int) -> int:
        if self.uniform:
            return mask.bit_count() * self.point_weights[0]
        w = self.point_weights
        return sum(w[x] for x in points_of(mask))

    def __call__(self, mask: int) -> Fraction:
        return Fraction(self.numerator(mask), self.denominator)

    @cached_property
    def positive_points(self) -> list[int]:
        return [x for x, w in enumerate(self.point_weights) if w]


def product_measure(
    space: ProductSpace,
    measures: Sequence[WeightedMeasure],
    target: int | CylinderIntersection | Sequence[int],
) -> Fraction:
    """Measure of a point (index or coordinate tuple) or of a cylinder intersection."""
    if isinstance(target, CylinderIntersection):
        return ProductMeasure(space, measures)(target.mask)
    if isinstance(target, int):
        target = space.decode(target)
    if len(measures) != space.k:
        raise ValidationError(f"need {space.k} factor measures")
    return math.prod((mu.weights[c] for mu, c in zip(measures, target)), start=Fraction(1))


@dataclass(frozen=True)
class GridPartition:
    """For each direction, a partition of the complementary product into block masks."""

    directions: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "directions", tuple(tuple(d) for d in self.directions))

    def validate(self, space: ProductSpace) -> None:
        if len(self.directions) != space.k:
            raise ValidationError(f"partition has {len(self.directions)} directions, space has {space.k}")
        for i, blocks in enumerate(self.directions):
            full = (1 << space.complement_size(i)) - 1
            seen = 0
            for j, b in enumerate(blocks):
                if not b:
                    raise ValidationError(f"direction {i} block {j} is empty")
                if b & seen:
                    raise ValidationError(f"direction {i} block {j} overlaps an earlier block")
                if b & ~full:
                    raise ValidationError(f"direction {i} block {j} leaves the complementary product")
                seen |= b
            if seen != full:
                raise ValidationError(f"direction {i} blocks do not cover the complementary product")

    @classmethod
    def trivial(cls, space: ProductSpace) -> GridPartition:
        return cls(tuple(((1 << space.complement_size(i)) - 1,) for i in range(space.k)))

    @classmethod
    def singletons(cls, space: ProductSpace) -> GridPartition:
        return cls(tuple(tuple(1 << y for y in range(space.complement_size(i))) for i in range(space.k)))

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(d) for d in self.directions)

    def cell(self, space: ProductSpace, index: Sequence[int]) -> CylinderIntersection:
        return CylinderIntersection(space, tuple(self.directions[i][l] for i, l in enumerate(index)))


@dataclass(frozen=True)
class DefectReport:
    defect: Fraction
    bad_cells: tuple[tuple[tuple[int, ...], Fraction], ...]


def regularity_defect(
    partition: GridPartition,
    rel: Relation,
    measures: Sequence[WeightedMeasure] | ProductMeasure | None = None,
    grid_budget: int = DEFAULT_GRID_BUDGET,
) -> DefectReport:
    """Total product measure of the Mixed cells of a grid partition."""
    space = rel.space
    partition.validate(space)
    pm = measures if isinstance(measures, ProductMeasure) else ProductMeasure(space, measures)
    cells = math.prod(partition.shape)
    if cells > grid_budget:
        raise GridTooLarge("partition grid", cells, grid_budget)
    cyl = [[space.cylinder_mask(i, b) for b in blocks] for i, blocks in enumerate(partition.directions)]
    total = 0
    bad = []
    for index in itertools.product(*(range(n) for n in partition.shape)):
        mask = space.full_mask
        for i, l in enumerate(index):
            mask &= cyl[i][l]
        if homogeneity_of_mask(mask, rel.edges) is Homogeneity.MIXED:
            num = pm.numerator(mask)
            total += num
            bad.append((index, Fraction(num, pm.denominator)))
    return DefectReport(Fraction(total, pm.denominator), tuple(bad))


@dataclass(frozen=True)
class RefineResult:
    partition: GridPartition
    defect: Fraction
    splits: int


def _halve(block: int) -> tuple[int, int]:
    pts = points_of(block)
    cut = len(pts) // 2
    lower = 0
    for y in pts[:cut]:
        lower |= 1 << y
    return lower, block & ~lower


def greedy_refine(
    rel: Relation,
    measures: Sequence[WeightedMeasure] | None,
    eps,
    max_blocks: int,
    grid_budget: int = DEFAULT_GRID_BUDGET,
) -> RefineResult:
    """Split blocks of the heaviest Mixed cell until the defect drops below ``eps``.

    The block split is the largest of that cell's blocks (per direction, ties
    to the lower direction) among directions still under ``max_blocks``; it
    is cut into its lower and upper halves by complementary index.  Raises
    :class:`BudgetExhausted` with the last partition if no split is left.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise ValidationError("eps must be positive")
    if max_blocks < 1:
        raise ValidationError("max_blocks must be >= 1")
    space = rel.space
    pm = ProductMeasure(space, measures)
    dirs = [list(d) for d in GridPartition.trivial(space).directions]
    splits = 0
    while True:
        part = GridPartition(tuple(tuple(d) for d in dirs))
        report = regularity_defect(part, rel, pm, grid_budget)
        if report.defect < eps:
            return RefineResult(part, report.defect, splits)
        order = sorted(report.bad_cells, key=lambda cm: (-cm[1], cm[0]))
        for index, _ in order:
            choice = None
            for i, l in enumerate(index):
                size = dirs[i][l].bit_count()
                if len(dirs[i]) < max_blocks and size >= 2 and (choice is None or size > choice[2]):
                    choice = (i, l, size)
            if choice is not None:
                i, l, _ = choice
                lower, upper = _halve(dirs[i][l])
                dirs[i][l : l + 1] = [lower, upper]
                splits += 1
                break
        else:
            raise BudgetExhausted(part, report.defect)


@dataclass(frozen=True)
class SehResult:
    ci: CylinderIntersection
    measure: Fraction
    kind: Homogeneity
    index: int | None = None
    restart: int | None = None


def best_homogeneous_ci(
    rel: Relation,
    measures: Sequence[WeightedMeasure] | ProductMeasure | None = None,
    budget: int = DEFAULT_CI_BUDGET,
) -> SehResult | None:
    """Nonempty non-Mixed CI of maximal measure; ties go to the smallest index."""
    space = rel.space
    pm = measures if isinstance(measures, ProductMeasure) else ProductMeasure(space, measures)
    edges, non_edges = rel.edges, space.full_mask & ~rel.edges
    best, best_idx = -1, -1
    for idx, _, mask in iter_ci_masks(space, budget):
        if not mask or (mask & edges and mask & non_edges):
            continue
        num = pm.numerator(mask)
        if num > best:
            best, best_idx = num, idx
    if best_idx < 0:
        return None
    ci = ci_from_index(space, best_idx)
    return SehResult(ci, Fraction(best, pm.denominator), homogeneity_of_mask(ci.mask, edges), best_idx)


def seh_search_exact(
    rel: Relation,
    measures: Sequence[WeightedMeasure] | None,
    alpha,
    budget: int = DEFAULT_CI_BUDGET,
) -> SehResult | None:
    """Best homogeneous CI by exhaustive sweep, or None if it weighs less than ``alpha``."""
    res = best_homogeneous_ci(rel, measures, budget)
    if res is None or res.measure < Fraction(alpha):
        return None
    return res


def seh_search_greedy(
    rel: Relation,
    measures: Sequence[WeightedMeasure] | None,
    alpha,
    seed: int = 0,
    restarts: int = 32,
) -> SehResult | None:
    """Seeded local search for a heavy homogeneous CI.

    Restart ``r`` draws from ``random.Random(seed + r)``: it starts at a
    random positive-weight point and, cycling through directions, adds base
    elements in shuffled order whenever the new points stay on the start
    point's side of the relation.  Stops when a full round adds nothing.
    """
    space = rel.space
    pm = ProductMeasure(space, measures)
    alpha = Fraction(alpha)
    fibers = [space.fibers(i) for i in range(space.k)]
    full = space.full_mask
    best: SehResult | None = None
    for r in range(restarts):
        rng = random.Random(seed + r)
        x = rng.choice(pm.positive_points)
        positive = x in rel
        target = rel.edges if positive else full & ~rel.edges
        proj = [space.projection(i)[x] for i in range(space.k)]
        bases = [1 << y for y in proj]
        cyl = [fibers[i][y] for i, y in enumerate(proj)]
        changed = True
        while changed:
            changed = False
            for i in range(space.k):
                others = full
                for j in range(space.k):
                    if j != i:
                        others &= cyl[j]
                cands = [y for y in range(len(fibers[i])) if not bases[i] >> y & 1]
                rng.shuffle(cands)
                for y in cands:
                    if fibers[i][y] & others & ~target:
                        continue
                    bases[i] |= 1 << y
                    cyl[i] |= fibers[i][y]
                    changed = True
        ci = CylinderIntersection(space, tuple(bases))
        num = pm.numerator(ci.mask)
        if best is None or num > best.measure * pm.denominator:
            kind = Homogeneity.POSITIVE if positive else Homogeneity.NEGATIVE
            best = SehResult(ci, Fraction(num, pm.denominator), kind, None, r)
    if best is None or best.measure < alpha:
        return None
    return best


def make_halfgraph(n: int) -> Relation:
    """Edges ``(i, j)`` with ``i < j`` on ``[n] x [n]``."""
    if n < 1:
        raise ValidationError("half-graph size must be >= 1")
    return Relation.from_tuples((n, n), ((i, j) for i in range(n) for j in range(i + 1, n)))


def make_gip_zero(spec: GipSpec, budget: int = DEFAULT_POINT_BUDGET) -> Relation:
    """Points of ``(F_q^s)^k`` where the generalized inner product vanishes."""
    f = gip_function(spec, budget)
    return Relation(spec.space, f.fibers[0])
