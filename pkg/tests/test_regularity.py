import itertools
import math
import random
from fractions import Fraction as F

import pytest

from cyldisc.cylinder import (
    CylinderIntersection,
    Homogeneity,
    ProductSpace,
    Relation,
    all_rectangles,
    ci_count,
    homogeneity,
)
from cyldisc.discrepancy import GipSpec, bhk_bound
from cyldisc.errors import BudgetExhausted, GridTooLarge, ValidationError
from cyldisc.finfield import ff_make
from cyldisc.regularity import (
    GridPartition,
    ProductMeasure,
    WeightedMeasure,
    best_homogeneous_ci,
    greedy_refine,
    make_gip_zero,
    make_halfgraph,
    product_measure,
    regularity_defect,
    seh_search_exact,
    seh_search_greedy,
    uniform_measures,
)


def W(*ws):
    return WeightedMeasure(tuple(F(w) for w in ws))


def naive_defect(part, rel, measures):
    space = rel.space
    total = F(0)
    for cell in itertools.product(*(range(len(d)) for d in part.directions)):
        members = []
        for coords in itertools.product(*(range(n) for n in space.factors)):
            inside = True
            for i, l in enumerate(cell):
                rest = coords[:i] + coords[i + 1 :]
                y = 0
                for c, n in zip(rest, space.complement_factors(i)):
                    y = y * n + c
                inside = inside and bool(part.directions[i][l] >> y & 1)
            if inside:
                members.append(coords)
        flags = {space.encode(c) in rel for c in members}
        if len(flags) == 2:
            total += sum(math.prod((mu.weights[c] for mu, c in zip(measures, coords)), start=F(1)) for coords in members)
    return total


def random_partition(rng, size):
    labels = [rng.randrange(size) for _ in range(size)]
    blocks = {}
    for y, l in enumerate(labels):
        blocks[l] = blocks.get(l, 0) | (1 << y)
    return [blocks[l] for l in sorted(blocks)]


def random_measure(rng, n):
    raw = [rng.randint(0, 4) for _ in range(n)]
    if not any(raw):
        raw[0] = 1
    return WeightedMeasure(tuple(F(r, sum(raw)) for r in raw))


def test_product_measure_examples():
    s22 = ProductSpace((2, 2))
    uni = uniform_measures(s22)
    assert product_measure(s22, uni, CylinderIntersection.full(s22)) == 1
    assert product_measure(s22, uni, CylinderIntersection.rectangle(s22, [{0}, {0, 1}])) == F(1, 2)
    assert product_measure(s22, [W(F(1, 3), F(2, 3)), W(F(1, 4), F(3, 4))], (1, 1)) == F(1, 2)
    assert product_measure(s22, [W(F(1, 3), F(2, 3)), W(F(1, 4), F(3, 4))], 3) == F(1, 2)


def test_measure_validation():
    with pytest.raises(ValidationError):
        W(F(1, 2), F(1, 3))
    with pytest.raises(ValidationError):
        W(F(3, 2), F(-1, 2))
    with pytest.raises(ValidationError):
        ProductMeasure(ProductSpace((2, 2)), [W(1)])


def test_product_measure_matches_pointwise_sum():
    rng = random.Random(5)
    space = ProductSpace((2, 3, 2))
    ms = [random_measure(rng, n) for n in space.factors]
    pm = ProductMeasure(space, ms)
    assert pm(space.full_mask) == 1
    for _ in range(50):
        mask = rng.getrandbits(space.total)
        assert pm(mask) == sum((product_measure(space, ms, x) for x in range(space.total) if mask >> x & 1), F(0))


def test_defect_examples():
    hg = make_halfgraph(4)
    space = hg.space
    uni = uniform_measures(space)
    assert regularity_defect(GridPartition.singletons(space), hg, uni).defect == 0
    assert regularity_defect(GridPartition.trivial(space), hg, uni).defect == 1
    halves = GridPartition(((0b0011, 0b1100), (0b0011, 0b1100)))
    rep = regularity_defect(halves, hg, uni)
    assert rep.defect == naive_defect(halves, hg, uni) == F(1, 2)
    assert sorted(c for c, _ in rep.bad_cells) == [(0, 0), (1, 1)]


def test_partition_validation():
    hg = make_halfgraph(2)
    for bad in [((0b01,), (0b11,)), ((0b01, 0b11), (0b11,)), ((0b11, 0), (0b11,)), ((0b11,),)]:
        with pytest.raises(ValidationError):
            regularity_defect(GridPartition(bad), hg)


def test_grid_budget():
    hg = make_halfgraph(4)
    with pytest.raises(GridTooLarge):
        regularity_defect(GridPartition.singletons(hg.space), hg, grid_budget=15)


def test_defect_matches_naive_and_is_a_probability():
    rng = random.Random(17)
    for _ in range(60):
        factors = tuple(rng.randint(1, 3) for _ in range(rng.choice((2, 3))))
        space = ProductSpace(factors)
        rel = Relation(space, rng.getrandbits(space.total))
        ms = [random_measure(rng, n) for n in factors]
        part = GridPartition(tuple(tuple(random_partition(rng, space.complement_size(i))) for i in range(space.k)))
        rep = regularity_defect(part, rel, ms)
        assert rep.defect == naive_defect(part, rel, ms)
        assert 0 <= rep.defect <= 1


def test_defect_zero_iff_no_mixed_cell():
    rng = random.Random(3)
    for _ in range(100):
        factors = tuple(rng.randint(1, 3) for _ in range(rng.choice((2, 3))))
        space = ProductSpace(factors)
        rel = Relation(space, rng.getrandbits(space.total))
        part = GridPartition(tuple(tuple(random_partition(rng, space.complement_size(i))) for i in range(space.k)))
        # uniform measures give every nonempty cell positive mass
        rep = regularity_defect(part, rel)
        mixed = [
            c
            for c in itertools.product(*(range(len(d)) for d in part.directions))
            if homogeneity(part.cell(space, c), rel) is Homogeneity.MIXED
        ]
        assert (rep.defect == 0) == (not mixed)


def test_refine_examples():
    full = Relation(ProductSpace((3, 3)), (1 << 9) - 1)
    res = greedy_refine(full, None, F(1, 10), 4)
    assert res.defect == 0 and res.partition == GridPartition.trivial(full.space) and res.splits == 0
    hg = make_halfgraph(8)
    res = greedy_refine(hg, None, F(1, 4), 8)
    assert res.defect < F(1, 4)
    assert max(res.partition.shape) <= 8
    assert regularity_defect(res.partition, hg).defect == res.defect


def test_refine_budget_exhausted_on_inner_product():
    ip = make_gip_zero(GipSpec(ff_make(2), 2, 2))
    with pytest.raises(BudgetExhausted) as exc:
        greedy_refine(ip, None, F(1, 100), 2)
    part, defect = exc.value.partition, exc.value.defect
    assert max(part.shape) <= 2
    assert defect >= F(1, 100)
    assert regularity_defect(part, ip).defect == defect


def test_refine_validation():
    hg = make_halfgraph(2)
    with pytest.raises(ValidationError):
        greedy_refine(hg, None, 0, 4)


def best_rectangle_oracle(rel):
    space = rel.space
    best = F(0)
    for sides in all_rectangles(space):
        pts = [space.encode(c) for c in itertools.product(*sides)]
        if not pts:
            continue
        flags = {x in rel for x in pts}
        if len(flags) == 1:
            best = max(best, F(len(pts), space.total))
    return best


def test_seh_exact_examples():
    full = Relation(ProductSpace((2, 3)), (1 << 6) - 1)
    res = seh_search_exact(full, None, 1)
    assert res.measure == 1 and res.ci.mask == full.space.full_mask and res.kind is Homogeneity.POSITIVE
    hg = make_halfgraph(4)
    res = seh_search_exact(hg, None, F(1, 4))
    assert res.measure == best_rectangle_oracle(hg) == F(3, 8)
    assert homogeneity(res.ci, hg) is not Homogeneity.MIXED
    diag = Relation.from_tuples((3, 3), [(i, i) for i in range(3)])
    assert seh_search_exact(diag, None, F(1, 2)) is None
    assert best_homogeneous_ci(diag).measure == best_rectangle_oracle(diag) == F(2, 9)


def test_halfgraph_has_quarter_block_below_diagonal():
    hg = make_halfgraph(4)
    block = CylinderIntersection.rectangle(hg.space, [{0, 1}, {2, 3}])
    assert homogeneity(block, hg) is Homogeneity.POSITIVE
    assert product_measure(hg.space, uniform_measures(hg.space), block) == F(1, 4)


@pytest.mark.parametrize("n", [4, 6, 8])
def test_seh_positive_family(n):
    hg = make_halfgraph(n)
    res = seh_search_exact(hg, None, F(1, 4))
    assert res is not None and res.measure >= F(1, 4)


def test_seh_greedy_examples():
    full = Relation(ProductSpace((3, 3)), (1 << 9) - 1)
    for seed in range(3):
        assert seh_search_greedy(full, None, 1, seed=seed, restarts=1).measure == 1
    empty = Relation(ProductSpace((3, 3)), 0)
    res = seh_search_greedy(empty, None, 1, restarts=1)
    assert res.measure == 1 and res.kind is Homogeneity.NEGATIVE
    hg = make_halfgraph(8)
    res = seh_search_greedy(hg, None, F(1, 4), seed=0, restarts=32)
    assert res.measure >= F(1, 4)
    assert res.measure <= seh_search_exact(hg, None, 0).measure


def test_seh_greedy_is_deterministic():
    hg = make_halfgraph(6)
    a = seh_search_greedy(hg, None, 0, seed=5, restarts=4)
    b = seh_search_greedy(hg, None, 0, seed=5, restarts=4)
    assert a == b


def test_seh_greedy_soundness_random():
    rng = random.Random(23)
    checked = 0
    while checked < 60:
        factors = tuple(rng.randint(1, 3) for _ in range(rng.choice((2, 3))))
        space = ProductSpace(factors)
        if ci_count(space) > 2**14:
            continue
        checked += 1
        rel = Relation(space, rng.getrandbits(space.total))
        ms = [random_measure(rng, n) for n in factors]
        greedy = seh_search_greedy(rel, ms, 0, seed=rng.getrandbits(32), restarts=3)
        exact = best_homogeneous_ci(rel, ms)
        assert homogeneity(greedy.ci, rel) is not Homogeneity.MIXED
        assert greedy.measure == ProductMeasure(space, ms)(greedy.ci.mask)
        assert greedy.measure <= exact.measure


def test_generators():
    assert make_halfgraph(2).tuples() == [(0, 1)]
    nand = make_gip_zero(GipSpec(ff_make(2), 1, 2))
    assert nand.tuples() == [(0, 0), (0, 1), (1, 0)]
    and3 = make_gip_zero(GipSpec(ff_make(2), 1, 3))
    assert len(and3.tuples()) == 7 and (1, 1, 1) not in and3.tuples()


def test_gip_zero_homogeneous_ceiling():
    for q, s, k in [(2, 1, 2), (2, 2, 2), (3, 1, 2), (2, 1, 3)]:
        rel = make_gip_zero(GipSpec(ff_make(q), s, k))
        best = best_homogeneous_ci(rel)
        assert bhk_bound(q, s, k).compare_exact(best.measure / q)
