"""Finite Boolean algebras of subsets of ``{0..n-1}`` and measures on them.

Sets are int bitmasks.  A subalgebra is given by generators; its atoms are
the classes of ground points that no generator separates, ordered by their
smallest point.  On a finite algebra each ultrafilter is principal, so the
Stone space of an algebra is identified with its list of atoms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from .errors import AlphaOutOfRange, MethodDisagreement, NotInAlgebra, ValidationError

EXHAUSTIVE_LIMIT = 20


def mask_of(points: Iterable[int]) -> int:
    m = 0
    for x in points:
        m |= 1 << x
    return m


def points_of(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def generate_subalgebra(n: int, gens: Sequence[int]) -> tuple[int, ...]:
    """Atoms of the algebra generated by ``gens`` inside the power set of [n]."""
    full = (1 << n) - 1
    for g in gens:
        if g & ~full or g < 0:
            raise ValidationError(f"generator {points_of(g)} is not a subset of {{0..{n - 1}}}")
    blocks: dict[tuple[bool, ...], int] = {}
    for x in range(n):
        sig = tuple(bool(g >> x & 1) for g in gens)
        blocks[sig] = blocks.get(sig, 0) | (1 << x)
    # dict preserves first-seen order, which is order of smallest point
    return tuple(blocks.values())


@dataclass(frozen=True)
class FiniteBooleanAlgebra:
    n: int
    gens: tuple[int, ...] = ()
    atoms: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValidationError("ground set must be nonempty")
        object.__setattr__(self, "gens", tuple(self.gens))
        object.__setattr__(self, "atoms", generate_subalgebra(self.n, self.gens))

    @classmethod
    def power_set(cls, n: int) -> FiniteBooleanAlgebra:
        return cls(n, tuple(1 << x for x in range(n)))

    @classmethod
    def from_points(cls, n: int, gens: Iterable[Iterable[int]]) -> FiniteBooleanAlgebra:
        return cls(n, tuple(mask_of(g) for g in gens))

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    def contains(self, mask: int) -> bool:
        """Whether ``mask`` is an element of the algebra (a union of atoms)."""
        return all(a & mask in (0, a) for a in self.atoms)

    def elements(self) -> Iterable[int]:
        """All 2^(#atoms) elements, in binary order over the atom list."""
        atoms = self.atoms
        for sel in range(1 << len(atoms)):
            m = 0
            for i, a in enumerate(atoms):
                if sel >> i & 1:
                    m |= a
            yield m

    def is_subalgebra_of(self, other: FiniteBooleanAlgebra) -> bool:
        # every atom of the finer algebra sits inside one atom of the coarser
        if self.n != other.n:
            return False
        home = self._atom_of_point
        return all(not a & ~self.atoms[home[(a & -a).bit_length() - 1]] for a in other.atoms)

    def adjoin(self, mask: int) -> FiniteBooleanAlgebra:
        if mask & ~self.full or mask < 0:
            raise ValidationError(f"generator {points_of(mask)} is not a subset of {{0..{self.n - 1}}}")
        pieces = []
        for a in self.atoms:
            inside, outside = a & mask, a & ~mask
            pieces += [p for p in (inside, outside) if p]
        pieces.sort(key=lambda p: p & -p)
        return self._split(mask, pieces)

    def _split(self, mask: int, atoms: Sequence[int]) -> FiniteBooleanAlgebra:
        # splitting atoms by one more generator gives the same atoms as regenerating
        alg = object.__new__(FiniteBooleanAlgebra)
        object.__setattr__(alg, "n", self.n)
        object.__setattr__(alg, "gens", self.gens + (mask,))
        object.__setattr__(alg, "atoms", tuple(atoms))
        return alg

    @cached_property
    def _atom_of_point(self) -> tuple[int, ...]:
        out = [0] * self.n
        for i, a in enumerate(self.atoms):
            for x in points_of(a):
                out[x] = i
        return tuple(out)

    def atom_index(self, point: int) -> int:
        return self._atom_of_point[point]


class AtomMeasure:
    """A finitely additive probability measure, one weight per atom.

    Weights are held as integer numerators over their least common
    denominator; ``weights`` gives them back as fractions.
    """

    def __init__(self, algebra: FiniteBooleanAlgebra, weights: Sequence) -> None:
        w = tuple(x if type(x) is Fraction else Fraction(x) for x in weights)
        if len(w) != len(algebra.atoms):
            raise ValidationError(f"expected {len(algebra.atoms)} atom weights, got {len(w)}")
        if any(x < 0 for x in w):
            raise ValidationError("atom weights must be non-negative")
        den, nums = _scale(w)
        if sum(nums) != den:
            raise ValidationError(f"atom weights sum to {Fraction(sum(nums), den)}, not 1")
        self.algebra = algebra
        self._den, self._nums = den, nums
        self.__dict__["weights"] = w

    @classmethod
    def _scaled(cls, algebra: FiniteBooleanAlgebra, den: int, nums: Sequence[int]) -> AtomMeasure:
        """Trusted constructor from numerators over ``den`` that sum to ``den``."""
        g = math.gcd(den, *nums)
        mu = object.__new__(cls)
        mu.algebra = algebra
        mu._den, mu._nums = den // g, tuple(n // g for n in nums)
        return mu

    @cached_property
    def weights(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(n, self._den) for n in self._nums)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AtomMeasure):
            return NotImplemented
        return (self.algebra, self._den, self._nums) == (other.algebra, other._den, other._nums)

    def __hash__(self) -> int:
        return hash((self.algebra, self._den, self._nums))

    def __repr__(self) -> str:
        return f"AtomMeasure(algebra={self.algebra!r}, weights={self.weights!r})"

    @classmethod
    def on_points(cls, n: int, weights: Sequence) -> AtomMeasure:
        """Measure on the full power set of [n] from per-point weights."""
        return cls(FiniteBooleanAlgebra.power_set(n), tuple(weights))

    def __call__(self, mask: int) -> Fraction:
        total = 0
        for a, w in zip(self.algebra.atoms, self._nums):
            inter = a & mask
            if inter == a:
                total += w
            elif inter:
                raise NotInAlgebra(f"{points_of(mask)} is not an element of the algebra")
        return Fraction(total, self._den)

    def restrict(self, sub: FiniteBooleanAlgebra) -> AtomMeasure:
        if not sub.is_subalgebra_of(self.algebra):
            raise NotInAlgebra("restriction target is not a subalgebra")
        nums = [0] * len(sub.atoms)
        home = sub._atom_of_point
        for a, w in zip(self.algebra.atoms, self._nums):
            nums[home[(a & -a).bit_length() - 1]] += w
        return AtomMeasure._scaled(sub, self._den, nums)


def _scale(weights: Sequence[Fraction]) -> tuple[int, tuple[int, ...]]:
    """Common denominator and integer numerators of ``weights``."""
    den = 1
    for w in weights:
        den = den * w.denominator // math.gcd(den, w.denominator)
    return den, tuple(w.numerator * (den // w.denominator) for w in weights)


def _interval_nums(mu: AtomMeasure, b: int) -> tuple[int, int]:
    lo = hi = 0
    for a, w in zip(mu.algebra.atoms, mu._nums):
        inter = a & b
        if inter:
            hi += w
            if inter == a:
                lo += w
    return lo, hi


def extension_interval(mu: AtomMeasure, b: int) -> tuple[Fraction, Fraction]:
    """Range of values an extension of ``mu`` can give to ``b``.

    ``lo`` is the mass of atoms inside ``b``; ``hi`` the mass of atoms
    meeting ``b``.
    """
    lo, hi = _interval_nums(mu, b)
    return Fraction(lo, mu._den), Fraction(hi, mu._den)


def element_measures(mu: AtomMeasure) -> list[tuple[int, Fraction]]:
    """Every element of ``mu``'s algebra with its measure."""
    table = [(0, Fraction(0))]
    for a, w in zip(mu.algebra.atoms, mu.weights):
        table += [(m | a, v + w) for m, v in table]
    return table


def extension_interval_bruteforce(
    mu: AtomMeasure, b: int, table: list[tuple[int, Fraction]] | None = None
) -> tuple[Fraction, Fraction]:
    """sup of mu(A) over A <= b, inf over A >= b, by enumerating the algebra."""
    b &= mu.algebra.full
    if table is None:
        table = element_measures(mu)
    lo = max(v for m, v in table if m & ~b == 0)
    hi = min(v for m, v in table if b & ~m == 0)
    return lo, hi


def extend_measure(mu: AtomMeasure, b: int, alpha) -> AtomMeasure:
    """Extend ``mu`` to the algebra generated by its own and ``b``, with ``nu(b) == alpha``.

    The surplus ``alpha - lo`` is split over the atoms that straddle ``b`` in
    proportion to their weight; what remains of each straddling atom goes to
    its part outside ``b``.
    """
    if type(alpha) is not Fraction:
        alpha = Fraction(alpha)
    lo, hi = _interval_nums(mu, b)
    den = mu._den
    # alpha - lo = (alpha_num * den - lo * alpha_den) / (den * alpha_den)
    if not lo * alpha.denominator <= alpha.numerator * den <= hi * alpha.denominator:
        raise AlphaOutOfRange(f"alpha={alpha} outside [{Fraction(lo, den)}, {Fraction(hi, den)}]")
    b &= mu.algebra.full
    gain = alpha.numerator * den - lo * alpha.denominator
    straddle = (hi - lo) * alpha.denominator
    if not straddle:
        gain, straddle = 0, 1
    # a straddling atom of weight w sends w * gain / straddle inside b;
    # numerators below are over den * straddle, keyed by lowest point
    pieces = []
    for a, w in zip(mu.algebra.atoms, mu._nums):
        inside = a & b
        if inside and inside != a:
            outside = a ^ inside
            pieces.append((inside & -inside, inside, w * gain))
            pieces.append((outside & -outside, outside, w * (straddle - gain)))
        else:
            pieces.append((a & -a, a, w * straddle))
    pieces.sort()
    bigger = mu.algebra._split(b, [p[1] for p in pieces])
    return AtomMeasure._scaled(bigger, den * straddle, [p[2] for p in pieces])


def border(algebra: FiniteBooleanAlgebra, b: int) -> list[int]:
    """Atoms of ``algebra`` meeting both ``b`` and its complement."""
    return [a for a in algebra.atoms if a & b and a & ~b]


@dataclass(frozen=True)
class DeterminacyReport:
    determined: bool
    border_method: bool
    interval_method: bool
    witness: int | None  # a set with positive border mass, if any
    exhaustive: bool


def is_determined(nu: AtomMeasure, gens: Sequence[int]) -> DeterminacyReport:
    """Whether ``nu`` is the unique extension of its restriction to ``<gens>``.

    Checked twice: the restriction gives zero mass to the border of every
    set of ``nu``'s algebra, and the extension interval of every such set is
    a single point.  The interval side uses the literal sup/inf over the
    subalgebra when it is small enough to enumerate.
    """
    big = nu.algebra
    sub = FiniteBooleanAlgebra(big.n, tuple(gens))
    if not sub.is_subalgebra_of(big):
        raise NotInAlgebra("generators are not elements of the measure's algebra")
    mu = nu.restrict(sub)
    exhaustive = len(big.atoms) <= EXHAUSTIVE_LIMIT
    if exhaustive:
        candidates: Iterable[int] = big.elements()
    else:
        # a positive-mass subalgebra atom holding two big atoms is split by either one
        candidates = big.atoms
    table = element_measures(mu) if len(sub.atoms) <= 10 else None

    border_ok = interval_ok = True
    witness = None
    for b in candidates:
        bmass = sum((w for a, w in zip(sub.atoms, mu.weights) if a & b and a & ~b), Fraction(0))
        if table is not None:
            lo, hi = extension_interval_bruteforce(mu, b, table)
        else:
            lo, hi = extension_interval(mu, b)
        if bmass and border_ok:
            border_ok = False
            witness = b
        if lo != hi:
            interval_ok = False
        if (bmass != 0) != (lo != hi):
            raise MethodDisagreement(
                f"set {points_of(b)}: border mass {bmass}, interval [{lo}, {hi}]"
            )
        if not border_ok and not interval_ok:
            break
    if border_ok != interval_ok:
        raise MethodDisagreement("border and interval verdicts differ")
    return DeterminacyReport(border_ok, border_ok, interval_ok, witness, exhaustive)
