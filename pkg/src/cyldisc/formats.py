"""JSON readers and writers for relations, partitions, measures and algebras.

Rationals are ``"num/den"`` strings.  Parse errors name the offending field
path, e.g. ``measures[1][0]``.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .boolalg import AtomMeasure, FiniteBooleanAlgebra, mask_of, points_of
from .cylinder import ProductSpace, Relation
from .discrepancy import DEFAULT_POINT_BUDGET, GipSpec
from .errors import ValidationError
from .finfield import FieldSpec
from .rational import format_fraction, parse_fraction
from .regularity import GridPartition, WeightedMeasure, make_gip_zero, make_halfgraph


def load_json(path) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ValidationError(f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _int(v, path: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ValidationError(f"{path}: expected an integer, got {v!r}")
    return v


def _list(v, path: str) -> list:
    if not isinstance(v, list):
        raise ValidationError(f"{path}: expected a list, got {type(v).__name__}")
    return v


def relation_from_json(obj: Any, budget: int = DEFAULT_POINT_BUDGET) -> Relation:
    if not isinstance(obj, dict):
        raise ValidationError("relation: expected a JSON object")
    # accept the full record written by `gen-relation`
    obj = obj.get("result", obj)
    obj = obj.get("relation", obj)
    kind = obj.get("kind", "explicit")
    if kind == "halfgraph":
        return make_halfgraph(_int(obj.get("n"), "relation.n"))
    if kind in ("gip", "gip-zero"):
        return make_gip_zero(gip_spec_from_json(obj), budget)
    if kind != "explicit":
        raise ValidationError(f"relation.kind: unknown kind {kind!r}")
    factors = [_int(n, f"relation.factors[{i}]") for i, n in enumerate(_list(obj.get("factors"), "relation.factors"))]
    space = ProductSpace(tuple(factors))
    if space.total > budget:
        raise ValidationError(f"relation.factors: {space.total} points exceed budget {budget}")
    mask = 0
    for j, e in enumerate(_list(obj.get("edges", []), "relation.edges")):
        coords = [_int(c, f"relation.edges[{j}][{i}]") for i, c in enumerate(_list(e, f"relation.edges[{j}]"))]
        try:
            mask |= 1 << space.encode(coords)
        except ValidationError as exc:
            raise ValidationError(f"relation.edges[{j}]: {exc}") from None
    return Relation(space, mask)


def relation_to_json(rel: Relation) -> dict:
    return {"factors": list(rel.space.factors), "edges": [list(t) for t in rel.tuples()]}


def gip_spec_from_json(obj: dict) -> GipSpec:
    if "field" not in obj:
        raise ValidationError("relation.field: missing")
    field = FieldSpec.from_json(obj["field"])
    k = _int(obj.get("k"), "relation.k")
    s = obj.get("s")
    # default inner length 2^k: the witness formula pairs k parties with s = 2^k
    s = 2**k if s is None else _int(s, "relation.s")
    return GipSpec(field, s, k)


def measures_from_json(obj: Any, space: ProductSpace) -> list[WeightedMeasure]:
    if isinstance(obj, dict):
        obj = obj.get("measures")
    rows = _list(obj, "measures")
    if len(rows) != space.k:
        raise ValidationError(f"measures: expected {space.k} factor measures, got {len(rows)}")
    out = []
    for i, row in enumerate(rows):
        weights = [parse_fraction(w, f"measures[{i}][{j}]") for j, w in enumerate(_list(row, f"measures[{i}]"))]
        if len(weights) != space.factors[i]:
            raise ValidationError(f"measures[{i}]: expected {space.factors[i]} weights, got {len(weights)}")
        try:
            out.append(WeightedMeasure(tuple(weights)))
        except ValidationError as exc:
            raise ValidationError(f"measures[{i}]: {exc}") from None
    return out


def _element_index(space: ProductSpace, i: int, e, path: str) -> int:
    if isinstance(e, list):
        coords = [_int(c, path) for c in e]
        try:
            return space.encode_complement(i, coords)
        except ValidationError as exc:
            raise ValidationError(f"{path}: {exc}") from None
    y = _int(e, path)
    if not 0 <= y < space.complement_size(i):
        raise ValidationError(f"{path}: index {y} out of range")
    return y


def base_from_json(space: ProductSpace, i: int, elems, path: str) -> int:
    """A set of complementary-product elements (coordinate lists or indices) as a mask."""
    m = 0
    for j, e in enumerate(_list(elems, path)):
        m |= 1 << _element_index(space, i, e, f"{path}[{j}]")
    return m


def partition_from_json(obj: Any, space: ProductSpace) -> GridPartition:
    if isinstance(obj, dict):
        obj = obj.get("directions")
    dirs = _list(obj, "directions")
    if len(dirs) != space.k:
        raise ValidationError(f"directions: expected {space.k} directions, got {len(dirs)}")
    parsed = []
    for i, blocks in enumerate(dirs):
        parsed.append(
            tuple(base_from_json(space, i, b, f"directions[{i}][{j}]") for j, b in enumerate(_list(blocks, f"directions[{i}]")))
        )
    part = GridPartition(tuple(parsed))
    part.validate(space)
    return part


def partition_to_json(part: GridPartition, space: ProductSpace) -> dict:
    return {
        "directions": [
            [[list(space.decode_complement(i, y)) for y in points_of(b)] for b in blocks]
            for i, blocks in enumerate(part.directions)
        ]
    }


def algebra_from_json(obj: Any) -> tuple[FiniteBooleanAlgebra, list]:
    """Parse ``{"n", "gens", "weights"}``; weights are returned parsed but unattached."""
    if not isinstance(obj, dict):
        raise ValidationError("algebra: expected a JSON object")
    n = _int(obj.get("n"), "n")
    gens = []
    for j, g in enumerate(_list(obj.get("gens", []), "gens")):
        pts = [_int(x, f"gens[{j}]") for x in _list(g, f"gens[{j}]")]
        if any(not 0 <= x < n for x in pts):
            raise ValidationError(f"gens[{j}]: point outside 0..{n - 1}")
        gens.append(mask_of(pts))
    alg = FiniteBooleanAlgebra(n, tuple(gens))
    weights = [parse_fraction(w, f"weights[{j}]") for j, w in enumerate(_list(obj.get("weights", []), "weights"))]
    return alg, weights


def atom_measure_to_json(mu: AtomMeasure) -> dict:
    return {
        "atoms": [points_of(a) for a in mu.algebra.atoms],
        "weights": [format_fraction(w) for w in mu.weights],
    }
