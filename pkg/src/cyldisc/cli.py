"""Command-line harness.

Every JSON record carries the resolved configuration under ``"config"`` and
is written with sorted keys, so identical inputs give byte-identical output.
Exit codes: 0 ok, 1 validation error, 2 budget error, 3 invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .boolalg import AtomMeasure, FiniteBooleanAlgebra, extend_measure, extension_interval, is_determined, mask_of, points_of
from .cylinder import DEFAULT_CI_BUDGET, ci_to_json
from .discrepancy import DEFAULT_POINT_BUDGET, GipSpec, bhk_bound, gip_function, max_discrepancy_over_cis
from .errors import BudgetExhausted, CyldiscError, ValidationError
from .finfield import ff_make
from .formats import (
    algebra_from_json,
    atom_measure_to_json,
    dumps,
    load_json,
    measures_from_json,
    partition_from_json,
    partition_to_json,
    relation_from_json,
    relation_to_json,
)
from .rational import format_fraction, parse_fraction
from .regularity import DEFAULT_GRID_BUDGET, greedy_refine, regularity_defect, seh_search_exact, seh_search_greedy

THREADS_ENV = "CYLDISC_THREADS"


def _fraction_arg(text: str) -> Fraction:
    return parse_fraction(text, "argument")


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cyldisc", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--output", default=None, help="write here instead of stdout")
    common.add_argument("--threads", type=int, default=None, help=f"worker processes ({THREADS_ENV} overrides)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--point-budget", type=int, default=DEFAULT_POINT_BUDGET)
    common.add_argument("--ci-budget", type=int, default=DEFAULT_CI_BUDGET)
    common.add_argument("--grid-budget", type=int, default=DEFAULT_GRID_BUDGET)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", parents=[common], help="BHK discrepancy bound for GIP")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--k", type=int, required=True)

    p = sub.add_parser("gip-discrepancy", parents=[common], help="max strong discrepancy of GIP over all CIs")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--poly", type=_int_list, default=None, help="little-endian coefficients, e.g. 1,1,1")
    p.add_argument("--mode", choices=("exact", "bound", "check"), default="check")

    p = sub.add_parser("seh-search", parents=[common], help="heaviest homogeneous cylinder intersection")
    p.add_argument("--relation", required=True)
    p.add_argument("--measures", default=None)
    p.add_argument("--alpha", type=_fraction_arg, required=True)
    p.add_argument("--mode", choices=("exact", "greedy"), default="exact")
    p.add_argument("--restarts", type=int, default=32)

    p = sub.add_parser("regularity-defect", parents=[common], help="measure of non-homogeneous grid cells")
    p.add_argument("--relation", required=True)
    p.add_argument("--partition", default=None, help="omit to run greedy refinement")
    p.add_argument("--measures", default=None)
    p.add_argument("--eps", type=_fraction_arg, default=Fraction(1, 4))
    p.add_argument("--max-blocks", type=int, default=8)

    p = sub.add_parser("measure-extend", parents=[common], help="extend an atom measure to one more set")
    p.add_argument("--algebra", required=True)
    p.add_argument("--set", dest="set_", type=_int_list, required=True)
    p.add_argument("--alpha", type=_fraction_arg, default=None)

    p = sub.add_parser("determinacy-check", parents=[common], help="is a measure determined by a subalgebra")
    p.add_argument("--algebra", required=True)

    p = sub.add_parser("gen-relation", parents=[common], help="write a standard relation as JSON")
    p.add_argument("kind", choices=("halfgraph", "gip-zero"))
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--poly", type=_int_list, default=None)
    p.add_argument("--s", type=int, default=None, help="default 2^k")
    p.add_argument("--k", type=int, default=2)
    return ap


def resolve_config(args: argparse.Namespace) -> dict:
    threads = args.threads
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            threads = int(env)
        except ValueError:
            raise ValidationError(f"{THREADS_ENV}: not an integer: {env!r}") from None
    if threads is None:
        threads = os.cpu_count() or 1
    if threads < 1:
        raise ValidationError("threads must be >= 1")
    if not 0 <= args.seed < 2**64:
        raise ValidationError("seed must be a 64-bit unsigned value")
    for name in ("point_budget", "ci_budget", "grid_budget"):
        if getattr(args, name) < 1:
            raise ValidationError(f"{name.replace('_', '-')} must be positive")
    cfg = {}
    for key, value in sorted(vars(args).items()):
        if key == "set_":
            key = "set"
        if isinstance(value, Fraction):
            value = format_fraction(value)
        cfg[key] = value
    cfg["threads"] = threads
    return cfg


def _frac(x: Fraction | None) -> str | None:
    return None if x is None else format_fraction(x)


def cmd_bound(cfg: dict) -> dict:
    b = bhk_bound(cfg["q"], cfg["s"], cfg["k"])
    return {
        "q": b.q,
        "s": b.s,
        "k": b.k,
        "bound_float": b.value,
        "bound_display": b.display(),
        "rounding": "upper",
        "bound_exact": _frac(b.exact),
        "power": b.power,
        "bound_to_power": format_fraction(b.rhs_power),
    }


def cmd_gip_discrepancy(cfg: dict) -> dict:
    field = ff_make(cfg["p"], cfg["m"], cfg["poly"])
    spec = GipSpec(field, cfg["s"], cfg["k"])
    b = bhk_bound(spec.q, spec.s, spec.k)
    out = {
        "q": spec.q,
        "s": spec.s,
        "k": spec.k,
        "bound_float": b.value,
        "bound_display": b.display(),
        "gamma_max": None,
        "gamma_max_num": None,
        "gamma_max_den": None,
        "pass": None,
        "witness": None,
    }
    if cfg["mode"] == "bound":
        return out
    f = gip_function(spec, cfg["point_budget"])
    res = max_discrepancy_over_cis(f, spec.space, cfg["ci_budget"], cfg["threads"])
    out.update(
        gamma_max=format_fraction(res.gamma),
        gamma_max_num=res.gamma.numerator,
        gamma_max_den=res.gamma.denominator,
        witness=ci_to_json(res.witness),
        witness_index=res.index,
        argmax_value=res.argmax,
        cis_scanned=res.cis,
    )
    if cfg["mode"] == "check":
        out["pass"] = b.compare_exact(res.gamma)
    return out


def _load_measures(cfg: dict, space):
    if cfg.get("measures") is None:
        return None
    return measures_from_json(load_json(cfg["measures"]), space)


def cmd_seh_search(cfg: dict) -> dict:
    rel = relation_from_json(load_json(cfg["relation"]), cfg["point_budget"])
    measures = _load_measures(cfg, rel.space)
    alpha = parse_fraction(cfg["alpha"], "alpha")
    if cfg["mode"] == "exact":
        res = seh_search_exact(rel, measures, alpha, cfg["ci_budget"])
    else:
        res = seh_search_greedy(rel, measures, alpha, cfg["seed"], cfg["restarts"])
    if res is None:
        return {"found": False, "measure": None, "kind": None, "witness": None}
    return {
        "found": True,
        "measure": format_fraction(res.measure),
        "kind": res.kind.value,
        "witness": ci_to_json(res.ci),
        "witness_index": res.index,
        "restart": res.restart,
    }


def cmd_regularity_defect(cfg: dict) -> dict:
    rel = relation_from_json(load_json(cfg["relation"]), cfg["point_budget"])
    measures = _load_measures(cfg, rel.space)
    out: dict = {}
    if cfg["partition"] is not None:
        part = partition_from_json(load_json(cfg["partition"]), rel.space)
        out["refined"] = False
    else:
        try:
            refined = greedy_refine(rel, measures, parse_fraction(cfg["eps"], "eps"), cfg["max_blocks"], cfg["grid_budget"])
            part = refined.partition
            out["refined"] = True
        except BudgetExhausted as exc:
            part = exc.partition
            out["refined"] = False
            out["budget_exhausted"] = True
    report = regularity_defect(part, rel, measures, cfg["grid_budget"])
    out.update(
        defect=format_fraction(report.defect),
        bad_cells=[{"cell": list(c), "measure": format_fraction(m)} for c, m in report.bad_cells],
        partition=partition_to_json(part, rel.space),
    )
    return out


def cmd_measure_extend(cfg: dict) -> dict:
    alg, weights = algebra_from_json(load_json(cfg["algebra"]))
    mu = AtomMeasure(alg, tuple(weights))
    if any(not 0 <= x < alg.n for x in cfg["set"]):
        raise ValidationError(f"set: points must lie in 0..{alg.n - 1}")
    b = mask_of(cfg["set"])
    lo, hi = extension_interval(mu, b)
    out = {"lo": format_fraction(lo), "hi": format_fraction(hi), "extension": None}
    if cfg["alpha"] is not None:
        nu = extend_measure(mu, b, parse_fraction(cfg["alpha"], "alpha"))
        out["extension"] = atom_measure_to_json(nu)
        out["extension"]["value_on_set"] = format_fraction(nu(b))
    return out


def cmd_determinacy_check(cfg: dict) -> dict:
    alg, weights = algebra_from_json(load_json(cfg["algebra"]))
    if len(weights) != alg.n:
        raise ValidationError(f"weights: determinacy-check expects one weight per ground point ({alg.n})")
    nu = AtomMeasure(FiniteBooleanAlgebra.power_set(alg.n), tuple(weights))
    rep = is_determined(nu, alg.gens)
    return {
        "determined": rep.determined,
        "border_method": rep.border_method,
        "interval_method": rep.interval_method,
        "exhaustive": rep.exhaustive,
        "witness_set": None if rep.witness is None else points_of(rep.witness),
        "subalgebra_atoms": [points_of(a) for a in alg.atoms],
    }


def cmd_gen_relation(cfg: dict) -> dict:
    if cfg["kind"] == "halfgraph":
        obj = {"kind": "halfgraph", "n": cfg["n"]}
    else:
        field = ff_make(cfg["p"], cfg["m"], cfg["poly"])
        obj = {"kind": "gip", "field": field.to_json(), "k": cfg["k"], "s": cfg["s"]}
    rel = relation_from_json(obj, cfg["point_budget"])
    return {"relation": relation_to_json(rel)}


COMMANDS = {
    "bound": cmd_bound,
    "gip-discrepancy": cmd_gip_discrepancy,
    "seh-search": cmd_seh_search,
    "regularity-defect": cmd_regularity_defect,
    "measure-extend": cmd_measure_extend,
    "determinacy-check": cmd_determinacy_check,
    "gen-relation": cmd_gen_relation,
}

GIP_CSV_COLUMNS = ["q", "s", "k", "gamma_max_num", "gamma_max_den", "bound_float", "pass", "witness"]


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (dict, list, bool)):
        return json.dumps(v, sort_keys=True, separators=(",", ":"))
    return str(v)


def to_csv(command: str, result: dict) -> str:
    if command == "gip-discrepancy":
        columns = GIP_CSV_COLUMNS
    else:
        columns = sorted(result)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerow([_csv_cell(result.get(c)) for c in columns])
    return buf.getvalue()


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        result = COMMANDS[args.command](cfg)
    except CyldiscError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    if cfg["format"] == "csv":
        text = to_csv(args.command, result)
    else:
        text = dumps({"config": cfg, "result": result})
    if cfg["output"]:
        Path(cfg["output"]).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def main() -> None:
    sys.exit(run())
