"""Command line entry point: `guillopack <command> ...`.

Exit codes: 0 ok, 1 infeasible or not separable, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Callable

from . import bench, core
from .classify import ClassThresholds, choose_thresholds, classify
from .compartments import CompartmentSet, compose_pseudo, pseudo_from_dict
from .guillotine import GuillotineTree, check_guillotine, stage_count
from .lpack import LRegion, build_l_from_guillotine, solve_l_cardinality
from .oracle import oracle_exact
from .packers import GapInstance, BudgetExceeded, gap_solve, match_large, nfdh_pack
from .render import render_svg
from .solver import SolverConfig, solve_cardinality

OK, INFEASIBLE, BAD_INPUT = 0, 1, 2


class BadInput(Exception):
    pass


def _read_json(path: str | None) -> dict:
    try:
        if path is None or path == "-":
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise BadInput(str(exc)) from exc


def _instance(path: str | None) -> core.Instance:
    try:
        return core.instance_from_dict(_read_json(path))
    except ValueError as exc:
        raise BadInput(str(exc)) from exc


def _packing(path: str | None) -> core.Packing:
    try:
        base = Path(path).parent if path and path != "-" else None
        return core.packing_from_dict(_read_json(path), base)
    except ValueError as exc:
        raise BadInput(str(exc)) from exc


def _emit(obj: dict, out: str | None) -> None:
    text = json.dumps(obj, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _write_svg(path: str | None, p: core.Packing, t: GuillotineTree | None, cset=None) -> None:
    if path:
        Path(path).write_text(render_svg(p, t, cset=cset))


def _frac(s: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {s}") from exc


# --- commands ----------------------------------------------------------------

def cmd_check(a) -> int:
    p = _packing(a.input)
    bad = core.validate_packing(p)
    verdict = check_guillotine(p)
    sep = isinstance(verdict, GuillotineTree)
    out = {"valid": not bad, "violations": [{"kind": v.kind, "ids": list(v.ids), "detail": v.detail} for v in bad],
           "separable": sep}
    if sep:
        out["stages"] = stage_count(verdict).stages
        out["tree"] = verdict.to_dict()
    else:
        out["witness"] = list(verdict.witness.as_tuple())
        out["witness_items"] = list(verdict.item_ids)
    _emit(out, a.out)
    return OK if (not bad and sep) else INFEASIBLE


def _config(a) -> SolverConfig:
    t = None
    if a.eps_large is not None or a.eps_small is not None:
        if a.eps_large is None or a.eps_small is None:
            raise BadInput("--eps-large and --eps-small go together")
        t = ClassThresholds(a.eps, a.eps_large, a.eps_small)
    return SolverConfig(eps=a.eps, thresholds=t, mode=a.mode, seed=a.seed, budget=a.budget)


def cmd_solve(a) -> int:
    inst = _instance(a.input)
    cset = None
    if a.compartments != "enumerate":
        try:
            cset = CompartmentSet.from_tree(pseudo_from_dict(_read_json(a.compartments)))
        except (ValueError, KeyError, TypeError) as exc:
            raise BadInput(f"bad compartments: {exc}") from exc
    try:
        res = solve_cardinality(inst, cset, _config(a))
    except ValueError as exc:
        raise BadInput(str(exc)) from exc
    _emit(core.packing_to_dict(res.packing), a.out)
    _write_svg(a.svg, res.packing, res.tree, res.compartments)
    if a.stats:
        Path(a.stats).write_text(json.dumps({"value": res.value, **{k: v for k, v in res.stats.items()
                                                                     if isinstance(v, (int, str, bool, list, tuple))}},
                                            indent=2) + "\n")
    return OK


def cmd_oracle(a) -> int:
    inst = _instance(a.input)
    try:
        res = oracle_exact(inst, a.flavor, a.budget)
    except ValueError as exc:
        raise BadInput(str(exc)) from exc
    _emit({"value": res.value, "complete": res.complete, "nodes": res.nodes, "flavor": res.flavor,
           "packing": core.packing_to_dict(res.packing)}, a.out)
    _write_svg(a.svg, res.packing, None)
    return OK


def cmd_lpack(a) -> int:
    d = _read_json(a.input)
    if "region" in d and "instance" in d:
        # solve mode: best canonical subset for a given L region
        try:
            inst = core.instance_from_dict(d["instance"])
            r = d["region"]
            region = LRegion(inst.N, int(r["h_wide"]), int(r["w_tall"]))
            sol = solve_l_cardinality(inst.items, region)
        except (KeyError, TypeError, ValueError) as exc:
            raise BadInput(str(exc)) from exc
        p = core.place(inst, sol.rects)
        _emit({"value": sol.value, "packing": core.packing_to_dict(p)}, a.out)
        _write_svg(a.svg, p, None)
        return OK
    try:
        p = core.packing_from_dict(d, Path(a.input).parent if a.input and a.input != "-" else None)
    except ValueError as exc:
        raise BadInput(str(exc)) from exc
    t = check_guillotine(p)
    if not isinstance(t, GuillotineTree):
        print(f"not separable: items {list(t.item_ids)}", file=sys.stderr)
        return INFEASIBLE
    try:
        res = build_l_from_guillotine(p, t)
    except ValueError as exc:
        raise BadInput(str(exc)) from exc
    _emit({"region": {"N": res.region.N, "h_wide": res.region.h_wide, "w_tall": res.region.w_tall},
           "packing": core.packing_to_dict(res.packing)}, a.out)
    _write_svg(a.svg, res.packing, None)
    return OK


def cmd_nfdh(a) -> int:
    inst = _instance(a.input)
    try:
        res = nfdh_pack(inst.items, inst.knapsack)
    except ValueError as exc:
        raise BadInput(str(exc)) from exc
    p = core.place(inst, res.rects)
    _emit({"packing": core.packing_to_dict(p), "tree": res.tree.to_dict(), "area": res.area,
           "unpacked": list(res.unpacked)}, a.out)
    _write_svg(a.svg, p, res.tree)
    return OK


def cmd_gap(a) -> int:
    d = _read_json(a.input)
    try:
        g = GapInstance.build(d["capacities"], d["sizes"], d["profits"])
        asg = gap_solve(g, a.mode, a.budget)
    except (KeyError, TypeError, ValueError) as exc:
        raise BadInput(f"bad GAP input: {exc}") from exc
    except BudgetExceeded as exc:
        print(str(exc), file=sys.stderr)
        return INFEASIBLE
    _emit({"assignment": {str(i): j for i, j in sorted(asg.items())}, "value": g.value(asg)}, a.out)
    return OK


def cmd_match(a) -> int:
    d = _read_json(a.input)
    try:
        items = [core.Item(int(o["id"]), int(o["w"]), int(o["h"])) for o in d["items"]]
        boxes = [core.Rect(*b) for b in d["boxes"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise BadInput(f"bad matching input: {exc}") from exc
    m = match_large(items, boxes)
    _emit({"matching": {str(i): j for i, j in sorted(m.items())}, "size": len(m)}, a.out)
    return OK


def cmd_classify(a) -> int:
    inst = _instance(a.input)
    if a.eps_large is not None and a.eps_small is not None:
        t = ClassThresholds(a.eps, a.eps_large, a.eps_small)
    else:
        t = choose_thresholds(inst, a.eps)
    classes = {str(it.id): classify(it, t, inst.N).value for it in inst.items}
    _emit({"eps": str(t.eps), "eps_large": str(t.eps_large), "eps_small": str(t.eps_small),
           "classes": classes}, a.out)
    return OK


def cmd_compose(a) -> int:
    d = _read_json(a.input)
    try:
        inst = core.instance_from_dict(d["instance"])
        tree = pseudo_from_dict(d["tree"])
        fillings = [[core.Placement(int(o["id"]), int(o["x"]), int(o["y"]), bool(o.get("rot", False)))
                     for o in f] for f in d["fillings"]]
        res = compose_pseudo(inst, tree, fillings, eps=Fraction(d["eps"]) if "eps" in d else None)
    except (KeyError, TypeError) as exc:
        raise BadInput(f"bad compose input: {exc}") from exc
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return INFEASIBLE
    _emit({"packing": core.packing_to_dict(res.packing), "tree": res.tree.to_dict()}, a.out)
    _write_svg(a.svg, res.packing, res.tree, CompartmentSet.from_tree(tree))
    return OK


def cmd_gen_hard(a) -> int:
    inst, p = bench.gen_hard_family(a.k)
    _emit({"instance": core.instance_to_dict(inst), "packing": core.packing_to_dict(p)}, a.out)
    _write_svg(a.svg, p, check_guillotine(p))
    return OK


def cmd_gen_random(a) -> int:
    try:
        inst = bench.gen_random(a.n, a.N, a.profile, a.seed, max_profit=a.max_profit)
    except ValueError as exc:
        raise BadInput(str(exc)) from exc
    _emit(core.instance_to_dict(inst), a.out)
    return OK


def _named_instances(a) -> list[tuple[str, core.Instance]]:
    out = [(path, _instance(path)) for path in (a.input or [])]
    if a.pinwheel:
        out.append(("pinwheel", bench.pinwheel()[0]))
    for s in range(a.random):
        out.append((f"random-{a.seed + s}", bench.gen_random(1 + (a.seed + s) % 6, 8, "mixed", a.seed + s)))
    if not out:
        raise BadInput("no instances given")
    return out


def cmd_ratio(a) -> int:
    rep = bench.ratio_experiment(_named_instances(a), a.budget)
    _emit({"rows": [{"instance": r.name, "free": r.free, "guillotine": r.guillotine,
                     "ratio": str(r.ratio) if r.ratio is not None else None, "complete": r.complete}
                    for r in rep.rows],
           "max_ratio": str(rep.max_ratio) if rep.max_ratio is not None else None}, a.out)
    return OK


def cmd_render(a) -> int:
    p = _packing(a.input)
    t = None
    if a.tree:
        try:
            t = GuillotineTree.from_dict(_read_json(a.tree))
        except (KeyError, TypeError, ValueError) as exc:
            raise BadInput(f"bad tree: {exc}") from exc
    elif a.cuts:
        got = check_guillotine(p)
        t = got if isinstance(got, GuillotineTree) else None
    svg = render_svg(p, t)
    if a.out:
        Path(a.out).write_text(svg)
    else:
        sys.stdout.write(svg)
    return OK


def cmd_bench(a) -> int:
    rows = bench.bench_rows(_named_instances(a), budget=a.budget, eps=a.eps)
    text = bench.rows_to_csv(rows)
    if a.out:
        Path(a.out).write_text(text)
    else:
        sys.stdout.write(text)
    return OK


# --- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="guillopack", description="Guillotine knapsack toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name: str, fn: Callable, help_: str, multi: bool = False) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=help_)
        if multi:
            sp.add_argument("--in", dest="input", nargs="*", default=[], help="input files")
        else:
            sp.add_argument("--in", dest="input", default=None, help="input JSON (default stdin)")
        sp.add_argument("--out", default=None, help="output file (default stdout)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--eps", type=_frac, default=Fraction(1, 3))
        sp.add_argument("--budget", type=int, default=2_000_000)
        sp.set_defaults(fn=fn)
        return sp

    add("check", cmd_check, "validate a packing and test guillotine separability")
    sp = add("solve", cmd_solve, "run the cardinality pipeline")
    sp.add_argument("--mode", choices=("auto", "few", "many"), default="auto")
    sp.add_argument("--compartments", default="enumerate", help="pseudo tree JSON file or 'enumerate'")
    sp.add_argument("--eps-large", type=_frac, default=None)
    sp.add_argument("--eps-small", type=_frac, default=None)
    sp.add_argument("--svg", default=None)
    sp.add_argument("--stats", default=None)
    sp = add("oracle", cmd_oracle, "exhaustive optimum")
    sp.add_argument("--flavor", default="free", help="free, guillotine or stages:k")
    sp.add_argument("--svg", default=None)
    sp = add("lpack", cmd_lpack, "repack a separable long-item packing into a boundary L, or solve an L region")
    sp.add_argument("--svg", default=None)
    sp = add("nfdh", cmd_nfdh, "NFDH shelf packing into the knapsack")
    sp.add_argument("--svg", default=None)
    sp = add("gap", cmd_gap, "generalized assignment")
    sp.add_argument("--mode", choices=("exact", "greedy_eps"), default="exact")
    add("match", cmd_match, "maximum matching of items to boxes")
    sp = add("classify", cmd_classify, "item classes")
    sp.add_argument("--eps-large", type=_frac, default=None)
    sp.add_argument("--eps-small", type=_frac, default=None)
    sp = add("compose", cmd_compose, "compose compartment fillings into a global cut tree")
    sp.add_argument("--svg", default=None)
    sp = add("gen-hard", cmd_gen_hard, "hard stage family")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--svg", default=None)
    sp = add("gen-random", cmd_gen_random, "random instance")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--profile", choices=("mixed", "skewed", "small"), default="mixed")
    sp.add_argument("--max-profit", type=int, default=1)
    for name, fn, help_ in (("ratio", cmd_ratio, "free vs guillotine optimum ratios"),
                            ("bench", cmd_bench, "benchmark CSV")):
        sp = add(name, fn, help_, multi=True)
        sp.add_argument("--pinwheel", action="store_true")
        sp.add_argument("--random", type=int, default=0, help="number of seeded random instances")
    sp = add("render", cmd_render, "SVG of a packing")
    sp.add_argument("--tree", default=None, help="cut tree JSON to overlay")
    sp.add_argument("--cuts", action="store_true", help="overlay the checker's cut tree")
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as exc:
        return BAD_INPUT if exc.code else OK
    try:
        return a.fn(a)
    except BadInput as exc:
        print(f"bad input: {exc}", file=sys.stderr)
        return BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
