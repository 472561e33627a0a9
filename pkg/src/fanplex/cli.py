"""Command-line surface: build, render, verify, homogeneity, counterexample.

Exit codes: 0 success, 2 usage error, 3 verification or experiment failure,
1 internal invariant breach (never expected). All outputs are deterministic
for fixed flags; reports are canonical JSON on stdout.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import fans, simplices
from .categories import FAN, FAN_PAIRED, SIMPLEX, flavor
from .core import InvariantError, RunningComposites, fraisse_failures
from .engine import (
    DenseFamilyConfig,
    build_fraisse_sequence,
    canonical_arrow_into,
    density_gap_curve,
    density_report,
    homogeneity_iso,
)
from .generators import make_rng
from .jsonio import (
    canonical_dumps,
    density_report_to_json,
    load_bundle,
    save_bundle,
)
from .rationals import Q0, Q1, fmt_dist, fmt_rat, parse_rat
from .render import render_stage

KIND_TO_CATEGORY = {
    "lelek": FAN,
    "poulsen": SIMPLEX,
    "lelek-paired": FAN_PAIRED,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fanplex",
        description="Exact fan and simplex sequence builds with verification experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build a sequence bundle")
    b.add_argument("kind", choices=sorted(KIND_TO_CATEGORY))
    b.add_argument("--budget", type=int, required=True)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--denom-bound", type=int, default=8)
    b.add_argument("--size-bound", type=int, default=16)
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_build)

    r = sub.add_parser("render", help="render one stage to SVG")
    r.add_argument("--in", dest="infile", required=True)
    r.add_argument("--stage", type=int, required=True)
    r.add_argument("--svg", required=True)
    r.add_argument("--width", type=int, default=640)
    r.add_argument("--height", type=int, default=640)
    r.add_argument("--stroke", default="3/2")
    r.set_defaults(func=cmd_render)

    v = sub.add_parser("verify", help="run a verification suite on a bundle")
    v.add_argument("--in", dest="infile", required=True)
    v.add_argument(
        "--suite", choices=["axioms", "lipschitz", "fraisse", "density"], required=True
    )
    v.add_argument("--stage", type=int, default=0)
    v.add_argument("--mesh", default=None)
    v.add_argument("--horizon", default="max")
    v.add_argument("--plot", default=None, help="matplotlib figure output (density)")
    v.add_argument("--csv", default=None, help="delimited gap curve output (density)")
    v.set_defaults(func=cmd_verify)

    h = sub.add_parser("homogeneity", help="approximate isomorphism experiment")
    h.add_argument("--a", dest="bundle_a", required=True)
    h.add_argument("--b", dest="bundle_b", required=True)
    h.add_argument("--fan", dest="object_file", required=True)
    h.add_argument("--eps", required=True)
    h.add_argument("--budget", type=int, default=24)
    h.set_defaults(func=cmd_homogeneity)

    c = sub.add_parser("counterexample", help="certify the end-point shear map")
    c.add_argument("--grid", type=int, required=True)
    c.add_argument("--plot", default=None)
    c.set_defaults(func=cmd_counterexample)
    return parser


def cmd_build(args) -> int:
    if args.budget < 0:
        raise ValueError("budget must be nonnegative")
    cfg = DenseFamilyConfig(
        category=KIND_TO_CATEGORY[args.kind],
        denom_bound=args.denom_bound,
        size_bound=args.size_bound,
        seed=args.seed,
    )
    report = build_fraisse_sequence(cfg, args.budget)
    save_bundle(report, args.out)
    print(
        canonical_dumps(
            {
                "out": str(args.out),
                "kind": args.kind,
                "stages": report.sequence.depth + 1,
                "tasks": len(report.log.entries),
            }
        ),
        end="",
    )
    return 0


def cmd_render(args) -> int:
    bundle = load_bundle(args.infile)
    seq = bundle.sequence
    if not (0 <= args.stage <= seq.depth):
        raise ValueError(f"missing stage {args.stage}; bundle has 0..{seq.depth}")
    svg = render_stage(
        seq.objects[args.stage], args.width, args.height, parse_rat(args.stroke)
    )
    Path(args.svg).write_text(svg, encoding="utf-8")
    return 0


def _suite_axioms(bundle) -> dict:
    seq, log = bundle.sequence, bundle.log
    cat = seq.category
    violations: list[str] = []
    for n, bond in enumerate(seq.bonds):
        for msg in cat.validate(bond):
            violations.append(f"bond {n}: {msg}")
    for idx, entry in enumerate(log.entries):
        for msg in cat.validate(entry.f) + cat.validate(entry.g):
            violations.append(f"log entry {idx}: {msg}")
    checked_identity = 0
    for n, bond in enumerate(seq.bonds[:40]):
        left = cat.compose(bond, cat.identity(bond.dom))
        right = cat.compose(cat.identity(bond.cod), bond)
        if not (cat.arrows_equal(left, bond) and cat.arrows_equal(right, bond)):
            violations.append(f"identity law fails at bond {n}")
        checked_identity += 1
    checked_assoc = 0
    for n in range(min(len(seq.bonds) - 2, 40)):
        b0, b1, b2 = seq.bonds[n], seq.bonds[n + 1], seq.bonds[n + 2]
        left = cat.compose(b2, cat.compose(b1, b0))
        right = cat.compose(cat.compose(b2, b1), b0)
        if not cat.arrows_equal(left, right):
            violations.append(f"associativity fails at bonds {n}..{n + 2}")
        checked_assoc += 1
    composites = RunningComposites(seq)
    checked_strict = 0
    for idx, entry in enumerate(log.entries[:200]):
        composite = composites.get(entry.m, entry.n)
        if not cat.arrows_equal(cat.compose(entry.g, entry.f), composite):
            violations.append(f"strict realization fails at log entry {idx}")
        checked_strict += 1
    return {
        "suite": "axioms",
        "ok": not violations,
        "violations": violations,
        "checked": {
            "bonds": len(seq.bonds),
            "identity": checked_identity,
            "associativity": checked_assoc,
            "strict_realizations": checked_strict,
        },
    }


def _suite_lipschitz(bundle) -> dict:
    seq = bundle.sequence
    cat = seq.category
    rng = make_rng(0)
    violations: list[str] = []
    checked = 0
    bonds = seq.bonds[:40]
    for n, bond in enumerate(bonds):
        if flavor(cat) == FAN:
            for _ in range(25):
                x = fans.FanPoint(rng.randrange(bond.cod.size), Fraction(rng.randint(0, 16), 16))
                y = fans.FanPoint(rng.randrange(bond.cod.size), Fraction(rng.randint(0, 16), 16))
                src = fans.fan_distance(bond.cod, x, y)
                img = fans.fan_distance(bond.dom, fans.eval_p(bond, x), fans.eval_p(bond, y))
                checked += 1
                if img > src:
                    violations.append(f"bond {n}: expansion {img} > {src}")
        else:
            for _ in range(25):
                x = _random_simplex_point(rng, bond.cod.dim)
                y = _random_simplex_point(rng, bond.cod.dim)
                src = simplices.l1_dist(x, y)
                img = simplices.l1_dist(
                    simplices.apply_projection(bond, x),
                    simplices.apply_projection(bond, y),
                )
                checked += 1
                if img > src:
                    violations.append(f"bond {n}: l1 expansion {img} > {src}")
    return {
        "suite": "lipschitz",
        "ok": not violations,
        "violations": violations,
        "checked": {"pairs": checked, "bonds": len(bonds)},
    }


def _random_simplex_point(rng, dim: int):
    q = 16
    cuts = sorted(rng.randint(0, q) for _ in range(dim))
    parts, prev = [], 0
    for c in cuts + [q]:
        parts.append(Fraction(c - prev, q))
        prev = c
    return tuple(parts)


def _suite_fraisse(bundle) -> dict:
    failures = fraisse_failures(bundle.sequence, bundle.log)
    return {
        "suite": "fraisse",
        "ok": not failures,
        "violations": failures,
        "checked": {"entries": len(bundle.log.entries)},
    }


def _suite_density(bundle, args) -> dict:
    if args.mesh is None:
        raise ValueError("density suite needs --mesh")
    mesh = parse_rat(args.mesh)
    seq = bundle.sequence
    horizon = seq.depth if args.horizon == "max" else int(args.horizon)
    report = density_report(seq, args.stage, mesh, horizon)
    threshold = mesh if report.metric == "path" else mesh * mesh
    data = density_report_to_json(report)
    data["suite"] = "density"
    data["threshold"] = fmt_rat(threshold)
    data["ok"] = report.worst_gap < threshold
    if args.csv or args.plot:
        quartiles = sorted(
            {max(args.stage, horizon // 4), max(args.stage, horizon // 2),
             max(args.stage, (3 * horizon) // 4), horizon}
        )
        curve = density_gap_curve(seq, args.stage, mesh, quartiles)
        if args.csv:
            lines = ["horizon,worst_gap"]
            lines += [f"{h},{fmt_rat(g)}" for h, g in curve]
            Path(args.csv).write_text("\n".join(lines) + "\n", encoding="utf-8")
            data["csv"] = str(args.csv)
        if args.plot:
            from .figures import save_density_figure

            save_density_figure(curve, args.plot)
            data["plot"] = str(args.plot)
    return data


def cmd_verify(args) -> int:
    bundle = load_bundle(args.infile)
    if args.suite == "axioms":
        data = _suite_axioms(bundle)
    elif args.suite == "lipschitz":
        data = _suite_lipschitz(bundle)
    elif args.suite == "fraisse":
        data = _suite_fraisse(bundle)
    else:
        data = _suite_density(bundle, args)
    print(canonical_dumps(data), end="")
    return 0 if data["ok"] else 3


def cmd_homogeneity(args) -> int:
    a = load_bundle(args.bundle_a)
    b = load_bundle(args.bundle_b)
    if a.sequence.category is not b.sequence.category:
        raise ValueError("bundles were built in different categories")
    cat = a.sequence.category
    obj_data = json.loads(Path(args.object_file).read_text(encoding="utf-8"))
    obj = cat.obj_from_json(obj_data)
    eps = parse_rat(args.eps)
    i_arrow, _ = canonical_arrow_into(a.sequence, obj)
    j_arrow, _ = canonical_arrow_into(b.sequence, obj)
    result = homogeneity_iso(a.sequence, b.sequence, i_arrow, j_arrow, eps, args.budget)
    data = {
        "achieved": fmt_dist(result.achieved),
        "eps": fmt_rat(eps),
        "ok": result.ok,
        "complete": result.result.complete,
        "final_stages": [result.final_dom_stage, result.final_cod_stage],
        "rounds": len(result.result.steps),
    }
    print(canonical_dumps(data), end="")
    return 0 if result.ok else 3


def counterexample_report(grid_n: int) -> dict:
    if grid_n < 2:
        raise ValueError("grid must be at least 2")
    half = Fraction(1, 2)
    axis = [Fraction(i, grid_n) for i in range(grid_n + 1)]
    violations: list[str] = []
    first_ok = True
    bottom_ok = True
    for x in axis:
        gx, gy = fans.counterexample_g(x, Q0)
        if (gx, gy) != (x, Q0):
            bottom_ok = False
            violations.append(f"bottom edge moves at x={x}")
        for y in axis:
            if fans.counterexample_g(x, y)[0] != x:
                first_ok = False
                violations.append(f"first coordinate moves at ({x},{y})")
    monotone_ok = True
    for x in axis:
        if x == half:
            continue
        values = [fans.counterexample_g(x, y)[1] for y in axis]
        if any(b <= a for a, b in zip(values, values[1:])):
            monotone_ok = False
            violations.append(f"column x={x} is not strictly increasing")
    w1 = fans.counterexample_g(half, Fraction(1, 4))
    w2 = fans.counterexample_g(half, Fraction(1, 8))
    collapse_ok = w1 == w2 == (half, Q0)
    if not collapse_ok:
        violations.append("collapse witness pair failed")
    top = fans.counterexample_g(half, Q1)
    return {
        "grid": grid_n,
        "first_coordinate_preserved": first_ok,
        "bottom_edge_fixed": bottom_ok,
        "strictly_monotone_off_center": monotone_ok,
        "center_collapse_pair": {
            "points": [["1/2", "1/4"], ["1/2", "1/8"]],
            "image": [fmt_rat(w1[0]), fmt_rat(w1[1])],
            "ok": collapse_ok,
        },
        "center_top_image": [fmt_rat(top[0]), fmt_rat(top[1])],
        "ok": first_ok and bottom_ok and monotone_ok and collapse_ok,
        "violations": violations,
    }


def cmd_counterexample(args) -> int:
    data = counterexample_report(args.grid)
    if args.plot:
        from .figures import save_counterexample_figure

        save_counterexample_figure(args.grid, args.plot)
        data["plot"] = str(args.plot)
    print(canonical_dumps(data), end="")
    return 0 if data["ok"] else 3


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code is None else int(exc.code)
    try:
        return args.func(args)
    except InvariantError as exc:
        print(f"internal invariant violated: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
