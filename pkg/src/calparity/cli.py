"""Command-line front end: stats, post-processing, diagnostics, plot data.

All reports are JSON on stdout with floats rounded to 12 significant
digits, so repeated runs with the same inputs, flags, and seed are
byte-identical. Exit codes: 0 success, 1 input or usage error, 2
infeasible instance.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import eo as eo_mod
from .cost import CostPair, CostSpec, cost, trivial_cost, weighted_cost_spec
from .dataset import (
    CSV_HEADER,
    CsvFormatError,
    GroupData,
    SynthSpec,
    load_csv,
    synth_calibrated,
    synth_miscalibrated,
    write_csv,
)
from .impossibility import approximate_bound, build_matrix, exact_impossibility_check
from .metrics import analytic_rates, calibration_gap, linearity_residual, rate_point
from .parity import (
    MODE_DETERMINISTIC,
    MODE_MONTE_CARLO,
    REASON_COST_ORDER,
    AlreadyTrivialError,
    InterpolationPlan,
    compute_alpha,
    feasibility,
    mixture_calibration_gap,
    mixture_cost,
    mixture_rate_point,
    realize_mixture,
)
from .scene import build_scene

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; this CLI reserves 2 for infeasibility."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _rounded(obj):
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _rounded(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_rounded(v) for v in obj]
    return obj


def _emit(report: dict) -> None:
    json.dump(_rounded(report), sys.stdout, indent=2)
    sys.stdout.write("\n")


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_USAGE


def _parse_floats(text: str, count: int, flag: str) -> list[float]:
    parts = text.split(",")
    if len(parts) != count:
        raise ValueError(f"{flag} expects {count} comma-separated numbers, got {text!r}")
    return [float(p) for p in parts]


def _parse_binning(text: str) -> tuple[str, int]:
    if text == "exact":
        return "exact-unique", 0
    if text.startswith("fixed:"):
        bins = int(text.split(":", 1)[1])
        if bins < 1:
            raise ValueError("fixed-width binning needs at least one bin")
        return "fixed-width", bins
    raise ValueError(f"binning must be 'exact' or 'fixed:B', got {text!r}")


def _two_groups(groups: list[GroupData], group1: str | None) -> tuple[GroupData, GroupData]:
    if len(groups) != 2:
        raise ValueError(f"expected exactly two groups, found {len(groups)}")
    if group1 is None:
        return groups[0], groups[1]
    ids = {g.group_id: g for g in groups}
    if group1 not in ids:
        raise ValueError(f"--group1 {group1!r} not present; groups are {sorted(ids)}")
    other = next(g for g in groups if g.group_id != group1)
    return ids[group1], other


def _resolve_specs(args, g1: GroupData, g2: GroupData) -> dict[str, CostSpec]:
    """Per-group cost specs; --cost binds a1,b1 to G1 as currently assigned."""
    if (args.cost is None) == (args.weighted_cost is None):
        raise ValueError("provide exactly one of --cost a1,b1,a2,b2 or --weighted-cost rfp,rfn")
    if args.cost is not None:
        a1, b1, a2, b2 = _parse_floats(args.cost, 4, "--cost")
        return {g1.group_id: CostSpec(a1, b1), g2.group_id: CostSpec(a2, b2)}
    r_fp, r_fn = _parse_floats(args.weighted_cost, 2, "--weighted-cost")
    return {
        g1.group_id: weighted_cost_spec(r_fp, r_fn, g1.base_rate),
        g2.group_id: weighted_cost_spec(r_fp, r_fn, g2.base_rate),
    }


def _gap_report(g: GroupData, binning: str, bins: int) -> dict:
    report = calibration_gap(g, binning, bins) if bins else calibration_gap(g, binning)
    return report.to_json_dict()


def _rates_dict(p) -> dict:
    return {"fp": p.c_fp, "fn": p.c_fn}


def _write_rows(path: str | Path, rows: list[list], header: tuple[str, ...]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _score_rows(groups: list[GroupData], scores_by_id: dict[str, np.ndarray]) -> list[list]:
    rows = []
    for g in groups:
        scores = scores_by_id.get(g.group_id, g.scores)
        for s, y in zip(scores, g.labels):
            rows.append([g.group_id, repr(float(s)), int(y)])
    return rows


def cmd_stats(args) -> int:
    groups = load_csv(args.input)
    binning, bins = _parse_binning(args.binning)
    report = {"groups": []}
    for g in groups:
        p = rate_point(g)
        a = analytic_rates(g)
        report["groups"].append(
            {
                "group": g.group_id,
                "n": len(g),
                "base_rate": g.base_rate,
                "rates": _rates_dict(p),
                "analytic_rates": _rates_dict(a),
                "calibration": _gap_report(g, binning, bins),
                "linearity_residual": linearity_residual(g),
            }
        )
    _emit(report)
    return EXIT_OK


def cmd_postprocess_calibrated(args) -> int:
    groups = load_csv(args.input)
    g1, g2 = _two_groups(groups, args.group1)
    specs = _resolve_specs(args, g1, g2)
    binning, bins = _parse_binning(args.binning)
    mode = MODE_MONTE_CARLO if args.mode == "mc" else MODE_DETERMINISTIC
    if mode == MODE_MONTE_CARLO and args.seed is None:
        raise ValueError("--mode mc requires --seed")

    def group_cost(g: GroupData) -> float:
        return cost(rate_point(g), specs[g.group_id])

    verdict = feasibility(group_cost(g1), group_cost(g2), trivial_cost(g2.base_rate, specs[g2.group_id]))
    swapped = False
    if verdict.reason == REASON_COST_ORDER:
        g1, g2 = g2, g1
        swapped = True
        verdict = feasibility(
            group_cost(g1), group_cost(g2), trivial_cost(g2.base_rate, specs[g2.group_id])
        )

    report = {
        "group1": g1.group_id,
        "group2": g2.group_id,
        "swapped": swapped,
        "cost_specs": {gid: {"a": s.a, "b": s.b} for gid, s in specs.items()},
        "feasibility": verdict.to_json_dict(),
        "pre": {
            "g1_cost": verdict.g1_cost,
            "g2_cost": verdict.g2_cost,
            "g1_gap": _gap_report(g1, binning, bins)["gap"],
            "g2_gap": _gap_report(g2, binning, bins)["gap"],
        },
    }

    if not verdict.feasible:
        report["status"] = "infeasible"
        _emit(report)
        return EXIT_INFEASIBLE

    try:
        alpha = compute_alpha(verdict.g1_cost, verdict.g2_cost, verdict.trivial2_cost)
    except AlreadyTrivialError:
        report["status"] = "already_trivial"
        report["alpha"] = None
        if args.output:
            _write_rows(args.output, _score_rows(groups, {}), CSV_HEADER)
        _emit(report)
        return EXIT_OK

    plan = InterpolationPlan(alpha, g2.base_rate, mode, args.seed)
    post_point = mixture_rate_point(g2, plan)
    report["status"] = "ok"
    report["alpha"] = alpha
    report["plan"] = plan.to_json_dict()
    report["post"] = {
        "g1_cost": verdict.g1_cost,
        "g2_cost": mixture_cost(g2, plan, specs[g2.group_id]),
        "g2_gap": mixture_calibration_gap(g2, plan),
        "g2_rates": _rates_dict(post_point),
    }

    if mode == MODE_MONTE_CARLO:
        mixture = realize_mixture(g2, plan)
        realized = mixture.realized
        report["realized"] = {
            "g2_cost": cost(rate_point(realized), specs[g2.group_id]),
            "g2_gap": _gap_report(realized, binning, bins)["gap"],
            "withheld_fraction": float(mixture.withheld.mean()),
        }
        if args.output:
            withheld = {g2.group_id: mixture.withheld}
            rows = []
            for g in groups:
                scores = realized.scores if g.group_id == g2.group_id else g.scores
                mask = withheld.get(g.group_id, np.zeros(len(g), dtype=bool))
                for s, y, w in zip(scores, g.labels, mask):
                    rows.append([g.group_id, repr(float(s)), int(y), int(w)])
            _write_rows(args.output, rows, CSV_HEADER + ("withheld",))
    elif args.output:
        # Deterministic mode ships the analytic plan; scores pass through.
        _write_rows(args.output, _score_rows(groups, {}), CSV_HEADER)

    _emit(report)
    return EXIT_OK


def cmd_postprocess_eo(args) -> int:
    groups = load_csv(args.input)
    g1, g2 = _two_groups(groups, args.group1)
    solution = eo_mod.solve_eo(g1, g2)
    if solution.status != eo_mod.STATUS_OPTIMAL:
        _emit(solution.to_json_dict())
        return EXIT_INFEASIBLE
    plan = solution.plan
    report = solution.to_json_dict()
    report["pre_gaps"] = {g.group_id: calibration_gap(g).gap for g in (g1, g2)}
    report["calibration_damage"] = {
        g.group_id: eo_mod.eo_calibration_damage(g, plan) for g in (g1, g2)
    }
    if args.output:
        flipped = {
            g.group_id: eo_mod.flipped_scores(
                g, plan.for_group(g.group_id).q_n2p, plan.for_group(g.group_id).q_p2n
            )
            for g in groups
        }
        _write_rows(args.output, _score_rows(groups, flipped), CSV_HEADER)
    _emit(report)
    return EXIT_OK


def cmd_diagnose(args) -> int:
    groups = load_csv(args.input)
    g1, g2 = _two_groups(groups, args.group1)
    a1, b1, a2, b2 = _parse_floats(args.cost, 4, "--cost")
    pair = CostPair(CostSpec(a1, b1), CostSpec(a2, b2))
    a1p, b1p, a2p, b2p = _parse_floats(args.cost2, 4, "--cost2")
    pair_prime = CostPair(CostSpec(a1p, b1p), CostSpec(a2p, b2p))
    matrix = build_matrix(g1.base_rate, g2.base_rate, pair, pair_prime)
    if not matrix.distinct:
        return _fail("the two cost constraints are not distinct")
    exact = exact_impossibility_check(g1, g2, pair, pair_prime, args.tol)
    bound = approximate_bound(matrix, args.delta_cal, args.delta_cost, args.matrix_max, args.denominator)
    p1, p2 = rate_point(g1), rate_point(g2)
    rates = [p1.c_fp, p1.c_fn, p2.c_fp, p2.c_fn]
    _emit(
        {
            "mu": {g1.group_id: g1.base_rate, g2.group_id: g2.base_rate},
            "matrix": [list(row) for row in matrix.rows],
            "distinct": matrix.distinct,
            "rates": {g1.group_id: _rates_dict(p1), g2.group_id: _rates_dict(p2)},
            "exact": exact.to_json_dict(),
            "bound": bound.to_json_dict(),
            "rate_bound_respected": bool(max(rates) <= bound.rate_bound),
        }
    )
    return EXIT_OK


def cmd_plot_data(args) -> int:
    groups = load_csv(args.input)
    g1, g2 = _two_groups(groups, args.group1)
    specs = _resolve_specs(args, g1, g2)
    scene = build_scene([g1, g2], specs)
    payload = _rounded(scene.to_json_dict())
    text = json.dumps(payload, indent=2) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_synth(args) -> int:
    text = args.spec
    if text.startswith("@"):
        text = Path(text[1:]).read_text(encoding="utf-8")
    doc = json.loads(text)
    entries = doc["groups"]
    if not entries:
        raise ValueError("synth spec needs at least one group entry")
    derived = np.random.SeedSequence(args.seed).generate_state(len(entries), dtype=np.uint64)
    groups = []
    seeds = []
    for i, entry in enumerate(entries):
        seed = int(entry.get("seed", derived[i]))
        spec = SynthSpec(
            n=int(entry["n"]),
            family=entry["family"],
            params=tuple(float(v) for v in entry["params"]),
            miscalibration_shift=float(entry.get("shift", 0.0)),
            seed=seed,
            group_id=entry["id"],
        )
        generator = synth_calibrated if spec.miscalibration_shift == 0.0 else synth_miscalibrated
        groups.append(generator(spec))
        seeds.append(seed)
    write_csv(groups, args.output)
    _emit(
        {
            "written": str(args.output),
            "groups": [
                {"id": g.group_id, "n": len(g), "seed": seed, "base_rate": g.base_rate}
                for g, seed in zip(groups, seeds)
            ],
        }
    )
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="calparity", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_common(p, with_cost=False, with_mode=False):
        p.add_argument("--input", required=True, help="input CSV (group,score,label)")
        p.add_argument("--output", help="output file path")
        p.add_argument("--group1", help="group id to treat as G1")
        p.add_argument("--binning", default="exact", help="exact or fixed:B")
        if with_cost:
            p.add_argument("--cost", help="a1,b1,a2,b2 cost weights per group")
            p.add_argument("--weighted-cost", help="rfp,rfn per-sample weights")
        if with_mode:
            p.add_argument("--mode", choices=["deterministic", "mc"], default="deterministic")
            p.add_argument("--seed", type=int, help="seed for Monte Carlo mode")

    p = sub.add_parser("stats", help="per-group rates, calibration, linearity")
    add_common(p)
    p.set_defaults(handler=cmd_stats)

    p = sub.add_parser("postprocess-calibrated", help="equal-cost post-processing")
    add_common(p, with_cost=True, with_mode=True)
    p.set_defaults(handler=cmd_postprocess_calibrated)

    p = sub.add_parser("postprocess-eo", help="equalized-odds flip baseline")
    add_common(p)
    p.set_defaults(handler=cmd_postprocess_eo)

    p = sub.add_parser("diagnose", help="multi-constraint impossibility diagnostics")
    add_common(p)
    p.add_argument("--cost", required=True, help="a1,b1,a2,b2 first cost constraint")
    p.add_argument("--cost2", required=True, help="a1,b1,a2,b2 second cost constraint")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--delta-cal", type=float, required=True)
    p.add_argument("--delta-cost", type=float, required=True)
    p.add_argument("--matrix-max", type=float, required=True, help="asserted max entry magnitude M")
    p.add_argument("--denominator", type=int, required=True, help="asserted common denominator D")
    p.set_defaults(handler=cmd_diagnose)

    p = sub.add_parser("plot-data", help="FP/FN plane scene as JSON")
    add_common(p, with_cost=True)
    p.set_defaults(handler=cmd_plot_data)

    p = sub.add_parser("synth", help="write a synthetic CSV from a JSON spec")
    p.add_argument("--spec", required=True, help="JSON spec or @file")
    p.add_argument("--seed", type=int, default=0, help="base seed for derived group seeds")
    p.add_argument("--output", required=True)
    p.set_defaults(handler=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except CsvFormatError as exc:
        return _fail(str(exc))
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
