"""Command-line entry point.

Subcommands: solve, bounds, enumerate, cutsets, check, generate, validate,
sweep, oracle. Exit codes: 0 success, 1 usage/validation error, 2 solve
failure. Set FRLP_LOG=debug|info|warning for logging verbosity.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import sys
from dataclasses import replace

from . import generators
from .covering import minimalize
from .feasibility import CycleQuery, search_cycle, is_served
from .lp import (AGG, DISAGG, MIN_STATIONS as LP_MIN_STATIONS, NumericalError,
                 TIGHT_NODE_CAP, build_model, lp_bound, prepare_families,
                 prepare_route_data)
from .network import (CYCLIC, ORIGINAL, Demand, Instance, ParseError,
                      ValidationError, parse_instance, serialize_instance,
                      shortest_distance, validate_instance)
from .oracle import OracleSizeError, brute_force_solve
from .routes import enumerate_routes, route_budget
from .solver import (MAX_COVER, MIN_STATIONS, SolveRequest, UnservableError,
                     reevaluate, solve)

log = logging.getLogger("frlp")

USAGE_ERROR = 1
SOLVE_ERROR = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(USAGE_ERROR)


def _setup_logging():
    level = os.environ.get("FRLP_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _load(path: str) -> Instance:
    try:
        with open(path) as handle:
            instance = parse_instance(handle.read())
    except OSError as exc:
        raise SystemExit(_usage(f"cannot read {path}: {exc}"))
    except (ParseError, ValidationError) as exc:
        raise SystemExit(_usage(f"{path}: {exc}"))
    for line in instance.pruning_report:
        log.info("pruning: %s", line)
    return instance


def _usage(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return USAGE_ERROR


def _override_alpha(instance: Instance, alpha) -> Instance:
    if alpha is None:
        return instance
    demands = tuple(
        replace(q, alpha=float(alpha)) if q.alpha is not None else q
        for q in instance.demands)
    return replace(instance, demands=demands)


def _add_instance_arg(p):
    p.add_argument("instance", help="instance file (JSON)")


def _names(instance, nodes):
    return "{" + ", ".join(sorted(instance.network.name(j) for j in nodes)) + "}"


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_validate(args) -> int:
    try:
        with open(args.instance) as handle:
            text = handle.read()
    except OSError as exc:
        return _usage(str(exc))
    try:
        instance = parse_instance(text)
    except (ParseError, ValidationError) as exc:
        violations = getattr(exc, "violations", [str(exc)])
        for v in violations:
            print(v)
        return USAGE_ERROR
    for line in instance.pruning_report:
        print(f"pruned: {line}")
    print(f"ok: {instance.num_nodes} nodes, {len(instance.network.edges)} edges, "
          f"{len(instance.demands)} demands")
    return 0


def cmd_enumerate(args) -> int:
    instance = _override_alpha(_load(args.instance), args.alpha_override)
    variant = args.variant or instance.variant_default
    for qi, demand in enumerate(instance.demands):
        o = instance.network.name(demand.origin)
        t = instance.network.name(demand.destination)
        print(f"demand {qi}: {o} -> {t}")
        base = shortest_distance(instance.network, demand.origin,
                                 demand.destination)
        if variant == CYCLIC:
            base += shortest_distance(instance.network, demand.destination,
                                      demand.origin)
        for route in enumerate_routes(instance, demand, variant):
            visits = ",".join(instance.network.name(v) for v in route.visits)
            deviation = 100.0 * (route.length / base - 1.0) if base else 0.0
            print(f"  ({visits})  length={route.length:g}  "
                  f"deviation={deviation:.1f}%")
    return 0


def cmd_cutsets(args) -> int:
    instance = _override_alpha(_load(args.instance), args.alpha_override)
    variant = args.variant or instance.variant_default
    for qi, data in enumerate(prepare_route_data(instance, variant)):
        o = instance.network.name(data.demand.origin)
        t = instance.network.name(data.demand.destination)
        print(f"demand {qi}: {o} -> {t}")
        for route, family in zip(data.routes, data.families):
            visits = ",".join(instance.network.name(v) for v in route.visits)
            sets = " ".join(_names(instance, s) for s in family.sorted_sets())
            print(f"  route ({visits}): {sets}")
        agg = data.aggregated
        sets = " ".join(_names(instance, s) for s in agg.sorted_sets())
        print(f"  aggregated (minimal): {sets}")
    return 0


def cmd_check(args) -> int:
    instance = _override_alpha(_load(args.instance), args.alpha_override)
    variant = args.variant or instance.variant_default
    if not 0 <= args.demand < len(instance.demands):
        return _usage(f"demand index {args.demand} out of range")
    demand = instance.demands[args.demand]
    try:
        stations = frozenset(instance.network.index(s.strip())
                             for s in args.stations.split(",") if s.strip())
    except ValueError:
        return _usage("unknown station name")
    verdict = is_served(instance, demand, stations, variant)
    print(f"served: {verdict}")
    if variant == CYCLIC and demand.routes is None:
        query = CycleQuery(instance, demand, stations,
                           route_budget(instance, demand, CYCLIC),
                           dominance=not args.trace)
        result = search_cycle(query)
        if args.trace:
            for i, label in enumerate(result.selected, 1):
                print(f"  step {i}: node {instance.network.name(label.node)} "
                      f"label {label.tuple5()}")
            if result.sink_label is not None:
                print(f"  sink: {result.sink_label.tuple5()}")
        if result.witness is not None:
            visits = ",".join(instance.network.name(v)
                              for v in result.witness.visits)
            print(f"witness: ({visits})  length={result.witness.length:g}")
    return 0


def cmd_generate(args) -> int:
    name = args.name
    if name in ("fig2", "fig7", "fig8"):
        instance = generators.gen_example(name, args.d)
    elif name == "prop5a":
        instance = generators.gen_prop5a(args.n, d=args.d or 1.0)
    elif name == "prop5b":
        instance, _ = generators.gen_prop5b(args.n, delta=args.delta,
                                            d=args.d or 1.0)
    elif name == "random":
        instance = generators.gen_random(args.seed, args.nodes,
                                         density=args.density,
                                         num_demands=args.demands,
                                         d=args.d or 12.0)
    else:
        return _usage(f"unknown generator {name!r}")
    text = serialize_instance(instance)
    if args.out:
        with open(args.out, "w") as handle:
            handle.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_bounds(args) -> int:
    instance = _override_alpha(_load(args.instance), args.alpha_override)
    variant = args.variant or instance.variant_default
    route_data = prepare_route_data(instance, variant)
    families = [d.aggregated for d in route_data]
    budget = args.budget if args.budget is not None else instance.placement.budget
    disagg = lp_bound(build_model(instance, DISAGG, route_data=route_data,
                                  budget=budget))
    agg = lp_bound(build_model(instance, AGG, families=families, budget=budget))
    print(f"disagg-LP bound: {disagg:g}")
    print(f"agg-LP bound:    {agg:g}")
    if agg > 0:
        print(f"disagg/agg ratio: {disagg / agg:g}")
    if instance.num_nodes <= TIGHT_NODE_CAP:
        # The tightest concave bound over an integral placement polytope is
        # attained at an integer vertex, i.e. at the exact optimum.
        tight = brute_force_solve(instance, variant, "max_cover",
                                  budget=budget).objective
        print(f"tight bound:     {tight:g}")
        if tight > 0:
            print(f"agg/tight ratio:  {agg / tight:g}")
    return 0


def _run_solve(instance, variant, args):
    objective = MAX_COVER if args.objective == "maxcover" else MIN_STATIONS
    request = SolveRequest(instance, variant, objective, budget=args.budget,
                           coverage=args.coverage, time_limit=args.time_limit,
                           seed=args.seed)
    return solve(request)


def cmd_solve(args) -> int:
    instance = _override_alpha(_load(args.instance), args.alpha_override)
    variant = args.variant or instance.variant_default
    try:
        solution = _run_solve(instance, variant, args)
    except (UnservableError, NumericalError) as exc:
        print(f"solve failed: {exc}", file=sys.stderr)
        return SOLVE_ERROR
    print(f"objective: {solution.objective:g}  "
          f"bound: {solution.bound:g}  optimal: {solution.optimal}")
    print(f"stations: {_names(instance, solution.stations)}")
    served = sum(1 for s in solution.served if s)
    print(f"served demands: {served}/{len(instance.demands)}")
    stats = solution.stats
    print(f"time: {stats.total_time:.3f}s  separation: "
          f"{stats.separation_time:.3f}s  nodes: {stats.bb_nodes}  "
          f"cuts: {stats.cuts}")
    if args.stats_out:
        _write_stats_csv(args.stats_out, [
            (os.path.basename(args.instance), variant,
             args.alpha_override if args.alpha_override is not None else "",
             stats.total_time, stats.separation_time, stats.bb_nodes,
             stats.cuts)])
    return 0


def cmd_oracle(args) -> int:
    instance = _override_alpha(_load(args.instance), args.alpha_override)
    variant = args.variant or instance.variant_default
    objective = "max_cover" if args.objective == "maxcover" else "min_stations"
    try:
        result = brute_force_solve(instance, variant, objective,
                                   budget=args.budget, coverage=args.coverage)
    except OracleSizeError as exc:
        print(f"oracle failed: {exc}", file=sys.stderr)
        return SOLVE_ERROR
    print(f"objective: {result.objective:g}")
    for stations in result.optimal_sets[:8]:
        print(f"optimal: {_names(instance, stations)}")
    return 0


def _write_stats_csv(path, rows):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["instance", "routing", "alpha", "time_s",
                         "separation_time_s", "bb_nodes", "cuts"])
        for row in rows:
            writer.writerow(row)


def cmd_sweep(args) -> int:
    instance = _load(args.instance)
    alphas = [float(a) for a in args.alphas.split(",")]
    label = os.path.basename(args.instance)
    rows = []
    print(f"{'alpha':>6} {'routing':>9} {'objective':>10} "
          f"{'served(cyclic)':>14} {'time_s':>8}")
    for alpha in alphas:
        inst_a = _override_alpha(instance, alpha)
        for variant in (ORIGINAL, CYCLIC):
            try:
                solution = _run_solve(inst_a, variant, args)
            except (UnservableError, NumericalError) as exc:
                print(f"solve failed ({variant}, alpha={alpha}): {exc}",
                      file=sys.stderr)
                return SOLVE_ERROR
            served_cyclic = reevaluate(inst_a, solution.stations, CYCLIC)
            stats = solution.stats
            print(f"{alpha:>6g} {variant:>9} {solution.objective:>10g} "
                  f"{served_cyclic:>14g} {stats.total_time:>8.3f}")
            rows.append((label, variant, alpha, stats.total_time,
                         stats.separation_time, stats.bb_nodes, stats.cuts))
    if args.csv_out:
        _write_stats_csv(args.csv_out, rows)
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="frlp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, instance=True):
        if instance:
            _add_instance_arg(p)
        p.add_argument("--variant", choices=[ORIGINAL, CYCLIC])
        p.add_argument("--alpha-override", type=float)

    def solve_flags(p):
        p.add_argument("--objective", choices=["maxcover", "minstations"],
                       default="maxcover")
        p.add_argument("--budget", type=int)
        p.add_argument("--coverage", type=float, default=1.0)
        p.add_argument("--time-limit", type=float)
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("validate", help="check an instance file")
    _add_instance_arg(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("enumerate", help="list admissible routes")
    common(p)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("cutsets", help="dump covering families")
    common(p)
    p.set_defaults(func=cmd_cutsets)

    p = sub.add_parser("check", help="servedness of a fixed station set")
    common(p)
    p.add_argument("--stations", required=True,
                   help="comma-separated node names")
    p.add_argument("--demand", type=int, default=0)
    p.add_argument("--trace", action="store_true",
                   help="print the labeling step log (disables dominance)")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("generate", help="write a constructed instance")
    p.add_argument("--name", required=True,
                   choices=["fig2", "fig7", "fig8", "prop5a", "prop5b",
                            "random"])
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--delta", type=float)
    p.add_argument("--d", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nodes", type=int, default=8)
    p.add_argument("--density", type=float, default=0.4)
    p.add_argument("--demands", type=int, default=3)
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("bounds", help="relaxation bounds and ratios")
    common(p)
    p.add_argument("--budget", type=int)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("solve", help="branch-and-cut solve")
    common(p)
    solve_flags(p)
    p.add_argument("--stats-out", help="CSV stats output path")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="brute-force reference solve")
    common(p)
    solve_flags(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("sweep", help="alpha sweep over both variants")
    _add_instance_arg(p)
    p.add_argument("--alphas", default="1.0,1.2,1.5")
    solve_flags(p)
    p.add_argument("--csv-out", help="CSV stats output path")
    p.set_defaults(func=cmd_sweep)
    return parser


def run(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code or 0
    try:
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_ERROR
    except (UnservableError, NumericalError, OracleSizeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return SOLVE_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
