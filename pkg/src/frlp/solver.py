"""Branch-and-cut over the aggregated covering formulation with lazy
separation: the relaxation starts without covering rows, integral candidates
are checked by the feasibility module, and violated (demand, node-set) cuts
are pooled globally and shared across the tree.
"""

from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple

from .feasibility import is_served
from .lp import (GE, LE, INFEASIBLE, OPTIMAL, UNBOUNDED, LinearProgram,
                 NumericalError, solve_lp)
from .network import Instance

MAX_COVER = "max_cover"
MIN_STATIONS = "min_stations"

INT_TOL = 1e-6


class UnservableError(ValueError):
    """Raised when full coverage is demanded but some demands cannot be
    served even with a station on every allowed node."""

    def __init__(self, instance, demand_indices):
        self.demand_indices = tuple(demand_indices)
        names = ", ".join(
            f"{instance.network.name(instance.demands[i].origin)}->"
            f"{instance.network.name(instance.demands[i].destination)}"
            for i in demand_indices)
        super().__init__(f"unservable demands: {names}")


@dataclass(frozen=True)
class SolveRequest:
    instance: Instance
    variant: str
    objective: str = MAX_COVER
    budget: Optional[int] = None
    coverage: float = 1.0
    time_limit: Optional[float] = None
    node_limit: Optional[int] = None
    seed: int = 0


@dataclass
class SolveStats:
    total_time: float = 0.0
    separation_time: float = 0.0
    bb_nodes: int = 0
    cuts: int = 0


@dataclass
class Solution:
    stations: FrozenSet[int]
    served: Tuple[bool, ...]
    objective: float
    bound: float
    optimal: bool
    stats: SolveStats


def separate(instance: Instance, variant: str, x, y) -> List[Tuple[int, FrozenSet[int]]]:
    """One-pass lazy separation on an integral candidate.

    For each demand claimed served (y_q = 1): let S' be the closed nodes; if
    the demand is actually served the claim stands, otherwise shrink S' by a
    single ascending-id pass (drop a node iff the demand stays unserved when
    that node is also opened) and emit the violated covering cut (q, S').
    """
    n = instance.num_nodes
    cuts = []
    for qi, demand in enumerate(instance.demands):
        if y[qi] < 0.5:
            continue
        closed = [j for j in range(n) if x[j] < 0.5]
        open_set = frozenset(j for j in range(n) if x[j] >= 0.5)
        if is_served(instance, demand, open_set, variant):
            continue
        kept = set(closed)
        for j in sorted(closed):
            if not is_served(instance, demand, frozenset(range(n)) - (kept - {j}),
                             variant):
                kept.discard(j)
        cuts.append((qi, frozenset(kept)))
    return cuts


def _root_lp(request: SolveRequest, n: int, nq: int):
    """Relaxation without covering rows: objective, budget/coverage rows and
    placement fixings only."""
    instance = request.instance
    if request.objective == MAX_COVER:
        lp = LinearProgram("max", [0.0] * n + [q.volume for q in instance.demands],
                           bounds=[(0.0, 1.0)] * (n + nq))
        budget = request.budget
        if budget is None:
            budget = instance.placement.budget
        if budget is not None:
            lp.add_row([(j, 1.0) for j in range(n)], LE, float(budget))
    else:
        full = request.coverage >= 1.0
        lp = LinearProgram("min", [1.0] * n + [0.0] * nq,
                           bounds=[(0.0, 1.0)] * n +
                                  [(1.0, 1.0) if full else (0.0, 1.0)] * nq)
        if not full:
            total = sum(q.volume for q in instance.demands)
            lp.add_row([(n + qi, q.volume)
                        for qi, q in enumerate(instance.demands)],
                       GE, request.coverage * total)
    for j in instance.placement.forced_open:
        lp.bounds[j] = (1.0, 1.0)
    for j in instance.placement.forced_closed:
        lp.bounds[j] = (0.0, 0.0)
    return lp


def _check_servable(request: SolveRequest):
    """Full-coverage requests fail fast when a demand is unservable even with
    every allowed node opened."""
    instance = request.instance
    all_open = frozenset(range(instance.num_nodes)) - instance.placement.forced_closed
    bad = [qi for qi, q in enumerate(instance.demands)
           if not is_served(instance, q, all_open, request.variant)]
    if bad:
        raise UnservableError(instance, bad)


def solve(request: SolveRequest) -> Solution:
    """LP-based best-bound branch-and-bound with lazy covering cuts.

    Deterministic: branching on the most fractional station variable (ties to
    the lowest index), FIFO tie-breaking in the node queue, cuts appended in
    separation order.
    """
    instance = request.instance
    n = instance.num_nodes
    nq = len(instance.demands)
    maximize = request.objective == MAX_COVER
    if request.objective not in (MAX_COVER, MIN_STATIONS):
        raise ValueError(f"unknown objective {request.objective!r}")
    if request.objective == MIN_STATIONS and request.coverage >= 1.0:
        _check_servable(request)

    stats = SolveStats()
    start = time.perf_counter()
    base_lp = _root_lp(request, n, nq)
    cut_pool: List[Tuple[int, FrozenSet[int]]] = []
    cut_keys = set()

    incumbent: Optional[Solution] = None
    incumbent_value = -math.inf if maximize else math.inf

    def better(value):
        return value > incumbent_value + 1e-9 if maximize else \
            value < incumbent_value - 1e-9

    def lp_with_cuts(fixings):
        lp = LinearProgram(base_lp.sense, list(base_lp.objective),
                           rows=list(base_lp.rows),
                           bounds=list(base_lp.bounds))
        for qi, cut in cut_pool:
            if cut:
                lp.add_row([(j, 1.0) for j in sorted(cut)] + [(n + qi, -1.0)],
                           GE, 0.0)
            else:
                lp.add_row([(n + qi, 1.0)], LE, 0.0)  # demand is unservable here
        for j, val in fixings.items():
            lp.bounds[j] = (float(val), float(val))
        return lp

    # Node queue ordered by bound (best-bound first), then FIFO.
    counter = itertools.count()
    root_bound = math.inf if maximize else -math.inf
    heap = [(-root_bound if maximize else root_bound, next(counter), {})]
    exhausted = True

    while heap:
        if request.time_limit is not None and \
                time.perf_counter() - start > request.time_limit:
            exhausted = False
            break
        if request.node_limit is not None and stats.bb_nodes >= request.node_limit:
            exhausted = False
            break
        key, _, fixings = heapq.heappop(heap)
        parent_bound = -key if maximize else key
        if incumbent is not None and not better(parent_bound):
            continue
        stats.bb_nodes += 1

        while True:  # re-solve the node after each round of new cuts
            solution = solve_lp(lp_with_cuts(fixings))
            if solution.status == INFEASIBLE:
                solution = None
                break
            if solution.status != OPTIMAL:
                raise NumericalError(f"node relaxation is {solution.status}")
            if incumbent is not None and not better(solution.value):
                solution = None
                break
            x = solution.primal[:n]
            if any(min(v, 1.0 - v) > INT_TOL for v in x):
                break  # fractional: branch
            # Integral station vector: claim the strongest y consistent with
            # the pool, then separate lazily.
            x_int = [1 if v > 0.5 else 0 for v in x]
            y_claim = [1] * nq
            for qi, cut in cut_pool:
                if not cut or all(x_int[j] == 0 for j in cut):
                    y_claim[qi] = 0
            sep_start = time.perf_counter()
            cuts = separate(instance, request.variant, x_int, y_claim)
            stats.separation_time += time.perf_counter() - sep_start
            new = [(qi, cut) for qi, cut in cuts if (qi, cut) not in cut_keys]
            if not new:
                break  # candidate is genuinely feasible
            for item in new:
                cut_keys.add(item)
                cut_pool.append(item)
            stats.cuts += len(new)

        if solution is None:
            continue
        x = solution.primal[:n]
        fractional = [(min(v, 1.0 - v), j) for j, v in enumerate(x)
                      if min(v, 1.0 - v) > INT_TOL]
        if fractional:
            # Most fractional first; ties to the lowest index.
            _, j = max(fractional, key=lambda t: (t[0], -t[1]))
            for val in (0, 1):
                child = dict(fixings)
                child[j] = val
                heapq.heappush(heap, (-solution.value if maximize
                                      else solution.value,
                                      next(counter), child))
            continue

        # Integral and separation-clean: record the incumbent.
        stations = frozenset(j for j, v in enumerate(x) if v > 0.5)
        served = tuple(is_served(instance, q, stations, request.variant)
                       for q in instance.demands)
        if maximize:
            value = sum(q.volume for q, s in zip(instance.demands, served) if s)
        else:
            value = float(len(stations))
        if incumbent is None or better(value):
            incumbent_value = value
            incumbent = Solution(stations, served, value, value, False, stats)

    if incumbent is None:
        if not exhausted:
            raise NumericalError("limits reached before any feasible solution")
        # Max-cover always has the empty placement; min-stations full coverage
        # was pre-checked, so this means partial coverage is unattainable.
        if maximize:
            served = tuple(False for _ in instance.demands)
            incumbent = Solution(frozenset(), served, 0.0, 0.0, True, stats)
        else:
            raise UnservableError(instance, range(nq))

    remaining = [-k if maximize else k for k, _, _ in heap] if not exhausted else []
    if remaining:
        bound = max(remaining) if maximize else min(remaining)
        bound = max(bound, incumbent_value) if maximize else min(bound, incumbent_value)
    else:
        bound = incumbent_value
    incumbent.bound = bound
    incumbent.optimal = exhausted
    stats.total_time = time.perf_counter() - start
    return incumbent


def reevaluate(instance: Instance, stations, variant: str) -> float:
    """Served volume of a fixed placement under the given routing variant."""
    stations = frozenset(stations)
    return sum(q.volume for q in instance.demands
               if is_served(instance, q, stations, variant))
