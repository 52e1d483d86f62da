"""Servedness checks for a fixed station set.

The cyclic variant uses a best-first labeling search for a repeatable cycle
through the destination; the original variant reduces to a shortest-path
search on a refueling network built over origin, destination and stations
(depart half-charged, arrive at least half-charged).
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

from .network import CYCLIC, DIST_TOL, ORIGINAL, Demand, Instance, shortest_distance
from .routes import CYCLE, PATH, Route, is_traversable, make_route, route_budget

INF = math.inf


@dataclass(frozen=True)
class Label:
    """Resource state of a partial cycle from the origin."""

    delta_charge: int
    delta_dest: int
    l_start: float
    l_charge: float
    gamma_end: float
    node: int = -1
    parent: Optional["Label"] = field(default=None, compare=False, repr=False)

    def tuple5(self):
        return (self.delta_charge, self.delta_dest, self.l_start,
                self.l_charge, self.gamma_end)


@dataclass(frozen=True)
class CycleQuery:
    instance: Instance
    demand: Demand
    stations: frozenset
    tau: float
    dominance: bool = True


@dataclass
class CycleSearch:
    """Outcome of a labeling run: witness cycle plus replayable trace."""

    witness: Optional[Route]
    sink_label: Optional[Label]
    selected: list  # labels in extraction order


def extend_label(label: Label, arc, stations, travel_range: float,
                 tau: float) -> Optional[Label]:
    """Resource extension over a non-sink arc; None when the extension is
    rejected by the length budget or the range."""
    j1, j2, length = arc
    assert label.node == j1
    new_start = label.l_start + length
    new_charge_dist = label.l_charge + length
    if new_start > tau + DIST_TOL or new_charge_dist > travel_range + DIST_TOL:
        return None
    has_station = j2 in stations
    delta_charge = 1 if (label.delta_charge or has_station) else 0
    if has_station:
        l_charge = 0.0
        gamma_end = new_start if not label.delta_charge else label.gamma_end
    else:
        l_charge = new_charge_dist
        gamma_end = label.gamma_end
    delta_dest = label.delta_dest  # destination handled by the caller
    return Label(delta_charge, delta_dest, new_start, l_charge, gamma_end,
                 node=j2, parent=label)


def _dominates(a: Label, b: Label) -> bool:
    return (a.delta_dest >= b.delta_dest
            and a.l_start <= b.l_start + DIST_TOL
            and a.l_charge <= b.l_charge + DIST_TOL
            and a.gamma_end <= b.gamma_end + DIST_TOL)


def _reconstruct(label: Label) -> Tuple[int, ...]:
    visits = []
    cur = label
    while cur is not None:
        visits.append(cur.node)
        cur = cur.parent
    visits.reverse()
    return tuple(visits)


def search_cycle(query: CycleQuery) -> CycleSearch:
    """Best-first labeling search for a traversable cycle in the deviation
    route set; records the selection sequence for trace replay."""
    instance, demand = query.instance, query.demand
    network = instance.network
    stations = query.stations
    origin, dest = demand.origin, demand.destination
    d = instance.travel_range
    tau = query.tau

    dist_to_dest = [network.distances_from(j)[dest] for j in range(network.num_nodes)]
    dist_to_origin = [network.distances_from(j)[origin]
                      for j in range(network.num_nodes)]
    dest_to_origin = dist_to_origin[dest]

    def score(label: Label) -> float:
        if label.delta_dest:
            return dist_to_origin[label.node]
        return dist_to_dest[label.node] + dest_to_origin

    if origin in stations:
        seed = Label(1, 0, 0.0, 0.0, 0.0, node=origin)
    else:
        seed = Label(0, 0, 0.0, 0.0, INF, node=origin)

    counter = itertools.count()
    heap = [(score(seed), next(counter), seed)]
    kept = [[] for _ in range(network.num_nodes)]  # dominance bookkeeping
    kept[origin].append(seed)
    selected = []

    def try_insert(label: Label):
        store = kept[label.node]
        if query.dominance:
            if any(_dominates(old, label) for old in store):
                return
            store[:] = [old for old in store if not _dominates(label, old)]
        else:
            if any(old.tuple5() == label.tuple5() for old in store):
                return  # identical duplicates kept once
        store.append(label)
        heapq.heappush(heap, (score(label), next(counter), label))

    while heap:
        _, _, label = heapq.heappop(heap)
        if query.dominance and label not in kept[label.node]:
            continue  # superseded while queued
        selected.append(label)
        if label.node == origin and label.delta_dest:
            # Zero-length arc to the sink, allowed only from the origin.
            if label.l_charge + label.gamma_end <= d + DIST_TOL:
                visits = _reconstruct(label)
                witness = make_route(network, visits, CYCLE)
                return CycleSearch(witness, label, selected)
        for j2, length in network.adjacency[label.node]:
            ext = extend_label(label, (label.node, j2, length), stations, d, tau)
            if ext is None:
                continue
            if j2 == dest and not ext.delta_dest:
                ext = Label(ext.delta_charge, 1, ext.l_start, ext.l_charge,
                            ext.gamma_end, node=j2, parent=label)
            try_insert(ext)
    return CycleSearch(None, None, selected)


def find_traversable_cycle(query: CycleQuery) -> Optional[Route]:
    """Witness cycle in the deviation route set traversable under the
    query's stations, or None."""
    return search_cycle(query).witness


def find_traversable_path(instance: Instance, demand: Demand, stations,
                          tau_path: float) -> Optional[Route]:
    """Original-variant check via the refueling network: a round trip over a
    path is repeatable iff one can depart the origin half-charged and arrive
    at the destination at least half-charged, recharging at stations."""
    network = instance.network
    stations = frozenset(stations)
    origin, dest = demand.origin, demand.destination
    d = instance.travel_range

    hubs = sorted(stations | {origin, dest})
    dist = {a: network.distances_from(a) for a in hubs}

    def cap(a: int, b: int) -> Optional[float]:
        a_station = a in stations
        b_station = b in stations
        if a == origin and not a_station and b == dest and not b_station:
            return None  # a walk with no station never serves the demand
        half_out = (a == origin and not a_station)
        half_in = (b == dest and not b_station)
        return d / 2.0 if (half_out or half_in) else d

    # Dijkstra over the refueling network from the origin.
    best = {origin: 0.0}
    parent = {origin: None}
    heap = [(0.0, origin)]
    targets = set(hubs)
    while heap:
        cost, a = heapq.heappop(heap)
        if cost > best.get(a, INF) + DIST_TOL:
            continue
        if a == dest:
            break
        for b in targets:
            if b == a:
                continue
            limit = cap(a, b)
            if limit is None:
                continue
            hop = dist[a][b]
            if hop > limit + DIST_TOL:
                continue
            ncost = cost + hop
            if ncost < best.get(b, INF) - DIST_TOL:
                best[b] = ncost
                parent[b] = a
                heapq.heappush(heap, (ncost, b))
    if best.get(dest, INF) > tau_path + DIST_TOL:
        return None
    hops = [dest]
    while hops[-1] != origin:
        hops.append(parent[hops[-1]])
    hops.reverse()
    visits = [origin]
    for a, b in zip(hops, hops[1:]):
        segment = network.shortest_path(a, b)
        visits.extend(segment[1:])
    return make_route(network, visits, PATH)


def is_served(instance: Instance, demand: Demand, stations,
              variant: str) -> bool:
    """True iff the demand is served by the station set under the variant."""
    stations = frozenset(stations)
    if demand.routes is not None:
        return any(is_traversable(make_route(instance.network, r), stations,
                                  instance.travel_range)
                   for r in demand.routes)
    if variant == ORIGINAL:
        tau = route_budget(instance, demand, ORIGINAL)
        return find_traversable_path(instance, demand, stations, tau) is not None
    tau = route_budget(instance, demand, CYCLIC)
    query = CycleQuery(instance, demand, stations, tau)
    return find_traversable_cycle(query) is not None
