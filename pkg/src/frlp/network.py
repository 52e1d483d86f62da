"""Graph and instance model, instance file I/O, validation and shortest paths.

Node ids are dense 0-based integers internally; the JSON file format uses
string names which are mapped to ids at parse time. Instances are immutable
after construction and safe to share across workers.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Tuple

DIST_TOL = 1e-9

ORIGINAL = "original"
CYCLIC = "cyclic"
VARIANTS = (ORIGINAL, CYCLIC)


class ParseError(ValueError):
    """Raised when an instance document is malformed."""


class ValidationError(ValueError):
    """Raised when an instance violates an invariant that pruning cannot repair."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class UnknownNodeError(KeyError):
    """Raised on lookups of node ids that do not exist."""


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    length: float
    directed: bool = False


@dataclass(frozen=True)
class Network:
    """Undirected/mixed graph with positive edge lengths.

    An undirected edge is stored once and traversable both ways.
    """

    node_names: Tuple[str, ...]
    edges: Tuple[Edge, ...]

    @property
    def num_nodes(self) -> int:
        return len(self.node_names)

    def index(self, name: str) -> int:
        return self.node_names.index(name)

    def name(self, node: int) -> str:
        return self.node_names[node]

    @cached_property
    def adjacency(self):
        """adjacency[u] -> tuple of (v, length) respecting edge directions."""
        adj = [[] for _ in range(self.num_nodes)]
        for e in self.edges:
            adj[e.u].append((e.v, e.length))
            if not e.directed:
                adj[e.v].append((e.u, e.length))
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def undirected_adjacency(self):
        adj = [[] for _ in range(self.num_nodes)]
        for e in self.edges:
            adj[e.u].append((e.v, e.length))
            adj[e.v].append((e.u, e.length))
        return tuple(tuple(sorted(a)) for a in adj)

    def arc_length(self, u: int, v: int) -> Optional[float]:
        """Length of the shortest direct arc u -> v, or None if absent."""
        best = None
        for w, length in self.adjacency[u]:
            if w == v and (best is None or length < best):
                best = length
        return best

    @cached_property
    def _dist_cache(self):
        return {}

    def _check_node(self, node: int):
        if not 0 <= node < self.num_nodes:
            raise UnknownNodeError(f"unknown node id {node}")

    def distances_from(self, source: int, respect_direction: bool = True):
        """All shortest distances from `source` (Dijkstra), cached per source."""
        self._check_node(source)
        key = (source, respect_direction)
        cached = self._dist_cache.get(key)
        if cached is not None:
            return cached
        adj = self.adjacency if respect_direction else self.undirected_adjacency
        dist = [math.inf] * self.num_nodes
        dist[source] = 0.0
        heap = [(0.0, source)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u] + DIST_TOL:
                continue
            for v, length in adj[u]:
                nd = d + length
                if nd < dist[v] - DIST_TOL:
                    dist[v] = nd
                    heapq.heappush(heap, (nd, v))
        result = tuple(dist)
        self._dist_cache[key] = result
        return result

    def shortest_path(self, source: int, target: int, respect_direction: bool = True):
        """A shortest node sequence source -> target, or None if unreachable."""
        self._check_node(source)
        self._check_node(target)
        adj = self.adjacency if respect_direction else self.undirected_adjacency
        dist = {source: 0.0}
        parent = {source: None}
        heap = [(0.0, source)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist.get(u, math.inf) + DIST_TOL:
                continue
            if u == target:
                break
            for v, length in adj[u]:
                nd = d + length
                if nd < dist.get(v, math.inf) - DIST_TOL:
                    dist[v] = nd
                    parent[v] = u
                    heapq.heappush(heap, (nd, v))
        if target not in parent and target != source:
            return None
        path = [target]
        while path[-1] != source:
            path.append(parent[path[-1]])
        path.reverse()
        return tuple(path)


def shortest_distance(network: Network, source: int, target: int,
                      respect_direction: bool = True) -> float:
    """Shortest walk length from source to target; math.inf if unreachable."""
    network._check_node(target)
    return network.distances_from(source, respect_direction)[target]


@dataclass(frozen=True)
class Demand:
    """An origin-destination flow with either a deviation factor or explicit routes."""

    origin: int
    destination: int
    volume: float
    alpha: Optional[float] = None
    routes: Optional[Tuple[Tuple[int, ...], ...]] = None

    @property
    def is_deviation(self) -> bool:
        return self.alpha is not None


@dataclass(frozen=True)
class PlacementConstraints:
    budget: Optional[int] = None
    forced_open: frozenset = frozenset()
    forced_closed: frozenset = frozenset()


@dataclass(frozen=True)
class Instance:
    network: Network
    demands: Tuple[Demand, ...]
    travel_range: float
    placement: PlacementConstraints = PlacementConstraints()
    variant_default: str = ORIGINAL
    pruning_report: Tuple[str, ...] = field(default=(), compare=False)

    @property
    def num_nodes(self) -> int:
        return self.network.num_nodes


def _route_walks_network(network: Network, route: Iterable[int]) -> bool:
    route = tuple(route)
    if any(not 0 <= n < network.num_nodes for n in route):
        return False
    return all(network.arc_length(u, v) is not None for u, v in zip(route, route[1:]))


def _explicit_route_violations(network: Network, demand: Demand, route, variant: str):
    problems = []
    if variant == ORIGINAL:
        if route[0] != demand.origin or route[-1] != demand.destination:
            problems.append("must start at the origin and end at the destination")
    else:
        if route[0] != demand.origin or route[-1] != demand.origin:
            problems.append("must start and end at the origin")
        elif demand.destination not in route:
            problems.append("must visit the destination")
    if not _route_walks_network(network, route):
        problems.append("has consecutive nodes not joined by a traversable edge")
    return problems


def _demand_has_routes(network: Network, demand: Demand, travel_range: float,
                       variant: str) -> bool:
    if demand.routes is not None:
        return len(demand.routes) > 0
    out = shortest_distance(network, demand.origin, demand.destination)
    if not math.isfinite(out):
        return False
    if variant == CYCLIC:
        back = shortest_distance(network, demand.destination, demand.origin)
        return math.isfinite(back)
    return True


def validate_instance(instance: Instance):
    """Return every invariant violation as a human-readable string."""
    violations = []
    net = instance.network
    n = net.num_nodes
    if instance.travel_range <= 0:
        violations.append("travel range must be positive")
    for i, e in enumerate(net.edges):
        where = f"edge #{i} ({net.name(e.u)}-{net.name(e.v)})" if (
            0 <= e.u < n and 0 <= e.v < n) else f"edge #{i}"
        if not (0 <= e.u < n and 0 <= e.v < n):
            violations.append(f"{where}: references an unknown node")
            continue
        if e.u == e.v:
            violations.append(f"{where}: self-loop")
        if e.length <= 0:
            violations.append(f"{where}: non-positive length {e.length}")
        elif e.length > instance.travel_range + DIST_TOL:
            violations.append(f"{where}: longer than the travel range")
    if instance.variant_default == ORIGINAL:
        if any(e.directed for e in net.edges):
            violations.append("original variant requires an undirected network")
    for i, q in enumerate(instance.demands):
        tag = f"demand #{i}"
        if not (0 <= q.origin < n and 0 <= q.destination < n):
            violations.append(f"{tag}: unknown origin or destination node")
            continue
        if q.origin == q.destination:
            violations.append(f"{tag}: origin equals destination")
        if q.volume < 0:
            violations.append(f"{tag}: negative volume")
        if (q.alpha is None) == (q.routes is None):
            violations.append(f"{tag}: exactly one of alpha/routes must be given")
        elif q.alpha is not None and q.alpha < 1.0:
            violations.append(f"{tag}: alpha must be >= 1")
        elif q.routes is not None:
            for j, route in enumerate(q.routes):
                for problem in _explicit_route_violations(
                        net, q, route, instance.variant_default):
                    violations.append(f"{tag} route #{j}: {problem}")
        if q.routes is None and q.alpha is not None:
            if not _demand_has_routes(net, q, instance.travel_range,
                                      instance.variant_default):
                violations.append(f"{tag}: no admissible route exists")
    pc = instance.placement
    if pc.forced_open & pc.forced_closed:
        violations.append("forced_open and forced_closed overlap")
    if pc.budget is not None:
        if pc.budget < 0:
            violations.append("budget must be nonnegative")
        elif len(pc.forced_open) > pc.budget:
            violations.append("forced_open exceeds the budget")
    for node in pc.forced_open | pc.forced_closed:
        if not 0 <= node < n:
            violations.append(f"placement references unknown node {node}")
    return violations


def _parse_node_ref(value, name_to_id, context):
    if isinstance(value, bool):
        raise ParseError(f"{context}: invalid node reference {value!r}")
    if isinstance(value, int):
        if value not in name_to_id.values():
            raise ParseError(f"{context}: unknown node id {value}")
        return value
    key = str(value)
    if key not in name_to_id:
        raise ParseError(f"{context}: unknown node name {key!r}")
    return name_to_id[key]


def parse_instance(document: str) -> Instance:
    """Parse and validate an instance document, pruning long edges and
    demands with empty route sets (recorded in `pruning_report`)."""
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: "
                         f"{exc.msg}") from exc
    if not isinstance(data, dict):
        raise ParseError("top-level value must be an object")
    for key in ("range", "nodes", "edges", "demands"):
        if key not in data:
            raise ParseError(f"missing required key {key!r}")
    try:
        travel_range = float(data["range"])
    except (TypeError, ValueError):
        raise ParseError("'range' must be a number")
    variant = data.get("variant", ORIGINAL)
    if variant not in VARIANTS:
        raise ParseError(f"'variant' must be one of {VARIANTS}")

    names = [str(x) for x in data["nodes"]]
    if len(set(names)) != len(names):
        raise ParseError("duplicate node names")
    name_to_id = {name: i for i, name in enumerate(names)}

    edges = []
    for i, item in enumerate(data["edges"]):
        ctx = f"edges[{i}]"
        if not isinstance(item, dict):
            raise ParseError(f"{ctx}: must be an object")
        try:
            u = _parse_node_ref(item["u"], name_to_id, ctx)
            v = _parse_node_ref(item["v"], name_to_id, ctx)
            length = float(item["length"])
        except KeyError as exc:
            raise ParseError(f"{ctx}: missing field {exc.args[0]!r}")
        except ParseError:
            raise
        except (TypeError, ValueError):
            raise ParseError(f"{ctx}: 'length' must be a number")
        edges.append(Edge(u, v, length, bool(item.get("directed", False))))

    demands = []
    for i, item in enumerate(data["demands"]):
        ctx = f"demands[{i}]"
        if not isinstance(item, dict):
            raise ParseError(f"{ctx}: must be an object")
        try:
            origin = _parse_node_ref(item["origin"], name_to_id, ctx)
            dest = _parse_node_ref(item["destination"], name_to_id, ctx)
            volume = float(item.get("volume", 1.0))
        except KeyError as exc:
            raise ParseError(f"{ctx}: missing field {exc.args[0]!r}")
        except ParseError:
            raise
        except (TypeError, ValueError):
            raise ParseError(f"{ctx}: 'volume' must be a number")
        alpha = item.get("alpha")
        routes = item.get("routes")
        if alpha is not None:
            alpha = float(alpha)
        if routes is not None:
            routes = tuple(
                tuple(_parse_node_ref(nref, name_to_id, f"{ctx}.routes[{j}]")
                      for nref in route)
                for j, route in enumerate(routes))
        demands.append(Demand(origin, dest, volume, alpha, routes))

    placement = PlacementConstraints()
    if "placement" in data and data["placement"] is not None:
        p = data["placement"]
        if not isinstance(p, dict):
            raise ParseError("'placement' must be an object")
        budget = p.get("budget")
        if budget is not None:
            budget = int(budget)
        placement = PlacementConstraints(
            budget=budget,
            forced_open=frozenset(_parse_node_ref(x, name_to_id, "placement.open")
                                  for x in p.get("open", [])),
            forced_closed=frozenset(_parse_node_ref(x, name_to_id, "placement.closed")
                                    for x in p.get("closed", [])))

    return build_instance(names, edges, demands, travel_range, placement, variant)


def build_instance(node_names, edges, demands, travel_range,
                   placement=PlacementConstraints(),
                   variant_default=ORIGINAL) -> Instance:
    """Assemble a validated Instance, applying the load-time pruning rules."""
    report = []
    names = tuple(str(x) for x in node_names)

    # Hard violations first: anything pruning cannot repair.
    probe = Instance(Network(names, tuple(edges)), tuple(demands), travel_range,
                     placement, variant_default)
    hard = [v for v in validate_instance(probe)
            if "longer than the travel range" not in v
            and "no admissible route" not in v]
    if hard:
        raise ValidationError(hard)

    kept_edges = []
    for e in edges:
        if e.length > travel_range + DIST_TOL:
            report.append(f"pruned edge {names[e.u]}-{names[e.v]} "
                          f"(length {e.length} exceeds range {travel_range})")
        else:
            kept_edges.append(e)
    network = Network(names, tuple(kept_edges))

    kept_demands = []
    for i, q in enumerate(demands):
        if q.routes is not None:
            valid_routes = []
            for route in q.routes:
                if _route_walks_network(network, route):
                    valid_routes.append(tuple(route))
                else:
                    report.append(f"pruned route {route} of demand #{i} "
                                  "(uses a pruned edge)")
            q = Demand(q.origin, q.destination, q.volume, None,
                       tuple(valid_routes))
        if _demand_has_routes(network, q, travel_range, variant_default):
            kept_demands.append(q)
        else:
            report.append(f"pruned demand #{i} "
                          f"({names[q.origin]}->{names[q.destination]}): "
                          "empty route set")

    instance = Instance(network, tuple(kept_demands), travel_range, placement,
                        variant_default, tuple(report))
    remaining = validate_instance(instance)
    if remaining:
        raise ValidationError(remaining)
    return instance


def serialize_instance(instance: Instance) -> str:
    """Emit the JSON document format accepted by parse_instance."""
    net = instance.network
    doc = {
        "range": instance.travel_range,
        "variant": instance.variant_default,
        "nodes": list(net.node_names),
        "edges": [
            {"u": net.name(e.u), "v": net.name(e.v), "length": e.length,
             **({"directed": True} if e.directed else {})}
            for e in net.edges
        ],
        "demands": [
            {"origin": net.name(q.origin), "destination": net.name(q.destination),
             "volume": q.volume,
             **({"alpha": q.alpha} if q.alpha is not None else
                {"routes": [[net.name(n) for n in r] for r in q.routes]})}
            for q in instance.demands
        ],
    }
    pc = instance.placement
    if pc.budget is not None or pc.forced_open or pc.forced_closed:
        doc["placement"] = {}
        if pc.budget is not None:
            doc["placement"]["budget"] = pc.budget
        if pc.forced_open:
            doc["placement"]["open"] = sorted(net.name(j) for j in pc.forced_open)
        if pc.forced_closed:
            doc["placement"]["closed"] = sorted(net.name(j) for j in pc.forced_closed)
    return json.dumps(doc, indent=2)
