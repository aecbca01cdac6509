"""Directed weighted road network and shortest-path machinery.

The network is immutable after construction and safe to share between
workers. Costs come in two metrics: travel time in seconds (edge length
divided by edge speed, plus optional turn penalties) and distance in
meters (turn penalties ignored). Ties in the search are broken toward
the smaller node id so identical inputs always yield identical paths.
"""

from __future__ import annotations

import csv
import heapq
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .errors import DataError, NoNodeWithinRange, UnknownNode, Unreachable

#: Marker stored in cost matrices for node pairs with no directed path.
UNREACHABLE = math.inf

METRICS = ("time", "distance")

_SNAP_TIE_M = 1e-9


@dataclass(frozen=True)
class Node:
    id: int
    x_m: float
    y_m: float


@dataclass(frozen=True)
class Edge:
    from_id: int
    to_id: int
    length_m: float
    speed_kmh: float

    @property
    def travel_time_s(self) -> float:
        return self.length_m * 3.6 / self.speed_kmh


class RoadNetwork:
    """Street graph: nodes with planar meter coordinates, directed edges.

    Coordinates are assumed pre-projected; geographic lon/lat must be
    converted before construction. ``turn_penalty_s`` maps pairs of edge
    indices (incoming, outgoing) to extra seconds and only affects the
    time metric.
    """

    def __init__(
        self,
        nodes: list[Node],
        edges: list[Edge],
        turn_penalty_s: dict[tuple[int, int], float] | None = None,
    ):
        self._nodes: dict[int, Node] = {}
        for n in nodes:
            if n.id in self._nodes:
                raise ValueError(f"duplicate node id {n.id}")
            if not (math.isfinite(n.x_m) and math.isfinite(n.y_m)):
                raise ValueError(f"node {n.id} has non-finite coordinates")
            self._nodes[n.id] = n
        self._edges: tuple[Edge, ...] = tuple(edges)
        out: dict[int, list[int]] = {nid: [] for nid in self._nodes}
        for i, e in enumerate(self._edges):
            if e.from_id not in self._nodes or e.to_id not in self._nodes:
                raise ValueError(f"edge {i} references unknown node")
            if e.length_m <= 0 or e.speed_kmh <= 0:
                raise ValueError(f"edge {i} needs positive length and speed")
            out[e.from_id].append(i)
        self._out = {nid: tuple(idx) for nid, idx in out.items()}
        self._turns: dict[tuple[int, int], float] = dict(turn_penalty_s or {})
        for (a, b), pen in self._turns.items():
            if not (0 <= a < len(self._edges) and 0 <= b < len(self._edges)):
                raise ValueError(f"turn penalty references unknown edge ({a},{b})")
            if self._edges[a].to_id != self._edges[b].from_id:
                raise ValueError(f"turn penalty ({a},{b}) joins non-adjacent edges")
            if pen < 0:
                raise ValueError(f"turn penalty ({a},{b}) is negative")

    @property
    def node_ids(self) -> list[int]:
        return sorted(self._nodes)

    @property
    def n_nodes(self) -> int:
        return len(self._nodes)

    @property
    def edges(self) -> tuple[Edge, ...]:
        return self._edges

    @property
    def has_turn_penalties(self) -> bool:
        return any(p > 0 for p in self._turns.values())

    def node(self, node_id: int) -> Node:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise UnknownNode(f"node {node_id} not in network") from None

    def has_node(self, node_id: int) -> bool:
        return node_id in self._nodes

    def out_edges(self, node_id: int) -> tuple[int, ...]:
        return self._out[node_id]

    def edge(self, index: int) -> Edge:
        return self._edges[index]

    def turn_penalty(self, in_edge: int, out_edge: int) -> float:
        return self._turns.get((in_edge, out_edge), 0.0)


@dataclass(frozen=True)
class CostMatrix:
    """Dense origin x destination costs plus along-path companions.

    ``cost`` holds the optimal value in the chosen metric (seconds or
    meters). ``length_m`` and ``time_s`` hold meters/seconds accumulated
    along that same optimal path, so the non-objective quantity of a
    route is exact rather than re-derived from an average speed.
    Unreachable pairs carry :data:`UNREACHABLE` in all three.
    """

    origins: tuple[int, ...]
    destinations: tuple[int, ...]
    metric: str
    cost: tuple[tuple[float, ...], ...]
    length_m: tuple[tuple[float, ...], ...]
    time_s: tuple[tuple[float, ...], ...]

    def _index(self, ids: tuple[int, ...], node_id: int, kind: str) -> int:
        try:
            return ids.index(node_id)
        except ValueError:
            raise UnknownNode(f"node {node_id} not among matrix {kind}") from None

    def at(self, origin: int, destination: int) -> float:
        return self.cost[self._index(self.origins, origin, "origins")][
            self._index(self.destinations, destination, "destinations")
        ]

    def length_at(self, origin: int, destination: int) -> float:
        return self.length_m[self._index(self.origins, origin, "origins")][
            self._index(self.destinations, destination, "destinations")
        ]

    def time_at(self, origin: int, destination: int) -> float:
        return self.time_s[self._index(self.origins, origin, "origins")][
            self._index(self.destinations, destination, "destinations")
        ]


class _SearchResult:
    """Single-source search output: per-node cost and along-path companions.

    Path reconstruction is mode-specific: plain Dijkstra stores one
    parent edge per node, the turn-penalty search stores one parent per
    edge state (the same node can be crossed via different incoming
    edges on different optimal paths).
    """

    __slots__ = ("source", "cost", "length_m", "time_s",
                 "_net", "_parent_edge", "_node_best", "_parent_state")

    def __init__(self, net: RoadNetwork, source: int):
        self.source = source
        self.cost: dict[int, float] = {source: 0.0}
        self.length_m: dict[int, float] = {source: 0.0}
        self.time_s: dict[int, float] = {source: 0.0}
        self._net = net
        self._parent_edge: dict[int, int] = {}
        self._node_best: dict[int, int] | None = None
        self._parent_state: list[int | None] | None = None

    def path_to(self, target: int) -> list[int]:
        if target == self.source:
            return [self.source]
        edge_seq: list[int] = []
        if self._node_best is not None:
            assert self._parent_state is not None
            state: int | None = self._node_best[target]
            while state is not None:
                edge_seq.append(state)
                state = self._parent_state[state]
        else:
            node = target
            while node != self.source:
                ei = self._parent_edge[node]
                edge_seq.append(ei)
                node = self._net.edge(ei).from_id
        edge_seq.reverse()
        seq = [self.source]
        for ei in edge_seq:
            seq.append(self._net.edge(ei).to_id)
        return seq


def _search_nodes(net: RoadNetwork, source: int, metric: str) -> _SearchResult:
    """Plain node-keyed Dijkstra; ties pop the smaller node id."""
    res = _SearchResult(net, source)
    by_time = metric == "time"
    done: set[int] = set()
    heap: list[tuple[float, int]] = [(0.0, source)]
    while heap:
        cost_u, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        in_edge = res._parent_edge.get(u)
        for ei in net.out_edges(u):
            e = net.edge(ei)
            v = e.to_id
            if v in done:
                continue
            nc = cost_u + (e.travel_time_s if by_time else e.length_m)
            if v not in res.cost or nc < res.cost[v]:
                res.cost[v] = nc
                res.length_m[v] = res.length_m[u] + e.length_m
                # physical drive time along the chosen path, turns included
                pen = 0.0 if in_edge is None else net.turn_penalty(in_edge, ei)
                res.time_s[v] = res.time_s[u] + e.travel_time_s + pen
                res._parent_edge[v] = ei
                heapq.heappush(heap, (nc, v))
    return res


def _search_edge_states(net: RoadNetwork, source: int) -> _SearchResult:
    """Time-metric Dijkstra over incoming-edge states.

    Required when turn penalties are present: the cheapest way to stand
    at a node depends on the edge used to arrive. States are edge
    indices; the per-node answer is the first state settled at that node
    (minimum cost, then smaller node id, then smaller edge index).
    """
    res = _SearchResult(net, source)
    n_edges = len(net.edges)
    cost_e = [math.inf] * n_edges
    len_e = [0.0] * n_edges
    parent_e: list[int | None] = [None] * n_edges
    done_e = [False] * n_edges
    node_best: dict[int, int] = {}
    heap: list[tuple[float, int, int]] = []
    for ei in net.out_edges(source):
        e = net.edge(ei)
        cost_e[ei] = e.travel_time_s
        len_e[ei] = e.length_m
        heapq.heappush(heap, (cost_e[ei], e.to_id, ei))
    while heap:
        cost_u, node_u, ei = heapq.heappop(heap)
        if done_e[ei]:
            continue
        done_e[ei] = True
        if node_u not in node_best and node_u != source:
            node_best[node_u] = ei
            res.cost[node_u] = cost_u
            res.time_s[node_u] = cost_u
            res.length_m[node_u] = len_e[ei]
        for fi in net.out_edges(node_u):
            if done_e[fi]:
                continue
            f = net.edge(fi)
            nc = cost_u + net.turn_penalty(ei, fi) + f.travel_time_s
            if nc < cost_e[fi]:
                cost_e[fi] = nc
                len_e[fi] = len_e[ei] + f.length_m
                parent_e[fi] = ei
                heapq.heappush(heap, (nc, f.to_id, fi))
    res._node_best = node_best
    res._parent_state = parent_e
    return res


def _single_source(net: RoadNetwork, source: int, metric: str) -> _SearchResult:
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}, got {metric!r}")
    if not net.has_node(source):
        raise UnknownNode(f"node {source} not in network")
    if metric == "time" and net.has_turn_penalties:
        return _search_edge_states(net, source)
    return _search_nodes(net, source, metric)


def shortest_path(
    net: RoadNetwork, source: int, target: int, metric: str = "time"
) -> tuple[list[int], float]:
    """Cheapest directed path from source to target under the metric.

    Returns (node sequence, total cost). Time costs include turn
    penalties; distance costs ignore them. Raises UnknownNode for absent
    ids and Unreachable when no directed path exists.
    """
    if not net.has_node(target):
        raise UnknownNode(f"node {target} not in network")
    res = _single_source(net, source, metric)
    if target not in res.cost:
        raise Unreachable(f"no directed path {source} -> {target}")
    return res.path_to(target), res.cost[target]


def cost_matrix(
    net: RoadNetwork,
    origins: list[int],
    destinations: list[int],
    metric: str = "time",
    workers: int = 1,
) -> CostMatrix:
    """Many-to-many costs via one single-source run per origin.

    Unreachable pairs get the UNREACHABLE marker rather than raising, so
    partially connected networks still produce a usable matrix. Results
    are independent of ``workers``; parallelism only fans out origins.
    """
    for nid in list(origins) + list(destinations):
        if not net.has_node(nid):
            raise UnknownNode(f"node {nid} not in network")

    def one_row(origin: int) -> tuple[tuple[float, ...], ...]:
        res = _single_source(net, origin, metric)
        cost_row = tuple(res.cost.get(d, UNREACHABLE) for d in destinations)
        len_row = tuple(res.length_m.get(d, UNREACHABLE) for d in destinations)
        time_row = tuple(res.time_s.get(d, UNREACHABLE) for d in destinations)
        return cost_row, len_row, time_row

    if workers > 1 and len(origins) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one_row, origins))
    else:
        rows = [one_row(o) for o in origins]
    return CostMatrix(
        origins=tuple(origins),
        destinations=tuple(destinations),
        metric=metric,
        cost=tuple(r[0] for r in rows),
        length_m=tuple(r[1] for r in rows),
        time_s=tuple(r[2] for r in rows),
    )


def snap(net: RoadNetwork, point: tuple[float, float], max_dist_m: float) -> int:
    """Nearest network node to a planar point; ties go to the smaller id."""
    if net.n_nodes == 0:
        raise UnknownNode("network has no nodes")
    px, py = point
    dists = {nid: math.hypot(net.node(nid).x_m - px, net.node(nid).y_m - py)
             for nid in net.node_ids}
    best = min(dists.values())
    if best > max_dist_m:
        raise NoNodeWithinRange(
            f"nearest node is {best:.1f} m away, limit {max_dist_m:.1f} m"
        )
    return min(nid for nid, d in dists.items() if d <= best + _SNAP_TIE_M)


# --- file interfaces ---

NODE_HEADER = ["id", "x_m", "y_m"]
EDGE_HEADER = ["from_id", "to_id", "length_m", "speed_kmh"]
TURN_HEADER = ["from_edge_index", "to_edge_index", "penalty_s"]


def _read_table(path: str, header: list[str]) -> list[list[str]]:
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            rows = list(reader)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not rows or rows[0] != header:
        raise DataError(f"{path}: expected header {','.join(header)}")
    return [r for r in rows[1:] if r]


def load_nodes(path: str) -> list[Node]:
    out = []
    for row in _read_table(path, NODE_HEADER):
        try:
            out.append(Node(id=int(row[0]), x_m=float(row[1]), y_m=float(row[2])))
        except (ValueError, IndexError) as exc:
            raise DataError(f"{path}: bad node row {row}") from exc
    return out


def load_edges(path: str) -> list[Edge]:
    out = []
    for row in _read_table(path, EDGE_HEADER):
        try:
            out.append(
                Edge(
                    from_id=int(row[0]),
                    to_id=int(row[1]),
                    length_m=float(row[2]),
                    speed_kmh=float(row[3]),
                )
            )
        except (ValueError, IndexError) as exc:
            raise DataError(f"{path}: bad edge row {row}") from exc
    return out


def load_turn_penalties(path: str) -> dict[tuple[int, int], float]:
    out: dict[tuple[int, int], float] = {}
    for row in _read_table(path, TURN_HEADER):
        try:
            out[(int(row[0]), int(row[1]))] = float(row[2])
        except (ValueError, IndexError) as exc:
            raise DataError(f"{path}: bad turn-penalty row {row}") from exc
    return out


def load_network(
    nodes_path: str, edges_path: str, turns_path: str | None = None
) -> RoadNetwork:
    turns = load_turn_penalties(turns_path) if turns_path else None
    try:
        return RoadNetwork(load_nodes(nodes_path), load_edges(edges_path), turns)
    except ValueError as exc:
        raise DataError(str(exc)) from exc


def write_nodes(nodes: list[Node], path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(NODE_HEADER)
        for n in nodes:
            w.writerow([n.id, repr(n.x_m), repr(n.y_m)])


def write_edges(edges: list[Edge], path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EDGE_HEADER)
        for e in edges:
            w.writerow([e.from_id, e.to_id, repr(e.length_m), repr(e.speed_kmh)])
