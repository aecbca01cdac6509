"""Demand aggregation and collection stop-point placement.

Households are aggregated into demand points (buildings with a daily
waste mass), and stops are opened on network nodes by a greedy
largest-uncovered-mass rule until every demand point sits within the
service radius of exactly one stop. Per-stop load is capped; a lone
demand heavier than the cap gets its own flagged stop.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field

from .errors import DataError, NegativeUnits, NoNodeWithinRange, UncoverableDemand
from .network import RoadNetwork, _single_source, snap

log = logging.getLogger(__name__)

_RADIUS_TOL_M = 1e-9


@dataclass(frozen=True)
class DemandPoint:
    id: int
    x_m: float
    y_m: float
    dwelling_units: int
    waste_kg_day: float


@dataclass
class StopPoint:
    id: int
    node: int
    assigned_demand_kg: float
    service_time_s: float
    covered_demand_ids: list[int]
    overflow: bool = False  # single demand above the load cap, flagged


@dataclass(frozen=True)
class CoverageConfig:
    radius_m: float = 300.0
    distance_mode: str = "network"  # or "euclidean"
    max_stop_load_kg: float = 520.0
    candidate_nodes: tuple[int, ...] | None = None
    service_time_s: float = 1800.0

    def __post_init__(self):
        if self.radius_m <= 0:
            raise ValueError("radius_m must be positive")
        if self.max_stop_load_kg <= 0:
            raise ValueError("max_stop_load_kg must be positive")
        if self.distance_mode not in ("network", "euclidean"):
            raise ValueError(f"unknown distance_mode {self.distance_mode!r}")


def aggregate_demand(
    buildings: list[tuple[int, float, float, int]],
    rate_kg_per_unit_day: float = 2.49,
) -> list[DemandPoint]:
    """Turn (id, x, y, dwelling_units) building rows into demand points."""
    if rate_kg_per_unit_day <= 0:
        raise ValueError("generation rate must be positive")
    out = []
    for bid, x, y, units in buildings:
        if units < 0:
            raise NegativeUnits(f"building {bid} has {units} dwelling units")
        out.append(
            DemandPoint(
                id=bid,
                x_m=x,
                y_m=y,
                dwelling_units=units,
                waste_kg_day=units * rate_kg_per_unit_day,
            )
        )
    return out


def _stop_distances(
    net: RoadNetwork, demands: list[DemandPoint], cfg: CoverageConfig,
    candidates: list[int],
) -> dict[int, dict[int, float]]:
    """Distance in meters from each candidate node to each demand point.

    Network mode: directed shortest-path meters from the candidate to the
    demand's snapped node. Euclidean mode: straight line from the
    candidate node to the demand coordinates.
    """
    if cfg.distance_mode == "euclidean":
        dists: dict[int, dict[int, float]] = {}
        for c in candidates:
            node = net.node(c)
            dists[c] = {
                d.id: math.hypot(node.x_m - d.x_m, node.y_m - d.y_m)
                for d in demands
            }
        return dists
    snapped: dict[int, int] = {}
    for d in demands:
        try:
            snapped[d.id] = snap(net, (d.x_m, d.y_m), cfg.radius_m)
        except NoNodeWithinRange as exc:
            raise UncoverableDemand(
                f"demand {d.id} does not snap to the network within "
                f"{cfg.radius_m} m"
            ) from exc
    dists = {}
    for c in candidates:
        res = _single_source(net, c, "distance")
        dists[c] = {
            d.id: res.cost.get(snapped[d.id], math.inf) for d in demands
        }
    return dists


def place_stops(
    net: RoadNetwork, demands: list[DemandPoint], cfg: CoverageConfig
) -> list[StopPoint]:
    """Open stops greedily until every demand point is covered.

    Each round opens a stop at the candidate node whose radius contains
    the largest uncovered waste mass (ties: smaller node id) and assigns
    those demands nearest-first while the load cap allows; leftovers stay
    uncovered and may trigger another stop, possibly at the same node.
    """
    candidates = sorted(cfg.candidate_nodes) if cfg.candidate_nodes else net.node_ids
    if not candidates:
        raise UncoverableDemand("candidate node set is empty")
    dist = _stop_distances(net, demands, cfg, candidates)
    by_id = {d.id: d for d in demands}
    within: dict[int, list[int]] = {
        c: [d.id for d in demands if dist[c][d.id] <= cfg.radius_m + _RADIUS_TOL_M]
        for c in candidates
    }

    uncovered = {d.id for d in demands}
    stops: list[StopPoint] = []
    while uncovered:
        best_node = None
        best_gain = 0.0
        for c in candidates:
            gain = sum(by_id[i].waste_kg_day for i in within[c] if i in uncovered)
            if gain > best_gain:
                best_gain, best_node = gain, c
        if best_node is None:
            stranded = sorted(uncovered)
            raise UncoverableDemand(
                f"no candidate within {cfg.radius_m} m covers demands {stranded}"
            )
        eligible = sorted(
            (i for i in within[best_node] if i in uncovered),
            key=lambda i: (dist[best_node][i], i),
        )
        taken: list[int] = []
        load = 0.0
        overflow = False
        for i in eligible:
            w = by_id[i].waste_kg_day
            if not taken and w > cfg.max_stop_load_kg:
                taken = [i]
                load = w
                overflow = True
                log.warning(
                    "demand %s (%.1f kg) exceeds the %.1f kg stop cap; "
                    "dedicated stop opened at node %s",
                    i, w, cfg.max_stop_load_kg, best_node,
                )
                break
            if load + w <= cfg.max_stop_load_kg:
                taken.append(i)
                load += w
        stops.append(
            StopPoint(
                id=len(stops),
                node=best_node,
                assigned_demand_kg=math.fsum(by_id[i].waste_kg_day for i in taken),
                service_time_s=cfg.service_time_s,
                covered_demand_ids=taken,
                overflow=overflow,
            )
        )
        uncovered.difference_update(taken)
    return stops


@dataclass
class CoverageReport:
    uncovered_ids: list[int]
    max_load_kg: float
    load_histogram: dict[int, int]  # bin start (kg, width 100) -> stop count
    overflow_stop_ids: list[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.uncovered_ids


def verify_coverage(
    stops: list[StopPoint],
    demands: list[DemandPoint],
    net: RoadNetwork,
    cfg: CoverageConfig,
) -> CoverageReport:
    """Audit a stop set: radius compliance, loads, and full coverage."""
    nodes = sorted({s.node for s in stops})
    dist = _stop_distances(net, demands, cfg, nodes) if nodes else {}
    covered: set[int] = set()
    for s in stops:
        for i in s.covered_demand_ids:
            if dist[s.node].get(i, math.inf) <= cfg.radius_m + _RADIUS_TOL_M:
                covered.add(i)
    uncovered = sorted(d.id for d in demands if d.id not in covered)
    loads = [s.assigned_demand_kg for s in stops]
    histogram: dict[int, int] = {}
    for load in loads:
        bin_start = int(load // 100) * 100
        histogram[bin_start] = histogram.get(bin_start, 0) + 1
    return CoverageReport(
        uncovered_ids=uncovered,
        max_load_kg=max(loads, default=0.0),
        load_histogram=dict(sorted(histogram.items())),
        overflow_stop_ids=[s.id for s in stops if s.overflow],
    )


# --- file interfaces ---

BUILDING_HEADER = ["id", "x_m", "y_m", "dwelling_units"]
STOP_HEADER = ["stop_id", "node_id", "assigned_kg", "service_time_s", "covered_ids"]


def load_buildings(path: str) -> list[tuple[int, float, float, int]]:
    rows = []
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            raw = list(reader)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not raw or raw[0] != BUILDING_HEADER:
        raise DataError(f"{path}: expected header {','.join(BUILDING_HEADER)}")
    for row in raw[1:]:
        if not row:
            continue
        try:
            rows.append((int(row[0]), float(row[1]), float(row[2]), int(row[3])))
        except (ValueError, IndexError) as exc:
            raise DataError(f"{path}: bad building row {row}") from exc
    return rows


def write_buildings(rows: list[tuple[int, float, float, int]], path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BUILDING_HEADER)
        for bid, x, y, units in rows:
            w.writerow([bid, repr(x), repr(y), units])


def write_stops(stops: list[StopPoint], path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(STOP_HEADER)
        for s in stops:
            w.writerow(
                [
                    s.id,
                    s.node,
                    repr(s.assigned_demand_kg),
                    repr(s.service_time_s),
                    ";".join(str(i) for i in s.covered_demand_ids),
                ]
            )


def load_stops(path: str, default_service_s: float = 1800.0) -> list[StopPoint]:
    try:
        with open(path, newline="") as fh:
            raw = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not raw or raw[0] != STOP_HEADER:
        raise DataError(f"{path}: expected header {','.join(STOP_HEADER)}")
    out = []
    for row in raw[1:]:
        if not row:
            continue
        try:
            covered = [int(t) for t in row[4].split(";") if t != ""]
            out.append(
                StopPoint(
                    id=int(row[0]),
                    node=int(row[1]),
                    assigned_demand_kg=float(row[2]),
                    service_time_s=float(row[3]) if row[3] else default_service_s,
                    covered_demand_ids=covered,
                )
            )
        except (ValueError, IndexError) as exc:
            raise DataError(f"{path}: bad stop row {row}") from exc
    return out
