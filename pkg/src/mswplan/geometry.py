"""Map-ready route geometry: one line feature per trip."""

from __future__ import annotations

import json

from .network import RoadNetwork, shortest_path
from .vrp import RoutePlan


def route_geometry(plan: RoutePlan, net: RoadNetwork) -> dict:
    """GeoJSON-style FeatureCollection of per-trip polylines.

    Each trip becomes a LineString whose vertices are the concatenated
    shortest paths (under the plan's objective metric) between depot,
    stops, and depot again, with coordinates in planar meters.
    """
    features = []
    for truck_id, trips in plan.trucks:
        for trip_index, trip in enumerate(trips, start=1):
            waypoints = [plan.depot_node]
            waypoints += [plan.stop_node(s) for s in trip.stop_ids]
            waypoints.append(plan.depot_node)
            node_seq: list[int] = [waypoints[0]]
            for a, b in zip(waypoints[:-1], waypoints[1:]):
                leg, _ = shortest_path(net, a, b, plan.objective)
                node_seq.extend(leg[1:])
            coords = [
                [net.node(n).x_m, net.node(n).y_m] for n in node_seq
            ]
            features.append(
                {
                    "type": "Feature",
                    "geometry": {"type": "LineString", "coordinates": coords},
                    "properties": {
                        "truck_id": truck_id,
                        "trip_index": trip_index,
                        "load_kg": trip.load_kg,
                        "distance_m": trip.distance_m,
                    },
                }
            )
    return {"type": "FeatureCollection", "features": features}


def write_geojson(collection: dict, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(collection, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")
