"""Seeded synthetic grid cities for demos and property tests."""

from __future__ import annotations

import os
import random
from dataclasses import dataclass

from .coverage import write_buildings
from .network import Edge, Node, write_edges, write_nodes


@dataclass(frozen=True)
class SyntheticCitySpec:
    seed: int = 0
    grid_x: int = 3  # blocks horizontally
    grid_y: int = 3  # blocks vertically
    block_m: float = 200.0
    buildings_per_block: int = 7
    units_per_building: int = 8
    speed_kmh: float = 40.0

    def __post_init__(self):
        if self.grid_x < 1 or self.grid_y < 1:
            raise ValueError("grid dimensions must be at least 1x1")
        if self.block_m <= 0 or self.speed_kmh <= 0:
            raise ValueError("block_m and speed_kmh must be positive")
        if self.buildings_per_block < 0 or self.units_per_building < 0:
            raise ValueError("densities must be non-negative")


def gen_synthetic_city(
    spec: SyntheticCitySpec,
) -> tuple[list[Node], list[Edge], list[tuple[int, float, float, int]]]:
    """Grid street network plus buildings scattered inside the blocks.

    Every street segment becomes two directed edges, so the network is
    strongly connected. Output is fully determined by the spec.
    """
    nx, ny = spec.grid_x + 1, spec.grid_y + 1

    def node_id(ix: int, iy: int) -> int:
        return iy * nx + ix

    nodes = [
        Node(id=node_id(ix, iy), x_m=ix * spec.block_m, y_m=iy * spec.block_m)
        for iy in range(ny)
        for ix in range(nx)
    ]
    edges: list[Edge] = []
    for iy in range(ny):
        for ix in range(nx - 1):
            a, b = node_id(ix, iy), node_id(ix + 1, iy)
            edges.append(Edge(a, b, spec.block_m, spec.speed_kmh))
            edges.append(Edge(b, a, spec.block_m, spec.speed_kmh))
    for ix in range(nx):
        for iy in range(ny - 1):
            a, b = node_id(ix, iy), node_id(ix, iy + 1)
            edges.append(Edge(a, b, spec.block_m, spec.speed_kmh))
            edges.append(Edge(b, a, spec.block_m, spec.speed_kmh))

    rng = random.Random(spec.seed)
    buildings: list[tuple[int, float, float, int]] = []
    bid = 0
    for by in range(spec.grid_y):
        for bx in range(spec.grid_x):
            for _ in range(spec.buildings_per_block):
                x = (bx + rng.random()) * spec.block_m
                y = (by + rng.random()) * spec.block_m
                buildings.append((bid, x, y, spec.units_per_building))
                bid += 1
    return nodes, edges, buildings


def write_city(spec: SyntheticCitySpec, out_dir: str) -> dict[str, str]:
    """Write nodes.csv / edges.csv / buildings.csv; returns their paths."""
    os.makedirs(out_dir, exist_ok=True)
    nodes, edges, buildings = gen_synthetic_city(spec)
    paths = {
        "nodes": os.path.join(out_dir, "nodes.csv"),
        "edges": os.path.join(out_dir, "edges.csv"),
        "buildings": os.path.join(out_dir, "buildings.csv"),
    }
    write_nodes(nodes, paths["nodes"])
    write_edges(edges, paths["edges"])
    write_buildings(buildings, paths["buildings"])
    return paths
