"""Command-line entry points.

Exit codes: 0 success, 2 configuration error, 3 infeasible instance,
4 data error.
"""

from __future__ import annotations

import os
import sys

import click

from . import coverage as cov
from . import impact, network, synth
from .errors import (
    ConfigError,
    DataError,
    InfeasibleStop,
    NegativeUnits,
    NoNodeWithinRange,
    PlannerError,
    ShiftTooShort,
    StageError,
    TooLarge,
    UncoverableDemand,
    UnknownNode,
    Unreachable,
    UnreachableStop,
)
from .pipeline import load_scenario_config, load_summary, parse_kv_file, run_pipeline

EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_DATA = 4

_INFEASIBLE = (UncoverableDemand, InfeasibleStop, UnreachableStop,
               ShiftTooShort, Unreachable, TooLarge)
_DATA = (DataError, UnknownNode, NoNodeWithinRange, NegativeUnits)


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, StageError):
        return _exit_code(exc.cause)
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, _INFEASIBLE):
        return EXIT_INFEASIBLE
    if isinstance(exc, _DATA):
        return EXIT_DATA
    return EXIT_DATA


def _fail(exc: Exception) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(_exit_code(exc))


@click.group()
def main() -> None:
    """Plan municipal waste collection: stops, routes, fleet, impacts."""


@main.command()
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@click.option("--objective", type=click.Choice(["time", "distance"]),
              default=None, help="Override the config objective.")
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--out", "out_dir", default=".", show_default=True,
              help="Directory for output files.")
@click.option("--format", "fmt", type=click.Choice(["table", "text"]),
              default="text", show_default=True,
              help="Stdout rendering of the comparison report, if any.")
def plan(config: str, objective: str | None, seed: int | None,
         out_dir: str, fmt: str) -> None:
    """Run the full pipeline for a scenario CONFIG file."""
    try:
        cfg = load_scenario_config(config)
        if objective is not None:
            cfg.objective = objective
        if seed is not None:
            cfg.seed = seed
        result = run_pipeline(cfg, out_dir)
    except PlannerError as exc:
        _fail(exc)
        return
    s = result.summary
    click.echo(
        f"planned {s.n_stops} stops, {result.plan.n_trips} trips, "
        f"{s.n_trucks} trucks; {s.total_km:.1f} km, {s.total_time_h:.1f} h/day"
    )
    for name in ("stops", "plan", "routes", "summary"):
        click.echo(f"  {name}: {result.files[name]}")
    if result.report is not None:
        render = (impact.format_comparison_table if fmt == "table"
                  else impact.format_comparison_text)
        click.echo(render(result.report), nl=False)


@main.command("synth")
@click.argument("specfile", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", default=".", show_default=True,
              help="Directory for nodes.csv / edges.csv / buildings.csv.")
def synth_city(specfile: str, out_dir: str) -> None:
    """Generate a synthetic grid city from a SPECFILE (key=value)."""
    try:
        kv = parse_kv_file(specfile)
        try:
            spec = synth.SyntheticCitySpec(
                seed=int(kv.get("seed", "0")),
                grid_x=int(kv.get("grid_x", "3")),
                grid_y=int(kv.get("grid_y", "3")),
                block_m=float(kv.get("block_m", "200")),
                buildings_per_block=int(kv.get("buildings_per_block", "7")),
                units_per_building=int(kv.get("units_per_building", "8")),
                speed_kmh=float(kv.get("speed_kmh", "40")),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        paths = synth.write_city(spec, out_dir)
    except PlannerError as exc:
        _fail(exc)
        return
    for name, path in paths.items():
        click.echo(f"  {name}: {path}")


@main.command()
@click.argument("existing", type=click.Path(exists=True, dir_okay=False))
@click.argument("proposed", type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(["table", "text"]),
              default="table", show_default=True)
def compare(existing: str, proposed: str, fmt: str) -> None:
    """Compare two scenario summary files (key=value format)."""
    try:
        report = impact.compare_scenarios(load_summary(existing),
                                          load_summary(proposed))
    except PlannerError as exc:
        _fail(exc)
        return
    render = (impact.format_comparison_table if fmt == "table"
              else impact.format_comparison_text)
    click.echo(render(report), nl=False)


@main.command()
@click.argument("stops_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("buildings", type=click.Path(exists=True, dir_okay=False))
@click.argument("network_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--radius", type=float, default=300.0, show_default=True,
              help="Service radius in meters.")
@click.option("--mode", type=click.Choice(["network", "euclidean"]),
              default="network", show_default=True)
@click.option("--rate", type=float, default=2.49, show_default=True,
              help="Waste generation rate, kg per dwelling unit per day.")
def verify(stops_file: str, buildings: str, network_dir: str,
           radius: float, mode: str, rate: float) -> None:
    """Audit a stops table against buildings and a network directory.

    NETWORK_DIR must contain nodes.csv and edges.csv (turns.csv optional).
    """
    try:
        nodes_path = os.path.join(network_dir, "nodes.csv")
        edges_path = os.path.join(network_dir, "edges.csv")
        turns_path = os.path.join(network_dir, "turns.csv")
        net = network.load_network(
            nodes_path, edges_path,
            turns_path if os.path.exists(turns_path) else None,
        )
        demands = cov.aggregate_demand(cov.load_buildings(buildings), rate)
        stops = cov.load_stops(stops_file)
        cfg = cov.CoverageConfig(radius_m=radius, distance_mode=mode)
        report = cov.verify_coverage(stops, demands, net, cfg)
    except PlannerError as exc:
        _fail(exc)
        return
    click.echo(f"stops: {len(stops)}, demand points: {len(demands)}")
    click.echo(f"max stop load: {report.max_load_kg:.2f} kg")
    for bin_start, count in report.load_histogram.items():
        click.echo(f"  load {bin_start:>5}-{bin_start + 99} kg: {count}")
    if report.overflow_stop_ids:
        click.echo(f"overflow stops: {report.overflow_stop_ids}")
    if report.uncovered_ids:
        click.echo(f"UNCOVERED demand points: {report.uncovered_ids}", err=True)
        sys.exit(EXIT_INFEASIBLE)
    click.echo("coverage OK: every demand point is served")


if __name__ == "__main__":
    main()
