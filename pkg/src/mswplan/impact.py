"""Energy, time, and emission accounting for collection scenarios.

Per truck class, energy and each gas follow a linear model
``per_km * total_km + per_stop * stop_visits``. Factors are opaque
calibrated inputs (back-solvable from published totals); nothing here
claims physical plausibility, only exact ratios and round-trips.
Internal arithmetic is never rounded; display precision is applied only
when formatting a report.
"""

from __future__ import annotations

import csv
from collections import namedtuple
from dataclasses import dataclass, fields, replace

from .errors import (
    DataError,
    InconsistentSummary,
    NegativeInput,
    NonpositiveBaseline,
    ZeroDistance,
)

_CONSISTENCY_TOL = 0.05  # totals vs n_trucks * average


@dataclass(frozen=True)
class ImpactFactors:
    energy_mj_per_km: float = 0.0
    energy_mj_per_stop: float = 0.0
    co_g_per_km: float = 0.0
    co2_g_per_km: float = 0.0
    nox_g_per_km: float = 0.0
    co_g_per_stop: float = 0.0
    co2_g_per_stop: float = 0.0
    nox_g_per_stop: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) < 0:
                raise NegativeInput(f"{f.name} must be >= 0")


@dataclass(frozen=True)
class ScenarioSummary:
    name: str
    n_trucks: int
    truck_capacity_kg: float
    n_stops: int
    avg_stop_time_s: float
    avg_route_km: float
    total_km: float
    avg_route_h: float
    total_time_h: float
    energy_mj_day: float = 0.0
    co_g_day: float = 0.0
    co2_g_day: float = 0.0
    nox_g_day: float = 0.0

    def __post_init__(self):
        numeric = [f.name for f in fields(self) if f.name != "name"]
        for name in numeric:
            if getattr(self, name) < 0:
                raise InconsistentSummary(f"{self.name}: {name} is negative")
        for total, avg, label in (
            (self.total_km, self.avg_route_km, "distance"),
            (self.total_time_h, self.avg_route_h, "route time"),
        ):
            if total > 0 and self.n_trucks > 0:
                drift = abs(self.n_trucks * avg - total) / total
                if drift > _CONSISTENCY_TOL:
                    raise InconsistentSummary(
                        f"{self.name}: {self.n_trucks} trucks x average "
                        f"{label} misses the total by {drift:.1%} (> 5%)"
                    )


TimeBreakdown = namedtuple("TimeBreakdown", "drive_h service_h unload_h total_h")


def energy_consumption(total_km: float, n_stop_visits: float,
                       factors: ImpactFactors) -> float:
    if total_km < 0 or n_stop_visits < 0:
        raise NegativeInput("distance and stop visits must be >= 0")
    return factors.energy_mj_per_km * total_km + factors.energy_mj_per_stop * n_stop_visits


def emissions(total_km: float, n_stop_visits: float,
              factors: ImpactFactors) -> tuple[float, float, float]:
    """(CO, CO2, NOx) grams per day."""
    if total_km < 0 or n_stop_visits < 0:
        raise NegativeInput("distance and stop visits must be >= 0")
    return (
        factors.co_g_per_km * total_km + factors.co_g_per_stop * n_stop_visits,
        factors.co2_g_per_km * total_km + factors.co2_g_per_stop * n_stop_visits,
        factors.nox_g_per_km * total_km + factors.nox_g_per_stop * n_stop_visits,
    )


def time_consumption(drive_s: float, service_s: float, unload_s: float) -> TimeBreakdown:
    """Hours per day, decomposed into driving, collecting, and unloading."""
    if min(drive_s, service_s, unload_s) < 0:
        raise NegativeInput("time components must be >= 0")
    drive_h, service_h, unload_h = drive_s / 3600, service_s / 3600, unload_s / 3600
    return TimeBreakdown(drive_h, service_h, unload_h,
                         drive_h + service_h + unload_h)


def calibrate_factors(summary: ScenarioSummary) -> ImpactFactors:
    """Back-solve distance-only factors from a scenario's published totals.

    Stop terms stay zero; applying the forward models to the same
    distance reproduces every total exactly.
    """
    if summary.total_km <= 0:
        raise ZeroDistance(f"{summary.name}: total_km must be positive")
    return ImpactFactors(
        energy_mj_per_km=summary.energy_mj_day / summary.total_km,
        co_g_per_km=summary.co_g_day / summary.total_km,
        co2_g_per_km=summary.co2_g_day / summary.total_km,
        nox_g_per_km=summary.nox_g_day / summary.total_km,
    )


def percent_improvement(existing_value: float, proposed_value: float) -> float:
    """(existing - proposed) / existing * 100; negative marks a regression."""
    if existing_value <= 0:
        raise NonpositiveBaseline(f"baseline must be positive, got {existing_value}")
    return (existing_value - proposed_value) / existing_value * 100.0


#: Metric key -> attribute compared between scenarios.
IMPROVEMENT_METRICS = {
    "avg_route_distance_km": "avg_route_km",
    "avg_route_time_h": "avg_route_h",
    "total_time_h": "total_time_h",
    "co_g_day": "co_g_day",
    "co2_g_day": "co2_g_day",
    "nox_g_day": "nox_g_day",
    "total_distance_km": "total_km",
}


@dataclass(frozen=True)
class ComparisonReport:
    existing: ScenarioSummary
    proposed: ScenarioSummary
    improvements: dict[str, float]


def compare_scenarios(existing: ScenarioSummary,
                      proposed: ScenarioSummary) -> ComparisonReport:
    improvements = {
        key: percent_improvement(getattr(existing, attr), getattr(proposed, attr))
        for key, attr in IMPROVEMENT_METRICS.items()
    }
    return ComparisonReport(existing=existing, proposed=proposed,
                            improvements=improvements)


# --- report formatting ---

def _num(value: float) -> str:
    """Plain decimal display: no exponent, no thousands separator."""
    text = f"{value:.6f}".rstrip("0").rstrip(".")
    return text if text not in ("", "-0") else "0"


_TABLE_ROWS = [
    ("Number of Trucks", lambda s: _num(s.n_trucks), None),
    ("Truck Capacity (ton)", lambda s: _num(s.truck_capacity_kg / 1000.0), None),
    ("Number of Stop points", lambda s: _num(s.n_stops), None),
    ("Average Time spent at each Collection Point (min.)",
     lambda s: _num(s.avg_stop_time_s / 60.0), None),
    ("Average Route Distance (km)", lambda s: _num(s.avg_route_km),
     "avg_route_distance_km"),
    ("Total Traveled Distance (km)", lambda s: _num(s.total_km),
     "total_distance_km"),
    ("Average Route Time (hr.)", lambda s: _num(s.avg_route_h),
     "avg_route_time_h"),
    ("Total Energy Consumption (MJ/day)", lambda s: _num(s.energy_mj_day), None),
    ("Total Time Consumption (h/day)", lambda s: _num(s.total_time_h),
     "total_time_h"),
    ("CO Emissions (g/day)", lambda s: _num(s.co_g_day), "co_g_day"),
    ("CO2 Emissions (g/day)", lambda s: _num(s.co2_g_day), "co2_g_day"),
    ("NOx Emissions (g/day)", lambda s: _num(s.nox_g_day), "nox_g_day"),
]


def format_comparison_table(report: ComparisonReport) -> str:
    """Comma-separated scenario comparison, one metric per row."""
    lines = [f"Metric,{report.existing.name},{report.proposed.name},% Improvement"]
    for label, getter, key in _TABLE_ROWS:
        pct = f"{report.improvements[key]:.1f}%" if key else "-"
        lines.append(
            f"{label},{getter(report.existing)},{getter(report.proposed)},{pct}"
        )
    return "\n".join(lines) + "\n"


def format_comparison_text(report: ComparisonReport) -> str:
    e, p = report.existing, report.proposed
    width = max(len(label) for label, _, _ in _TABLE_ROWS)
    lines = [f"Scenario comparison: {e.name} vs {p.name}", ""]
    for label, getter, key in _TABLE_ROWS:
        line = f"{label:<{width}}  {getter(e):>12} -> {getter(p):>12}"
        if key:
            pct = report.improvements[key]
            tag = "better" if pct >= 0 else "worse"
            line += f"  ({abs(pct):.1f}% {tag})"
        lines.append(line)
    return "\n".join(lines) + "\n"


# --- file interfaces ---

FACTOR_HEADER = ["class", "quantity", "per_km", "per_stop"]
_QUANTITIES = ("energy_mj", "co_g", "co2_g", "nox_g")


def write_factors(factors_by_class: dict[str, ImpactFactors], path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FACTOR_HEADER)
        for cls in sorted(factors_by_class):
            f = factors_by_class[cls]
            rows = [
                ("energy_mj", f.energy_mj_per_km, f.energy_mj_per_stop),
                ("co_g", f.co_g_per_km, f.co_g_per_stop),
                ("co2_g", f.co2_g_per_km, f.co2_g_per_stop),
                ("nox_g", f.nox_g_per_km, f.nox_g_per_stop),
            ]
            for quantity, per_km, per_stop in rows:
                w.writerow([cls, quantity, repr(per_km), repr(per_stop)])


def load_factors(path: str) -> dict[str, ImpactFactors]:
    try:
        with open(path, newline="") as fh:
            raw = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not raw or raw[0] != FACTOR_HEADER:
        raise DataError(f"{path}: expected header {','.join(FACTOR_HEADER)}")
    out: dict[str, ImpactFactors] = {}
    for row in raw[1:]:
        if not row:
            continue
        try:
            cls, quantity = row[0], row[1]
            per_km, per_stop = float(row[2]), float(row[3])
        except (ValueError, IndexError) as exc:
            raise DataError(f"{path}: bad factor row {row}") from exc
        if quantity not in _QUANTITIES:
            raise DataError(f"{path}: unknown quantity {quantity!r}")
        base = out.get(cls, ImpactFactors())
        out[cls] = replace(
            base,
            **{
                f"{quantity}_per_km": per_km,
                f"{quantity}_per_stop": per_stop,
            },
        )
    return out
