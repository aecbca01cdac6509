import os

from click.testing import CliRunner

from mswplan.cli import main

DEMO = os.path.abspath(os.path.join(os.path.dirname(__file__), "..", "demo"))


def demo_path(*parts: str) -> str:
    return os.path.join(DEMO, *parts)


def test_plan_demo_succeeds(tmp_path):
    runner = CliRunner()
    result = runner.invoke(
        main,
        ["plan", demo_path("four_stops", "scenario.cfg"),
         "--out", str(tmp_path)],
    )
    assert result.exit_code == 0, result.output
    assert "planned 4 stops" in result.output
    for name in ("stops.csv", "plan.csv", "routes.geojson", "summary.cfg"):
        assert (tmp_path / name).exists()


def test_plan_reports_comparison_when_baseline_present(tmp_path):
    runner = CliRunner()
    result = runner.invoke(
        main,
        ["plan", demo_path("city3x3", "scenario_with_baseline.cfg"),
         "--out", str(tmp_path), "--format", "table"],
    )
    assert result.exit_code == 0, result.output
    assert "% Improvement" in result.output
    assert "26.5%" in result.output


def test_plan_missing_input_file_exits_2(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("network.nodes=nope.csv\nnetwork.edges=nope.csv\n"
                   "buildings=nope.csv\ndepot.x_m=0\ndepot.y_m=0\n")
    result = CliRunner().invoke(main, ["plan", str(cfg)])
    assert result.exit_code == 2


def test_plan_far_depot_exits_4(tmp_path):
    cfg = tmp_path / "far.cfg"
    cfg.write_text(
        f"network.nodes={demo_path('city3x3', 'nodes.csv')}\n"
        f"network.edges={demo_path('city3x3', 'edges.csv')}\n"
        f"buildings={demo_path('city3x3', 'buildings.csv')}\n"
        "depot.x_m=90000\ndepot.y_m=90000\n"
    )
    result = CliRunner().invoke(main, ["plan", str(cfg), "--out", str(tmp_path)])
    assert result.exit_code == 4
    assert "network/snap" in result.output


def test_plan_infeasible_shift_exits_3(tmp_path):
    cfg = tmp_path / "tight.cfg"
    cfg.write_text(
        f"network.nodes={demo_path('four_stops', 'nodes.csv')}\n"
        f"network.edges={demo_path('four_stops', 'edges.csv')}\n"
        f"buildings={demo_path('four_stops', 'buildings.csv')}\n"
        "depot.x_m=0\ndepot.y_m=-2000\nfleet.shift_s=2000\n"
    )
    result = CliRunner().invoke(main, ["plan", str(cfg), "--out", str(tmp_path)])
    assert result.exit_code == 3
    assert "vrp/solve" in result.output


def test_compare_prints_reference_percentages():
    result = CliRunner().invoke(
        main,
        ["compare", demo_path("summaries", "existing.cfg"),
         demo_path("summaries", "proposed.cfg")],
    )
    assert result.exit_code == 0, result.output
    assert "26.5%" in result.output
    assert "-90.6%" in result.output
    text = CliRunner().invoke(
        main,
        ["compare", demo_path("summaries", "existing.cfg"),
         demo_path("summaries", "proposed.cfg"), "--format", "text"],
    )
    assert "90.6% worse" in text.output


def test_synth_then_plan_round_trip(tmp_path):
    spec = tmp_path / "city.cfg"
    spec.write_text("seed=5\ngrid_x=2\ngrid_y=2\nbuildings_per_block=3\n")
    runner = CliRunner()
    made = runner.invoke(main, ["synth", str(spec), "--out", str(tmp_path / "city")])
    assert made.exit_code == 0, made.output
    scenario = tmp_path / "scenario.cfg"
    scenario.write_text(
        "network.nodes=city/nodes.csv\nnetwork.edges=city/edges.csv\n"
        "buildings=city/buildings.csv\ndepot.x_m=0\ndepot.y_m=0\n"
    )
    ran = runner.invoke(main, ["plan", str(scenario), "--out", str(tmp_path / "out")])
    assert ran.exit_code == 0, ran.output


def test_verify_accepts_planned_stops_and_rejects_pruned(tmp_path):
    runner = CliRunner()
    out = tmp_path / "out"
    ran = runner.invoke(
        main,
        ["plan", demo_path("city3x3", "scenario.cfg"), "--out", str(out)],
    )
    assert ran.exit_code == 0, ran.output
    ok = runner.invoke(
        main,
        ["verify", str(out / "stops.csv"),
         demo_path("city3x3", "buildings.csv"), demo_path("city3x3")],
    )
    assert ok.exit_code == 0, ok.output
    assert "coverage OK" in ok.output

    # drop every stop but the first: coverage must fail with exit 3
    lines = (out / "stops.csv").read_text().splitlines()
    (tmp_path / "pruned.csv").write_text("\n".join(lines[:2]) + "\n")
    bad = runner.invoke(
        main,
        ["verify", str(tmp_path / "pruned.csv"),
         demo_path("city3x3", "buildings.csv"), demo_path("city3x3")],
    )
    assert bad.exit_code == 3
    assert "UNCOVERED" in bad.output


def test_seed_override_changes_nothing_on_fixed_instance(tmp_path):
    # identical configs and seeds give identical files even via the CLI
    runner = CliRunner()
    for sub in ("a", "b"):
        r = runner.invoke(
            main,
            ["plan", demo_path("city3x3", "scenario.cfg"),
             "--out", str(tmp_path / sub), "--seed", "11"],
        )
        assert r.exit_code == 0, r.output
    for name in ("stops.csv", "plan.csv", "routes.geojson", "summary.cfg"):
        assert (tmp_path / "a" / name).read_bytes() == \
            (tmp_path / "b" / name).read_bytes()
