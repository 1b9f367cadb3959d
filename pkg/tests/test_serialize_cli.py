import json
import math
from pathlib import Path

import jsonschema
import pytest

from asvsim import scenarios
from asvsim.cli import main
from asvsim.engine import run
from asvsim.plots import pairwise_distances, sample_field
from asvsim.serialize import (
    CSV_COLUMNS,
    ScenarioError,
    batch_summary_dict,
    dumps_canonical,
    load_scenario,
    parse_scenario,
    read_trajectory_csv,
    result_to_dict,
    scenario_to_dict,
    write_trajectory_csv,
)

from importlib import resources


def schema(name):
    return json.loads(resources.files("asvsim.data").joinpath(name).read_text())


MINIMAL = {
    "agents": [
        {"id": 0, "start": [0.0, 0.0], "waypoints": [[60.0, 0.0]]}
    ]
}


class TestScenarioParsing:
    def test_minimal_gets_reference_defaults(self):
        sc = parse_scenario(MINIMAL)
        assert sc.ilos.Delta == 2.0
        assert sc.ilos.Kp_g == pytest.approx(0.5)
        assert sc.ilos.Ki_g == pytest.approx(0.025)
        assert sc.ilos.R_tol == 3.0
        assert sc.gains.Kp_c == 3.5 and sc.gains.Kd_c == 4.0
        assert sc.inverse_params.k_att == 50.0
        assert sc.inverse_params.k_rep == 200000.0
        assert sc.inverse_params.d0 == 15.0
        assert sc.harmonic_params.Lambda_sink == -100.0
        assert sc.harmonic_params.K_vor0 == -10.0
        assert sc.config.R_safe == 15.0
        assert sc.config.collision_threshold == 2.0
        assert sc.agents[0].method == "apf_mvortex"

    def test_unknown_field_rejected_with_path(self):
        doc = dict(MINIMAL, weather="stormy")
        with pytest.raises(ScenarioError, match="weather"):
            parse_scenario(doc)

    def test_negative_r_safe_names_field(self):
        doc = dict(MINIMAL, sim={"r_safe": -1.0})
        with pytest.raises(ScenarioError, match="sim.r_safe"):
            parse_scenario(doc)

    def test_bad_agent_speed_names_path(self):
        doc = {"agents": [{"id": 0, "start": [0, 0], "speed": 5.0,
                           "waypoints": [[60, 0]]}]}
        with pytest.raises(ScenarioError, match="agents\\[0\\]"):
            parse_scenario(doc)

    def test_round_trip_identity(self):
        sc = scenarios.narrow_channel()
        doc = scenario_to_dict(sc)
        sc2 = parse_scenario(doc)
        assert dumps_canonical(scenario_to_dict(sc2)) == dumps_canonical(doc)

    def test_generated_documents_validate_against_shipped_schema(self):
        validator = jsonschema.Draft7Validator(schema("scenario.schema.json"))
        for builder in (scenarios.head_on, scenarios.square_tracking,
                        scenarios.narrow_channel, scenarios.three_ship):
            doc = scenario_to_dict(builder())
            validator.validate(doc)
        validator.validate(MINIMAL)

    def test_schema_rejects_unknown_fields_too(self):
        validator = jsonschema.Draft7Validator(schema("scenario.schema.json"))
        with pytest.raises(jsonschema.ValidationError):
            validator.validate(dict(MINIMAL, weather="stormy"))


class TestTrajectoryCSV:
    def test_golden_header(self, tmp_path, model):
        res = run(scenarios.head_on(), model=model, record=True)
        path = tmp_path / "traj.csv"
        write_trajectory_csv(res, str(path))
        header = path.read_text().splitlines()[0]
        assert header == "t_prime,agent_id,x_L,y_L,psi_rad,u_nd,v_nd,r_nd,delta_rad,delta_c_rad,psi_d_rad,mode,y_e_L"
        assert tuple(header.split(",")) == CSV_COLUMNS

    def test_round_trip(self, tmp_path, model):
        res = run(scenarios.head_on(), model=model, record=True)
        path = tmp_path / "traj.csv"
        write_trajectory_csv(res, str(path))
        rows = read_trajectory_csv(str(path))
        assert set(rows) == {0, 1}
        assert len(rows[0]) == len(res.trajectories[0])
        for rec, orig in zip(rows[0], res.trajectories[0]):
            assert rec == pytest.approx(orig)

    def test_one_row_per_agent_per_step(self, tmp_path, model):
        res = run(scenarios.head_on(), model=model, record=True)
        path = tmp_path / "t.csv"
        write_trajectory_csv(res, str(path))
        lines = path.read_text().strip().splitlines()
        assert len(lines) - 1 == 2 * len(res.trajectories[0])


class TestResultJSON:
    def test_validates_against_shipped_schema(self, model):
        res = run(scenarios.head_on(), model=model, record=True)
        doc = result_to_dict(res, scenarios.head_on())
        jsonschema.Draft7Validator(schema("result.schema.json")).validate(doc)

    def test_batch_summary_has_no_timing(self, model):
        from asvsim.montecarlo import BatchSpec, EnvSpec, aggregate, run_batch
        records = run_batch(BatchSpec(env=EnvSpec.by_id(1), method="apf_mvortex",
                                      n_runs=3, master_seed=5, jobs=1))
        doc = batch_summary_dict(1, "apf_mvortex", 3, 5, records, aggregate(records))
        text = dumps_canonical(doc)
        assert "timing" not in text
        assert "guidance_call" not in text


@pytest.fixture(scope="module")
def scenario_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("scen") / "head_on.json"
    path.write_text(dumps_canonical(scenario_to_dict(scenarios.head_on())))
    return str(path)


@pytest.fixture(scope="module")
def inverse_failure_file(tmp_path_factory):
    sc = scenarios.static_avoidance("apf_inverse", goal_x=60.0)
    path = tmp_path_factory.mktemp("scen") / "inverse_failure.json"
    path.write_text(dumps_canonical(scenario_to_dict(sc)))
    return str(path)


class TestCLI:
    @pytest.mark.parametrize("cmd", ["simulate", "batch", "compare", "plot", "validate"])
    def test_help_exits_zero(self, cmd, capsys):
        with pytest.raises(SystemExit) as exc:
            main([cmd, "--help"])
        assert exc.value.code == 0
        assert "usage" in capsys.readouterr().out

    def test_simulate_head_on_success(self, scenario_file, tmp_path, capsys):
        code = main(["simulate", "--scenario", scenario_file,
                     "--out", str(tmp_path)])
        assert code == 0
        result = json.loads((tmp_path / "result.json").read_text())
        assert all(a["outcome"] == "success" for a in result["agents"])
        assert (tmp_path / "trajectory.csv").exists()

    def test_simulate_collision_exit_code(self, inverse_failure_file, tmp_path):
        code = main(["simulate", "--scenario", inverse_failure_file,
                     "--out", str(tmp_path)])
        assert code == 2
        result = json.loads((tmp_path / "result.json").read_text())
        assert result["agents"][0]["outcome"] == "collision"

    def test_simulate_missing_file(self, tmp_path, capsys):
        code = main(["simulate", "--scenario", str(tmp_path / "nope.json"),
                     "--out", str(tmp_path)])
        assert code == 1
        assert "error" in capsys.readouterr().err

    def test_method_override(self, scenario_file, tmp_path):
        code = main(["simulate", "--scenario", scenario_file, "--method", "vo",
                     "--out", str(tmp_path)])
        assert code == 0

    def test_validate_ok(self, scenario_file, capsys):
        assert main(["validate", "--scenario", scenario_file]) == 0

    def test_validate_rejects_bad_file(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(dict(MINIMAL, bogus=1)))
        assert main(["validate", "--scenario", str(bad)]) == 1
        assert "bogus" in capsys.readouterr().err

    def test_batch_byte_identical_summaries(self, tmp_path):
        for sub in ("a", "b"):
            code = main(["batch", "--env", "1", "--method", "mvortex",
                         "--runs", "6", "--seed", "7", "--jobs", "1",
                         "--out", str(tmp_path / sub)])
            assert code == 0
        s1 = (tmp_path / "a" / "summary.json").read_bytes()
        s2 = (tmp_path / "b" / "summary.json").read_bytes()
        assert s1 == s2

    def test_batch_jobs_invariant(self, tmp_path):
        main(["batch", "--env", "1", "--method", "mvortex", "--runs", "6",
              "--seed", "9", "--jobs", "1", "--out", str(tmp_path / "j1")])
        main(["batch", "--env", "1", "--method", "mvortex", "--runs", "6",
              "--seed", "9", "--jobs", "2", "--out", str(tmp_path / "j2")])
        assert ((tmp_path / "j1" / "summary.json").read_bytes()
                == (tmp_path / "j2" / "summary.json").read_bytes())

    def test_batch_invalid_env(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["batch", "--env", "9", "--method", "mvortex",
                  "--out", str(tmp_path)])
        assert exc.value.code == 2  # argparse rejects the choice

    def test_compare_writes_comparison(self, tmp_path):
        code = main(["compare", "--env", "1", "--methods", "mvortex,inverse",
                     "--runs", "4", "--seed", "3", "--jobs", "1",
                     "--out", str(tmp_path)])
        assert code == 0
        doc = json.loads((tmp_path / "comparison.json").read_text())
        assert set(doc["methods"]) == {"mvortex", "inverse"}


@pytest.fixture(scope="module")
def square_outputs(tmp_path_factory, model):
    out = tmp_path_factory.mktemp("plots")
    sc = scenarios.square_tracking()
    scen_path = out / "square.json"
    scen_path.write_text(dumps_canonical(scenario_to_dict(sc)))
    code = main(["simulate", "--scenario", str(scen_path), "--out", str(out)])
    assert code == 0
    return out, scen_path


class TestPlots:
    def test_path_plot_contains_waypoint_markers(self, square_outputs):
        out, scen_path = square_outputs
        svg = out / "path.svg"
        code = main(["plot", "--traj", str(out / "trajectory.csv"),
                     "--kind", "path", "--scenario", str(scen_path),
                     "--out", str(svg)])
        assert code == 0
        text = svg.read_text()
        assert text.count('class="waypoint"') == 4
        assert text.startswith("<svg")

    def test_series_plots_render(self, square_outputs):
        out, _ = square_outputs
        for kind in ("rudder", "heading", "crosstrack"):
            code = main(["plot", "--traj", str(out / "trajectory.csv"),
                         "--kind", kind, "--out", str(out / f"{kind}.svg")])
            assert code == 0
            assert (out / f"{kind}.svg").read_text().startswith("<svg")

    def test_distance_plot_minimum_matches_result(self, tmp_path, model):
        sc = scenarios.head_on()
        scen_path = tmp_path / "ho.json"
        scen_path.write_text(dumps_canonical(scenario_to_dict(sc)))
        assert main(["simulate", "--scenario", str(scen_path),
                     "--out", str(tmp_path)]) == 0
        rows = read_trajectory_csv(str(tmp_path / "trajectory.csv"))
        pairs = pairwise_distances(rows, r_safe=15.0)
        plotted_min = min(d for series in pairs.values() for _, d in series)
        result = json.loads((tmp_path / "result.json").read_text())
        assert plotted_min == pytest.approx(result["agents"][0]["min_ship_distance"],
                                            abs=1e-9)
        assert main(["plot", "--traj", str(tmp_path / "trajectory.csv"),
                     "--kind", "distance", "--out", str(tmp_path / "d.svg")]) == 0

    def test_unknown_kind_fails(self, square_outputs):
        out, _ = square_outputs
        code = main(["plot", "--traj", str(out / "trajectory.csv"),
                     "--kind", "pie", "--out", str(out / "x.svg")])
        assert code == 1

    def test_field_plot_starboard_arrows_avoid_obstacle(self, tmp_path):
        # probe on the starboard-approach side of the obstacle: the field
        # must not point into the obstacle disc
        arrows = sample_field("mvortex", goal=(10.0, 0.0), obstacle=(-10.0, 0.0))
        obstacle = (-10.0, 0.0)
        for x, y, ux, uy in arrows:
            dx, dy = obstacle[0] - x, obstacle[1] - y
            dist = math.hypot(dx, dy)
            if dist > 5.0 or y >= 0:
                continue
            # approach sector on the starboard side: inward radial component
            # must not dominate the arrow
            inward = (ux * dx + uy * dy) / dist
            assert inward < 0.98
        assert main(["plot", "--field", "mvortex",
                     "--out", str(tmp_path / "field.svg")]) == 0
        assert (tmp_path / "field.svg").read_text().count("field-arrow") > 100
