import glob
import json
import math
import os
import tempfile
from unittest import TestCase

from ltlstep.api import ErrorCode, Foot, ParamName
from ltlstep.errors import ScenarioError
from ltlstep.model.scenario import load_scenario, parse_angle, parse_scenario
from ltlstep.model.tests.test_model import make_corridor_data
from ltlstep.utils.test_util import get_scenario_path, SCENARIOS_DIR


class TestParseAngle(TestCase):

    def test_values(self):
        self.assertEqual(parse_angle(0), 0.0)
        self.assertEqual(parse_angle(0.5), 0.5)
        self.assertEqual(parse_angle("0.5"), 0.5)
        self.assertEqual(parse_angle("pi"), math.pi)
        self.assertEqual(parse_angle("pi/2"), math.pi / 2)
        self.assertEqual(parse_angle("-pi / 8"), -math.pi / 8)
        self.assertEqual(parse_angle("3*pi/4"), 3 * math.pi / 4)
        self.assertEqual(parse_angle("-3*pi/4"), -3 * math.pi / 4)
        self.assertEqual(parse_angle("2pi/3"), 2 * math.pi / 3)

    def test_wrong_values(self):
        for value in ("", "tau", "pi/", "3*", "*pi", "pi/0", True, None, [1]):
            with self.assertRaises(ScenarioError, msg=value) as context:
                parse_angle(value, "goal.theta")
            self.assertEqual(context.exception.path, "goal.theta")


class TestParseScenario(TestCase):

    def assertFieldError(self, data, path, code=ErrorCode.SCENARIO_SCHEMA):
        with self.assertRaises(ScenarioError) as context:
            parse_scenario(data)
        self.assertEqual(context.exception.path, path)
        self.assertEqual(context.exception.code, code)
        return context.exception

    def test_defaults(self):
        scenario = parse_scenario(make_corridor_data())
        self.assertEqual(scenario.name, "tiny_corridor")
        self.assertEqual(scenario.goal, (0.7, 0.1, 0.0))
        self.assertEqual(scenario.first_foot, Foot.RIGHT)
        self.assertEqual(scenario.polygon_sides, 8)
        self.assertEqual(scenario.workspace, ((-10.0, 10.0), (-10.0, 10.0)))
        self.assertEqual(scenario.solver_settings, {})
        self.assertFalse(scenario.is_contact_ordering)

    def test_sections(self):
        data = make_corridor_data(
            cost={ParamName.Q: [[10, 0, 0], [0, 10, 0], [0, 0, 1]]},
            reachability={ParamName.R1: 0.5, ParamName.REDUCED: {
                ParamName.P1: [0, 0.15], ParamName.P2: [0, 0.3], ParamName.R1: 0.25, ParamName.R2: 0.15}},
            modes={ParamName.FIRST_FOOT: Foot.LEFT, ParamName.POLYGON_SIDES: 12},
            workspace={ParamName.X: [-2, 2]},
            solver={ParamName.TIME_LIMIT: 10, ParamName.THREADS: 2},
            initial_stance=[{ParamName.X: 0, ParamName.Y: 0.1, ParamName.THETA: 0},
                            {ParamName.X: 0, ParamName.Y: -0.1, ParamName.THETA: 0}])

        scenario = parse_scenario(data)

        self.assertEqual(scenario.Q[0][0], 10)
        self.assertEqual(scenario.R[0][0], 1)
        self.assertEqual(scenario.reachability.radii, (0.5, 0.35))
        self.assertEqual(scenario.reachability.reduced_radii, (0.25, 0.15))
        self.assertEqual(scenario.stance_feet, (Foot.LEFT, Foot.RIGHT))
        self.assertEqual(scenario.polygon_sides, 12)
        self.assertEqual(scenario.workspace, ((-2.0, 2.0), (-10.0, 10.0)))
        self.assertEqual(scenario.solver_settings, {ParamName.TIME_LIMIT: 10.0, ParamName.THREADS: 2})

    def test_field_paths(self):
        data = make_corridor_data()
        data[ParamName.REGIONS][1][ParamName.VERTICES][2] = [1.5, "a"]
        self.assertFieldError(data, "regions[1].vertices[2][1]")

        data = make_corridor_data()
        del data[ParamName.GOAL]
        self.assertFieldError(data, "goal")

        self.assertFieldError(make_corridor_data(speed=1), "speed")
        self.assertFieldError(make_corridor_data(modes={"mirror": True}), "modes.mirror")
        self.assertFieldError(make_corridor_data(num_steps=1), "num_steps")
        self.assertFieldError(make_corridor_data(num_steps="4"), "num_steps")
        self.assertFieldError(make_corridor_data(solver={ParamName.GAP: -1}), "solver.gap")
        self.assertFieldError(make_corridor_data(reachability={ParamName.R2: 0}), "reachability.r2")
        self.assertFieldError(make_corridor_data(specs=["F p_R2", 5]), "specs[1]")
        self.assertFieldError(make_corridor_data(atoms={"in R2": {ParamName.REGION: "R2"}}), "atoms.in R2")

        error = self.assertFieldError(make_corridor_data(specs=["G p_R1", "F p_R5"]), "specs[1]",
                                      ErrorCode.SCENARIO_ATOM)
        self.assertIn("F p_R5", error.message)

        data = make_corridor_data()
        data[ParamName.REGIONS][0][ParamName.VERTICES].reverse()
        self.assertFieldError(data, "regions[0]", ErrorCode.SCENARIO_REGION)

    def test_load(self):
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, "corridor.json")
            data = make_corridor_data()
            del data[ParamName.NAME]
            with open(path, "w") as file:
                json.dump(data, file)
            self.assertEqual(load_scenario(path).name, "corridor")

            with open(path, "w") as file:
                file.write("{\"num_steps\": ")
            with self.assertRaises(ScenarioError) as context:
                load_scenario(path)
            self.assertEqual(context.exception.path, path)

            with self.assertRaises(ScenarioError):
                load_scenario(os.path.join(directory, "missing.json"))


class TestScenarioCorpus(TestCase):

    def test_all(self):
        paths = sorted(glob.glob(os.path.join(SCENARIOS_DIR, "*.json")))
        self.assertGreaterEqual(len(paths), 9)
        for path in paths:
            scenario = load_scenario(path)
            self.assertEqual(scenario.name, os.path.basename(path)[:-len(".json")])
            self.assertEqual([scenario.regions[r].name for r in scenario.stance_regions], ["R1", "R1"])

    def test_corpus_goals(self):
        scenario = load_scenario(get_scenario_path("scenario_1_liveness"))
        self.assertEqual((scenario.num_steps, scenario.goal), (10, (0.0, 1.5, math.pi / 2)))
        self.assertEqual(scenario.specs, ["F (p_R3 | p_R4)"])
        scenario = load_scenario(get_scenario_path("scenario_2_until"))
        self.assertEqual((scenario.num_steps, scenario.goal), (13, (2.0, 1.5, math.pi / 2)))
        scenario = load_scenario(get_scenario_path("scenario_3_timed"))
        self.assertEqual((scenario.num_steps, scenario.goal), (18, (1.5, 2.2, 3 * math.pi / 4)))
        self.assertEqual(scenario.specs, ["G[7,15] p_R2"])
        scenario = load_scenario(get_scenario_path("stride_adjustment"))
        self.assertEqual(scenario.goal, (3.5, 0.5, 0.0))
        self.assertEqual(scenario.reduced_stride_regions, ["R2"])
        self.assertTrue(load_scenario(get_scenario_path("contact_ordering_corridor")).is_contact_ordering)
