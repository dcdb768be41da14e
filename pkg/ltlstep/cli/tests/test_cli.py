import contextlib
import io
import json
import math
import os
import re
import tempfile
from unittest import skipUnless

import numpy as np

from ltlstep.api import ErrorCode, ExitCode, Foot, item_format_by_type, ItemType, LPProfile, ParamName, SolveStatus
from ltlstep.cli import (
    compute_objective, extract_plan, FootstepPlan, get_circle_excesses, get_trace, load_plan, main, PlanStep,
    save_plan, verify)
from ltlstep.model import build_model
from ltlstep.model.scenario import load_scenario, parse_scenario
from ltlstep.model.trig import TRIG
from ltlstep.solver import SolverConfig
from ltlstep.solver.bnb import branch_and_bound
from ltlstep.solver.lp_format import read_interchange
from ltlstep.utils import dict_util
from ltlstep.utils.math_util import unit_directions
from ltlstep.utils.test_util import get_scenario_path, is_slow_tests_enabled, PlanTestCase

QUIET = ["--log-level", "WARNING"]


def box(x_lo, x_hi, y_lo, y_hi):
    return [[x_lo, y_lo], [x_hi, y_lo], [x_hi, y_hi], [x_lo, y_hi]]


def make_walk_data(**changes):
    """Straight corridor along x split into two regions at x = 0.5."""
    data = {
        ParamName.NAME: "walk",
        ParamName.NUM_STEPS: 8,
        ParamName.GOAL: {ParamName.X: 0.9, ParamName.Y: 0.1, ParamName.THETA: 0},
        ParamName.INITIAL_STANCE: [
            {ParamName.X: 0, ParamName.Y: -0.1, ParamName.THETA: 0},
            {ParamName.X: 0, ParamName.Y: 0.1, ParamName.THETA: 0},
        ],
        ParamName.REGIONS: [
            {ParamName.NAME: "R1", ParamName.VERTICES: box(-0.5, 0.5, -0.5, 0.5)},
            {ParamName.NAME: "R2", ParamName.VERTICES: box(0.5, 3.0, -0.5, 0.5)},
        ],
        ParamName.SPECS: ["F p_R2"],
    }
    return dict_util.update_dict_deep(data, changes)


def make_walk_scenario(**changes):
    return parse_scenario(make_walk_data(**changes))


def make_walk_plan(scenario, stride=0.15):
    # Right feet at y = -0.1, left feet at y = 0.1, facing +x
    steps = []
    for j in range(1, scenario.num_steps + 1):
        x = stride * max(0, j - 2)
        y = -0.1 if j % 2 else 0.1
        s, c = TRIG.evaluate(0.0)
        region = scenario.regions[scenario.find_region_index((x, y))].name
        steps.append(PlanStep(j, scenario.foot_of(j), x, y, 0.0, s, c, region))
    plan = FootstepPlan(scenario.name, SolveStatus.OPTIMAL, None, 0.0, 1, steps)
    return update_objective(plan, scenario)


def update_objective(plan, scenario):
    plan.objective = compute_objective(plan, scenario)
    return plan


class TestFootstepPlan(PlanTestCase):

    def test_to_json(self):
        scenario = make_walk_scenario()
        plan = make_walk_plan(scenario)
        plan.verdicts = verify(plan, scenario).verdicts
        data = plan.to_json()
        self.assertEqual(list(data), item_format_by_type[ItemType.PLAN])
        self.assertEqual(data[ParamName.VERSION], 1)
        self.assertEqual(list(data[ParamName.STEPS][0]), item_format_by_type[ItemType.STEP])
        self.assertEqual(data[ParamName.STEPS][2], {
            ParamName.INDEX: 3, ParamName.FOOT: Foot.RIGHT, ParamName.X: 0.15, ParamName.Y: -0.1,
            ParamName.THETA: 0.0, ParamName.S: 0.0, ParamName.C: 1.0, ParamName.REGION: "R1"})
        self.assertEqual(data[ParamName.VERDICTS], [{ParamName.FORMULA: "F p_R2", ParamName.SATISFIED: True}])
        self.assertTrue(dict_util.check_is_sub_data(data, {
            ParamName.SCENARIO: "walk", ParamName.STATUS: SolveStatus.OPTIMAL, ParamName.NODES: 1,
            ParamName.STEPS: [{ParamName.INDEX: 1, ParamName.FOOT: Foot.RIGHT}, {ParamName.INDEX: 2, ParamName.FOOT: Foot.LEFT}],
        }))
        # No wall clock fields
        self.assertNotIn("time", json.dumps(data))

    def test_from_json(self):
        scenario = make_walk_scenario()
        plan = make_walk_plan(scenario)
        plan.verdicts = verify(plan, scenario).verdicts
        text = plan.to_json(is_stringify=True)

        loaded = FootstepPlan().from_json(text)
        self.assertPlanIsValid(loaded, scenario)
        self.assertEqual(loaded.to_json(is_stringify=True), text)

        data = json.loads(text)
        data[ParamName.VERSION] = 2
        with self.assertRaises(ValueError):
            FootstepPlan().from_json(data)

    def test_save_and_load(self):
        scenario = make_walk_scenario()
        plan = make_walk_plan(scenario)
        with tempfile.TemporaryDirectory() as directory:
            path = save_plan(plan, os.path.join(directory, "walk.plan.json"))
            loaded = load_plan(path)
        self.assertEqual(loaded.to_json(), plan.to_json())


class TestVerify(PlanTestCase):

    def assertHasFailure(self, report, code, step=None):
        self.assertIn(code, report.codes, report.failures)
        if step is not None:
            self.assertTrue(any(re.search(r"Step %s\b" % step, failure.message) for failure in report.failures
                                if failure.code == code), report.failures)

    def test_valid(self):
        scenario = make_walk_scenario()
        plan = make_walk_plan(scenario)

        report = verify(plan, scenario)

        self.assertTrue(report.is_ok, report.failures)
        self.assertEqual([verdict.satisfied for verdict in report.verdicts], [True])
        self.assertAlmostEqual(report.objective, plan.objective)
        self.assertAlmostEqual(report.goal_distance, 0)
        self.assertEqual(report.goal_theta_error, 0)

    def test_trace(self):
        scenario = make_walk_scenario()
        trace = get_trace(make_walk_plan(scenario), scenario)
        self.assertEqual(trace.length, 8)
        self.assertEqual(trace.values("p_R1"), (True,) * 5 + (False,) * 3)
        self.assertEqual(trace.values("p_R2"), (False,) * 5 + (True,) * 3)

    def test_moved_step(self):
        scenario = make_walk_scenario()
        plan = make_walk_plan(scenario)
        plan.steps[6].y = 0.8
        update_objective(plan, scenario)

        report = verify(plan, scenario)

        self.assertFalse(report.is_ok)
        self.assertHasFailure(report, ErrorCode.REGION_VIOLATED, 7)
        # Upper edge by 0.3
        row = int(np.argmax(scenario.get_region("R2").A[:, 1])) + 1
        failure = [failure for failure in report.failures if failure.code == ErrorCode.REGION_VIOLATED][0]
        self.assertIn("violates row %s of region R2 by 0.3" % row, failure.message)

    def test_rate_limit(self):
        scenario = make_walk_scenario()
        plan = make_walk_plan(scenario)
        step = plan.steps[4]
        step.theta = math.pi / 4
        step.s, step.c = TRIG.evaluate(step.theta)
        update_objective(plan, scenario)

        report = verify(plan, scenario)

        self.assertHasFailure(report, ErrorCode.RATE_VIOLATED, 5)
        self.assertHasFailure(report, ErrorCode.RATE_VIOLATED, 6)
        self.assertNotIn(ErrorCode.TRIG_VIOLATED, report.codes)

    def test_trig(self):
        scenario = make_walk_scenario()
        plan = make_walk_plan(scenario)
        plan.steps[3].c = math.cos(0.1)
        plan.steps[3].theta = 0.1

        report = verify(plan, scenario)

        self.assertHasFailure(report, ErrorCode.TRIG_VIOLATED, 4)

    def test_reachability(self):
        scenario = make_walk_scenario()
        plan = make_walk_plan(scenario)
        for step in plan.steps[7:]:
            step.x += 0.4
        update_objective(plan, scenario)

        report = verify(plan, scenario)

        self.assertHasFailure(report, ErrorCode.REACH_VIOLATED, 8)
        self.assertNotIn(ErrorCode.STRIDE_VIOLATED, report.codes)

    def test_reduced_stride(self):
        scenario = make_walk_scenario(modes={ParamName.REDUCED_STRIDE_REGIONS: ["R2"]})
        plan = make_walk_plan(scenario)
        self.assertTrue(verify(plan, scenario).is_ok)

        # 0.25 m forward fits the nominal circles only
        plan.steps[7].x = plan.steps[6].x + 0.25
        update_objective(plan, scenario)
        report = verify(plan, scenario)

        self.assertEqual(report.codes, [ErrorCode.STRIDE_VIOLATED])
        self.assertHasFailure(report, ErrorCode.STRIDE_VIOLATED, 8)
        directions = unit_directions(scenario.polygon_sides)
        params = scenario.reachability
        self.assertLessEqual(max(get_circle_excesses(plan.steps[6], plan.steps[7], params, False, directions)), 0)
        self.assertGreater(max(get_circle_excesses(plan.steps[6], plan.steps[7], params, True, directions)), 0)
        self.assertGreater(max(get_circle_excesses(plan.steps[6], plan.steps[7], params, True)), 0)

    def test_feet(self):
        scenario = make_walk_scenario()
        plan = make_walk_plan(scenario)
        plan.steps[3].foot = Foot.RIGHT

        report = verify(plan, scenario)

        self.assertHasFailure(report, ErrorCode.FOOT_ORDER_VIOLATED, 4)

    def test_stance(self):
        scenario = make_walk_scenario()
        plan = make_walk_plan(scenario)
        plan.steps[0].x = 0.05
        update_objective(plan, scenario)

        report = verify(plan, scenario)

        self.assertHasFailure(report, ErrorCode.STANCE_VIOLATED, 1)

    def test_specification(self):
        scenario = make_walk_scenario(specs=["F p_R2", "G p_R1"])
        plan = make_walk_plan(scenario)

        report = verify(plan, scenario)

        self.assertEqual([verdict.satisfied for verdict in report.verdicts], [True, False])
        self.assertEqual(report.codes, [ErrorCode.SPEC_VIOLATED])
        self.assertIn("G p_R1", report.failures[0].message)

    def test_objective(self):
        scenario = make_walk_scenario()
        plan = make_walk_plan(scenario)
        plan.objective += 1

        report = verify(plan, scenario)

        self.assertEqual(report.codes, [ErrorCode.OBJECTIVE_MISMATCH])

    def test_goal(self):
        scenario = make_walk_scenario(**{ParamName.GOAL: {ParamName.X: 1.2}})
        plan = make_walk_plan(scenario)

        report = verify(plan, scenario)

        self.assertTrue(report.is_ok, report.failures)
        self.assertFalse(report.is_goal_reached)
        self.assertAlmostEqual(report.goal_distance, 0.3)
        self.assertEqual([warning.code for warning in report.warnings], [ErrorCode.GOAL_MISSED])
        self.assertEqual(report.warnings[0].to_json(), {
            ParamName.CODE: ErrorCode.GOAL_MISSED, ParamName.MESSAGE: report.warnings[0].message})
        self.assertIn("0.3 m", report.warnings[0].message)

        report = verify(plan, scenario, is_goal_required=True)
        self.assertFalse(report.is_ok)
        self.assertEqual(report.codes, [ErrorCode.GOAL_MISSED])
        self.assertEqual(report.warnings, [])

        # Orientation alone
        scenario = make_walk_scenario(**{ParamName.GOAL: {ParamName.THETA: 0.2}})
        report = verify(make_walk_plan(scenario), scenario, is_goal_required=True)
        self.assertAlmostEqual(report.goal_distance, 0)
        self.assertEqual(report.codes, [ErrorCode.GOAL_MISSED])

        scenario = make_walk_scenario()
        report = verify(make_walk_plan(scenario), scenario, is_goal_required=True)
        self.assertTrue(report.is_ok, report.failures)
        self.assertTrue(report.is_goal_reached)
        self.assertEqual(report.warnings, [])

    def test_step_count(self):
        scenario = make_walk_scenario()
        plan = make_walk_plan(scenario)
        plan.steps.pop()

        report = verify(plan, scenario)

        self.assertEqual(report.codes, [ErrorCode.STEP_COUNT])
        self.assertEqual(report.verdicts, [])


class TestExtractPlan(PlanTestCase):

    def test_tiny_corridor(self):
        scenario = load_scenario(get_scenario_path("tiny_corridor"))
        builder = build_model(scenario)
        result = branch_and_bound(builder.model, SolverConfig(threads=1))
        self.assertSolveResultIsValid(result, builder.model)

        plan = extract_plan(builder, result)
        report = verify(plan, scenario)
        plan.verdicts = report.verdicts

        self.assertTrue(report.is_ok, report.failures)
        self.assertPlanIsValid(plan, scenario)
        self.assertEqual([step.foot for step in plan.steps], [Foot.RIGHT, Foot.LEFT] * 2)
        self.assertEqual(plan.steps[-1].region, "R2")
        self.assertAlmostEqual(report.objective, result.objective, delta=1e-6 * max(1.0, result.objective))
        self.assertEqual(plan.nodes, result.node_count)

    def test_short_walk(self):
        # Two strides per foot are enough to put the last footstep on the goal
        scenario = load_scenario(get_scenario_path("short_walk"))
        builder = build_model(scenario)
        result = branch_and_bound(builder.model, SolverConfig(**scenario.solver_settings))
        self.assertSolveResultIsValid(result, builder.model)

        plan = extract_plan(builder, result)
        report = verify(plan, scenario)
        plan.verdicts = report.verdicts

        self.assertTrue(report.is_ok, report.failures)
        self.assertPlanIsValid(plan, scenario)
        self.assertGoalReached(plan, scenario)
        self.assertEqual(plan.steps[-1].region, "R2")

    def test_liveness_search_continues(self):
        # Empty node relaxations deep in the search are pruned, never abort it
        scenario = load_scenario(get_scenario_path("scenario_1_liveness"))
        builder = build_model(scenario)
        result = branch_and_bound(builder.model, SolverConfig(threads=1, node_limit=40))
        self.assertIn(result.status, (SolveStatus.OPTIMAL, SolveStatus.TIME_LIMIT_INCUMBENT,
                                      SolveStatus.TIME_LIMIT_NO_INCUMBENT))
        self.assertGreater(result.node_count, 1)
        if result.values is not None:
            self.assertSolveResultIsValid(result, builder.model, result.status)


class TestRun(PlanTestCase):

    def setUp(self):
        super().setUp()
        self.directory = tempfile.TemporaryDirectory()
        self.out = self.directory.name

    def tearDown(self):
        self.directory.cleanup()
        super().tearDown()

    def run_plan(self, name, *flags, out=None):
        return main([get_scenario_path(name), "--out", out or self.out] + QUIET + list(flags))

    def write_scenario(self, data):
        path = os.path.join(self.out, "%s.json" % data[ParamName.NAME])
        with open(path, "w") as file:
            json.dump(data, file)
        return path

    def test_tiny_corridor(self):
        exit_code = self.run_plan("tiny_corridor", "--export-lp", "--threads", "1")

        self.assertEqual(exit_code, ExitCode.OK)
        scenario = load_scenario(get_scenario_path("tiny_corridor"))
        plan = load_plan(os.path.join(self.out, "tiny_corridor.plan.json"))
        self.assertPlanIsValid(plan, scenario)
        self.assertTrue(os.path.exists(os.path.join(self.out, "tiny_corridor.svg")))
        model = read_interchange(os.path.join(self.out, "tiny_corridor.linear.lp"))
        self.assertEqual(model.canonical(), build_model(scenario).model.canonical())

    def test_quadratic_export(self):
        exit_code = self.run_plan("tiny_corridor", "--export-lp", "--lp-profile", LPProfile.QUADRATIC, "--no-svg")

        self.assertEqual(exit_code, ExitCode.OK)
        model = read_interchange(os.path.join(self.out, "tiny_corridor.quadratic.lp"))
        self.assertTrue(model.quadratic_rows)
        self.assertFalse(os.path.exists(os.path.join(self.out, "tiny_corridor.svg")))

    def test_determinism(self):
        with tempfile.TemporaryDirectory() as other:
            self.assertEqual(self.run_plan("tiny_corridor", "--threads", "1"), ExitCode.OK)
            self.assertEqual(self.run_plan("tiny_corridor", "--threads", "1", out=other), ExitCode.OK)
            for filename in ("tiny_corridor.plan.json", "tiny_corridor.svg"):
                with open(os.path.join(self.out, filename), "rb") as first, \
                        open(os.path.join(other, filename), "rb") as second:
                    self.assertEqual(first.read(), second.read(), filename)

    def run_and_read_errors(self, *args):
        stderr = io.StringIO()
        with contextlib.redirect_stderr(stderr):
            exit_code = main(list(args) + QUIET)
        errors = [json.loads(line) for line in stderr.getvalue().splitlines() if line.startswith("{")]
        return exit_code, errors

    def test_verify_only(self):
        self.assertEqual(self.run_plan("tiny_corridor", "--no-svg"), ExitCode.OK)
        path = os.path.join(self.out, "tiny_corridor.plan.json")

        self.assertEqual(self.run_plan("tiny_corridor", "--verify-only", path), ExitCode.OK)

        plan = load_plan(path)
        plan.steps[-1].theta += math.pi / 4
        save_plan(plan, path)
        exit_code, errors = self.run_and_read_errors(get_scenario_path("tiny_corridor"), "--verify-only", path)
        self.assertEqual(exit_code, ExitCode.VERIFICATION_FAILED)
        self.assertTrue(errors)
        for error in errors:
            self.assertEqual(list(error), item_format_by_type[ItemType.ERROR])
            self.assertTrue(error[ParamName.CODE].startswith("ver:"), error)
        self.assertIn(ErrorCode.RATE_VIOLATED, [error[ParamName.CODE] for error in errors])
        self.assertEqual(self.run_plan("tiny_corridor", "--verify-only", path + ".missing"), ExitCode.ERROR)

    def test_require_goal(self):
        data = make_walk_data(**{ParamName.GOAL: {ParamName.X: 1.2}})
        scenario_path = self.write_scenario(data)
        plan_path = save_plan(make_walk_plan(parse_scenario(data)), os.path.join(self.out, "walk.plan.json"))

        exit_code, errors = self.run_and_read_errors(scenario_path, "--verify-only", plan_path)
        self.assertEqual(exit_code, ExitCode.OK)
        self.assertEqual([error[ParamName.CODE] for error in errors], [ErrorCode.GOAL_MISSED])

        exit_code, errors = self.run_and_read_errors(scenario_path, "--verify-only", plan_path, "--require-goal")
        self.assertEqual(exit_code, ExitCode.VERIFICATION_FAILED)
        self.assertEqual([error[ParamName.CODE] for error in errors], [ErrorCode.GOAL_MISSED])

    def test_accessibility(self):
        self.assertEqual(self.run_plan("accessibility_unreachable", "--no-svg"), ExitCode.INFEASIBLE)
        self.assertFalse(os.path.exists(os.path.join(self.out, "accessibility_unreachable.plan.json")))

        self.assertEqual(self.run_plan("accessibility_reachable", "--no-svg"), ExitCode.OK)
        scenario = load_scenario(get_scenario_path("accessibility_reachable"))
        plan = load_plan(os.path.join(self.out, "accessibility_reachable.plan.json"))
        self.assertPlanIsValid(plan, scenario)
        self.assertIn("R2", [step.region for step in plan.steps])

    def test_unreachable_by_step_length(self):
        # Three free steps can't cover the gap between the stance and R2
        scenario = load_scenario(get_scenario_path("accessibility_unreachable"))
        gap = scenario.get_region("R2").box[0][0] - max(pose[0] for pose in scenario.initial_stance)
        self.assertGreater(gap, (scenario.num_steps - 2) * scenario.reachability.max_step_length())

    def test_empty_window(self):
        with open(get_scenario_path("tiny_corridor")) as file:
            data = json.load(file)
        data[ParamName.NAME] = "never"
        data[ParamName.SPECS] = ["F[7,9] p_R2"]

        self.assertEqual(main([self.write_scenario(data), "--out", self.out] + QUIET), ExitCode.INFEASIBLE)

    def test_wrong_scenario(self):
        with open(get_scenario_path("tiny_corridor")) as file:
            data = json.load(file)
        data[ParamName.NAME] = "unknown_atom"
        data[ParamName.SPECS] = ["F p_R9"]
        self.assertEqual(main([self.write_scenario(data), "--out", self.out] + QUIET), ExitCode.ERROR)

        self.assertEqual(main([os.path.join(self.out, "missing.json"), "--out", self.out] + QUIET), ExitCode.ERROR)
        self.assertEqual(self.run_plan("tiny_corridor", "--linearize-k", "2"), ExitCode.ERROR)

    def test_time_limit(self):
        exit_code = self.run_plan("scenario_1_liveness", "--time-limit", "0", "--no-svg")
        self.assertEqual(exit_code, ExitCode.TIME_LIMIT)


@skipUnless(is_slow_tests_enabled(), "Set IS_SLOW_TESTS_ENABLED in settings.py")
class TestCorpus(PlanTestCase):

    def setUp(self):
        super().setUp()
        self.directory = tempfile.TemporaryDirectory()
        self.out = self.directory.name

    def tearDown(self):
        self.directory.cleanup()
        super().tearDown()

    def solve(self, name):
        exit_code = main([get_scenario_path(name), "--out", self.out, "--threads", "1"] + QUIET)
        self.assertEqual(exit_code, ExitCode.OK, name)
        scenario = load_scenario(get_scenario_path(name))
        plan = load_plan(os.path.join(self.out, "%s.plan.json" % name))
        self.assertPlanIsValid(plan, scenario)
        self.assertTrue(verify(plan, scenario).is_ok)
        return plan, scenario

    def test_scenario_1(self):
        plan, scenario = self.solve("scenario_1_liveness")
        self.assertGoalReached(plan, scenario)
        self.assertTrue({"R3", "R4"} & {step.region for step in plan.steps})

    def test_scenario_2(self):
        plan, scenario = self.solve("scenario_2_until")
        self.assertGoalReached(plan, scenario)
        regions = [step.region for step in plan.steps]
        first = regions.index("R3")
        self.assertTrue(all(region in ("R1", "R2") for region in regions[:first]))
        # 13 numbered markers
        with open(os.path.join(self.out, "scenario_2_until.svg")) as file:
            self.assertEqual(file.read().count('id="footstep_'), 13)

    def test_scenario_3(self):
        plan, scenario = self.solve("scenario_3_timed")
        self.assertGoalReached(plan, scenario)
        self.assertEqual({step.region for step in plan.steps[6:15]}, {"R2"})

    def test_stride_adjustment(self):
        plan, scenario = self.solve("stride_adjustment")
        directions = unit_directions(scenario.polygon_sides)
        params = scenario.reachability
        is_reduced_exceeded = False
        for previous, step in zip(plan.steps[1:], plan.steps[2:]):
            excess = max(get_circle_excesses(previous, step, params, True, directions))
            if step.region == "R2":
                self.assertLessEqual(excess, 1e-6)
            elif excess > 1e-6:
                is_reduced_exceeded = True
        self.assertTrue(is_reduced_exceeded)

    def test_contact_ordering(self):
        plan, scenario = self.solve("contact_ordering_corridor")
        feet = [step.foot for step in plan.steps]
        self.assertTrue(all(a != b for a, b in zip(feet, feet[1:])))

        fixed_plan, _ = self.solve("contact_ordering_corridor_fixed")
        self.assertAlmostEqual(plan.objective, fixed_plan.objective,
                               delta=1e-4 * max(1.0, abs(fixed_plan.objective)))
