"""
Scenario runner: loads a scenario, builds and solves the footstep model,
verifies the plan and writes plan JSON, SVG and (optionally) LP files.
"""

import argparse
import json
import logging
import math
import os
import sys

import numpy as np

from ltlstep import ltl
from ltlstep.api import (
    Default, ErrorCode, ExitCode, Foot, ItemType, LPProfile, NormRealization, ParamName, PLAN_FORMAT_VERSION,
    SolveStatus, apply_data_on_obj, convert_obj_to_dict, item_format_by_type)
from ltlstep.errors import InfeasibleSpecificationError, PlannerError, ScenarioError
from ltlstep.model import build_model
from ltlstep.model.scenario import load_scenario
from ltlstep.model.trig import TRIG
from ltlstep.solver import SolverConfig
from ltlstep.solver.bnb import branch_and_bound
from ltlstep.solver.lp_format import export_interchange
from ltlstep.utils import math_util, time_util
from ltlstep.utils.log_util import make_short_str
from ltlstep.utils.test_util import set_up_logging

logger = logging.getLogger(__name__)


# Value objects


class ValueObject:
    item_type = None

    def to_json(self, is_stringify=False):
        data = convert_obj_to_dict(self, item_format_by_type[self.item_type])
        if is_stringify:
            data = json.dumps(data, indent=2)
        return data

    def from_json(self, data):
        if isinstance(data, str):
            data = json.loads(data)
        return apply_data_on_obj(self, data, item_format_by_type[self.item_type])


class Error(ValueObject):
    item_type = ItemType.ERROR

    code = None
    message = None

    def __init__(self, code=None, message=None, **kwargs):
        super().__init__()
        self.code = code
        self.message = message or ErrorCode.get_message_by_code(code, **kwargs)

    def __repr__(self) -> str:
        return "<Error code: %s msg: %s>" % (self.code, self.message)

    __str__ = __repr__


class PlanStep(ValueObject):
    item_type = ItemType.STEP

    index = None
    foot = None
    x = None
    y = None
    theta = None
    s = None
    c = None
    region = None

    def __init__(self, index=None, foot=None, x=None, y=None, theta=None, s=None, c=None, region=None):
        super().__init__()
        self.index = index
        self.foot = foot
        self.x = x
        self.y = y
        self.theta = theta
        self.s = s
        self.c = c
        self.region = region

    def __repr__(self):
        return "<PlanStep %s %s (%s, %s, %s) in %s>" % (self.index, self.foot, self.x, self.y, self.theta, self.region)

    @property
    def point(self):
        return self.x, self.y

    def from_json(self, data):
        super().from_json(data)
        self.index = int(self.index)
        for name in (ParamName.X, ParamName.Y, ParamName.THETA, ParamName.S, ParamName.C):
            setattr(self, name, float(getattr(self, name)))
        return self


class Verdict(ValueObject):
    item_type = ItemType.VERDICT

    formula = None
    satisfied = None

    def __init__(self, formula=None, satisfied=None):
        super().__init__()
        self.formula = formula
        self.satisfied = satisfied

    def __repr__(self):
        return "<Verdict %s: %s>" % (self.formula, self.satisfied)


class FootstepPlan(ValueObject):
    item_type = ItemType.PLAN

    version = PLAN_FORMAT_VERSION
    scenario = None
    status = None
    objective = None
    gap = None
    nodes = None

    def __init__(self, scenario=None, status=None, objective=None, gap=None, nodes=None, steps=None, verdicts=None):
        super().__init__()
        self.scenario = scenario
        self.status = status
        self.objective = objective
        self.gap = gap
        self.nodes = nodes
        self.steps = steps or []
        self.verdicts = verdicts or []

    def __repr__(self):
        return "<FootstepPlan %s %s objective: %s steps: %s verdicts: %s>" % (
            self.scenario, self.status, self.objective, len(self.steps),
            [verdict.satisfied for verdict in self.verdicts])

    def to_json(self, is_stringify=False):
        data = super().to_json()
        data[ParamName.STEPS] = [step.to_json() for step in self.steps]
        data[ParamName.VERDICTS] = [verdict.to_json() for verdict in self.verdicts]
        if is_stringify:
            data = json.dumps(data, indent=2) + "\n"
        return data

    def from_json(self, data):
        if isinstance(data, str):
            data = json.loads(data)
        super().from_json(data)
        if self.version != PLAN_FORMAT_VERSION:
            raise ValueError("Unsupported plan version: %s" % (self.version,))
        self.steps = [PlanStep().from_json(item) for item in data.get(ParamName.STEPS) or []]
        self.verdicts = [Verdict().from_json(item) for item in data.get(ParamName.VERDICTS) or []]
        return self


def load_plan(path):
    with open(path) as file:
        return FootstepPlan().from_json(file.read())


def save_plan(plan, path):
    with open(path, "w") as file:
        file.write(plan.to_json(is_stringify=True))
    logger.info("Plan written to %s", path)
    return path


def extract_plan(builder, result):
    """Plan from solved values of a FootstepModelBuilder's model. Verdicts are left empty."""
    scenario, v = builder.scenario, builder.vars
    values = result.values
    steps = []
    for j in v.steps:
        if v.is_contact_ordering:
            foot = Foot.LEFT if values[v.LL[j]] > 0.5 else Foot.RIGHT
        else:
            foot = scenario.foot_of(j)
        region_index = int(np.argmax([values[H[j]] for H in v.H]))
        steps.append(PlanStep(j, foot, float(values[v.x[j]]), float(values[v.y[j]]), float(values[v.theta[j]]),
                              float(values[v.s[j]]), float(values[v.c[j]]), scenario.regions[region_index].name))
    return FootstepPlan(scenario.name, result.status, float(result.objective),
                        None if result.gap is None else float(result.gap), result.node_count, steps)


# Verification


class VerificationReport:
    """Results of re-checking a plan. failures and warnings hold Error objects with ver:* codes."""

    def __init__(self):
        self.verdicts = []
        self.failures = []
        self.warnings = []
        self.objective = None
        self.goal_distance = None
        self.goal_theta_error = None

    def __repr__(self):
        return "<VerificationReport ok: %s failures: %s objective: %s>" % (
            self.is_ok, len(self.failures), self.objective)

    @property
    def is_ok(self):
        return not self.failures

    @property
    def codes(self):
        return sorted({failure.code for failure in self.failures})

    def add_failure(self, code, **kwargs):
        self.failures.append(Error(code, **kwargs))

    def add_warning(self, code, **kwargs):
        self.warnings.append(Error(code, **kwargs))

    @property
    def is_goal_reached(self):
        return (self.goal_distance is not None and self.goal_distance <= Default.GOAL_POSITION_TOL and
                self.goal_theta_error <= Default.GOAL_THETA_TOL)


def get_trace(plan, scenario):
    true_atoms_by_step = []
    for step in plan.steps:
        true_atoms = set()
        for name, (kind, value) in scenario.atoms.items():
            if (kind == ParamName.REGION and step.region == value) or (kind == ParamName.FOOT and step.foot == value):
                true_atoms.add(name)
        true_atoms_by_step.append(true_atoms)
    return ltl.Trace.from_steps(true_atoms_by_step, scenario.atoms)


def compute_objective(plan, scenario):
    poses = np.array([(step.x, step.y, step.theta) for step in plan.steps])
    error = poses[-1] - np.array(scenario.goal)
    result = float(error @ scenario.Q @ error)
    for delta in np.diff(poses, axis=0):
        result += float(delta @ scenario.R @ delta)
    return result


def get_circle_excesses(previous, step, params, is_reduced=False, directions=None):
    """Excess of the stride over every reachability circle (positive means violated).

    directions - polygon directions, None for the exact norm.
    """
    result = []
    for offset, radius in params.circles(step.foot, is_reduced):
        rotated = math_util.rotate(step.c, step.s, offset)
        d = np.array([step.x - previous.x - rotated[0], step.y - previous.y - rotated[1]])
        norm = math.hypot(*d) if directions is None else float(np.max(directions @ d))
        result.append(norm - radius)
    return result


def verify(plan, scenario, norm_realization=None, polygon_sides=None, tol=Default.VERIFY_TOL, is_goal_required=False):
    """
    Re-checks a plan against a scenario. Never raises on a wrong plan.

    The goal enters the model as a cost only, so a final step outside the goal
    tolerance is a warning unless is_goal_required is set.
    """
    report = VerificationReport()
    steps = plan.steps
    if len(steps) != scenario.num_steps:
        report.add_failure(ErrorCode.STEP_COUNT, count=len(steps), expected=scenario.num_steps)
        logger.warning("Plan verification failed: %s", report.failures)
        return report

    norm_realization = norm_realization or scenario.norm_realization
    directions = (math_util.unit_directions(polygon_sides or scenario.polygon_sides)
                  if norm_realization == NormRealization.POLYGON else None)
    params = scenario.reachability
    reduced = set(scenario.reduced_stride_regions)

    # Stance
    for step, pose, foot in zip(steps, scenario.initial_stance, scenario.stance_feet):
        if step.foot != foot or max(abs(a - b) for a, b in zip((step.x, step.y, step.theta), pose)) > tol:
            report.add_failure(ErrorCode.STANCE_VIOLATED, step=step.index)

    for j, step in enumerate(steps, 1):
        previous = steps[j - 2] if j > 1 else None
        # Feet
        if (previous and step.foot == previous.foot) or (
                not scenario.is_contact_ordering and step.foot != scenario.foot_of(j)):
            report.add_failure(ErrorCode.FOOT_ORDER_VIOLATED, step=j, foot=step.foot)
        # Region
        region = scenario.get_region(step.region)
        if region is None:
            report.add_failure(ErrorCode.REGION_VIOLATED, step=j, row=None, region=step.region, violation=None)
        else:
            violations = region.row_violations(step.point)
            row = int(np.argmax(violations))
            if violations[row] > tol:
                report.add_failure(ErrorCode.REGION_VIOLATED, step=j, row=row + 1, region=step.region,
                                   violation=float(violations[row]))
        # Trig
        s, c = TRIG.evaluate(step.theta)
        if abs(step.s - s) > tol or abs(step.c - c) > tol:
            report.add_failure(ErrorCode.TRIG_VIOLATED, step=j, s=step.s, c=step.c, theta=step.theta)
        if previous is None:
            continue
        # Rate
        delta = abs(step.theta - previous.theta)
        if delta > Default.THETA_RATE_LIMIT + tol:
            report.add_failure(ErrorCode.RATE_VIOLATED, step=j, delta=delta, limit=Default.THETA_RATE_LIMIT)
        # Reachability (steps 1 and 2 are the stance)
        if j < 3:
            continue
        circle_sets = [(False, ErrorCode.REACH_VIOLATED)]
        if step.region in reduced:
            circle_sets.append((True, ErrorCode.STRIDE_VIOLATED))
        for is_reduced, code in circle_sets:
            excesses = get_circle_excesses(previous, step, params, is_reduced, directions)
            for i, excess in enumerate(excesses, 1):
                if excess > tol:
                    report.add_failure(code, step=j, circle=i, region=step.region, violation=excess)

    # Specifications
    trace = get_trace(plan, scenario)
    for spec, formula in zip(scenario.specs, scenario.formulas):
        is_satisfied = ltl.evaluate(formula, trace, 1)
        report.verdicts.append(Verdict(spec, bool(is_satisfied)))
        if not is_satisfied:
            report.add_failure(ErrorCode.SPEC_VIOLATED, formula=spec)

    # Objective
    report.objective = compute_objective(plan, scenario)
    if plan.objective is not None and abs(plan.objective - report.objective) > tol * max(1.0, abs(report.objective)):
        report.add_failure(ErrorCode.OBJECTIVE_MISMATCH, objective=plan.objective, recomputed=report.objective)

    # Goal
    last = steps[-1]
    goal_x, goal_y, goal_theta = scenario.goal
    report.goal_distance = math.hypot(last.x - goal_x, last.y - goal_y)
    report.goal_theta_error = abs(last.theta - goal_theta)
    logger.info("Goal distance: %.4f m, orientation error: %.4f rad", report.goal_distance, report.goal_theta_error)
    if not report.is_goal_reached:
        add = report.add_failure if is_goal_required else report.add_warning
        add(ErrorCode.GOAL_MISSED, distance=round(report.goal_distance, 4), theta_error=round(report.goal_theta_error, 4),
            position_tol=Default.GOAL_POSITION_TOL, theta_tol=Default.GOAL_THETA_TOL)

    if report.warnings:
        logger.warning("Plan verification warnings: %s", make_short_str(str(report.warnings), 1000))
    if report.failures:
        logger.warning("Plan verification failed: %s", make_short_str(str(report.failures), 1000))
    else:
        logger.info("Plan verified: %s", report)
    return report


# Running


def make_parser():
    parser = argparse.ArgumentParser(prog="plan", description="LTL-constrained footstep planner")
    parser.add_argument("scenario", help="scenario JSON file")
    parser.add_argument("--out", default="out", help="output directory (default: %(default)s)")
    parser.add_argument("--export-lp", action="store_true", help="write the model as an LP file")
    parser.add_argument("--lp-profile", choices=list(LPProfile.realization_by_profile), default=LPProfile.LINEAR,
                        help="norm rows of the exported model (default: %(default)s)")
    parser.add_argument("--threads", type=int, help="branch and bound workers")
    parser.add_argument("--time-limit", type=float, help="seconds")
    parser.add_argument("--gap", type=float, help="relative optimality gap")
    parser.add_argument("--linearize-k", type=int, help="polygon sides of linearized norm rows")
    parser.add_argument("--verify-only", metavar="PLAN", help="verify an existing plan JSON instead of solving")
    parser.add_argument("--require-goal", action="store_true",
                        help="fail verification if the final step misses the goal tolerance")
    parser.add_argument("--no-svg", action="store_true", help="do not render the plan")
    parser.add_argument("--log-level", default="INFO", help="(default: %(default)s)")
    return parser


def _write_outputs(plan, scenario, out_dir, is_svg=True):
    os.makedirs(out_dir, exist_ok=True)
    save_plan(plan, os.path.join(out_dir, "%s.plan.json" % scenario.name))
    if is_svg:
        # (Imported here: matplotlib is needed only for figures)
        from ltlstep.cli.render import render_svg
        render_svg(plan, scenario, os.path.join(out_dir, "%s.svg" % scenario.name))


def _export_lp(builder, scenario, out_dir, profile, polygon_sides):
    os.makedirs(out_dir, exist_ok=True)
    model = builder.model
    if LPProfile.realization_by_profile[profile] != builder.norm_realization:
        model = build_model(scenario, LPProfile.realization_by_profile[profile], polygon_sides).model
    return export_interchange(model, os.path.join(out_dir, "%s.%s.lp" % (scenario.name, profile)), profile)


def _print_errors(report):
    # One JSON object per line: failures first, then warnings
    for error in report.failures + report.warnings:
        print(json.dumps(error.to_json()), file=sys.stderr)


def run_verify_only(args, scenario):
    try:
        plan = load_plan(args.verify_only)
    except (OSError, ValueError, TypeError) as error:
        logger.error("Can't read plan %s: %s", args.verify_only, error)
        return ExitCode.ERROR
    report = verify(plan, scenario, polygon_sides=args.linearize_k, is_goal_required=args.require_goal)
    _print_errors(report)
    return ExitCode.OK if report.is_ok else ExitCode.VERIFICATION_FAILED


def run(args):
    """Runs one scenario. Returns an ExitCode value."""
    try:
        scenario = load_scenario(args.scenario)
    except ScenarioError as error:
        logger.error("Scenario %s is invalid: %s", args.scenario, error.message)
        print("%s: %s" % (args.scenario, error.message), file=sys.stderr)
        return ExitCode.ERROR
    if args.verify_only:
        return run_verify_only(args, scenario)
    if args.linearize_k is not None and args.linearize_k < 3:
        print("--linearize-k must be >= 3", file=sys.stderr)
        return ExitCode.ERROR

    timing_key = "run_%s" % scenario.name
    time_util.start_timings(timing_key)
    try:
        # Branch and bound needs linear rows, so the polygon realization is always solved
        builder = build_model(scenario, NormRealization.POLYGON, args.linearize_k)
        if args.export_lp:
            _export_lp(builder, scenario, args.out, args.lp_profile, args.linearize_k)
        config = SolverConfig(**scenario.solver_settings).copy(
            **{key: value for key, value in ((ParamName.THREADS, args.threads),
                                             (ParamName.TIME_LIMIT, args.time_limit),
                                             (ParamName.GAP, args.gap)) if value is not None})
        result = branch_and_bound(builder.model, config)
    except InfeasibleSpecificationError as error:
        logger.warning("Specification can never hold: %s", error.message)
        print(error.message, file=sys.stderr)
        return ExitCode.INFEASIBLE
    except PlannerError as error:
        logger.error("Can't solve %s: %s", scenario.name, error)
        print(error.message, file=sys.stderr)
        return ExitCode.ERROR
    except OSError as error:
        logger.error("Can't write outputs: %s", error)
        return ExitCode.ERROR
    time_util.stop_timings(timing_key)

    exit_code = ExitCode.by_status[result.status]
    if result.status not in SolveStatus.with_solution:
        logger.info("No plan for %s: %s. %s", scenario.name, result.status, time_util.get_timings_str(timing_key))
        print(result.status, file=sys.stderr)
        return exit_code

    plan = extract_plan(builder, result)
    report = verify(plan, scenario, NormRealization.POLYGON, args.linearize_k, is_goal_required=args.require_goal)
    plan.verdicts = report.verdicts
    try:
        _write_outputs(plan, scenario, args.out, not args.no_svg)
    except OSError as error:
        logger.error("Can't write outputs: %s", error)
        return ExitCode.ERROR
    logger.info("Plan for %s: %r. %s", scenario.name, plan, time_util.get_timings_str(timing_key))
    _print_errors(report)
    if not report.is_ok:
        return ExitCode.VERIFICATION_FAILED
    return exit_code


def main(argv=None):
    args = make_parser().parse_args(argv)
    set_up_logging(level=args.log_level)
    return run(args)
