"""
Footstep planning model: a sequence of N footsteps f_j = (x_j, y_j, theta_j)
placed in convex regions, each reachable from the previous one, with a
quadratic cost of reaching the goal and of stride lengths.

Steps 1 and 2 are the initial double-support stance and are pinned.
Sine and cosine of theta_j are replaced by the piecewise linear tables
of model.trig selected by binaries S and C. Region membership is selected
by binaries H, and region atoms of LTL specifications are bound to rows of H.
"""

import logging
import math
import re

import numpy as np

from ltlstep import ltl
from ltlstep.api import Default, ErrorCode, Foot, NormRealization, ParamName, Sense
from ltlstep.encoder import AtomBinding, EncodingContext, LTLEncoder
from ltlstep.errors import LTLSyntaxError, ScenarioError
from ltlstep.ltl.parser import parse
from ltlstep.model.trig import TRIG
from ltlstep.solver import ModelIR
from ltlstep.utils import math_util, time_util
from ltlstep.utils.log_util import format_names

MODEL_NAME_INVALID_CHARS = re.compile(r"[^A-Za-z0-9_.]")


def make_model_name(name):
    result = MODEL_NAME_INVALID_CHARS.sub("_", name or "")
    if not result:
        return "footsteps"
    return result if re.match(r"[A-Za-z_]", result) else "_" + result


def get_region_atom_name(region_name):
    return "p_%s" % region_name


FOOT_ATOM_NAMES = {
    Foot.LEFT: "p_lleg",
    Foot.RIGHT: "p_rleg",
}


# Domain types


class Region:
    """Convex polygon {p : A p <= b} with outward unit normals in A."""

    def __init__(self, name, A, b, vertices=None, path=ParamName.REGIONS):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.asarray(b, dtype=float).ravel()
        if A.shape[1] == 3:
            # Rows over (x, y, theta): theta column must be zero
            if np.any(A[:, 2] != 0):
                raise ScenarioError(path, "rows must not constrain theta", ErrorCode.SCENARIO_REGION, name=name)
            A = A[:, :2]
        if A.shape[1] != 2 or len(A) != len(b) or not len(b):
            raise ScenarioError(path, "A must be k x 2 and b of length k", ErrorCode.SCENARIO_REGION, name=name)
        if not np.all(np.isfinite(A)) or not np.all(np.isfinite(b)):
            raise ScenarioError(path, "rows must be finite", ErrorCode.SCENARIO_REGION, name=name)
        box = math_util.bounding_box(A, b)
        if box is None:
            raise ScenarioError(path, "polygon is empty or unbounded", ErrorCode.SCENARIO_REGION, name=name)
        if vertices is None:
            center, radius = math_util.chebyshev_center(A, b)
            if center is None or radius <= 1e-9:
                raise ScenarioError(path, "polygon has empty interior", ErrorCode.SCENARIO_REGION, name=name)
            vertices = math_util.vertices_from_halfspaces(A, b, center)

        self.name = name
        self.A = A
        self.b = b
        self.vertices = np.asarray(vertices, dtype=float)
        self.box = box

    @classmethod
    def from_vertices(cls, name, vertices, path=ParamName.REGIONS):
        points = np.asarray(vertices, dtype=float)
        if points.ndim != 2 or points.shape[1] != 2 or len(points) < 3:
            raise ScenarioError(path, "at least 3 vertices (x, y) are required",
                                ErrorCode.SCENARIO_REGION, name=name)
        if not np.all(np.isfinite(points)):
            raise ScenarioError(path, "vertices must be finite", ErrorCode.SCENARIO_REGION, name=name)
        if math_util.polygon_signed_area(points) < 0:
            raise ScenarioError(path, "vertices must be in counterclockwise order", ErrorCode.SCENARIO_REGION, name=name)
        if not math_util.is_convex_ccw(points):
            raise ScenarioError(path, "vertices must form a convex polygon in counterclockwise order",
                                ErrorCode.SCENARIO_REGION, name=name)
        A, b = math_util.halfspaces_from_vertices(points)
        return cls(name, A, b, points, path)

    def __repr__(self):
        return "<Region %s rows: %s box: %s>" % (self.name, len(self.b), [list(v) for v in self.box])

    @property
    def row_count(self):
        return len(self.b)

    def row_violations(self, point):
        # A p - b (positive means violated)
        return self.A @ np.asarray(point[:2], dtype=float) - self.b

    def contains(self, point, tol=1e-9):
        return bool(np.all(self.row_violations(point) <= tol))


class ReachabilityParams:
    """Two circles offset from the previous foot, given for a left foot landing.

    Right foot landings use the y-mirrored offsets. The reduced set is used
    for strides landing in stride-adjustment regions.
    """

    def __init__(self, p1=Default.P1, p2=Default.P2, r1=Default.R1, r2=Default.R2, reduced=None,
                 path=ParamName.REACHABILITY):
        self.offsets = (_to_point(p1), _to_point(p2))
        self.radii = (float(r1), float(r2))
        if reduced is None:
            target = Default.REDUCED_OFFSET_TARGET
            shift = Default.REDUCED_OFFSET_SHIFT
            reduced = {
                ParamName.P1: [p + shift * (t - p) for p, t in zip(self.offsets[0], target)],
                ParamName.P2: [p + shift * (t - p) for p, t in zip(self.offsets[1], target)],
                ParamName.R1: self.radii[0] * Default.REDUCED_RADIUS_SCALE,
                ParamName.R2: self.radii[1] * Default.REDUCED_RADIUS_SCALE,
            }
        self.reduced_offsets = (_to_point(reduced[ParamName.P1]), _to_point(reduced[ParamName.P2]))
        self.reduced_radii = (float(reduced[ParamName.R1]), float(reduced[ParamName.R2]))

        for radius in self.radii + self.reduced_radii:
            if not radius > 0 or not math.isfinite(radius):
                raise ScenarioError(path, "radii must be positive: %s" % radius)
        for offset in self.offsets + self.reduced_offsets:
            if not all(math.isfinite(v) for v in offset):
                raise ScenarioError(path, "offsets must be finite: %s" % (offset,))
        for nominal, reduced_radius in zip(self.radii, self.reduced_radii):
            if reduced_radius > nominal:
                raise ScenarioError(path, "reduced radius %s exceeds nominal %s" % (reduced_radius, nominal))

    def __repr__(self):
        return "<ReachabilityParams p: %s r: %s reduced p: %s r: %s>" % (
            self.offsets, self.radii, self.reduced_offsets, self.reduced_radii)

    def circles(self, foot, is_reduced=False):
        """[(offset, radius)] for a landing of the given foot."""
        offsets = self.reduced_offsets if is_reduced else self.offsets
        radii = self.reduced_radii if is_reduced else self.radii
        if foot == Foot.RIGHT:
            offsets = [math_util.mirror(offset) for offset in offsets]
        return list(zip(offsets, radii))

    def max_step_length(self, polygon_sides=Default.POLYGON_SIDES, norm_max=Default.TRIG_NORM_BAND[1],
                        is_reduced=False):
        """Upper bound on |(x_j, y_j) - (x_(j-1), y_(j-1))| for any integer-feasible step.

        The rotated offset is at most sqrt(s^2 + c^2) |p_i| long and the polygon
        reaches r_i / cos(pi / K) at its corners.
        """
        scale = 1 / math.cos(math.pi / polygon_sides) if polygon_sides else 1.0
        return min(math.sqrt(norm_max) * math.hypot(*offset) + radius * scale
                   for offset, radius in self.circles(Foot.LEFT, is_reduced))


def _to_point(value):
    x, y = value
    return float(x), float(y)


class FootstepVars:
    """Variable indices of a footstep model. Steps are 1-based, regions and segments 0-based."""

    def __init__(self, num_steps, region_count, segment_count, is_contact_ordering=False):
        self.num_steps = num_steps
        self.x = {}
        self.y = {}
        self.theta = {}
        self.s = {}
        self.c = {}
        self.H = [{} for _ in range(region_count)]
        self.S = [{} for _ in range(segment_count)]
        self.C = [{} for _ in range(segment_count)]
        self.LL = {} if is_contact_ordering else None
        self.RL = {} if is_contact_ordering else None

    @property
    def steps(self):
        return range(1, self.num_steps + 1)

    @property
    def free_steps(self):
        return range(3, self.num_steps + 1)

    @property
    def is_contact_ordering(self):
        return self.LL is not None

    def get_foot_variable(self, foot, j):
        return (self.LL if foot == Foot.LEFT else self.RL)[j]


class Scenario:
    """Planning problem. Immutable after construction."""

    def __init__(self, name, num_steps, goal, initial_stance, regions, specs=(),
                 Q=Default.Q, R=Default.R, reachability=None,
                 is_contact_ordering=False, reduced_stride_regions=(), first_foot=Default.FIRST_FOOT,
                 norm_realization=Default.NORM_REALIZATION, polygon_sides=Default.POLYGON_SIDES,
                 workspace=Default.WORKSPACE, atoms=None, solver_settings=None):
        self.name = name
        self.num_steps = num_steps
        self.goal = tuple(float(v) for v in goal)
        self.initial_stance = [tuple(float(v) for v in pose) for pose in initial_stance]
        self.regions = list(regions)
        self.specs = [spec if isinstance(spec, str) else ltl.format_formula(spec) for spec in specs]
        self.formulas = [self._parse_spec(spec, i) for i, spec in enumerate(specs)]
        self.Q = np.asarray(Q, dtype=float)
        self.R = np.asarray(R, dtype=float)
        self.reachability = reachability or ReachabilityParams()
        self.is_contact_ordering = bool(is_contact_ordering)
        self.reduced_stride_regions = list(reduced_stride_regions)
        self.first_foot = first_foot
        self.norm_realization = norm_realization
        self.polygon_sides = polygon_sides
        self.workspace = tuple(tuple(float(v) for v in bounds) for bounds in workspace)
        self.atom_declarations = dict(atoms or {})
        self.solver_settings = dict(solver_settings or {})

        self.region_index_by_name = {region.name: r for r, region in enumerate(self.regions)}
        self.stance_regions = None
        self.validate()

    def __repr__(self):
        return "<Scenario %s N: %s regions: %s specs: %s>" % (
            self.name, self.num_steps, [region.name for region in self.regions], self.specs)

    @staticmethod
    def _parse_spec(spec, i):
        if not isinstance(spec, str):
            return spec
        try:
            return parse(spec)
        except LTLSyntaxError as error:
            raise ScenarioError("%s[%s]" % (ParamName.SPECS, i), error.message)

    # Properties

    @property
    def stance_feet(self):
        return self.first_foot, Foot.other(self.first_foot)

    def foot_of(self, j):
        # Fixed alternation: odd steps are first_foot
        return self.first_foot if j % 2 == 1 else Foot.other(self.first_foot)

    def get_region(self, name):
        index = self.region_index_by_name.get(name)
        return None if index is None else self.regions[index]

    def find_region_index(self, point, tol=1e-9):
        for r, region in enumerate(self.regions):
            if region.contains(point, tol):
                return r
        return None

    @property
    def atoms(self):
        """Atom name -> (ParamName.REGION, region name) or (ParamName.FOOT, foot)."""
        result = {get_region_atom_name(region.name): (ParamName.REGION, region.name) for region in self.regions}
        if self.is_contact_ordering:
            result.update({name: (ParamName.FOOT, foot) for foot, name in FOOT_ATOM_NAMES.items()})
        for name, declaration in self.atom_declarations.items():
            result[name] = tuple(declaration)
        return result

    # Checks

    def validate(self):
        if not isinstance(self.num_steps, int) or isinstance(self.num_steps, bool) or self.num_steps < 2:
            raise ScenarioError(ParamName.NUM_STEPS, "must be an integer >= 2: %s" % (self.num_steps,))
        if len(self.goal) != 3 or not all(math.isfinite(v) for v in self.goal):
            raise ScenarioError(ParamName.GOAL, "must be a finite (x, y, theta)")
        if not -math.pi <= self.goal[2] <= math.pi:
            raise ScenarioError(ParamName.GOAL + "." + ParamName.THETA, "must be in [-pi, pi]: %s" % self.goal[2])
        for key, matrix in ((ParamName.Q, self.Q), (ParamName.R, self.R)):
            if matrix.shape != (3, 3) or not math_util.is_psd(matrix):
                raise ScenarioError("%s.%s" % (ParamName.COST, key), "not PSD", ErrorCode.SCENARIO_COST)

        if not self.regions:
            raise ScenarioError(ParamName.REGIONS, "at least one region is required")
        if len(self.region_index_by_name) != len(self.regions):
            raise ScenarioError(ParamName.REGIONS, "region names must be unique")
        for name in self.reduced_stride_regions:
            if name not in self.region_index_by_name:
                raise ScenarioError("%s.%s" % (ParamName.MODES, ParamName.REDUCED_STRIDE_REGIONS),
                                    "unknown region %s" % name)
        if self.first_foot not in (Foot.LEFT, Foot.RIGHT):
            raise ScenarioError("%s.%s" % (ParamName.MODES, ParamName.FIRST_FOOT),
                                "must be %s or %s" % (Foot.LEFT, Foot.RIGHT))
        if self.norm_realization not in NormRealization.all:
            raise ScenarioError("%s.%s" % (ParamName.MODES, ParamName.NORM_REALIZATION),
                                "must be one of %s" % (NormRealization.all,))
        if not isinstance(self.polygon_sides, int) or self.polygon_sides < 3:
            raise ScenarioError("%s.%s" % (ParamName.MODES, ParamName.POLYGON_SIDES),
                                "must be an integer >= 3: %s" % (self.polygon_sides,))
        if len(self.workspace) != 2 or any(len(bounds) != 2 or not bounds[0] < bounds[1]
                                           for bounds in self.workspace):
            raise ScenarioError(ParamName.WORKSPACE, "bounds must be [lo, hi] with lo < hi")

        self._validate_stance()
        self._validate_atoms()

    def _validate_stance(self):
        if len(self.initial_stance) != 2:
            raise ScenarioError(ParamName.INITIAL_STANCE, "exactly 2 poses are required")
        regions = []
        for i, pose in enumerate(self.initial_stance):
            path = "%s[%s]" % (ParamName.INITIAL_STANCE, i)
            x, y, theta = pose
            if not -math.pi <= theta <= math.pi:
                raise ScenarioError(path, "theta must be in [-pi, pi]: %s" % theta)
            (x_lo, x_hi), (y_lo, y_hi) = self.workspace
            if not (x_lo <= x <= x_hi and y_lo <= y <= y_hi):
                raise ScenarioError(path, "step %s is outside the workspace" % (i + 1), ErrorCode.SCENARIO_STANCE)
            region_index = self.find_region_index(pose)
            if region_index is None:
                raise ScenarioError(path, "step %s is in no region" % (i + 1), ErrorCode.SCENARIO_STANCE)
            regions.append(region_index)
        delta = abs(self.initial_stance[1][2] - self.initial_stance[0][2])
        if delta > Default.THETA_RATE_LIMIT + 1e-12:
            raise ScenarioError(ParamName.INITIAL_STANCE,
                                "orientation changes by %s (limit %s)" % (delta, Default.THETA_RATE_LIMIT),
                                ErrorCode.SCENARIO_STANCE)
        self.stance_regions = regions

    def _validate_atoms(self):
        for name, declaration in self.atom_declarations.items():
            path = "%s.%s" % (ParamName.ATOMS, name)
            kind, value = declaration
            if kind == ParamName.REGION and value not in self.region_index_by_name:
                raise ScenarioError(path, "unknown region %s" % value)
            if kind == ParamName.FOOT and not self.is_contact_ordering:
                raise ScenarioError(path, "foot atoms require contact ordering mode")
            if kind == ParamName.FOOT and value not in (Foot.LEFT, Foot.RIGHT):
                raise ScenarioError(path, "unknown foot %s" % value)
            if kind not in (ParamName.REGION, ParamName.FOOT):
                raise ScenarioError(path, "unknown atom kind %s" % kind)
        atoms = self.atoms
        for i, (spec, formula) in enumerate(zip(self.specs, self.formulas)):
            for name in sorted(ltl.atoms(formula)):
                if name not in atoms:
                    raise ScenarioError("%s[%s]" % (ParamName.SPECS, i), "unknown atom",
                                        ErrorCode.SCENARIO_ATOM, atom=name, formula=spec)


# Building


class FootstepModelBuilder:
    """Builds the mixed-integer footstep model of a scenario.

    Usage: model = FootstepModelBuilder(scenario).build(). After building,
    vars holds the variable indices and binding the atom binding.
    """

    def __init__(self, scenario, norm_realization=None, polygon_sides=None):
        self.logger = logging.getLogger("FootstepModelBuilder.%s" % scenario.name)
        self.scenario = scenario
        self.norm_realization = norm_realization or scenario.norm_realization
        self.polygon_sides = polygon_sides or scenario.polygon_sides
        if self.norm_realization not in NormRealization.all:
            raise ValueError("Unknown norm realization: %s" % self.norm_realization)
        self.directions = math_util.unit_directions(self.polygon_sides)
        self.model = ModelIR(make_model_name(scenario.name))
        self.vars = None
        self.binding = None
        self.encoder = None

    def build(self):
        timing_key = "build_%s" % self.model.name
        time_util.start_timings(timing_key)
        self.allocate_variables()
        self.pin_initial_stance()
        self.add_region_assignment()
        self.add_trig_approx()
        self.add_reachability()
        self.add_theta_rate_limit()
        if self.scenario.is_contact_ordering:
            self.add_contact_ordering()
        self.build_objective()
        self.binding = self.bind_atoms()
        self.encode_specifications()
        time_util.stop_timings(timing_key)
        self.logger.info("Built %r (%s). %s", self.model, self.norm_realization,
                         time_util.get_timings_str(timing_key))
        return self.model

    # Variables

    def allocate_variables(self):
        scenario, model = self.scenario, self.model
        (x_lo, x_hi), (y_lo, y_hi) = scenario.workspace
        v = self.vars = FootstepVars(scenario.num_steps, len(scenario.regions), TRIG.segment_count,
                                     scenario.is_contact_ordering)
        for j in v.steps:
            v.x[j] = model.add_variable("x_%s" % j, lower=x_lo, upper=x_hi).index
            v.y[j] = model.add_variable("y_%s" % j, lower=y_lo, upper=y_hi).index
            v.theta[j] = model.add_variable("th_%s" % j, lower=-math.pi, upper=math.pi).index
            v.s[j] = model.add_variable("s_%s" % j, lower=-1, upper=1).index
            v.c[j] = model.add_variable("c_%s" % j, lower=-1, upper=1).index
            for r in range(len(scenario.regions)):
                v.H[r][j] = model.add_binary("H_%s_%s" % (r + 1, j)).index
            for l in range(TRIG.segment_count):
                v.S[l][j] = model.add_binary("S_%s_%s" % (l + 1, j)).index
                v.C[l][j] = model.add_binary("C_%s_%s" % (l + 1, j)).index
            if v.is_contact_ordering:
                v.LL[j] = model.add_binary("LL_%s" % j).index
                v.RL[j] = model.add_binary("RL_%s" % j).index
        return v

    def pin_initial_stance(self):
        scenario, model, v = self.scenario, self.model, self.vars
        for j, (pose, region_index, foot) in enumerate(
                zip(scenario.initial_stance, scenario.stance_regions, scenario.stance_feet), 1):
            x, y, theta = pose
            model.fix_variable(v.x[j], x)
            model.fix_variable(v.y[j], y)
            model.fix_variable(v.theta[j], theta)
            s, c = TRIG.evaluate(theta)
            model.fix_variable(v.s[j], s)
            model.fix_variable(v.c[j], c)
            for r, H in enumerate(v.H):
                model.fix_variable(H[j], 1 if r == region_index else 0)
            sin_segment, cos_segment = TRIG.sin.segment_of(theta), TRIG.cos.segment_of(theta)
            for l in range(TRIG.segment_count):
                model.fix_variable(v.S[l][j], 1 if l == sin_segment else 0)
                model.fix_variable(v.C[l][j], 1 if l == cos_segment else 0)
            if v.is_contact_ordering:
                model.fix_variable(v.LL[j], 1 if foot == Foot.LEFT else 0)
                model.fix_variable(v.RL[j], 1 if foot == Foot.RIGHT else 0)

    def _get_bounds(self, indices):
        variables = self.model.variables
        return [variables[i].lower for i in indices], [variables[i].upper for i in indices]

    def _get_row_max(self, coefficients):
        # Max of the row activity over the variable bounds
        indices = list(coefficients)
        lowers, uppers = self._get_bounds(indices)
        return math_util.box_row_max([coefficients[i] for i in indices], lowers, uppers)

    # Rows

    def add_region_assignment(self):
        scenario, model, v = self.scenario, self.model, self.vars
        for j in v.steps:
            model.add_row({H[j]: 1 for H in v.H}, Sense.EQ, 1, "H_sum_%s" % j)
        for j in v.free_steps:
            model.add_group([H[j] for H in v.H], "H_%s" % j, priority=1)
            for r, region in enumerate(scenario.regions):
                H = v.H[r][j]
                for i, ((a_x, a_y), b) in enumerate(zip(region.A, region.b), 1):
                    position = {v.x[j]: a_x, v.y[j]: a_y}
                    M = max(0.0, self._get_row_max(position) - b)
                    # a p <= b + M (1 - H)
                    model.add_row({**position, H: M} if M else position, Sense.LE, b + M,
                                  "region_%s_%s_%s" % (r + 1, j, i))

    def add_trig_approx(self):
        model, v = self.model, self.vars
        tables = ((TRIG.sin, v.s, v.S), (TRIG.cos, v.c, v.C))
        for j in v.steps:
            theta = v.theta[j]
            for table, values, binaries in tables:
                model.add_row({binaries[l][j]: 1 for l in range(table.segment_count)}, Sense.EQ, 1,
                              "%s_sum_%s" % (table.name, j))
                if j >= 3:
                    model.add_group([binaries[l][j] for l in range(table.segment_count)],
                                    "%s_%s" % (table.name, j), priority=0)
                for l in range(table.segment_count):
                    self._add_segment_rows(table, l, j, theta, values[j], binaries[l][j])

    def _add_segment_rows(self, table, l, j, theta, value, binary):
        model = self.model
        name = "%s_%s_%s" % (table.name, l + 1, j)
        lower, upper = table.interval(l)
        # binary = 1 -> lower <= theta <= upper
        M_lower = lower + math.pi
        if M_lower > 0:
            model.add_row({theta: 1, binary: -M_lower}, Sense.GE, lower - M_lower, name + "_lo")
        M_upper = math.pi - upper
        if M_upper > 0:
            model.add_row({theta: 1, binary: M_upper}, Sense.LE, upper + M_upper, name + "_hi")
        # binary = 1 -> value = g theta + h
        g, h = float(table.slopes[l]), float(table.intercepts[l])
        expression = {value: 1.0, theta: -g} if g else {value: 1.0}
        M_above = max(0.0, self._get_row_max(expression) - h)
        M_below = max(0.0, h + self._get_row_max({index: -coef for index, coef in expression.items()}))
        model.add_row({**expression, binary: M_above}, Sense.LE, h + M_above, name + "_le")
        model.add_row({**expression, binary: -M_below}, Sense.GE, h - M_below, name + "_ge")

    def add_reachability(self):
        scenario, v = self.scenario, self.vars
        params = scenario.reachability
        reduced_regions = [scenario.region_index_by_name[name] for name in scenario.reduced_stride_regions]
        for j in v.free_steps:
            if v.is_contact_ordering:
                feet = [(foot, [v.get_foot_variable(foot, j)]) for foot in (Foot.LEFT, Foot.RIGHT)]
            else:
                feet = [(scenario.foot_of(j), [])]
            for foot, guards in feet:
                for i, (offset, radius) in enumerate(params.circles(foot), 1):
                    self._add_circle(j, offset, radius, guards, "reach_%s_%s_%s" % (j, foot, i))
                for r in reduced_regions:
                    for i, (offset, radius) in enumerate(params.circles(foot, is_reduced=True), 1):
                        self._add_circle(j, offset, radius, guards + [v.H[r][j]],
                                         "stride_%s_%s_%s_%s" % (j, foot, r + 1, i))

    def _get_displacement(self, j, offset):
        # d = (x_j, y_j) - (x_(j-1), y_(j-1)) - Rot(c_j, s_j) p
        v = self.vars
        p_x, p_y = offset
        dx = {v.x[j]: 1.0, v.x[j - 1]: -1.0, v.c[j]: -p_x, v.s[j]: p_y}
        dy = {v.y[j]: 1.0, v.y[j - 1]: -1.0, v.s[j]: -p_x, v.c[j]: -p_y}
        return dx, dy

    def _add_circle(self, j, offset, radius, guards, name):
        """|d| <= radius if all guards are 1 (always if there are none)."""
        dx, dy = self._get_displacement(j, offset)
        if self.norm_realization == NormRealization.POLYGON:
            self._add_polygon_rows(dx, dy, radius, guards, name)
        else:
            self._add_quadratic_rows(dx, dy, radius, guards, name)

    @staticmethod
    def _combine(first, first_weight, second, second_weight):
        result = {}
        for expression, weight in ((first, first_weight), (second, second_weight)):
            for index, coef in expression.items():
                result[index] = result.get(index, 0.0) + weight * coef
        return result

    def _add_guards(self, coefficients, rhs, guards, M):
        # row <= rhs + M (1 - g) for every guard g
        result = dict(coefficients)
        for guard in guards:
            result[guard] = result.get(guard, 0.0) + M
        return result, rhs + M * len(guards)

    def _add_polygon_rows(self, dx, dy, radius, guards, name):
        for k, (a_x, a_y) in enumerate(self.directions, 1):
            coefficients = self._combine(dx, float(a_x), dy, float(a_y))
            M = max(0.0, self._get_row_max(coefficients) - radius) if guards else 0.0
            coefficients, rhs = self._add_guards(coefficients, radius, guards, M)
            self.model.add_row(coefficients, Sense.LE, rhs, "%s_%s" % (name, k))

    def _add_quadratic_rows(self, dx, dy, radius, guards, name):
        model = self.model
        dx_max = max(self._get_row_max(dx), self._get_row_max({i: -coef for i, coef in dx.items()}))
        dy_max = max(self._get_row_max(dy), self._get_row_max({i: -coef for i, coef in dy.items()}))
        dx_var = model.add_variable("dx_%s" % name).index
        dy_var = model.add_variable("dy_%s" % name).index
        model.add_row(self._combine(dx, 1.0, {dx_var: -1.0}, 1.0), Sense.EQ, 0, "%s_dx" % name)
        model.add_row(self._combine(dy, 1.0, {dy_var: -1.0}, 1.0), Sense.EQ, 0, "%s_dy" % name)
        if not guards:
            model.add_quadratic_row([(dx_var, dx_var, 1), (dy_var, dy_var, 1)], {}, radius ** 2, "%s_norm" % name)
            return
        # dx^2 + dy^2 <= t^2, t <= radius + M (1 - g)
        t_var = model.add_variable("t_%s" % name, lower=0).index
        model.add_quadratic_row([(dx_var, dx_var, 1), (dy_var, dy_var, 1), (t_var, t_var, -1)], {}, 0,
                                "%s_norm" % name)
        M = max(0.0, math.hypot(dx_max, dy_max) - radius)
        coefficients, rhs = self._add_guards({t_var: 1.0}, radius, guards, M)
        model.add_row(coefficients, Sense.LE, rhs, "%s_radius" % name)

    def add_theta_rate_limit(self):
        model, v = self.model, self.vars
        limit = Default.THETA_RATE_LIMIT
        for j in range(2, v.num_steps + 1):
            delta = {v.theta[j]: 1, v.theta[j - 1]: -1}
            model.add_row(delta, Sense.LE, limit, "rate_up_%s" % j)
            model.add_row(delta, Sense.GE, -limit, "rate_down_%s" % j)

    def add_contact_ordering(self):
        model, v = self.model, self.vars
        M = 1
        for j in v.steps:
            model.add_row({v.LL[j]: 1, v.RL[j]: 1}, Sense.EQ, 1, "foot_sum_%s" % j)
        for j in v.free_steps:
            model.add_group([v.LL[j], v.RL[j]], "foot_%s" % j, priority=1)
            for foot in (Foot.LEFT, Foot.RIGHT):
                previous = v.get_foot_variable(foot, j - 1)
                current = v.get_foot_variable(Foot.other(foot), j)
                # previous = 1 -> current = 1
                model.add_row({current: 1, previous: M}, Sense.LE, 1 + M, "order_%s_%s_le" % (j, foot))
                model.add_row({current: 1, previous: -M}, Sense.GE, 1 - M, "order_%s_%s_ge" % (j, foot))

    def build_objective(self):
        scenario, model, v = self.scenario, self.model, self.vars
        N = scenario.num_steps
        goal_x, goal_y, goal_theta = scenario.goal
        model.add_objective_form([({v.x[N]: 1}, -goal_x), ({v.y[N]: 1}, -goal_y), ({v.theta[N]: 1}, -goal_theta)],
                                 scenario.Q)
        for j in range(1, N):
            model.add_objective_form([({v.x[j + 1]: 1, v.x[j]: -1}, 0), ({v.y[j + 1]: 1, v.y[j]: -1}, 0),
                                      ({v.theta[j + 1]: 1, v.theta[j]: -1}, 0)], scenario.R)

    # Specifications

    def bind_atoms(self):
        scenario, v = self.scenario, self.vars
        binding = AtomBinding(scenario.num_steps)
        for name, (kind, value) in sorted(scenario.atoms.items()):
            if kind == ParamName.REGION:
                if value not in scenario.region_index_by_name:
                    raise ScenarioError(ParamName.ATOMS, "unknown region %s" % value,
                                        ErrorCode.SCENARIO_ATOM, atom=name, formula=value)
                H = v.H[scenario.region_index_by_name[value]]
                binding.bind(name, [H[j] for j in v.steps])
            else:
                if not v.is_contact_ordering:
                    raise ScenarioError(ParamName.ATOMS, "foot atoms require contact ordering mode",
                                        ErrorCode.SCENARIO_ATOM, atom=name, formula=value)
                binding.bind(name, [v.get_foot_variable(value, j) for j in v.steps])
        self.logger.debug("Bound atoms: %s", format_names(binding.atoms))
        return binding

    def encode_specifications(self):
        self.encoder = LTLEncoder(self.model, self.binding, EncodingContext(self.scenario.num_steps))
        for formula in self.scenario.formulas:
            self.encoder.encode_specification(formula)
        return self.encoder


def build_model(scenario, norm_realization=None, polygon_sides=None):
    builder = FootstepModelBuilder(scenario, norm_realization, polygon_sides)
    builder.build()
    return builder
