"""
Scenario documents (JSON).

    {
      "name": "scenario_1_liveness",
      "num_steps": 10,
      "goal": {"x": 0, "y": 1.5, "theta": "pi/2"},
      "initial_stance": [{"x": 0.1, "y": 0, "theta": "pi/2"}, {"x": -0.1, "y": 0, "theta": "pi/2"}],
      "regions": [{"name": "R1", "vertices": [[-0.5, -0.5], [0.5, -0.5], [0.5, 0.6], [-0.5, 0.6]]}, ...],
      "specs": ["F (p_R3 | p_R4)"],
      "cost": {"Q": [[...], [...], [...]], "R": [[...], [...], [...]]},
      "reachability": {"p1": [0, 0.1], "p2": [0, 0.35], "r1": 0.6, "r2": 0.35,
                       "reduced": {"p1": ..., "p2": ..., "r1": ..., "r2": ...}},
      "modes": {"contact_ordering": false, "reduced_stride_regions": [], "first_foot": "R",
                "norm_realization": "polygon", "polygon_sides": 8},
      "workspace": {"x": [-10, 10], "y": [-10, 10]},
      "atoms": {"in_goal_area": {"region": "R3"}, "left": {"foot": "L"}},
      "solver": {"time_limit": 300, "gap": 1e-6, "node_limit": 1000000, "threads": 1}
    }

Only name, num_steps, goal, initial_stance and regions are required.
Angles are numbers or strings like "pi/2", "-3*pi/4", "0.5".
"""

import json
import logging
import math
import re

from ltlstep.api import Default, ParamName
from ltlstep.errors import ScenarioError
from ltlstep.model import ReachabilityParams, Region, Scenario
from ltlstep.utils.log_util import make_short_str

logger = logging.getLogger(__name__)

ANGLE_PATTERN = re.compile(
    r"^\s*([+-])?\s*(?:(\d+(?:\.\d*)?|\.\d+)\s*(\*)?\s*)?(pi)?\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$")

TOP_LEVEL_KEYS = (
    ParamName.NAME, ParamName.NUM_STEPS, ParamName.GOAL, ParamName.INITIAL_STANCE, ParamName.REGIONS,
    ParamName.SPECS, ParamName.COST, ParamName.REACHABILITY, ParamName.MODES, ParamName.WORKSPACE,
    ParamName.ATOMS, ParamName.SOLVER,
)
MODE_KEYS = (
    ParamName.CONTACT_ORDERING, ParamName.REDUCED_STRIDE_REGIONS, ParamName.FIRST_FOOT,
    ParamName.NORM_REALIZATION, ParamName.POLYGON_SIDES,
)
REACHABILITY_KEYS = (ParamName.P1, ParamName.P2, ParamName.R1, ParamName.R2)
SOLVER_KEYS = (ParamName.TIME_LIMIT, ParamName.GAP, ParamName.NODE_LIMIT, ParamName.THREADS)


def parse_angle(value, path=ParamName.THETA):
    if _is_number(value):
        return float(value)
    if not isinstance(value, str):
        raise ScenarioError(path, "angle must be a number or a string like \"pi/2\": %r" % (value,))
    match = ANGLE_PATTERN.match(value)
    if not match or not (match.group(2) or match.group(4)) or (match.group(3) and not match.group(4)):
        raise ScenarioError(path, "wrong angle %r" % value)
    sign, number, _, pi, denominator = match.groups()
    result = float(number) if number else 1.0
    if pi:
        result *= math.pi
    if denominator:
        if float(denominator) == 0:
            raise ScenarioError(path, "division by zero in %r" % value)
        result /= float(denominator)
    return -result if sign == "-" else result


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _join(path, key):
    return "%s[%s]" % (path, key) if isinstance(key, int) else ("%s.%s" % (path, key) if path else key)


# Field getters


def _check_keys(data, path, allowed):
    if not isinstance(data, dict):
        raise ScenarioError(path or "<root>", "must be an object")
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ScenarioError(_join(path, unknown[0]), "unknown field (allowed: %s)" % ", ".join(allowed))


def _get(data, key, path, is_required=False, default=None):
    if key not in data:
        if is_required:
            raise ScenarioError(_join(path, key), "required field is missing")
        return default
    return data[key]


def _to_number(value, path, is_positive=False, is_non_negative=False):
    if not _is_number(value) or not math.isfinite(value):
        raise ScenarioError(path, "must be a finite number: %r" % (value,))
    if is_positive and value <= 0:
        raise ScenarioError(path, "must be positive: %r" % (value,))
    if is_non_negative and value < 0:
        raise ScenarioError(path, "must not be negative: %r" % (value,))
    return float(value)


def _to_int(value, path, minimum):
    if not isinstance(value, int) or isinstance(value, bool):
        raise ScenarioError(path, "must be an integer: %r" % (value,))
    if value < minimum:
        raise ScenarioError(path, "must be >= %s: %r" % (minimum, value))
    return value


def _to_list(value, path, length=None):
    if not isinstance(value, list):
        raise ScenarioError(path, "must be an array")
    if length is not None and len(value) != length:
        raise ScenarioError(path, "must have %s items, got %s" % (length, len(value)))
    return value


def _to_point(value, path):
    value = _to_list(value, path, 2)
    return [_to_number(v, _join(path, i)) for i, v in enumerate(value)]


def _to_pose(value, path):
    _check_keys(value, path, (ParamName.X, ParamName.Y, ParamName.THETA))
    return (
        _to_number(_get(value, ParamName.X, path, True), _join(path, ParamName.X)),
        _to_number(_get(value, ParamName.Y, path, True), _join(path, ParamName.Y)),
        parse_angle(_get(value, ParamName.THETA, path, True), _join(path, ParamName.THETA)),
    )


def _to_matrix(value, path):
    rows = _to_list(value, path, 3)
    return [[_to_number(v, _join(_join(path, i), k)) for k, v in enumerate(_to_list(row, _join(path, i), 3))]
            for i, row in enumerate(rows)]


# Sections


def _parse_regions(value, path=ParamName.REGIONS):
    regions = []
    for i, item in enumerate(_to_list(value, path)):
        item_path = _join(path, i)
        _check_keys(item, item_path, (ParamName.NAME, ParamName.VERTICES))
        name = _get(item, ParamName.NAME, item_path, True)
        if not isinstance(name, str) or not name:
            raise ScenarioError(_join(item_path, ParamName.NAME), "must be a non-empty string")
        vertices_path = _join(item_path, ParamName.VERTICES)
        vertices = [_to_point(v, _join(vertices_path, k))
                    for k, v in enumerate(_to_list(_get(item, ParamName.VERTICES, item_path, True), vertices_path))]
        regions.append(Region.from_vertices(name, vertices, item_path))
    return regions


def _parse_cost(value, path=ParamName.COST):
    if value is None:
        return Default.Q, Default.R
    _check_keys(value, path, (ParamName.Q, ParamName.R))
    Q = _get(value, ParamName.Q, path)
    R = _get(value, ParamName.R, path)
    return (Default.Q if Q is None else _to_matrix(Q, _join(path, ParamName.Q)),
            Default.R if R is None else _to_matrix(R, _join(path, ParamName.R)))


def _parse_circles(value, path, defaults):
    _check_keys(value, path, REACHABILITY_KEYS + ((ParamName.REDUCED,) if defaults else ()))
    result = {}
    for key in (ParamName.P1, ParamName.P2):
        item = _get(value, key, path, is_required=not defaults)
        result[key] = defaults[key] if item is None else _to_point(item, _join(path, key))
    for key in (ParamName.R1, ParamName.R2):
        item = _get(value, key, path, is_required=not defaults)
        result[key] = defaults[key] if item is None else _to_number(item, _join(path, key), is_positive=True)
    return result


def _parse_reachability(value, path=ParamName.REACHABILITY):
    if value is None:
        return ReachabilityParams()
    defaults = {ParamName.P1: Default.P1, ParamName.P2: Default.P2, ParamName.R1: Default.R1, ParamName.R2: Default.R2}
    circles = _parse_circles(value, path, defaults)
    reduced = _get(value, ParamName.REDUCED, path)
    if reduced is not None:
        reduced = _parse_circles(reduced, _join(path, ParamName.REDUCED), None)
    return ReachabilityParams(reduced=reduced, path=path, **circles)


def _parse_modes(value, path=ParamName.MODES):
    value = value or {}
    _check_keys(value, path, MODE_KEYS)
    is_contact_ordering = _get(value, ParamName.CONTACT_ORDERING, path, default=False)
    if not isinstance(is_contact_ordering, bool):
        raise ScenarioError(_join(path, ParamName.CONTACT_ORDERING), "must be true or false")
    regions_path = _join(path, ParamName.REDUCED_STRIDE_REGIONS)
    reduced_stride_regions = _to_list(_get(value, ParamName.REDUCED_STRIDE_REGIONS, path, default=[]), regions_path)
    for i, name in enumerate(reduced_stride_regions):
        if not isinstance(name, str):
            raise ScenarioError(_join(regions_path, i), "must be a region name")
    polygon_sides = _get(value, ParamName.POLYGON_SIDES, path)
    return {
        "is_contact_ordering": is_contact_ordering,
        "reduced_stride_regions": reduced_stride_regions,
        "first_foot": _get(value, ParamName.FIRST_FOOT, path, default=Default.FIRST_FOOT),
        "norm_realization": _get(value, ParamName.NORM_REALIZATION, path, default=Default.NORM_REALIZATION),
        "polygon_sides": (Default.POLYGON_SIDES if polygon_sides is None else
                          _to_int(polygon_sides, _join(path, ParamName.POLYGON_SIDES), 3)),
    }


def _parse_workspace(value, path=ParamName.WORKSPACE):
    if value is None:
        return Default.WORKSPACE
    _check_keys(value, path, (ParamName.X, ParamName.Y))
    result = []
    for key, default in zip((ParamName.X, ParamName.Y), Default.WORKSPACE):
        item = _get(value, key, path)
        bounds = default if item is None else _to_point(item, _join(path, key))
        if not bounds[0] < bounds[1]:
            raise ScenarioError(_join(path, key), "lower bound must be below upper bound")
        result.append(tuple(bounds))
    return tuple(result)


def _parse_atoms(value, path=ParamName.ATOMS):
    value = value or {}
    if not isinstance(value, dict):
        raise ScenarioError(path, "must be an object")
    result = {}
    for name, declaration in value.items():
        item_path = _join(path, name)
        if not re.match(r"^[A-Za-z_][A-Za-z0-9_]*$", name):
            raise ScenarioError(item_path, "atom name must be an identifier")
        _check_keys(declaration, item_path, (ParamName.REGION, ParamName.FOOT))
        if len(declaration) != 1:
            raise ScenarioError(item_path, "exactly one of region or foot is required")
        (kind, target), = declaration.items()
        if not isinstance(target, str):
            raise ScenarioError(_join(item_path, kind), "must be a string")
        result[name] = (kind, target)
    return result


def _parse_solver(value, path=ParamName.SOLVER):
    value = value or {}
    _check_keys(value, path, SOLVER_KEYS)
    result = {}
    if ParamName.TIME_LIMIT in value:
        result[ParamName.TIME_LIMIT] = _to_number(value[ParamName.TIME_LIMIT], _join(path, ParamName.TIME_LIMIT),
                                                  is_positive=True)
    if ParamName.GAP in value:
        result[ParamName.GAP] = _to_number(value[ParamName.GAP], _join(path, ParamName.GAP), is_non_negative=True)
    if ParamName.NODE_LIMIT in value:
        result[ParamName.NODE_LIMIT] = _to_int(value[ParamName.NODE_LIMIT], _join(path, ParamName.NODE_LIMIT), 1)
    if ParamName.THREADS in value:
        result[ParamName.THREADS] = _to_int(value[ParamName.THREADS], _join(path, ParamName.THREADS), 1)
    return result


# Loading


def parse_scenario(data, default_name="scenario"):
    """Validates a scenario document (dict) and returns a Scenario."""
    _check_keys(data, "", TOP_LEVEL_KEYS)
    name = _get(data, ParamName.NAME, "", default=default_name)
    if not isinstance(name, str) or not name:
        raise ScenarioError(ParamName.NAME, "must be a non-empty string")
    num_steps = _to_int(_get(data, ParamName.NUM_STEPS, "", True), ParamName.NUM_STEPS, 2)
    goal = _to_pose(_get(data, ParamName.GOAL, "", True), ParamName.GOAL)
    stance = [_to_pose(pose, _join(ParamName.INITIAL_STANCE, i))
              for i, pose in enumerate(_to_list(_get(data, ParamName.INITIAL_STANCE, "", True),
                                                ParamName.INITIAL_STANCE, 2))]
    regions = _parse_regions(_get(data, ParamName.REGIONS, "", True))
    specs = _to_list(_get(data, ParamName.SPECS, "", default=[]), ParamName.SPECS)
    for i, spec in enumerate(specs):
        if not isinstance(spec, str):
            raise ScenarioError(_join(ParamName.SPECS, i), "must be a formula string")
    Q, R = _parse_cost(_get(data, ParamName.COST, ""))

    scenario = Scenario(
        name, num_steps, goal, stance, regions, specs, Q=Q, R=R,
        reachability=_parse_reachability(_get(data, ParamName.REACHABILITY, "")),
        workspace=_parse_workspace(_get(data, ParamName.WORKSPACE, "")),
        atoms=_parse_atoms(_get(data, ParamName.ATOMS, "")),
        solver_settings=_parse_solver(_get(data, ParamName.SOLVER, "")),
        **_parse_modes(_get(data, ParamName.MODES, "")))
    logger.info("Loaded %r", scenario)
    return scenario


def load_scenario(path):
    try:
        with open(path, encoding="utf-8") as file:
            text = file.read()
    except OSError as error:
        logger.error("Can't read scenario %s: %s", path, error)
        raise ScenarioError(str(path), "can't read file: %s" % error.strerror)
    try:
        data = json.loads(text)
    except ValueError as error:
        raise ScenarioError(str(path), "not a JSON document: %s" % make_short_str(error, 100))
    name = re.sub(r"\.json$", "", str(path).replace("\\", "/").rsplit("/", 1)[-1])
    return parse_scenario(data, name)

