"""
Common constants and data formats of the planner are defined here.
Scenario files, plan files and LP exports all use names from this module,
so anything which goes in or out of the planner must be listed here first.
"""

import math

# Constants


class NodeKind:
    TRUE = "true"
    ATOM = "atom"
    NOT = "not"
    AND = "and"
    OR = "or"
    IMPLIES = "implies"
    IFF = "iff"
    NEXT = "next"
    UNTIL = "until"
    EVENTUALLY = "eventually"
    ALWAYS = "always"
    ALWAYS_EVENTUALLY = "always_eventually"
    EVENTUALLY_ALWAYS = "eventually_always"

    # (None - any number >= 2)
    arity_by_kind = {
        TRUE: 0,
        ATOM: 0,
        NOT: 1,
        AND: None,
        OR: None,
        IMPLIES: 2,
        IFF: 2,
        NEXT: 1,
        UNTIL: 2,
        EVENTUALLY: 1,
        ALWAYS: 1,
        ALWAYS_EVENTUALLY: 1,
        EVENTUALLY_ALWAYS: 1,
    }
    symbol_by_kind = {
        NOT: "!",
        AND: "&",
        OR: "|",
        IMPLIES: "->",
        IFF: "<->",
        NEXT: "X",
        UNTIL: "U",
        EVENTUALLY: "F",
        ALWAYS: "G",
        ALWAYS_EVENTUALLY: "GF",
        EVENTUALLY_ALWAYS: "FG",
    }

    unary = (NOT, NEXT, EVENTUALLY, ALWAYS, ALWAYS_EVENTUALLY, EVENTUALLY_ALWAYS)
    binary = (AND, OR, IMPLIES, IFF, UNTIL)
    bounded = (EVENTUALLY, ALWAYS)
    patterns = (EVENTUALLY, ALWAYS, ALWAYS_EVENTUALLY, EVENTUALLY_ALWAYS)
    # Kinds left after desugaring
    core = (TRUE, ATOM, NOT, AND, OR, NEXT, UNTIL,
            EVENTUALLY, ALWAYS, ALWAYS_EVENTUALLY, EVENTUALLY_ALWAYS)


class VarKind:
    CONTINUOUS = "continuous"
    BINARY = "binary"


class Sense:
    LE = "<="
    EQ = "="
    GE = ">="

    all = (LE, EQ, GE)


class SolveStatus:
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    TIME_LIMIT_INCUMBENT = "time_limit_incumbent"
    TIME_LIMIT_NO_INCUMBENT = "time_limit_no_incumbent"

    with_solution = (OPTIMAL, TIME_LIMIT_INCUMBENT)


class RelaxationStatus:
    SOLVED = "solved"
    PRIMAL_INFEASIBLE = "primal_infeasible"
    DUAL_INFEASIBLE = "dual_infeasible"
    UNRESOLVED = "unresolved"


class Foot:
    LEFT = "L"
    RIGHT = "R"

    @classmethod
    def other(cls, foot):
        return cls.LEFT if foot == cls.RIGHT else cls.RIGHT


class NormRealization:
    POLYGON = "polygon"
    QUADRATIC = "quadratic"

    all = (POLYGON, QUADRATIC)


class LPProfile:
    LINEAR = "linear"
    QUADRATIC = "quadratic"

    realization_by_profile = {
        LINEAR: NormRealization.POLYGON,
        QUADRATIC: NormRealization.QUADRATIC,
    }


class ExitCode:
    OK = 0
    ERROR = 1
    INFEASIBLE = 2
    TIME_LIMIT = 3
    VERIFICATION_FAILED = 4

    by_status = {
        SolveStatus.OPTIMAL: OK,
        SolveStatus.INFEASIBLE: INFEASIBLE,
        SolveStatus.TIME_LIMIT_INCUMBENT: TIME_LIMIT,
        SolveStatus.TIME_LIMIT_NO_INCUMBENT: TIME_LIMIT,
    }


class ErrorCode:
    # Provides same error codes and messages for parsing, building, solving and verifying

    LTL_SYNTAX = "ltl:syntax"
    LTL_BOUND = "ltl:bound"
    UNBOUND_ATOM = "enc:unbound"
    STEP_RANGE = "enc:step"
    NOT_DESUGARED = "enc:sugar"
    EMPTY_WINDOW = "enc:window"
    SCENARIO_SCHEMA = "scn:schema"
    SCENARIO_REGION = "scn:region"
    SCENARIO_COST = "scn:cost"
    SCENARIO_ATOM = "scn:atom"
    SCENARIO_STANCE = "scn:stance"
    MODEL_INVALID = "slv:model"
    MODEL_QUADRATIC = "slv:quadratic"
    NUMERICAL = "slv:numerical"
    LP_SYNTAX = "slv:lpsyntax"
    # Verification failures
    REGION_VIOLATED = "ver:region"
    REACH_VIOLATED = "ver:reach"
    STRIDE_VIOLATED = "ver:stride"
    RATE_VIOLATED = "ver:rate"
    TRIG_VIOLATED = "ver:trig"
    FOOT_ORDER_VIOLATED = "ver:foot"
    STANCE_VIOLATED = "ver:stance"
    SPEC_VIOLATED = "ver:spec"
    OBJECTIVE_MISMATCH = "ver:objective"
    STEP_COUNT = "ver:steps"
    GOAL_MISSED = "ver:goal"

    message_by_code = {
        LTL_SYNTAX: "Syntax error at line {line}, column {column}: {details}",
        LTL_BOUND: "Wrong time bound [{lower},{upper}]: must satisfy 1 <= a <= b.",
        UNBOUND_ATOM: "Atom '{atom}' has no binding (formula: {formula}).",
        STEP_RANGE: "Step {step} is out of range 1..{horizon}.",
        NOT_DESUGARED: "Formula must be desugared before encoding: {formula}",
        EMPTY_WINDOW: "Time window of '{formula}' is empty over horizon {horizon}: "
                      "specification can never hold.",
        SCENARIO_SCHEMA: "{path}: {details}",
        SCENARIO_REGION: "Region '{name}': {details}",
        SCENARIO_COST: "{path}: matrix must be symmetric positive semidefinite.",
        SCENARIO_ATOM: "Atom '{atom}' in '{formula}' is not declared.",
        SCENARIO_STANCE: "{details}",
        MODEL_INVALID: "Model is not well-formed: {details}",
        MODEL_QUADRATIC: "Quadratic constraint rows are not supported by the built-in solver.",
        NUMERICAL: "Relaxation is unresolved after {iterations} iterations "
                   "(primal residual: {primal}, dual residual: {dual}).",
        LP_SYNTAX: "LP file line {line}: {details}",
        REGION_VIOLATED: "Step {step} violates row {row} of region {region} by {violation}.",
        REACH_VIOLATED: "Step {step} violates reachability circle {circle} by {violation}.",
        STRIDE_VIOLATED: "Step {step} violates reduced circle {circle} of region {region} by {violation}.",
        RATE_VIOLATED: "Step {step} changes orientation by {delta} (limit {limit}).",
        TRIG_VIOLATED: "Step {step}: ({s}, {c}) do not match the piecewise functions of theta {theta}.",
        FOOT_ORDER_VIOLATED: "Step {step}: foot {foot} does not alternate.",
        STANCE_VIOLATED: "Step {step} does not match the initial stance.",
        SPEC_VIOLATED: "Specification '{formula}' is not satisfied by the plan.",
        OBJECTIVE_MISMATCH: "Objective {objective} differs from recomputed {recomputed}.",
        STEP_COUNT: "Plan has {count} steps, expected {expected}.",
        GOAL_MISSED: "Final step is {distance} m and {theta_error} rad from the goal "
                     "(tolerance {position_tol} m, {theta_tol} rad).",
    }

    @classmethod
    def get_message_by_code(cls, code, default=None, **kwargs):
        return (
            cls.message_by_code[code].format_map(kwargs)
            if code in cls.message_by_code
            else default or "(no message)"
        )


class ParamName:
    # Scenario
    NAME = "name"
    NUM_STEPS = "num_steps"
    GOAL = "goal"
    INITIAL_STANCE = "initial_stance"
    REGIONS = "regions"
    VERTICES = "vertices"
    SPECS = "specs"
    COST = "cost"
    Q = "Q"
    R = "R"
    REACHABILITY = "reachability"
    P1 = "p1"
    P2 = "p2"
    R1 = "r1"
    R2 = "r2"
    REDUCED = "reduced"
    MODES = "modes"
    CONTACT_ORDERING = "contact_ordering"
    REDUCED_STRIDE_REGIONS = "reduced_stride_regions"
    FIRST_FOOT = "first_foot"
    NORM_REALIZATION = "norm_realization"
    POLYGON_SIDES = "polygon_sides"
    WORKSPACE = "workspace"
    ATOMS = "atoms"
    REGION = "region"
    FOOT = "foot"
    SOLVER = "solver"
    TIME_LIMIT = "time_limit"
    GAP = "gap"
    NODE_LIMIT = "node_limit"
    THREADS = "threads"

    # Pose and plan
    X = "x"
    Y = "y"
    THETA = "theta"
    S = "s"
    C = "c"
    INDEX = "index"
    VERSION = "version"
    SCENARIO = "scenario"
    STATUS = "status"
    OBJECTIVE = "objective"
    NODES = "nodes"
    STEPS = "steps"
    VERDICTS = "verdicts"
    FORMULA = "formula"
    SATISFIED = "satisfied"

    # Verification
    CODE = "code"
    MESSAGE = "message"


class ItemType:
    ERROR = "error"
    STEP = "step"
    VERDICT = "verdict"
    PLAN = "plan"


PLAN_FORMAT_VERSION = 1

item_format_by_type = {
    ItemType.ERROR: [
        ParamName.CODE,
        ParamName.MESSAGE,
    ],
    ItemType.STEP: [
        ParamName.INDEX,
        ParamName.FOOT,
        ParamName.X,
        ParamName.Y,
        ParamName.THETA,
        ParamName.S,
        ParamName.C,
        ParamName.REGION,
    ],
    ItemType.VERDICT: [
        ParamName.FORMULA,
        ParamName.SATISFIED,
    ],
    ItemType.PLAN: [
        ParamName.VERSION,
        ParamName.SCENARIO,
        ParamName.STATUS,
        ParamName.OBJECTIVE,
        ParamName.GAP,
        ParamName.NODES,
        ParamName.STEPS,
        ParamName.VERDICTS,
    ],
}


class Default:
    # Reachability (offsets for a left-foot landing; mirrored for the right foot)
    P1 = (0.0, 0.10)
    P2 = (0.0, 0.35)
    R1 = 0.60
    R2 = 0.35
    REDUCED_RADIUS_SCALE = 0.5
    REDUCED_OFFSET_TARGET = (0.0, 0.20)
    REDUCED_OFFSET_SHIFT = 0.5

    # Cost
    Q = ((1000.0, 0.0, 0.0), (0.0, 1000.0, 0.0), (0.0, 0.0, 100.0))
    R = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))

    WORKSPACE = ((-10.0, 10.0), (-10.0, 10.0))
    FIRST_FOOT = Foot.RIGHT
    NORM_REALIZATION = NormRealization.POLYGON
    POLYGON_SIDES = 8
    THETA_RATE_LIMIT = math.pi / 8

    # Encoding
    SMALL_M = 1

    # Search
    GAP = 1e-6
    TIME_LIMIT = 300.0
    NODE_LIMIT = 10 ** 6
    THREADS = 1
    INTEGRALITY_TOL = 1e-6
    FEASIBILITY_TOL = 1e-6

    # Relaxation
    RHO = 0.1
    RHO_EQ_SCALE = 1e3
    RHO_MIN = 1e-6
    RHO_MAX = 1e6
    SIGMA = 1e-6
    ALPHA = 1.6
    EPS_ABS = 1e-6
    EPS_REL = 1e-6
    EPS_INFEASIBLE = 1e-5
    MAX_ITER = 10000
    CHECK_INTERVAL = 10
    ADAPTIVE_RHO_INTERVAL = 50
    SCALING_ITER = 10

    # Verification
    GOAL_POSITION_TOL = 0.05
    GOAL_THETA_TOL = 0.1
    VERIFY_TOL = 1e-6
    # Range of s^2 + c^2 for the piecewise sine and cosine over [-pi, pi]
    TRIG_NORM_BAND = (1.0, 1.0 + (math.pi / 2 - 1) ** 2)


# Converting


def convert_obj_to_dict(item_or_items, item_format):
    if item_or_items is None:
        return item_or_items
    if isinstance(item_or_items, (list, tuple)):
        return [convert_obj_to_dict(item, item_format) for item in item_or_items]
    return {p: getattr(item_or_items, p, None) for p in item_format}


def apply_data_on_obj(obj, item, item_format):
    if isinstance(item, list):
        for i, p in enumerate(item_format):
            if i >= len(item):
                break
            setattr(obj, p, item[i])
    elif isinstance(item, dict):
        for p in item_format:
            if p in item:
                setattr(obj, p, item.get(p))
    return obj
