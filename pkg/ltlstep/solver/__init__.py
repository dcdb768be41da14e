"""
Solver-agnostic mixed-integer model and solver settings.

Objective convention: 1/2 x^T P x + q^T x + constant, P symmetric PSD.
Relaxation data (QPData) appends one identity row per variable after the
linear rows, so node bounds change only l and u of the constraint matrix.
"""

import logging
import math
from collections import namedtuple

import numpy as np
import scipy.sparse as sp

from ltlstep.api import Default, ErrorCode, Sense, VarKind
from ltlstep.errors import SolverError

logger = logging.getLogger(__name__)

QPData = namedtuple("QPData", [
    "P", "q", "constant", "A", "l", "u", "is_equality", "linear_row_count", "binary_indices",
])


class Variable:
    __slots__ = ("index", "name", "kind", "lower", "upper")

    def __init__(self, index, name, kind, lower, upper):
        self.index = index
        self.name = name
        self.kind = kind
        self.lower = lower
        self.upper = upper

    @property
    def is_binary(self):
        return self.kind == VarKind.BINARY

    @property
    def is_fixed(self):
        return self.lower == self.upper

    def __repr__(self):
        return "<Variable %s %s [%s, %s]>" % (self.name, self.kind, self.lower, self.upper)


class LinearRow:
    """sum(coef * x[index] for index, coef in coefficients) <sense> rhs"""

    __slots__ = ("index", "name", "coefficients", "sense", "rhs")

    def __init__(self, index, name, coefficients, sense, rhs):
        self.index = index
        self.name = name
        self.coefficients = coefficients
        self.sense = sense
        self.rhs = rhs

    def activity(self, values):
        return sum(coef * values[index] for index, coef in self.coefficients)

    def violation(self, values):
        activity = self.activity(values)
        if self.sense == Sense.LE:
            return max(0.0, activity - self.rhs)
        if self.sense == Sense.GE:
            return max(0.0, self.rhs - activity)
        return abs(activity - self.rhs)

    def __repr__(self):
        return "<LinearRow %s: %s %s %s>" % (self.name, self.coefficients, self.sense, self.rhs)


class QuadraticRow:
    """sum(coef * x[i] * x[j] for i, j, coef in quadratic) + linear part <= rhs"""

    __slots__ = ("index", "name", "quadratic", "coefficients", "rhs")

    sense = Sense.LE

    def __init__(self, index, name, quadratic, coefficients, rhs):
        self.index = index
        self.name = name
        self.quadratic = quadratic
        self.coefficients = coefficients
        self.rhs = rhs

    def activity(self, values):
        return (sum(coef * values[i] * values[j] for i, j, coef in self.quadratic) +
                sum(coef * values[index] for index, coef in self.coefficients))

    def violation(self, values):
        return max(0.0, self.activity(values) - self.rhs)


class ModelIR:
    """Mixed-integer model with linear rows, optional convex quadratic rows and a PSD objective.

    Sum-to-one binary groups are kept separately and used for branching (and exported as SOS1).
    """

    def __init__(self, name="model"):
        self.name = name
        self.variables = []
        self.rows = []
        self.quadratic_rows = []
        # [(name, [var indices], priority)]
        self.groups = []
        # Objective: {(i, j): P[i][j]} with i <= j
        self.objective_quadratic = {}
        self.objective_linear = {}
        self.objective_constant = 0.0
        self._variable_by_name = {}
        self._row_names = set()

    def __repr__(self):
        return "<ModelIR %s vars: %s (binary: %s) rows: %s quadratic rows: %s groups: %s>" % (
            self.name, self.variable_count, len(self.binary_indices), len(self.rows),
            len(self.quadratic_rows), len(self.groups))

    # Variables

    @property
    def variable_count(self):
        return len(self.variables)

    @property
    def binary_indices(self):
        return [v.index for v in self.variables if v.kind == VarKind.BINARY]

    @property
    def variable_names(self):
        return [v.name for v in self.variables]

    def add_variable(self, name, kind=VarKind.CONTINUOUS, lower=-math.inf, upper=math.inf):
        if name in self._variable_by_name:
            raise SolverError(ErrorCode.MODEL_INVALID, details="duplicate variable name %s" % name)
        if kind not in (VarKind.CONTINUOUS, VarKind.BINARY):
            raise SolverError(ErrorCode.MODEL_INVALID, details="unknown variable kind %s" % kind)
        lower, upper = float(lower), float(upper)
        if math.isnan(lower) or math.isnan(upper) or lower > upper or lower == math.inf or upper == -math.inf:
            raise SolverError(ErrorCode.MODEL_INVALID,
                              details="wrong bounds [%s, %s] of %s" % (lower, upper, name))
        if kind == VarKind.BINARY and (lower < 0 or upper > 1):
            raise SolverError(ErrorCode.MODEL_INVALID, details="binary %s bounds out of [0, 1]" % name)
        variable = Variable(len(self.variables), name, kind, lower, upper)
        self.variables.append(variable)
        self._variable_by_name[name] = variable
        return variable

    def add_binary(self, name):
        return self.add_variable(name, VarKind.BINARY, 0, 1)

    def get_variable(self, name):
        return self._variable_by_name.get(name)

    def fix_variable(self, variable, value):
        variable = self._to_variable(variable)
        if variable.is_binary and value not in (0, 1):
            raise SolverError(ErrorCode.MODEL_INVALID,
                              details="binary %s can not be fixed to %s" % (variable.name, value))
        variable.lower = variable.upper = float(value)

    def _to_variable(self, variable):
        if isinstance(variable, Variable):
            return variable
        if isinstance(variable, str):
            return self._variable_by_name[variable]
        return self.variables[variable]

    def _to_index(self, variable):
        return variable.index if isinstance(variable, Variable) else (
            self._variable_by_name[variable].index if isinstance(variable, str) else int(variable))

    def _merge_coefficients(self, coefficients):
        # Accepts dict or pairs, keys are variables, names or indices
        items = coefficients.items() if isinstance(coefficients, dict) else coefficients
        merged = {}
        for variable, coef in items:
            index = self._to_index(variable)
            if not 0 <= index < len(self.variables):
                raise SolverError(ErrorCode.MODEL_INVALID, details="unknown variable %s" % (variable,))
            coef = float(coef)
            if not math.isfinite(coef):
                raise SolverError(ErrorCode.MODEL_INVALID, details="coefficient %s is not finite" % coef)
            merged[index] = merged.get(index, 0.0) + coef
        return [(index, coef) for index, coef in sorted(merged.items()) if coef != 0]

    def _make_row_name(self, name, prefix):
        if name is None:
            name = "%s%s" % (prefix, len(self.rows) + len(self.quadratic_rows))
        if name in self._row_names:
            raise SolverError(ErrorCode.MODEL_INVALID, details="duplicate row name %s" % name)
        self._row_names.add(name)
        return name

    # Rows

    def add_row(self, coefficients, sense, rhs, name=None):
        if sense not in Sense.all:
            raise SolverError(ErrorCode.MODEL_INVALID, details="unknown sense %s" % sense)
        rhs = float(rhs)
        if not math.isfinite(rhs):
            raise SolverError(ErrorCode.MODEL_INVALID, details="rhs %s is not finite" % rhs)
        row = LinearRow(len(self.rows), self._make_row_name(name, "c"),
                        self._merge_coefficients(coefficients), sense, rhs)
        self.rows.append(row)
        return row

    def add_quadratic_row(self, quadratic, coefficients, rhs, name=None):
        # quadratic - [(var_i, var_j, coef)]
        terms = {}
        for var_i, var_j, coef in quadratic:
            i, j = sorted((self._to_index(var_i), self._to_index(var_j)))
            terms[(i, j)] = terms.get((i, j), 0.0) + float(coef)
        row = QuadraticRow(len(self.quadratic_rows), self._make_row_name(name, "q"),
                           [(i, j, coef) for (i, j), coef in sorted(terms.items()) if coef != 0],
                           self._merge_coefficients(coefficients), float(rhs))
        self.quadratic_rows.append(row)
        return row

    def add_group(self, members, name=None, priority=0):
        # Binaries which sum to one (the row itself is added separately)
        indices = [self._to_index(member) for member in members]
        for index in indices:
            if not self.variables[index].is_binary:
                raise SolverError(ErrorCode.MODEL_INVALID,
                                  details="group member %s is not binary" % self.variables[index].name)
        self.groups.append((name or "g%s" % len(self.groups), indices, priority))

    # Objective

    def add_objective_linear(self, coefficients, constant=0.0):
        for index, coef in self._merge_coefficients(coefficients):
            self.objective_linear[index] = self.objective_linear.get(index, 0.0) + coef
        self.objective_constant += float(constant)

    def add_objective_quadratic(self, i, j, value):
        # Adds value to P[i][j] and P[j][i] (value once if i == j)
        i, j = sorted((self._to_index(i), self._to_index(j)))
        self.objective_quadratic[(i, j)] = self.objective_quadratic.get((i, j), 0.0) + float(value)

    def add_objective_form(self, expressions, matrix):
        """Adds e^T M e where e[a] = sum(coef * x) + constant for (coefficients, constant) in expressions."""
        matrix = np.asarray(matrix, dtype=float)
        merged = [(self._merge_coefficients(coefs), float(constant)) for coefs, constant in expressions]
        for a, (coefs_a, const_a) in enumerate(merged):
            for b, (coefs_b, const_b) in enumerate(merged):
                weight = matrix[a, b]
                if weight == 0:
                    continue
                # weight * (c_a x + k_a)(c_b x + k_b)
                for i, coef_i in coefs_a:
                    for j, coef_j in coefs_b:
                        value = weight * coef_i * coef_j
                        # 1/2 x^T P x convention: P[i][j] + P[j][i] gets 2 * value
                        if i == j:
                            self.add_objective_quadratic(i, i, 2 * value)
                        else:
                            self.add_objective_quadratic(i, j, value)
                    self.objective_linear[i] = self.objective_linear.get(i, 0.0) + weight * coef_i * const_b
                for j, coef_j in coefs_b:
                    self.objective_linear[j] = self.objective_linear.get(j, 0.0) + weight * const_a * coef_j
                self.objective_constant += weight * const_a * const_b

    def objective_value(self, values):
        result = self.objective_constant
        for (i, j), value in self.objective_quadratic.items():
            result += (0.5 if i == j else 1.0) * value * values[i] * values[j]
        for index, coef in self.objective_linear.items():
            result += coef * values[index]
        return result

    # Checks

    def max_violation(self, values):
        result = 0.0
        for variable in self.variables:
            value = values[variable.index]
            result = max(result, variable.lower - value, value - variable.upper)
        for row in self.rows:
            result = max(result, row.violation(values))
        for row in self.quadratic_rows:
            result = max(result, row.violation(values))
        return result

    def objective_matrix(self):
        n = self.variable_count
        rows, cols, data = [], [], []
        for (i, j), value in self.objective_quadratic.items():
            rows.append(i)
            cols.append(j)
            data.append(value)
            if i != j:
                rows.append(j)
                cols.append(i)
                data.append(value)
        return sp.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsc()

    def validate(self):
        """Checks finiteness, binary bounds, group membership and PSD objective (Cholesky)."""
        for variable in self.variables:
            if variable.is_binary and (variable.lower < 0 or variable.upper > 1):
                raise SolverError(ErrorCode.MODEL_INVALID, details="binary %s out of [0, 1]" % variable.name)
        for value in list(self.objective_quadratic.values()) + list(self.objective_linear.values()):
            if not math.isfinite(value):
                raise SolverError(ErrorCode.MODEL_INVALID, details="objective coefficient is not finite")
        if not self.variables:
            return
        P = self.objective_matrix().toarray()
        scale = max(1.0, float(np.max(np.abs(P))))
        try:
            np.linalg.cholesky(P + 1e-9 * scale * np.eye(len(P)))
        except np.linalg.LinAlgError:
            raise SolverError(ErrorCode.MODEL_INVALID, details="objective is not positive semidefinite")

    # Matrices

    def to_qp_data(self):
        """Relaxation data with binaries relaxed to their bounds. Quadratic rows are not allowed."""
        if self.quadratic_rows:
            raise SolverError(ErrorCode.MODEL_QUADRATIC)
        n = self.variable_count
        m = len(self.rows)
        rows, cols, data = [], [], []
        l = np.empty(m + n)
        u = np.empty(m + n)
        is_equality = np.zeros(m + n, dtype=bool)
        for row in self.rows:
            for index, coef in row.coefficients:
                rows.append(row.index)
                cols.append(index)
                data.append(coef)
            l[row.index] = row.rhs if row.sense in (Sense.GE, Sense.EQ) else -math.inf
            u[row.index] = row.rhs if row.sense in (Sense.LE, Sense.EQ) else math.inf
            is_equality[row.index] = row.sense == Sense.EQ
        for variable in self.variables:
            rows.append(m + variable.index)
            cols.append(variable.index)
            data.append(1.0)
            l[m + variable.index] = variable.lower
            u[m + variable.index] = variable.upper
            is_equality[m + variable.index] = variable.is_fixed
        A = sp.coo_matrix((data, (rows, cols)), shape=(m + n, n)).tocsc()
        q = np.zeros(n)
        for index, coef in self.objective_linear.items():
            q[index] = coef
        return QPData(self.objective_matrix(), q, self.objective_constant, A, l, u,
                      is_equality, m, np.array(self.binary_indices, dtype=int))

    # Comparison

    def canonical(self):
        # Structure used to compare models (e.g., after export and re-import)
        return (
            tuple((v.name, v.kind, v.lower, v.upper) for v in self.variables),
            tuple((r.name, tuple(r.coefficients), r.sense, r.rhs) for r in self.rows),
            tuple((r.name, tuple(r.quadratic), tuple(r.coefficients), r.rhs) for r in self.quadratic_rows),
            tuple(sorted((k, v) for k, v in self.objective_quadratic.items() if v != 0)),
            tuple(sorted((k, v) for k, v in self.objective_linear.items() if v != 0)),
            self.objective_constant,
            tuple((name, tuple(members)) for name, members, _ in self.groups),
        )


class SolverConfig:
    """Search and relaxation settings.

    Values come from Default, then settings.SOLVER_SETTINGS (if present), then kwargs.
    """

    gap = Default.GAP
    time_limit = Default.TIME_LIMIT
    node_limit = Default.NODE_LIMIT
    threads = Default.THREADS
    integrality_tol = Default.INTEGRALITY_TOL
    feasibility_tol = Default.FEASIBILITY_TOL
    is_dive_enabled = True
    is_node_log_enabled = False

    rho = Default.RHO
    rho_eq_scale = Default.RHO_EQ_SCALE
    sigma = Default.SIGMA
    alpha = Default.ALPHA
    eps_abs = Default.EPS_ABS
    eps_rel = Default.EPS_REL
    eps_infeasible = Default.EPS_INFEASIBLE
    max_iter = Default.MAX_ITER
    check_interval = Default.CHECK_INTERVAL
    adaptive_rho_interval = Default.ADAPTIVE_RHO_INTERVAL
    scaling_iter = Default.SCALING_ITER
    is_polish_enabled = True
    is_warm_start_enabled = True

    def __init__(self, **kwargs):
        try:
            import settings
            overrides = getattr(settings, "SOLVER_SETTINGS", None) or {}
        except ImportError:
            overrides = {}
        for key, value in list(overrides.items()) + list(kwargs.items()):
            if value is None:
                continue
            if not hasattr(self.__class__, key):
                raise Exception("Unknown solver setting: %s" % key)
            setattr(self, key, value)

    def copy(self, **kwargs):
        result = SolverConfig.__new__(SolverConfig)
        result.__dict__.update(self.__dict__)
        for key, value in kwargs.items():
            if not hasattr(self.__class__, key):
                raise Exception("Unknown solver setting: %s" % key)
            setattr(result, key, value)
        return result

    def __repr__(self):
        return "<SolverConfig %s>" % {k: v for k, v in sorted(self.__dict__.items())}


class SolveResult:
    status = None
    # Variable values (exact 0/1 for binaries) or None
    values = None
    objective = None
    # Lower bound on the optimum
    bound = None
    gap = None
    gap_tolerance = Default.GAP
    node_count = 0
    wall_time = 0.0
    # [(node id, parent id, recorded bound, relaxation objective)] when enabled
    node_log = None

    def __init__(self, **kwargs):
        for key, value in kwargs.items():
            setattr(self, key, value)

    def __repr__(self):
        return "<SolveResult %s objective: %s gap: %s nodes: %s time: %.3f s>" % (
            self.status, self.objective, self.gap, self.node_count, self.wall_time)
