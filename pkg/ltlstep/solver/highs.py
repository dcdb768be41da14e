"""
Feasibility checks of pure-linear models with the HiGHS MILP solver bundled
with scipy. Used to cross-check encodings without the built-in search.
"""

import logging

import numpy as np
import scipy.sparse as sp
from scipy.optimize import Bounds, LinearConstraint, milp

from ltlstep.api import ErrorCode, Sense
from ltlstep.errors import SolverError

logger = logging.getLogger(__name__)

# scipy.optimize.milp statuses
STATUS_OPTIMAL = 0
STATUS_INFEASIBLE = 2


def _to_milp(model, fixings):
    n = model.variable_count
    rows, cols, data = [], [], []
    lower = np.empty(len(model.rows))
    upper = np.empty(len(model.rows))
    for row in model.rows:
        for index, coef in row.coefficients:
            rows.append(row.index)
            cols.append(index)
            data.append(coef)
        lower[row.index] = row.rhs if row.sense in (Sense.GE, Sense.EQ) else -np.inf
        upper[row.index] = row.rhs if row.sense in (Sense.LE, Sense.EQ) else np.inf
    A = sp.csr_matrix((data, (rows, cols)), shape=(len(model.rows), n))
    var_lower = np.array([v.lower for v in model.variables], dtype=float)
    var_upper = np.array([v.upper for v in model.variables], dtype=float)
    for index, value in (fixings or {}).items():
        var_lower[index] = var_upper[index] = value
    integrality = np.array([1 if v.is_binary else 0 for v in model.variables])
    return A, lower, upper, Bounds(var_lower, var_upper), integrality


def check_feasibility(model, fixings=None):
    """Returns values of some feasible point, or None if the model is infeasible.

    fixings - {variable index or name: value}, e.g., atom assignments.
    """
    if model.quadratic_rows:
        raise SolverError(ErrorCode.MODEL_QUADRATIC)
    fixings = {(model.get_variable(key).index if isinstance(key, str) else key): value
               for key, value in (fixings or {}).items()}
    n = model.variable_count
    if n == 0:
        # Only empty rows may be left
        return np.zeros(0) if model.max_violation([]) <= 1e-9 else None
    A, lower, upper, bounds, integrality = _to_milp(model, fixings)
    constraints = [LinearConstraint(A, lower, upper)] if model.rows else []
    result = milp(np.zeros(n), constraints=constraints, bounds=bounds, integrality=integrality)
    if result.status == STATUS_OPTIMAL:
        return result.x
    if result.status == STATUS_INFEASIBLE:
        return None
    raise SolverError(ErrorCode.MODEL_INVALID, details="HiGHS: %s" % result.message)


def is_relaxation_feasible(A, l, u):
    """Decides whether l <= Ax <= u has a solution (binaries already relaxed in A's identity rows).

    Returns True or False, or None if HiGHS gives no answer.
    """
    n = A.shape[1]
    if n == 0:
        return bool(np.all(l <= 0) and np.all(u >= 0))
    result = milp(np.zeros(n), constraints=[LinearConstraint(A, l, u)], bounds=Bounds(-np.inf, np.inf))
    if result.status == STATUS_OPTIMAL:
        return True
    if result.status == STATUS_INFEASIBLE:
        return False
    logger.warning("HiGHS gave no feasibility answer: %s", result.message)
    return None
