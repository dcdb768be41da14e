"""
Dense primal active-set QP solver. Slow, but independent from the
operator-splitting solver, so tests use it as an oracle for relaxations
of small models.
"""

import logging

import numpy as np
from scipy.optimize import linprog

from ltlstep.api import RelaxationStatus

logger = logging.getLogger(__name__)

MAX_ITER = 500
TOL = 1e-9


class ReferenceResult:
    status = None
    x = None
    objective = None
    iterations = 0

    def __init__(self, **kwargs):
        for key, value in kwargs.items():
            setattr(self, key, value)

    def __repr__(self):
        return "<ReferenceResult %s objective: %s iterations: %s>" % (self.status, self.objective, self.iterations)


def _to_inequalities(A, l, u):
    # l <= A x <= u  ->  E x = b (equal sides), G x >= h (others)
    is_equal = np.isfinite(l) & np.isfinite(u) & (np.abs(u - l) <= TOL)
    has_lower = np.isfinite(l) & ~is_equal
    has_upper = np.isfinite(u) & ~is_equal
    E, b = A[is_equal], l[is_equal]
    G = np.vstack((A[has_lower], -A[has_upper]))
    h = np.concatenate((l[has_lower], -u[has_upper]))
    return E, b, G, h


def _find_feasible_point(E, b, G, h, n):
    result = linprog(np.zeros(n), A_ub=-G if len(G) else None, b_ub=-h if len(G) else None,
                     A_eq=E if len(E) else None, b_eq=b if len(E) else None,
                     bounds=[(None, None)] * n, method="highs")
    return result.x if result.status == 0 else None


def solve_qp(P, q, A, l, u, constant=0.0):
    """Minimizes 1/2 x^T P x + q^T x + constant subject to l <= A x <= u (dense arrays)."""
    P = np.asarray(P, dtype=float)
    q = np.asarray(q, dtype=float)
    A = np.asarray(A, dtype=float).reshape(-1, len(q))
    l = np.asarray(l, dtype=float)
    u = np.asarray(u, dtype=float)
    n = len(q)

    if np.any(l > u + TOL):
        return ReferenceResult(status=RelaxationStatus.PRIMAL_INFEASIBLE)
    E, b, G, h = _to_inequalities(A, l, u)

    # Linear objective
    if not np.any(P):
        result = linprog(q, A_ub=-G if len(G) else None, b_ub=-h if len(G) else None,
                         A_eq=E if len(E) else None, b_eq=b if len(E) else None,
                         bounds=[(None, None)] * n, method="highs")
        if result.status == 2:
            return ReferenceResult(status=RelaxationStatus.PRIMAL_INFEASIBLE)
        if result.status == 3:
            return ReferenceResult(status=RelaxationStatus.DUAL_INFEASIBLE)
        if result.status != 0:
            return ReferenceResult(status=RelaxationStatus.UNRESOLVED)
        return ReferenceResult(status=RelaxationStatus.SOLVED, x=result.x,
                               objective=float(q @ result.x + constant))

    x = _find_feasible_point(E, b, G, h, n)
    if x is None:
        return ReferenceResult(status=RelaxationStatus.PRIMAL_INFEASIBLE)

    working = []
    for iteration in range(1, MAX_ITER + 1):
        # Equality-constrained step: P p - W^T lambda = -g, W p = 0
        W = np.vstack((E, G[working])) if working else E
        k = len(W)
        g = P @ x + q
        kkt = np.zeros((n + k, n + k))
        kkt[:n, :n] = P
        kkt[:n, n:] = -W.T
        kkt[n:, :n] = W
        solution = np.linalg.lstsq(kkt, np.concatenate((-g, np.zeros(k))), rcond=None)[0]
        p, multipliers = solution[:n], solution[n + len(E):]

        if np.max(np.abs(p), initial=0.0) <= 1e-10 * max(1.0, np.max(np.abs(x), initial=0.0)):
            if not working or np.min(multipliers) >= -1e-10:
                return ReferenceResult(status=RelaxationStatus.SOLVED, x=x, iterations=iteration,
                                       objective=float(0.5 * x @ P @ x + q @ x + constant))
            del working[int(np.argmin(multipliers))]
            continue

        # Longest feasible step along p
        step, blocking = 1.0, None
        for i in range(len(G)):
            if i in working:
                continue
            slope = G[i] @ p
            if slope < -TOL:
                ratio = (h[i] - G[i] @ x) / slope
                if ratio < step:
                    step, blocking = max(ratio, 0.0), i
        if blocking is None and np.linalg.norm(P @ p) <= TOL and g @ p < -TOL:
            return ReferenceResult(status=RelaxationStatus.DUAL_INFEASIBLE, iterations=iteration)
        x = x + step * p
        if blocking is not None:
            working.append(blocking)

    logger.warning("Active-set iteration limit %s reached", MAX_ITER)
    return ReferenceResult(status=RelaxationStatus.UNRESOLVED, x=x, iterations=MAX_ITER,
                           objective=float(0.5 * x @ P @ x + q @ x + constant))


def solve_qp_data(data, l=None, u=None):
    return solve_qp(data.P.toarray(), data.q, data.A.toarray(),
                    data.l if l is None else l, data.u if u is None else u, data.constant)
