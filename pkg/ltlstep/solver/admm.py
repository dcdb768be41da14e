"""
Operator-splitting (ADMM) solver for the convex QP relaxations

    minimize 1/2 x^T P x + q^T x  subject to  l <= A x <= u

in the form used by OSQP: Ruiz equilibration, one quasi-definite KKT
factorization per step size rho (reused between nodes of the search
since bounds only enter the projection), over-relaxation, adaptive rho,
infeasibility certificates and solution polishing on the active set.
"""

import logging
import math
import threading

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from ltlstep.api import Default, RelaxationStatus
from ltlstep.solver import SolverConfig

MIN_SCALING = 1e-4
MAX_SCALING = 1e4
POLISH_DELTA = 1e-7
POLISH_REFINE_ITER = 3
FACTOR_CACHE_SIZE = 8
# Polishing is tried early when residuals are within this factor of tolerance
POLISH_TRIGGER = 1e3


def _limit_scaling(values):
    values = np.where(values < MIN_SCALING, 1.0, values)
    return np.minimum(values, MAX_SCALING)


def _col_norms(matrix):
    if matrix.shape[0] == 0 or matrix.nnz == 0:
        return np.zeros(matrix.shape[1])
    return np.asarray(abs(matrix).max(axis=0).todense()).ravel()


def _row_norms(matrix):
    if matrix.shape[1] == 0 or matrix.nnz == 0:
        return np.zeros(matrix.shape[0])
    return np.asarray(abs(matrix).max(axis=1).todense()).ravel()


def _norm(vector):
    return float(np.max(np.abs(vector))) if len(vector) else 0.0


class RelaxationResult:
    status = None
    # Unscaled primal x, constraint values z and duals y
    x = None
    z = None
    y = None
    objective = None
    primal_residual = None
    dual_residual = None
    iterations = 0
    is_polished = False
    rho = None

    def __init__(self, **kwargs):
        for key, value in kwargs.items():
            setattr(self, key, value)

    @property
    def warm_start(self):
        return (self.x, self.z, self.y) if self.x is not None else None

    def __repr__(self):
        return "<RelaxationResult %s objective: %s residuals: %s/%s iterations: %s polished: %s>" % (
            self.status, self.objective, self.primal_residual, self.dual_residual,
            self.iterations, self.is_polished)


class RelaxationSolver:
    """Solves the relaxation of one model for any bounds l, u on the rows of QPData.A.

    Scaling and factorizations depend only on P, A and rho, so they are shared by
    all calls. Factorizations are cached per thread.
    """

    def __init__(self, data, config=None):
        self.logger = logging.getLogger("Relaxation.%s" % id(self))
        self.config = config or SolverConfig()
        self.data = data
        self.n = data.A.shape[1]
        self.m = data.A.shape[0]
        self.P = data.P.tocsc()
        self.A = data.A.tocsc()
        self.A_csr = self.A.tocsr()
        self.q = np.asarray(data.q, dtype=float)
        self.is_empty_row = _row_norms(self.A) == 0

        if self.n:
            self._scale()
        else:
            self.D, self.E, self.c = np.ones(0), np.ones(self.m), 1.0
            self.P_s, self.q_s, self.A_s = self.P, self.q, self.A

        is_free = np.isinf(data.l) & np.isinf(data.u)
        self.rho_base = np.where(data.is_equality, self.config.rho_eq_scale, 1.0)
        self.is_free = is_free
        self._local = threading.local()

    # Scaling

    def _scale(self):
        n, m = self.n, self.m
        P, q, A = self.P.copy(), self.q.copy(), self.A.copy()
        D, E, c = np.ones(n), np.ones(m), 1.0
        for _ in range(self.config.scaling_iter):
            d = 1 / np.sqrt(_limit_scaling(np.maximum(_col_norms(P), _col_norms(A))))
            e = 1 / np.sqrt(_limit_scaling(_row_norms(A)))
            P = (sp.diags(d) @ P @ sp.diags(d)).tocsc()
            q = d * q
            A = (sp.diags(e) @ A @ sp.diags(d)).tocsc()
            D *= d
            E *= e
            # Cost
            cost_norm = max(float(np.mean(_col_norms(P))) if n else 0.0, _norm(q))
            gamma = 1 / float(_limit_scaling(np.array([cost_norm]))[0])
            P = P * gamma
            q = q * gamma
            c *= gamma
        self.D, self.E, self.c = D, E, c
        self.P_s, self.q_s, self.A_s = P.tocsc(), q, A.tocsc()

    # Factorization

    def _get_rho_vector(self, rho):
        rho_vector = rho * self.rho_base
        rho_vector[self.is_free] = Default.RHO_MIN
        return rho_vector

    def _get_factor(self, rho):
        factors = self._local.__dict__.setdefault("factors", {})
        factor = factors.get(rho)
        if factor is None:
            rho_vector = self._get_rho_vector(rho)
            kkt = sp.bmat([
                [self.P_s + self.config.sigma * sp.eye(self.n), self.A_s.T],
                [self.A_s, -sp.diags(1 / rho_vector)],
            ], format="csc")
            factor = splu(kkt)
            if len(factors) >= FACTOR_CACHE_SIZE:
                del factors[next(iter(factors))]
            factors[rho] = factor
            self.logger.debug("Factorized KKT of size %s for rho %s", kkt.shape[0], rho)
        return factor

    @staticmethod
    def _round_rho(rho):
        # (Grid of quarter decades, so that nodes reuse factorizations)
        rho = min(max(rho, Default.RHO_MIN), Default.RHO_MAX)
        return float(10 ** (round(4 * math.log10(rho)) / 4))

    # Solving

    def objective(self, x):
        return float(0.5 * x @ (self.P @ x) + self.q @ x + self.data.constant)

    def _residuals(self, x, z, y):
        # Unscaled residuals and their tolerances
        config = self.config
        Ax = self.A @ x
        Px = self.P @ x
        Aty = self.A.T @ y
        primal = _norm(Ax - z)
        dual = _norm(Px + self.q + Aty)
        eps_primal = config.eps_abs + config.eps_rel * max(_norm(Ax), _norm(z))
        eps_dual = config.eps_abs + config.eps_rel * max(_norm(Px), _norm(Aty), _norm(self.q))
        return primal, dual, eps_primal, eps_dual

    @staticmethod
    def _project_on_polar_cone(dy, l, u):
        # Multipliers of rows without an upper (lower) bound can't be positive (negative)
        dy = np.where(np.isinf(u), np.minimum(dy, 0.0), dy)
        return np.where(np.isinf(l), np.maximum(dy, 0.0), dy)

    def is_primal_infeasible(self, dy, l, u):
        """Checks the dual step dy (unscaled) as a certificate of l <= Ax <= u being empty."""
        eps = self.config.eps_infeasible
        dy = self._project_on_polar_cone(dy, l, u)
        norm = _norm(dy)
        if norm < 1e-30:
            return False
        dy = dy / norm
        if _norm(self.A.T @ dy) > eps:
            return False
        positive, negative = dy > 0, dy < 0
        support = float(u[positive] @ dy[positive] + l[negative] @ dy[negative])
        return support < -eps

    def _is_dual_infeasible(self, dx, l, u):
        eps = self.config.eps_infeasible
        norm = _norm(dx)
        if norm < 1e-30:
            return False
        dx = dx / norm
        if _norm(self.P @ dx) > eps or self.q @ dx >= -eps:
            return False
        Adx = self.A @ dx
        has_lower, has_upper = np.isfinite(l), np.isfinite(u)
        return not (np.any(has_upper & (Adx > eps)) or np.any(has_lower & (Adx < -eps)))

    def solve(self, l=None, u=None, warm_start=None, max_iter=None, rho=None):
        """Returns RelaxationResult. Status UNRESOLVED means the iteration cap was hit."""
        config = self.config
        l = self.data.l if l is None else np.asarray(l, dtype=float)
        u = self.data.u if u is None else np.asarray(u, dtype=float)
        max_iter = max_iter or config.max_iter
        n = self.n

        # Trivially infeasible bounds or empty rows
        if np.any(l > u + config.feasibility_tol) or np.any(
                self.is_empty_row & ((l > config.feasibility_tol) | (u < -config.feasibility_tol))):
            return RelaxationResult(status=RelaxationStatus.PRIMAL_INFEASIBLE, iterations=0)
        if n == 0:
            return RelaxationResult(status=RelaxationStatus.SOLVED, x=np.zeros(0), z=np.zeros(self.m),
                                    y=np.zeros(self.m), objective=float(self.data.constant),
                                    primal_residual=0.0, dual_residual=0.0)

        D, E, c = self.D, self.E, self.c
        l_s, u_s = E * l, E * u
        if warm_start is not None and config.is_warm_start_enabled:
            x0, z0, y0 = warm_start
            x, z, y = x0 / D, np.clip(z0 * E, l_s, u_s), y0 * c / E
        else:
            x, z, y = np.zeros(n), np.clip(np.zeros(self.m), l_s, u_s), np.zeros(self.m)

        rho = self._round_rho(rho or config.rho)
        rho_vector = self._get_rho_vector(rho)
        inv_rho = 1 / rho_vector
        factor = self._get_factor(rho)
        sigma, alpha = config.sigma, config.alpha
        residuals = (math.inf, math.inf, 0.0, 0.0)

        iteration = 0
        for iteration in range(1, max_iter + 1):
            sol = factor.solve(np.concatenate((sigma * x - self.q_s, z - inv_rho * y)))
            x_tilde = sol[:n]
            z_tilde = z + inv_rho * (sol[n:] - y)
            x_new = alpha * x_tilde + (1 - alpha) * x
            z_relaxed = alpha * z_tilde + (1 - alpha) * z
            z_new = np.clip(z_relaxed + inv_rho * y, l_s, u_s)
            y_new = y + rho_vector * (z_relaxed - z_new)
            dx, dy = x_new - x, y_new - y
            x, z, y = x_new, z_new, y_new

            if iteration % config.check_interval and iteration != max_iter:
                continue

            x_u, z_u, y_u = D * x, z / E, E * y / c
            residuals = primal, dual, eps_primal, eps_dual = self._residuals(x_u, z_u, y_u)
            is_converged = primal <= eps_primal and dual <= eps_dual
            if is_converged or (config.is_polish_enabled and
                                iteration % (5 * config.check_interval) == 0 and
                                primal <= POLISH_TRIGGER * eps_primal and dual <= POLISH_TRIGGER * eps_dual):
                polished = self._polish(x_u, z_u, y_u, l, u) if config.is_polish_enabled else None
                if polished is not None:
                    return polished._replace_iterations(iteration, rho)
                if is_converged:
                    return RelaxationResult(status=RelaxationStatus.SOLVED, x=x_u, z=z_u, y=y_u,
                                            objective=self.objective(x_u), primal_residual=primal,
                                            dual_residual=dual, iterations=iteration, rho=rho)

            if self.is_primal_infeasible(E * dy / c, l, u):
                self.logger.debug("Primal infeasibility certificate at iteration %s", iteration)
                return RelaxationResult(status=RelaxationStatus.PRIMAL_INFEASIBLE, iterations=iteration, rho=rho)
            if self._is_dual_infeasible(D * dx, l, u):
                self.logger.debug("Dual infeasibility certificate at iteration %s", iteration)
                return RelaxationResult(status=RelaxationStatus.DUAL_INFEASIBLE, iterations=iteration, rho=rho)

            if iteration % config.adaptive_rho_interval == 0:
                new_rho = self._estimate_rho(rho, x, z, y)
                if new_rho > 5 * rho or new_rho < 0.2 * rho:
                    rho = new_rho
                    rho_vector = self._get_rho_vector(rho)
                    inv_rho = 1 / rho_vector
                    factor = self._get_factor(rho)

        x_u, z_u, y_u = D * x, z / E, E * y / c
        self.logger.debug("Unresolved after %s iterations: residuals %s", iteration, residuals[:2])
        return RelaxationResult(status=RelaxationStatus.UNRESOLVED, x=x_u, z=z_u, y=y_u,
                                objective=self.objective(x_u), primal_residual=residuals[0],
                                dual_residual=residuals[1], iterations=iteration, rho=rho)

    def _estimate_rho(self, rho, x, z, y):
        Ax = self.A_s @ x
        Px = self.P_s @ x
        Aty = self.A_s.T @ y
        primal = _norm(Ax - z) / max(_norm(Ax), _norm(z), 1e-30)
        dual = _norm(Px + self.q_s + Aty) / max(_norm(Px), _norm(Aty), _norm(self.q_s), 1e-30)
        return self._round_rho(rho * math.sqrt(primal / max(dual, 1e-30)))

    # Polishing

    def _polish(self, x, z, y, l, u):
        """Solves the equality QP on the guessed active set. None if the guess is not optimal."""
        n = self.n
        tol = self.config.feasibility_tol
        is_equality = (u - l) <= 1e-12 * np.maximum(1.0, np.abs(l))
        is_lower = ((z - l < -y) | is_equality) & np.isfinite(l)
        is_upper = (u - z < y) & ~is_lower & np.isfinite(u)
        active = np.where(is_lower | is_upper)[0]
        b = np.where(is_upper, u, l)[active]
        A_active = self.A_csr[active]
        k = len(active)

        rhs = np.concatenate((-self.q, b))
        if k:
            kkt = sp.bmat([[self.P + POLISH_DELTA * sp.eye(n), A_active.T],
                           [A_active, -POLISH_DELTA * sp.eye(k)]], format="csc")
            kkt_exact = sp.bmat([[self.P, A_active.T], [A_active, None]], format="csc")
        else:
            kkt = (self.P + POLISH_DELTA * sp.eye(n)).tocsc()
            kkt_exact = self.P.tocsc()
        try:
            factor = splu(kkt)
        except RuntimeError:
            return None
        sol = factor.solve(rhs)
        for _ in range(POLISH_REFINE_ITER):
            sol = sol + factor.solve(rhs - kkt_exact @ sol)
        if not np.all(np.isfinite(sol)):
            return None

        x_p = sol[:n]
        y_p = np.zeros(self.m)
        y_p[active] = sol[n:]
        # Multipliers must have the sign of their active side
        lower_only = is_lower & ~is_equality
        if np.any(y_p[lower_only] > tol) or np.any(y_p[is_upper] < -tol):
            return None
        z_p = np.clip(self.A @ x_p, l, u)
        primal, dual, eps_primal, eps_dual = self._residuals(x_p, z_p, y_p)
        if primal > eps_primal or dual > eps_dual:
            return None
        return _PolishedResult(status=RelaxationStatus.SOLVED, x=x_p, z=z_p, y=y_p,
                               objective=self.objective(x_p), primal_residual=primal,
                               dual_residual=dual, is_polished=True)


class _PolishedResult(RelaxationResult):
    def _replace_iterations(self, iterations, rho):
        self.iterations = iterations
        self.rho = rho
        return self


def solve_relaxation(model, config=None, fixings=None):
    """Solves the continuous relaxation of model with binaries in [0, 1].

    fixings - {variable index: value} applied on top of variable bounds.
    """
    data = model.to_qp_data()
    l, u = data.l.copy(), data.u.copy()
    for index, value in (fixings or {}).items():
        l[data.linear_row_count + index] = u[data.linear_row_count + index] = value
    return RelaxationSolver(data, config).solve(l, u)
