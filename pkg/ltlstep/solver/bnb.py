"""
Best-first branch and bound over the binary variables of a ModelIR.

Nodes never copy the model: each carries a {variable index: value} overlay
which becomes equal lower and upper bounds on the identity rows of the
relaxation. Sum-to-one groups are branched as a whole (one child per free
member), other binaries by 0/1 splitting.
"""

import heapq
import logging
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ltlstep.api import ErrorCode, RelaxationStatus, SolveStatus
from ltlstep.core.threading import Incumbent
from ltlstep.errors import NumericalError, SolverError
from ltlstep.solver import SolveResult, SolverConfig, highs
from ltlstep.solver.admm import RelaxationResult, RelaxationSolver
from ltlstep.utils import time_util

RETRY_ITER_SCALE = 4
RETRY_RHO_SCALE = 100.0


class Node:
    __slots__ = ("id", "parent_id", "bound", "fixings", "warm_start", "depth")

    def __init__(self, id, parent_id, bound, fixings, warm_start=None, depth=0):
        self.id = id
        self.parent_id = parent_id
        self.bound = bound
        self.fixings = fixings
        self.warm_start = warm_start
        self.depth = depth

    def __repr__(self):
        return "<Node %s parent: %s bound: %s fixed: %s>" % (self.id, self.parent_id, self.bound, len(self.fixings))


class BranchAndBound:
    node_count = 0
    # Lowest bound of nodes pruned by the gap test
    pruned_bound = math.inf

    def __init__(self, model, config=None):
        self.logger = logging.getLogger("BnB.%s" % model.name)
        self.config = config or SolverConfig()
        self.model = model
        model.validate()
        self.data = model.to_qp_data()
        self.relaxation = RelaxationSolver(self.data, self.config)
        self.binary_indices = list(self.data.binary_indices)
        self.groups = sorted(
            ((-priority, indices[0] if indices else -1, indices) for _, indices, priority in model.groups),
            key=lambda item: (item[0], item[1]))
        self.incumbent = Incumbent()
        self.node_log = [] if self.config.is_node_log_enabled else None
        self._counter = 0
        self._precise_relaxation = None

    # Bounds

    def _get_bounds(self, fixings):
        m_lin = self.data.linear_row_count
        l, u = self.data.l.copy(), self.data.u.copy()
        for index, value in fixings.items():
            l[m_lin + index] = u[m_lin + index] = value
        return l, u

    def _is_fixed(self, index, fixings):
        variable = self.model.variables[index]
        return index in fixings or variable.lower == variable.upper

    def _get_fixed_value(self, index, fixings):
        value = fixings.get(index)
        return self.model.variables[index].lower if value is None else value

    def _get_gap_tolerance(self, objective):
        return self.config.gap * max(1.0, abs(objective))

    def _is_pruned(self, bound):
        objective = self.incumbent.objective
        return objective < math.inf and bound >= objective - self._get_gap_tolerance(objective)

    # Relaxation

    def _solve_relaxation(self, fixings, warm_start=None):
        l, u = self._get_bounds(fixings)
        result = self.relaxation.solve(l, u, warm_start=warm_start)
        if result.status == RelaxationStatus.UNRESOLVED:
            result = self._resolve(result, l, u)
        if result.status == RelaxationStatus.DUAL_INFEASIBLE:
            raise SolverError(ErrorCode.MODEL_INVALID, details="relaxation is unbounded")
        return result

    def _resolve(self, result, l, u):
        """Empty nodes are pruned by an exact LP check, others are retried cold with another rho.

        A point which stays unresolved is still returned: its node is branched with the parent's bound.
        """
        self.logger.debug("Relaxation unresolved after %s iterations (residuals %s/%s)",
                          result.iterations, result.primal_residual, result.dual_residual)
        is_feasible = highs.is_relaxation_feasible(self.data.A, l, u)
        if is_feasible is None:
            raise NumericalError(result.iterations, result.primal_residual, result.dual_residual)
        if not is_feasible:
            return RelaxationResult(status=RelaxationStatus.PRIMAL_INFEASIBLE, iterations=result.iterations)

        # Stalled primal residual asks for a larger step, stalled dual one for a smaller
        rho = result.rho or self.config.rho
        rho = rho * RETRY_RHO_SCALE if result.primal_residual >= result.dual_residual else rho / RETRY_RHO_SCALE
        retried = self.relaxation.solve(l, u, max_iter=self.config.max_iter * RETRY_ITER_SCALE, rho=rho)
        if retried.status == RelaxationStatus.UNRESOLVED:
            self.logger.warning("Relaxation stays unresolved (residuals %s/%s), branching without a bound",
                                retried.primal_residual, retried.dual_residual)
        elif retried.status == RelaxationStatus.PRIMAL_INFEASIBLE:
            # HiGHS has the last word on feasibility
            return result
        return retried

    def _evaluate(self, node):
        # (Skipped nodes return None; they would be pruned when processed anyway)
        if self._is_pruned(node.bound):
            return None
        return self._solve_relaxation(node.fixings, node.warm_start)

    # Branching

    def _get_fractional(self, values, fixings, tol):
        return [index for index in self.binary_indices
                if not self._is_fixed(index, fixings) and min(values[index], 1 - values[index]) > tol]

    def _select_branch(self, values, fixings, tol):
        """Returns list of child overlays, or None if nothing is left to branch on."""
        # Groups by priority, then most fractional member, then lowest index
        best = None
        for neg_priority, _, indices in self.groups:
            if any(self._is_fixed(index, fixings) and self._get_fixed_value(index, fixings) == 1
                   for index in indices):
                continue
            free = [index for index in indices if not self._is_fixed(index, fixings)]
            if len(free) < 2:
                continue
            score, member = max((min(values[index], 1 - values[index]), -index) for index in free)
            if score <= tol:
                continue
            key = (neg_priority, -score, -member)
            if best is None or key < best[0]:
                best = (key, free)
        if best is not None:
            free = best[1]
            children = []
            for member in sorted(free, key=lambda index: (-values[index], index)):
                overlay = {index: 0.0 for index in free}
                overlay[member] = 1.0
                children.append(overlay)
            return children

        candidates = [index for index in self.binary_indices if not self._is_fixed(index, fixings)]
        if not candidates:
            return None
        score, index = max((min(values[index], 1 - values[index]), -index) for index in candidates)
        index = -index
        first = float(round(values[index]))
        return [{index: first}, {index: 1.0 - first}]

    # Incumbent

    def _try_incumbent(self, values, fixings):
        """Fixes rounded binaries and re-solves, so incumbents have exact 0/1 binaries.

        Returns True if the rounded point is feasible.
        """
        rounded = dict(fixings)
        for index in self.binary_indices:
            if not self._is_fixed(index, fixings):
                rounded[index] = float(round(values[index]))
        if len(rounded) != len(fixings):
            result = self._solve_relaxation(rounded)
            if result.status != RelaxationStatus.SOLVED:
                return False
            values = result.x
        values = np.array(values, dtype=float)
        for index in self.binary_indices:
            values[index] = rounded[index] if index in rounded else self.model.variables[index].lower
        violation = self.model.max_violation(values)
        if violation > self.config.feasibility_tol:
            values, violation = self._polish_incumbent(rounded, values)
        if violation > self.config.feasibility_tol:
            self.logger.warning("Rounded point violates rows by %s, not accepted", violation)
            return False
        objective = self.model.objective_value(values)
        if self.incumbent.offer(objective, values):
            self.logger.info("New incumbent %s after %s nodes", objective, self.node_count)
        return True

    def _polish_incumbent(self, rounded, values):
        # Re-solves with tolerances tightened 1000 times
        if self._precise_relaxation is None:
            config = self.config.copy(eps_abs=self.config.eps_abs * 1e-3, eps_rel=self.config.eps_rel * 1e-3)
            self._precise_relaxation = RelaxationSolver(self.data, config)
        l, u = self._get_bounds(rounded)
        result = self._precise_relaxation.solve(l, u, max_iter=self.config.max_iter * RETRY_ITER_SCALE)
        if result.status != RelaxationStatus.SOLVED:
            return values, math.inf
        values = np.array(result.x, dtype=float)
        for index in self.binary_indices:
            values[index] = rounded[index] if index in rounded else self.model.variables[index].lower
        return values, self.model.max_violation(values)

    # Search

    def _make_node(self, parent, bound, fixings, warm_start=None):
        self._counter += 1
        return Node(self._counter, parent.id if parent else None, bound, fixings, warm_start,
                    parent.depth + 1 if parent else 0)

    def _process(self, node, result, heap):
        self.node_count += 1
        if result is None or result.status == RelaxationStatus.PRIMAL_INFEASIBLE:
            return
        is_solved = result.status == RelaxationStatus.SOLVED
        bound = max(node.bound, result.objective) if is_solved else node.bound
        if self.node_log is not None:
            self.node_log.append((node.id, node.parent_id, bound, result.objective if is_solved else None))
        if self._is_pruned(bound):
            self.pruned_bound = min(self.pruned_bound, bound)
            return

        tol = self.config.integrality_tol
        if not self._get_fractional(result.x, node.fixings, tol) and self._try_incumbent(result.x, node.fixings):
            return
        children = self._select_branch(result.x, node.fixings, tol) or (
            self._select_branch(result.x, node.fixings, -1.0))
        if not children:
            return
        warm_start = result.warm_start if self.config.is_warm_start_enabled else None
        for overlay in children:
            fixings = dict(node.fixings)
            fixings.update(overlay)
            child = self._make_node(node, bound, fixings, warm_start)
            heapq.heappush(heap, (child.bound, child.id, child))

    def _dive(self, root, result, deadline):
        # Follows the most promising child from the root until an integer point or a dead end
        fixings = dict(root.fixings)
        tol = self.config.integrality_tol
        for depth in range(len(self.binary_indices) + 1):
            if deadline.is_expired():
                self.logger.debug("Dive stopped by the time limit at depth %s", depth)
                break
            if not self._get_fractional(result.x, fixings, tol):
                self._try_incumbent(result.x, fixings)
                break
            children = self._select_branch(result.x, fixings, tol)
            if not children:
                break
            fixings.update(children[0])
            result = self._solve_relaxation(fixings, result.warm_start)
            if result.status != RelaxationStatus.SOLVED:
                self.logger.debug("Dive ended at depth %s: %s", depth + 1, result.status)
                break

    def solve(self):
        config = self.config
        deadline = time_util.Deadline(config.time_limit)
        self.logger.info("Solving %r with %s threads", self.model, config.threads)

        heap = []
        is_exhausted = False
        is_root_processed = not deadline.is_expired()
        if not is_root_processed:
            self.logger.info("Time limit %s s expired before the root relaxation", config.time_limit)
        else:
            root = self._make_node(None, -math.inf, {})
            root_result = self._solve_relaxation({})
            if root_result.status == RelaxationStatus.SOLVED and config.is_dive_enabled:
                self._dive(root, root_result, deadline)
            self._process(root, root_result, heap)

        executor = ThreadPoolExecutor(config.threads) if config.threads > 1 else None
        try:
            while is_root_processed:
                if not heap:
                    is_exhausted = True
                    break
                if deadline.is_expired() or self.node_count >= config.node_limit:
                    break
                batch = [heapq.heappop(heap)[2] for _ in range(min(max(1, config.threads), len(heap)))]
                if executor:
                    results = list(executor.map(self._evaluate, batch))
                else:
                    results = [self._evaluate(node) for node in batch]
                for node, result in zip(batch, results):
                    self._process(node, result, heap)
        finally:
            if executor:
                executor.shutdown()

        objective, values = self.incumbent.get()
        bounds = [self.pruned_bound] + [item[0] for item in heap] + ([] if is_root_processed else [-math.inf])
        has_incumbent = values is not None
        if is_exhausted:
            status = SolveStatus.OPTIMAL if has_incumbent else SolveStatus.INFEASIBLE
        else:
            status = SolveStatus.TIME_LIMIT_INCUMBENT if has_incumbent else SolveStatus.TIME_LIMIT_NO_INCUMBENT
        bound = min(bounds + [objective]) if has_incumbent else min(bounds)
        gap = max(0.0, (objective - bound) / max(1.0, abs(objective))) if has_incumbent else None
        wall_time = deadline.elapsed
        result = SolveResult(status=status, values=values if has_incumbent else None,
                             objective=objective if has_incumbent else None,
                             bound=bound, gap=gap, gap_tolerance=config.gap, node_count=self.node_count,
                             wall_time=wall_time, node_log=self.node_log)
        self.logger.info("Finished: %r (open nodes: %s)", result, len(heap))
        return result


def branch_and_bound(model, config=None):
    return BranchAndBound(model, config).solve()

