import itertools
import math

import numpy as np

from ltlstep.api import RelaxationStatus, Sense, SolveStatus
from ltlstep.core.threading import Incumbent
from ltlstep.errors import SolverError
from ltlstep.solver import ModelIR, SolverConfig
from ltlstep.solver.admm import solve_relaxation
from ltlstep.solver.bnb import BranchAndBound, branch_and_bound
from ltlstep.solver.reference import solve_qp_data
from ltlstep.utils.test_util import PlanTestCase


def make_random_miqp(rnd, continuous_count, binary_count):
    """Continuous variables switched on by binaries, with the first 3 binaries in a sum-to-one group."""
    model = ModelIR("miqp")
    xs = [model.add_variable("x%s" % i, lower=-3, upper=3) for i in range(continuous_count)]
    bs = [model.add_binary("b%s" % i) for i in range(binary_count)]
    M = rnd.normal(size=(continuous_count, continuous_count))
    P = 0.5 * M @ M.T + 0.2 * np.eye(continuous_count)
    for i in range(continuous_count):
        for j in range(i, continuous_count):
            model.add_objective_quadratic(xs[i], xs[j], P[i, j])
    model.add_objective_linear({x: rnd.normal(scale=3) for x in xs})
    model.add_objective_linear({b: rnd.uniform(-1, 2) for b in bs})

    group = bs[:3]
    model.add_row({b: 1 for b in group}, Sense.EQ, 1)
    model.add_group(group, priority=1)
    for k, b in enumerate(bs):
        x = xs[k % continuous_count]
        # |x| <= 0.5 + 2 b
        model.add_row({x: 1, b: -2}, Sense.LE, 0.5)
        model.add_row({x: 1, b: 2}, Sense.GE, -0.5)
    # Some coupling rows feasible for x = 0 and any binaries
    for _ in range(rnd.randint(1, 4)):
        coefficients = {x: rnd.normal() for x in xs}
        coefficients.update({b: rnd.uniform(0, 1) for b in bs if rnd.random() < 0.5})
        model.add_row(coefficients, Sense.LE, sum(coef for var, coef in coefficients.items() if var in bs) + 1)
    return model


def solve_by_enumeration(model):
    data = model.to_qp_data()
    m = data.linear_row_count
    best = math.inf
    for bits in itertools.product((0.0, 1.0), repeat=len(data.binary_indices)):
        l, u = data.l.copy(), data.u.copy()
        for index, value in zip(data.binary_indices, bits):
            l[m + index] = u[m + index] = value
        result = solve_qp_data(data, l, u)
        if result.status == RelaxationStatus.SOLVED:
            best = min(best, result.objective)
    return best


def make_group_model():
    # min (b1 - 0.5)^2 + (b2 - 0.5)^2, b1 + b2 = 1: root relaxation is fractional
    model = ModelIR("pair")
    b1, b2 = model.add_binary("b1"), model.add_binary("b2")
    model.add_row({b1: 1, b2: 1}, Sense.EQ, 1)
    model.add_objective_form([({b1: 1}, -0.5), ({b2: 1}, -0.5)], np.eye(2))
    return model


class TestBranchAndBound(PlanTestCase):

    def test_random_against_enumeration(self):
        rnd = np.random.RandomState(21)
        for number in range(50):
            model = make_random_miqp(rnd, rnd.randint(2, 6), rnd.randint(3, 7))
            expected = solve_by_enumeration(model)
            result = branch_and_bound(model)
            self.assertSolveResultIsValid(result, model)
            self.assertAlmostEqual(result.objective, expected, delta=1e-5 * max(1.0, abs(expected)), msg=number)

    def test_pinned_binaries(self):
        rnd = np.random.RandomState(8)
        model = make_random_miqp(rnd, 4, 4)
        for index, value in zip(model.binary_indices, (1, 0, 0, 1)):
            model.fix_variable(index, value)
        result = branch_and_bound(model)
        relaxation = solve_relaxation(model)
        self.assertSolveResultIsValid(result, model)
        self.assertEqual(result.node_count, 1)
        self.assertAlmostEqual(result.objective, relaxation.objective, delta=1e-6 * max(1.0, abs(result.objective)))

    def test_group_branching(self):
        model = make_group_model()
        model.add_group(model.binary_indices)
        result = branch_and_bound(model, SolverConfig(is_dive_enabled=False))
        self.assertSolveResultIsValid(result, model)
        self.assertAlmostEqual(result.objective, 0.5, delta=1e-6)
        # Root and one child per member
        self.assertEqual(result.node_count, 3)
        self.assertIn(list(result.values), ([1.0, 0.0], [0.0, 1.0]))

    def test_binary_branching(self):
        model = make_group_model()
        result = branch_and_bound(model, SolverConfig(is_dive_enabled=False))
        self.assertSolveResultIsValid(result, model)
        self.assertAlmostEqual(result.objective, 0.5, delta=1e-6)

    def test_infeasible(self):
        # Relaxation is feasible at (0.5, 0.5) only
        model = ModelIR("infeasible")
        b1, b2 = model.add_binary("b1"), model.add_binary("b2")
        model.add_row({b1: 1, b2: 1}, Sense.EQ, 1)
        model.add_row({b1: 1, b2: -1}, Sense.EQ, 0)
        result = branch_and_bound(model)
        self.assertSolveResultIsValid(result, model, SolveStatus.INFEASIBLE)
        self.assertIsNone(result.objective)

        # Infeasible root
        model.add_row({b1: 1}, Sense.GE, 2)
        result = branch_and_bound(model)
        self.assertEqual(result.status, SolveStatus.INFEASIBLE)
        self.assertEqual(result.node_count, 1)

    def test_unresolved_relaxations(self):
        # One iteration never resolves a relaxation: empty nodes are pruned by HiGHS, others branched
        config = SolverConfig(max_iter=1)
        model = make_group_model()
        result = BranchAndBound(model, config).solve()
        self.assertSolveResultIsValid(result, model)
        self.assertAlmostEqual(result.objective, 0.5, delta=1e-9)

        model = ModelIR("infeasible")
        b1, b2 = model.add_binary("b1"), model.add_binary("b2")
        model.add_row({b1: 1, b2: 1}, Sense.EQ, 1)
        model.add_row({b1: 1, b2: -1}, Sense.EQ, 0)
        result = BranchAndBound(model, config).solve()
        self.assertSolveResultIsValid(result, model, SolveStatus.INFEASIBLE)

    def test_time_limit_before_root(self):
        model = make_group_model()
        result = branch_and_bound(model, SolverConfig(time_limit=0))
        self.assertSolveResultIsValid(result, model, SolveStatus.TIME_LIMIT_NO_INCUMBENT)
        self.assertEqual(result.node_count, 0)
        self.assertEqual(result.bound, -math.inf)

    def test_node_limit(self):
        model = make_group_model()
        result = branch_and_bound(model, SolverConfig(is_dive_enabled=False, node_limit=1))
        self.assertSolveResultIsValid(result, model, SolveStatus.TIME_LIMIT_NO_INCUMBENT)

        result = branch_and_bound(model, SolverConfig(is_dive_enabled=True, node_limit=1))
        self.assertSolveResultIsValid(result, model, SolveStatus.TIME_LIMIT_INCUMBENT)

    def test_bound_monotonicity(self):
        rnd = np.random.RandomState(2)
        model = make_random_miqp(rnd, 5, 6)
        result = branch_and_bound(model, SolverConfig(is_node_log_enabled=True, is_dive_enabled=False))
        self.assertSolveResultIsValid(result, model)
        self.assertGreater(len(result.node_log), 1)
        entry_by_id = {node_id: (bound, objective) for node_id, _, bound, objective in result.node_log}
        for node_id, parent_id, bound, objective in result.node_log:
            if parent_id is None or parent_id not in entry_by_id:
                continue
            parent_bound, parent_objective = entry_by_id[parent_id]
            self.assertGreaterEqual(bound, parent_bound - 1e-8)
            if objective is None or parent_objective is None:
                continue
            self.assertGreaterEqual(objective, parent_objective - 1e-5 * max(1.0, abs(parent_objective)))
        self.assertLessEqual(result.bound, result.objective + 1e-9)

    def test_deterministic(self):
        rnd = np.random.RandomState(9)
        model = make_random_miqp(rnd, 4, 6)
        first = branch_and_bound(model)
        second = branch_and_bound(model)
        self.assertEqual(first.status, second.status)
        self.assertEqual(first.node_count, second.node_count)
        self.assertEqual(first.objective, second.objective)
        self.assertTrue(np.array_equal(first.values, second.values))

    def test_threads(self):
        rnd = np.random.RandomState(10)
        model = make_random_miqp(rnd, 4, 6)
        single = branch_and_bound(model)
        multi = branch_and_bound(model, SolverConfig(threads=3))
        self.assertSolveResultIsValid(multi, model)
        self.assertAlmostEqual(multi.objective, single.objective, delta=1e-5 * max(1.0, abs(single.objective)))
        again = branch_and_bound(model, SolverConfig(threads=3))
        self.assertEqual(again.node_count, multi.node_count)

    def test_quadratic_rows(self):
        model = make_group_model()
        model.add_quadratic_row([(0, 0, 1)], {}, 1)
        with self.assertRaises(SolverError):
            BranchAndBound(model)


class TestIncumbent(PlanTestCase):

    def test_offer(self):
        incumbent = Incumbent()
        self.assertEqual(incumbent.get(), (math.inf, None))
        self.assertTrue(incumbent.offer(5.0, [1]))
        self.assertFalse(incumbent.offer(5.0, [2]))
        self.assertFalse(incumbent.offer(7.0, [3]))
        self.assertTrue(incumbent.offer(4.0, [4]))
        self.assertEqual(incumbent.get(), (4.0, [4]))
        self.assertEqual(incumbent.objective, 4.0)
        self.assertEqual(incumbent.update_count, 2)
