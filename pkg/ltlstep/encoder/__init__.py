"""
Compiles LTL formulas over bound atoms into mixed-integer linear rows.

A bound atom p has one binary P^k per step k. Specifications asserted at
the top level are encoded with sum rows where possible (conjunction,
disjunction and temporal patterns over literals). Everything else is reified:
reify(f, k) returns a binary which equals 1 iff the trace satisfies f at k,
using the big-M pair

    sum(children) - M z >= t - M,    sum(children) - M z <= t - m

with t = 1 for disjunction and t = number of children for conjunction.
"""

import logging

from ltlstep import ltl
from ltlstep.api import Default, ErrorCode, NodeKind, Sense
from ltlstep.errors import EncodingError, InfeasibleSpecificationError


class AtomBinding:
    """Atom name -> binary variable index for each step 1..N."""

    def __init__(self, horizon, variables_by_atom=None):
        self.horizon = horizon
        self._indices_by_atom = {}
        for name, variables in (variables_by_atom or {}).items():
            self.bind(name, variables)

    def __contains__(self, name):
        return name in self._indices_by_atom

    def __repr__(self):
        return "<AtomBinding N: %s atoms: %s>" % (self.horizon, sorted(self._indices_by_atom))

    @property
    def atoms(self):
        return sorted(self._indices_by_atom)

    def bind(self, name, variables):
        variables = [getattr(v, "index", v) for v in variables]
        if len(variables) != self.horizon:
            raise ValueError("Atom %s must be bound to %s variables, got %s" % (name, self.horizon, len(variables)))
        self._indices_by_atom[name] = variables

    def get(self, name, k):
        return self._indices_by_atom[name][k - 1]

    def get_all(self, name):
        return list(self._indices_by_atom[name])


class EncodingContext:
    """Horizon, big-M and small-m constants, and the counters for auxiliary names."""

    def __init__(self, horizon, big_M=None, small_m=Default.SMALL_M):
        if horizon < 1:
            raise ValueError("Horizon must be positive: %s" % horizon)
        big_M = horizon + 1 if big_M is None else big_M
        if not 0 < small_m <= 1:
            raise ValueError("small_m must be in (0, 1]: %s" % small_m)
        if big_M < horizon + 1:
            raise ValueError("big_M must be at least N + 1 = %s: %s" % (horizon + 1, big_M))
        self.horizon = horizon
        self.big_M = big_M
        self.small_m = small_m
        self.aux_count = 0
        self.row_count = 0

    def next_aux_name(self):
        self.aux_count += 1
        return "aux_%s" % self.aux_count

    def next_row_name(self):
        self.row_count += 1
        return "ltl_%s" % self.row_count


class LTLEncoder:
    """Adds rows for formulas to a model. One encoder per model (reified binaries are cached)."""

    def __init__(self, model, binding, context=None):
        self.logger = logging.getLogger("LTLEncoder.%s" % model.name)
        self.model = model
        self.binding = binding
        self.context = context or EncodingContext(binding.horizon)
        self.warnings = []
        # (formula, k) -> variable index
        self._reified = {}

    @property
    def horizon(self):
        return self.context.horizon

    # Checks

    def _check(self, f, k):
        if not 1 <= k <= self.horizon:
            raise EncodingError(ErrorCode.STEP_RANGE, step=k, horizon=self.horizon)
        if not ltl.is_desugared(f):
            raise EncodingError(ErrorCode.NOT_DESUGARED, formula=f)
        for name in sorted(ltl.atoms(f)):
            if name not in self.binding:
                raise EncodingError(ErrorCode.UNBOUND_ATOM, atom=name, formula=f)

    def _warn(self, message):
        self.warnings.append(message)
        self.logger.warning(message)

    # Model helpers

    def _new_binary(self):
        return self.model.add_binary(self.context.next_aux_name()).index

    def _new_constant(self, value):
        index = self._new_binary()
        self.model.fix_variable(index, value)
        return index

    def _add_row(self, coefficients, sense, rhs):
        return self.model.add_row(coefficients, sense, rhs, self.context.next_row_name())

    def _add_sum_row(self, expressions, sense, rhs):
        # expressions - [(coefficients dict, constant)]; constants go to the right side
        coefficients = {}
        for expr_coefficients, constant in expressions:
            for index, coef in expr_coefficients.items():
                coefficients[index] = coefficients.get(index, 0.0) + coef
            rhs -= constant
        return self._add_row(coefficients, sense, rhs)

    def _add_infeasible_row(self, message):
        self._warn(message)
        self._add_row({}, Sense.EQ, 1)

    def _term(self, f, k):
        """Linear expression (coefficients, constant) equal to 1 iff f holds at k."""
        if f.kind == NodeKind.TRUE:
            return {}, 1.0
        if f.kind == NodeKind.ATOM:
            return {self.binding.get(f.name, k): 1.0}, 0.0
        if f.kind == NodeKind.NOT and f.children[0].kind == NodeKind.TRUE:
            return {}, 0.0
        if f.kind == NodeKind.NOT and f.children[0].kind == NodeKind.ATOM:
            return {self.binding.get(f.children[0].name, k): -1.0}, 1.0
        return {self.reify(f, k): 1.0}, 0.0

    def _literal_terms(self, f, k, flatten_kind):
        # Literals of an And/Or of literals, else the term of f itself
        if f.kind == flatten_kind and all(child.is_literal for child in f.children):
            return [self._term(child, k) for child in f.children]
        return [self._term(f, k)]

    # Top level

    def encode_specification(self, f, k=1):
        """Desugars f and adds rows requiring it to hold at step k."""
        f = ltl.desugar(f)
        rows_before, aux_before = len(self.model.rows), self.context.aux_count
        self.encode_satisfaction(f, k)
        self.logger.info("Encoded %s: %s rows, %s auxiliary binaries", f,
                         len(self.model.rows) - rows_before, self.context.aux_count - aux_before)

    def encode_satisfaction(self, f, k=1):
        self._check(f, k)
        self._encode(f, k)

    def _encode(self, f, k):
        kind = f.kind
        if kind == NodeKind.TRUE:
            return
        if kind == NodeKind.ATOM:
            self._add_row({self.binding.get(f.name, k): 1}, Sense.EQ, 1)
        elif kind == NodeKind.NOT:
            child = f.children[0]
            if child.kind == NodeKind.TRUE:
                self._warn("Specification 'false' at step %s can never hold" % k)
                self._add_row({}, Sense.GE, 1)
            elif child.kind == NodeKind.ATOM:
                self._add_row({self.binding.get(child.name, k): 1}, Sense.EQ, 0)
            else:
                self._add_row({self.reify(child, k): 1}, Sense.EQ, 0)
        elif kind == NodeKind.AND:
            literals = [child for child in f.children if child.is_literal]
            if literals:
                self._add_sum_row([self._term(child, k) for child in literals], Sense.EQ, len(literals))
            for child in f.children:
                if not child.is_literal:
                    self._encode(child, k)
        elif kind == NodeKind.OR:
            self._add_sum_row([self._term(child, k) for child in f.children], Sense.GE, 1)
        elif kind == NodeKind.NEXT:
            if k == self.horizon:
                self._add_infeasible_row("Next at the last step %s can never hold: %s" % (k, f))
            else:
                self._encode(f.children[0], k + 1)
        elif kind == NodeKind.UNTIL:
            self.encode_until(f.children[0], f.children[1], k, is_top_level=True)
        elif kind in NodeKind.patterns:
            self.encode_pattern(f, k)
        else:
            raise EncodingError(ErrorCode.NOT_DESUGARED, formula=f)

    # Reification

    def _reify_count(self, terms, threshold):
        """Binary z with z = 1 iff sum(terms) >= threshold, terms being 0/1 expressions."""
        z = self._new_binary()
        M = max(self.context.big_M, 2 * len(terms))
        m = self.context.small_m
        expressions = terms + [({z: -M}, 0.0)]
        self._add_sum_row(expressions, Sense.GE, threshold - M)
        self._add_sum_row(expressions, Sense.LE, threshold - m)
        return z

    def reify(self, f, k):
        """Returns index of a binary which equals 1 iff f holds at step k."""
        key = (f, k)
        if key in self._reified:
            return self._reified[key]
        if not 1 <= k <= self.horizon:
            raise EncodingError(ErrorCode.STEP_RANGE, step=k, horizon=self.horizon)

        kind = f.kind
        n = self.horizon
        if kind == NodeKind.TRUE:
            z = self._new_constant(1)
        elif kind == NodeKind.ATOM:
            if f.name not in self.binding:
                raise EncodingError(ErrorCode.UNBOUND_ATOM, atom=f.name, formula=f)
            z = self.binding.get(f.name, k)
        elif kind == NodeKind.NOT:
            child = self.reify(f.children[0], k)
            z = self._new_binary()
            self._add_row({z: 1, child: 1}, Sense.EQ, 1)
        elif kind == NodeKind.AND:
            z = self._reify_count([self._term(child, k) for child in f.children], len(f.children))
        elif kind == NodeKind.OR:
            z = self._reify_count([self._term(child, k) for child in f.children], 1)
        elif kind == NodeKind.NEXT:
            z = self.reify(f.children[0], k + 1) if k < n else self._new_constant(0)
        elif kind == NodeKind.UNTIL:
            z = self.encode_until(f.children[0], f.children[1], k)[0]
        elif kind in (NodeKind.EVENTUALLY, NodeKind.ALWAYS):
            lower, upper = ltl.window(f, k, n)
            is_eventually = kind == NodeKind.EVENTUALLY
            body = f.children[0]
            if lower > upper:
                z = self._new_constant(0 if is_eventually else 1)
            elif lower == upper:
                z = self.reify(body, lower)
            else:
                terms = [self._term(body, i) for i in range(lower, upper + 1)]
                z = self._reify_count(terms, 1 if is_eventually else len(terms))
        elif kind == NodeKind.ALWAYS_EVENTUALLY:
            parts = [ltl.eventually(f.children[0]) for _ in range(k, n + 1)]
            z = self._reify_steps(parts, k, len(parts))
        elif kind == NodeKind.EVENTUALLY_ALWAYS:
            parts = [ltl.always(f.children[0]) for _ in range(k, n + 1)]
            z = self._reify_steps(parts, k, 1)
        else:
            raise EncodingError(ErrorCode.NOT_DESUGARED, formula=f)
        self._reified[key] = z
        self.logger.debug("Reified %s at %s as %s", f, k, self.model.variables[z].name)
        return z

    def _reify_steps(self, parts, k, threshold):
        # parts[i] is reified at step k + i
        if len(parts) == 1:
            return self.reify(parts[0], k)
        return self._reify_count([({self.reify(part, k + i): 1.0}, 0.0) for i, part in enumerate(parts)],
                                 threshold)

    # Until

    def encode_until(self, lhs, rhs, k, is_top_level=False):
        """Allocates T^k..T^N (T^i = 1 iff lhs U rhs holds at i) and returns their indices.

        Adds (N - k + 1) + (N - k) auxiliary binaries besides those of reified operands.
        """
        self._check(ltl.until(lhs, rhs), k)
        n = self.horizon
        T = {n: self._new_binary()}
        self._add_sum_row([({T[n]: 1.0}, 0.0), self._negate(self._term(rhs, n))], Sense.EQ, 0)
        for i in range(n - 1, k - 1, -1):
            both = self._reify_count([self._term(lhs, i), ({T[i + 1]: 1.0}, 0.0)], 2)
            T[i] = self._reify_count([self._term(rhs, i), ({both: 1.0}, 0.0)], 1)
        if is_top_level:
            self._add_row({T[k]: 1}, Sense.EQ, 1)
        else:
            formula = ltl.until(lhs, rhs)
            for i in range(k, n + 1):
                self._reified.setdefault((formula, i), T[i])
        return [T[i] for i in range(k, n + 1)]

    @staticmethod
    def _negate(term):
        coefficients, constant = term
        return {index: -coef for index, coef in coefficients.items()}, -constant

    # Patterns

    def encode_pattern(self, f, k=1):
        """Sum rows for Always, Eventually (optionally time-bounded), AlwaysEventually, EventuallyAlways."""
        self._check(f, k)
        n = self.horizon
        kind = f.kind
        body = f.children[0]
        if kind == NodeKind.ALWAYS:
            lower, upper = ltl.window(f, k, n)
            if lower > upper:
                self._warn("Time window of '%s' is empty over horizon %s: holds vacuously" % (f, n))
                return
            terms = [term for i in range(lower, upper + 1) for term in self._literal_terms(body, i, NodeKind.AND)]
            self._add_sum_row(terms, Sense.GE, len(terms))
        elif kind == NodeKind.EVENTUALLY:
            lower, upper = ltl.window(f, k, n)
            if lower > upper:
                raise InfeasibleSpecificationError(ErrorCode.EMPTY_WINDOW, formula=f, horizon=n)
            terms = [term for i in range(lower, upper + 1) for term in self._literal_terms(body, i, NodeKind.OR)]
            self._add_sum_row(terms, Sense.GE, 1)
        elif kind == NodeKind.ALWAYS_EVENTUALLY:
            terms_by_step = {i: self._literal_terms(body, i, NodeKind.OR) for i in range(k, n + 1)}
            for j in range(k, n + 1):
                self._add_sum_row([term for i in range(j, n + 1) for term in terms_by_step[i]], Sense.GE, 1)
        elif kind == NodeKind.EVENTUALLY_ALWAYS:
            terms_by_step = {i: self._term(body, i) for i in range(k, n + 1)}
            indicators = []
            for j in range(k, n + 1):
                indicator = self._new_binary()
                indicators.append(indicator)
                # D^j = 1 -> body holds at j..N
                self._add_sum_row([terms_by_step[i] for i in range(j, n + 1)] + [({indicator: -(n - j + 1.0)}, 0.0)],
                                  Sense.GE, 0)
            self._add_row({indicator: 1 for indicator in indicators}, Sense.GE, 1)
        else:
            raise EncodingError(ErrorCode.NOT_DESUGARED, formula=f)
