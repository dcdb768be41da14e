"""
Linear temporal logic over finite traces.

Steps are numbered 1..N. Next is false at step N (no successor).
Time-bounded Eventually/Always quantify over steps max(k, a)..min(N, b):
an empty window makes Eventually false and Always true.
"""

import logging

from ltlstep.api import NodeKind

logger = logging.getLogger(__name__)


class Formula:
    """Immutable LTL syntax tree node. Equal formulas have equal hashes."""

    __slots__ = ("kind", "children", "name", "time_bound", "_hash")

    def __init__(self, kind, children=(), name=None, time_bound=None):
        if kind not in NodeKind.arity_by_kind:
            raise ValueError("Unknown node kind: %s" % kind)
        children = tuple(children)
        arity = NodeKind.arity_by_kind[kind]
        if arity is None:
            if len(children) < 2:
                raise ValueError("%s needs at least 2 children, got %s" % (kind, len(children)))
        elif len(children) != arity:
            raise ValueError("%s needs %s children, got %s" % (kind, arity, len(children)))
        for child in children:
            if not isinstance(child, Formula):
                raise ValueError("Child is not a formula: %r" % (child,))
        if kind == NodeKind.ATOM and not name:
            raise ValueError("Atom name must be nonempty")
        if time_bound is not None:
            if kind not in NodeKind.bounded:
                raise ValueError("Time bound is allowed only on Eventually and Always")
            lower, upper = time_bound
            if not 1 <= lower <= upper:
                raise ValueError("Time bound must satisfy 1 <= a <= b: %s" % (time_bound,))
            time_bound = (int(lower), int(upper))

        self.kind = kind
        self.children = children
        self.name = name if kind == NodeKind.ATOM else None
        self.time_bound = time_bound
        self._hash = hash((kind, children, self.name, time_bound))

    def __eq__(self, other):
        if self is other:
            return True
        return (isinstance(other, Formula) and self._hash == other._hash and
                self.kind == other.kind and self.name == other.name and
                self.time_bound == other.time_bound and self.children == other.children)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return "<Formula %s>" % self

    def __str__(self):
        return format_formula(self)

    @property
    def is_literal(self):
        # Atom, negated atom or true
        return self.kind in (NodeKind.ATOM, NodeKind.TRUE) or (
            self.kind == NodeKind.NOT and self.children[0].kind in (NodeKind.ATOM, NodeKind.TRUE))

    @property
    def depth(self):
        return 1 + max((child.depth for child in self.children), default=0)


# Constructors

TRUE = Formula(NodeKind.TRUE)


def atom(name):
    return Formula(NodeKind.ATOM, name=name)


def not_(f):
    return Formula(NodeKind.NOT, (f,))


def and_(*children):
    return Formula(NodeKind.AND, children)


def or_(*children):
    return Formula(NodeKind.OR, children)


def implies(lhs, rhs):
    return Formula(NodeKind.IMPLIES, (lhs, rhs))


def iff(lhs, rhs):
    return Formula(NodeKind.IFF, (lhs, rhs))


def next_(f):
    return Formula(NodeKind.NEXT, (f,))


def until(lhs, rhs):
    return Formula(NodeKind.UNTIL, (lhs, rhs))


def eventually(f, time_bound=None):
    return Formula(NodeKind.EVENTUALLY, (f,), time_bound=time_bound)


def always(f, time_bound=None):
    return Formula(NodeKind.ALWAYS, (f,), time_bound=time_bound)


def always_eventually(f):
    return Formula(NodeKind.ALWAYS_EVENTUALLY, (f,))


def eventually_always(f):
    return Formula(NodeKind.EVENTUALLY_ALWAYS, (f,))


FALSE = not_(TRUE)


# Printing


def format_formula(f):
    # Output parses back to the same tree: compound binary children are always parenthesized
    kind = f.kind
    if kind == NodeKind.TRUE:
        return "true"
    if kind == NodeKind.ATOM:
        return f.name
    if kind == NodeKind.NOT and f.children[0].kind == NodeKind.TRUE:
        return "false"
    if kind in NodeKind.unary:
        symbol = NodeKind.symbol_by_kind[kind]
        if f.time_bound:
            symbol += "[%s,%s]" % f.time_bound
        return "%s %s" % (symbol, _format_child(f.children[0]))
    symbol = " %s " % NodeKind.symbol_by_kind[kind]
    return symbol.join(_format_child(child) for child in f.children)


def _format_child(f):
    text = format_formula(f)
    return "(%s)" % text if f.kind in NodeKind.binary else text


# Traces


class Trace:
    """Truth values of atoms at steps 1..length."""

    def __init__(self, length, assignment):
        if not isinstance(length, int) or length < 1:
            raise ValueError("Trace length must be a positive integer: %s" % (length,))
        self.length = length
        self._values_by_atom = {}
        for name, values in assignment.items():
            values = tuple(bool(v) for v in values)
            if len(values) != length:
                raise ValueError("Atom %s has %s values, expected %s" % (name, len(values), length))
            self._values_by_atom[name] = values

    @classmethod
    def from_steps(cls, true_atoms_by_step, atoms):
        # true_atoms_by_step - list (steps 1..N) of sets of atom names which hold
        return cls(len(true_atoms_by_step),
                   {name: [name in step for step in true_atoms_by_step] for name in atoms})

    @property
    def atoms(self):
        return tuple(self._values_by_atom)

    def value(self, name, k):
        if name not in self._values_by_atom:
            raise ValueError("Atom %s is not defined in the trace" % name)
        if not 1 <= k <= self.length:
            raise ValueError("Step %s is out of range 1..%s" % (k, self.length))
        return self._values_by_atom[name][k - 1]

    def values(self, name):
        return self._values_by_atom[name]

    def __eq__(self, other):
        return (isinstance(other, Trace) and self.length == other.length and
                self._values_by_atom == other._values_by_atom)

    def __hash__(self):
        return hash((self.length, tuple(sorted(self._values_by_atom.items()))))

    def __repr__(self):
        return "<Trace N=%s %s>" % (self.length, {k: "".join("1" if v else "0" for v in values)
                                                  for k, values in self._values_by_atom.items()})


# Operations


def atoms(f):
    result = set()
    stack = [f]
    while stack:
        node = stack.pop()
        if node.kind == NodeKind.ATOM:
            result.add(node.name)
        stack.extend(node.children)
    return result


def is_desugared(f):
    stack = [f]
    while stack:
        node = stack.pop()
        if node.kind not in NodeKind.core:
            return False
        stack.extend(node.children)
    return True


def desugar(f):
    """Eliminates Implies and Iff. Everything else (patterns included) is kept as is."""
    kind = f.kind
    if not f.children:
        return f
    children = tuple(desugar(child) for child in f.children)
    if kind == NodeKind.IMPLIES:
        lhs, rhs = children
        return or_(not_(lhs), rhs)
    if kind == NodeKind.IFF:
        lhs, rhs = children
        return and_(or_(not_(lhs), rhs), or_(not_(rhs), lhs))
    if children == f.children:
        return f
    return Formula(kind, children, time_bound=f.time_bound)


def window(f, k, horizon):
    # Steps over which a (possibly time-bounded) Eventually/Always at step k quantifies
    lower, upper = f.time_bound if f.time_bound else (1, horizon)
    return max(k, lower), min(horizon, upper)


def evaluate(f, trace, k=1):
    """Whether the trace satisfies f at step k (1-based)."""
    if not 1 <= k <= trace.length:
        raise ValueError("Step %s is out of range 1..%s" % (k, trace.length))
    return satisfaction(f, trace)[k]


def satisfaction(f, trace, cache=None):
    """Truth value of f at every step. Index 0 is unused."""
    if cache is None:
        cache = {}
    if f in cache:
        return cache[f]

    n = trace.length
    kind = f.kind
    steps = range(1, n + 1)
    if kind == NodeKind.TRUE:
        result = [True] * (n + 1)
    elif kind == NodeKind.ATOM:
        result = [False] + list(trace.values(f.name)) if f.name in trace.atoms else None
        if result is None:
            raise ValueError("Atom %s is not defined in the trace" % f.name)
    else:
        values = [satisfaction(child, trace, cache) for child in f.children]
        result = [False] * (n + 1)
        if kind == NodeKind.NOT:
            for k in steps:
                result[k] = not values[0][k]
        elif kind == NodeKind.AND:
            for k in steps:
                result[k] = all(v[k] for v in values)
        elif kind == NodeKind.OR:
            for k in steps:
                result[k] = any(v[k] for v in values)
        elif kind == NodeKind.IMPLIES:
            for k in steps:
                result[k] = not values[0][k] or values[1][k]
        elif kind == NodeKind.IFF:
            for k in steps:
                result[k] = values[0][k] == values[1][k]
        elif kind == NodeKind.NEXT:
            for k in range(1, n):
                result[k] = values[0][k + 1]
        elif kind == NodeKind.UNTIL:
            lhs, rhs = values
            result[n] = rhs[n]
            for k in range(n - 1, 0, -1):
                result[k] = rhs[k] or (lhs[k] and result[k + 1])
        elif kind == NodeKind.EVENTUALLY:
            for k in steps:
                lower, upper = window(f, k, n)
                result[k] = any(values[0][i] for i in range(lower, upper + 1))
        elif kind == NodeKind.ALWAYS:
            for k in steps:
                lower, upper = window(f, k, n)
                result[k] = all(values[0][i] for i in range(lower, upper + 1))
        elif kind == NodeKind.ALWAYS_EVENTUALLY:
            body = values[0]
            for k in steps:
                result[k] = all(any(body[i] for i in range(j, n + 1)) for j in range(k, n + 1))
        elif kind == NodeKind.EVENTUALLY_ALWAYS:
            body = values[0]
            for k in steps:
                result[k] = any(all(body[i] for i in range(j, n + 1)) for j in range(k, n + 1))
    cache[f] = result
    return result
