"""
Writer and reader for the textual LP interchange format (CPLEX LP dialect),
so models can be cross-checked with external MIP solvers.

Numbers are written with repr() which makes export and import exact.
Only the subset the writer produces is read back: one objective, named rows,
explicit bounds for every variable (in variable order), binaries and SOS1 sets.
"""

import logging
import math
import re

from ltlstep.api import ErrorCode, LPProfile, Sense, VarKind
from ltlstep.errors import SolverError
from ltlstep.solver import ModelIR

logger = logging.getLogger(__name__)

MAX_LINE_LENGTH = 250
NAME_PATTERN = re.compile(r"^[A-Za-z_][A-Za-z0-9_.]*$")
NUMBER_PATTERN = re.compile(r"^[+-]?(\d+\.?\d*([eE][+-]?\d+)?|\.\d+([eE][+-]?\d+)?|inf(inity)?)$", re.IGNORECASE)

SECTION_MINIMIZE = "minimize"
SECTION_CONSTRAINTS = "subject to"
SECTION_BOUNDS = "bounds"
SECTION_BINARIES = "binaries"
SECTION_SOS = "sos"
SECTION_END = "end"
sections = (SECTION_MINIMIZE, SECTION_CONSTRAINTS, SECTION_BOUNDS, SECTION_BINARIES, SECTION_SOS, SECTION_END)
section_aliases = {
    "min": SECTION_MINIMIZE,
    "st": SECTION_CONSTRAINTS,
    "s.t.": SECTION_CONSTRAINTS,
    "subject to": SECTION_CONSTRAINTS,
    "bound": SECTION_BOUNDS,
    "binary": SECTION_BINARIES,
    "bin": SECTION_BINARIES,
}
sense_by_token = {
    "<=": Sense.LE,
    "=<": Sense.LE,
    "<": Sense.LE,
    ">=": Sense.GE,
    "=>": Sense.GE,
    ">": Sense.GE,
    "=": Sense.EQ,
}


# Writing


def _number(value):
    if value == math.inf:
        return "+inf"
    if value == -math.inf:
        return "-inf"
    return repr(float(value))


def _check_name(name):
    if not NAME_PATTERN.match(name):
        raise SolverError(ErrorCode.MODEL_INVALID, details="name '%s' can not be written to LP" % name)
    return name


def _linear_terms(coefficients, names):
    terms = []
    for index, coef in coefficients:
        terms.append("%s %s %s" % ("-" if coef < 0 else "+", _number(abs(coef)), names[index]))
    return terms


def _quadratic_terms(quadratic, names):
    # quadratic - [(i, j, coef)]
    terms = []
    for i, j, coef in quadratic:
        product = "%s ^ 2" % names[i] if i == j else "%s * %s" % (names[i], names[j])
        terms.append("%s %s %s" % ("-" if coef < 0 else "+", _number(abs(coef)), product))
    return terms


def _wrap(head, terms):
    # Continuation lines are indented
    lines = []
    line = head
    for term in terms:
        if len(line) + len(term) + 1 > MAX_LINE_LENGTH:
            lines.append(line)
            line = "   "
        line += " " + term
    lines.append(line)
    return lines


def _with_leading_sign(terms):
    if terms and terms[0].startswith("+ "):
        terms[0] = terms[0][2:]
    return terms


def format_lp(model, profile=None):
    """Returns model as LP text. Quadratic rows need the quadratic profile."""
    if profile is None:
        profile = LPProfile.QUADRATIC if model.quadratic_rows else LPProfile.LINEAR
    if profile not in LPProfile.realization_by_profile:
        raise SolverError(ErrorCode.MODEL_INVALID, details="unknown LP profile %s" % profile)
    if model.quadratic_rows and profile == LPProfile.LINEAR:
        raise SolverError(ErrorCode.MODEL_INVALID,
                          details="quadratic rows can not be written with the linear profile")
    names = [_check_name(name) for name in model.variable_names]

    lines = [
        "\\ Model: %s" % _check_name(model.name),
        "\\ profile: %s" % profile,
        "Minimize",
    ]
    # Objective
    terms = _linear_terms(sorted(model.objective_linear.items()), names)
    quadratic = [(i, j, value if i == j else 2 * value)
                 for (i, j), value in sorted(model.objective_quadratic.items()) if value != 0]
    if quadratic:
        terms += ["+ ["] + _with_leading_sign(_quadratic_terms(quadratic, names)) + ["] / 2"]
    if model.objective_constant or not terms:
        terms.append("%s %s" % ("-" if model.objective_constant < 0 else "+", _number(abs(model.objective_constant))))
    lines += _wrap(" obj:", _with_leading_sign(terms))

    lines.append("Subject To")
    for row in model.rows:
        terms = _linear_terms(row.coefficients, names)
        if not terms:
            # Rows without variables (e.g., infeasible specifications)
            terms = ["0.0 %s" % names[0]] if names else ["0.0"]
        terms.append("%s %s" % (row.sense, _number(row.rhs)))
        lines += _wrap(" %s:" % _check_name(row.name), _with_leading_sign(terms))
    for row in model.quadratic_rows:
        terms = _linear_terms(row.coefficients, names)
        terms += ["+ ["] + _with_leading_sign(_quadratic_terms(row.quadratic, names)) + ["]"]
        terms.append("%s %s" % (row.sense, _number(row.rhs)))
        lines += _wrap(" %s:" % _check_name(row.name), _with_leading_sign(terms))

    lines.append("Bounds")
    for variable in model.variables:
        if variable.lower == -math.inf and variable.upper == math.inf:
            lines.append(" %s free" % names[variable.index])
        elif variable.lower == variable.upper:
            lines.append(" %s = %s" % (names[variable.index], _number(variable.lower)))
        else:
            lines.append(" %s <= %s <= %s" % (_number(variable.lower), names[variable.index], _number(variable.upper)))

    binaries = [names[index] for index in model.binary_indices]
    if binaries:
        lines.append("Binaries")
        lines += _wrap("", binaries)
    if model.groups:
        lines.append("SOS")
        for name, members, _ in model.groups:
            terms = ["%s:%s" % (names[index], weight) for weight, index in enumerate(members, 1)]
            lines += _wrap(" %s: S1::" % _check_name(name), terms)
    lines.append("End")
    return "\n".join(lines) + "\n"


def export_interchange(model, path, profile=None):
    text = format_lp(model, profile)
    with open(path, "w") as file:
        file.write(text)
    logger.info("Model %r written to %s", model, path)
    return path


# Reading


class _Reader:
    """Parses the LP subset written by format_lp."""

    def __init__(self, text):
        self.logger = logging.getLogger("LPReader")
        self.text = text
        self.model = None

    def _error(self, line, details):
        raise SolverError(ErrorCode.LP_SYNTAX, line=line, details=details)

    def _split_sections(self):
        # -> model name, [(section, [(line number, text)])]
        name = "model"
        result = []
        current = None
        for number, line in enumerate(self.text.splitlines(), 1):
            stripped = line.strip()
            if stripped.startswith("\\"):
                match = re.match(r"\\\s*Model:\s*(\S+)", stripped)
                if match:
                    name = match.group(1)
                continue
            if not stripped:
                continue
            keyword = stripped.lower()
            keyword = section_aliases.get(keyword, keyword)
            if keyword in sections:
                current = (keyword, [])
                result.append(current)
                if keyword == SECTION_END:
                    break
                continue
            if current is None:
                self._error(number, "text before the first section")
            current[1].append((number, stripped))
        if not result or result[-1][0] != SECTION_END:
            self._error(len(self.text.splitlines()), "missing End")
        return name, result

    @staticmethod
    def _group_rows(lines):
        # Rows start with "name:" and may continue on the next lines
        rows = []
        for number, text in lines:
            tokens = text.split()
            if tokens and tokens[0].endswith(":") and tokens[0] != ":" and len(tokens[0]) > 1:
                rows.append((number, tokens[0][:-1], tokens[1:]))
            elif rows:
                rows[-1][2].extend(tokens)
            else:
                rows.append((number, None, tokens))
        return rows

    def _get_index(self, name, number):
        variable = self.model.get_variable(name)
        if variable is None:
            self._error(number, "unknown variable %s" % name)
        return variable.index

    def _parse_expression(self, tokens, number):
        """Returns (linear pairs, quadratic triples, constant, rest of tokens)."""
        linear, quadratic, constant = [], [], 0.0
        i, sign, in_brackets = 0, 1.0, False
        while i < len(tokens):
            token = tokens[i]
            if token in sense_by_token:
                break
            if token == "+":
                sign = 1.0
            elif token == "-":
                sign = -1.0
            elif token == "[":
                in_brackets = True
            elif token == "]":
                in_brackets = False
                if tokens[i + 1:i + 3] == ["/", "2"]:
                    i += 2
            else:
                coef = 1.0
                if NUMBER_PATTERN.match(token):
                    coef = float(token)
                    if i + 1 >= len(tokens) or not NAME_PATTERN.match(tokens[i + 1]):
                        constant += sign * coef
                        sign = 1.0
                        i += 1
                        continue
                    i += 1
                    token = tokens[i]
                if not NAME_PATTERN.match(token):
                    self._error(number, "unexpected '%s'" % token)
                if tokens[i + 1:i + 3] == ["^", "2"]:
                    quadratic.append((token, token, sign * coef))
                    i += 2
                elif i + 2 < len(tokens) and tokens[i + 1] == "*":
                    quadratic.append((token, tokens[i + 2], sign * coef))
                    i += 2
                else:
                    if in_brackets:
                        self._error(number, "linear term inside brackets")
                    linear.append((token, sign * coef))
                sign = 1.0
            i += 1
        return linear, quadratic, constant, tokens[i:]

    def _read_bounds(self, lines):
        for number, text in lines:
            tokens = text.split()
            if len(tokens) == 2 and tokens[1].lower() == "free":
                self.model.add_variable(tokens[0])
            elif len(tokens) == 3 and tokens[1] == "=":
                value = float(tokens[2])
                self.model.add_variable(tokens[0], lower=value, upper=value)
            elif len(tokens) == 5 and tokens[1] == tokens[3] == "<=":
                self.model.add_variable(tokens[2], lower=float(tokens[0]), upper=float(tokens[4]))
            else:
                self._error(number, "unsupported bound '%s'" % text)

    def read(self):
        name, section_list = self._split_sections()
        self.model = model = ModelIR(name)
        lines_by_section = {section: lines for section, lines in section_list}

        # Variables first (bounds list every variable in order)
        self._read_bounds(lines_by_section.get(SECTION_BOUNDS, []))
        for number, text in lines_by_section.get(SECTION_BINARIES, []):
            for token in text.split():
                variable = model.variables[self._get_index(token, number)]
                variable.kind = VarKind.BINARY

        for number, _, tokens in self._group_rows(lines_by_section.get(SECTION_MINIMIZE, [])):
            linear, quadratic, constant, rest = self._parse_expression(tokens, number)
            if rest:
                self._error(number, "unexpected '%s' in objective" % rest[0])
            model.add_objective_linear([(self._get_index(n, number), c) for n, c in linear], constant)
            for name_i, name_j, coef in quadratic:
                i, j = self._get_index(name_i, number), self._get_index(name_j, number)
                model.add_objective_quadratic(i, j, coef if i == j else coef / 2)

        for number, row_name, tokens in self._group_rows(lines_by_section.get(SECTION_CONSTRAINTS, [])):
            linear, quadratic, constant, rest = self._parse_expression(tokens, number)
            if len(rest) != 2 or rest[0] not in sense_by_token:
                self._error(number, "row must end with a sense and a number")
            rhs = float(rest[1]) - constant
            coefficients = [(self._get_index(n, number), c) for n, c in linear]
            if quadratic:
                model.add_quadratic_row([(self._get_index(a, number), self._get_index(b, number), c)
                                         for a, b, c in quadratic], coefficients, rhs, row_name)
            else:
                model.add_row(coefficients, sense_by_token[rest[0]], rhs, row_name)

        for number, group_name, tokens in self._group_rows(lines_by_section.get(SECTION_SOS, [])):
            if not tokens or tokens[0].upper() != "S1::":
                self._error(number, "only S1 sets are supported")
            members = sorted((int(token.rsplit(":", 1)[1]), token.rsplit(":", 1)[0]) for token in tokens[1:])
            model.add_group([self._get_index(member, number) for _, member in members], group_name)

        self.logger.debug("Read %r", model)
        return model


def parse_lp(text):
    return _Reader(text).read()


def read_interchange(path):
    with open(path) as file:
        return parse_lp(file.read())
