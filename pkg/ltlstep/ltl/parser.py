"""PLY-based parser for the planner's LTL syntax.

Operators, tightest first:

    !  X  F  G  GF  FG  F[a,b]  G[a,b]   (prefix)
    U                                    (right-associative)
    &
    |
    ->                                   (right-associative)
    <->                                  (left-associative)

Atoms are identifiers [A-Za-z_][A-Za-z0-9_]*, except the reserved words
X, F, G, U, GF, FG, true and false. Unary operators must be separated
from an atom by a space or a parenthesis: "Xp" is an atom, "X p" is Next.
"""
import logging
from threading import Lock

import ply.lex as lex
import ply.yacc as yacc

from ltlstep.api import ErrorCode
from ltlstep.errors import LTLSyntaxError
from ltlstep.ltl import (
    always, always_eventually, and_, eventually, eventually_always, FALSE, iff, implies,
    next_, not_, or_, TRUE, until, atom,
)

logger = logging.getLogger(__name__)

readable_by_token = {
    "$end": "end of input",
    "NAME": "atom",
    "NUMBER": "number",
    "NOT": "'!'",
    "AND": "'&'",
    "OR": "'|'",
    "IMPLIES": "'->'",
    "IFF": "'<->'",
    "LPAREN": "'('",
    "RPAREN": "')'",
    "LBRACKET": "'['",
    "RBRACKET": "']'",
    "COMMA": "','",
    "NEXT": "'X'",
    "EVENTUALLY": "'F'",
    "ALWAYS": "'G'",
    "UNTIL": "'U'",
    "ALWAYS_EVENTUALLY": "'GF'",
    "EVENTUALLY_ALWAYS": "'FG'",
    "TRUE": "'true'",
    "FALSE": "'false'",
}


def _get_column(text, lexpos):
    return lexpos - text.rfind("\n", 0, lexpos)


class Lexer:
    """Token rules to build LTL lexer."""

    reserved = {
        "X": "NEXT",
        "F": "EVENTUALLY",
        "G": "ALWAYS",
        "U": "UNTIL",
        "GF": "ALWAYS_EVENTUALLY",
        "FG": "EVENTUALLY_ALWAYS",
        "true": "TRUE",
        "false": "FALSE",
    }
    delimiters = ["LPAREN", "RPAREN", "LBRACKET", "RBRACKET", "COMMA"]
    operators = ["NOT", "AND", "OR", "IMPLIES", "IFF"]
    misc = ["NAME", "NUMBER"]
    tokens = misc + operators + delimiters + sorted(set(reserved.values()))

    t_NOT = r"\!"
    t_AND = r"\&"
    t_OR = r"\|"
    t_LPAREN = r"\("
    t_RPAREN = r"\)"
    t_LBRACKET = r"\["
    t_RBRACKET = r"\]"
    t_COMMA = r","
    t_ignore = " \t\r"

    def __init__(self):
        self.lexer = lex.lex(module=self, debug=False, errorlog=lex.NullLogger())

    # (Function rules are matched in definition order: "<->" before "->")
    def t_IFF(self, t):
        r"\<\-\>"
        return t

    def t_IMPLIES(self, t):
        r"\-\>"
        return t

    def t_NAME(self, t):
        r"[A-Za-z_][A-Za-z0-9_]*"
        t.type = self.reserved.get(t.value, "NAME")
        return t

    def t_NUMBER(self, t):
        r"\d+"
        t.value = int(t.value)
        return t

    def t_newline(self, t):
        r"\n+"
        t.lexer.lineno += t.value.count("\n")

    def t_error(self, t):
        raise LTLSyntaxError("illegal character %r" % t.value[0],
                             t.lexer.lineno, _get_column(t.lexer.lexdata, t.lexpos),
                             text=t.lexer.lexdata)


class Parser:
    """Production rules to build LTL parser."""

    tokens = Lexer.tokens
    start = "formula"

    def __init__(self):
        self.lexer = Lexer()
        self.parser = yacc.yacc(module=self, start=self.start, debug=False,
                                write_tables=False, errorlog=yacc.NullLogger())
        self.text = ""

    def parse(self, text):
        self.text = text
        self.lexer.lexer.lineno = 1
        return self.parser.parse(text, lexer=self.lexer.lexer)

    def p_formula(self, p):
        """formula : iff"""
        p[0] = p[1]

    def p_iff(self, p):
        """iff : iff IFF imp"""
        p[0] = iff(p[1], p[3])

    def p_iff_end(self, p):
        """iff : imp"""
        p[0] = p[1]

    def p_implies(self, p):
        """imp : disj IMPLIES imp"""
        p[0] = implies(p[1], p[3])

    def p_implies_end(self, p):
        """imp : disj"""
        p[0] = p[1]

    def p_disjunction(self, p):
        """disj : or_list"""
        p[0] = or_(*p[1])

    def p_disjunction_end(self, p):
        """disj : conj"""
        p[0] = p[1]

    def p_or_list_iter(self, p):
        """or_list : or_list OR conj"""
        p[1].append(p[3])
        p[0] = p[1]

    def p_or_list_end(self, p):
        """or_list : conj OR conj"""
        p[0] = [p[1], p[3]]

    def p_conjunction(self, p):
        """conj : and_list"""
        p[0] = and_(*p[1])

    def p_conjunction_end(self, p):
        """conj : until"""
        p[0] = p[1]

    def p_and_list_iter(self, p):
        """and_list : and_list AND until"""
        p[1].append(p[3])
        p[0] = p[1]

    def p_and_list_end(self, p):
        """and_list : until AND until"""
        p[0] = [p[1], p[3]]

    def p_until(self, p):
        """until : unary UNTIL until"""
        p[0] = until(p[1], p[3])

    def p_until_end(self, p):
        """until : unary"""
        p[0] = p[1]

    def p_not(self, p):
        """unary : NOT unary"""
        p[0] = not_(p[2])

    def p_temporal(self, p):
        """unary : NEXT unary
                 | EVENTUALLY unary
                 | ALWAYS unary
                 | ALWAYS_EVENTUALLY unary
                 | EVENTUALLY_ALWAYS unary
        """
        constructor = {
            "NEXT": next_,
            "EVENTUALLY": eventually,
            "ALWAYS": always,
            "ALWAYS_EVENTUALLY": always_eventually,
            "EVENTUALLY_ALWAYS": eventually_always,
        }[p.slice[1].type]
        p[0] = constructor(p[2])

    def p_temporal_bounded(self, p):
        """unary : EVENTUALLY bound unary
                 | ALWAYS bound unary
        """
        constructor = eventually if p.slice[1].type == "EVENTUALLY" else always
        p[0] = constructor(p[3], time_bound=p[2])

    def p_bound(self, p):
        """bound : LBRACKET NUMBER COMMA NUMBER RBRACKET"""
        lower, upper = p[2], p[4]
        if not 1 <= lower <= upper:
            raise LTLSyntaxError(ErrorCode.get_message_by_code(ErrorCode.LTL_BOUND, lower=lower, upper=upper),
                                 p.lineno(1), _get_column(self.text, p.lexpos(1)), text=self.text)
        p[0] = (lower, upper)

    def p_true(self, p):
        """unary : TRUE"""
        p[0] = TRUE

    def p_false(self, p):
        """unary : FALSE"""
        p[0] = FALSE

    def p_atom(self, p):
        """unary : NAME"""
        p[0] = atom(p[1])

    def p_paren(self, p):
        """unary : LPAREN formula RPAREN"""
        p[0] = p[2]

    def p_error(self, p):
        state = self.parser.statestack[-1] if getattr(self.parser, "statestack", None) else 0
        expected = {readable_by_token.get(token, token) for token in self.parser.action.get(state, {})}
        if p is None:
            lines = self.text.split("\n")
            raise LTLSyntaxError("unexpected end of input", len(lines), len(lines[-1]) + 1,
                                 expected, text=self.text)
        raise LTLSyntaxError("unexpected %s" % repr(p.value) if p.type != "NUMBER" else "unexpected number %s" % p.value,
                             p.lineno, _get_column(self.text, p.lexpos), expected, text=self.text)


_parser = None
_parser_lock = Lock()


def parse(text):
    """Parses formula text into a Formula tree. Raises LTLSyntaxError."""
    global _parser
    if not isinstance(text, str):
        raise LTLSyntaxError("formula must be a string, got %s" % type(text).__name__)
    with _parser_lock:
        if _parser is None:
            _parser = Parser()
        result = _parser.parse(text)
    logger.debug("Parsed %r -> %s", text, result)
    return result
