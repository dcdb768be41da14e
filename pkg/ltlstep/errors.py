from ltlstep.api import ErrorCode


class PlannerError(Exception):
    """Base for all errors which must be reported to the user.

    Message is taken from ErrorCode.message_by_code if not given explicitly.
    """

    code = None
    message = None

    def __init__(self, code=None, message=None, **kwargs):
        self.code = code
        self.message = message or ErrorCode.get_message_by_code(code, **kwargs)
        self.details = kwargs
        super().__init__(self.message)

    def __str__(self) -> str:
        return "<%s code: %s msg: %s>" % (self.__class__.__name__, self.code, self.message)


class LTLSyntaxError(PlannerError):
    def __init__(self, details, line=1, column=1, expected=None, text=None):
        self.line = line
        self.column = column
        self.expected = sorted(expected) if expected else []
        self.text = text
        if self.expected:
            details = "%s (expected: %s)" % (details, ", ".join(self.expected))
        super().__init__(ErrorCode.LTL_SYNTAX, line=line, column=column, details=details)


class EncodingError(PlannerError):
    pass


class InfeasibleSpecificationError(PlannerError):
    pass


class ScenarioError(PlannerError):
    def __init__(self, path, details, code=ErrorCode.SCENARIO_SCHEMA, **kwargs):
        self.path = path
        super().__init__(code, path=path, details=details, **kwargs)


class SolverError(PlannerError):
    pass


class NumericalError(SolverError):
    def __init__(self, iterations, primal, dual):
        self.iterations = iterations
        self.primal_residual = primal
        self.dual_residual = dual
        super().__init__(ErrorCode.NUMERICAL, iterations=iterations, primal=primal, dual=dual)
