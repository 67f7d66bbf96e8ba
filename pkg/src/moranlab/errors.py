"""Exception hierarchy.

Every error carries the process exit code the CLI maps it to: 2 for
malformed input files, 3 for numeric or validation failures.
"""


class MoranError(Exception):
    exit_code = 3


class ParseError(MoranError):
    exit_code = 2


class UnknownNodeId(ParseError):
    pass


class MissingColumn(ParseError):
    pass


class NonNumericCell(ParseError):
    def __init__(self, row, column, value=None):
        self.row = row
        self.column = column
        super().__init__(f"non-numeric cell at row {row}, column {column!r}: {value!r}")


class DuplicateId(ParseError):
    pass


class MissingNode(ParseError):
    def __init__(self, ids):
        self.ids = list(ids)
        shown = ", ".join(self.ids[:20])
        more = "" if len(self.ids) <= 20 else f" (+{len(self.ids) - 20} more)"
        super().__init__(f"{len(self.ids)} graph node(s) have no attribute row: {shown}{more}")


class SelfLoop(MoranError):
    pass


class EmptyGraph(MoranError):
    pass


class InvalidParam(MoranError):
    pass


class Exhausted(MoranError):
    pass


class IsolatedNode(MoranError):
    pass


class DimensionMismatch(MoranError):
    pass


class ConstantVector(MoranError):
    pass


class NotSymmetric(MoranError):
    pass


class NotStochastic(MoranError):
    pass


class NotBistochastic(NotStochastic):
    pass


class Disconnected(MoranError):
    def __init__(self, n_components, message=None):
        self.n_components = n_components
        super().__init__(message or f"graph is disconnected ({n_components} components)")


class DenseOnly(MoranError):
    pass


class ConvergenceFailure(MoranError):
    def __init__(self, message, residual=float("nan")):
        self.residual = residual
        super().__init__(f"{message} (best residual {residual:.3e})")


class Unimputable(MoranError):
    pass
