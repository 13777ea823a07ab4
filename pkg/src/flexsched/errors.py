"""Exception hierarchy. CLI exit codes: 2 validation, 3 infeasible, 4 solver, 5 io."""


class FlexschedError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ValidationError(FlexschedError):
    exit_code = 2


class UnknownConfig(ValidationError):
    """Requested built-in plant configuration does not exist."""


class BadParams(ValidationError):
    """Invalid parameters for a generator or command."""


class NoActiveRound(ValidationError):
    """Consult time falls in a gap of the trading calendar."""


class InfeasibleError(FlexschedError):
    exit_code = 3


class InfeasibleByConstruction(InfeasibleError):
    """Feasibility pre-scan proves the model cannot be satisfied."""


class InfeasibleDay(InfeasibleError):
    """A daily optimization had no feasible schedule."""


class ZeroOperation(InfeasibleError):
    """Normalization requested but the machine never ran."""


class SolverError(FlexschedError):
    exit_code = 4


class SolverAborted(SolverError):
    """Solve hit a node/time limit without proving optimality."""


class NumericalBreakdown(SolverError):
    """Pivoting degenerated beyond recovery."""


class SolutionIncomplete(SolverError):
    """A variable handle has no value in the solver output."""


class TooLarge(SolverError):
    """Instance exceeds the enumeration oracle's size cap."""


class IoError(FlexschedError):
    exit_code = 5


class ParseError(IoError):
    """Malformed input file; carries file and line."""

    def __init__(self, path, line, message):
        super().__init__(f"{path}:{line}: {message}")
        self.path = str(path)
        self.line = line


class GapError(IoError):
    """Price store has missing dates."""

    def __init__(self, missing):
        dates = ", ".join(str(d) for d in missing)
        super().__init__(f"missing price files for: {dates}")
        self.missing = list(missing)


class MissingPrices(IoError):
    """Simulation window extends beyond the available price data."""
