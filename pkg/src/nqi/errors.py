"""Exception hierarchy shared by all modules."""


class NQIError(Exception):
    """Base class for every error raised by :mod:`nqi`."""


class NonSquare(NQIError, ValueError):
    pass


class NonHermitian(NQIError, ValueError):
    pass


class DimensionMismatch(NQIError, ValueError):
    pass


class NormViolation(NQIError, ValueError):
    pass


class InvalidSystem(NQIError, ValueError):
    """A system description violates one of the structural assumptions
    (interaction touching the reference branch, free Hamiltonians mixing
    designated subspaces, ...)."""


class WitnessEquationViolated(NQIError, ValueError):
    """``<chi|D|psi_d>`` is not proportional to the identity on the object."""


class InfeasibleWitness(NQIError, ValueError):
    pass


class DegenerateAlpha(NQIError, ValueError):
    """The success direction collapses onto the already-used subspace, so
    the success amplitude would vanish."""


class NoSolution(NQIError, ValueError):
    pass


class PlanSpecMismatch(NQIError, ValueError):
    pass


class InfeasibleSystem(NQIError):
    pass


class ConfigParseError(NQIError, ValueError):
    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class BadSweepRange(NQIError, ValueError):
    pass
