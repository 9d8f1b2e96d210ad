# Exception types raised by the solver modules
# The launcher maps these to exit codes; library code never calls exit()


class PEQError(Exception):
    """Base class for every error raised by the solver."""


class ConfigError(PEQError):
    """Bad configuration value, unknown key or malformed config text."""

    def __init__(self, message, key=None, lines=()):
        self.key = key
        self.lines = tuple(lines)
        where = ""
        if self.lines:
            where = " (line " + ", ".join(str(n) for n in self.lines) + ")"
        super().__init__(f"{message}{where}")


class NumericalError(PEQError):
    """An iterative numerical method failed to meet its tolerance."""


class ConvergenceError(NumericalError):
    def __init__(self, message, residual, iterations):
        self.residual = residual
        self.iterations = iterations
        super().__init__(f"{message}: residual {residual:.3e} after {iterations} iterations")


class SolvabilityError(NumericalError):
    """Neumann problem whose right-hand side has a nonzero mean."""


class BlowUpError(NumericalError):
    def __init__(self, message, diagnostics=None):
        self.diagnostics = dict(diagnostics or {})
        super().__init__(message)


class SnapshotFormatError(PEQError):
    pass


class LedgerError(PEQError):
    pass


class InsufficientDataError(PEQError):
    pass


class CertificateDomainError(PEQError):
    """Negative norm or time handed to the bound evaluation."""


class VerificationFailure(PEQError):
    """A verification study ran to completion but its acceptance check failed."""

    def __init__(self, message, report=None):
        self.report = report
        super().__init__(message)
