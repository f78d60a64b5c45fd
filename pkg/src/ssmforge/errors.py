"""Exception types shared across the toolkit."""


class UsageError(ValueError):
    """Bad parameters or inputs: vacuous ranges, malformed files, guard violations.

    The command line maps this to exit code 2.
    """


class SizeGuardError(UsageError):
    """A requested enumeration or construction exceeds the configured size cap."""


class StaleWitnessError(ValueError):
    """A repair step was handed a witness that no longer fails on the matrix."""


class InconsistentOutcomeError(ValueError):
    """An outcome vector is not explained by any defective set of the stated size."""


class RepairLimitError(RuntimeError):
    """Repair did not converge within the configured round budget."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report
