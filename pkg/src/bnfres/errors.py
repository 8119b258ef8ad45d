"""Exception hierarchy. ``exit_code`` is what the CLI returns for each family."""


class BnfError(Exception):
    exit_code = 1


class ValidationError(BnfError, ValueError):
    """Malformed or out-of-hypothesis input (odd Taylor entries, u_j <= 0, ...)."""

    exit_code = 3


class PreconditionError(BnfError):
    """A mathematical precondition does not hold."""

    exit_code = 2


class ResonanceError(PreconditionError):
    """Small divisor: an integer relation among the frequencies."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class StructureError(PreconditionError):
    """Resonance data do not determine (E0, d, u)."""


class LabelingError(PreconditionError):
    """Collision or gap while assigning lattice labels."""


class NumericalError(BnfError):
    exit_code = 4


class RankDeficiencyError(NumericalError):
    def __init__(self, message, unidentifiable=()):
        super().__init__(message)
        self.unidentifiable = tuple(unidentifiable)
