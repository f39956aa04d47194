"""Exception hierarchy shared by every layer of the package."""


class QMEError(Exception):
    """Base class for all errors raised by qme."""


class DimensionError(QMEError, ValueError):
    pass


class NotHermitianError(QMEError, ValueError):
    pass


class NotPositiveError(QMEError, ValueError):
    pass


class NumericalError(QMEError, ArithmeticError):
    pass


class InvariantViolation(QMEError, ValueError):
    """A domain object failed validation.

    ``invariant`` names the violated condition and ``margin`` is how far past
    its tolerance the input landed (``None`` when not meaningful).
    """

    def __init__(self, invariant: str, detail: str = "", margin: float | None = None):
        self.invariant = invariant
        self.detail = detail
        self.margin = margin
        msg = invariant
        if detail:
            msg += f": {detail}"
        if margin is not None:
            msg += f" (margin {margin:.3e})"
        super().__init__(msg)


class ZeroEffectError(QMEError, ValueError):
    pass


class UndefinedBoundError(QMEError, ValueError):
    pass


class InstrumentMismatchError(QMEError, ValueError):
    pass


class NotSurjectiveError(QMEError, ValueError):
    pass


class LabelError(QMEError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class UnknownCheckError(QMEError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class ConfigError(QMEError, ValueError):
    pass


class SchemaError(QMEError, ValueError):
    """Input does not match the JSON interchange format."""
