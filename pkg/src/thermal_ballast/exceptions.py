"""Exception hierarchy.

Every domain failure derives from :class:`ThermalBallastError`; the CLI maps
these to exit code 1.  Most also subclass the builtin that a caller would
naturally catch (``ValueError``, ``IndexError``, ...).
"""


class ThermalBallastError(Exception):
    """Base class for all domain errors raised by this package."""


# -- time series --------------------------------------------------------------
class EmptySeries(ThermalBallastError, ValueError):
    pass


class NonIntegerRatio(ThermalBallastError, ValueError):
    pass


class OutOfRange(ThermalBallastError, IndexError):
    pass


class UnitMismatch(ThermalBallastError, ValueError):
    pass


class SignalGap(ThermalBallastError, ValueError):
    """Input signal has a missing or irregular sample, or does not cover the run."""


# -- envelope -----------------------------------------------------------------
class NonPositiveProperty(ThermalBallastError, ValueError):
    pass


class EmptySequence(ThermalBallastError, ValueError):
    pass


class SingularZ12(ThermalBallastError, ZeroDivisionError):
    pass


# -- thermal model ------------------------------------------------------------
class StepMismatch(ThermalBallastError, ValueError):
    pass


class LengthMismatch(ThermalBallastError, ValueError):
    pass


class UnstableModel(ThermalBallastError, ValueError):
    pass


class RankDeficient(ThermalBallastError, ValueError):
    pass


class InsufficientData(ThermalBallastError, ValueError):
    pass


class ConstantTruth(ThermalBallastError, ValueError):
    pass


class ZeroScale(ThermalBallastError, ValueError):
    pass


# -- controller / simulator ---------------------------------------------------
class HorizonOverrun(ThermalBallastError, IndexError):
    pass


class ModelMissing(ThermalBallastError, KeyError):
    def __str__(self):  # KeyError would repr() the message
        return str(self.args[0]) if self.args else ""


class EmptyLedger(ThermalBallastError, ValueError):
    pass


# -- comfort / tuner ----------------------------------------------------------
class NoConvergence(ThermalBallastError, ArithmeticError):
    pass


class NoFeasibleCell(ThermalBallastError, ValueError):
    pass


# -- configuration ------------------------------------------------------------
class ParseError(ThermalBallastError, ValueError):
    pass


class MissingKey(ThermalBallastError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class PathNotFound(ThermalBallastError, FileNotFoundError):
    pass
