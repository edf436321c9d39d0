"""Exception types shared across the package."""


class LevelDecayError(Exception):
    """Base class for all package errors."""


class ParameterError(LevelDecayError, ValueError):
    """A parameter record violates its domain (e.g. alpha <= 0)."""


class RegimeError(LevelDecayError, ValueError):
    """An operation was asked for outside its exponent regime."""


class InputError(LevelDecayError, ValueError):
    """Malformed user input: bad grid, bad config field, bad file."""


class NonFiniteError(LevelDecayError, ArithmeticError):
    """A computed constant overflowed or is otherwise non-finite."""


class FitError(LevelDecayError, ValueError):
    """Not enough usable data points for a least-squares fit."""


class ConvergenceError(LevelDecayError, RuntimeError):
    """An iterative solve ran out of iterations.

    Carries the iteration history so callers can report partial progress.
    """

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []
