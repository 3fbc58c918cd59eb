from __future__ import annotations

__all__ = ["FbmLabError", "ConfigError", "MeasurabilityError", "NumericalError"]


class FbmLabError(Exception):
    """Root of every error raised by fbmlab."""


class ConfigError(FbmLabError, ValueError):
    """Raised for invalid parameters; ``errors`` lists every violation found."""

    def __init__(self, errors: str | list[str]):
        self.errors = [errors] if isinstance(errors, str) else list(errors)
        super().__init__("; ".join(self.errors))


class MeasurabilityError(FbmLabError, RuntimeError):
    """A strategy read an observation outside its information window."""

    def __init__(self, message: str, *, node: int | None = None, strategy: str | None = None):
        self.node = node
        self.strategy = strategy
        super().__init__(message)


class NumericalError(FbmLabError, ArithmeticError):
    """Factorization failure or a hard breach of a closed-form oracle."""

    def __init__(self, message: str, *, minor: int | None = None):
        self.minor = minor
        super().__init__(message)
