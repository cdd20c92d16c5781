from __future__ import annotations

from typing import Optional


class CausalFriendlinessError(Exception):
    """Base class for every error raised by the package."""


class DimensionError(CausalFriendlinessError, ValueError):
    pass


class InvalidStateError(CausalFriendlinessError, ValueError):
    """A density matrix, Bloch vector or probability table breaks its invariants."""


class LabelMismatchError(CausalFriendlinessError, ValueError):
    pass


class NumericalInvariantError(CausalFriendlinessError, ArithmeticError):
    """Round-off pushed a result outside what the math guarantees (bad certificate, failed rewind...)."""


class UsageError(CausalFriendlinessError):
    pass


class SpecParseError(UsageError):
    def __init__(self, message: str, line: Optional[int] = None, source: str = "<spec>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {message}")
