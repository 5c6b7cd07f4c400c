"""Exception hierarchy shared by every trident module."""

from __future__ import annotations


class TridentError(Exception):
    """Base class for all library errors."""


class DerivationExhausted(TridentError):
    """The per-account derivation counter ran past its limit."""


class InfeasibleDigits(TridentError):
    pass


class InvalidLoginName(TridentError):
    pass


class InvalidLoginPassword(TridentError):
    """Login password violates the composition rules.

    ``reason`` is ``"length"`` or ``"charset"``.
    """

    def __init__(self, reason: str, message: str | None = None) -> None:
        self.reason = reason
        super().__init__(message or f"invalid login password ({reason})")


class UnsupportedCharacter(TridentError):
    pass


class IdentityShapeError(TridentError):
    pass


class InvalidDevice(TridentError):
    pass


class CellOutOfRange(TridentError):
    pass


class SelectionExhausted(TridentError):
    pass


class DuplicateIdentity(TridentError):
    pass


class CorruptStore(TridentError):
    pass
