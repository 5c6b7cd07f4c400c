"""Triple-identity login authentication built on a quasi-matrix password converter."""

from trident.errors import (
    CellOutOfRange,
    CorruptStore,
    DerivationExhausted,
    DuplicateIdentity,
    IdentityShapeError,
    InfeasibleDigits,
    InvalidDevice,
    InvalidLoginName,
    InvalidLoginPassword,
    SelectionExhausted,
    TridentError,
    UnsupportedCharacter,
)

__version__ = "0.1.0"

__all__ = [
    "CellOutOfRange",
    "CorruptStore",
    "DerivationExhausted",
    "DuplicateIdentity",
    "IdentityShapeError",
    "InfeasibleDigits",
    "InvalidDevice",
    "InvalidLoginName",
    "InvalidLoginPassword",
    "SelectionExhausted",
    "TridentError",
    "UnsupportedCharacter",
    "__version__",
]
