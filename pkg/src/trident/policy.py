"""Credential composition rules and login-field gatekeeping.

Login names and login passwords are 5-15 characters of ``[a-z0-9]``.
Authentication passwords are 20 characters covering all four character
classes, with an uppercase letter or a symbol among the first four. Login
fields accept only ``[a-z0-9]``, which is what keeps authentication passwords
and identifiers out of them.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from enum import Enum

from trident.errors import InvalidLoginName, InvalidLoginPassword, UnsupportedCharacter

CREDENTIAL_MIN = 5
CREDENTIAL_MAX = 15
AP_LENGTH = 20

FIELD_CHARSET = frozenset(string.ascii_lowercase + string.digits)
PRINTABLE = "".join(chr(c) for c in range(0x21, 0x7F))
SYMBOLS = "".join(c for c in PRINTABLE if not c.isalnum())


class FieldKind(str, Enum):
    LN_FIELD = "LN_FIELD"
    LP_FIELD = "LP_FIELD"


@dataclass(frozen=True)
class CharClassProfile:
    has_upper: bool = False
    has_lower: bool = False
    has_digit: bool = False
    has_symbol: bool = False

    @property
    def class_count(self) -> int:
        return self.has_upper + self.has_lower + self.has_digit + self.has_symbol


def normalize_login_name(raw: str) -> str:
    """Lowercase ASCII letters, drop everything outside ``[a-z0-9]``."""
    if not raw:
        raise InvalidLoginName("login name is empty")
    out = "".join(c for c in (_ascii_lower(ch) for ch in raw) if c in FIELD_CHARSET)
    if not CREDENTIAL_MIN <= len(out) <= CREDENTIAL_MAX:
        raise InvalidLoginName(
            f"login name must normalize to {CREDENTIAL_MIN}-{CREDENTIAL_MAX} "
            f"characters of [a-z0-9], got {len(out)}"
        )
    return out


def _ascii_lower(ch: str) -> str:
    return ch.lower() if "A" <= ch <= "Z" else ch


def validate_login_password(pw: str) -> None:
    if not CREDENTIAL_MIN <= len(pw) <= CREDENTIAL_MAX:
        raise InvalidLoginPassword(
            "length",
            f"login password must be {CREDENTIAL_MIN}-{CREDENTIAL_MAX} characters long",
        )
    if any(c not in FIELD_CHARSET for c in pw):
        raise InvalidLoginPassword(
            "charset", "login password may only contain lowercase letters and digits"
        )


def classify(text: str) -> CharClassProfile:
    upper = lower = digit = symbol = False
    for c in text:
        if "A" <= c <= "Z":
            upper = True
        elif "a" <= c <= "z":
            lower = True
        elif "0" <= c <= "9":
            digit = True
        elif "\x21" <= c <= "\x7e":
            symbol = True
        else:
            raise UnsupportedCharacter(f"character {c!r} is not printable ASCII")
    return CharClassProfile(upper, lower, digit, symbol)


def check_ap_policy(ap: str) -> bool:
    if len(ap) != AP_LENGTH:
        return False
    try:
        whole = classify(ap)
        head = classify(ap[:4])
    except UnsupportedCharacter:
        return False
    return whole.class_count == 4 and (head.has_upper or head.has_symbol)


def field_accepts(field: FieldKind, text: str) -> bool:
    """Both login fields share one rule: 1-15 characters of ``[a-z0-9]``."""
    FieldKind(field)
    return 1 <= len(text) <= CREDENTIAL_MAX and all(c in FIELD_CHARSET for c in text)
