"""The login-name converter of the username "Benz428", as a literal reference table.

Row 4's converted string is kept verbatim (backslash included)
even though its digit is 2, so this table is not a valid derived converter;
``QuasiMatrix.validate`` would reject it.
"""

from __future__ import annotations

from trident.converter import QuasiMatrix
from trident.keystream import Kind

BENZ428_TABLE = [
    ("B", 3, "y]Q", ""),
    ("e", 5, "#ws%8", "5F"),
    ("n", 3, "O^&", "9R"),
    ("z", 2, "\\$d", "17R"),
    ("4", 3, ")Lh", "13F"),
    ("2", 3, "zF=", "8F"),
    ("8", 1, "m", "11F"),
]


def benz428_matrix() -> QuasiMatrix:
    return QuasiMatrix.from_table(Kind.LN, BENZ428_TABLE)
