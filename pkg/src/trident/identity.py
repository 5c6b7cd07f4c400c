"""Identities, identifier selection and identifier commitments.

An *identity* combines a credential (none for the authentication password)
with the device IMEI and IMSI and is hashed into an :class:`IdentityDigest`.
An *identifier* is text rendered from cells of a converter; the store keeps
only the :class:`SelectionDescriptor` that says which cells, plus a salted
commitment to the rendered text.
"""

from __future__ import annotations

import hashlib
import hmac
import random
import struct
from dataclasses import dataclass
from enum import Enum

from trident.converter import QuasiMatrix
from trident.errors import CellOutOfRange, IdentityShapeError, InvalidDevice, SelectionExhausted
from trident.keystream import MAX_ATTEMPTS, Kind
from trident.policy import FIELD_CHARSET

CELLS_MIN = 3
CELLS_MAX = 6
SALT_LEN = 16


@dataclass(frozen=True)
class DeviceProfile:
    imei: str
    imsi: str
    phone_number: str = ""

    def __post_init__(self) -> None:
        for name in ("imei", "imsi"):
            value = getattr(self, name)
            if len(value) != 15 or not value.isascii() or not value.isdigit():
                raise InvalidDevice(f"{name.upper()} must be exactly 15 ASCII digits")


@dataclass(frozen=True)
class IdentityDigest:
    kind: Kind
    digest: bytes


class Column(str, Enum):
    CHAR = "CHAR"
    DIGIT = "DIGIT"
    STRING = "STRING"
    LABEL = "LABEL"


class Mode(str, Enum):
    ROW = "ROW"
    COLUMN = "COLUMN"
    CELLS = "CELLS"


@dataclass(frozen=True)
class CellCoord:
    row: int  # 1-based
    col: Column


@dataclass(frozen=True)
class SelectionDescriptor:
    mode: Mode
    row_index: int | None = None
    column: Column | None = None
    cells: tuple[CellCoord, ...] | None = None

    def __post_init__(self) -> None:
        if self.mode == Mode.ROW:
            ok = self.row_index is not None and self.column is None and self.cells is None
        elif self.mode == Mode.COLUMN:
            ok = self.column is not None and self.row_index is None and self.cells is None
            if ok and self.column == Column.CHAR:
                raise ValueError("a column identifier never uses the input character column")
        elif self.mode == Mode.CELLS:
            ok = self.cells is not None and self.row_index is None and self.column is None
            if ok:
                if not CELLS_MIN <= len(self.cells) <= CELLS_MAX:
                    raise ValueError(f"CELLS selections hold {CELLS_MIN}-{CELLS_MAX} coordinates")
                if len(set(self.cells)) != len(self.cells):
                    raise ValueError("CELLS selection repeats a coordinate")
        else:
            raise ValueError(f"unknown mode {self.mode!r}")
        if not ok:
            raise ValueError(f"{self.mode.value} descriptor carries the wrong fields")

    @classmethod
    def row(cls, index: int) -> SelectionDescriptor:
        return cls(Mode.ROW, row_index=index)

    @classmethod
    def col(cls, column: Column | str) -> SelectionDescriptor:
        return cls(Mode.COLUMN, column=Column(column))

    @classmethod
    def of_cells(cls, cells: list[tuple[int, Column | str]]) -> SelectionDescriptor:
        return cls(Mode.CELLS, cells=tuple(CellCoord(r, Column(c)) for r, c in cells))


@dataclass(frozen=True)
class IdentifierCommitment:
    salt: bytes
    commitment: bytes


def _length_prefixed(*fields: bytes) -> bytes:
    return b"".join(struct.pack(">I", len(f)) + f for f in fields)


def combine_identity(kind: Kind, credential: str | None, device: DeviceProfile) -> IdentityDigest:
    kind = Kind(kind)
    if kind == Kind.AP and credential is not None:
        raise IdentityShapeError("the AP identity is device-only; no credential allowed")
    if kind != Kind.AP and credential is None:
        raise IdentityShapeError(f"the {kind.value} identity needs a credential")
    data = _length_prefixed(
        kind.value.encode("ascii"),
        (credential or "").encode("utf-8"),
        device.imei.encode("ascii"),
        device.imsi.encode("ascii"),
    )
    return IdentityDigest(kind, hashlib.sha256(data).digest())


def render_cell(m: QuasiMatrix, c: CellCoord) -> str:
    if not 1 <= c.row <= len(m.rows):
        raise CellOutOfRange(f"row {c.row} outside 1..{len(m.rows)}")
    row = m.rows[c.row - 1]
    col = Column(c.col)
    if col == Column.CHAR:
        return row.input_char
    if col == Column.DIGIT:
        return str(row.digit)
    if col == Column.STRING:
        return row.converted
    if row.label is None:
        raise CellOutOfRange(f"row {c.row} has no shuffle label")
    return str(row.label)


def render_identifier(m: QuasiMatrix, d: SelectionDescriptor) -> str:
    return "".join(render_cell(m, c) for c in selection_cells(m, d))


def selection_cells(m: QuasiMatrix, d: SelectionDescriptor) -> list[CellCoord]:
    """The coordinates a descriptor reads, in rendering order."""
    if d.mode == Mode.ROW:
        if not 1 <= d.row_index <= len(m.rows):
            raise CellOutOfRange(f"row {d.row_index} outside 1..{len(m.rows)}")
        cols = [Column.CHAR, Column.DIGIT, Column.STRING]
        if m.rows[d.row_index - 1].label is not None:
            cols.append(Column.LABEL)
        return [CellCoord(d.row_index, c) for c in cols]
    if d.mode == Mode.COLUMN:
        # the unlabeled first row contributes nothing to the LABEL column
        return [
            CellCoord(i, d.column)
            for i, row in enumerate(m.rows, start=1)
            if d.column != Column.LABEL or row.label is not None
        ]
    return list(d.cells)


def _all_cells(m: QuasiMatrix) -> list[CellCoord]:
    out = []
    for i, row in enumerate(m.rows, start=1):
        out += [CellCoord(i, Column.CHAR), CellCoord(i, Column.DIGIT), CellCoord(i, Column.STRING)]
        if row.label is not None:
            out.append(CellCoord(i, Column.LABEL))
    return out


def _candidate(entropy: random.Random, m: QuasiMatrix) -> SelectionDescriptor | None:
    mode = entropy.choice(list(Mode))
    if mode == Mode.ROW:
        return SelectionDescriptor.row(entropy.randint(1, len(m.rows)))
    if mode == Mode.COLUMN:
        return SelectionDescriptor.col(entropy.choice([Column.DIGIT, Column.STRING, Column.LABEL]))
    cells = _all_cells(m)
    k = entropy.randint(CELLS_MIN, CELLS_MAX)
    if len(cells) < k:
        return None
    return SelectionDescriptor(Mode.CELLS, cells=tuple(entropy.sample(cells, k)))


def draw_selection(entropy: random.Random, m: QuasiMatrix) -> SelectionDescriptor:
    """Pick identifier cells at random until the rendered text contains a
    character the login fields refuse."""
    if not m.rows:
        raise SelectionExhausted("matrix has no rows")
    for _ in range(MAX_ATTEMPTS):
        d = _candidate(entropy, m)
        if d is None:
            continue
        text = render_identifier(m, d)
        if all(c in FIELD_CHARSET for c in text):
            continue
        return d
    raise SelectionExhausted(f"no acceptable selection within {MAX_ATTEMPTS} draws")


def commit_identifier(entropy: random.Random, identifier: str) -> IdentifierCommitment:
    if not identifier:
        raise ValueError("identifier must be non-empty")
    salt = entropy.randbytes(SALT_LEN)
    return IdentifierCommitment(salt, hashlib.sha256(salt + identifier.encode("utf-8")).digest())


def verify_commitment(identifier: str, c: IdentifierCommitment) -> bool:
    candidate = hashlib.sha256(c.salt + identifier.encode("utf-8")).digest()
    return hmac.compare_digest(candidate, c.commitment)
