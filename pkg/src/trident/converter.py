"""Quasi-matrix password converter.

Each credential character becomes one row: the character, a digit in 1..5,
a converted string of that many printable-ASCII characters, and a shuffle
label (offset 1..20 plus direction F/R; the first row has none). For a login
password the digits sum to 20 and the rows are shuffled into a 20-character
authentication password.

Shuffle rule: slots 1..20 start empty. Row 1 fills forward from slot 1. Every
later row starts at its label offset and walks forward (F) or backward (R),
wrapping around and skipping occupied slots, placing one character per free
slot. The password is the buffer read from slot 1 to slot 20.
"""

from __future__ import annotations

from dataclasses import dataclass

from trident.errors import DerivationExhausted, InfeasibleDigits
from trident.keystream import MAX_ATTEMPTS, Kind, MasterKey, Stream, StreamContext, new_stream
from trident.policy import AP_LENGTH, PRINTABLE, check_ap_policy

DIGIT_MIN = 1
DIGIT_MAX = 5
LABEL_MAX = 20


@dataclass(frozen=True)
class ShuffleLabel:
    offset: int
    direction: str  # "F" or "R"

    def __post_init__(self) -> None:
        if not 1 <= self.offset <= LABEL_MAX:
            raise ValueError(f"label offset {self.offset} outside 1..{LABEL_MAX}")
        if self.direction not in ("F", "R"):
            raise ValueError(f"label direction must be F or R, got {self.direction!r}")

    def __str__(self) -> str:
        return f"{self.offset}{self.direction}"

    @classmethod
    def parse(cls, text: str) -> ShuffleLabel:
        return cls(int(text[:-1]), text[-1])


@dataclass(frozen=True)
class ConverterRow:
    input_char: str
    digit: int
    converted: str
    label: ShuffleLabel | None = None


@dataclass(frozen=True)
class QuasiMatrix:
    """Rows are not validated on construction so literal fixtures can be loaded
    as printed; :meth:`validate` checks the converter invariants."""

    kind: Kind
    rows: tuple[ConverterRow, ...]
    attempt: int = 0

    @property
    def digit_sum(self) -> int:
        return sum(r.digit for r in self.rows)

    def strings(self) -> str:
        return "".join(r.converted for r in self.rows)

    def validate(self) -> None:
        for i, r in enumerate(self.rows, start=1):
            if len(r.input_char) != 1:
                raise ValueError(f"row {i}: input must be a single character")
            if not DIGIT_MIN <= r.digit <= DIGIT_MAX:
                raise ValueError(f"row {i}: digit {r.digit} outside {DIGIT_MIN}..{DIGIT_MAX}")
            if len(r.converted) != r.digit:
                raise ValueError(f"row {i}: converted length {len(r.converted)} != digit {r.digit}")
            if any(c not in PRINTABLE for c in r.converted):
                raise ValueError(f"row {i}: converted string leaves 0x21-0x7E")
        if self.kind == Kind.LP:
            if self.digit_sum != AP_LENGTH:
                raise ValueError(f"LP digit sum {self.digit_sum} != {AP_LENGTH}")
            if any(r.label is None for r in self.rows[1:]):
                raise ValueError("LP rows after the first need a shuffle label")

    @classmethod
    def from_table(cls, kind: Kind, table: list[tuple[str, int, str, str]], attempt: int = 0) -> QuasiMatrix:
        """Build from ``(char, digit, converted, label_text)`` tuples; empty label text means none."""
        rows = tuple(
            ConverterRow(c, d, s, ShuffleLabel.parse(lbl) if lbl else None) for c, d, s, lbl in table
        )
        return cls(Kind(kind), rows, attempt)


def derive_digits(s: Stream, n_rows: int, target_sum: int | None = None) -> list[int]:
    if n_rows < 1:
        raise InfeasibleDigits("need at least one row")
    if target_sum is None:
        return [s.next_uint(DIGIT_MIN, DIGIT_MAX) for _ in range(n_rows)]
    if not DIGIT_MIN * n_rows <= target_sum <= DIGIT_MAX * n_rows:
        raise InfeasibleDigits(f"{n_rows} digits in {DIGIT_MIN}..{DIGIT_MAX} cannot sum to {target_sum}")
    digits = []
    remaining = target_sum
    for j in range(n_rows):
        rest = n_rows - j - 1
        lo = max(DIGIT_MIN, remaining - DIGIT_MAX * rest)
        hi = min(DIGIT_MAX, remaining - DIGIT_MIN * rest)
        d = s.next_uint(lo, hi)
        digits.append(d)
        remaining -= d
    return digits


def derive_row(s: Stream, c: str, digit: int, is_first_row: bool, kind: Kind) -> ConverterRow:
    if not DIGIT_MIN <= digit <= DIGIT_MAX:
        raise ValueError(f"digit {digit} outside {DIGIT_MIN}..{DIGIT_MAX}")
    converted = "".join(s.next_char(PRINTABLE) for _ in range(digit))
    label = None
    if not is_first_row:
        offset = s.next_uint(1, LABEL_MAX)
        label = ShuffleLabel(offset, "F" if s.next_uint(0, 1) == 0 else "R")
    return ConverterRow(c, digit, converted, label)


def build_matrix(
    key: MasterKey,
    nonce: bytes,
    kind: Kind,
    credential: str,
    imei: str,
    imsi: str,
    attempt: int = 0,
) -> QuasiMatrix:
    kind = Kind(kind)
    if kind == Kind.AP:
        raise ValueError("converters exist only for LN and LP")
    s = new_stream(key, StreamContext(nonce, kind, credential, imei, imsi, attempt))
    target = AP_LENGTH if kind == Kind.LP else None
    digits = derive_digits(s, len(credential), target)
    rows = tuple(derive_row(s, c, d, i == 0, kind) for i, (c, d) in enumerate(zip(credential, digits)))
    return QuasiMatrix(kind, rows, attempt)


def assemble_ap(m: QuasiMatrix) -> str:
    if m.kind != Kind.LP or m.digit_sum != AP_LENGTH:
        raise ValueError("authentication passwords come only from LP matrices with digit sum 20")
    slots: list[str | None] = [None] * AP_LENGTH
    for i, row in enumerate(m.rows):
        if i == 0:
            pos, step = 0, 1
        elif row.label is None:
            raise ValueError(f"row {i + 1} has no shuffle label")
        else:
            pos, step = row.label.offset - 1, 1 if row.label.direction == "F" else -1
        for ch in row.converted:
            while slots[pos] is not None:
                pos = (pos + step) % AP_LENGTH
            slots[pos] = ch
            pos = (pos + step) % AP_LENGTH
    return "".join(slots)  # type: ignore[arg-type]


def generate_ap(key: MasterKey, nonce: bytes, credential: str, imei: str, imsi: str) -> tuple[QuasiMatrix, str]:
    """Smallest-attempt LP converter whose assembled password passes the AP policy."""
    for attempt in range(MAX_ATTEMPTS):
        m = build_matrix(key, nonce, Kind.LP, credential, imei, imsi, attempt)
        ap = assemble_ap(m)
        if check_ap_policy(ap):
            return m, ap
    raise DerivationExhausted(f"no policy-compliant AP within {MAX_ATTEMPTS} attempts")
