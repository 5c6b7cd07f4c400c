"""The per-account association record and its JSON form.

Binary values are lowercase hex. Parsing is strict: a missing or unknown key
anywhere in a record raises :class:`~trident.errors.CorruptStore`.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Any

from trident.errors import CorruptStore
from trident.identity import (
    CellCoord,
    Column,
    IdentifierCommitment,
    IdentityDigest,
    Mode,
    SelectionDescriptor,
)
from trident.keystream import Kind


@dataclass(frozen=True)
class AccountRecord:
    account_id: bytes
    nonce: bytes
    ln_identity: IdentityDigest
    ln_descriptor: SelectionDescriptor
    ln_commitment: IdentifierCommitment
    ln_attempt: int
    lp_identity: IdentityDigest
    lp_descriptor: SelectionDescriptor
    lp_commitment: IdentifierCommitment
    lp_attempt: int
    ap_identity: IdentityDigest
    ap_commitment: IdentifierCommitment


RECORD_KEYS = tuple(f.name for f in fields(AccountRecord))


def _descriptor_to_json(d: SelectionDescriptor) -> dict[str, Any]:
    if d.mode == Mode.ROW:
        return {"mode": "ROW", "row_index": d.row_index}
    if d.mode == Mode.COLUMN:
        return {"mode": "COLUMN", "column": d.column.value}
    return {"mode": "CELLS", "cells": [{"row": c.row, "col": c.col.value} for c in d.cells]}


def record_to_json(rec: AccountRecord) -> dict[str, Any]:
    def ident(i: IdentityDigest) -> dict[str, str]:
        return {"kind": i.kind.value, "digest": i.digest.hex()}

    def commit(c: IdentifierCommitment) -> dict[str, str]:
        return {"salt": c.salt.hex(), "commitment": c.commitment.hex()}

    return {
        "account_id": rec.account_id.hex(),
        "nonce": rec.nonce.hex(),
        "ln_identity": ident(rec.ln_identity),
        "ln_descriptor": _descriptor_to_json(rec.ln_descriptor),
        "ln_commitment": commit(rec.ln_commitment),
        "ln_attempt": rec.ln_attempt,
        "lp_identity": ident(rec.lp_identity),
        "lp_descriptor": _descriptor_to_json(rec.lp_descriptor),
        "lp_commitment": commit(rec.lp_commitment),
        "lp_attempt": rec.lp_attempt,
        "ap_identity": ident(rec.ap_identity),
        "ap_commitment": commit(rec.ap_commitment),
    }


def _expect(obj: Any, keys: set[str], where: str) -> dict[str, Any]:
    if not isinstance(obj, dict):
        raise CorruptStore(f"{where}: expected an object")
    if set(obj) != keys:
        missing = sorted(keys - set(obj))
        extra = sorted(set(obj) - keys)
        raise CorruptStore(f"{where}: missing keys {missing}, unknown keys {extra}")
    return obj


def _hex(value: Any, length: int, where: str) -> bytes:
    if not isinstance(value, str) or value != value.lower():
        raise CorruptStore(f"{where}: expected lowercase hex")
    try:
        raw = bytes.fromhex(value)
    except ValueError:
        raise CorruptStore(f"{where}: invalid hex") from None
    if len(raw) != length:
        raise CorruptStore(f"{where}: expected {length} bytes, got {len(raw)}")
    return raw


def _int(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise CorruptStore(f"{where}: expected a non-negative integer")
    return value


def _identity(obj: Any, kind: Kind, where: str) -> IdentityDigest:
    obj = _expect(obj, {"kind", "digest"}, where)
    if obj["kind"] != kind.value:
        raise CorruptStore(f"{where}: kind must be {kind.value}")
    return IdentityDigest(kind, _hex(obj["digest"], 32, where))


def _commitment(obj: Any, where: str) -> IdentifierCommitment:
    obj = _expect(obj, {"salt", "commitment"}, where)
    return IdentifierCommitment(_hex(obj["salt"], 16, where), _hex(obj["commitment"], 32, where))


def _descriptor(obj: Any, where: str) -> SelectionDescriptor:
    if not isinstance(obj, dict) or "mode" not in obj:
        raise CorruptStore(f"{where}: descriptor needs a mode")
    try:
        mode = Mode(obj["mode"])
        if mode == Mode.ROW:
            obj = _expect(obj, {"mode", "row_index"}, where)
            return SelectionDescriptor.row(_int(obj["row_index"], where))
        if mode == Mode.COLUMN:
            obj = _expect(obj, {"mode", "column"}, where)
            return SelectionDescriptor.col(obj["column"])
        obj = _expect(obj, {"mode", "cells"}, where)
        if not isinstance(obj["cells"], list):
            raise CorruptStore(f"{where}: cells must be a list")
        cells = []
        for cell in obj["cells"]:
            cell = _expect(cell, {"row", "col"}, where)
            cells.append(CellCoord(_int(cell["row"], where), Column(cell["col"])))
        return SelectionDescriptor(Mode.CELLS, cells=tuple(cells))
    except (ValueError, TypeError) as exc:
        raise CorruptStore(f"{where}: {exc}") from None


def record_from_json(obj: Any) -> AccountRecord:
    obj = _expect(obj, set(RECORD_KEYS), "record")
    return AccountRecord(
        account_id=_hex(obj["account_id"], 16, "account_id"),
        nonce=_hex(obj["nonce"], 16, "nonce"),
        ln_identity=_identity(obj["ln_identity"], Kind.LN, "ln_identity"),
        ln_descriptor=_descriptor(obj["ln_descriptor"], "ln_descriptor"),
        ln_commitment=_commitment(obj["ln_commitment"], "ln_commitment"),
        ln_attempt=_int(obj["ln_attempt"], "ln_attempt"),
        lp_identity=_identity(obj["lp_identity"], Kind.LP, "lp_identity"),
        lp_descriptor=_descriptor(obj["lp_descriptor"], "lp_descriptor"),
        lp_commitment=_commitment(obj["lp_commitment"], "lp_commitment"),
        lp_attempt=_int(obj["lp_attempt"], "lp_attempt"),
        ap_identity=_identity(obj["ap_identity"], Kind.AP, "ap_identity"),
        ap_commitment=_commitment(obj["ap_commitment"], "ap_commitment"),
    )
