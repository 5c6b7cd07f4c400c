"""File-backed credential database.

One UTF-8 JSON document ``{"version": 1, "records": [...]}``. Writes go to a
temporary file in the same directory which is fsynced and then renamed over
the old file, under an exclusive ``fcntl`` lock on ``<path>.lock``.
"""

from __future__ import annotations

import contextlib
import fcntl
import json
import os
import tempfile
from collections.abc import Callable, Iterator
from pathlib import Path

from trident.errors import CorruptStore, DuplicateIdentity
from trident.records import AccountRecord, record_from_json, record_to_json

STORE_VERSION = 1

# Named points at which tests may inject a crash during put_account.
FAULT_POINTS = ("temp_written", "before_rename")


def serialize(records: list[AccountRecord]) -> str:
    doc = {"version": STORE_VERSION, "records": [record_to_json(r) for r in records]}
    return json.dumps(doc, indent=1, sort_keys=False) + "\n"


def parse(text: str) -> list[AccountRecord]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptStore(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or set(doc) != {"version", "records"}:
        raise CorruptStore('top level must be exactly {"version", "records"}')
    if doc["version"] != STORE_VERSION:
        raise CorruptStore(f"unsupported store version {doc['version']!r}")
    if not isinstance(doc["records"], list):
        raise CorruptStore("records must be a list")
    records = [record_from_json(r) for r in doc["records"]]
    _index(records)
    return records


def _index(records: list[AccountRecord]) -> tuple[dict[bytes, AccountRecord], dict[bytes, AccountRecord]]:
    by_ln: dict[bytes, AccountRecord] = {}
    by_id: dict[bytes, AccountRecord] = {}
    for r in records:
        if r.ln_identity.digest in by_ln:
            raise CorruptStore(f"duplicate ln_identity {r.ln_identity.digest.hex()}")
        if r.account_id in by_id:
            raise CorruptStore(f"duplicate account_id {r.account_id.hex()}")
        by_ln[r.ln_identity.digest] = r
        by_id[r.account_id] = r
    return by_ln, by_id


class Store:
    """Account records indexed by LN identity digest and by account id.

    ``path=None`` gives a purely in-memory store.
    """

    def __init__(self, path: Path | None = None, records: list[AccountRecord] | None = None) -> None:
        self.path = path
        self.fault: Callable[[str], None] | None = None
        self._load(records or [])

    @classmethod
    def open(cls, path: str | os.PathLike[str]) -> Store:
        path = Path(path)
        if not path.exists():
            return cls(path)
        return cls(path, parse(path.read_text(encoding="utf-8")))

    def _load(self, records: list[AccountRecord]) -> None:
        self._by_ln, self._by_id = _index(records)
        self._records = list(records)

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[AccountRecord]:
        return iter(list(self._records))

    @property
    def records(self) -> list[AccountRecord]:
        return list(self._records)

    def get_by_ln_digest(self, digest: bytes) -> AccountRecord | None:
        return self._by_ln.get(bytes(digest))

    def get_by_account_id(self, account_id: bytes) -> AccountRecord | None:
        return self._by_id.get(bytes(account_id))

    def put_account(self, rec: AccountRecord) -> None:
        if self.path is None:
            self._insert(rec)
            return
        with self._locked():
            # pick up writes made by other processes since we opened
            if self.path.exists():
                self._load(parse(self.path.read_text(encoding="utf-8")))
            self._check_new(rec)
            self._write([*self._records, rec])
            self._insert(rec)

    def _check_new(self, rec: AccountRecord) -> None:
        if rec.ln_identity.digest in self._by_ln:
            raise DuplicateIdentity("an account with this login identity already exists")
        if rec.account_id in self._by_id:
            raise DuplicateIdentity("account id already in use")

    def _insert(self, rec: AccountRecord) -> None:
        self._check_new(rec)
        self._records.append(rec)
        self._by_ln[rec.ln_identity.digest] = rec
        self._by_id[rec.account_id] = rec

    @contextlib.contextmanager
    def _locked(self) -> Iterator[None]:
        assert self.path is not None
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(f"{self.path}.lock", "a") as lock:
            fcntl.flock(lock, fcntl.LOCK_EX)
            try:
                yield
            finally:
                fcntl.flock(lock, fcntl.LOCK_UN)

    def _hit(self, point: str) -> None:
        if self.fault is not None:
            self.fault(point)

    def _write(self, records: list[AccountRecord]) -> None:
        assert self.path is not None
        data = serialize(records).encode("utf-8")
        fd, tmp = tempfile.mkstemp(prefix=f".{self.path.name}.", suffix=".tmp", dir=self.path.parent)
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
                self._hit("temp_written")
                fh.flush()
                os.fsync(fh.fileno())
            self._hit("before_rename")
            os.replace(tmp, self.path)
        except BaseException:
            with contextlib.suppress(FileNotFoundError):
                os.unlink(tmp)
            raise
        _fsync_dir(self.path.parent)


def _fsync_dir(path: Path) -> None:
    try:
        fd = os.open(path, os.O_RDONLY)
    except OSError:
        return
    try:
        os.fsync(fd)
    except OSError:
        pass
    finally:
        os.close(fd)

