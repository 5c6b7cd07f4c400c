"""Account registration and the three-stage gatekeeper login flow.

Registration stores, per account, three identity digests (LN, LP, AP) and for
each a commitment to the matching identifier. The LN and LP identifiers are
selections of converter cells; the AP identifier is the authentication
password itself.

Login runs three gates in order::

    AwaitLN --login name--> AwaitLP --login password--> AwaitAP --finalize--> Granted

Any failure moves the session to ``Rejected``. ``Granted`` and ``Rejected``
are terminal.
"""

from __future__ import annotations

import hmac
import random
import secrets
import string
import time
from collections.abc import Callable
from dataclasses import dataclass, field
from enum import Enum
from typing import Protocol

from trident.converter import assemble_ap, build_matrix, generate_ap
from trident.errors import DuplicateIdentity, SelectionExhausted, TridentError
from trident.identity import (
    DeviceProfile,
    combine_identity,
    commit_identifier,
    draw_selection,
    render_identifier,
    verify_commitment,
)
from trident.keystream import MAX_ATTEMPTS, Kind, MasterKey
from trident.policy import FieldKind, field_accepts, normalize_login_name, validate_login_password
from trident.records import AccountRecord

DEFAULT_IDLE_LIMIT = 300.0


class AccountStore(Protocol):
    def get_by_ln_digest(self, digest: bytes) -> AccountRecord | None: ...

    def get_by_account_id(self, account_id: bytes) -> AccountRecord | None: ...

    def put_account(self, rec: AccountRecord) -> None: ...


class Stage(str, Enum):
    AwaitLN = "AwaitLN"
    AwaitLP = "AwaitLP"
    AwaitAP = "AwaitAP"
    Granted = "Granted"
    Rejected = "Rejected"

    @property
    def terminal(self) -> bool:
        return self in (Stage.Granted, Stage.Rejected)


class RejectReason(str, Enum):
    LN_MISMATCH = "LN_MISMATCH"
    LP_MISMATCH = "LP_MISMATCH"
    AP_MISMATCH = "AP_MISMATCH"
    FIELD_REJECTED = "FIELD_REJECTED"
    ORDER_VIOLATION = "ORDER_VIOLATION"
    SESSION_EXPIRED = "SESSION_EXPIRED"


class Outcome(str, Enum):
    Advance = "Advance"
    Reject = "Reject"


@dataclass(frozen=True)
class StageResult:
    outcome: Outcome
    new_stage: Stage
    reason: RejectReason | None = None


@dataclass
class Session:
    session_id: bytes
    device: DeviceProfile
    stage: Stage = Stage.AwaitLN
    account_id: bytes | None = None
    reject_reason: RejectReason | None = None
    idle_limit: float = DEFAULT_IDLE_LIMIT
    clock: Callable[[], float] = field(default=time.monotonic, repr=False)
    last_activity: float = 0.0
    # needed to regenerate the AP at the last gate; dropped once the session ends
    _login_password: str | None = field(default=None, repr=False)

    def _touch(self) -> bool:
        """Record activity; False if the session sat idle too long."""
        now = self.clock()
        expired = now - self.last_activity > self.idle_limit
        self.last_activity = now
        return not expired


def register_account(
    key: MasterKey,
    entropy: random.Random,
    store: AccountStore,
    device: DeviceProfile,
    raw_login_name: str,
    login_password: str,
) -> AccountRecord:
    login_name = normalize_login_name(raw_login_name)
    validate_login_password(login_password)
    ln_identity = combine_identity(Kind.LN, login_name, device)
    if store.get_by_ln_digest(ln_identity.digest) is not None:
        raise DuplicateIdentity("an account with this login identity already exists")

    account_id = entropy.randbytes(16)
    nonce = entropy.randbytes(16)

    for ln_attempt in range(MAX_ATTEMPTS):
        ln_matrix = build_matrix(key, nonce, Kind.LN, login_name, device.imei, device.imsi, ln_attempt)
        try:
            ln_descriptor = draw_selection(entropy, ln_matrix)
            break
        except SelectionExhausted:
            continue
    else:
        raise SelectionExhausted("no usable LN converter within the attempt budget")
    ln_commitment = commit_identifier(entropy, render_identifier(ln_matrix, ln_descriptor))

    lp_matrix, ap = generate_ap(key, nonce, login_password, device.imei, device.imsi)
    lp_descriptor = draw_selection(entropy, lp_matrix)
    lp_commitment = commit_identifier(entropy, render_identifier(lp_matrix, lp_descriptor))

    rec = AccountRecord(
        account_id=account_id,
        nonce=nonce,
        ln_identity=ln_identity,
        ln_descriptor=ln_descriptor,
        ln_commitment=ln_commitment,
        ln_attempt=ln_attempt,
        lp_identity=combine_identity(Kind.LP, login_password, device),
        lp_descriptor=lp_descriptor,
        lp_commitment=lp_commitment,
        lp_attempt=lp_matrix.attempt,
        ap_identity=combine_identity(Kind.AP, None, device),
        ap_commitment=commit_identifier(entropy, ap),
    )
    store.put_account(rec)
    return rec


def begin_session(
    device: DeviceProfile,
    *,
    idle_limit: float = DEFAULT_IDLE_LIMIT,
    clock: Callable[[], float] = time.monotonic,
) -> Session:
    return Session(
        session_id=secrets.token_bytes(16),
        device=device,
        idle_limit=idle_limit,
        clock=clock,
        last_activity=clock(),
    )


def _advance(s: Session, stage: Stage) -> StageResult:
    s.stage = stage
    return StageResult(Outcome.Advance, stage)


def _reject(s: Session, reason: RejectReason) -> StageResult:
    if s.stage.terminal:
        # terminal sessions stay put; the caller still learns the call was refused
        return StageResult(Outcome.Reject, s.stage, RejectReason.ORDER_VIOLATION)
    s.stage = Stage.Rejected
    s.reject_reason = reason
    s._login_password = None
    return StageResult(Outcome.Reject, s.stage, reason)


def _gate(s: Session, expected: Stage) -> StageResult | None:
    if s.stage != expected:
        return _reject(s, RejectReason.ORDER_VIOLATION)
    if not s._touch():
        return _reject(s, RejectReason.SESSION_EXPIRED)
    return None


def submit_login_name(s: Session, key: MasterKey, store: AccountStore, text: str) -> StageResult:
    refused = _gate(s, Stage.AwaitLN)
    if refused:
        return refused
    if not field_accepts(FieldKind.LN_FIELD, text):
        return _reject(s, RejectReason.FIELD_REJECTED)
    try:
        login_name = normalize_login_name(text)
    except TridentError:
        return _reject(s, RejectReason.LN_MISMATCH)
    rec = store.get_by_ln_digest(combine_identity(Kind.LN, login_name, s.device).digest)
    # unknown accounts and wrong identifiers look the same from outside
    if rec is None:
        return _reject(s, RejectReason.LN_MISMATCH)
    try:
        m = build_matrix(key, rec.nonce, Kind.LN, login_name, s.device.imei, s.device.imsi, rec.ln_attempt)
        identifier = render_identifier(m, rec.ln_descriptor)
    except TridentError:
        return _reject(s, RejectReason.LN_MISMATCH)
    if not verify_commitment(identifier, rec.ln_commitment):
        return _reject(s, RejectReason.LN_MISMATCH)
    s.account_id = rec.account_id
    return _advance(s, Stage.AwaitLP)


def submit_login_password(s: Session, key: MasterKey, store: AccountStore, text: str) -> StageResult:
    refused = _gate(s, Stage.AwaitLP)
    if refused:
        return refused
    if not field_accepts(FieldKind.LP_FIELD, text):
        return _reject(s, RejectReason.FIELD_REJECTED)
    rec = store.get_by_account_id(s.account_id) if s.account_id else None
    if rec is None:
        return _reject(s, RejectReason.LP_MISMATCH)
    claimed = combine_identity(Kind.LP, text, s.device)
    if not hmac.compare_digest(claimed.digest, rec.lp_identity.digest):
        return _reject(s, RejectReason.LP_MISMATCH)
    try:
        m = build_matrix(key, rec.nonce, Kind.LP, text, s.device.imei, s.device.imsi, rec.lp_attempt)
        identifier = render_identifier(m, rec.lp_descriptor)
    except TridentError:
        return _reject(s, RejectReason.LP_MISMATCH)
    if not verify_commitment(identifier, rec.lp_commitment):
        return _reject(s, RejectReason.LP_MISMATCH)
    s._login_password = text
    return _advance(s, Stage.AwaitAP)


def finalize(s: Session, key: MasterKey, store: AccountStore) -> Session:
    if _gate(s, Stage.AwaitAP):
        return s
    rec = store.get_by_account_id(s.account_id) if s.account_id else None
    password = s._login_password
    s._login_password = None
    if rec is None or password is None:
        _reject(s, RejectReason.AP_MISMATCH)
        return s
    try:
        m = build_matrix(key, rec.nonce, Kind.LP, password, s.device.imei, s.device.imsi, rec.lp_attempt)
        ap = assemble_ap(m)
    except (TridentError, ValueError):
        _reject(s, RejectReason.AP_MISMATCH)
        return s
    device_ok = hmac.compare_digest(combine_identity(Kind.AP, None, s.device).digest, rec.ap_identity.digest)
    if device_ok and verify_commitment(ap, rec.ap_commitment):
        s.stage = Stage.Granted
    else:
        _reject(s, RejectReason.AP_MISMATCH)
    return s


@dataclass
class LoginTrace:
    session: Session
    steps: list[tuple[str, StageResult]]

    @property
    def granted(self) -> bool:
        return self.session.stage == Stage.Granted


_ASCII_FOLD = str.maketrans(string.ascii_uppercase, string.ascii_lowercase)


def login(
    key: MasterKey,
    store: AccountStore,
    device: DeviceProfile,
    login_name: str,
    login_password: str,
    **session_kwargs,
) -> LoginTrace:
    """Run the three gates in order, stopping at the first rejection.

    The login name is case-folded first, as a phone keyboard would do for the
    name field; anything else outside [a-z0-9] still meets the field gate.
    """
    s = begin_session(device, **session_kwargs)
    steps: list[tuple[str, StageResult]] = []
    r = submit_login_name(s, key, store, login_name.translate(_ASCII_FOLD))
    steps.append(("login_name", r))
    if r.outcome == Outcome.Advance:
        r = submit_login_password(s, key, store, login_password)
        steps.append(("login_password", r))
    if r.outcome == Outcome.Advance:
        finalize(s, key, store)
        outcome = Outcome.Advance if s.stage == Stage.Granted else Outcome.Reject
        steps.append(("finalize", StageResult(outcome, s.stage, s.reject_reason)))
    return LoginTrace(s, steps)
