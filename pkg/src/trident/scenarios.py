"""Honest and adversarial login flows against a registered account.

Each scenario changes one thing about an honest login and names the outcome
the gatekeeper should produce. ``honest`` is the control: it must be granted.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from trident.authsvc import (
    AccountStore,
    Outcome,
    RejectReason,
    Stage,
    StageResult,
    begin_session,
    finalize,
    login,
    submit_login_name,
    submit_login_password,
)
from trident.converter import assemble_ap, build_matrix
from trident.errors import TridentError
from trident.identity import DeviceProfile, combine_identity, render_identifier
from trident.keystream import Kind, MasterKey
from trident.policy import normalize_login_name
from trident.records import AccountRecord

SCENARIOS = ("honest", "stolen-password", "wrong-device", "replay-identifier", "replay-ap", "out-of-order")

EXPECTED: dict[str, tuple[Stage, RejectReason | None]] = {
    "honest": (Stage.Granted, None),
    "stolen-password": (Stage.Rejected, RejectReason.LN_MISMATCH),
    "wrong-device": (Stage.Rejected, RejectReason.LN_MISMATCH),
    "replay-identifier": (Stage.Rejected, RejectReason.FIELD_REJECTED),
    "replay-ap": (Stage.Rejected, RejectReason.FIELD_REJECTED),
    "out-of-order": (Stage.Rejected, RejectReason.ORDER_VIOLATION),
}


class UnknownAccount(TridentError):
    pass


@dataclass
class AttackReport:
    scenario: str
    steps: list[tuple[str, StageResult]]
    final_state: Stage
    reject_reason: RejectReason | None

    @property
    def expected_state(self) -> Stage:
        return EXPECTED[self.scenario][0]

    @property
    def expected_reason(self) -> RejectReason | None:
        return EXPECTED[self.scenario][1]

    @property
    def defended(self) -> bool:
        """Attacks must end Rejected; the honest control must end Granted."""
        return self.final_state == self.expected_state

    @property
    def stage_reached(self) -> str:
        return self.steps[-1][0] if self.steps else "none"

    def as_json(self) -> dict:
        return {
            "scenario": self.scenario,
            "stage_results": [
                {
                    "step": step,
                    "outcome": r.outcome.value,
                    "stage": r.new_stage.value,
                    "reason": r.reason.value if r.reason else None,
                }
                for step, r in self.steps
            ],
            "stage_reached": self.stage_reached,
            "final_state": self.final_state.value,
            "reject_reason": self.reject_reason.value if self.reject_reason else None,
            "expected_state": self.expected_state.value,
            "expected_reason": self.expected_reason.value if self.expected_reason else None,
            "defended": self.defended,
        }


def random_device(entropy: random.Random, phone_number: str = "") -> DeviceProfile:
    """A simulated handset: IMEI with a Luhn check digit, IMSI as MCC+MNC+MSIN."""
    body = [entropy.randint(0, 9) for _ in range(14)]
    total = 0
    for i, digit in enumerate(reversed(body)):
        if i % 2 == 0:
            digit *= 2
            digit = digit - 9 if digit > 9 else digit
        total += digit
    imei = "".join(map(str, body)) + str((10 - total % 10) % 10)
    imsi = "".join(str(entropy.randint(0, 9)) for _ in range(15))
    return DeviceProfile(imei, imsi, phone_number)


def _find(store: AccountStore, device: DeviceProfile, login_name: str) -> AccountRecord:
    rec = store.get_by_ln_digest(combine_identity(Kind.LN, normalize_login_name(login_name), device).digest)
    if rec is None:
        raise UnknownAccount("scenario does not reference a registered account")
    return rec


def _flip_digit(text: str, pos: int) -> str:
    return text[:pos] + str((int(text[pos]) + 1) % 10) + text[pos + 1:]


def run_scenario(
    name: str,
    key: MasterKey,
    store: AccountStore,
    device: DeviceProfile,
    login_name: str,
    login_password: str,
    entropy: random.Random,
) -> AttackReport:
    if name not in EXPECTED:
        raise ValueError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}")
    rec = _find(store, device, login_name)
    if not login(key, store, device, login_name, login_password).granted:
        raise UnknownAccount("the given credentials do not open the account")
    steps: list[tuple[str, StageResult]] = []

    if name in ("honest", "stolen-password", "wrong-device"):
        if name == "stolen-password":
            device = random_device(entropy)
        elif name == "wrong-device":
            # same SIM moved to another handset
            device = DeviceProfile(_flip_digit(device.imei, 7), device.imsi, device.phone_number)
        trace = login(key, store, device, login_name, login_password)
        return AttackReport(name, trace.steps, trace.session.stage, trace.session.reject_reason)

    s = begin_session(device)
    if name == "replay-identifier":
        ln = normalize_login_name(login_name)
        m = build_matrix(key, rec.nonce, Kind.LN, ln, device.imei, device.imsi, rec.ln_attempt)
        steps.append(("login_name", submit_login_name(s, key, store, render_identifier(m, rec.ln_descriptor))))
    elif name == "replay-ap":
        m = build_matrix(key, rec.nonce, Kind.LP, login_password, device.imei, device.imsi, rec.lp_attempt)
        r = submit_login_name(s, key, store, normalize_login_name(login_name))
        steps.append(("login_name", r))
        if r.outcome == Outcome.Advance:
            steps.append(("login_password", submit_login_password(s, key, store, assemble_ap(m))))
    else:  # out-of-order
        steps.append(("login_password", submit_login_password(s, key, store, login_password)))
        if s.stage == Stage.AwaitAP:
            finalize(s, key, store)
    return AttackReport(name, steps, s.stage, s.reject_reason)
