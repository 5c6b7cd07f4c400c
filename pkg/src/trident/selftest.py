"""Invariant checks runnable from the command line (``trident selftest``)."""

from __future__ import annotations

import random
import string
from collections import Counter
from collections.abc import Callable, Iterator

from trident.authsvc import RejectReason, login, register_account
from trident.converter import assemble_ap, build_matrix, generate_ap
from trident.fixtures import benz428_matrix
from trident.identity import SelectionDescriptor, render_identifier, verify_commitment
from trident.keystream import Kind, MasterKey, StreamContext, new_stream
from trident.policy import FieldKind, check_ap_policy, field_accepts
from trident.scenarios import SCENARIOS, random_device, run_scenario
from trident.store import Store, parse, serialize

_ALNUM = string.ascii_lowercase + string.digits
_HEX = set(string.hexdigits.lower())


def _credential(rng: random.Random) -> str:
    return "".join(rng.choice(_ALNUM) for _ in range(rng.randint(5, 15)))


class _Population:
    def __init__(self, key: MasterKey, rng: random.Random, n: int) -> None:
        self.store = Store()
        self.accounts = []
        while len(self.accounts) < n:
            dev = random_device(rng)
            name, pw = _credential(rng), _credential(rng)
            rec = register_account(key, rng, self.store, dev, name, pw)
            self.accounts.append((rec, dev, name, pw))


def _checks(key: MasterKey, rng: random.Random, trials: int) -> Iterator[tuple[str, Callable[[], bool]]]:
    pop = _Population(key, rng, trials)

    def fixture() -> bool:
        m = benz428_matrix()
        cells = SelectionDescriptor.of_cells([(5, "CHAR"), (3, "STRING"), (4, "LABEL"), (6, "CHAR"), (6, "STRING")])
        return render_identifier(m, cells) == "4O^&17R2zF="

    def determinism() -> bool:
        ctx = StreamContext(rng.randbytes(16), Kind.LP, _credential(rng), "1" * 15, "2" * 15)
        return new_stream(key, ctx).read(64) == new_stream(key, ctx).read(64)

    def ap_policy() -> bool:
        for rec, dev, _name, pw in pop.accounts:
            _m, ap = generate_ap(key, rec.nonce, pw, dev.imei, dev.imsi)
            if not check_ap_policy(ap) or field_accepts(FieldKind.LP_FIELD, ap):
                return False
        return True

    def permutation() -> bool:
        for rec, dev, _name, pw in pop.accounts:
            m = build_matrix(key, rec.nonce, Kind.LP, pw, dev.imei, dev.imsi, rec.lp_attempt)
            if Counter(assemble_ap(m)) != Counter(m.strings()):
                return False
        return True

    def reconstruction() -> bool:
        for rec, dev, name, pw in pop.accounts:
            ln = build_matrix(key, rec.nonce, Kind.LN, name, dev.imei, dev.imsi, rec.ln_attempt)
            lp = build_matrix(key, rec.nonce, Kind.LP, pw, dev.imei, dev.imsi, rec.lp_attempt)
            ok = (
                verify_commitment(render_identifier(ln, rec.ln_descriptor), rec.ln_commitment)
                and verify_commitment(render_identifier(lp, rec.lp_descriptor), rec.lp_commitment)
                and verify_commitment(assemble_ap(lp), rec.ap_commitment)
            )
            if not ok:
                return False
        return True

    def completeness() -> bool:
        return all(login(key, pop.store, dev, name, pw).granted for _rec, dev, name, pw in pop.accounts)

    def soundness() -> bool:
        for _rec, dev, name, pw in pop.accounts:
            t = login(key, pop.store, dev, name + "0" if len(name) < 15 else name[:-1], pw)
            if t.session.reject_reason != RejectReason.LN_MISMATCH:
                return False
            t = login(key, pop.store, dev, name, pw + "0" if len(pw) < 15 else pw[:-1])
            if t.session.reject_reason != RejectReason.LP_MISMATCH:
                return False
        return True

    def store_roundtrip() -> bool:
        records = [a[0] for a in pop.accounts]
        text = serialize(records)
        secrets = []
        for rec, dev, name, pw in pop.accounts:
            ln = build_matrix(key, rec.nonce, Kind.LN, name, dev.imei, dev.imsi, rec.ln_attempt)
            lp = build_matrix(key, rec.nonce, Kind.LP, pw, dev.imei, dev.imsi, rec.lp_attempt)
            secrets += [name, pw, render_identifier(ln, rec.ln_descriptor),
                        render_identifier(lp, rec.lp_descriptor), assemble_ap(lp)]
        # pure-hex strings can turn up by chance inside hex-encoded digests
        leaked = any(sec in text for sec in secrets if not set(sec) <= _HEX)
        return parse(text) == records and not leaked

    def attacks() -> bool:
        rec, dev, name, pw = pop.accounts[0]
        return all(
            run_scenario(s, key, pop.store, dev, name, pw, rng).defended for s in SCENARIOS
        )

    yield "fixture identifier", fixture
    yield "keystream determinism", determinism
    yield "AP policy and field rejection", ap_policy
    yield "shuffle is a permutation", permutation
    yield "identifiers reconstruct", reconstruction
    yield "honest flows granted", completeness
    yield "single-fault flows rejected", soundness
    yield "store round-trip and secrecy", store_roundtrip
    yield "attack scenarios repelled", attacks


def run(key: MasterKey, rng: random.Random, trials: int = 100) -> list[tuple[str, bool]]:
    results = []
    for name, check in _checks(key, rng, trials):
        try:
            ok = bool(check())
        except Exception:  # a crashing check is a failing check
            ok = False
        results.append((name, ok))
    return results
