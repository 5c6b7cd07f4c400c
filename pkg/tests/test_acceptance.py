"""Acceptance gate: one test per criterion, reported in the terminal summary."""

from __future__ import annotations

import json
import random
import string
import time
from collections import Counter
from dataclasses import dataclass

import pytest

from trident.authsvc import RejectReason, Stage, login, register_account
from trident.cli import main
from trident.converter import assemble_ap, build_matrix
from trident.fixtures import benz428_matrix
from trident.identity import DeviceProfile, SelectionDescriptor, render_identifier, verify_commitment
from trident.keystream import Kind, MasterKey
from trident.policy import FieldKind, SYMBOLS, check_ap_policy, classify, field_accepts, normalize_login_name
from trident.records import AccountRecord
from trident.scenarios import SCENARIOS
from trident.store import Store, parse, serialize

from oracles import shuffle_slots

KEY = MasterKey(bytes.fromhex("9f" * 16 + "3c" * 16))
N_ACCOUNTS = 1000
N_STORES = 20
ALNUM = string.ascii_lowercase + string.digits
NON_HEX = "ghijklmnopqrstuvwxyz"
ENUM_TOKENS = {"LN", "LP", "AP", "ROW", "COLUMN", "CELLS", "CHAR", "DIGIT", "STRING", "LABEL"}


def credential(r: random.Random) -> str:
    # at least one letter past 'f' so a credential can never read as hex
    chars = [r.choice(ALNUM) for _ in range(r.randint(5, 15))]
    chars[r.randrange(len(chars))] = r.choice(NON_HEX)
    return "".join(chars)


def device(r: random.Random) -> DeviceProfile:
    return DeviceProfile("".join(r.choices(string.digits, k=15)), "".join(r.choices(string.digits, k=15)))


@dataclass
class Account:
    device: DeviceProfile
    raw_name: str
    login_name: str
    login_password: str
    record: AccountRecord
    store_index: int


@dataclass
class Population:
    accounts: list[Account]
    stores: list[Store]
    elapsed: float


@pytest.fixture(scope="module")
def population(tmp_path_factory) -> Population:
    root = tmp_path_factory.mktemp("stores")
    r = random.Random(7001)
    stores = [Store.open(root / f"store{i:02d}.json") for i in range(N_STORES)]
    accounts = []
    start = time.perf_counter()
    for i in range(N_ACCOUNTS):
        dev = device(r)
        raw = credential(r)
        raw = "".join(c.upper() if r.random() < 0.3 else c for c in raw)
        pw = credential(r)
        idx = i % N_STORES
        rec = register_account(KEY, r, stores[idx], dev, raw, pw)
        accounts.append(Account(dev, raw, normalize_login_name(raw), pw, rec, idx))
    return Population(accounts, stores, time.perf_counter() - start)


def rebuild(a: Account) -> tuple[str, str, str]:
    rec, dev = a.record, a.device
    ln = build_matrix(KEY, rec.nonce, Kind.LN, a.login_name, dev.imei, dev.imsi, rec.ln_attempt)
    lp = build_matrix(KEY, rec.nonce, Kind.LP, a.login_password, dev.imei, dev.imsi, rec.lp_attempt)
    return render_identifier(ln, rec.ln_descriptor), render_identifier(lp, rec.lp_descriptor), assemble_ap(lp)


def _mutate_char(text: str, r: random.Random) -> str:
    i = r.randrange(len(text))
    return text[:i] + r.choice([c for c in ALNUM if c != text[i]]) + text[i + 1:]


def _mutate_digit(text: str, r: random.Random) -> str:
    i = r.randrange(len(text))
    return text[:i] + r.choice([c for c in string.digits if c != text[i]]) + text[i + 1:]


@pytest.mark.criterion(1, "fixture fidelity")
def test_fixture_fidelity():
    m = benz428_matrix()
    cells = SelectionDescriptor.of_cells([(5, "CHAR"), (3, "STRING"), (4, "LABEL"), (6, "CHAR"), (6, "STRING")])
    column = SelectionDescriptor.col("STRING")
    start = time.perf_counter()
    a = render_identifier(m, cells)
    b = render_identifier(m, column)
    elapsed = time.perf_counter() - start
    assert a == "4O^&17R2zF="
    assert b == "y]Q#ws%8O^&\\$d)LhzF=m"
    assert elapsed < 1e-3, elapsed


@pytest.mark.criterion(2, "AP policy compliance")
def test_ap_policy_compliance(population):
    assert population.elapsed < 10.0, population.elapsed
    failures = []
    for a in population.accounts:
        ap = rebuild(a)[2]
        p = classify(ap)
        ok = (
            len(ap) == 20
            and p.class_count == 4
            and any(c in string.ascii_uppercase or c in SYMBOLS for c in ap[:4])
            and check_ap_policy(ap)
        )
        if not ok:
            failures.append(ap)
    assert len(population.accounts) == N_ACCOUNTS
    assert failures == []


@pytest.mark.criterion(3, "field gatekeeping")
def test_field_gatekeeping(population):
    leaks = []
    for a in population.accounts:
        for text in rebuild(a):
            for field in FieldKind:
                if field_accepts(field, text):
                    leaks.append((field, text))
    assert leaks == []


@pytest.mark.criterion(4, "shuffle correctness")
def test_shuffle_correctness():
    r = random.Random(7004)
    mismatches = 0
    for _ in range(1000):
        dev = device(r)
        m = build_matrix(KEY, r.randbytes(16), Kind.LP, credential(r), dev.imei, dev.imsi, r.randrange(4))
        ap = assemble_ap(m)
        rows = [(m.rows[0].converted, None, None)]
        rows += [(row.converted, row.label.offset, row.label.direction) for row in m.rows[1:]]
        if ap != shuffle_slots(rows) or Counter(ap) != Counter(m.strings()):
            mismatches += 1
    assert mismatches == 0


@pytest.mark.criterion(5, "completeness and soundness of the login flow")
def test_completeness_and_soundness(population):
    r = random.Random(7005)
    start = time.perf_counter()
    bad = []
    for a in population.accounts:
        store = population.stores[a.store_index]
        dev = a.device
        honest = login(KEY, store, dev, a.raw_name, a.login_password)
        if not honest.granted:
            bad.append(("honest", a.login_name, honest.session.reject_reason))
        cases = [
            ("login name", dev, _mutate_char(a.login_name, r), a.login_password, "login_name", RejectReason.LN_MISMATCH),
            ("login password", dev, a.login_name, _mutate_char(a.login_password, r), "login_password", RejectReason.LP_MISMATCH),
            ("imei", DeviceProfile(_mutate_digit(dev.imei, r), dev.imsi), a.login_name, a.login_password, "login_name", RejectReason.LN_MISMATCH),
            ("imsi", DeviceProfile(dev.imei, _mutate_digit(dev.imsi, r)), a.login_name, a.login_password, "login_name", RejectReason.LN_MISMATCH),
        ]
        for what, d, name, pw, stage, reason in cases:
            t = login(KEY, store, d, name, pw)
            s = t.session
            if s.stage != Stage.Rejected or t.steps[-1][0] != stage or s.reject_reason != reason:
                bad.append((what, a.login_name, s.reject_reason))
    elapsed = time.perf_counter() - start
    assert bad == []
    assert elapsed < 60.0, elapsed


@pytest.mark.criterion(6, "determinism")
def test_determinism(population, tmp_path_factory):
    # read the records back from disk so nothing is carried over in memory
    verified = 0
    for a in population.accounts:
        store = Store.open(population.stores[a.store_index].path)
        rec = store.get_by_account_id(a.record.account_id)
        assert rec == a.record
        ln_id, lp_id, ap = rebuild(a)
        verified += (
            verify_commitment(ln_id, rec.ln_commitment)
            and verify_commitment(lp_id, rec.lp_commitment)
            and verify_commitment(ap, rec.ap_commitment)
        )
    assert verified == N_ACCOUNTS


def _json_strings(node):
    if isinstance(node, dict):
        for k, v in node.items():
            yield k
            yield from _json_strings(v)
    elif isinstance(node, list):
        for v in node:
            yield from _json_strings(v)
    elif isinstance(node, str):
        yield node


@pytest.mark.criterion(7, "store round-trip and secrecy")
def test_store_round_trip_and_secrecy(population):
    # round-trip: random subsets of the population plus the files on disk
    r = random.Random(7007)
    records = [a.record for a in population.accounts]
    for _ in range(1000):
        chosen = r.sample(records, r.randint(0, 8))
        assert parse(serialize(chosen)) == chosen
    for store in population.stores:
        text = store.path.read_text()
        assert serialize(parse(text)) == text

    files = {i: s.path.read_text() for i, s in enumerate(population.stores)}
    found = []
    for a in population.accounts:
        secrets = [a.raw_name, a.login_name, a.login_password, *rebuild(a)]
        for text in files.values():
            found += [s for s in secrets if s in text]
    assert found == []

    fields = set(AccountRecord.__dataclass_fields__) | {
        "version", "records", "kind", "digest", "salt", "commitment", "mode", "row_index", "column", "cells", "row", "col",
    }
    for text in files.values():
        for s in _json_strings(json.loads(text)):
            assert s in fields or s in ENUM_TOKENS or all(c in "0123456789abcdef" for c in s), s


@pytest.mark.criterion(8, "attack harness")
def test_attack_harness(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("TRIDENT_MASTER_KEY", KEY.key.hex())
    store, dev = str(tmp_path / "store.json"), str(tmp_path / "phone.json")
    assert main(["--device", dev, "--seed", "1", "device", "create", "--phone", "5550100"]) == 0
    assert main(["--store", store, "--device", dev, "--seed", "2",
                 "register", "--login-name", "Benz428", "--password", "dp7a3k"]) == 0
    capsys.readouterr()
    codes = {}
    for scenario in SCENARIOS:
        codes[scenario] = main(["--json", "--store", store, "--device", dev, "--seed", "3",
                                "attack", scenario, "--login-name", "Benz428", "--password", "dp7a3k"])
        report = json.loads(capsys.readouterr().out)
        assert report["defended"] is True
    assert codes == {s: 0 for s in SCENARIOS}
