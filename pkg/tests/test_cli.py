from __future__ import annotations

import json
import subprocess
import sys

import pytest

from trident.cli import main
from trident.scenarios import SCENARIOS

KEY_HEX = bytes(range(32)).hex()


@pytest.fixture(autouse=True)
def master_key(monkeypatch):
    monkeypatch.setenv("TRIDENT_MASTER_KEY", KEY_HEX)


@pytest.fixture
def paths(tmp_path):
    return tmp_path / "store.json", tmp_path / "phone.json"


def run_json(capsys, argv):
    code = main(["--json", *argv])
    out = capsys.readouterr().out.strip().splitlines()
    return code, json.loads(out[-1]) if out else None


@pytest.fixture
def registered(paths, capsys):
    store, dev = paths
    assert main(["--device", str(dev), "--seed", "7", "device", "create"]) == 0
    assert main(["--store", str(store), "--device", str(dev), "--seed", "8",
                 "register", "--login-name", "Benz428", "--password", "dp7a3k"]) == 0
    capsys.readouterr()
    return store, dev


def test_device_create(paths, capsys):
    _, dev = paths
    code, doc = run_json(capsys, ["--device", str(dev), "--seed", "1", "device", "create", "--phone", "5550100"])
    assert code == 0
    assert len(doc["imei"]) == 15 and doc["imei"].isdigit()
    assert len(doc["imsi"]) == 15 and doc["imsi"].isdigit()
    assert json.loads(dev.read_text())["phone_number"] == "5550100"
    _, again = run_json(capsys, ["--device", str(dev), "--seed", "1", "device", "create", "--phone", "5550100"])
    assert again == doc
    _, fresh = run_json(capsys, ["--device", str(dev), "device", "create"])
    _, fresh2 = run_json(capsys, ["--device", str(dev), "device", "create"])
    assert fresh["imei"] != fresh2["imei"]


def test_flags_after_subcommand(paths, capsys):
    _, dev = paths
    code, doc = run_json(capsys, ["device", "create", "--device", str(dev), "--seed", "1"])
    assert code == 0 and dev.exists()


def test_register_and_duplicate(registered, capsys):
    store, dev = registered
    doc = json.loads(store.read_text())
    assert len(doc["records"]) == 1
    code, err = run_json(capsys, ["--store", str(store), "--device", str(dev),
                                  "register", "--login-name", "BENZ428", "--password", "other99"])
    assert code == 2 and err["error"] == "DuplicateIdentity"


def test_register_bad_input(paths, registered, capsys):
    store, dev = registered
    code, err = run_json(capsys, ["--store", str(store), "--device", str(dev),
                                  "register", "--login-name", "AB!", "--password", "dp7a3k"])
    assert code == 2 and err["error"] == "InvalidLoginName"
    code, err = run_json(capsys, ["--store", str(store), "--device", str(dev),
                                  "register", "--login-name", "someone", "--password", "UPPER1"])
    assert code == 2 and err["error"] == "InvalidLoginPassword"


def test_login_granted(registered, capsys):
    store, dev = registered
    code, doc = run_json(capsys, ["--store", str(store), "--device", str(dev),
                                  "login", "--login-name", "Benz428", "--password", "dp7a3k"])
    assert code == 0
    assert doc["final_state"] == "Granted" and doc["reject_reason"] is None
    assert [r["stage"] for r in doc["stage_results"]] == ["AwaitLP", "AwaitAP", "Granted"]


def test_login_rejected(registered, capsys):
    store, dev = registered
    code, doc = run_json(capsys, ["--store", str(store), "--device", str(dev),
                                  "login", "--login-name", "Benz428", "--password", "dp7a3x"])
    assert code == 1
    assert doc["final_state"] == "Rejected" and doc["reject_reason"] == "LP_MISMATCH"


def test_login_text_output(registered, capsys):
    store, dev = registered
    assert main(["--store", str(store), "--device", str(dev),
                 "login", "--login-name", "benz428", "--password", "dp7a3k"]) == 0
    assert "Granted" in capsys.readouterr().out


@pytest.mark.parametrize("scenario", SCENARIOS)
def test_attack_scenarios_repelled(registered, capsys, scenario):
    store, dev = registered
    code, doc = run_json(capsys, ["--store", str(store), "--device", str(dev), "--seed", "3",
                                  "attack", scenario, "--login-name", "Benz428", "--password", "dp7a3k"])
    assert code == 0, doc
    assert doc["scenario"] == scenario


def test_attack_with_wrong_credentials_is_an_error(registered, capsys):
    store, dev = registered
    code = main(["--store", str(store), "--device", str(dev),
                 "attack", "replay-ap", "--login-name", "Benz428", "--password", "wrong11"])
    assert code == 2


def test_inspect_converter(registered, capsys):
    _, dev = registered
    argv = ["--device", str(dev), "inspect-converter", "--kind", "LP", "--credential", "dp7a3k", "--unsafe"]
    assert main(argv) == 0
    first = capsys.readouterr().out
    assert main(argv) == 0
    assert capsys.readouterr().out == first
    assert first.startswith("DEBUG - reveals secrets")
    for header in ("Login Character", "Character Digit", "Converted String", "Shuffling Label"):
        assert header in first
    code, doc = run_json(capsys, argv)
    assert len(doc["ap"]) == 20 and len(doc["rows"]) == 6
    assert sum(r["digit"] for r in doc["rows"]) == 20
    code, doc = run_json(capsys, ["--device", str(dev), "inspect-converter", "--kind", "LN",
                                  "--credential", "Benz428", "--unsafe"])
    assert "ap" not in doc and [r["char"] for r in doc["rows"]] == list("benz428")


def test_inspect_converter_requires_unsafe(registered, capsys):
    _, dev = registered
    assert main(["--device", str(dev), "inspect-converter", "--kind", "LP", "--credential", "dp7a3k"]) == 2
    captured = capsys.readouterr()
    assert captured.out == "" and "--unsafe" in captured.err


@pytest.mark.parametrize("value", [None, "", "abc", "zz" * 32, "00" * 31])
def test_missing_or_malformed_key(monkeypatch, paths, capsys, value):
    if value is None:
        monkeypatch.delenv("TRIDENT_MASTER_KEY")
    else:
        monkeypatch.setenv("TRIDENT_MASTER_KEY", value)
    _, dev = paths
    assert main(["--device", str(dev), "device", "create"]) == 2
    assert "TRIDENT_MASTER_KEY" in capsys.readouterr().err
    assert not dev.exists()


def test_missing_store_flag(registered, capsys):
    _, dev = registered
    assert main(["--device", str(dev), "login", "--login-name", "benz428", "--password", "dp7a3k"]) == 2


def test_bad_device_file(paths, capsys):
    store, dev = paths
    dev.write_text(json.dumps({"imei": "123", "imsi": "310150123456789"}))
    code, err = run_json(capsys, ["--store", str(store), "--device", str(dev),
                                  "register", "--login-name", "benz428", "--password", "dp7a3k"])
    assert code == 2 and err["error"] == "InvalidDevice"


def test_selftest(capsys):
    code, doc = run_json(capsys, ["--seed", "5", "selftest", "--trials", "20"])
    assert code == 0 and doc["failed"] == 0 and doc["passed"] == len(doc["checks"])


def test_module_entry_point(paths):
    _, dev = paths
    proc = subprocess.run(
        [sys.executable, "-m", "trident", "--json", "--device", str(dev), "--seed", "2", "device", "create"],
        capture_output=True, text=True, env={"TRIDENT_MASTER_KEY": KEY_HEX, "PATH": "/usr/bin:/bin"},
    )
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["imei"].isdigit()
