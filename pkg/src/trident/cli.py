"""trident command line.

    trident [--store PATH] [--device PATH] [--json] [--seed N] <command> ...

Commands: device create | register | login | attack | inspect-converter | selftest.
TRIDENT_MASTER_KEY (64 hex characters) must be set for every command.

Exit codes: 0 success, 1 login rejected, 2 operational error (bad input,
missing key, unexpected attack success, refusal).
"""

from __future__ import annotations

import argparse
import json
import os
import random
import secrets
import sys
from pathlib import Path
from typing import Any

from trident import __version__, selftest
from trident.authsvc import DEFAULT_IDLE_LIMIT, Stage, login, register_account
from trident.converter import QuasiMatrix, assemble_ap, build_matrix
from trident.errors import TridentError
from trident.identity import DeviceProfile
from trident.keystream import KEY_ENV, Kind, MasterKey
from trident.policy import check_ap_policy, classify, normalize_login_name, validate_login_password
from trident.scenarios import SCENARIOS, random_device, run_scenario
from trident.store import Store

EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_ERROR = 2


class CliError(Exception):
    pass


def _emit(args: argparse.Namespace, payload: dict[str, Any], text: str) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        print(text)


def _entropy(args: argparse.Namespace) -> random.Random:
    return random.Random(args.seed) if args.seed is not None else secrets.SystemRandom()


def _require(args: argparse.Namespace, name: str) -> Path:
    value = getattr(args, name)
    if not value:
        raise CliError(f"--{name} is required for this command")
    return Path(value)


def load_device(path: Path) -> DeviceProfile:
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read device profile {path}: {exc}") from None
    if not isinstance(doc, dict) or not {"imei", "imsi"} <= set(doc):
        raise CliError(f"device profile {path} needs imei and imsi")
    return DeviceProfile(str(doc["imei"]), str(doc["imsi"]), str(doc.get("phone_number", "")))


def _device_json(d: DeviceProfile) -> dict[str, str]:
    return {"imei": d.imei, "imsi": d.imsi, "phone_number": d.phone_number}


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_device_create(args: argparse.Namespace, key: MasterKey) -> int:
    path = _require(args, "device")
    device = random_device(_entropy(args), args.phone)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(_device_json(device), indent=1) + "\n", encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot write device profile: {exc}") from None
    payload = {"device_file": str(path), **_device_json(device)}
    _emit(args, payload, f"device written to {path}\nIMEI  {device.imei}\nIMSI  {device.imsi}")
    return EXIT_OK


def cmd_register(args: argparse.Namespace, key: MasterKey) -> int:
    store = Store.open(_require(args, "store"))
    device = load_device(_require(args, "device"))
    rec = register_account(key, _entropy(args), store, device, args.login_name, args.password)
    _emit(
        args,
        {"status": "registered", "account_id": rec.account_id.hex()},
        f"registered account {rec.account_id.hex()}",
    )
    return EXIT_OK


def _trace_json(steps) -> list[dict[str, Any]]:
    return [
        {
            "step": step,
            "outcome": r.outcome.value,
            "stage": r.new_stage.value,
            "reason": r.reason.value if r.reason else None,
        }
        for step, r in steps
    ]


def cmd_login(args: argparse.Namespace, key: MasterKey) -> int:
    store = Store.open(_require(args, "store"))
    device = load_device(_require(args, "device"))
    trace = login(key, store, device, args.login_name, args.password, idle_limit=args.idle_limit)
    s = trace.session
    stages = [Stage.AwaitLN.value] + [r.new_stage.value for _step, r in trace.steps]
    lines = [" -> ".join(stages)]
    if s.reject_reason:
        lines.append(f"rejected: {s.reject_reason.value}")
    payload = {
        "stage_results": _trace_json(trace.steps),
        "final_state": s.stage.value,
        "reject_reason": s.reject_reason.value if s.reject_reason else None,
    }
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if trace.granted else EXIT_REJECTED


def cmd_attack(args: argparse.Namespace, key: MasterKey) -> int:
    store = Store.open(_require(args, "store"))
    device = load_device(_require(args, "device"))
    report = run_scenario(
        args.scenario, key, store, device, args.login_name, args.password, _entropy(args)
    )
    verdict = "REPELLED" if report.defended else "BREACH"
    if args.scenario == "honest":
        verdict = "GRANTED (control)" if report.defended else "DENIED (control failed)"
    reason = report.reject_reason.value if report.reject_reason else "-"
    text = (
        f"scenario {report.scenario}: {verdict}\n"
        f"stage reached: {report.stage_reached}, final state {report.final_state.value}, reason {reason}"
    )
    _emit(args, report.as_json(), text)
    return EXIT_OK if report.defended else EXIT_ERROR


def render_table(m: QuasiMatrix) -> str:
    first = "Username" if m.kind == Kind.LN else "Login Character"
    header = [first, "Character Digit", "Converted String", "Shuffling Label"]
    body = [[r.input_char, str(r.digit), r.converted, str(r.label) if r.label else ""] for r in m.rows]
    widths = [max(len(row[i]) for row in [header, *body]) for i in range(4)]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in [header, *body]]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def cmd_inspect_converter(args: argparse.Namespace, key: MasterKey) -> int:
    if not args.unsafe:
        print("inspect-converter reveals converter secrets; pass --unsafe to run it", file=sys.stderr)
        return EXIT_ERROR
    device = load_device(_require(args, "device"))
    kind = Kind(args.kind)
    if kind == Kind.LN:
        credential = normalize_login_name(args.credential)
    else:
        validate_login_password(args.credential)
        credential = args.credential
    try:
        nonce = bytes.fromhex(args.nonce)
    except ValueError:
        raise CliError("--nonce must be hex") from None
    m = build_matrix(key, nonce, kind, credential, device.imei, device.imsi, args.attempt)
    payload: dict[str, Any] = {
        "kind": kind.value,
        "attempt": m.attempt,
        "rows": [
            {"char": r.input_char, "digit": r.digit, "converted": r.converted,
             "label": str(r.label) if r.label else None}
            for r in m.rows
        ],
    }
    lines = ["DEBUG - reveals secrets", render_table(m)]
    if kind == Kind.LP:
        ap = assemble_ap(m)
        prof = classify(ap)
        payload["ap"] = ap
        payload["ap_profile"] = {
            "has_upper": prof.has_upper, "has_lower": prof.has_lower,
            "has_digit": prof.has_digit, "has_symbol": prof.has_symbol,
            "class_count": prof.class_count,
        }
        payload["ap_policy_ok"] = check_ap_policy(ap)
        lines += [
            "",
            f"authentication password: {ap}",
            f"classes: {prof.class_count} (upper={prof.has_upper} lower={prof.has_lower} "
            f"digit={prof.has_digit} symbol={prof.has_symbol}), policy ok: {check_ap_policy(ap)}",
        ]
    if args.json:
        payload["warning"] = "DEBUG - reveals secrets"
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def cmd_selftest(args: argparse.Namespace, key: MasterKey) -> int:
    results = selftest.run(key, _entropy(args), args.trials)
    passed = sum(ok for _name, ok in results)
    payload = {
        "passed": passed,
        "failed": len(results) - passed,
        "checks": [{"name": n, "ok": ok} for n, ok in results],
    }
    text = "\n".join(f"{'PASS' if ok else 'FAIL'}  {n}" for n, ok in results)
    _emit(args, payload, f"{text}\n{passed} passed, {len(results) - passed} failed")
    return EXIT_OK if passed == len(results) else EXIT_ERROR


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _globals(p: argparse.ArgumentParser, suppress: bool) -> None:
    # subcommands repeat the global flags; SUPPRESS keeps them from
    # overwriting values given before the subcommand name
    def default(value: Any) -> Any:
        return argparse.SUPPRESS if suppress else value

    p.add_argument("--store", default=default(None), help="credential store file")
    p.add_argument("--device", default=default(None), help="device profile file")
    p.add_argument("--json", action="store_true", default=default(False), help="machine-readable output")
    p.add_argument("--seed", type=int, default=default(None), help="seed for reproducible runs")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="trident", description="triple-identity login simulator")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _globals(p, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _globals(common, suppress=True)
    sub = p.add_subparsers(dest="cmd", required=True)

    dev = sub.add_parser("device", help="simulated device profiles")
    dev_sub = dev.add_subparsers(dest="device_cmd", required=True)
    create = dev_sub.add_parser("create", parents=[common], help="create a device profile file")
    create.add_argument("--phone", default="", help="phone number recorded in the profile")
    create.set_defaults(func=cmd_device_create)

    reg = sub.add_parser("register", parents=[common], help="register an account")
    reg.add_argument("--login-name", required=True)
    reg.add_argument("--password", required=True)
    reg.set_defaults(func=cmd_register)

    lg = sub.add_parser("login", parents=[common], help="run the three-stage login")
    lg.add_argument("--login-name", required=True)
    lg.add_argument("--password", required=True)
    lg.add_argument("--idle-limit", type=float, default=DEFAULT_IDLE_LIMIT, help="session idle limit, seconds")
    lg.set_defaults(func=cmd_login)

    at = sub.add_parser("attack", parents=[common], help="run an attack scenario against an account")
    at.add_argument("scenario", choices=SCENARIOS)
    at.add_argument("--login-name", required=True, help="the target account's login name")
    at.add_argument("--password", required=True, help="the target account's login password")
    at.set_defaults(func=cmd_attack)

    ins = sub.add_parser("inspect-converter", parents=[common], help="DEBUG: print a converter")
    ins.add_argument("--kind", choices=["LN", "LP"], required=True)
    ins.add_argument("--credential", required=True)
    ins.add_argument("--nonce", default="00" * 16, help="account nonce, hex (default: zeros)")
    ins.add_argument("--attempt", type=int, default=0)
    ins.add_argument("--unsafe", action="store_true", help="acknowledge that output reveals secrets")
    ins.set_defaults(func=cmd_inspect_converter)

    st = sub.add_parser("selftest", parents=[common], help="run the invariant checks")
    st.add_argument("--trials", type=int, default=100)
    st.set_defaults(func=cmd_selftest)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        key = MasterKey.from_env(os.environ)
    except ValueError as exc:
        print(f"trident: {exc} ({KEY_ENV} must be 64 hex characters)", file=sys.stderr)
        return EXIT_ERROR
    try:
        return args.func(args, key)
    except (TridentError, CliError) as exc:
        if args.json:
            print(json.dumps({"error": type(exc).__name__, "message": str(exc)}, sort_keys=True))
        print(f"trident: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
