#!/usr/bin/env python3
"""Command-line surface for CM L-values and their 2-/3-adic valuations.

Examples
--------
    cmlv constants --field gauss --prec 40 --json
    cmlv lvalue --field gauss --D "1+4i" --T full
    cmlv verify --field eisen --D "1+6w" --strict
    cmlv scan --field gauss --n 2 --norm-max 60 --workers 4
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any

from dotenv import load_dotenv

from cmlv import scan as scan_mod
from cmlv.cache import ResultCache, cache_ops
from cmlv.lvalues import DEFAULT_PREC, Method
from cmlv.payloads import Request
from cmlv.valuation import DEFAULT_HEIGHT, PrecisionInsufficient, RecognitionFailed
from cmlv.zk_arith import Field

load_dotenv()

PREC = int(os.environ.get("CMLV_PREC", DEFAULT_PREC))
LOG_FILE = os.environ.get("CMLV_LOG_FILE", "cmlv.log")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID = 2
EXIT_UNDECIDED = 3

logger = logging.getLogger(__name__)


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="Print the JSON payload")
    common.add_argument("--strict", action="store_true", help="Exit 3 on undecided verdicts")
    common.add_argument("--cache-dir", type=Path, default=None, help="Result cache directory")
    common.add_argument("--verbose", action="store_true", help="Debug logging")
    return common


def _numeric() -> argparse.ArgumentParser:
    numeric = argparse.ArgumentParser(add_help=False)
    numeric.add_argument("--field", choices=[f.value for f in Field], default=Field.GAUSS.value)
    numeric.add_argument("--prec", type=int, default=PREC, help="Working precision in decimal digits")
    numeric.add_argument("--height", type=int, default=DEFAULT_HEIGHT, help="Recognition height bound")
    return numeric


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cmlv", description="CM elliptic curve L-values over Q(i) and Q(sqrt(-3))")
    sub = parser.add_subparsers(dest="command", required=True)
    common, numeric = _common(), _numeric()

    sub.add_parser("constants", parents=[common, numeric], help="Period constant and lattice data")

    lv = sub.add_parser("lvalue", parents=[common, numeric], help="L-value of a subset divisor D_T")
    lv.add_argument("--D", dest="d", required=True, help='Literal "a+bi" or factored "(p1)*(p2)"')
    lv.add_argument("--T", dest="subset", default="full", help="full, empty or a bitmask over the primes of D")
    lv.add_argument("--method", choices=[m.value for m in Method], default=Method.FINITE_SUM.value)

    for name, text in (
        ("sstar", "Subset sum S*(D) and its valuation"),
        ("delta", "epsilon/delta certificate (Gaussian, square-free D)"),
        ("verify", "Check every valuation bound for D"),
    ):
        sp = sub.add_parser(name, parents=[common, numeric], help=text)
        sp.add_argument("--D", dest="d", required=True)

    bsd = sub.add_parser("bsd-report", parents=[common, numeric], help="Rank-zero prediction for y^2 = x^3 - Dx")
    bsd.add_argument("--D", dest="d", required=True, help="Rational integer D")

    sc = sub.add_parser("scan", add_help=True, help="Verify bounds over a family of D")
    scan_mod.build_parser(sc)
    sc.add_argument("--json", action="store_true")
    sc.add_argument("--strict", action="store_true")
    sc.add_argument("--verbose", action="store_true")

    ch = sub.add_parser("cache", parents=[common], help="Cache stat/clear/verify")
    ch.add_argument("action", choices=["stat", "clear", "verify"])
    return parser


def _request(args: argparse.Namespace) -> Request:
    field = Field.EISEN.value if getattr(args, "method", None) == Method.SEXTIC_TWIST.value else args.field
    req = Request(
        command=args.command,
        field=field,
        d=getattr(args, "d", "") or "",
        subset=getattr(args, "subset", "full"),
        method=getattr(args, "method", Method.FINITE_SUM.value),
        prec=args.prec,
        height=args.height,
    )
    return req.canonical()


def _undecided(payload: dict[str, Any]) -> bool:
    if payload.get("undecided"):
        return True
    return any(payload.get(k, 0) is None for k in ("v2", "v3", "v"))


def _summary(payload: dict[str, Any]) -> None:
    command = payload["command"]
    if command == "constants":
        print(f"📊 {payload['field']} period constants")
        print("=" * 40)
        print(f"omega: {payload['omega']}")
        print(f"eta1: {payload['eta1']['re']} + {payload['eta1']['im']}i")
        print(f"AGM vs quadrature gap: {payload['agm_quadrature_gap']}")
    elif command == "lvalue":
        print(f"📊 L-value for D={payload['D']}" + (f", T={payload['T']}" if "T" in payload else ""))
        print("=" * 40)
        print(f"value: {payload['value']['re']} + {payload['value']['im']}i")
        for key in ("kind", "exact", "v2", "v3", "error"):
            if key in payload:
                print(f"{key}: {payload[key]}")
    elif command == "sstar":
        print(f"📊 S*(D) for D={payload['D']}")
        print("=" * 40)
        print(f"value: {payload['value']['re']} + {payload['value']['im']}i")
        print(f"v: {payload['v']}")
        print(f"identity residual: {payload['identity_residual']}")
    elif command in ("delta", "bsd-report"):
        cert = payload if command == "delta" else payload["certificate"]
        print(f"📊 delta certificate for D={cert['D']} (n={cert['n']})")
        print("=" * 40)
        for row in cert["subsets"]:
            print(f"  T={row['T']:<24} v(S*)={row['v_sstar']!s:<12} eps={row['epsilon']} delta={row['delta']}")
        print(f"delta_n = {cert['delta']} ({cert['verdict']})")
        if command == "bsd-report":
            print(payload["message"])
            for x, y in payload["points"]:
                print(f"  point ({x}, {y})")
    elif command == "verify":
        print(f"📊 Valuation bounds for D={payload['D']}")
        print("=" * 40)
        for check in payload["checks"]:
            holds = check["bound_holds"]
            marker = "✅" if holds else "❌" if holds is False else "⚠️"
            print(f"{marker} {check['claim']}: v={check['valuation']} bound {check['bound']}")
        cert = payload.get("certificate")
        if cert:
            print(f"delta_n = {cert['delta']} ({cert['verdict']})")


def _emit_error(exc: Exception) -> None:
    print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)


def _run_scan(args: argparse.Namespace) -> int:
    df = scan_mod.scan(scan_mod.job_from_args(args))
    if args.json:
        print(df.to_json(orient="records", indent=2))
    else:
        print(f"📊 Scan summary ({len(df)} rows)")
        print("=" * 40)
        if not df.empty:
            print(df.to_string(index=False))
    if not df.empty and df["violated"].any():
        return EXIT_FAILED
    if args.strict and not df.empty and (df["verdict"] == "undecided").any():
        return EXIT_UNDECIDED
    return EXIT_OK


def _run_cache(args: argparse.Namespace) -> int:
    report = cache_ops(args.action, ResultCache(args.cache_dir))
    if args.json:
        print(json.dumps(report, sort_keys=True, indent=2))
    elif args.action == "stat":
        print(f"📊 {report['records']} record(s), {report['bytes']:,} bytes in {report['directory']}")
    elif args.action == "clear":
        print(f"✅ Removed {report['removed']} record(s)")
    else:
        marker = "✅" if report["ok"] else "❌"
        print(f"{marker} {report['passed']}/{report['checked']} sampled records reproduce")
    return EXIT_OK if report.get("ok", True) else EXIT_FAILED


def run_command(argv: list[str]) -> int:
    """Parse ``argv``, run one subcommand and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INVALID if e.code else EXIT_OK

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s - %(levelname)s - %(message)s",
        handlers=[logging.FileHandler(LOG_FILE), logging.StreamHandler()],
    )

    try:
        if args.command == "scan":
            return _run_scan(args)
        if args.command == "cache":
            return _run_cache(args)
        text, hit = ResultCache(args.cache_dir).fetch_or_compute(_request(args))
    except (RecognitionFailed, PrecisionInsufficient) as e:
        logger.warning(f"⚠️ {args.command} undecided: {e}")
        _emit_error(e)
        return EXIT_UNDECIDED
    except ValueError as e:
        _emit_error(e)
        return EXIT_INVALID
    except Exception as e:
        logger.error(f"❌ {args.command} failed: {type(e).__name__}: {e}")
        return EXIT_FAILED

    logger.debug(f"{args.command}: {'cache hit' if hit else 'computed'}")
    payload = json.loads(text)
    if args.json:
        print(text)
    else:
        _summary(payload)
    if payload.get("violated") or payload.get("contradicted"):
        return EXIT_FAILED
    if args.strict and _undecided(payload):
        return EXIT_UNDECIDED
    return EXIT_OK


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
