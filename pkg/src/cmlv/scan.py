#!/usr/bin/env python3
"""Batch verification over products of small primary primes.

Every D is verified through the result cache, so an interrupted scan resumes
where it stopped; the summary is written as CSV and JSON.
"""

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from math import prod
from pathlib import Path
from typing import Any

import pandas as pd
from dotenv import load_dotenv

from cmlv.cache import ResultCache
from cmlv.lvalues import DEFAULT_PREC
from cmlv.payloads import Request
from cmlv.valuation import DEFAULT_HEIGHT
from cmlv.zk_arith import Field, factored_from_primes, iter_products, primary_primes

load_dotenv()

LOG_FILE = os.environ.get("CMLV_LOG_FILE", "cmlv.log")
WORKERS = int(os.environ.get("CMLV_WORKERS", "1"))
# Largest residue system a scan row may sum over
MAX_RESIDUES = 20000

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScanJob:
    field: Field
    norm_max: int
    n: int = 1
    prec: int = DEFAULT_PREC
    output: Path = Path("cmlv-scan")
    workers: int = 1
    height: int = DEFAULT_HEIGHT
    cache_dir: Path | None = None


def scan_candidates(job: ScanJob) -> list[str]:
    """Factored D strings for all n-element products of primary primes below norm_max."""
    primes = primary_primes(job.field, job.norm_max)
    out = []
    for combo in iter_products(primes, job.n):
        if prod(pi.norm() - 1 for pi in combo) > MAX_RESIDUES:
            continue
        out.append(str(factored_from_primes(job.field, [(pi, 1) for pi in combo])))
    return out


def scan_row(payload: dict[str, Any]) -> dict[str, Any]:
    """Flatten a verify payload into one summary row."""
    checks = payload["checks"]
    lead = checks[0]
    cert = payload.get("certificate")
    return {
        "D": payload["D"],
        "field": payload["field"],
        "n": cert["n"] if cert else payload["D"].count("("),
        "claim": lead["claim"],
        "v": json.dumps(lead["valuation"]) if isinstance(lead["valuation"], dict) else lead["valuation"],
        "bound": lead["bound"],
        "bound_holds": all(c["bound_holds"] is True for c in checks),
        "equality_consistent": lead["equality_consistent"],
        "delta": cert["delta"] if cert else None,
        "verdict": cert["verdict"] if cert else None,
        "violated": payload["violated"],
    }


def _run_one(request: Request, cache_dir: Path | None) -> tuple[str, bool]:
    return ResultCache(cache_dir).fetch_or_compute(request)


def write_summary(rows: list[dict[str, Any]], output: Path) -> pd.DataFrame:
    """Write ``<output>.csv`` and ``<output>.json`` and return the table."""
    df = pd.DataFrame(rows)
    if not df.empty:
        df = df.sort_values(["n", "D"], kind="stable").reset_index(drop=True)
    output.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(output.with_suffix(".csv"), index=False)
    df.to_json(output.with_suffix(".json"), orient="records", indent=2)
    return df


def scan(job: ScanJob) -> pd.DataFrame:
    """Verify every candidate D and return the summary table.

    Rows come from cached payloads when present; interruption leaves completed
    rows in the cache and writes the partial summary.
    """
    candidates = scan_candidates(job)
    requests = [
        Request(command="verify", field=job.field.value, d=d, prec=job.prec, height=job.height)
        for d in candidates
    ]
    total = len(requests)
    logger.info(f"📊 Scanning {total} values of D ({job.field}, n={job.n}, norm < {job.norm_max})")
    texts: dict[str, str] = {}
    hits = 0
    try:
        if job.workers > 1:
            with ProcessPoolExecutor(max_workers=job.workers) as pool:
                futures = {pool.submit(_run_one, r, job.cache_dir): r for r in requests}
                for i, future in enumerate(as_completed(futures), 1):
                    request = futures[future]
                    text, hit = future.result()
                    texts[request.d], hits = text, hits + hit
                    print(f"[{i}/{total}] {request.d}", flush=True)
        else:
            cache = ResultCache(job.cache_dir)
            for i, request in enumerate(requests, 1):
                print(f"[{i}/{total}] {request.d}", flush=True)
                text, hit = cache.fetch_or_compute(request)
                texts[request.d], hits = text, hits + hit
    except KeyboardInterrupt:
        print(f"\nInterrupted after {len(texts)}/{total} values of D. Progress saved.")
        write_summary([scan_row(json.loads(t)) for t in texts.values()], job.output)
        sys.exit(0)
    logger.info(f"✅ Scan finished: {total - hits} computed, {hits} from cache")
    return write_summary([scan_row(json.loads(texts[r.d])) for r in requests], job.output)


def build_parser(parser: argparse.ArgumentParser | None = None) -> argparse.ArgumentParser:
    """Scan options, shared with the ``cmlv scan`` subcommand."""
    parser = parser or argparse.ArgumentParser(description="Verify valuation bounds over a family of D")
    parser.add_argument("--field", choices=[f.value for f in Field], default=Field.GAUSS.value)
    parser.add_argument("--norm-max", type=int, default=250, help="Primes of norm below this bound")
    parser.add_argument("--n", type=int, default=1, help="Number of distinct primes in D")
    parser.add_argument("--prec", type=int, default=int(os.environ.get("CMLV_PREC", DEFAULT_PREC)))
    parser.add_argument("--height", type=int, default=DEFAULT_HEIGHT)
    parser.add_argument("--workers", type=int, default=WORKERS, help="Worker processes")
    parser.add_argument("--output", type=Path, default=Path("cmlv-scan"), help="Output stem for .csv/.json")
    parser.add_argument("--cache-dir", type=Path, default=None)
    return parser


def job_from_args(args: argparse.Namespace) -> ScanJob:
    return ScanJob(
        field=Field(args.field),
        norm_max=args.norm_max,
        n=args.n,
        prec=args.prec,
        output=args.output,
        workers=args.workers,
        height=args.height,
        cache_dir=args.cache_dir,
    )


def main() -> None:
    """Run a scan from the command line."""
    args = build_parser().parse_args()
    logging.basicConfig(
        level=logging.INFO,
        format="%(asctime)s - %(levelname)s - %(message)s",
        handlers=[logging.FileHandler(LOG_FILE), logging.StreamHandler()],
    )
    df = scan(job_from_args(args))
    if df.empty:
        print("Nothing to scan. Raise --norm-max.")
        return
    bad = df[df["violated"]]
    if len(bad):
        print(f"❌ {len(bad)} row(s) violate a bound:")
        print(bad.to_string(index=False))
        sys.exit(1)
    print(f"✅ {len(df)} rows, every bound holds")


if __name__ == "__main__":
    main()
