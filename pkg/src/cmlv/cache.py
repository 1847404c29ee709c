#!/usr/bin/env python3
"""Persistent result cache: one JSON file per request, keyed by its SHA-256."""

import argparse
import json
import logging
import os
import random
import sys
import tempfile
from dataclasses import dataclass
from datetime import UTC, datetime
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Any

from dotenv import load_dotenv

from cmlv.payloads import Request, compute, to_text

load_dotenv()

CACHE_DIR = Path(os.environ.get("CMLV_CACHE", "cmlv-cache"))
LOG_FILE = os.environ.get("CMLV_LOG_FILE", "cmlv.log")
VERIFY_FRACTION = 0.05

logger = logging.getLogger(__name__)


def _tool_version() -> str:
    try:
        return version("cmlv")
    except PackageNotFoundError:
        return "unknown"


@dataclass(frozen=True)
class CacheRecord:
    key: str
    payload: str
    request: dict[str, Any]
    created_at: str
    tool_version: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "key": self.key,
            "payload": self.payload,
            "request": self.request,
            "created_at": self.created_at,
            "tool_version": self.tool_version,
        }


@dataclass(frozen=True)
class VerifyReport:
    checked: int
    passed: int
    failed: tuple[str, ...]
    corrupt: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.failed and not self.corrupt


class ResultCache:
    """Directory of ``<key>.json`` records written atomically."""

    def __init__(self, directory: Path | None = None) -> None:
        self.directory = Path(directory) if directory is not None else CACHE_DIR

    def path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def keys(self) -> list[str]:
        if not self.directory.exists():
            return []
        return sorted(p.stem for p in self.directory.glob("*.json"))

    def __contains__(self, key: str) -> bool:
        return self.path(key).exists()

    def get(self, key: str) -> CacheRecord | None:
        path = self.path(key)
        if not path.exists():
            return None
        data = json.loads(path.read_text(encoding="utf-8"))
        return CacheRecord(**data)

    def put(self, request: Request, payload: str) -> CacheRecord:
        record = CacheRecord(
            key=request.key(),
            payload=payload,
            request=request.to_dict(),
            created_at=datetime.now(UTC).isoformat(),
            tool_version=_tool_version(),
        )
        self.directory.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(record.to_dict(), fh, sort_keys=True, indent=2)
            os.replace(tmp, self.path(record.key))
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise
        logger.debug(f"Cached {request.command} D={request.d} as {record.key[:12]}")
        return record

    def fetch_or_compute(self, request: Request) -> tuple[str, bool]:
        """Payload text for the request and whether it came from the cache."""
        record = self.get(request.key())
        if record is not None:
            return record.payload, True
        text = to_text(compute(request))
        self.put(request, text)
        return text, False

    def stat(self) -> dict[str, Any]:
        keys = self.keys()
        size = sum(self.path(k).stat().st_size for k in keys)
        commands: dict[str, int] = {}
        for key in keys:
            try:
                record = self.get(key)
            except (json.JSONDecodeError, TypeError):
                continue
            if record is not None:
                name = record.request.get("command", "?")
                commands[name] = commands.get(name, 0) + 1
        return {"directory": str(self.directory), "records": len(keys), "bytes": size, "commands": commands}

    def clear(self) -> int:
        keys = self.keys()
        for key in keys:
            self.path(key).unlink(missing_ok=True)
        return len(keys)

    def verify(self, fraction: float = VERIFY_FRACTION, seed: int = 0) -> VerifyReport:
        """Recompute a deterministic sample and compare payloads byte for byte."""
        keys = self.keys()
        if not keys:
            return VerifyReport(0, 0, (), ())
        count = max(1, round(len(keys) * fraction))
        sample = sorted(random.Random(seed).sample(keys, min(count, len(keys))))
        failed: list[str] = []
        corrupt: list[str] = []
        for i, key in enumerate(sample, 1):
            print(f"[{i}/{len(sample)}] {key[:12]}", flush=True)
            try:
                record = self.get(key)
                assert record is not None
                request = Request.from_dict(record.request)
            except (json.JSONDecodeError, TypeError, AssertionError):
                corrupt.append(key)
                continue
            if request.key() != key:
                corrupt.append(key)
                continue
            if to_text(compute(request)) != record.payload:
                failed.append(key)
        passed = len(sample) - len(failed) - len(corrupt)
        return VerifyReport(len(sample), passed, tuple(failed), tuple(corrupt))


def cache_ops(action: str, cache: ResultCache) -> dict[str, Any]:
    """Run ``stat``, ``clear`` or ``verify`` and return a JSON-ready report."""
    if action == "stat":
        return cache.stat()
    if action == "clear":
        return {"directory": str(cache.directory), "removed": cache.clear()}
    if action == "verify":
        report = cache.verify()
        return {
            "directory": str(cache.directory),
            "checked": report.checked,
            "passed": report.passed,
            "failed": list(report.failed),
            "corrupt": list(report.corrupt),
            "ok": report.ok,
        }
    raise ValueError(f"Unknown cache action {action!r}")


def main() -> None:
    """Inspect or maintain the result cache."""
    parser = argparse.ArgumentParser(description="Inspect or maintain the cmlv result cache")
    parser.add_argument("action", choices=["stat", "clear", "verify"])
    parser.add_argument("--cache-dir", type=Path, default=None, help=f"Cache directory (default {CACHE_DIR})")
    parser.add_argument("--json", action="store_true", help="Print the report as JSON")
    args = parser.parse_args()

    logging.basicConfig(
        level=logging.INFO,
        format="%(asctime)s - %(levelname)s - %(message)s",
        handlers=[logging.FileHandler(LOG_FILE), logging.StreamHandler()],
    )

    cache = ResultCache(args.cache_dir)
    try:
        report = cache_ops(args.action, cache)
    except Exception as e:
        logger.error(f"❌ Cache {args.action} failed: {e}")
        sys.exit(1)

    if args.json:
        print(json.dumps(report, sort_keys=True, indent=2))
    elif args.action == "stat":
        print("📊 cmlv cache status")
        print("=" * 40)
        print(f"Directory: {report['directory']}")
        print(f"Records: {report['records']:,}")
        print(f"Size: {report['bytes']:,} bytes")
        for name, count in sorted(report["commands"].items()):
            print(f"  {name}: {count:,}")
    elif args.action == "clear":
        print(f"✅ Removed {report['removed']} record(s)")
    elif report["ok"]:
        print(f"✅ {report['passed']}/{report['checked']} sampled records reproduce")
    else:
        print(f"❌ Failed: {report['failed']} Corrupt: {report['corrupt']}")
        sys.exit(1)


if __name__ == "__main__":
    main()
