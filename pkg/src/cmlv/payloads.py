"""Requests and their JSON payloads, shared by the CLI, the cache verifier and scans.

A :class:`Request` names a command and its canonical inputs; :func:`compute` turns it
into a JSON-ready dict (schema v1). Exact data is always a string; approximate
values carry a ``prec`` sibling.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, replace
from typing import Any

import mpmath as mp

from cmlv import lvalues, valuation
from cmlv.wfunc import (
    GUARD_DIGITS,
    BigComplex,
    cm_context,
    period_by_agm,
    period_by_quadrature,
    period_constant,
)
from cmlv.zk_arith import Field, parse_d, parse_quadint

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
COMMANDS = ("constants", "lvalue", "sstar", "delta", "verify", "bsd-report")


@dataclass(frozen=True)
class Request:
    """Everything a payload depends on; hashing it gives the cache key."""

    command: str
    field: str
    d: str = ""
    subset: str = "full"
    method: str = lvalues.Method.FINITE_SUM.value
    prec: int = lvalues.DEFAULT_PREC
    height: int = valuation.DEFAULT_HEIGHT

    def canonical(self) -> Request:
        """Same request with D rewritten in its factored form."""
        if self.command in ("constants", "bsd-report") or not self.d:
            return self
        if self.method == lvalues.Method.SEXTIC_TWIST:
            return replace(self, d=str(parse_quadint(self.d, Field.EISEN)))
        return replace(self, d=str(parse_d(self.d, Field(self.field))))

    def key(self) -> str:
        blob = json.dumps([SCHEMA_VERSION, asdict(self)], sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Request:
        return cls(**data)


def to_text(payload: dict[str, Any]) -> str:
    """Canonical JSON text: sorted keys, two-space indent."""
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False)


def _header(req: Request) -> dict[str, Any]:
    return {"schema": SCHEMA_VERSION, "command": req.command, "field": req.field}


def _decimal(x: mp.mpf, prec: int) -> str:
    with mp.workdps(prec + GUARD_DIGITS):
        return mp.nstr(x, prec, strip_zeros=False)


def constants_payload(req: Request) -> dict[str, Any]:
    field = Field(req.field)
    omega = period_constant(field, req.prec)
    ctx = cm_context(field, req.prec)
    dps = req.prec + GUARD_DIGITS
    with mp.workdps(dps):
        gap = abs(period_by_agm(field, dps) - period_by_quadrature(field, dps))
    return {
        **_header(req),
        "omega": _decimal(omega.real, req.prec),
        "prec": req.prec,
        "eta1": BigComplex(ctx.eta1, req.prec).to_json(),
        "area": BigComplex(ctx.area, req.prec).to_json(),
        "agm_quadrature_gap": mp.nstr(gap, 5),
    }


def _recognition(result: lvalues.LValueResult, req: Request) -> dict[str, Any]:
    key = "v2" if result.field is Field.GAUSS else "v3"
    try:
        rec = valuation.recognize_lvalue(result, req.height)
    except (valuation.RecognitionFailed, valuation.PrecisionInsufficient) as exc:
        logger.warning(f"⚠️ Recognition failed for D={result.d}: {exc}")
        return {"exact": None, key: None, "recognition_error": str(exc)}
    return {"exact": rec.to_json(), key: valuation.lvalue_valuation(rec).to_json()}


def lvalue_payload(req: Request) -> dict[str, Any]:
    method = lvalues.Method(req.method)
    if method is lvalues.Method.SEXTIC_TWIST:
        value = lvalues.sextic_twist_lvalue(parse_quadint(req.d, Field.EISEN), req.prec)
        return {**_header(req), "D": req.d, "method": method.value, "value": value.to_json()}
    d = parse_d(req.d, Field(req.field))
    mask = lvalues.parse_subset(d, req.subset)
    if method is lvalues.Method.DIRECT_SERIES:
        oracle = lvalues.direct_series_oracle(d, mask, min(req.prec, 30))
        return {
            **_header(req),
            "D": str(d),
            "T": lvalues.subset_divisor(d, mask).label,
            "method": method.value,
            "kind": lvalues.LKind.L.value,
            "value": oracle.value.to_json(),
            "error": mp.nstr(oracle.error, 5),
            "level": oracle.level,
            "root_number": oracle.root_number.to_json(),
            "terms": oracle.terms,
        }
    if method is lvalues.Method.KRONECKER_SUM:
        result = lvalues.lvalue_kronecker(d, mask, req.prec)
    else:
        result = lvalues.lvalue(d, mask, req.prec)
    plain = lvalues.euler_correct(result, lvalues.Direction.TO_L)
    return {
        **_header(req),
        "D": str(d),
        "T": result.subset.label,
        "method": method.value,
        "kind": result.kind.value,
        "value": result.value.to_json(),
        "rhs": result.rhs.to_json(),
        "L": plain.value.to_json(),
        **_recognition(result, req),
    }


def sstar_payload(req: Request) -> dict[str, Any]:
    d = parse_d(req.d, Field(req.field))
    star = lvalues.sstar(d, req.prec)
    residual = lvalues.identity_residual(d, req.prec)
    try:
        val, _ = valuation.sstar_valuation(d, req.prec, req.height)
    except (valuation.RecognitionFailed, valuation.PrecisionInsufficient) as exc:
        logger.warning(f"⚠️ v(S*) not found for D={d}: {exc}")
        val = None
    return {
        **_header(req),
        "D": str(d),
        "value": star.value.to_json(),
        "weights": star.weights.value,
        "identity_residual": mp.nstr(residual, 5),
        "v": None if val is None else val.to_json(),
    }


def delta_payload(req: Request) -> dict[str, Any]:
    d = parse_d(req.d, Field(req.field))
    cert = valuation.epsilon_delta(d, req.prec, req.height)
    return {
        **_header(req),
        **cert.to_json(),
        "consistent": cert.is_consistent(),
        "undecided": cert.verdict is valuation.Verdict.UNDECIDED,
    }


def verify_payload(req: Request) -> dict[str, Any]:
    d = parse_d(req.d, Field(req.field))
    report = valuation.verify_theorems(d, req.prec, req.height)
    return {**_header(req), **report.to_json(), "undecided": report.undecided}


def bsd_payload(req: Request) -> dict[str, Any]:
    report = valuation.bsd_report(int(req.d), req.prec, req.height)
    return {
        **_header(req),
        **report.to_json(),
        "undecided": report.certificate.verdict is valuation.Verdict.UNDECIDED,
        "contradicted": report.contradicted,
    }


_DISPATCH = {
    "constants": constants_payload,
    "lvalue": lvalue_payload,
    "sstar": sstar_payload,
    "delta": delta_payload,
    "verify": verify_payload,
    "bsd-report": bsd_payload,
}


def compute(req: Request) -> dict[str, Any]:
    """Run the request and return its payload."""
    if req.command not in _DISPATCH:
        raise ValueError(f"Unknown command {req.command!r}; expected one of {COMMANDS}")
    logger.info(f"🚀 {req.command} field={req.field} D={req.d or '-'} prec={req.prec}")
    return _DISPATCH[req.command](req)
