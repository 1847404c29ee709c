"""Tests for request canonicalization, payloads and the result cache."""

import json

import pytest

from cmlv.cache import ResultCache, cache_ops
from cmlv.payloads import SCHEMA_VERSION, Request, compute, to_text


def _constants(prec=30, field="gauss"):
    return Request(command="constants", field=field, prec=prec)


def test_canonical_rewrites_literal_d():
    """Literal and factored D give the same request and key."""
    literal = Request(command="lvalue", field="gauss", d="-35-4i", prec=30).canonical()
    factored = Request(command="lvalue", field="gauss", d="(1+4i)*(-3+8i)", prec=30).canonical()
    assert literal.d == "(1+4i)*(-3+8i)"
    assert literal == factored
    assert literal.key() == factored.key()


def test_key_depends_on_precision():
    """Any input change yields a different key."""
    assert _constants(30).key() != _constants(40).key()
    assert _constants(30).key() == _constants(30).key()


def test_request_dict_round_trip():
    """Stored request dicts rebuild the same request."""
    req = Request(command="sstar", field="eisen", d="(1+6w)", prec=40)
    assert Request.from_dict(req.to_dict()) == req


def test_constants_payload():
    """omega carries its digits as a string with a precision sibling."""
    payload = compute(_constants())
    assert payload["schema"] == SCHEMA_VERSION
    assert payload["omega"].startswith("2.6220575")
    assert payload["prec"] == 30  # noqa: PLR2004
    assert set(payload["eta1"]) == {"re", "im", "prec"}


def test_unknown_command():
    """Unknown commands are rejected."""
    with pytest.raises(ValueError):
        compute(Request(command="plot", field="gauss"))


def test_to_text_is_canonical():
    """Key order does not change the text."""
    assert to_text({"b": 1, "a": [1, 2]}) == to_text({"a": [1, 2], "b": 1})


def test_fetch_or_compute_hits_second_time(result_cache):
    """The second identical request is served from disk."""
    req = _constants()
    text, hit = result_cache.fetch_or_compute(req)
    assert not hit
    again, hit = result_cache.fetch_or_compute(req)
    assert hit
    assert again == text
    assert result_cache.keys() == [req.key()]
    record = result_cache.get(req.key())
    assert record is not None
    assert Request.from_dict(record.request) == req


def test_put_leaves_no_temporary_files(result_cache):
    """Records are written atomically."""
    result_cache.put(_constants(), "{}")
    assert not list(result_cache.directory.glob("*.tmp"))


def test_stat_and_clear(result_cache):
    """stat counts records per command and clear removes them."""
    result_cache.fetch_or_compute(_constants(30))
    result_cache.fetch_or_compute(_constants(30, "eisen"))
    report = cache_ops("stat", result_cache)
    assert report["records"] == 2  # noqa: PLR2004
    assert report["commands"] == {"constants": 2}
    assert cache_ops("clear", result_cache)["removed"] == 2  # noqa: PLR2004
    assert result_cache.keys() == []


def test_verify_reproduces(result_cache):
    """Untouched records recompute byte for byte."""
    result_cache.fetch_or_compute(_constants())
    report = result_cache.verify(fraction=1.0)
    assert report.ok
    assert report.checked == 1


def test_verify_detects_tampering(result_cache):
    """A changed payload fails verification."""
    req = _constants()
    result_cache.fetch_or_compute(req)
    path = result_cache.path(req.key())
    data = json.loads(path.read_text(encoding="utf-8"))
    data["payload"] = data["payload"].replace("2.6220575", "2.6220576")
    path.write_text(json.dumps(data), encoding="utf-8")
    report = result_cache.verify(fraction=1.0)
    assert not report.ok
    assert report.failed == (req.key(),)


def test_verify_detects_corruption(result_cache):
    """Unreadable records are reported as corrupt."""
    result_cache.directory.mkdir(parents=True)
    result_cache.path("0" * 64).write_text("not json", encoding="utf-8")
    report = result_cache.verify(fraction=1.0)
    assert report.corrupt == ("0" * 64,)
    assert cache_ops("verify", result_cache)["ok"] is False


def test_default_directory_follows_setting(result_cache):
    """ResultCache() uses the configured directory."""
    assert ResultCache().directory == result_cache.directory


def test_unknown_cache_action(result_cache):
    """Only stat, clear and verify exist."""
    with pytest.raises(ValueError):
        cache_ops("compact", result_cache)
