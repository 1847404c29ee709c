"""Pytest configuration and shared fixtures for cmlv tests."""

import pytest

import cmlv.cache as cache_module
import cmlv.cli as cli_module
import cmlv.scan as scan_module
from cmlv.cache import ResultCache
from cmlv.wfunc import cm_context
from cmlv.zk_arith import Field, parse_d

# Digits used by the numeric tests; high enough for the golden identities, low
# enough to keep theta evaluations cheap.
TEST_PREC = 50


@pytest.fixture()
def gauss_ctx():
    """Weierstrass context for the Gaussian period lattice at test precision."""
    return cm_context(Field.GAUSS, TEST_PREC)


@pytest.fixture()
def eisen_ctx():
    """Weierstrass context for the Eisenstein period lattice at test precision."""
    return cm_context(Field.EISEN, TEST_PREC)


@pytest.fixture()
def gauss_prime():
    """D = 1+4i, norm 17, the smallest primary Gaussian prime of split type."""
    return parse_d("1+4i", Field.GAUSS)


@pytest.fixture()
def gauss_pair():
    """D = -35-4i = (1+4i)(-3+8i)."""
    return parse_d("-35-4i", Field.GAUSS)


@pytest.fixture()
def eisen_prime():
    """D = 1+6w, norm 31."""
    return parse_d("1+6w", Field.EISEN)


@pytest.fixture()
def result_cache(tmp_path, monkeypatch):
    """Empty result cache in tmp_path, also installed as the default directory."""
    directory = tmp_path / "cache"
    monkeypatch.setattr(cache_module, "CACHE_DIR", directory)
    monkeypatch.setattr(cli_module, "LOG_FILE", str(tmp_path / "cmlv.log"))
    monkeypatch.setattr(scan_module, "LOG_FILE", str(tmp_path / "cmlv.log"))
    return ResultCache(directory)
