"""Tests for recognition, Newton polygons and the epsilon/delta certificates."""

from fractions import Fraction

import mpmath as mp
import pytest

from cmlv.valuation import (
    HypothesisViolated,
    PrecisionInsufficient,
    RecognitionFailed,
    Valuation,
    Verdict,
    _delta_recursion,
    bsd_report,
    epsilon_delta,
    epsilon_from_identity,
    epsilon_from_valuation,
    minpoly_recognize,
    newton_polygon,
    newton_polygon_Q,
    rational_points,
    recognize_in_K,
    recognize_lvalue,
    sstar_quartic,
    sstar_valuation,
    val_exact_in_K,
    v_of_lvalue,
    validate_bsd_hypothesis,
    valuation_of_algebraic,
    verify_theorems,
    wp_torsion_valuation,
)
from cmlv.lvalues import lvalue
from cmlv.wfunc import BigComplex
from cmlv.zk_arith import Field, QuadInt, parse_d


@pytest.mark.parametrize(
    "numerator,denominator,expected",
    [
        (QuadInt.gauss(1, 1), 1, Fraction(1, 2)),
        (QuadInt.gauss(0, 4), 1, Fraction(2)),
        (QuadInt.gauss(3), 12, Fraction(-2)),
        (QuadInt.gauss(1, 4), 1, Fraction(0)),
        (QuadInt.eisen(1, -1), 1, Fraction(1, 2)),
        (QuadInt.eisen(3), 1, Fraction(1)),
        (QuadInt.eisen(2), 9, Fraction(-2)),
    ],
)
def test_val_exact_in_K(numerator, denominator, expected):
    """Valuations at the ramified prime, normalized so v(p) = 1."""
    assert val_exact_in_K(numerator, denominator).exact == expected


def test_val_exact_of_zero_is_infinite():
    """Zero has infinite valuation."""
    assert val_exact_in_K(QuadInt.gauss(0)).infinite


@pytest.mark.parametrize(
    "val,bound,expected",
    [
        (Valuation.of(1), Fraction(1, 2), True),
        (Valuation.of(0), Fraction(1, 2), False),
        (Valuation.infinity(), Fraction(5), True),
        (Valuation.indeterminate(Fraction(1), "mixed slopes"), Fraction(1, 2), True),
        (Valuation.indeterminate(Fraction(0), "mixed slopes"), Fraction(1, 2), None),
    ],
)
def test_valuation_at_least(val, bound, expected):
    """Undecided comparisons return None."""
    assert val.at_least(bound) is expected


def test_valuation_json_forms():
    """Exact values are fraction strings; bounds carry their reason."""
    assert Valuation.of(Fraction(3, 4)).to_json() == "3/4"
    assert Valuation.infinity().to_json() == "inf"
    assert Valuation.indeterminate(Fraction(1, 2), "mixed slopes").to_json() == {
        "lower_bound": "1/2",
        "reason": "mixed slopes",
    }
    assert Valuation.of(1).shifted(Fraction(-1, 2)).exact == Fraction(1, 2)


@pytest.mark.parametrize(
    "coefficients,p,expected",
    [
        ([-2, 0, 1], 2, [(Fraction(1, 2), 2)]),
        ([-3, 0, 0, 1], 3, [(Fraction(1, 3), 3)]),
        ([2, -3, 1], 2, [(Fraction(0), 1), (Fraction(1), 1)]),
        ([8, 0, 1], 2, [(Fraction(3, 2), 2)]),
    ],
)
def test_newton_polygon_Q(coefficients, p, expected):
    """Root valuations with multiplicities, smallest first."""
    assert newton_polygon_Q(coefficients, p) == expected


def test_newton_polygon_rejects_root_at_zero():
    """A vanishing constant term must be stripped first."""
    with pytest.raises(ValueError):
        newton_polygon([None, Fraction(0)])


def test_recognize_quarter():
    """0.25 is recognized as 1/4."""
    rec = recognize_in_K(BigComplex.of(mp.mpf("0.25"), 60), Field.GAUSS, height=100)
    assert rec.numerator == QuadInt.gauss(1)
    assert rec.denominator == 4  # noqa: PLR2004


def test_recognize_gaussian_fraction():
    """(3+2i)/5 comes back in lowest terms."""
    with mp.workdps(80):
        x = BigComplex.of(mp.mpc(3, 2) / 5, 60)
    rec = recognize_in_K(x, Field.GAUSS, height=100)
    assert rec.numerator == QuadInt.gauss(3, 2)
    assert rec.denominator == 5  # noqa: PLR2004


def test_recognize_transcendental_fails():
    """pi is not a small element of Q(i)."""
    with mp.workdps(80):
        x = BigComplex.of(mp.pi, 60)
    with pytest.raises(RecognitionFailed):
        recognize_in_K(x, Field.GAUSS, height=100)


def test_recognize_needs_precision():
    """Large heights refuse low-precision input."""
    with pytest.raises(PrecisionInsufficient):
        recognize_in_K(BigComplex.of(mp.mpf("0.25"), 30), Field.GAUSS)


def test_minpoly_of_cube_root():
    """2^(1/3) has minimal polynomial x^3 - 2."""
    with mp.workdps(120):
        x = BigComplex.of(mp.cbrt(2), 100)
    assert minpoly_recognize(x, 3, height=10).minpoly == (-2, 0, 0, 1)


def test_valuation_of_rational_integer():
    """v_2(12) = 2 through the degree-one polynomial."""
    assert valuation_of_algebraic(BigComplex.of(12, 80), 2, max_degree=1, height=100).exact == 2  # noqa: PLR2004


def test_valuation_of_root_two():
    """v_2(sqrt 2) = 1/2."""
    with mp.workdps(120):
        x = BigComplex.of(mp.sqrt(2), 100)
    assert valuation_of_algebraic(x, 2, max_degree=2, height=10).exact == Fraction(1, 2)


@pytest.mark.parametrize(
    "val,t,expected",
    [
        (Valuation.of(0), 1, 1),
        (Valuation.of(Fraction(1, 2)), 1, 0),
        (Valuation.of(Fraction(1, 2)), 2, 1),
        (Valuation.infinity(), 2, 0),
        (Valuation.indeterminate(Fraction(1), "mixed slopes"), 2, 0),
        (Valuation.indeterminate(Fraction(0), "mixed slopes"), 2, None),
        (Valuation.of(0), 3, None),
    ],
)
def test_epsilon_from_valuation(val, t, expected):
    """epsilon is 1 on the bound, 0 above it and None when undecided or below."""
    assert epsilon_from_valuation(val, t) == expected


def test_delta_recursion_two_primes():
    """delta for single primes is s1 + epsilon; pairs add the bracketed deltas."""
    deltas = _delta_recursion(2, {1: 1, 2: 0, 3: 1}, (1, 1), {(3, 1): 1, (3, 2): 0})
    assert deltas == {1: 0, 2: 1, 3: 1}


@pytest.mark.parametrize(
    "brackets,expected",
    [
        ({(3, 1): 0, (3, 2): 1}, {1: None, 2: 1, 3: 0}),
        ({(3, 1): 1, (3, 2): 1}, {1: None, 2: 1, 3: None}),
    ],
)
def test_delta_recursion_undecided(brackets, expected):
    """An undecided delta only spreads through a non-zero bracket."""
    assert _delta_recursion(2, {1: None, 2: 0, 3: 1}, (1, 1), brackets) == expected


@pytest.mark.parametrize("d_int", [5, 13, 3, 9, 1, 0])
def test_bsd_hypothesis_rejects(d_int):
    """D must be square-free, 1 mod 4, with no prime 5 mod 8."""
    with pytest.raises(HypothesisViolated):
        validate_bsd_hypothesis(d_int)


@pytest.mark.parametrize("d_int,n", [(17, 2), (-3, 1), (-7, 1)])
def test_bsd_hypothesis_factors(d_int, n):
    """Admissible D factor into primary Gaussian primes with unit 1."""
    d = validate_bsd_hypothesis(d_int)
    assert d.n == n
    assert d.unit == QuadInt.gauss(1)


def test_rational_points():
    """y^2 = x^3 + 4x has the point (2, 4); y^2 = x^3 - x has none with y != 0."""
    assert (Fraction(2), Fraction(4)) in rational_points(-4)
    assert rational_points(1, denominator_bound=4, numerator_bound=100) == []


def test_verify_single_gaussian_prime(gauss_prime):
    """Every bound for D = 1+4i holds or stays undecided; none is violated."""
    report = verify_theorems(gauss_prime)
    names = [c.name for c in report.checks]
    assert names[0] == "lvalue_bound"
    assert "sstar_bound" in names
    assert not report.violated
    assert report.certificate is not None
    assert report.certificate.is_consistent()
    assert report.certificate.verdict in set(Verdict)


def test_torsion_valuation_gauss(gauss_prime):
    """v_2(wp(c omega/D) - i) = 3/4 for every c."""
    assert wp_torsion_valuation(gauss_prime).exact == Fraction(3, 4)


def test_torsion_valuation_eisen(eisen_prime):
    """v_3(wp(c omega/D) - 1) = 1/3 for every c."""
    assert wp_torsion_valuation(eisen_prime).exact == Fraction(1, 3)


def test_vanishing_lvalue_has_infinite_valuation():
    """L(psi_bar_{-3}, 1) = 0 is recognized as zero."""
    d = parse_d("-3", Field.GAUSS)
    assert v_of_lvalue(lvalue(d, d.full_mask)).infinite


def test_sstar_quartic_is_the_conjugate_annihilator(gauss_prime):
    """The quartic built from the exact L-value is the annihilator of the S* conjugates."""
    rec = recognize_lvalue(lvalue(gauss_prime, gauss_prime.full_mask))
    quartic = sstar_quartic(gauss_prime, rec)
    _, poly = sstar_valuation(gauss_prime, 120)
    scale = quartic[-1].a
    assert poly.degree == 4  # noqa: PLR2004
    for exact, found in zip(quartic, poly.coefficients, strict=True):
        assert found.numerator * scale == exact * found.denominator


@pytest.mark.parametrize("raw", ["1+4i", "1-4i", "-3", "5+4i", "-3+8i"])
def test_epsilon_from_identity_matches_certificate(raw):
    """Back-solving epsilon from the L-value agrees with the S* conjugate path."""
    d = parse_d(raw, Field.GAUSS)
    certificate = epsilon_delta(d)
    assert epsilon_from_identity(d) == certificate.rows[0].epsilon


def test_epsilon_from_identity_rejects_pairs(gauss_pair):
    """The back-solve covers one prime only."""
    with pytest.raises(ValueError):
        epsilon_from_identity(gauss_pair)


def test_certificate_for_two_primes(gauss_pair):
    """-35-4i has three subset rows and a self-consistent delta."""
    certificate = epsilon_delta(gauss_pair)
    assert [r.mask for r in certificate.rows] == [1, 2, 3]
    assert [r.t for r in certificate.rows] == [1, 1, 2]
    assert certificate.is_consistent()
    assert certificate.recompute_delta()[3] == certificate.delta


@pytest.mark.parametrize(
    "raw,field,claims",
    [
        ("-35-4i", Field.GAUSS, ["lvalue_bound", "sstar_bound"]),
        ("(1+4i)^2", Field.GAUSS, ["squared_lvalue_bound"]),
        ("1+6w", Field.EISEN, ["eisen_lvalue_bound", "eisen_sstar_bound"]),
    ],
)
def test_verify_families(raw, field, claims):
    """Each family reports its own bounds and none of them is violated."""
    report = verify_theorems(parse_d(raw, field))
    assert [c.name for c in report.checks] == claims
    assert not report.violated
    assert all(c.holds is not False for c in report.checks)


def test_verify_low_precision_is_undecided(gauss_prime):
    """Too few digits for the height bound leaves the claims undecided."""
    report = verify_theorems(gauss_prime, prec=40, height=10**40)
    assert report.undecided
    assert not report.violated
    assert report.checks[0].holds is None
    assert report.checks[0].valuation.reason == "not recognized"


def test_bsd_report_seventeen():
    """y^2 = x^3 - 17x has the point (-1, 4), so rank 0 is never predicted."""
    report = bsd_report(17)
    assert report.d.n == 2  # noqa: PLR2004
    assert (Fraction(-1), Fraction(4)) in report.points
    assert not report.predicted_rank_zero
    assert not report.contradicted
    assert report.certificate.is_consistent()
