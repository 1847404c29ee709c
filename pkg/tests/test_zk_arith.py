"""Unit tests for exact arithmetic in Z[i] and Z[w]."""

import pytest

from cmlv.zk_arith import (
    CharWeight,
    Closure,
    Field,
    NotCoprimeToRamified,
    NotPrimaryRepresentable,
    QuadInt,
    UnsupportedExponent,
    bracket2,
    char_sum_closed_form,
    enumerate_subset_divisors,
    euclid_gcd,
    factor_primary,
    normalize_primary,
    parse_d,
    parse_quadint,
    power_residue_symbol,
    prime_symbols,
    primary_primes,
    reduce_mod,
    residue_system,
    s1,
    subset_character,
    units,
)


@pytest.mark.parametrize(
    "raw,expected",
    [
        (QuadInt.gauss(1, 4), 17),
        (QuadInt.gauss(0), 0),
        (QuadInt.eisen(3, 1), 7),
        (QuadInt.eisen(1, 6), 31),
    ],
)
def test_norm(raw, expected):
    """Norm is a^2+b^2 in Z[i] and a^2-ab+b^2 in Z[w]."""
    assert raw.norm() == expected


def test_eisen_multiplication_uses_w_squared():
    """w^2 = -1 - w."""
    w = QuadInt.eisen(0, 1)
    assert w * w == QuadInt.eisen(-1, -1)
    assert w * w * w == QuadInt.eisen(1)


def test_divmod_remainder_is_smaller():
    """Euclidean division leaves a remainder of smaller norm."""
    a, b = QuadInt.gauss(27, -13), QuadInt.gauss(5, 2)
    q, r = divmod(a, b)
    assert q * b + r == a
    assert r.norm() < b.norm()


def test_gcd_cases():
    """gcd with 0, with a multiple and of two distinct primes."""
    alpha = QuadInt.gauss(1, 4)
    assert euclid_gcd(alpha, QuadInt.gauss(0)) == alpha
    assert euclid_gcd(alpha, QuadInt.gauss(17)).norm() == 17  # noqa: PLR2004
    assert euclid_gcd(alpha, QuadInt.gauss(-3, 8)).is_unit


@pytest.mark.parametrize(
    "raw,expected",
    [
        (QuadInt.gauss(4, 1), QuadInt.gauss(1, -4)),
        (QuadInt.gauss(1, 4), QuadInt.gauss(1, 4)),
        (QuadInt.gauss(3), QuadInt.gauss(-3)),
    ],
)
def test_normalize_primary(raw, expected):
    """The associate = 1 mod 4 is returned."""
    assert normalize_primary(raw) == expected


def test_normalize_primary_not_representable():
    """Some primes have no associate in the primary class."""
    with pytest.raises(NotPrimaryRepresentable):
        normalize_primary(QuadInt.eisen(3, 1))
    with pytest.raises(NotPrimaryRepresentable):
        normalize_primary(QuadInt.gauss(1, 2))


def test_factor_primary_gauss_pair():
    """-35-4i = (1+4i)(-3+8i) with unit 1."""
    d = factor_primary(QuadInt.gauss(-35, -4))
    assert d.unit == QuadInt.gauss(1)
    assert set(d.prime_list) == {QuadInt.gauss(1, 4), QuadInt.gauss(-3, 8)}
    assert d.value == QuadInt.gauss(-35, -4)


def test_factor_primary_eisen_pair():
    """-29+12w = (1+6w)(7+6w) with unit 1."""
    d = factor_primary(QuadInt.eisen(-29, 12))
    assert d.unit == QuadInt.eisen(1)
    assert set(d.prime_list) == {QuadInt.eisen(1, 6), QuadInt.eisen(7, 6)}


@pytest.mark.parametrize(
    "raw,error",
    [
        (QuadInt.gauss(1, 2), NotPrimaryRepresentable),
        (QuadInt.gauss(2), NotCoprimeToRamified),
        (QuadInt.gauss(1, 4) ** 3, UnsupportedExponent),
    ],
)
def test_factor_primary_rejects(raw, error):
    """Bad coefficients raise the matching error."""
    with pytest.raises(error):
        factor_primary(raw)


def test_factor_primary_squared_prime_first():
    """Squared primes sort before simple ones."""
    d = factor_primary(QuadInt.gauss(1, 4) * QuadInt.gauss(-3, 8) ** 2)
    assert d.primes[0] == (QuadInt.gauss(-3, 8), 2)
    assert d.r == 1
    assert not d.is_square_free


@pytest.mark.parametrize(
    "raw,field,expected",
    [
        ("-35-4i", Field.GAUSS, "(1+4i)*(-3+8i)"),
        ("(1+4i)*(-3+8i)", Field.GAUSS, "(1+4i)*(-3+8i)"),
        ("(1+4i)^2", Field.GAUSS, "(1+4i)^2"),
        ("-29+12w", Field.EISEN, "(1+6w)*(7+6w)"),
        ("1", Field.GAUSS, "1"),
    ],
)
def test_parse_d_prints_factored(raw, field, expected):
    """Literal and factored inputs print in factored form."""
    assert str(parse_d(raw, field)) == expected


@pytest.mark.parametrize("raw", ["1+4", "1+4j", "1+i+w", "i4"])
def test_parse_quadint_rejects(raw):
    """Malformed text raises a ValueError subclass."""
    with pytest.raises(ValueError):
        parse_quadint(raw, Field.GAUSS)


def test_parse_quadint_forms():
    """Pure imaginary and signed forms parse."""
    assert parse_quadint("-i") == QuadInt.gauss(0, -1)
    assert parse_quadint("-29+12w") == QuadInt.eisen(-29, 12)
    assert parse_quadint("7", Field.EISEN) == QuadInt.eisen(7)


def test_residue_system_negation(gauss_prime):
    """16 residues mod 1+4i, closed under negation."""
    system = residue_system(gauss_prime, Closure.NEGATION)
    assert len(system) == 16  # noqa: PLR2004
    keys = {reduce_mod(c, system.modulus) for c in system.elements}
    assert len(keys) == 16  # noqa: PLR2004
    assert {reduce_mod(-c, system.modulus) for c in system.elements} == keys


def test_residue_system_full_orbit_pair(gauss_pair):
    """1152 = 16 * 72 residues mod -35-4i."""
    assert len(residue_system(gauss_pair, Closure.FULL_UNIT_ORBIT)) == 1152  # noqa: PLR2004


def test_residue_system_eisen_orbits(eisen_prime):
    """30 residues mod 1+6w in five unit orbits of size six."""
    system = residue_system(eisen_prime, Closure.FULL_UNIT_ORBIT)
    assert len(system) == 30  # noqa: PLR2004
    orbits = {
        frozenset(reduce_mod(u * c, system.modulus) for u in units(Field.EISEN))
        for c in system.elements
    }
    assert len(orbits) == 5  # noqa: PLR2004
    assert all(len(o) == 6 for o in orbits)  # noqa: PLR2004


def test_power_residue_symbol_anchor():
    """(i/1+4i)_4 = i^((17-1)/4) = 1; a unit modulus gives 1."""
    pi = QuadInt.gauss(1, 4)
    assert power_residue_symbol(QuadInt.gauss(0, 1), pi, 4) == QuadInt.gauss(1)
    assert power_residue_symbol(QuadInt.gauss(3, 7), QuadInt.gauss(1), 4) == QuadInt.gauss(1)


def test_power_residue_symbol_matches_brute_force(gauss_prime):
    """(2/1+4i)_4 = 1 exactly when 2 is a fourth power mod 1+4i."""
    pi = gauss_prime.prime_list[0]
    two = QuadInt.gauss(2)
    is_fourth_power = any(
        pi.divides(x**4 - two) for x in residue_system(gauss_prime).elements
    )
    assert (power_residue_symbol(two, pi, 4) == QuadInt.gauss(1)) == is_fourth_power


def test_power_residue_symbol_multiplicative(gauss_pair):
    """(a/bc) = (a/b)(a/c)."""
    alpha = QuadInt.gauss(5, 2)
    b, c = gauss_pair.prime_list
    assert power_residue_symbol(alpha, gauss_pair.value, 4) == (
        power_residue_symbol(alpha, b, 4) * power_residue_symbol(alpha, c, 4)
    )


def test_bracket2_is_additive_quadratic_symbol(gauss_prime):
    """[a/b]_2 is 0 on squares and 1 on non-squares."""
    pi = gauss_prime.prime_list[0]
    assert bracket2(QuadInt.gauss(4), pi) == 0
    square = QuadInt.gauss(2, 3) ** 2
    assert bracket2(square, pi) == 0
    values = {bracket2(c, pi) for c in residue_system(gauss_prime).elements}
    assert values == {0, 1}


@pytest.mark.parametrize(
    "raw,expected",
    [
        (QuadInt.gauss(1, 4), 1),
        (QuadInt.gauss(5, 4), 0),
        (QuadInt.gauss(-3, 8), 1),
    ],
)
def test_s1(raw, expected):
    """s1 tells v_2(pi - 1) = 2 apart from v_2(pi - 1) > 2."""
    assert s1(raw) == expected


def test_char_sum_over_residues(gauss_pair):
    """sum_c (c/D_T)_4 is #C for T empty and 0 otherwise."""
    elements = residue_system(gauss_pair).elements
    for sub in enumerate_subset_divisors(gauss_pair):
        total = sum(
            (subset_character(prime_symbols(c, gauss_pair), gauss_pair, sub.mask) for c in elements),
            start=QuadInt.gauss(0),
        )
        expected = len(elements) if sub.mask == 0 else 0
        assert total == QuadInt.gauss(expected)


def test_char_sum_closed_form_plain_gauss(gauss_pair):
    """Plain Gaussian closed form equals the brute-force subset sum."""
    for c in residue_system(gauss_pair).elements[:50]:
        symbols = prime_symbols(c, gauss_pair)
        brute = sum(
            (subset_character(symbols, gauss_pair, mask) for mask in range(4)),
            start=QuadInt.gauss(0),
        )
        assert char_sum_closed_form(c, gauss_pair).value == brute


@pytest.mark.parametrize("weight", [CharWeight.PLAIN, CharWeight.TWO_POW, CharWeight.ALT_SIGN])
def test_char_sum_closed_form_eisen(weight):
    """Each Eisen weighting equals its brute-force subset sum."""
    d = parse_d("-29+12w")
    n = d.n
    for c in residue_system(d).elements[:50]:
        symbols = prime_symbols(c, d)
        total = QuadInt.eisen(0)
        for mask in range(1 << n):
            t = mask.bit_count()
            term = subset_character(symbols, d, mask)
            if weight is CharWeight.TWO_POW:
                term = 2 ** (n - t) * term
            elif weight is CharWeight.ALT_SIGN:
                term = (-1) ** t * term
            total = total + term
        assert char_sum_closed_form(c, d, weight).value == total


def test_char_sum_closed_form_extremes(gauss_prime):
    """All symbols 1 gives 2^n; a symbol -1 gives 0."""
    assert char_sum_closed_form(QuadInt.gauss(1), gauss_prime).value == QuadInt.gauss(2)
    minus = next(
        c for c in residue_system(gauss_prime).elements
        if prime_symbols(c, gauss_prime)[0] == QuadInt.gauss(-1)
    )
    assert char_sum_closed_form(minus, gauss_prime).value.is_zero


def test_enumerate_subset_divisors(gauss_pair):
    """Four subset divisors in binary-counter order."""
    subs = enumerate_subset_divisors(gauss_pair)
    d_ts = [s.d_t for s in subs]
    assert d_ts[0] == QuadInt.gauss(1)
    assert d_ts[-1] == QuadInt.gauss(-35, -4)
    assert set(d_ts[1:3]) == {QuadInt.gauss(1, 4), QuadInt.gauss(-3, 8)}
    assert [s.label for s in subs] == ["{}", "{1}", "{2}", "{1,2}"]


def test_enumerate_subset_divisors_empty():
    """D = 1 has a single subset divisor, T empty with D_T = 1."""
    subs = enumerate_subset_divisors(parse_d("1", Field.GAUSS))
    assert len(subs) == 1
    assert subs[0].d_t == QuadInt.gauss(1)


def test_primary_primes_small_norms():
    """Below norm 20 only -3, 1-4i and 1+4i are primary."""
    assert primary_primes(Field.GAUSS, 20) == [QuadInt.gauss(-3), QuadInt.gauss(1, -4), QuadInt.gauss(1, 4)]


@pytest.mark.parametrize("field,order", [(Field.GAUSS, 4), (Field.EISEN, 3)])
def test_reciprocity_for_primary_primes(field, order):
    """(pi/lam) = (lam/pi) for distinct primary primes of norm below 300."""
    primes = primary_primes(field, 300)
    for k, pi in enumerate(primes):
        for lam in primes[k + 1 :]:
            assert power_residue_symbol(pi, lam, order) == power_residue_symbol(lam, pi, order), (pi, lam)


@pytest.mark.parametrize(
    "alpha",
    [QuadInt.gauss(3, 7), QuadInt.gauss(-5, 2), QuadInt.eisen(4, -9), QuadInt.eisen(1, 6)],
)
def test_unit_orbit_sums_vanish(alpha):
    """conj(u a) and conj(u a)^2 sum to zero over the unit orbit of a."""
    zero = QuadInt(alpha.field, 0)
    orbit = [u * alpha for u in units(alpha.field)]
    assert sum((x.conjugate() for x in orbit), start=zero) == zero
    assert sum((x.conjugate() ** 2 for x in orbit), start=zero) == zero


@pytest.mark.parametrize("closure", list(Closure))
def test_residue_system_is_deterministic(gauss_pair, closure):
    """A fresh computation lists the same elements in the same order."""
    first = residue_system(gauss_pair, closure).elements
    residue_system.cache_clear()
    second = residue_system(gauss_pair, closure).elements
    assert first == second
    assert list(first) == sorted(first, key=lambda c: (c.norm(), c.a, c.b))
