"""Exact arithmetic in the Gaussian integers Z[i] and the Eisenstein integers Z[w].

An element is a :class:`QuadInt` ``a + b*i`` (Gauss) or ``a + b*w`` with
``w = (-1 + sqrt(-3))/2`` (Eisen).  Besides ring arithmetic the module provides
primality and factorization through the norm, primary normalization
(``= 1 mod 4`` in Z[i], ``= 1 mod 6`` in Z[w]), reduced residue systems,
power residue symbols and the subset-divisor bookkeeping used by the L-value
formulas.

The textual form ``"a+bi"`` / ``"a+bw"`` (optional sign, no spaces) is the CLI and
JSON interchange grammar; a factored form ``"(1+4i)^2*(-3+8i)"`` is accepted too.
"""

from __future__ import annotations

import itertools
import logging
import re
from dataclasses import dataclass
from enum import IntFlag, StrEnum
from functools import lru_cache
from math import gcd, isqrt, prod

import mpmath as mp
from sympy import factorint, isprime, primerange
from sympy.ntheory import sqrt_mod

logger = logging.getLogger(__name__)


class Field(StrEnum):
    """The two imaginary quadratic fields in play."""

    GAUSS = "gauss"
    EISEN = "eisen"


# Modulus of the primary congruence class per field
PRIMARY_MODULUS = {Field.GAUSS: 4, Field.EISEN: 6}
# The rational prime that ramifies: 2 = -i(1+i)^2, 3 = -w^2(1-w)^2
RAMIFIED_PRIME = {Field.GAUSS: 2, Field.EISEN: 3}
SUFFIX = {Field.GAUSS: "i", Field.EISEN: "w"}
SYMBOL_ORDERS = {Field.GAUSS: (2, 4), Field.EISEN: (2, 3, 6)}


class InvalidQuadIntText(ValueError):
    """Text does not follow the ``a+bi`` / ``a+bw`` grammar."""


class NotPrimaryRepresentable(ValueError):
    """A prime has no associate in the primary congruence class."""


class NotCoprimeToRamified(ValueError):
    """The input is divisible by the ramified prime 1+i (Gauss) or 1-w (Eisen)."""


class NotCoprime(ValueError):
    """Numerator and modulus of a residue symbol share a prime factor."""


class OrderUnsupportedForField(ValueError):
    """The residue-symbol order is not available for this field or modulus."""


class NotPrimary(ValueError):
    """A prime argument is not in its primary class."""


class UnsupportedExponent(ValueError):
    """A prime occurs to a power other than 1 or 2."""


def _round_div(x: int, n: int) -> int:
    """Nearest integer to x/n for n > 0, halves rounded up."""
    return (2 * x + n) // (2 * n)


@dataclass(frozen=True)
class QuadInt:
    """Exact element of Z[i] or Z[w].

    Examples
    --------
    >>> QuadInt.gauss(1, 4) * QuadInt.gauss(-3, 8)
    QuadInt(field=<Field.GAUSS: 'gauss'>, a=-35, b=-4)
    >>> str(QuadInt.eisen(1, 6) * QuadInt.eisen(7, 6))
    '-29+12w'
    """

    field: Field
    a: int
    b: int = 0

    @classmethod
    def gauss(cls, a: int, b: int = 0) -> QuadInt:
        """Build ``a + b*i``."""
        return cls(Field.GAUSS, a, b)

    @classmethod
    def eisen(cls, a: int, b: int = 0) -> QuadInt:
        """Build ``a + b*w``."""
        return cls(Field.EISEN, a, b)

    def _coerce(self, other: QuadInt | int) -> QuadInt:
        if isinstance(other, int):
            return QuadInt(self.field, other, 0)
        if other.field != self.field:
            raise ValueError(f"Cannot mix {self.field} and {other.field} integers")
        return other

    def __add__(self, other: QuadInt | int) -> QuadInt:
        o = self._coerce(other)
        return QuadInt(self.field, self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __sub__(self, other: QuadInt | int) -> QuadInt:
        o = self._coerce(other)
        return QuadInt(self.field, self.a - o.a, self.b - o.b)

    def __rsub__(self, other: int) -> QuadInt:
        return self._coerce(other) - self

    def __neg__(self) -> QuadInt:
        return QuadInt(self.field, -self.a, -self.b)

    def __mul__(self, other: QuadInt | int) -> QuadInt:
        o = self._coerce(other)
        a, b, c, d = self.a, self.b, o.a, o.b
        if self.field is Field.GAUSS:
            return QuadInt(self.field, a * c - b * d, a * d + b * c)
        # w^2 = -1 - w
        return QuadInt(self.field, a * c - b * d, a * d + b * c - b * d)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> QuadInt:
        if exponent < 0:
            raise ValueError("Negative powers are not ring elements")
        result = QuadInt(self.field, 1)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def conjugate(self) -> QuadInt:
        """Complex conjugate."""
        if self.field is Field.GAUSS:
            return QuadInt(self.field, self.a, -self.b)
        return QuadInt(self.field, self.a - self.b, -self.b)

    def norm(self) -> int:
        """Field norm N(a), a non-negative integer."""
        if self.field is Field.GAUSS:
            return self.a * self.a + self.b * self.b
        return self.a * self.a - self.a * self.b + self.b * self.b

    @property
    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    @property
    def is_unit(self) -> bool:
        return self.norm() == 1

    @property
    def content(self) -> int:
        """Largest rational integer dividing both coordinates."""
        return gcd(self.a, self.b)

    def exact_div(self, other: QuadInt | int) -> QuadInt | None:
        """Return self/other if it lies in the ring, else None."""
        o = self._coerce(other)
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero")
        num = self * o.conjugate()
        if num.a % n or num.b % n:
            return None
        return QuadInt(self.field, num.a // n, num.b // n)

    def divides(self, other: QuadInt | int) -> bool:
        """True when self divides other."""
        o = self._coerce(other)
        if self.is_zero:
            return o.is_zero
        return o.exact_div(self) is not None

    def __divmod__(self, other: QuadInt | int) -> tuple[QuadInt, QuadInt]:
        o = self._coerce(other)
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero")
        num = self * o.conjugate()
        q = QuadInt(self.field, _round_div(num.a, n), _round_div(num.b, n))
        return q, self - q * o

    def __floordiv__(self, other: QuadInt | int) -> QuadInt:
        return divmod(self, other)[0]

    def __mod__(self, other: QuadInt | int) -> QuadInt:
        return divmod(self, other)[1]

    def to_mpc(self) -> mp.mpc:
        """Complex value at the current mpmath precision."""
        if self.field is Field.GAUSS:
            return mp.mpc(self.a, self.b)
        return mp.mpc(mp.mpf(self.a) - mp.mpf(self.b) / 2, mp.mpf(self.b) * mp.sqrt(3) / 2)

    def __str__(self) -> str:
        u = SUFFIX[self.field]
        if self.b == 0:
            return str(self.a)
        coef = {1: "", -1: "-"}.get(self.b, str(self.b))
        if self.a == 0:
            return f"{coef}{u}"
        sign = "+" if self.b > 0 else "-"
        mag = "" if abs(self.b) == 1 else str(abs(self.b))
        return f"{self.a}{sign}{mag}{u}"


def norm(alpha: QuadInt) -> int:
    """Field norm of alpha."""
    return alpha.norm()


def unit_generator(field: Field) -> QuadInt:
    """Generator of the unit group: i (order 4) or 1+w (order 6)."""
    if field is Field.GAUSS:
        return QuadInt.gauss(0, 1)
    return QuadInt.eisen(1, 1)


@lru_cache(maxsize=2)
def units(field: Field) -> tuple[QuadInt, ...]:
    """All units, as consecutive powers of :func:`unit_generator`."""
    gen = unit_generator(field)
    count = 4 if field is Field.GAUSS else 6
    return tuple(gen**k for k in range(count))


def ramified_element(field: Field) -> QuadInt:
    """The prime above the ramified rational prime: 1+i or 1-w."""
    if field is Field.GAUSS:
        return QuadInt.gauss(1, 1)
    return QuadInt.eisen(1, -1)


def euclid_gcd(alpha: QuadInt, beta: QuadInt) -> QuadInt:
    """Greatest common divisor, unique up to units.

    Examples
    --------
    >>> euclid_gcd(QuadInt.gauss(1, 4), QuadInt.gauss(17)).norm()
    17
    """
    if alpha.field != beta.field:
        raise ValueError("gcd needs elements of the same field")
    while not beta.is_zero:
        alpha, beta = beta, alpha % beta
    return alpha


def is_associate(alpha: QuadInt, beta: QuadInt) -> bool:
    """True when alpha = unit * beta."""
    if alpha.norm() != beta.norm():
        return False
    if beta.is_zero:
        return alpha.is_zero
    q = alpha.exact_div(beta)
    return q is not None and q.is_unit


def _inert(field: Field, p: int) -> bool:
    if field is Field.GAUSS:
        return p % 4 == 3
    return p % 3 == 2


def is_prime(alpha: QuadInt) -> bool:
    """Primality through the norm.

    Prime iff N(alpha) is a rational prime, or alpha is an associate of an
    inert rational prime.
    """
    n = alpha.norm()
    if n < 2:
        return False
    if isprime(n):
        return True
    r = isqrt(n)
    return r * r == n and isprime(r) and _inert(alpha.field, r) and is_associate(
        alpha, QuadInt(alpha.field, r)
    )


@lru_cache(maxsize=4096)
def _prime_above(field: Field, p: int) -> QuadInt:
    """A prime of norm p over a split rational prime p."""
    if field is Field.GAUSS:
        x = sqrt_mod(p - 1, p)
        pi = euclid_gcd(QuadInt.gauss(p), QuadInt.gauss(x, 1))
    else:
        s = sqrt_mod(p - 3, p)
        x = (s - 1) * pow(2, -1, p) % p
        pi = euclid_gcd(QuadInt.eisen(p), QuadInt.eisen(x, -1))
    if pi.norm() != p:
        raise ArithmeticError(f"Failed to split {p} in the {field} integers")
    return pi


def ramified_multiplicity(alpha: QuadInt) -> int:
    """Number of times the ramified prime divides a nonzero alpha."""
    if alpha.is_zero:
        raise ValueError("multiplicity of zero is infinite")
    lam = ramified_element(alpha.field)
    k = 0
    while True:
        q = alpha.exact_div(lam)
        if q is None:
            return k
        alpha, k = q, k + 1


def factor(alpha: QuadInt) -> tuple[QuadInt, list[tuple[QuadInt, int]]]:
    """Factor alpha into a unit and prime powers (primes not normalized).

    Returns
    -------
    tuple[QuadInt, list[tuple[QuadInt, int]]]
        ``(unit, [(prime, exponent), ...])`` with unit * prod(prime**e) == alpha.
    """
    if alpha.is_zero:
        raise ValueError("Cannot factor zero")
    field = alpha.field
    rest = alpha
    found: list[tuple[QuadInt, int]] = []
    for p in sorted(factorint(alpha.norm())):
        if p == RAMIFIED_PRIME[field]:
            candidates = [ramified_element(field)]
        elif _inert(field, p):
            candidates = [QuadInt(field, p)]
        else:
            pi = _prime_above(field, p)
            candidates = [pi, pi.conjugate()]
        for pi in candidates:
            k = 0
            while (q := rest.exact_div(pi)) is not None:
                rest, k = q, k + 1
            if k:
                found.append((pi, k))
    if not rest.is_unit:
        raise ArithmeticError(f"Incomplete factorization of {alpha}: left {rest}")
    return rest, found


def is_primary(alpha: QuadInt) -> bool:
    """True when alpha = 1 mod 4 (Gauss) or alpha = 1 mod 6 (Eisen)."""
    m = PRIMARY_MODULUS[alpha.field]
    return (alpha.a - 1) % m == 0 and alpha.b % m == 0


def normalize_primary(pi: QuadInt) -> QuadInt:
    """Return the associate of pi in the primary class.

    Examples
    --------
    >>> str(normalize_primary(QuadInt.gauss(4, 1)))
    '1-4i'
    """
    if ramified_element(pi.field).divides(pi):
        raise NotCoprimeToRamified(f"{pi} is divisible by {ramified_element(pi.field)}")
    if not is_prime(pi):
        raise ValueError(f"{pi} is not prime")
    for u in units(pi.field):
        candidate = u * pi
        if is_primary(candidate):
            return candidate
    raise NotPrimaryRepresentable(
        f"No associate of {pi} is 1 mod {PRIMARY_MODULUS[pi.field]}"
    )


@dataclass(frozen=True)
class FactoredD:
    """A validated coefficient D = unit * prod(pi_k ** e_k) with primary pi_k.

    Squared primes come first; within each group primes are ordered by norm and
    then by coordinates.
    """

    field: Field
    unit: QuadInt
    primes: tuple[tuple[QuadInt, int], ...]

    @property
    def n(self) -> int:
        return len(self.primes)

    @property
    def r(self) -> int:
        return sum(1 for _, e in self.primes if e == 2)

    @property
    def value(self) -> QuadInt:
        out = self.unit
        for pi, e in self.primes:
            out = out * pi**e
        return out

    @property
    def radical(self) -> QuadInt:
        """The square-free part pi_1 * ... * pi_n (called Delta)."""
        out = QuadInt(self.field, 1)
        for pi, _ in self.primes:
            out = out * pi
        return out

    @property
    def prime_list(self) -> list[QuadInt]:
        return [pi for pi, _ in self.primes]

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    @property
    def is_square_free(self) -> bool:
        return self.r == 0

    def __str__(self) -> str:
        parts = [f"({pi})" + (f"^{e}" if e > 1 else "") for pi, e in self.primes]
        if self.unit != QuadInt(self.field, 1) or not parts:
            parts.insert(0, str(self.unit))
        return "*".join(parts)


def _prime_order_key(item: tuple[QuadInt, int]) -> tuple[int, int, int, int]:
    pi, e = item
    return (-e, pi.norm(), pi.a, pi.b)


def factored_from_primes(
    field: Field, factors: list[tuple[QuadInt, int]], unit: QuadInt | None = None
) -> FactoredD:
    """Validate primary prime powers and assemble a :class:`FactoredD`."""
    seen: list[QuadInt] = []
    for pi, e in factors:
        if pi.field != field:
            raise ValueError(f"{pi} does not belong to the {field} integers")
        if e not in (1, 2):
            raise UnsupportedExponent(f"{pi} occurs with exponent {e}; only 1 or 2")
        if not is_prime(pi):
            raise ValueError(f"{pi} is not prime")
        if ramified_element(field).divides(pi):
            raise NotCoprimeToRamified(f"{pi} is the ramified prime")
        if not is_primary(pi):
            raise NotPrimary(f"{pi} is not 1 mod {PRIMARY_MODULUS[field]}")
        if any(is_associate(pi, other) for other in seen):
            raise ValueError(f"{pi} repeats an earlier prime")
        seen.append(pi)
    u = unit if unit is not None else QuadInt(field, 1)
    if not u.is_unit:
        raise ValueError(f"{u} is not a unit")
    return FactoredD(field, u, tuple(sorted(factors, key=_prime_order_key)))


def factor_primary(d: QuadInt) -> FactoredD:
    """Factor D into a unit and primary primes.

    Examples
    --------
    >>> str(factor_primary(QuadInt.gauss(-35, -4)))
    '(1+4i)*(-3+8i)'
    """
    if d.is_zero:
        raise ValueError("D must be nonzero")
    if ramified_element(d.field).divides(d):
        raise NotCoprimeToRamified(
            f"{d} is divisible by the ramified prime {ramified_element(d.field)}"
        )
    _, raw = factor(d)
    primes = [(normalize_primary(pi), e) for pi, e in raw]
    for pi, e in primes:
        if e not in (1, 2):
            raise UnsupportedExponent(f"{pi} occurs with exponent {e}; only 1 or 2")
    rebuilt = prod((pi**e for pi, e in primes), start=QuadInt(d.field, 1))
    unit = d.exact_div(rebuilt)
    if unit is None or not unit.is_unit:
        raise ArithmeticError(f"Primary factorization of {d} does not reproduce it")
    return FactoredD(d.field, unit, tuple(sorted(primes, key=_prime_order_key)))


@dataclass(frozen=True)
class SubsetDivisor:
    """Divisor bookkeeping for a subset T of the prime indices of D.

    ``members`` holds 0-based indices; ``label`` prints them 1-based.
    """

    mask: int
    members: tuple[int, ...]
    squared: tuple[int, ...]
    simple: tuple[int, ...]
    d_t: QuadInt
    d_hat: QuadInt
    delta: QuadInt
    delta_t: QuadInt
    delta_hat: QuadInt

    @property
    def t(self) -> int:
        return len(self.members)

    @property
    def label(self) -> str:
        return "{" + ",".join(str(k + 1) for k in self.members) + "}"


def subset_divisor(d: FactoredD, mask: int) -> SubsetDivisor:
    """Build the :class:`SubsetDivisor` of D for the subset encoded by ``mask``."""
    if mask < 0 or mask > d.full_mask:
        raise ValueError(f"Subset mask {mask} out of range for n={d.n}")
    one = QuadInt(d.field, 1)
    members = tuple(k for k in range(d.n) if mask >> k & 1)
    d_t, delta_t = one, one
    for k in members:
        pi, e = d.primes[k]
        d_t, delta_t = d_t * pi**e, delta_t * pi
    d_hat = d.value.exact_div(d_t)
    delta_hat = d.radical.exact_div(delta_t)
    assert d_hat is not None and delta_hat is not None
    return SubsetDivisor(
        mask=mask,
        members=members,
        squared=tuple(k for k in members if d.primes[k][1] == 2),
        simple=tuple(k for k in members if d.primes[k][1] == 1),
        d_t=d_t,
        d_hat=d_hat,
        delta=d.radical,
        delta_t=delta_t,
        delta_hat=delta_hat,
    )


def enumerate_subset_divisors(d: FactoredD) -> list[SubsetDivisor]:
    """All 2^n subset divisors in binary-counter order on T."""
    return [subset_divisor(d, mask) for mask in range(1 << d.n)]


def sub_factorization(d: FactoredD, mask: int) -> FactoredD:
    """D_T as a factored value of its own, with unit 1."""
    chosen = tuple(d.primes[k] for k in range(d.n) if mask >> k & 1)
    return FactoredD(d.field, QuadInt(d.field, 1), chosen)


class Closure(StrEnum):
    """Symmetry required of a residue system."""

    NONE = "none"
    NEGATION = "negation"
    FULL_UNIT_ORBIT = "full_unit_orbit"


@dataclass(frozen=True)
class ResidueSystem:
    """A complete reduced residue system modulo ``modulus``."""

    modulus: QuadInt
    elements: tuple[QuadInt, ...]
    closure: Closure

    def __len__(self) -> int:
        return len(self.elements)


def _ext_gcd(x: int, y: int) -> tuple[int, int, int]:
    """Return (g, s, t) with s*x + t*y = g = gcd(x, y) >= 0."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while y:
        q = x // y
        x, y = y, x - q * y
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if x < 0:
        return -x, -s0, -t0
    return x, s0, t0


@lru_cache(maxsize=256)
def _ideal_basis(m: QuadInt) -> tuple[int, int, int]:
    """Hermite basis ((d1, x), (0, d2)) of the ideal (m) in coordinates (a, b)."""
    mu = m * unit_generator(m.field)
    if m.field is Field.EISEN:
        # (1+w)m and m span the same lattice as wm and m
        mu = mu - m
    v1, v2 = (m.a, m.b), (mu.a, mu.b)
    g, s, t = _ext_gcd(v1[0], v2[0])
    x = s * v1[1] + t * v2[1]
    d2 = abs((v2[0] // g) * v1[1] - (v1[0] // g) * v2[1])
    if g * d2 != m.norm():
        raise ArithmeticError(f"Bad ideal basis for {m}")
    return g, x, d2


def reduce_mod(alpha: QuadInt, m: QuadInt) -> QuadInt:
    """Canonical representative of alpha modulo (m)."""
    if m.is_unit:
        return QuadInt(alpha.field, 0)
    d1, x, d2 = _ideal_basis(m)
    k = alpha.a // d1
    return QuadInt(alpha.field, alpha.a - k * d1, (alpha.b - k * x) % d2)


def _sort_key(alpha: QuadInt) -> tuple[int, int, int]:
    return (alpha.norm(), alpha.a, alpha.b)


@lru_cache(maxsize=64)
def residue_system(d: FactoredD, closure: Closure = Closure.NONE) -> ResidueSystem:
    """Complete reduced residue system modulo D, or modulo Delta in the squared case.

    Elements are sorted by norm, then by coordinates. With a closure, each
    canonical representative is expanded to its orbit under -1 (``NEGATION``) or
    the full unit group (``FULL_UNIT_ORBIT``).
    """
    modulus = d.value if d.is_square_free else d.radical
    primes = d.prime_list
    field = d.field
    if modulus.is_unit:
        canonical = [QuadInt(field, 0)]
    else:
        d1, _, d2 = _ideal_basis(modulus)
        canonical = sorted(
            (
                c
                for c in (QuadInt(field, a, b) for a in range(d1) for b in range(d2))
                if not any(pi.divides(c) for pi in primes)
            ),
            key=_sort_key,
        )
    expected = prod(pi.norm() - 1 for pi in primes)
    if len(canonical) != expected:
        raise ArithmeticError(f"Residue count {len(canonical)} != {expected}")
    if closure is Closure.NONE:
        return ResidueSystem(modulus, tuple(canonical), closure)

    group = (QuadInt(field, 1), QuadInt(field, -1))
    if closure is Closure.FULL_UNIT_ORBIT:
        group = units(field)
    covered: set[QuadInt] = set()
    elements: list[QuadInt] = []
    for c in canonical:
        if c in covered:
            continue
        for u in group:
            key = reduce_mod(u * c, modulus)
            if key not in covered:
                covered.add(key)
                elements.append(u * c)
    logger.debug(f"Residue system mod {modulus}: {len(elements)} elements ({closure})")
    return ResidueSystem(modulus, tuple(sorted(elements, key=_sort_key)), closure)


def _pow_mod(alpha: QuadInt, exponent: int, m: QuadInt) -> QuadInt:
    result = QuadInt(alpha.field, 1)
    base = alpha % m
    while exponent:
        if exponent & 1:
            result = (result * base) % m
        base = (base * base) % m
        exponent >>= 1
    return result


@lru_cache(maxsize=65536)
def symbol_mod_prime(alpha: QuadInt, pi: QuadInt, order: int) -> QuadInt:
    """Residue symbol (alpha/pi)_order for a prime pi, by Euler's criterion."""
    n = pi.norm()
    if (n - 1) % order:
        raise OrderUnsupportedForField(
            f"Order {order} does not divide N({pi}) - 1 = {n - 1}"
        )
    if pi.divides(alpha):
        raise NotCoprime(f"{pi} divides {alpha}")
    power = _pow_mod(alpha, (n - 1) // order, pi)
    for u in units(pi.field):
        if pi.divides(power - u):
            return u
    raise ArithmeticError(f"Euler criterion for ({alpha}/{pi})_{order} hit no unit")


@lru_cache(maxsize=4096)
def _factor_cached(beta: QuadInt) -> tuple[tuple[QuadInt, int], ...]:
    return tuple(factor(beta)[1])


def power_residue_symbol(alpha: QuadInt, beta: QuadInt, order: int) -> QuadInt:
    """Generalized power residue symbol (alpha/beta)_order as an exact unit.

    Composite moduli are factored and the prime symbols multiplied with
    multiplicity; a unit modulus gives 1.

    Examples
    --------
    >>> i = QuadInt.gauss(0, 1)
    >>> str(power_residue_symbol(i, QuadInt.gauss(1, 4), 4))
    '1'
    """
    if alpha.field != beta.field:
        raise ValueError("Symbol arguments must share a field")
    if order not in SYMBOL_ORDERS[beta.field]:
        raise OrderUnsupportedForField(f"Order {order} is not available for {beta.field}")
    if beta.is_zero:
        raise NotCoprime("Modulus zero")
    one = QuadInt(beta.field, 1)
    if beta.is_unit:
        return one
    if ramified_element(beta.field).divides(beta):
        raise NotCoprimeToRamified(f"{beta} is divisible by the ramified prime")
    result = one
    for pi, e in _factor_cached(beta):
        result = result * symbol_mod_prime(alpha, pi, order) ** e
    return result


def bracket2(alpha: QuadInt, beta: QuadInt) -> int:
    """Additive quadratic symbol [alpha/beta]_2 = (1 - (alpha/beta)_2)/2 in F_2."""
    s = power_residue_symbol(alpha, beta, 2)
    return 0 if s.a == 1 else 1


def s1(pi: QuadInt) -> int:
    """1 if v_2(pi - 1) = 2 exactly, 0 if it is larger.

    Examples
    --------
    >>> s1(QuadInt.gauss(1, 4)), s1(QuadInt.gauss(5, 4))
    (1, 0)
    """
    if pi.field is not Field.GAUSS or not is_primary(pi):
        raise NotPrimary(f"{pi} is not a primary Gaussian integer")
    # v_2(2) = 1 means four factors of (1+i)
    return 1 if ramified_multiplicity(pi - 1) == 4 else 0


class CharWeight(StrEnum):
    """Weighting of the subset character sums."""

    PLAIN = "plain"
    TWO_POW = "two_pow"
    ALT_SIGN = "alt_sign"


@dataclass(frozen=True)
class CharSum:
    """Closed-form subset character sum with the counts that determine it.

    For Gauss, ``t1``/``t_tau``/``t_tau2`` count the symbols equal to 1, i and -i
    and ``s = t1``; for Eisen they count 1, w and w^2. ``t_neg`` counts symbols -1
    (Gauss only).
    """

    value: QuadInt
    s: int
    t: int
    t1: int
    t_tau: int
    t_tau2: int
    t_neg: int = 0


def prime_symbols(c: QuadInt, d: FactoredD) -> list[QuadInt]:
    """The symbols (c/pi_k) of order 4 (Gauss) or 3 (Eisen) for each prime of D."""
    order = 4 if d.field is Field.GAUSS else 3
    return [symbol_mod_prime(c, pi, order) for pi in d.prime_list]


def subset_character(symbols: list[QuadInt], d: FactoredD, mask: int) -> QuadInt:
    """(c/D_T) assembled from per-prime symbols, honouring squared exponents."""
    out = QuadInt(d.field, 1)
    for k, (_, e) in enumerate(d.primes):
        if mask >> k & 1:
            out = out * symbols[k] ** e
    return out


def char_sum_closed_form(
    c: QuadInt, d: FactoredD, weight: CharWeight = CharWeight.PLAIN
) -> CharSum:
    """Closed form of the subset sums of (c/D_T) over all T.

    Gauss (``PLAIN`` only): prod(1 + (c/pi_k)_4), which is 0 or a unit times
    (1+i)^(n+s). Eisen: ``PLAIN`` gives prod(1 + chi_k), ``TWO_POW`` gives
    sum 2^(n-t) (c/D_T)_3 = (-w^2)^t_w * 3^t_1 * (1-w)^(t_w + t_w2), and
    ``ALT_SIGN`` gives sum (-1)^t (c/D_T)_3 = prod(1 - chi_k).
    """
    if not d.is_square_free:
        raise ValueError("Subset character sums are defined for square-free D")
    field = d.field
    if any(pi.divides(c) for pi in d.prime_list):
        raise NotCoprime(f"{c} is not coprime to {d}")
    chis = prime_symbols(c, d)
    one = QuadInt(field, 1)
    if field is Field.GAUSS:
        if weight is not CharWeight.PLAIN:
            raise ValueError(f"Weight {weight} is only defined for the Eisen field")
        i = QuadInt.gauss(0, 1)
        t1 = chis.count(one)
        t_i = chis.count(i)
        t_mi = chis.count(-i)
        t_neg = chis.count(-one)
        value = prod((one + chi for chi in chis), start=one)
        return CharSum(value, s=t1, t=t_i + t_mi, t1=t1, t_tau=t_i, t_tau2=t_mi, t_neg=t_neg)

    w = QuadInt.eisen(0, 1)
    w2 = w * w
    t1, tw, tw2 = chis.count(one), chis.count(w), chis.count(w2)
    lam = one - w
    if weight is CharWeight.TWO_POW:
        value = (-w2) ** tw * QuadInt.eisen(3) ** t1 * lam ** (tw + tw2)
    elif weight is CharWeight.ALT_SIGN:
        value = QuadInt.eisen(0) if t1 else lam**tw * (one - w2) ** tw2
    else:
        value = QuadInt.eisen(2) ** t1 * (-w2) ** tw * (-w) ** tw2
    return CharSum(value, s=t1, t=tw + tw2, t1=t1, t_tau=tw, t_tau2=tw2)


def primary_primes(field: Field, norm_max: int) -> list[QuadInt]:
    """Primary primes of norm below ``norm_max``, sorted by norm then coordinates."""
    out: list[QuadInt] = []
    for p in primerange(2, norm_max):
        if p == RAMIFIED_PRIME[field]:
            continue
        if _inert(field, p):
            if p * p < norm_max:
                candidates = [QuadInt(field, p)]
            else:
                continue
        else:
            pi = _prime_above(field, p)
            candidates = [pi, pi.conjugate()]
        for pi in candidates:
            try:
                out.append(normalize_primary(pi))
            except NotPrimaryRepresentable:
                continue
    return sorted(out, key=_sort_key)


_FULL_RE = re.compile(r"^(?P<a>[+-]?\d+)(?P<b>[+-]\d*)(?P<u>[iw])$")
_PURE_RE = re.compile(r"^(?P<b>[+-]?\d*)(?P<u>[iw])$")
_REAL_RE = re.compile(r"^(?P<a>[+-]?\d+)$")
_POWER_RE = re.compile(r"^\((?P<q>[^()]+)\)(?:\^(?P<e>\d+))?$")


def _coefficient(text: str) -> int:
    if text in ("", "+"):
        return 1
    if text == "-":
        return -1
    return int(text)


def _infer_field(text: str, field: Field | None) -> Field:
    has_i, has_w = "i" in text, "w" in text
    if has_i and has_w:
        raise InvalidQuadIntText(f"{text!r} mixes i and w")
    inferred = Field.GAUSS if has_i else Field.EISEN if has_w else None
    if field is not None and inferred is not None and inferred != field:
        raise InvalidQuadIntText(f"{text!r} is not a {field} integer")
    if field is None and inferred is None:
        raise InvalidQuadIntText(f"Cannot tell the field of {text!r}; pass it explicitly")
    return field or inferred  # type: ignore[return-value]


def parse_quadint(text: str, field: Field | None = None) -> QuadInt:
    """Parse ``"a+bi"`` / ``"a+bw"`` (optional sign, no spaces).

    Examples
    --------
    >>> str(parse_quadint("-35-4i"))
    '-35-4i'
    >>> parse_quadint("-29+12w").b
    12
    """
    text = text.strip()
    fld = _infer_field(text, field)
    if m := _FULL_RE.match(text):
        a, b, u = int(m["a"]), _coefficient(m["b"]), m["u"]
    elif m := _PURE_RE.match(text):
        a, b, u = 0, _coefficient(m["b"]), m["u"]
    elif m := _REAL_RE.match(text):
        return QuadInt(fld, int(m["a"]), 0)
    else:
        raise InvalidQuadIntText(f"{text!r} does not match a+bi / a+bw")
    if u != SUFFIX[fld]:
        raise InvalidQuadIntText(f"{text!r} uses {u!r} but the field is {fld}")
    return QuadInt(fld, a, b)


def parse_d(text: str, field: Field | None = None) -> FactoredD:
    """Parse D either literally (``"-35-4i"``) or factored (``"(1+4i)*(-3+8i)"``).

    The factored form skips factorization; each factor must be a primary prime,
    optionally raised to ``^2``. A bare unit factor is allowed.
    """
    text = text.replace(" ", "")
    if "(" not in text:
        return factor_primary(parse_quadint(text, field))
    fld = _infer_field(text, field)
    unit = QuadInt(fld, 1)
    factors: list[tuple[QuadInt, int]] = []
    for token in text.split("*"):
        if m := _POWER_RE.match(token):
            factors.append((parse_quadint(m["q"], fld), int(m["e"] or 1)))
        else:
            unit = unit * parse_quadint(token, fld)
    return factored_from_primes(fld, factors, unit)


def orbit(alpha: QuadInt) -> list[QuadInt]:
    """The unit orbit u*alpha, in the order of :func:`units`."""
    return [u * alpha for u in units(alpha.field)]


def iter_products(primes: list[QuadInt], count: int) -> list[tuple[QuadInt, ...]]:
    """All ``count``-element combinations of distinct primes, in input order."""
    return list(itertools.combinations(primes, count))
