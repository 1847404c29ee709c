"""Special values L_S(psi_bar, 1) as finite sums of Weierstrass functions at torsion points.

Three families are covered:

* Gauss, square-free D: ``(D/omega) conj((theta/D_T)_4) L_S = (i/2) sum chi(c)/(wp(c omega/D) - i)
  + (1/4) sum chi(c)`` with theta = 2+2i.
* Gauss with squared primes: the same with D replaced by its radical Delta on the left and
  inside wp.
* Eisen, square-free D: ``(D/omega) (9/D_T)_3 L_S = (1/(2 sqrt 3)) sum chi(c)/(wp(c omega/D) - 1)
  + (1/(3 sqrt 3)) sum chi(c)``.

Every sum runs over the deterministic residue system order and is accumulated with
``mp.fsum``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from enum import StrEnum
from functools import lru_cache
from typing import TYPE_CHECKING

import mpmath as mp

from cmlv.wfunc import GUARD_DIGITS, BigComplex, cm_context, unit_context
from cmlv.zk_arith import (
    CharWeight,
    Closure,
    FactoredD,
    Field,
    NotCoprime,
    QuadInt,
    SubsetDivisor,
    char_sum_closed_form,
    enumerate_subset_divisors,
    factor,
    power_residue_symbol,
    prime_symbols,
    residue_system,
    subset_character,
    subset_divisor,
    units,
)

if TYPE_CHECKING:
    from cmlv.valuation import RecognizedNumber

logger = logging.getLogger(__name__)

DEFAULT_PREC = 120
HIGH_PREC = 300
ORACLE_SCALES = (1.0, 1.25, 0.8)


class CharacterSumMismatch(RuntimeError):
    """The exact character sum over the residue system is not #C or 0."""


class ConvergenceNotReached(RuntimeError):
    """The smoothed series did not settle within tolerance."""


class NotPrimitive(ValueError):
    """D is divisible by a rational integer greater than one."""


class NotOneModThree(ValueError):
    """D is not congruent to 1 mod 3."""


class SignNotClassInvariant(RuntimeError):
    """Two representatives of one residue class gave different sextic signs."""


class ZeroEulerFactor(ArithmeticError):
    """An Euler factor (pi - mu)/pi vanished."""


class NotProductOfPrimaries(ValueError):
    """D carries a unit other than 1 in front of its primary primes."""


class Method(StrEnum):
    FINITE_SUM = "finite_sum"
    KRONECKER_SUM = "kronecker_sum"
    DIRECT_SERIES = "direct_series"
    SEXTIC_TWIST = "sextic_twist"


class LKind(StrEnum):
    """Whether a value carries the Euler factors at D-hat_T removed (L_S) or not (L)."""

    L_S = "L_S"
    L = "L"


class Direction(StrEnum):
    TO_L = "to_L"
    TO_L_S = "to_L_S"


def default_prec(n: int) -> int:
    """Working precision for a coefficient with n distinct primes."""
    return HIGH_PREC if n >= 3 else DEFAULT_PREC


@dataclass(frozen=True)
class LValueResult:
    """A special value together with the normalized finite-sum side it came from."""

    field: Field
    d: FactoredD
    subset: SubsetDivisor
    value: BigComplex
    rhs: BigComplex
    method: Method
    prec: int
    kind: LKind = LKind.L_S
    exact: RecognizedNumber | None = None

    def with_exact(self, exact: RecognizedNumber) -> LValueResult:
        return replace(self, exact=exact)


@dataclass(frozen=True)
class SStarResult:
    field: Field
    d: FactoredD
    value: BigComplex
    weights: CharWeight
    prec: int


@dataclass(frozen=True)
class OracleEstimate:
    """Smoothed series value with the root number and level it was solved with."""

    value: BigComplex
    error: mp.mpf
    level: int
    root_number: BigComplex
    scales: tuple[float, ...]
    terms: int


def parse_subset(d: FactoredD, token: str | int) -> int:
    """Subset mask from ``"full"``, ``"empty"`` or an integer bitmask."""
    if isinstance(token, int):
        mask = token
    elif token == "full":
        mask = d.full_mask
    elif token == "empty":
        mask = 0
    else:
        try:
            mask = int(token, 0)
        except ValueError as exc:
            raise ValueError(f"Subset {token!r} is not full, empty or a bitmask") from exc
    if not 0 <= mask <= d.full_mask:
        raise ValueError(f"Subset mask {mask} out of range for n={d.n}")
    return mask


@lru_cache(maxsize=16)
def torsion_table(
    d: FactoredD, closure: Closure, prec: int
) -> tuple[tuple[QuadInt, mp.mpc], ...]:
    """Pairs (c, wp(c*omega/M)) over the residue system mod M (M = D or Delta)."""
    ctx = cm_context(d.field, prec)
    system = residue_system(d, closure)
    logger.info(f"Evaluating wp at {len(system)} torsion points mod {system.modulus}")
    with mp.workdps(ctx.dps):
        m = system.modulus.to_mpc()
        return tuple((c, ctx.wp(c.to_mpc() * ctx.omega / m)) for c in system.elements)


def _weights(d: FactoredD, mask: int, elements: list[QuadInt]) -> list[QuadInt]:
    return [subset_character(prime_symbols(c, d), d, mask) for c in elements]


def _exact_char_sum(d: FactoredD, mask: int, weights: list[QuadInt]) -> QuadInt:
    total = sum(weights, start=QuadInt(d.field, 0))
    expected = QuadInt(d.field, len(weights) if mask == 0 else 0)
    if total != expected:
        raise CharacterSumMismatch(
            f"Character sum for D={d}, T={mask:b} is {total}, expected {expected}"
        )
    return total


def _require_primary_product(d: FactoredD) -> None:
    if d.unit != QuadInt(d.field, 1):
        raise NotProductOfPrimaries(f"D={d} must be a product of primary primes (unit {d.unit})")


def _finite_sum(d: FactoredD, mask: int, prec: int, closure: Closure) -> LValueResult:
    _require_primary_product(d)
    field = d.field
    ctx = cm_context(field, prec)
    table = torsion_table(d, closure, prec)
    sub = subset_divisor(d, mask)
    modulus = residue_system(d, closure).modulus
    weights = _weights(d, mask, [c for c, _ in table])
    exact = _exact_char_sum(d, mask, weights)
    with mp.workdps(ctx.dps):
        if field is Field.GAUSS:
            i = mp.mpc(0, 1)
            s = mp.fsum(w.to_mpc() / (wp - i) for w, (_, wp) in zip(weights, table, strict=True))
            rhs = i / 2 * s + exact.to_mpc() / 4
            mu = power_residue_symbol(QuadInt.gauss(2, 2), sub.d_t, 4)
            value = rhs * ctx.omega * mu.to_mpc() / modulus.to_mpc()
        else:
            r3 = mp.sqrt(3)
            s = mp.fsum(w.to_mpc() / (wp - 1) for w, (_, wp) in zip(weights, table, strict=True))
            rhs = s / (2 * r3) + exact.to_mpc() / (3 * r3)
            mu = power_residue_symbol(QuadInt.eisen(9), sub.d_t, 3)
            value = rhs * ctx.omega * mu.conjugate().to_mpc() / modulus.to_mpc()
    logger.debug(f"L_S for D={d}, T={sub.label}: {mp.nstr(value, 12)}")
    return LValueResult(
        field=field,
        d=d,
        subset=sub,
        value=BigComplex(value, prec),
        rhs=BigComplex(rhs, prec),
        method=Method.FINITE_SUM,
        prec=prec,
    )


def lvalue_gauss(
    d: FactoredD, mask: int, prec: int | None = None, closure: Closure = Closure.NEGATION
) -> LValueResult:
    """L_S(psi_bar_{D_T}, 1) for square-free Gaussian D.

    Examples
    --------
    >>> from cmlv.zk_arith import parse_d
    >>> r = lvalue_gauss(parse_d("1+4i"), 0, prec=30)
    >>> r.kind.value
    'L_S'
    """
    if d.field is not Field.GAUSS:
        raise ValueError("lvalue_gauss needs a Gaussian coefficient")
    if not d.is_square_free:
        raise ValueError(f"{d} has squared primes; use lvalue_gauss_sq")
    if d.n < 1:
        raise ValueError("D must have at least one prime factor")
    return _finite_sum(d, mask, prec or default_prec(d.n), closure)


def lvalue_gauss_sq(
    d: FactoredD, mask: int, prec: int | None = None, closure: Closure = Closure.NEGATION
) -> LValueResult:
    """L_S(psi_bar_{D_T}, 1) for Gaussian D with squared primes, summed mod the radical."""
    if d.field is not Field.GAUSS:
        raise ValueError("lvalue_gauss_sq needs a Gaussian coefficient")
    if d.n < 1:
        raise ValueError("D must have at least one prime factor")
    return _finite_sum(d, mask, prec or default_prec(d.n), closure)


def lvalue_eisen(
    d: FactoredD, mask: int, prec: int | None = None, closure: Closure = Closure.NEGATION
) -> LValueResult:
    """L_S(psi_bar_{D_T^2}, 1) for square-free Eisenstein D."""
    if d.field is not Field.EISEN:
        raise ValueError("lvalue_eisen needs an Eisenstein coefficient")
    if not d.is_square_free:
        raise ValueError(f"{d} must be square-free")
    if d.n < 1:
        raise ValueError("D must have at least one prime factor")
    return _finite_sum(d, mask, prec or default_prec(d.n), closure)


def lvalue(d: FactoredD, mask: int, prec: int | None = None) -> LValueResult:
    """Dispatch to the finite-sum formula that fits D."""
    if d.field is Field.EISEN:
        return lvalue_eisen(d, mask, prec)
    if d.is_square_free:
        return lvalue_gauss(d, mask, prec)
    return lvalue_gauss_sq(d, mask, prec)


def lvalue_kronecker(d: FactoredD, mask: int, prec: int | None = None) -> LValueResult:
    """The same L_S value from the Eisenstein-Kronecker function before simplification.

    Gauss: rhs = (1/theta) sum chi(c) E1*(c omega/D + omega/theta);
    Eisen: rhs = (1/3) sum chi(c) E1*(c omega/D + omega/3).
    """
    if not d.is_square_free or d.n < 1:
        raise ValueError("Kronecker sums are implemented for square-free D with n >= 1")
    _require_primary_product(d)
    prec = prec or default_prec(d.n)
    field = d.field
    ctx = cm_context(field, prec)
    system = residue_system(d, Closure.NONE)
    sub = subset_divisor(d, mask)
    weights = _weights(d, mask, list(system.elements))
    _exact_char_sum(d, mask, weights)
    with mp.workdps(ctx.dps):
        dm = d.value.to_mpc()
        if field is Field.GAUSS:
            shift = QuadInt.gauss(2, 2).to_mpc()
            scale = 1 / shift
        else:
            shift = mp.mpc(3)
            scale = mp.mpf(1) / 3
        terms = (
            w.to_mpc() * ctx.e1star(c.to_mpc() * ctx.omega / dm + ctx.omega / shift)
            for w, c in zip(weights, system.elements, strict=True)
        )
        rhs = scale * mp.fsum(terms)
        if field is Field.GAUSS:
            mu = power_residue_symbol(QuadInt.gauss(2, 2), sub.d_t, 4).to_mpc()
        else:
            mu = power_residue_symbol(QuadInt.eisen(9), sub.d_t, 3).conjugate().to_mpc()
        value = rhs * ctx.omega * mu / dm
    return LValueResult(
        field=field,
        d=d,
        subset=sub,
        value=BigComplex(value, prec),
        rhs=BigComplex(rhs, prec),
        method=Method.KRONECKER_SUM,
        prec=prec,
    )


def sstar(d: FactoredD, prec: int | None = None) -> SStarResult:
    """S*(D): the wp-sum weighted by the closed-form subset character sums.

    Gauss weights are sum_T (c/D_T)_4; Eisen weights are sum_T 2^(n-t) (c/D_T)_3.
    """
    if not d.is_square_free or d.n < 1:
        raise ValueError("S* is defined for square-free D with n >= 1")
    _require_primary_product(d)
    prec = prec or default_prec(d.n)
    field = d.field
    table = torsion_table(d, Closure.FULL_UNIT_ORBIT, prec)
    weight = CharWeight.PLAIN if field is Field.GAUSS else CharWeight.TWO_POW
    ctx = cm_context(field, prec)
    with mp.workdps(ctx.dps):
        shift = mp.mpc(0, 1) if field is Field.GAUSS else mp.mpc(1)
        terms = (
            char_sum_closed_form(c, d, weight).value.to_mpc() / (wp - shift)
            for c, wp in table
        )
        total = mp.fsum(terms)
        value = total * mp.mpc(0, 1) / 2 if field is Field.GAUSS else total / (2 * mp.sqrt(3))
    return SStarResult(field, d, BigComplex(value, prec), weight, prec)


def subset_rhs(d: FactoredD, prec: int) -> dict[int, mp.mpc]:
    """The normalized finite-sum side for every subset mask."""
    return {s.mask: lvalue(d, s.mask, prec).rhs.value for s in enumerate_subset_divisors(d)}


def identity_residual(d: FactoredD, prec: int | None = None) -> mp.mpf:
    """|sum over T of the normalized sides - S*(D) - constant|.

    Gauss: sum_T rhs_T = S*(D) + #C/4. Eisen: sum_T 2^(n-t) rhs_T = S*(D) + 2^n #C/(3 sqrt 3).
    """
    prec = prec or default_prec(d.n)
    rhs = subset_rhs(d, prec)
    star = sstar(d, prec).value.value
    count = len(residue_system(d, Closure.NONE))
    with mp.workdps(prec + GUARD_DIGITS):
        if d.field is Field.GAUSS:
            lhs = mp.fsum(rhs[m] for m in sorted(rhs))
            return abs(lhs - star - mp.mpf(count) / 4)
        lhs = mp.fsum(2 ** (d.n - m.bit_count()) * rhs[m] for m in sorted(rhs))
        return abs(lhs - star - 2**d.n * mp.mpf(count) / (3 * mp.sqrt(3)))


def sstar_conjugates(d: FactoredD, prec: int) -> list[mp.mpc]:
    """Numerical K-conjugates of S*(D) (Gauss) or S*(D)/sqrt(3) (Eisen).

    Each normalized side rhs_T is a K-multiple of D_T^(-1/4) (resp. D_T^(-1/3)); the
    conjugates send the root of pi_k to i^j_k (resp. w^j_k) times itself.
    """
    rhs = subset_rhs(d, prec)
    count = len(residue_system(d, Closure.NONE))
    n = d.n
    with mp.workdps(prec + GUARD_DIGITS):
        if d.field is Field.GAUSS:
            root, order = mp.mpc(0, 1), 4
            base = rhs[0] - mp.mpf(count) / 4
        else:
            root, order = mp.expjpi(mp.mpf(2) / 3), 3
            base = 2**n * (rhs[0] - mp.mpf(count) / (3 * mp.sqrt(3)))
        out: list[mp.mpc] = []
        for code in range(order**n):
            exps = [(code // order**k) % order for k in range(n)]
            terms = [base]
            for mask in range(1, 1 << n):
                shift = sum(exps[k] for k in range(n) if mask >> k & 1)
                weight = 1 if d.field is Field.GAUSS else 2 ** (n - mask.bit_count())
                terms.append(weight * rhs[mask] * root ** (-shift % order))
            total = mp.fsum(terms)
            out.append(total if d.field is Field.GAUSS else total / mp.sqrt(3))
        return out


def euler_factor(d: FactoredD, mask: int) -> tuple[QuadInt, QuadInt]:
    """Exact product of (pi_k - mu_k)/pi_k over pi_k dividing D-hat_T, as (num, den)."""
    sub = subset_divisor(d, mask)
    order = 4 if d.field is Field.GAUSS else 3
    one = QuadInt(d.field, 1)
    num, den = one, one
    for k, (pi, _) in enumerate(d.primes):
        if mask >> k & 1:
            continue
        mu = power_residue_symbol(sub.d_t, pi, order)
        num, den = num * (pi - mu), den * pi
    return num, den


def euler_correct(result: LValueResult, direction: Direction) -> LValueResult:
    """Convert between L_S and L by the exact Euler factors at the primes outside T."""
    target = LKind.L if direction is Direction.TO_L else LKind.L_S
    if result.kind is target:
        return result
    num, den = euler_factor(result.d, result.subset.mask)
    if num.is_zero:
        raise ZeroEulerFactor(f"Euler factor for D={result.d}, T={result.subset.label} vanished")
    with mp.workdps(result.prec + GUARD_DIGITS):
        ratio = num.to_mpc() / den.to_mpc()
        value = result.value.value / ratio if target is LKind.L else result.value.value * ratio
    return replace(result, value=BigComplex(value, result.prec), kind=target)


def _normalize_mod3(pi: QuadInt) -> QuadInt:
    """The unique associate of pi that is 1 mod 3."""
    for u in units(Field.EISEN):
        cand = u * pi
        if (cand.a - 1) % 3 == 0 and cand.b % 3 == 0:
            return cand
    raise ValueError(f"{pi} has no associate = 1 mod 3")


def _odd_representatives(base: QuadInt, step: QuadInt) -> list[QuadInt]:
    """base + step*v over v in O_K/2, keeping the odd ones."""
    two = QuadInt.eisen(2)
    candidates = (base + step * v for v in (QuadInt.eisen(0), QuadInt.eisen(1), QuadInt.eisen(0, 1), QuadInt.eisen(1, 1)))
    return [sigma for sigma in candidates if not two.divides(sigma)]


def _sextic_coefficients(d: QuadInt, delta: QuadInt, elements: tuple[QuadInt, ...]) -> list[QuadInt]:
    """(D/sigma)_6 per beta, written as sign * (3 beta/D)_6 and checked on two representatives."""
    three = QuadInt.eisen(3)
    plus, minus = QuadInt.eisen(1), QuadInt.eisen(-1)
    out: list[QuadInt] = []
    for beta in elements:
        s = power_residue_symbol(three * beta, d, 6)
        signs = set()
        for sigma in _odd_representatives(three * beta + delta, three * delta)[:2]:
            twisted = power_residue_symbol(d, sigma, 6) * s.conjugate()
            if twisted not in (plus, minus):
                raise SignNotClassInvariant(f"(D/{sigma})_6 / (3*{beta}/D)_6 = {twisted} is not a sign")
            signs.add(twisted)
        if len(signs) != 1:
            raise SignNotClassInvariant(f"Sign for beta={beta} depends on the representative")
        out.append(signs.pop() * s)
    return out


def sextic_twist_lvalue(d: QuadInt, prec: int | None = None, form: str = "shifted") -> BigComplex:
    """L_D(1) of y^2 = x^3 + 16D over Q(sqrt(-3)) from a finite zeta sum.

    With Delta the radical of D (normalized = 1 mod 3) the value is
    (1/(3 Delta)) sum_beta (D/sigma)_6 [xi(beta/Delta + 1/3) - (2 pi/sqrt 3)(conj(beta/Delta) + 1/3)],
    xi the zeta function of O_K and sigma = 3 beta + Delta (mod 3 Delta) odd.
    ``form="addition"`` expands xi(beta/Delta + 1/3) with the addition theorem on
    L_omega; it needs Delta != 1.
    """
    if d.field is not Field.EISEN:
        raise ValueError("The sextic twist family lives over the Eisenstein integers")
    if d.is_zero or (d.a - 1) % 3 or d.b % 3:
        raise NotOneModThree(f"{d} is not 1 mod 3")
    if d.content != 1:
        raise NotPrimitive(f"{d} is divisible by {d.content}")
    if form not in ("shifted", "addition"):
        raise ValueError(f"Unknown form {form!r}")
    prec = prec or DEFAULT_PREC
    _, raw = factor(d)
    primes = tuple(sorted(((_normalize_mod3(pi), 1) for pi, _ in raw), key=lambda t: (t[0].norm(), t[0].a, t[0].b)))
    delta = FactoredD(Field.EISEN, QuadInt.eisen(1), primes)
    if form == "addition" and delta.value.is_unit:
        raise ValueError("The addition form needs a non-trivial radical")
    elements = residue_system(delta, Closure.NONE).elements
    coefficients = _sextic_coefficients(d, delta.value, elements)
    unit_ctx = unit_context(Field.EISEN, prec)
    ctx = cm_context(Field.EISEN, prec)
    logger.info(f"Sextic twist D={d}: {len(elements)} classes mod {delta.value}")
    with mp.workdps(prec + GUARD_DIGITS):
        r3 = mp.sqrt(3)
        third = mp.mpf(1) / 3
        dm = delta.value.to_mpc()
        big = ctx.omega
        terms = []
        for coef, beta in zip(coefficients, elements, strict=True):
            u = beta.to_mpc() / dm
            tail = 2 * mp.pi / r3 * (mp.conj(u) + third)
            if form == "shifted":
                core = unit_ctx.zeta(u + third)
            else:
                wp, wpp, _ = ctx.family(u * big)
                core = unit_ctx.zeta(u) + unit_ctx.zeta(third) + big / 2 * (wpp + r3) / (wp - 1)
            terms.append(coef.to_mpc() * (core - tail))
        value = mp.fsum(terms) / (3 * dm)
    return BigComplex(value, prec)


def oracle_level(field: Field, d_t: QuadInt) -> tuple[int, bool]:
    """Level of the series twisted by D_T, and whether it is unramified above 2.

    Away from the ramified prime the conductor is D_T. At the ramified prime it is
    the smallest power on whose units u * conj((u/D_T)) is trivial.
    """
    if field is Field.GAUSS:
        one, i = QuadInt.gauss(1), QuadInt.gauss(0, 1)
        on_i = i * power_residue_symbol(i, d_t, 4).conjugate()
        on_minus = -power_residue_symbol(-one, d_t, 4).conjugate()
        if on_i == one:
            return 4 * d_t.norm(), True
        local = 4 if on_minus == one else 8
        return 4 * local * d_t.norm(), False
    w = QuadInt.eisen(0, 1)
    on_w = w * power_residue_symbol(w, d_t, 3).conjugate()
    local = 3 if on_w == QuadInt.eisen(1) else 9
    return 3 * local * d_t.norm(), False


def _norm_box(field: Field, n_max: int) -> int:
    """Coordinate bound covering every a + b*u of norm at most n_max."""
    if field is Field.GAUSS:
        return math.isqrt(n_max) + 1
    # a^2 - ab + b^2 >= 3 max(|a|, |b|)^2 / 4
    return math.isqrt(4 * n_max // 3) + 1


def _series_points(
    field: Field, d_t: QuadInt, n_max: int, unramified: bool
) -> list[tuple[int, QuadInt, QuadInt]]:
    """(N(alpha), alpha, (alpha/D_T)) over one generator per ideal of norm <= n_max."""
    order = 4 if field is Field.GAUSS else 3
    step = QuadInt.gauss(2, 2) if field is Field.GAUSS else QuadInt.eisen(3)
    bound = _norm_box(field, n_max)
    points: list[tuple[int, QuadInt, QuadInt]] = []
    for a in range(-bound, bound + 1):
        for b in range(-bound, bound + 1):
            alpha = QuadInt(field, a, b)
            n_alpha = alpha.norm()
            if n_alpha == 0 or n_alpha > n_max:
                continue
            if unramified:
                # first-quadrant generators; the weight ignores the unit
                if a <= 0 or b < 0:
                    continue
            elif not step.divides(alpha - 1):
                continue
            try:
                chi = power_residue_symbol(alpha, d_t, order)
            except NotCoprime:
                continue
            points.append((n_alpha, alpha, chi))
    points.sort(key=lambda t: (t[0], t[1].a, t[1].b))
    return points


def direct_series_oracle(
    d: FactoredD,
    mask: int,
    prec: int = 30,
    scales: tuple[float, ...] = ORACLE_SCALES,
    tolerance: float = 1e-3,
) -> OracleEstimate:
    """The plain L value from the series of psi_bar(alpha)/N(alpha), smoothed by the functional equation.

    Gauss sums over alpha = 1 mod 2+2i weighted by (alpha/D_T)_4; Eisen over
    sigma = 1 mod 3 weighted by (sigma/D_T)_3. With N the level,
    ``L = sum a_n/n exp(-2 pi n t/sqrt N) + W sum conj(a_n)/n exp(-2 pi n/(t sqrt N))``
    for every t > 0. The root number W is solved from the first two scales and the
    third gives the error estimate.
    """
    if len(scales) < 3:  # noqa: PLR2004
        raise ValueError("The oracle needs three smoothing scales")
    sub = subset_divisor(d, mask)
    field = d.field
    level, unramified = oracle_level(field, sub.d_t)
    stretch = max(max(scales), 1 / min(scales))
    n_max = int(math.sqrt(level) * stretch * (prec + 5) * math.log(10) / (2 * math.pi)) + 1
    points = _series_points(field, sub.d_t, n_max, unramified)
    logger.info(f"Series oracle for D={d}, T={sub.label}: level {level}, {len(points)} terms")
    with mp.workdps(prec + GUARD_DIGITS):
        coeffs = [(mp.mpf(n), chi.to_mpc() * alpha.conjugate().to_mpc() / n) for n, alpha, chi in points]
        root_level = mp.sqrt(level)

        def halves(t: mp.mpf) -> tuple[mp.mpc, mp.mpc]:
            head = mp.fsum(c * mp.exp(-2 * mp.pi * n * t / root_level) for n, c in coeffs)
            dual = mp.fsum(mp.conj(c) * mp.exp(-2 * mp.pi * n / (t * root_level)) for n, c in coeffs)
            return head, dual

        (a1, b1), (a2, b2), *rest = [halves(mp.mpf(t)) for t in scales]
        root_number = (a1 - a2) / (b2 - b1)
        best = a1 + root_number * b1
        error = max(abs(a + root_number * b - best) for a, b in rest)
        if unramified:
            two = QuadInt.gauss(1, 1)
            chi_two = power_residue_symbol(two, sub.d_t, 4).to_mpc() * two.conjugate().to_mpc()
            best *= 1 - chi_two / 2
        if error > tolerance * max(abs(best), 1):
            raise ConvergenceNotReached(
                f"Smoothed series for D={d}, T={sub.label}: error {mp.nstr(error, 3)}"
            )
    return OracleEstimate(
        BigComplex(best, prec), error, level, BigComplex(root_number, prec), tuple(scales), len(points)
    )
