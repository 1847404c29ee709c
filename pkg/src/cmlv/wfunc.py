"""Weierstrass functions on the CM lattices omega*Z[i] and omega*Z[w].

Evaluation reduces z into the fundamental parallelogram and then uses Jacobi theta
series.  With half-periods w1 = omega/2 and w3 = omega*u/2 (u = i or (1+sqrt(-3))/2)
the nome follows the mpmath convention q = exp(i*pi*w3/w1); the Gauss lattice gets
q = exp(-pi) and the Eisen lattice q = i*exp(-pi*sqrt(3)/2), both small enough for
a few hundred digits to be cheap.

All work happens under ``mp.workdps(prec + GUARD_DIGITS)``; published values carry
the requested ``prec``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache

import mpmath as mp

from cmlv.zk_arith import Field

logger = logging.getLogger(__name__)

GUARD_DIGITS = 20


class PoleAtLatticePoint(ValueError):
    """The argument reduces to (a neighbourhood of) a lattice point."""


class PeriodMismatch(RuntimeError):
    """Quadrature and AGM disagree on the real period."""


@dataclass(frozen=True)
class BigComplex:
    """Arbitrary precision complex value tagged with its precision in digits.

    Arithmetic runs at the larger of the two precisions and records it.
    """

    value: mp.mpc
    prec: int

    @classmethod
    def of(cls, value: mp.mpc | mp.mpf | complex | float | int, prec: int) -> BigComplex:
        with mp.workdps(prec + GUARD_DIGITS):
            return cls(mp.mpc(value), prec)

    def _lift(self, other: BigComplex | mp.mpc | complex | int) -> tuple[mp.mpc, int]:
        if isinstance(other, BigComplex):
            return other.value, max(self.prec, other.prec)
        with mp.workdps(self.prec + GUARD_DIGITS):
            return mp.mpc(other), self.prec

    def __add__(self, other: BigComplex | mp.mpc | complex | int) -> BigComplex:
        v, p = self._lift(other)
        with mp.workdps(p + GUARD_DIGITS):
            return BigComplex(self.value + v, p)

    __radd__ = __add__

    def __sub__(self, other: BigComplex | mp.mpc | complex | int) -> BigComplex:
        v, p = self._lift(other)
        with mp.workdps(p + GUARD_DIGITS):
            return BigComplex(self.value - v, p)

    def __mul__(self, other: BigComplex | mp.mpc | complex | int) -> BigComplex:
        v, p = self._lift(other)
        with mp.workdps(p + GUARD_DIGITS):
            return BigComplex(self.value * v, p)

    __rmul__ = __mul__

    def __truediv__(self, other: BigComplex | mp.mpc | complex | int) -> BigComplex:
        v, p = self._lift(other)
        with mp.workdps(p + GUARD_DIGITS):
            return BigComplex(self.value / v, p)

    def __neg__(self) -> BigComplex:
        return BigComplex(-self.value, self.prec)

    def __abs__(self) -> mp.mpf:
        with mp.workdps(self.prec + GUARD_DIGITS):
            return abs(self.value)

    def conjugate(self) -> BigComplex:
        return BigComplex(mp.conj(self.value), self.prec)

    @property
    def real(self) -> mp.mpf:
        return self.value.real

    @property
    def imag(self) -> mp.mpf:
        return self.value.imag

    def close_to(self, other: BigComplex | mp.mpc | complex | int, digits: int | None = None) -> bool:
        """True when |self - other| < 10^(-digits), default digits = prec - 5."""
        v, p = self._lift(other)
        tol_digits = (p - 5) if digits is None else digits
        with mp.workdps(p + GUARD_DIGITS):
            scale = max(mp.mpf(1), abs(v))
            return abs(self.value - v) < mp.mpf(10) ** (-tol_digits) * scale

    def to_json(self) -> dict[str, str | int]:
        """Decimal strings for both parts plus the precision sibling."""
        with mp.workdps(self.prec + GUARD_DIGITS):
            return {
                "re": mp.nstr(self.value.real, self.prec, strip_zeros=False),
                "im": mp.nstr(self.value.imag, self.prec, strip_zeros=False),
                "prec": self.prec,
            }

    def __str__(self) -> str:
        return mp.nstr(self.value, min(self.prec, 30))


def cm_unit(field: Field) -> mp.mpc:
    """Second basis direction: i (Gauss) or (1+sqrt(-3))/2 (Eisen)."""
    if field is Field.GAUSS:
        return mp.mpc(0, 1)
    return mp.mpc(mp.mpf(1) / 2, mp.sqrt(3) / 2)


def period_by_agm(field: Field, dps: int) -> mp.mpf:
    """Real period through the arithmetic-geometric mean."""
    with mp.workdps(dps):
        if field is Field.GAUSS:
            return mp.pi / mp.agm(1, mp.sqrt(2))
        # x^3 - a^3 = (x - a)(x^2 + a x + a^2), a = 4^(-1/3)
        a = mp.cbrt(mp.mpf(1) / 4)
        c = mp.sqrt(3) * a
        return mp.pi / mp.agm(mp.sqrt(c), mp.sqrt((c + 3 * a / 2) / 2))


def period_by_quadrature(field: Field, dps: int) -> mp.mpf:
    """Real period by tanh-sinh quadrature after the substitution x = e1 + t^2."""
    with mp.workdps(dps):
        if field is Field.GAUSS:

            def integrand(t: mp.mpf) -> mp.mpf:
                return 2 / mp.sqrt((1 + t * t) * (2 + t * t))

        else:
            a = mp.cbrt(mp.mpf(1) / 4)

            def integrand(t: mp.mpf) -> mp.mpf:
                x = a + t * t
                return 2 / mp.sqrt(x * x + a * x + a * a)

        return mp.quad(integrand, [0, 1, mp.inf])


@lru_cache(maxsize=32)
def period_constant(field: Field, prec: int) -> BigComplex:
    """The real period of y^2 = x^3 - x (Gauss) or y^2 = x^3 - 1/4 (Eisen).

    Both AGM and quadrature are evaluated; they must agree to ``prec - 10`` digits.

    Examples
    --------
    >>> mp.nstr(period_constant(Field.GAUSS, 30).real, 12)[:9]
    '2.6220575'
    """
    if prec < 20:
        raise ValueError(f"Precision {prec} is below the minimum of 20 digits")
    dps = prec + GUARD_DIGITS
    by_agm = period_by_agm(field, dps)
    by_quad = period_by_quadrature(field, dps)
    with mp.workdps(dps):
        gap = abs(by_agm - by_quad)
        if gap > mp.mpf(10) ** (10 - prec) * by_agm:
            raise PeriodMismatch(
                f"{field} period: AGM and quadrature differ by {mp.nstr(gap, 5)}"
            )
    logger.debug(f"Period constant for {field} at {prec} digits: {mp.nstr(by_agm, 15)}")
    return BigComplex.of(by_agm, prec)


@dataclass(frozen=True)
class Lattice:
    """The lattice omega * O_K with basis (omega, omega*u)."""

    field: Field
    omega: mp.mpc

    @property
    def basis(self) -> tuple[mp.mpc, mp.mpc]:
        return self.omega, self.omega * cm_unit(self.field)

    def scaled(self, lam: mp.mpc, prec: int) -> Lattice:
        """The homothetic lattice lam * L, multiplied at ``prec`` digits."""
        with mp.workdps(prec + GUARD_DIGITS):
            return Lattice(self.field, self.omega * mp.mpc(lam))

    def covolume(self) -> mp.mpf:
        b1, b2 = self.basis
        return abs((mp.conj(b1) * b2).imag)


def reduce_coordinates(z: mp.mpc, lattice: Lattice) -> tuple[mp.mpc, int, int]:
    """Return (z_r, m, n) with z = z_r + m*omega + n*omega*u.

    The coordinates of z_r in the basis lie in [-1/2, 1/2).
    """
    u = cm_unit(lattice.field)
    t = mp.mpc(z) / lattice.omega
    y = t.imag / u.imag
    x = t.real - y * u.real
    m = int(mp.floor(x + mp.mpf(1) / 2))
    n = int(mp.floor(y + mp.mpf(1) / 2))
    return z - m * lattice.omega - n * lattice.omega * u, m, n


def cm_lattice(field: Field, prec: int) -> Lattice:
    """L_omega with omega the real period of the reference curve."""
    omega = period_constant(field, prec)
    with mp.workdps(prec + GUARD_DIGITS):
        return Lattice(field, mp.mpc(omega.value))


def unit_lattice(field: Field) -> Lattice:
    """O_K itself, omega = 1."""
    return Lattice(field, mp.mpc(1))


@dataclass(frozen=True)
class WeierstrassContext:
    """Precomputed theta and quasi-period data of a lattice at a given precision."""

    lattice: Lattice
    prec: int
    nome: mp.mpc
    theta_d1: mp.mpc
    eta1: mp.mpc
    eta3: mp.mpc
    s2: mp.mpc
    area: mp.mpc

    @property
    def dps(self) -> int:
        return self.prec + GUARD_DIGITS

    @property
    def omega(self) -> mp.mpc:
        return self.lattice.omega

    def _thetas(self, z_r: mp.mpc) -> tuple[mp.mpc, mp.mpc, mp.mpc, mp.mpc]:
        if abs(z_r) < mp.mpf(10) ** (-(self.prec // 2)) * abs(self.omega):
            raise PoleAtLatticePoint("Argument lies on the lattice")
        v = mp.pi * z_r / self.omega
        return tuple(mp.jtheta(1, v, self.nome, d) for d in range(4))  # type: ignore[return-value]

    def family(self, z: mp.mpc) -> tuple[mp.mpc, mp.mpc, mp.mpc]:
        """(wp, wp', zeta) at z, raw mpc values at the working precision."""
        with mp.workdps(self.dps):
            z = mp.mpc(z)
            z_r, m, n = reduce_coordinates(z, self.lattice)
            t0, t1, t2, t3 = self._thetas(z_r)
            w1 = self.omega / 2
            k = mp.pi / self.omega
            r1, r2, r3 = t1 / t0, t2 / t0, t3 / t0
            wp = -self.eta1 / w1 + k**2 * (r1 * r1 - r2)
            wpp = -(k**3) * (r3 - 3 * r1 * r2 + 2 * r1**3)
            zeta = self.eta1 * z_r / w1 + k * r1 + 2 * m * self.eta1 + 2 * n * self.eta3
            return wp, wpp, zeta

    def wp(self, z: mp.mpc) -> mp.mpc:
        """Weierstrass wp at z (raw)."""
        return self.family(z)[0]

    def zeta(self, z: mp.mpc) -> mp.mpc:
        """Weierstrass zeta at z (raw)."""
        return self.family(z)[2]

    def e1star(self, z: mp.mpc) -> mp.mpc:
        """zeta(z) - z*s2 - conj(z)/A, periodic in z (raw)."""
        with mp.workdps(self.dps):
            z = mp.mpc(z)
            return self.zeta(z) - z * self.s2 - mp.conj(z) / self.area


def make_context(lattice: Lattice, prec: int) -> WeierstrassContext:
    """Build the evaluation context for ``lattice`` at ``prec`` digits."""
    with mp.workdps(prec + GUARD_DIGITS):
        b1, b2 = lattice.basis
        w1, w3 = b1 / 2, b2 / 2
        if (w3 / w1).imag <= 0:
            raise ValueError("Lattice basis must be positively oriented")
        q = mp.expjpi(w3 / w1)
        d1 = mp.jtheta(1, 0, q, 1)
        d3 = mp.jtheta(1, 0, q, 3)
        eta1 = -(mp.pi**2) * d3 / (12 * w1 * d1)
        # Legendre: eta1*w3 - eta3*w1 = i*pi/2
        eta3 = (eta1 * w3 - mp.mpc(0, 1) * mp.pi / 2) / w1
        area = (mp.conj(b1) * b2 - b1 * mp.conj(b2)) / (2 * mp.pi * mp.mpc(0, 1))
        s2 = (2 * eta1 - mp.conj(b1) / area) / b1
    return WeierstrassContext(lattice, prec, q, d1, eta1, eta3, s2, area)


@lru_cache(maxsize=32)
def cm_context(field: Field, prec: int) -> WeierstrassContext:
    """Context for L_omega at ``prec`` digits, memoized."""
    return make_context(cm_lattice(field, prec), prec)


def reduce_mod_lattice(z: BigComplex, lattice: Lattice) -> BigComplex:
    """Representative of z mod L with basis coordinates in [-1/2, 1/2)."""
    with mp.workdps(z.prec + GUARD_DIGITS):
        z_r, _, _ = reduce_coordinates(z.value, lattice)
    return BigComplex(z_r, z.prec)


def wp_family(z: BigComplex, ctx: WeierstrassContext) -> tuple[BigComplex, BigComplex, BigComplex]:
    """(wp(z), wp'(z), zeta(z)) on the context lattice."""
    wp, wpp, zeta = ctx.family(z.value)
    return BigComplex(wp, ctx.prec), BigComplex(wpp, ctx.prec), BigComplex(zeta, ctx.prec)


def quasi_invariants(ctx: WeierstrassContext) -> tuple[BigComplex, BigComplex, BigComplex]:
    """(eta1, s2, A) with eta(omega) = 2*eta1 = omega*s2 + conj(omega)/A."""
    return (
        BigComplex(ctx.eta1, ctx.prec),
        BigComplex(ctx.s2, ctx.prec),
        BigComplex(ctx.area, ctx.prec),
    )


def e1star(z: BigComplex, ctx: WeierstrassContext) -> BigComplex:
    """E1*(z, L) = zeta(z) - z*s2(L) - conj(z)/A(L)."""
    return BigComplex(ctx.e1star(z.value), ctx.prec)


def wp_prime_direct(z: mp.mpc, lattice: Lattice, radius: float) -> tuple[mp.mpc, mp.mpf]:
    """wp'(z) = -2 * sum 1/(z - alpha)^3 over |alpha| <= radius, with a tail bound.

    Slow and only as accurate as the tail bound; used to cross-check the theta
    evaluation.
    """
    z = mp.mpc(z)
    u = cm_unit(lattice.field)
    scale = abs(lattice.omega)
    bound = int(mp.ceil(radius / (scale * mp.sqrt(3) / 2))) + 1
    total = mp.mpc(0)
    for m in range(-bound, bound + 1):
        for n in range(-bound, bound + 1):
            alpha = lattice.omega * (m + n * u)
            if abs(alpha) <= radius:
                total += 1 / (z - alpha) ** 3
    a = abs(z)
    gap = radius - a
    tail = 4 * mp.pi / lattice.covolume() * (1 / gap + a / (2 * gap * gap))
    return -2 * total, tail


@lru_cache(maxsize=8)
def unit_context(field: Field, prec: int) -> WeierstrassContext:
    """Context for O_K itself (omega = 1), memoized."""
    return make_context(unit_lattice(field), prec)
