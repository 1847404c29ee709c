"""Exact 2-adic and 3-adic valuations of the L-values and of S*(D).

Numbers known to lie in K = Q(i) or Q(sqrt(-3)) are recognized exactly by lattice
reduction on their real and imaginary parts; algebraic numbers of higher degree
get an annihilating polynomial (over Q, or over K from Galois conjugates) whose
Newton polygon gives the valuation when it has a single slope.

Valuations are normalized with v(2) = 1 on Q(i) and v(3) = 1 on Q(sqrt(-3)).
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass
from enum import StrEnum
from fractions import Fraction
from math import gcd, isqrt

import mpmath as mp
from sympy import ZZ, Poly, factorint, multiplicity, symbols
from sympy.polys.matrices import DomainMatrix

from cmlv.lvalues import (
    Direction,
    LValueResult,
    euler_correct,
    lvalue,
    lvalue_gauss,
    sstar_conjugates,
)
from cmlv.wfunc import GUARD_DIGITS, BigComplex, cm_context
from cmlv.zk_arith import (
    RAMIFIED_PRIME,
    Closure,
    FactoredD,
    Field,
    NotPrimaryRepresentable,
    QuadInt,
    bracket2,
    factor_primary,
    ramified_multiplicity,
    reduce_mod,
    residue_system,
    s1,
    sub_factorization,
    subset_divisor,
)

logger = logging.getLogger(__name__)

DEFAULT_HEIGHT = 10**12
# Digits of scaled coordinates kept below the working precision
SCALE_SLACK = 30
RESIDUAL_SLACK = 20


class RecognitionFailed(RuntimeError):
    """No bounded candidate matched the value at the working precision."""


class PrecisionInsufficient(ValueError):
    """The working precision is too low for the requested height bound."""


class HypothesisViolated(ValueError):
    """D is outside the family covered by the rank prediction."""


@dataclass(frozen=True)
class Valuation:
    """An exact rational valuation, +infinity, or a lower bound with a reason.

    Examples
    --------
    >>> str(Valuation.of(Fraction(3, 4)))
    '3/4'
    >>> Valuation.indeterminate(Fraction(1, 2), "mixed slopes").is_exact
    False
    """

    exact: Fraction | None = None
    lower_bound: Fraction | None = None
    reason: str = ""
    infinite: bool = False

    @classmethod
    def of(cls, value: Fraction | int) -> Valuation:
        return cls(exact=Fraction(value))

    @classmethod
    def indeterminate(cls, lower_bound: Fraction, reason: str) -> Valuation:
        return cls(lower_bound=Fraction(lower_bound), reason=reason)

    @classmethod
    def infinity(cls) -> Valuation:
        return cls(infinite=True, reason="zero")

    @classmethod
    def unknown(cls, reason: str) -> Valuation:
        """No exact value and no bound."""
        return cls(reason=reason)

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    def at_least(self, bound: Fraction) -> bool | None:
        """True/False when the comparison with ``bound`` is decided, else None."""
        if self.infinite:
            return True
        if self.exact is not None:
            return self.exact >= bound
        if self.lower_bound is not None and self.lower_bound >= bound:
            return True
        return None

    def shifted(self, delta: Fraction) -> Valuation:
        if self.infinite:
            return self
        if self.exact is not None:
            return Valuation.of(self.exact + delta)
        lower = None if self.lower_bound is None else self.lower_bound + delta
        return Valuation(lower_bound=lower, reason=self.reason)

    def to_json(self) -> str | dict[str, str | None]:
        if self.infinite:
            return "inf"
        if self.exact is not None:
            return str(self.exact)
        lower = None if self.lower_bound is None else str(self.lower_bound)
        return {"lower_bound": lower, "reason": self.reason}

    def __str__(self) -> str:
        if self.infinite:
            return "inf"
        if self.exact is not None:
            return str(self.exact)
        if self.lower_bound is None:
            return f"unknown ({self.reason})"
        return f">= {self.lower_bound} ({self.reason})"


class RecognizedKind(StrEnum):
    GAUSS_RATIONAL = "gauss_rational"
    EISEN_RATIONAL = "eisen_rational"
    ALGEBRAIC = "algebraic"


@dataclass(frozen=True)
class RecognizedNumber:
    """An exact form found for an approximate value.

    Rational kinds hold ``numerator / denominator`` with the denominator a positive
    rational integer and no common rational factor; the algebraic kind holds an
    integer minimal polynomial, coefficients ascending.
    """

    kind: RecognizedKind
    numerator: QuadInt | None = None
    denominator: int | None = None
    minpoly: tuple[int, ...] | None = None
    verified_at: tuple[int, ...] = ()

    @property
    def field(self) -> Field | None:
        return None if self.numerator is None else self.numerator.field

    @property
    def is_zero(self) -> bool:
        return self.numerator is not None and self.numerator.is_zero

    def to_mpc(self) -> mp.mpc:
        if self.numerator is None or self.denominator is None:
            raise ValueError("Only rational kinds have a direct value")
        return self.numerator.to_mpc() / self.denominator

    def to_json(self) -> dict[str, object]:
        out: dict[str, object] = {"kind": self.kind.value, "verified_at": list(self.verified_at)}
        if self.minpoly is not None:
            out["minpoly"] = [str(c) for c in self.minpoly]
        else:
            out["numerator"] = str(self.numerator)
            out["denominator"] = str(self.denominator)
        return out

    def __str__(self) -> str:
        if self.minpoly is not None:
            return " + ".join(f"{c}*x^{k}" for k, c in enumerate(self.minpoly) if c)
        if self.denominator == 1:
            return str(self.numerator)
        return f"({self.numerator})/{self.denominator}"


def val_exact_in_K(numerator: QuadInt, denominator: int = 1) -> Valuation:
    """v_2 (Gauss) or v_3 (Eisen) of numerator/denominator.

    Examples
    --------
    >>> str(val_exact_in_K(QuadInt.gauss(1, 1)))
    '1/2'
    >>> str(val_exact_in_K(QuadInt.gauss(0, 4)))
    '2'
    """
    if denominator == 0:
        raise ZeroDivisionError("denominator is zero")
    if numerator.is_zero:
        return Valuation.infinity()
    p = RAMIFIED_PRIME[numerator.field]
    return Valuation.of(
        Fraction(ramified_multiplicity(numerator), 2) - multiplicity(p, abs(denominator))
    )


def canonical_fraction(p: QuadInt, q: QuadInt) -> tuple[QuadInt, int]:
    """p/q as (numerator, positive rational denominator) in lowest rational terms."""
    if q.is_zero:
        raise ZeroDivisionError("denominator is zero")
    num, den = p * q.conjugate(), q.norm()
    g = gcd(num.a, num.b, den)
    return QuadInt(p.field, num.a // g, num.b // g), den // g


def required_prec(height: int, terms: int = 4) -> int:
    """Working precision a relation with ``terms`` coefficients up to ``height`` needs."""
    return terms * len(str(abs(height))) + 40


def find_integer_relation(
    vector: list[mp.mpc], prec: int, bound: int
) -> list[int] | None:
    """Integer c with sum c_j v_j ~ 0 and max |c_j| <= bound, by LLL.

    The lattice rows are ``[e_j | 10^s Re v_j | 10^s Im v_j]`` with s = prec - 30;
    a reduced row is accepted when its coefficients respect ``bound`` and the
    residual is below 10^-(prec - 20) times the vector size.
    """
    n = len(vector)
    with mp.workdps(prec + GUARD_DIGITS):
        scale = mp.mpf(10) ** (prec - SCALE_SLACK)
        rows = [
            [int(j == k) for k in range(n)]
            + [int(mp.nint(scale * v.real)), int(mp.nint(scale * v.imag))]
            for j, v in enumerate(vector)
        ]
        matrix = DomainMatrix([[ZZ(x) for x in row] for row in rows], (n, n + 2), ZZ)
        reduced = matrix.lll().to_Matrix().tolist()
        size = max(mp.mpf(1), *(abs(v) for v in vector))
        tol = mp.mpf(10) ** (-(prec - RESIDUAL_SLACK)) * size
        for row in reduced:
            coeffs = [int(c) for c in row[:n]]
            if not any(coeffs) or max(abs(c) for c in coeffs) > bound:
                continue
            residual = abs(mp.fsum(c * v for c, v in zip(coeffs, vector, strict=True)))
            if residual < tol:
                return coeffs
    return None


def _recognize_once(x: mp.mpc, field: Field, prec: int, height: int) -> tuple[QuadInt, int] | None:
    with mp.workdps(prec + GUARD_DIGITS):
        x = mp.mpc(x)
        if abs(x) < mp.mpf(10) ** (-(prec - RESIDUAL_SLACK)):
            return QuadInt(field, 0), 1
        u = QuadInt(field, 0, 1).to_mpc()
        coeffs = find_integer_relation([x, u * x, mp.mpc(-1), -u], prec, height)
    if coeffs is None:
        return None
    a, b, c, d = coeffs
    q = QuadInt(field, a, b)
    if q.is_zero:
        return None
    return canonical_fraction(QuadInt(field, c, d), q)


def _agrees(value: mp.mpc, num: QuadInt, den: int, prec: int) -> bool:
    with mp.workdps(prec + GUARD_DIGITS):
        target = num.to_mpc() / den
        size = max(mp.mpf(1), abs(target))
        return abs(mp.mpc(value) - target) < mp.mpf(10) ** (-(prec - RESIDUAL_SLACK)) * size


def recognize_in_K(
    x: BigComplex,
    field: Field,
    height: int = DEFAULT_HEIGHT,
    refine: Callable[[int], mp.mpc] | None = None,
) -> RecognizedNumber:
    """Find p/q in K with coefficients bounded by ``height`` matching x.

    With ``refine`` the candidate is checked again against the value recomputed at
    twice the precision.

    Examples
    --------
    >>> str(recognize_in_K(BigComplex.of(0.25, 60), Field.GAUSS, height=100))
    '(1)/4'
    """
    needed = required_prec(height)
    if x.prec < needed:
        raise PrecisionInsufficient(f"Recognition up to height {height} needs {needed} digits, have {x.prec}")
    found = _recognize_once(x.value, field, x.prec, height)
    if found is None:
        raise RecognitionFailed(f"No element of {field} with height <= {height} matches {x}")
    num, den = found
    verified = [x.prec]
    if refine is not None:
        again = 2 * x.prec
        if not _agrees(refine(again), num, den, again):
            raise RecognitionFailed(f"Candidate ({num})/{den} fails at {again} digits")
        verified.append(again)
    kind = RecognizedKind.GAUSS_RATIONAL if field is Field.GAUSS else RecognizedKind.EISEN_RATIONAL
    logger.debug(f"Recognized {x} as ({num})/{den}")
    return RecognizedNumber(kind, numerator=num, denominator=den, verified_at=tuple(verified))


_X = symbols("x")


def minpoly_recognize(
    x: BigComplex,
    max_degree: int,
    height: int = DEFAULT_HEIGHT,
    refine: Callable[[int], mp.mpc] | None = None,
) -> RecognizedNumber:
    """Primitive irreducible integer polynomial of least degree annihilating x.

    Examples
    --------
    >>> import mpmath as mp
    >>> with mp.workdps(100):
    ...     r = minpoly_recognize(BigComplex.of(mp.sqrt(2), 100), 2, height=10)
    >>> r.minpoly
    (-2, 0, 1)
    """
    needed = int(max_degree * mp.log10(max(height, 10))) + 60
    if x.prec < needed:
        raise PrecisionInsufficient(f"Degree {max_degree} recognition needs {needed} digits, have {x.prec}")
    with mp.workdps(x.prec + GUARD_DIGITS):
        powers = [mp.mpc(1)]
        for _ in range(max_degree):
            powers.append(powers[-1] * x.value)
        for degree in range(1, max_degree + 1):
            coeffs = find_integer_relation(powers[: degree + 1], x.prec, height)
            if coeffs is None:
                continue
            factors = Poly(list(reversed(coeffs)), _X).factor_list()[1]
            best = min(
                (f for f, _ in factors),
                key=lambda f: abs(mp.polyval([int(c) for c in f.all_coeffs()], x.value)),
            )
            minpoly = tuple(int(c) for c in reversed(best.all_coeffs()))
            if minpoly[-1] < 0:
                minpoly = tuple(-c for c in minpoly)
            verified = [x.prec]
            if refine is not None:
                again = 2 * x.prec
                with mp.workdps(again + GUARD_DIGITS):
                    y = refine(again)
                    residual = abs(mp.polyval(list(reversed(minpoly)), y))
                    size = max(mp.mpf(1), abs(y)) ** len(minpoly)
                    if residual > mp.mpf(10) ** (-(again - RESIDUAL_SLACK)) * size * max(map(abs, minpoly)):
                        raise RecognitionFailed(f"Polynomial {minpoly} fails at {again} digits")
                verified.append(again)
            return RecognizedNumber(RecognizedKind.ALGEBRAIC, minpoly=minpoly, verified_at=tuple(verified))
    raise RecognitionFailed(f"No polynomial of degree <= {max_degree} and height <= {height} found")


def newton_polygon(valuations: list[Fraction | None]) -> list[tuple[Fraction, int]]:
    """Root valuations with multiplicities from coefficient valuations.

    ``valuations[i]`` is v(a_i) for the coefficient of x^i, None for a zero
    coefficient. The lower convex hull of the points (i, v(a_i)) is read left to
    right; a segment of slope s and horizontal length l stands for l roots of
    valuation -s. The result is sorted by root valuation.
    """
    points = [(i, v) for i, v in enumerate(valuations) if v is not None]
    if not points:
        raise ValueError("The zero polynomial has no Newton polygon")
    if points[0][0] != 0:
        raise ValueError("Zero is a root; strip the factor x^k first")
    hull: list[tuple[int, Fraction]] = []
    for p in points:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) > 0:
                break
            hull.pop()
        hull.append(p)
    segments = [
        (-Fraction(y2 - y1) / (x2 - x1), x2 - x1)
        for (x1, y1), (x2, y2) in zip(hull, hull[1:], strict=False)
    ]
    return sorted(segments)


def newton_polygon_Q(coefficients: list[int], p: int) -> list[tuple[Fraction, int]]:
    """Newton polygon of an integer polynomial (coefficients ascending) at p.

    Examples
    --------
    >>> newton_polygon_Q([-2, 0, 1], 2)
    [(Fraction(1, 2), 2)]
    >>> newton_polygon_Q([2, -3, 1], 2)
    [(Fraction(0, 1), 1), (Fraction(1, 1), 1)]
    """
    return newton_polygon([None if c == 0 else Fraction(multiplicity(p, abs(c))) for c in coefficients])


def newton_polygon_K(coefficients: list[RecognizedNumber]) -> list[tuple[Fraction, int]]:
    """Newton polygon over K from recognized K-rational coefficients (ascending)."""
    vals: list[Fraction | None] = []
    for c in coefficients:
        if c.numerator is None or c.denominator is None:
            raise ValueError("Coefficients must be K-rational")
        v = val_exact_in_K(c.numerator, c.denominator)
        vals.append(None if v.infinite else v.exact)
    return newton_polygon(vals)


def valuation_from_polygon(segments: list[tuple[Fraction, int]]) -> Valuation:
    """A single slope gives the valuation; several only give the smallest as a bound."""
    if len(segments) == 1:
        return Valuation.of(segments[0][0])
    return Valuation.indeterminate(min(s for s, _ in segments), "mixed slopes")


def valuation_of_algebraic(
    x: BigComplex,
    p: int,
    max_degree: int = 8,
    height: int = DEFAULT_HEIGHT,
    refine: Callable[[int], mp.mpc] | None = None,
) -> Valuation:
    """v_p(x) through the minimal polynomial over Q and its Newton polygon."""
    rec = minpoly_recognize(x, max_degree, height, refine)
    assert rec.minpoly is not None
    if rec.minpoly[0] == 0:
        return Valuation.infinity()
    return valuation_from_polygon(newton_polygon_Q(list(rec.minpoly), p))


@dataclass(frozen=True)
class KPolynomial:
    """Monic polynomial over K, coefficients ascending."""

    field: Field
    coefficients: tuple[RecognizedNumber, ...]

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1


def _expand(roots: list[mp.mpc]) -> list[mp.mpc]:
    coeffs = [mp.mpc(1)]
    for r in roots:
        shifted = [mp.mpc(0), *coeffs]
        coeffs = [shifted[k] - r * (coeffs[k] if k < len(coeffs) else 0) for k in range(len(shifted))]
    return coeffs


def annihilator_over_K(
    conjugates: list[mp.mpc],
    field: Field,
    prec: int,
    height: int = DEFAULT_HEIGHT,
    refine: Callable[[int], list[mp.mpc]] | None = None,
    max_prec: int | None = None,
) -> KPolynomial:
    """prod (X - s_j) over the conjugates with every coefficient recognized in K.

    Cancellation in the elementary symmetric functions costs about
    log10 prod(1 + |s_j|) digits; when that leaves too little precision (or a
    coefficient is not found) and ``refine`` is given, the conjugates are
    recomputed at double precision up to ``max_prec``.
    """
    max_prec = max_prec or 4 * prec
    current, roots = prec, conjugates
    while True:
        with mp.workdps(current + GUARD_DIGITS):
            coeffs = _expand([mp.mpc(r) for r in roots])
            loss = int(mp.ceil(mp.log10(mp.fprod(1 + abs(r) for r in roots))))
        effective = current - loss
        try:
            recognized = tuple(recognize_in_K(BigComplex(c, effective), field, height) for c in coeffs)
        except (RecognitionFailed, PrecisionInsufficient) as exc:
            if refine is None or 2 * current > max_prec:
                raise
            logger.info(f"⚠️ Annihilator at {current} digits failed ({exc}); retrying at {2 * current}")
            current *= 2
            roots = refine(current)
            continue
        break
    if refine is not None:
        again = 2 * current
        with mp.workdps(again + GUARD_DIGITS):
            check = _expand([mp.mpc(r) for r in refine(again)])
        for c, rec in zip(check, recognized, strict=True):
            assert rec.numerator is not None and rec.denominator is not None
            if not _agrees(c, rec.numerator, rec.denominator, again - loss):
                raise RecognitionFailed(f"Annihilator coefficient {rec} fails at {again} digits")
        recognized = tuple(
            RecognizedNumber(r.kind, r.numerator, r.denominator, verified_at=(current, again))
            for r in recognized
        )
    logger.debug(f"Annihilator of degree {len(coeffs) - 1} over {field} recognized at {current} digits")
    return KPolynomial(field, recognized)


def valuation_via_conjugates(
    conjugates: list[mp.mpc],
    field: Field,
    prec: int,
    height: int = DEFAULT_HEIGHT,
    refine: Callable[[int], list[mp.mpc]] | None = None,
) -> tuple[Valuation, KPolynomial]:
    """Valuation shared by all conjugates when the annihilator polygon is pure."""
    poly = annihilator_over_K(conjugates, field, prec, height, refine)
    zeros = 0
    while zeros < len(poly.coefficients) and poly.coefficients[zeros].is_zero:
        zeros += 1
    if zeros == poly.degree:
        return Valuation.infinity(), poly
    segments = newton_polygon_K(list(poly.coefficients[zeros:]))
    if zeros:
        return Valuation.indeterminate(min(s for s, _ in segments), "zero conjugate"), poly
    return valuation_from_polygon(segments), poly


def _torsion_shift(field: Field) -> mp.mpc:
    return mp.mpc(0, 1) if field is Field.GAUSS else mp.mpc(1)


def torsion_conjugates(d: FactoredD, prec: int) -> list[mp.mpc]:
    """wp(c omega/D) - i (Gauss) or - 1 (Eisen) over the residues mod D up to sign."""
    ctx = cm_context(d.field, prec)
    system = residue_system(d, Closure.NONE)
    seen: set[QuadInt] = set()
    out = []
    with mp.workdps(ctx.dps):
        m = system.modulus.to_mpc()
        for c in system.elements:
            if c in seen:
                continue
            seen.add(reduce_mod(-c, system.modulus))
            out.append(ctx.wp(c.to_mpc() * ctx.omega / m) - _torsion_shift(d.field))
    return out


def wp_torsion_valuation(d: FactoredD, prec: int = 150, height: int = 10**20) -> Valuation:
    """v(wp(c omega/D) - i) (Gauss, expected 3/4) or v(wp(c omega/D) - 1) (Eisen, expected 1/3)."""
    logger.info(f"📊 Torsion valuation for D={d} at {prec} digits")
    val, _ = valuation_via_conjugates(
        torsion_conjugates(d, prec), d.field, prec, height, lambda p: torsion_conjugates(d, p)
    )
    return val


def _lvalue_ratio(d: FactoredD, mask: int, prec: int) -> mp.mpc:
    """L/omega times the root of D_T that puts it in K (times 2 sqrt 3 for Eisen)."""
    plain = euler_correct(lvalue(d, mask, prec), Direction.TO_L)
    ctx = cm_context(d.field, prec)
    d_t = subset_divisor(d, mask).d_t.to_mpc()
    with mp.workdps(ctx.dps):
        if d.field is Field.GAUSS:
            return plain.value.value * mp.root(d_t, 4) / ctx.omega
        return plain.value.value * 2 * mp.sqrt(3) * mp.root(d_t, 3) / ctx.omega


def recognize_lvalue(
    result: LValueResult, height: int = DEFAULT_HEIGHT, verify: bool = True
) -> RecognizedNumber:
    """The K-element L(psi_bar, 1) * root(D_T) / omega (Gauss) or the Eisen analogue."""
    d, mask = result.d, result.subset.mask
    x = BigComplex(_lvalue_ratio(d, mask, result.prec), result.prec)
    refine = (lambda p: _lvalue_ratio(d, mask, p)) if verify else None
    return recognize_in_K(x, d.field, height, refine)


def v_of_lvalue(
    result: LValueResult, height: int = DEFAULT_HEIGHT, verify: bool = True
) -> Valuation:
    """v_2(L/omega) or v_3(L/omega) of the plain L-value behind ``result``.

    The roots of D_T are units at the ramified prime, so only 2 sqrt 3 contributes
    a shift (v_3 = 1/2).
    """
    val = lvalue_valuation(recognize_lvalue(result, height, verify))
    logger.debug(f"v(L/omega) for D={result.d}, T={result.subset.label}: {val}")
    return val


def lvalue_valuation(rec: RecognizedNumber) -> Valuation:
    """v(L/omega) from the recognized K-element of :func:`recognize_lvalue`."""
    if rec.numerator is None or rec.denominator is None:
        raise ValueError("Expected a K-rational recognition")
    val = val_exact_in_K(rec.numerator, rec.denominator)
    if rec.numerator.field is Field.EISEN:
        val = val.shifted(Fraction(-1, 2))
    return val


def sstar_valuation(
    d: FactoredD, prec: int, height: int = DEFAULT_HEIGHT
) -> tuple[Valuation, KPolynomial]:
    """v(S*(D)) from the annihilator of its K-conjugates."""
    val, poly = valuation_via_conjugates(
        sstar_conjugates(d, prec), d.field, prec, height, lambda p: sstar_conjugates(d, p)
    )
    if d.field is Field.EISEN:
        # the conjugates are those of S*/sqrt(3)
        val = val.shifted(Fraction(1, 2))
    return val, poly


class Verdict(StrEnum):
    DELTA_ONE = "delta=1"
    DELTA_ZERO = "delta=0"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class SubsetRow:
    mask: int
    label: str
    t: int
    sstar_valuation: Valuation
    epsilon: int | None
    delta: int | None


@dataclass(frozen=True)
class DeltaCertificate:
    """Every epsilon and delta of the subset divisors of D, with the bracket weights.

    ``brackets`` holds (mask_T, mask_U, product over k in T minus U of [D_U/pi_k]_2)
    for every non-empty proper U of T.
    """

    d: FactoredD
    rows: tuple[SubsetRow, ...]
    s1: tuple[int, ...]
    brackets: tuple[tuple[int, int, int], ...]
    delta: int | None
    verdict: Verdict

    def row(self, mask: int) -> SubsetRow:
        return next(r for r in self.rows if r.mask == mask)

    def recompute_delta(self) -> dict[int, int | None]:
        """Run the recursion again from the stored epsilons, s1 and brackets."""
        return _delta_recursion(
            self.d.n,
            {r.mask: r.epsilon for r in self.rows},
            self.s1,
            {(t, u): w for t, u, w in self.brackets},
        )

    def is_consistent(self) -> bool:
        return self.recompute_delta() == {r.mask: r.delta for r in self.rows}

    def to_json(self) -> dict[str, object]:
        return {
            "D": str(self.d),
            "n": self.d.n,
            "s1": list(self.s1),
            "delta": self.delta,
            "verdict": self.verdict.value,
            "subsets": [
                {
                    "T": r.label,
                    "t": r.t,
                    "v_sstar": r.sstar_valuation.to_json(),
                    "epsilon": r.epsilon,
                    "delta": r.delta,
                }
                for r in self.rows
            ],
            "brackets": [{"T": t, "U": u, "weight": w} for t, u, w in self.brackets],
        }


def epsilon_from_valuation(val: Valuation, t: int) -> int | None:
    """1 when v(S*(D_T)) = (t-1)/2, 0 when it is larger, None when undecided."""
    target = Fraction(t - 1, 2)
    if val.infinite:
        return 0
    if val.exact is not None:
        if val.exact < target:
            logger.warning(f"❌ v(S*) = {val.exact} is below the bound {target}")
            return None
        return 1 if val.exact == target else 0
    if val.lower_bound is not None and val.lower_bound > target:
        return 0
    return None


def _delta_recursion(
    n: int,
    epsilons: dict[int, int | None],
    s1_values: tuple[int, ...],
    brackets: dict[tuple[int, int], int],
) -> dict[int, int | None]:
    deltas: dict[int, int | None] = {}
    for mask in sorted(range(1, 1 << n), key=lambda m: (m.bit_count(), m)):
        eps = epsilons[mask]
        if eps is None:
            deltas[mask] = None
            continue
        if mask.bit_count() == 1:
            deltas[mask] = s1_values[mask.bit_length() - 1] ^ eps
            continue
        acc: int | None = eps
        sub = (mask - 1) & mask
        while sub:
            if brackets[(mask, sub)]:
                inner = deltas[sub]
                if inner is None or acc is None:
                    acc = None
                    break
                acc ^= inner
            sub = (sub - 1) & mask
        deltas[mask] = acc
    return deltas


def _brackets(d: FactoredD) -> dict[tuple[int, int], int]:
    out: dict[tuple[int, int], int] = {}
    for mask in range(1, 1 << d.n):
        sub = (mask - 1) & mask
        while sub:
            d_u = subset_divisor(d, sub).d_t
            weight = 1
            for k in range(d.n):
                if mask >> k & 1 and not sub >> k & 1:
                    weight &= bracket2(d_u, d.primes[k][0])
            out[(mask, sub)] = weight
            sub = (sub - 1) & mask
    return out


def epsilon_delta(
    d: FactoredD, prec: int | None = None, height: int = DEFAULT_HEIGHT
) -> DeltaCertificate:
    """Evaluate epsilon_t(D_T) and delta_t(D_T) for every non-empty subset T."""
    if d.field is not Field.GAUSS or not d.is_square_free or d.n < 1:
        raise ValueError("epsilon/delta need a square-free Gaussian D with n >= 1")
    prec = prec or (300 if d.n >= 3 else 120)
    rows_val: dict[int, Valuation] = {}
    epsilons: dict[int, int | None] = {}
    for mask in range(1, 1 << d.n):
        sub_d = sub_factorization(d, mask)
        t = mask.bit_count()
        try:
            val, _ = sstar_valuation(sub_d, prec, height)
        except (RecognitionFailed, PrecisionInsufficient) as exc:
            logger.warning(f"⚠️ S*({sub_d}) valuation not found: {exc}")
            val = Valuation.unknown("not recognized")
        rows_val[mask] = val
        epsilons[mask] = epsilon_from_valuation(val, t)
        logger.info(f"T={subset_divisor(d, mask).label}: v(S*)={val}, epsilon={epsilons[mask]}")
    s1_values = tuple(s1(pi) for pi in d.prime_list)
    brackets = _brackets(d)
    deltas = _delta_recursion(d.n, epsilons, s1_values, brackets)
    rows = tuple(
        SubsetRow(
            mask=m,
            label=subset_divisor(d, m).label,
            t=m.bit_count(),
            sstar_valuation=rows_val[m],
            epsilon=epsilons[m],
            delta=deltas[m],
        )
        for m in sorted(rows_val)
    )
    final = deltas[d.full_mask]
    verdict = Verdict.UNDECIDED if final is None else Verdict.DELTA_ONE if final else Verdict.DELTA_ZERO
    return DeltaCertificate(
        d=d,
        rows=rows,
        s1=s1_values,
        brackets=tuple((t, u, w) for (t, u), w in sorted(brackets.items())),
        delta=final,
        verdict=verdict,
    )


def sstar_quartic(d: FactoredD, rec: RecognizedNumber) -> list[QuadInt]:
    """Integral quartic over Z[i] (coefficients ascending) with S*(pi) among its roots.

    With one prime, S*(pi) = r + b where b = (pi - N(pi))/4 and r = X pi^(3/4)/mu,
    X = L(psi_bar_pi, 1) pi^(1/4)/omega the recognized K-element and mu a fourth
    root of unity. So (x - b)^4 = X^4 pi^3; the coefficients are scaled by 256 q^4
    for X = p/q.
    """
    if rec.numerator is None or rec.denominator is None:
        raise ValueError("Expected a K-rational recognition")
    pi = d.value
    beta, p, q4 = pi - pi.norm(), rec.numerator, rec.denominator**4
    return [
        beta**4 * q4 - 256 * p**4 * pi**3,
        -16 * q4 * beta**3,
        96 * q4 * beta**2,
        -256 * q4 * beta,
        QuadInt.gauss(256 * q4),
    ]


def epsilon_from_identity(
    d: FactoredD, prec: int | None = None, height: int = DEFAULT_HEIGHT
) -> int | None:
    """epsilon_1(pi) back-solved from the subset identity and the exact L-value.

    v(S*(pi)) is read off the Newton polygon of :func:`sstar_quartic`, which only
    needs the recognized L(psi_bar_pi, 1); mixed slopes leave epsilon undecided.
    """
    if d.field is not Field.GAUSS or d.n != 1 or not d.is_square_free:
        raise ValueError("The back-solve is for a single Gaussian prime")
    rec = recognize_lvalue(lvalue_gauss(d, d.full_mask, prec), height)
    vals = [val_exact_in_K(c) for c in sstar_quartic(d, rec)]
    if vals[0].infinite:
        segments = newton_polygon([v.exact for v in vals[1:]])
        val = Valuation.indeterminate(min(s for s, _ in segments), "zero conjugate")
    else:
        val = valuation_from_polygon(newton_polygon([None if v.infinite else v.exact for v in vals]))
    logger.debug(f"v(S*({d})) from the identity: {val}")
    return epsilon_from_valuation(val, 1)


@dataclass(frozen=True)
class ClaimCheck:
    """One valuation claim: the computed value against its lower bound."""

    name: str
    valuation: Valuation
    bound: Fraction
    holds: bool | None
    equality_consistent: bool | None = None

    def to_json(self) -> dict[str, object]:
        return {
            "claim": self.name,
            "valuation": self.valuation.to_json(),
            "bound": str(self.bound),
            "bound_holds": self.holds,
            "equality_consistent": self.equality_consistent,
        }


@dataclass(frozen=True)
class VerificationReport:
    d: FactoredD
    checks: tuple[ClaimCheck, ...]
    certificate: DeltaCertificate | None = None

    @property
    def violated(self) -> bool:
        return any(c.holds is False or c.equality_consistent is False for c in self.checks)

    @property
    def undecided(self) -> bool:
        return any(c.holds is None for c in self.checks) or (
            self.certificate is not None and self.certificate.verdict is Verdict.UNDECIDED
        )

    def to_json(self) -> dict[str, object]:
        return {
            "D": str(self.d),
            "field": self.d.field.value,
            "checks": [c.to_json() for c in self.checks],
            "certificate": None if self.certificate is None else self.certificate.to_json(),
            "violated": self.violated,
        }


def _check(name: str, val: Valuation, bound: Fraction, consistent: bool | None = None) -> ClaimCheck:
    holds = val.at_least(bound)
    marker = "✅" if holds else "❌" if holds is False else "⚠️"
    logger.info(f"{marker} {name}: v={val}, bound {bound}")
    return ClaimCheck(name, val, bound, holds, consistent)


def _recognized_or_unknown(compute: Callable[[], Valuation], what: str) -> Valuation:
    try:
        return compute()
    except (RecognitionFailed, PrecisionInsufficient) as exc:
        logger.warning(f"⚠️ {what} not recognized: {exc}")
        return Valuation.unknown("not recognized")


def verify_theorems(
    d: FactoredD,
    prec: int | None = None,
    height: int = DEFAULT_HEIGHT,
    with_delta: bool = True,
    with_torsion: bool = False,
) -> VerificationReport:
    """Check every valuation bound that applies to D and return one line per claim.

    A value that cannot be recognized at ``prec`` leaves its claim undecided.
    """
    n = d.n
    checks: list[ClaimCheck] = []
    certificate = None
    full = lvalue(d, d.full_mask, prec)
    v_full = _recognized_or_unknown(lambda: v_of_lvalue(full, height), f"L-value for D={d}")
    if d.field is Field.GAUSS and d.is_square_free:
        bound = Fraction(n - 1, 2)
        consistent = None
        if with_delta:
            certificate = epsilon_delta(d, full.prec, height)
            if certificate.delta is not None and v_full.is_exact:
                consistent = (v_full.exact == bound) == (certificate.delta == 1)
            checks.append(_check("sstar_bound", certificate.row(d.full_mask).sstar_valuation, bound))
            eps = certificate.rows[0].epsilon
            if n == 1 and eps is not None and v_full.is_exact:
                backsolved = epsilon_from_identity(d, full.prec, height)
                agree = None if backsolved is None else backsolved == eps
                checks.append(ClaimCheck("epsilon_paths_agree", v_full, bound, v_full.at_least(bound), agree))
        checks.insert(0, _check("lvalue_bound", v_full, bound, consistent))
    elif d.field is Field.GAUSS:
        checks.append(_check("squared_lvalue_bound", v_full, Fraction(n, 2) - 1))
    else:
        checks.append(_check("eisen_lvalue_bound", v_full, Fraction(n, 2) - 1))
        if d.is_square_free:
            v_star = _recognized_or_unknown(lambda: sstar_valuation(d, full.prec, height)[0], f"S*({d})")
            checks.append(_check("eisen_sstar_bound", v_star, Fraction(n - 1, 2)))
    if with_torsion and d.is_square_free:
        expected = Fraction(3, 4) if d.field is Field.GAUSS else Fraction(1, 3)
        val = _recognized_or_unknown(lambda: wp_torsion_valuation(d), f"Torsion values for D={d}")
        checks.append(_check("torsion_valuation", val, expected, val.exact == expected if val.is_exact else None))
    return VerificationReport(d, tuple(checks), certificate)


@dataclass(frozen=True)
class BsdReport:
    """Rank prediction for y^2 = x^3 - Dx from delta_n(D), with a naive point search."""

    d_int: int
    d: FactoredD
    certificate: DeltaCertificate
    predicted_rank_zero: bool
    points: tuple[tuple[Fraction, Fraction], ...] = ()

    @property
    def contradicted(self) -> bool:
        return self.predicted_rank_zero and bool(self.points)

    @property
    def message(self) -> str:
        if self.certificate.verdict is Verdict.UNDECIDED:
            return "delta undecided: no prediction"
        if self.predicted_rank_zero:
            return "predicted rank 0, L(1) != 0 (conditional)"
        return "delta = 0: no prediction"

    def to_json(self) -> dict[str, object]:
        return {
            "D": self.d_int,
            "gaussian_factorization": str(self.d),
            "certificate": self.certificate.to_json(),
            "predicted_rank_zero": self.predicted_rank_zero,
            "message": self.message,
            "points": [[str(x), str(y)] for x, y in self.points],
        }


def validate_bsd_hypothesis(d_int: int) -> FactoredD:
    """Square-free D = 1 mod 4 with no prime factor = 5 mod 8, factored over Z[i]."""
    if d_int in (0, 1, -1):
        raise HypothesisViolated(f"D={d_int} has no prime factor")
    if d_int % 4 != 1:
        raise HypothesisViolated(f"D={d_int} is not 1 mod 4")
    primes = factorint(abs(d_int))
    if any(e > 1 for e in primes.values()):
        raise HypothesisViolated(f"D={d_int} is not square-free")
    if bad := [p for p in primes if p % 8 == 5]:
        raise HypothesisViolated(f"D={d_int} has prime factors = 5 mod 8: {bad}")
    try:
        d = factor_primary(QuadInt.gauss(d_int))
    except NotPrimaryRepresentable as exc:
        raise HypothesisViolated(str(exc)) from exc
    if d.unit != QuadInt.gauss(1):
        raise HypothesisViolated(f"D={d_int} is {d.unit} times a product of primary primes")
    return d


def rational_points(d_int: int, denominator_bound: int = 12, numerator_bound: int = 500) -> list[tuple[Fraction, Fraction]]:
    """Points (a/b^2, c/b^3) with y != 0 on y^2 = x^3 - Dx, by brute force."""
    found: list[tuple[Fraction, Fraction]] = []
    for b in range(1, denominator_bound + 1):
        b4 = b**4
        for a in range(-numerator_bound, numerator_bound + 1):
            if gcd(a, b) != 1:
                continue
            rhs = a**3 - d_int * a * b4
            if rhs <= 0:
                continue
            c = isqrt(rhs)
            if c * c == rhs:
                found.append((Fraction(a, b * b), Fraction(c, b**3)))
    return found


def bsd_report(
    d_int: int,
    prec: int | None = None,
    height: int = DEFAULT_HEIGHT,
    search: bool = True,
) -> BsdReport:
    """delta_n(D) for the Gaussian factorization of a rational D and the rank prediction."""
    d = validate_bsd_hypothesis(d_int)
    logger.info(f"🚀 Rank prediction for D={d_int} = {d}")
    certificate = epsilon_delta(d, prec, height)
    predicted = certificate.delta == 1
    points = tuple(rational_points(d_int)) if search else ()
    report = BsdReport(d_int, d, certificate, predicted, points)
    if report.contradicted:
        logger.error(f"❌ D={d_int}: rank 0 predicted but found {points[0]}")
    return report
