"""Truncated Laurent series at a center of the projective line.

A ``Series`` stores raw representatives ``coeffs[k]`` of the values
``coeffs[k] / p**den`` attached to the exponent ``val + k`` of the local
parameter (t - lam at a finite center, u = 1/t at infinity).  Every value is
known modulo ``p**prec`` (absolute precision); the representatives live in
W/p^(prec + den).  ``exact`` marks a finite polynomial whose coefficients past
the stored ones are known to vanish.
"""

from __future__ import annotations

import logging
import math
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Sequence

from .errors import (
    BadConstantTerm,
    CenterMismatch,
    CoincidentCenters,
    IndicialObstruction,
    InsufficientAnalyticPrecision,
    NonUnitConstantTerm,
    PoleOrderTooLarge,
    PrecisionExhausted,
)
from .padic import FieldSpec, KCoefficient, PadicElement, teichmuller_lift

log = logging.getLogger(__name__)


@lru_cache(maxsize=4096)
def _teich_rep(field: FieldSpec, residue: tuple, prec: int):
    return teichmuller_lift(field, residue, prec).rep


class Center:
    """A point of the projective line: a finite p-adic value or infinity."""

    __slots__ = ("field", "residue", "_value", "is_infinity")

    def __init__(self, field: FieldSpec, residue=None, value: PadicElement | None = None,
                 is_infinity: bool = False):
        self.field = field
        self.is_infinity = is_infinity
        self._value = value
        if residue is not None:
            residue = field.gf.elt(residue)
        elif value is not None:
            residue = value.residue()
        self.residue = residue

    @classmethod
    def teichmuller(cls, field: FieldSpec, residue) -> "Center":
        return cls(field, residue=residue)

    @classmethod
    def at(cls, value: PadicElement) -> "Center":
        return cls(value.field, value=value)

    @classmethod
    def infinity(cls, field: FieldSpec) -> "Center":
        return cls(field, is_infinity=True)

    def rep(self, R):
        """Representative of the center in the ring R."""
        if self.is_infinity:
            raise ValueError("infinity has no finite value")
        if self._value is None:
            return R.reduce(_teich_rep(self.field, self.residue, R.prec))
        if self._value.prec < R.prec:
            raise PrecisionExhausted("center known to lower precision than requested")
        return R.reduce(self._value.rep)

    def value(self, prec: int) -> PadicElement:
        R = self.field.ring(prec)
        return PadicElement(R, self.rep(R))

    @property
    def key(self):
        if self.is_infinity:
            return ("inf",)
        if self._value is None:
            return ("teich", self.residue)
        return ("value", self._value.rep, self._value.prec)

    def __eq__(self, other):
        return isinstance(other, Center) and self.field == other.field and self.key == other.key

    def __hash__(self):
        return hash((self.field, self.key))

    def __repr__(self):
        if self.is_infinity:
            return "Center(oo)"
        r = self.residue if self.field.n > 1 else self.residue[0]
        return f"Center({r})"


def _to_raw(field: FieldSpec, x, prec: int):
    """Convert a scalar to (rep, den) with the value known mod p^prec."""
    if isinstance(x, KCoefficient):
        if x.is_zero():
            return field.ring(prec).zero, 0
        den = max(0, -x.val)
        return x.raw(den, prec), den
    if isinstance(x, PadicElement):
        return field.ring(prec).reduce(x.rep), 0
    if isinstance(x, tuple):
        return field.ring(prec).reduce(x), 0
    return _to_raw(field, KCoefficient.from_fraction(field, Fraction(x), prec), prec)


class Series:
    __slots__ = ("field", "center", "val", "coeffs", "den", "prec", "exact")

    def __init__(self, field: FieldSpec, center: Center, val: int, coeffs: list, den: int,
                 prec: int, exact: bool = False):
        self.field = field
        self.center = center
        self.val = val
        self.coeffs = coeffs
        self.den = den
        self.prec = prec
        self.exact = exact

    # construction
    @classmethod
    def from_scalars(cls, center: Center, values: Sequence, prec: int, val: int = 0,
                     exact: bool = False) -> "Series":
        """Build from ints / Fractions / KCoefficients / PadicElements."""
        field = center.field
        raws = [_to_raw(field, x, prec) for x in values]
        den = max((d for _, d in raws), default=0)
        R = field.ring(prec + den)
        coeffs = [R.mul_p(R.reduce(r), den - d) for r, d in raws]
        return cls(field, center, val, coeffs, den, prec, exact)

    @classmethod
    def zero(cls, center: Center, length: int, prec: int, val: int = 0) -> "Series":
        R = center.field.ring(prec)
        return cls(center.field, center, val, [R.zero] * length, 0, prec)

    @classmethod
    def constant(cls, center: Center, c, prec: int, length: int | None = None) -> "Series":
        if length is None:
            return cls.from_scalars(center, [c], prec, exact=True)
        s = cls.from_scalars(center, [c], prec, exact=True)
        return s.extend(length)

    # basic queries
    @property
    def ring(self):
        return self.field.ring(self.prec + self.den)

    def __len__(self):
        return len(self.coeffs)

    @property
    def top(self) -> int:
        """First exponent not stored."""
        return self.val + len(self.coeffs)

    def __repr__(self):
        terms = []
        for k in range(len(self.coeffs)):
            c = self.coeff(self.val + k)
            if not c.is_zero():
                terms.append(f"{_fmt(c)}*z^{self.val + k}")
        tail = "" if self.exact else f" + O(z^{self.top})"
        return f"Series[{self.center}]({' + '.join(terms) or '0'}{tail}; prec {self.prec})"

    def coeff(self, e: int) -> KCoefficient:
        k = e - self.val
        if k < 0 or (k >= len(self.coeffs) and self.exact):
            return KCoefficient.zero(self.field, self.prec + 64)
        if k >= len(self.coeffs):
            raise IndexError(f"exponent {e} beyond truncation")
        return KCoefficient.from_raw(self.field, self.coeffs[k], self.den, self.prec)

    def kcoeffs(self) -> list[KCoefficient]:
        return [KCoefficient.from_raw(self.field, c, self.den, self.prec) for c in self.coeffs]

    def raw_at(self, e: int):
        k = e - self.val
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        if k < 0 or self.exact:
            return self.ring.zero
        raise IndexError(f"exponent {e} beyond truncation")

    def min_valuation(self) -> int:
        R = self.ring
        v = min((R.valuation(c) for c in self.coeffs), default=R.prec)
        return v - self.den

    def is_zero(self) -> bool:
        R = self.ring
        return all(R.is_zero(c) for c in self.coeffs)

    # precision manipulation
    def copy(self, **kw) -> "Series":
        d = dict(field=self.field, center=self.center, val=self.val, coeffs=self.coeffs,
                 den=self.den, prec=self.prec, exact=self.exact)
        d.update(kw)
        return Series(**d)

    def with_den(self, den: int) -> "Series":
        if den == self.den:
            return self
        if den < self.den:
            raise ValueError("use normalize() to lower the denominator")
        R = self.field.ring(self.prec + den)
        sh = den - self.den
        return self.copy(coeffs=[R.mul_p(R.reduce(c), sh) for c in self.coeffs], den=den)

    def normalize(self) -> "Series":
        """Lower den as far as the representatives allow."""
        if self.den == 0:
            return self
        R = self.ring
        v = min((R.valuation(c) for c in self.coeffs), default=R.prec)
        s = min(v, self.den)
        if s == 0:
            return self
        R2 = self.field.ring(self.prec + self.den - s)
        return self.copy(coeffs=[R2.reduce(R.div_p(c, s)) for c in self.coeffs], den=self.den - s)

    def with_prec(self, prec: int) -> "Series":
        if prec >= self.prec:
            return self
        R = self.field.ring(prec + self.den)
        return self.copy(coeffs=[R.reduce(c) for c in self.coeffs], prec=prec)

    def truncate(self, length: int) -> "Series":
        """Keep the first ``length`` stored coefficients."""
        if length >= len(self.coeffs) and not self.exact:
            return self
        if length <= len(self.coeffs):
            return self.copy(coeffs=self.coeffs[:length], exact=False)
        return self.extend(length).copy(exact=False)

    def truncate_top(self, top: int) -> "Series":
        """Keep exponents < top."""
        return self.truncate(max(top - self.val, 0))

    def extend(self, length: int) -> "Series":
        """Pad an exact series with explicit zeros up to ``length`` entries."""
        if length <= len(self.coeffs):
            return self
        if not self.exact:
            raise PrecisionExhausted("cannot extend a truncated series")
        return self.copy(coeffs=self.coeffs + [self.ring.zero] * (length - len(self.coeffs)))

    def window(self, lo: int, hi: int) -> "Series":
        """Coefficients for exponents lo..hi-1 (zero-filled below val)."""
        R = self.ring
        out = []
        for e in range(lo, hi):
            out.append(self.raw_at(e))
        return self.copy(val=lo, coeffs=out, exact=False)

    def shift(self, k: int) -> "Series":
        """Multiply by z^k."""
        return self.copy(val=self.val + k)

    # arithmetic
    def _check(self, other: "Series"):
        if self.center != other.center:
            raise CenterMismatch(f"{self.center} vs {other.center}")

    def __add__(self, other):
        if not isinstance(other, Series):
            return self + Series.constant(self.center, other, self.prec)
        self._check(other)
        prec = min(self.prec, other.prec)
        den = max(self.den, other.den)
        lo = min(self.val, other.val)
        if self.exact and other.exact:
            hi, exact = max(self.top, other.top), True
        else:
            hi = min(s.top for s in (self, other) if not s.exact)
            exact = False
        R = self.field.ring(prec + den)
        sa, sb = den - self.den, den - other.den
        out = []
        for e in range(lo, hi):
            x = self.raw_at(e)
            y = other.raw_at(e)
            out.append(R.add(R.mul_p(R.reduce(x), sa), R.mul_p(R.reduce(y), sb)))
        return Series(self.field, self.center, lo, out, den, prec, exact)

    __radd__ = __add__

    def __neg__(self):
        R = self.ring
        return self.copy(coeffs=[R.neg(c) for c in self.coeffs])

    def __sub__(self, other):
        if not isinstance(other, Series):
            return self + (-Series.constant(self.center, other, self.prec))
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Series):
            return self.scale(other)
        return series_mul(self, other)

    __rmul__ = __mul__

    def scale(self, x) -> "Series":
        """Multiply by a scalar (int, Fraction, KCoefficient, PadicElement)."""
        if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
            x = Fraction(x)
            if x.denominator % self.field.p and x.numerator % self.field.p:
                R = self.ring
                k = R.from_fraction(x)
                return self.copy(coeffs=[R.mul(c, k) for c in self.coeffs])
        prec = self.prec + 64 if not isinstance(x, (KCoefficient, PadicElement)) else \
            (x.prec if isinstance(x, KCoefficient) else x.prec)
        return series_mul(self, Series.from_scalars(self.center, [x], max(prec, 1), exact=True))

    def sigma(self, k: int = 1) -> "Series":
        if self.field.n == 1:
            return self
        R = self.ring
        return self.copy(coeffs=[R.sigma_power(c, k) for c in self.coeffs])

    def derivative(self) -> "Series":
        """d/dz (z the local parameter)."""
        R = self.ring
        out = [R.scal(c, self.val + k) for k, c in enumerate(self.coeffs)]
        if self.val == 0:
            out = out[1:]
            return self.copy(val=0, coeffs=out)
        return self.copy(val=self.val - 1, coeffs=out)

    def equals(self, other: "Series", prec: int | None = None) -> bool:
        d = self - other
        if prec is not None:
            d = d.with_prec(min(prec, d.prec))
        return d.is_zero()

    def valuation_profile(self) -> list[int]:
        """p-adic valuation of each stored coefficient (prec if zero)."""
        R = self.ring
        return [R.valuation(c) - self.den for c in self.coeffs]


TruncatedSeries = Series
PrincipalPart = Series


def _fmt(c: KCoefficient) -> str:
    if c.field.n > 1:
        return repr(c)
    v = c.val
    u = c.field.ring(c.relprec).balanced(c.unit)
    return f"{u}*{c.field.p}^{v}" if v else f"{u}"


class LaurentLocal(NamedTuple):
    principal: Series
    analytic: Series

    @property
    def center(self):
        return self.analytic.center

    def total(self) -> Series:
        return self.principal + self.analytic


# --------------------------------------------------------------------------
# operations


def series_mul(a: Series, b: Series, length: int | None = None) -> Series:
    a._check(b)
    den = a.den + b.den
    prec = min(a.prec - b.den, b.prec - a.den)
    if prec <= 0:
        raise PrecisionExhausted("product has no significant digits left")
    if a.exact and b.exact:
        L, exact = len(a) + len(b) - 1, True
    elif a.exact:
        L, exact = len(b), False
    elif b.exact:
        L, exact = len(a), False
    else:
        L, exact = min(len(a), len(b)), False
    if length is not None and length < L:
        L, exact = length, False
    L = max(L, 0)
    R = a.field.ring(prec + den)
    ca = [R.reduce(c) for c in a.coeffs[:L]]
    cb = [R.reduce(c) for c in b.coeffs[:L]]
    out = R.poly_mul(ca, cb, L) if ca and cb else [R.zero] * L
    return Series(a.field, a.center, a.val + b.val, out, den, prec, exact)


def series_invert(a: Series, length: int | None = None) -> Series:
    """1/a by Newton iteration; a must have a unit leading coefficient."""
    a = a.normalize()
    if a.den:
        raise NonUnitConstantTerm("series is not integral")
    if not a.coeffs:
        raise NonUnitConstantTerm("empty series")
    R = a.ring
    L = length if length is not None else len(a)
    if not a.exact and L > len(a):
        raise PrecisionExhausted("requested length exceeds input truncation")
    if not R.is_unit(a.coeffs[0]):
        raise NonUnitConstantTerm("constant term is not a unit")
    src = a.coeffs + [R.zero] * max(0, L - len(a.coeffs))
    x = [R.inv(src[0])]
    two = R.from_int(2)
    cur = 1
    while cur < L:
        cur = min(2 * cur, L)
        ax = R.poly_mul(src[:cur], x, cur)
        e = [R.neg(t) for t in ax]
        e[0] = R.add(e[0], two)
        x = R.poly_mul(x, e, cur)
    return Series(a.field, a.center, -a.val, x[:L], 0, a.prec)


def _scalar_inv_sqrt(R, a0):
    """1/sqrt(a0) for a0 = 1 mod p, by Newton."""
    half = R.inv(R.from_int(2))
    three = R.from_int(3)
    z = R.one
    k = 1
    while k < R.prec:
        z = R.mul(R.mul(z, R.sub(three, R.mul(a0, R.mul(z, z)))), half)
        k *= 2
    return z


def series_sqrt(a: Series, length: int | None = None) -> Series:
    """Square root with constant term 1 mod p (Newton on the inverse root)."""
    a = a.normalize()
    if a.den or a.val != 0 or not a.coeffs:
        raise BadConstantTerm("sqrt needs an integral power series")
    R = a.ring
    if not R.is_zero(R.sub(R.reduce(a.coeffs[0]), R.one)) and R.valuation(R.sub(a.coeffs[0], R.one)) < 1:
        raise BadConstantTerm("constant term is not 1 mod p")
    L = length if length is not None else len(a)
    if not a.exact and L > len(a):
        raise PrecisionExhausted("requested length exceeds input truncation")
    src = a.coeffs + [R.zero] * max(0, L - len(a.coeffs))
    half = R.inv(R.from_int(2))
    z = [_scalar_inv_sqrt(R, src[0])]
    cur = 1
    while cur < L:
        cur = min(2 * cur, L)
        # z <- z + z (1 - a z^2) / 2
        z2 = R.poly_mul(z, z, cur)
        az2 = R.poly_mul(src[:cur], z2, cur)
        e = [R.neg(t) for t in az2]
        e[0] = R.add(e[0], R.one)
        corr = R.poly_mul(z, e, cur)
        z = [R.add(zi, R.mul(ci, half)) for zi, ci in zip(z + [R.zero] * (cur - len(z)), corr)]
    y = R.poly_mul(src[:L], z, L)
    return Series(a.field, a.center, 0, y, 0, a.prec)


def series_pow(a: Series, e: int, length: int | None = None) -> Series:
    """a^e for e >= 0 by binary powering."""
    if e < 0:
        return series_pow(series_invert(a, length), -e, length)
    result = Series.constant(a.center, 1, a.prec)
    base = a
    while e:
        if e & 1:
            result = series_mul(result, base, length)
        e >>= 1
        if e:
            base = series_mul(base, base, length)
    return result


def poly_to_raw(field: FieldSpec, poly: Sequence, prec: int):
    """Polynomial (list of scalars, low degree first) to (reps, den)."""
    s = Series.from_scalars(Center.infinity(field), poly, prec, exact=True)
    return s.coeffs, s.den


def _shift_raw(R, coeffs: list, lam) -> list:
    # coefficients of f(lam + s) by Horner; exact
    out: list = []
    for c in reversed(coeffs):
        new = [R.zero] * (len(out) + 1)
        for i, x in enumerate(out):
            new[i] = R.add(new[i], R.mul(x, lam))
            new[i + 1] = R.add(new[i + 1], x)
        new[0] = R.add(new[0], c)
        out = new
    return out


def taylor_shift(poly: Sequence, lam, P1: int | None = None, prec: int | None = None) -> Series:
    """Coefficients of poly(t + lam) as a series at lam, truncated to P1 terms.

    ``lam`` is a PadicElement or a finite Center.
    """
    center = lam if isinstance(lam, Center) else Center.at(lam)
    if prec is None:
        prec = lam.prec if isinstance(lam, PadicElement) else 20
    field = center.field
    reps, den = poly_to_raw(field, poly, prec)
    R = field.ring(prec + den)
    out = _shift_raw(R, [R.reduce(c) for c in reps], center.rep(R))
    s = Series(field, center, 0, out, den, prec, exact=True)
    return s if P1 is None else s.truncate(P1) if P1 < len(out) else s


def local_poly(field: FieldSpec, poly: Sequence, center: Center, prec: int) -> Series:
    """A polynomial in t written in the local parameter at ``center`` (exact)."""
    if center.is_infinity:
        # t^k = u^(-k)
        reps, den = poly_to_raw(field, poly, prec)
        d = len(reps) - 1
        return Series(field, center, -d, list(reversed(reps)), den, prec, exact=True)
    return taylor_shift(poly, center, prec=prec)


def _leading_zeros(s: Series) -> int:
    R = s.ring
    k = 0
    while k < len(s.coeffs) and R.is_zero(s.coeffs[k]):
        k += 1
    return k


def expand_rational_at(num: Sequence, den: Sequence, center: Center, P1: int,
                       prec: int | None = None, max_pole: int | None = None) -> LaurentLocal:
    """Laurent expansion of num(t)/den(t) at ``center``.

    The principal part covers the polar exponents (and the constant at
    infinity); the analytic part has P1 coefficients (exponents 0..P1-1).
    """
    field = center.field
    prec = prec or 20
    N = local_poly(field, num, center, prec)
    D = local_poly(field, den, center, prec)
    if center.is_infinity:
        # leading (lowest-u) coefficients: strip zero leading coefficients too
        pass
    zn, zd = _leading_zeros(N), _leading_zeros(D)
    if zd >= len(D.coeffs):
        raise ZeroDivisionError("denominator vanishes identically")
    N = N.copy(val=N.val + zn, coeffs=N.coeffs[zn:])
    D = D.copy(val=D.val + zd, coeffs=D.coeffs[zd:])
    start = N.val - D.val
    split = 1 if center.is_infinity else 0
    order = split - start if start < split else 0
    if not center.is_infinity and max_pole is not None and order > max_pole:
        raise PoleOrderTooLarge(f"pole of order {order} at {center}")
    total = max(P1 - start, 1)
    D0 = D.copy(val=0)
    Dn = D0.normalize()
    R = Dn.ring
    if Dn.den or not R.is_unit(Dn.coeffs[0]):
        raise CoincidentCenters(f"denominator has a root p-adically close to {center}")
    inv = series_invert(Dn, total)
    body = series_mul(N.copy(val=0), inv, total)
    full = body.copy(val=start)
    return split_principal(full, P1)


def split_principal(x, P1: int | None = None) -> LaurentLocal:
    """Split into principal part (exponents < 0, or <= 0 at infinity) and analytic part."""
    if isinstance(x, LaurentLocal):
        x = x.total()
    cut = 1 if x.center.is_infinity else 0
    lo = min(x.val, cut)
    hi = x.top if P1 is None else (P1 if not x.exact or P1 > x.top else P1)
    if x.exact and P1 is None:
        hi = max(x.top, cut)
    if not x.exact and x.top < cut:
        raise PrecisionExhausted("series too short to split")
    if x.val < cut:
        principal = x.window(x.val, cut).copy(exact=True)
    else:
        principal = Series(x.field, x.center, cut, [], 0, x.prec, exact=True)
    if hi < cut and not x.exact:
        raise PrecisionExhausted("series too short to split")
    an_hi = max(hi, cut)
    R = x.ring
    coeffs = []
    for e in range(0, an_hi):
        if e < cut or e < x.val:
            coeffs.append(R.zero)
        else:
            coeffs.append(x.raw_at(e))
    analytic = Series(x.field, x.center, 0, coeffs, x.den, x.prec, exact=x.exact and P1 is None)
    return LaurentLocal(principal, analytic)


def pole_reexpand(source: Center, m: int, target: Center, P1: int, prec: int) -> Series:
    """Expansion of (t - source)^(-m) at ``target`` (t^m when source is infinity)."""
    if source == target:
        raise CoincidentCenters(f"{source} == {target}")
    field = target.field
    R = field.ring(prec)
    if source.is_infinity:
        return local_poly(field, [0] * m + [1], target, prec).truncate(P1)
    lam_s = source.rep(R)
    if target.is_infinity:
        # u^m (1 - lam' u)^(-m); geometric series then power
        geo = [R.pow(lam_s, k) for k in range(P1)]
        g = Series(field, target, 0, geo, 0, prec)
        return series_pow(g, m, P1).shift(m).truncate_top(P1)
    d = R.sub(target.rep(R), lam_s)
    if not R.is_unit(d):
        raise CoincidentCenters(f"{source} and {target} are not p-adically separated")
    # (d + s)^(-1) = d^(-1) sum (-s/d)^k
    di = R.inv(d)
    mdi = R.neg(di)
    geo = [di]
    for _ in range(1, P1):
        geo.append(R.mul(geo[-1], mdi))
    g = Series(field, target, 0, geo, 0, prec)
    return series_pow(g, m, P1)


# --------------------------------------------------------------------------
# first-order linear ODEs


def _newton_slope(R, coeffs: list, e: int) -> Fraction:
    """Largest root valuation of sum_{j>=e} c_j s^(j-e) (0 if none)."""
    v0 = R.valuation(coeffs[e])
    best = Fraction(0)
    for j in range(e + 1, len(coeffs)):
        if R.is_zero(coeffs[j]):
            continue
        s = Fraction(v0 - R.valuation(coeffs[j]), j - e)
        if s > best:
            best = s
    return best


class OdeSolution(list):
    """List of component series plus the precision loss charged."""

    loss: int


def _as_k(field, x, prec) -> KCoefficient:
    if isinstance(x, KCoefficient):
        return x
    if isinstance(x, PadicElement):
        return KCoefficient.from_padic(x)
    return KCoefficient.from_fraction(field, Fraction(x), prec)


def solve_scalar_ode(leading: Series, a: Series | None, b: Series | None, init, P1: int,
                     extra_loss: int = 0) -> Series:
    """Solve c(z) Z' = a(z) Z + b(z) by the coefficient recurrence.

    With e the order of c at 0, coefficient k of Z is fixed by
    (c_e k - a_{e-1}) Z_k = b_{k+e-1} + sum_{i>=e} a_i Z_{k+e-1-i}
    - sum_{j>e} c_j (k+e-j) Z_{k+e-j}.  ``init`` is used when that scalar
    vanishes at k = 0 and checked against it otherwise.

    The returned series carries the denominator the recurrence actually
    needed; its precision is the input precision minus that denominator
    minus an a-priori loss (integer divisions, plus growth of the homogeneous
    solutions read off the Newton polygon of c).
    """
    field = leading.field
    center = leading.center
    p = field.p
    parts = [s for s in (leading, a, b) if s is not None]
    for s in parts:
        if s.center != center:
            raise CenterMismatch("ODE coefficients at different centers")
        if s.val < 0 and not s.window(s.val, 0).is_zero():
            raise IndicialObstruction("ODE coefficient has a pole")
    P = min(s.prec for s in parts)
    D = max(leading.den, a.den if a is not None else 0)

    def win(s, hi):
        return s.window(0, hi if s.exact else min(hi, s.top))

    probe = win(leading, P1 + 1)
    e = next((j for j, c in enumerate(probe.coeffs) if not probe.ring.is_zero(c)), None)
    if e is None:
        if leading.is_zero():
            raise IndicialObstruction("leading coefficient vanishes")
        raise InsufficientAnalyticPrecision(f"leading coefficient vanishes below order {P1 + 1}")
    hi = P1 + e + 1
    cr_s = win(leading, hi).with_den(D)
    ar_s = None if a is None else win(a, hi).with_den(D)
    b_s = None if b is None else win(b, hi)
    for s, name in ((ar_s, "a"), (b_s, "b")):
        if s is not None and not s.window(0, max(e - 1, 0)).is_zero():
            raise IndicialObstruction(f"coefficient {name} has terms below the leading order")

    limit = P1
    if not leading.exact:
        limit = min(limit, leading.top - e)
    for s in (a, b):
        if s is not None and not s.exact:
            limit = min(limit, s.top - e + 1)
    if limit < 1:
        raise PrecisionExhausted("ODE data too short")

    # unknown representatives carry den S: Zrep = Z * p^S, kept mod p^(P+D+S)
    bden = b_s.den if b_s is not None else 0
    S = max(0, bden - D)
    base = P + D
    R = field.ring(base + S)
    cr = [R.reduce(c) for c in cr_s.coeffs]
    ar = [R.reduce(c) for c in ar_s.coeffs] if ar_s is not None else []
    br = list(b_s.coeffs) if b_s is not None else []
    nz_c = [j for j in range(e + 1, len(cr)) if not R.is_zero(cr[j])]
    a_sing = ar[e - 1] if e >= 1 and len(ar) > e - 1 else None
    loss_w = 0
    Z: list = []

    def grow_den(g, acc):
        nonlocal S, R, Z
        R = field.ring(base + S + g)
        Z = [R.mul_p(z, g) for z in Z]
        S += g
        return R.mul_p(acc, g)

    for k in range(limit):
        m = k + e - 1
        acc = R.zero
        if 0 <= m < len(br):
            acc = R.mul_p(R.reduce(br[m]), D + S - bden)
        if k and ar:
            top = min(e + k, len(ar))
            if top > e:
                acc = R.add(acc, R.dot(ar[e:top], Z[k + e - top : k][::-1]))
        for j in nz_c:
            idx = k + e - j
            if idx < 0:
                break
            if idx:
                acc = R.sub(acc, R.mul(cr[j], R.scal(Z[idx], idx)))
        scal = R.scal(cr[e], k)
        if a_sing is not None:
            scal = R.sub(scal, a_sing)
        if R.is_zero(scal):
            if k != 0:
                raise IndicialObstruction(f"recurrence scalar vanishes at index {k}")
            if init is None:
                raise IndicialObstruction("initial value required but not given")
            ik = _as_k(field, init, P + 64)
            if not ik.is_zero() and ik.val < -S:
                acc = grow_den(-S - ik.val, acc)
            if not R.is_zero(acc):
                log.debug("initial consistency defect of valuation %d", R.valuation(acc) - D - S)
            Z.append(R.reduce(ik.raw(S, base)) if not ik.is_zero() else R.zero)
            continue
        w = R.valuation(scal)
        loss_w = max(loss_w, w - D)
        if not R.is_zero(acc):
            va = R.valuation(acc)
            if va < w:
                acc = grow_den(w - va, acc)
        u = R.div_p(R.reduce(scal), w)
        zk = R.mul(R.div_p(acc, w), R.inv(u)) if not R.is_zero(acc) else R.zero
        if k == 0 and init is not None:
            ik = _as_k(field, init, P + 64)
            got = KCoefficient.from_raw(field, zk, S, max(P - S - max(w - D, 0) - 1, 1))
            if not got.eq_mod(ik):
                raise IndicialObstruction("initial value inconsistent with the equation")
        Z.append(zk)

    rho = _newton_slope(cr_s.ring, cr_s.coeffs, e) if len(cr_s.coeffs) > e + 1 else Fraction(0)
    L = len(Z)
    loss = (math.ceil(rho * max(L - 1, 0)) + loss_w
            + math.ceil(math.log(max(L, 1)) / math.log(p)) + extra_loss)
    out_prec = P - S - loss
    if out_prec < 1:
        raise PrecisionExhausted(f"ODE solution lost all precision (P={P}, den={S}, loss={loss})")
    Rout = field.ring(out_prec + S)
    return Series(field, center, 0, [Rout.reduce(z) for z in Z], S, out_prec)


def solve_first_order_ode(A, B, init, leading: Series, P1: int) -> OdeSolution:
    """Solve c(z) Z' = A Z + B for a 2-vector Z.

    A is a 2x2 list of Series or None (zero), B a 2-list of Series or None,
    init a 2-list of KCoefficient/number/None.
    """
    coupled = A[0][1] is not None or A[1][0] is not None
    if not coupled:
        sols = OdeSolution(solve_scalar_ode(leading, A[i][i], B[i], init[i], P1) for i in range(2))
        sols.loss = max(min(s.prec for s in (leading, A[i][i], B[i]) if s is not None) - sol.prec
                        for i, sol in enumerate(sols))
        return sols
    return _solve_coupled(A, B, init, leading, P1)


def _solve_coupled(A, B, init, leading: Series, P1: int) -> OdeSolution:
    # slow reference path with tracked KCoefficient arithmetic
    field = leading.field
    center = leading.center
    parts = [leading] + [x for row in A for x in row if x is not None] + [x for x in B if x is not None]
    P = min(s.prec for s in parts)

    def kc(s, i):
        if s is None:
            return KCoefficient.zero(field, P + 64)
        try:
            return s.coeff(i)
        except IndexError:
            raise PrecisionExhausted("ODE data too short")

    e = 0
    while leading.coeff(e).is_zero():
        e += 1
    Z = [[], []]
    for k in range(P1):
        m = k + e - 1
        N = []
        for r in range(2):
            acc = kc(B[r], m) if m >= 0 else KCoefficient.zero(field, P + 64)
            for c in range(2):
                for i in range(e, m + 1):
                    acc = acc + kc(A[r][c], i) * Z[c][m - i]
            for j in range(e + 1, k + e + 1):
                idx = k + e - j
                acc = acc - kc(leading, j) * (Z[r][idx] * idx)
            N.append(acc)
        ce = leading.coeff(e) * k
        a_ = lambda r, c: kc(A[r][c], e - 1) if e >= 1 else KCoefficient.zero(field, P + 64)
        S = [[ce - a_(0, 0), -a_(0, 1)], [-a_(1, 0), ce - a_(1, 1)]]
        det = S[0][0] * S[1][1] - S[0][1] * S[1][0]
        if det.is_zero():
            if k:
                raise IndicialObstruction(f"recurrence matrix singular at index {k}")
            vals = [x if isinstance(x, KCoefficient) else KCoefficient.from_fraction(field, Fraction(x), P + 64)
                    for x in init]
        else:
            vals = [(S[1][1] * N[0] - S[0][1] * N[1]) / det, (S[0][0] * N[1] - S[1][0] * N[0]) / det]
        for r in range(2):
            Z[r].append(vals[r])
    out = OdeSolution(Series.from_scalars(center, z, max(min(x.prec for x in z), 1)) for z in Z)
    out.loss = P - min(s.prec for s in out)
    return out
