"""Arithmetic in W(F_q)/p^M and in the fraction field K at finite precision.

Two layers live here:

* ``ZpRing`` / ``GaloisRing`` work on raw representatives (a Python int for
  n = 1, a tuple of n ints for n > 1).  They carry no precision bookkeeping
  and are what the series kernels use in their inner loops.
* ``PadicElement`` and ``KCoefficient`` are small immutable value classes on
  top of them for the linear algebra and the public API.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from operator import mul as _mul
from typing import Sequence

import gmpy2

from .errors import DivisionByNonUnit, InvalidInput, PrecisionExhausted
from .finite_field import GF, is_irreducible, is_prime

log = logging.getLogger(__name__)

# below this length the schoolbook product wins over Kronecker packing
KRONECKER_THRESHOLD = 12


@dataclass(frozen=True)
class FieldSpec:
    """F_q = F_p[x]/(modulus), q = p**n; the coefficient ring is W(F_q)."""

    p: int
    n: int = 1
    modulus: tuple = (0, 1)

    def __post_init__(self):
        if not is_prime(self.p):
            raise InvalidInput(f"p = {self.p} is not prime")
        if self.p == 2:
            raise InvalidInput("odd characteristic required")
        mod = tuple(int(c) for c in self.modulus)
        object.__setattr__(self, "modulus", mod)
        if len(mod) != self.n + 1 or mod[-1] != 1:
            raise InvalidInput("modulus must be monic of degree n")
        if self.n > 1 and not is_irreducible(list(mod), self.p):
            raise InvalidInput("modulus is not irreducible mod p")

    @classmethod
    def make(cls, p: int, n: int = 1, modulus: Sequence[int] | None = None) -> "FieldSpec":
        if modulus is None:
            if n == 1:
                modulus = (0, 1)
            else:
                from .finite_field import find_irreducible
                modulus = find_irreducible(p, n)
        return cls(p, n, tuple(modulus))

    @property
    def q(self) -> int:
        return self.p ** self.n

    @property
    def gf(self) -> GF:
        return _gf(self)

    def ring(self, prec: int):
        """The ring W(F_q)/p^prec (cached)."""
        return _ring(self, max(int(prec), 1))

    def log_p(self, x: float) -> float:
        return math.log(x) / math.log(self.p)


@lru_cache(maxsize=None)
def _gf(field: FieldSpec) -> GF:
    return GF(field.p, field.modulus)


@lru_cache(maxsize=512)
def _ring(field: FieldSpec, prec: int):
    if field.n == 1:
        return ZpRing(field, prec)
    return GaloisRing(field, prec)


def _v_int(x: int, p: int, cap: int) -> int:
    if x == 0:
        return cap
    v = 0
    while x % p == 0 and v < cap:
        x //= p
        v += 1
    return v


def _pack(coeffs, nbytes: int) -> int:
    return int.from_bytes(b"".join(c.to_bytes(nbytes, "little") for c in coeffs), "little")


def _unpack(x, nbytes: int, count: int) -> list[int]:
    x = int(x) & ((1 << (8 * nbytes * count)) - 1)
    raw = x.to_bytes(nbytes * count, "little")
    fb = int.from_bytes
    return [fb(raw[i : i + nbytes], "little") for i in range(0, nbytes * count, nbytes)]


class ZpRing:
    """Z/p^prec with elements stored as ints in [0, p^prec)."""

    def __init__(self, field: FieldSpec, prec: int):
        self.field = field
        self.p = field.p
        self.n = 1
        self.prec = prec
        self.pN = field.p ** prec
        self.zero = 0
        self.one = 1 % self.pN

    def __repr__(self):
        return f"Z/{self.p}^{self.prec}"

    def reduce(self, a) -> int:
        return a % self.pN

    def from_int(self, x: int) -> int:
        return x % self.pN

    def from_fraction(self, x) -> int:
        x = Fraction(x)
        if x.denominator % self.p == 0:
            raise DivisionByNonUnit(f"{x} is not p-integral")
        return x.numerator * pow(x.denominator, -1, self.pN) % self.pN

    def components(self, a) -> list[int]:
        return [a]

    def from_components(self, comps) -> int:
        return comps[0] % self.pN

    def add(self, a, b):
        return (a + b) % self.pN

    def sub(self, a, b):
        return (a - b) % self.pN

    def neg(self, a):
        return -a % self.pN

    def mul(self, a, b):
        return a * b % self.pN

    def scal(self, a, k: int):
        return a * k % self.pN

    def mul_p(self, a, k: int):
        return a * self.p ** k % self.pN

    def div_p(self, a, k: int):
        """Exact division by p^k of a representative divisible by p^k."""
        return (a // self.p ** k) % self.pN

    def dot(self, xs, ys):
        return sum(map(_mul, xs, ys)) % self.pN

    def is_zero(self, a) -> bool:
        return a % self.pN == 0

    def valuation(self, a) -> int:
        return _v_int(a % self.pN, self.p, self.prec)

    def is_unit(self, a) -> bool:
        return a % self.p != 0

    def inv(self, a):
        if a % self.p == 0:
            raise DivisionByNonUnit("inverse of a non-unit")
        return pow(a, -1, self.pN)

    def pow(self, a, e: int):
        return pow(a, e, self.pN)

    def sigma(self, a):
        return a

    def sigma_power(self, a, k: int):
        return a

    def residue(self, a):
        return (a % self.p,)

    def lift_residue(self, r) -> int:
        return r[0] % self.pN

    def balanced(self, a) -> int:
        a %= self.pN
        return a - self.pN if a > self.pN // 2 else a

    def poly_mul(self, a: Sequence, b: Sequence, length: int | None = None) -> list:
        """Truncated product of two coefficient lists."""
        if not a or not b:
            return [0] * (length or 0)
        full = len(a) + len(b) - 1
        L = full if length is None else min(length, full)
        a = a[:L]
        b = b[:L]
        m = min(len(a), len(b))
        if m < KRONECKER_THRESHOLD:
            out = [0] * L
            for i, x in enumerate(a):
                if x:
                    for j in range(min(len(b), L - i)):
                        out[i + j] += x * b[j]
            pN = self.pN
            res = [c % pN for c in out]
        else:
            bits = 2 * self.pN.bit_length() + m.bit_length() + 1
            nb = (bits + 7) // 8
            prod = gmpy2.mpz(_pack(a, nb)) * gmpy2.mpz(_pack(b, nb))
            pN = self.pN
            res = [c % pN for c in _unpack(prod, nb, L)]
        if length is not None and length > L:
            res.extend([0] * (length - L))
        return res

    def poly_mul_schoolbook(self, a, b, length=None):
        full = len(a) + len(b) - 1
        L = full if length is None else length
        out = [0] * L
        for i, x in enumerate(a):
            for j, y in enumerate(b):
                if i + j < L:
                    out[i + j] += x * y
        return [c % self.pN for c in out]


class GaloisRing:
    """W(F_q)/p^prec as (Z/p^prec)[x]/(modulus); elements are n-tuples."""

    def __init__(self, field: FieldSpec, prec: int):
        self.field = field
        self.p = field.p
        self.n = field.n
        self.prec = prec
        self.pN = field.p ** prec
        self.f = field.modulus
        self.zero = (0,) * self.n
        self.one = (1 % self.pN,) + (0,) * (self.n - 1)
        self._sigma_powers = None

    def __repr__(self):
        return f"W(F_{self.field.q})/{self.p}^{self.prec}"

    def _red_poly(self, c: list) -> tuple:
        # reduce a coefficient list of length <= 2n-1 modulo (f, p^prec)
        n, f, pN = self.n, self.f, self.pN
        c = list(c)
        for k in range(len(c) - 1, n - 1, -1):
            t = c[k]
            if t:
                base = k - n
                for i in range(n):
                    if f[i]:
                        c[base + i] -= t * f[i]
        c = c[:n] + [0] * (n - len(c))
        return tuple(x % pN for x in c)

    def reduce(self, a):
        if isinstance(a, int):
            return self.from_int(a)
        if len(a) > self.n:
            return self._red_poly(list(a))
        return tuple(x % self.pN for x in a)

    def from_int(self, x: int):
        return (x % self.pN,) + (0,) * (self.n - 1)

    def from_fraction(self, x):
        x = Fraction(x)
        if x.denominator % self.p == 0:
            raise DivisionByNonUnit(f"{x} is not p-integral")
        return self.from_int(x.numerator * pow(x.denominator, -1, self.pN))

    def components(self, a) -> list[int]:
        return list(a)

    def from_components(self, comps):
        return self.reduce(tuple(comps))

    def add(self, a, b):
        pN = self.pN
        return tuple((x + y) % pN for x, y in zip(a, b))

    def sub(self, a, b):
        pN = self.pN
        return tuple((x - y) % pN for x, y in zip(a, b))

    def neg(self, a):
        pN = self.pN
        return tuple(-x % pN for x in a)

    def _raw_mul(self, a, b) -> list:
        out = [0] * (2 * self.n - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return out

    def mul(self, a, b):
        return self._red_poly(self._raw_mul(a, b))

    def scal(self, a, k: int):
        pN = self.pN
        return tuple(x * k % pN for x in a)

    def mul_p(self, a, k: int):
        return self.scal(a, self.p ** k)

    def div_p(self, a, k: int):
        d = self.p ** k
        pN = self.pN
        return tuple((x // d) % pN for x in a)

    def dot(self, xs, ys):
        acc = [0] * (2 * self.n - 1)
        for a, b in zip(xs, ys):
            for i, x in enumerate(a):
                if x:
                    for j, y in enumerate(b):
                        acc[i + j] += x * y
        return self._red_poly(acc)

    def is_zero(self, a) -> bool:
        return all(x % self.pN == 0 for x in a)

    def valuation(self, a) -> int:
        return min(_v_int(x % self.pN, self.p, self.prec) for x in a)

    def is_unit(self, a) -> bool:
        return any(x % self.p for x in a)

    def residue(self, a):
        return tuple(x % self.p for x in a)

    def lift_residue(self, r):
        return self.reduce(tuple(r))

    def inv(self, a):
        if not self.is_unit(a):
            raise DivisionByNonUnit("inverse of a non-unit")
        gf = self.field.gf
        x = self.lift_residue(gf.inv(self.residue(a)))
        # Newton: x <- x (2 - a x), doubling the number of correct digits
        k = 1
        two = self.from_int(2)
        while k < self.prec:
            x = self.mul(x, self.sub(two, self.mul(a, x)))
            k *= 2
        return x

    def pow(self, a, e: int):
        r = self.one
        while e:
            if e & 1:
                r = self.mul(r, a)
            e >>= 1
            if e:
                a = self.mul(a, a)
        return r

    def _sigma_table(self):
        if self._sigma_powers is None:
            st = sigma_of_generator(self.field, self.prec)
            pw = [self.one]
            for _ in range(1, self.n):
                pw.append(self.mul(pw[-1], st))
            self._sigma_powers = pw
        return self._sigma_powers

    def sigma(self, a):
        pw = self._sigma_table()
        pN = self.pN
        out = [0] * self.n
        for c, v in zip(a, pw):
            if c:
                for j in range(self.n):
                    out[j] += c * v[j]
        return tuple(x % pN for x in out)

    def sigma_power(self, a, k: int):
        for _ in range(k % self.n):
            a = self.sigma(a)
        return a

    def balanced(self, a) -> int:
        if any(x % self.pN for x in a[1:]):
            raise ValueError("element is not in Z_p")
        x = a[0] % self.pN
        return x - self.pN if x > self.pN // 2 else x

    def poly_mul(self, a: Sequence, b: Sequence, length: int | None = None) -> list:
        if not a or not b:
            return [self.zero] * (length or 0)
        full = len(a) + len(b) - 1
        L = full if length is None else min(length, full)
        a = a[:L]
        b = b[:L]
        m = min(len(a), len(b))
        if m < KRONECKER_THRESHOLD:
            res = self.poly_mul_schoolbook(a, b, L)
        else:
            n = self.n
            w = 2 * n - 1
            bits = 2 * self.pN.bit_length() + (n * m).bit_length() + 1
            nb = (bits + 7) // 8
            pad = (0,) * (n - 1)
            pa = _pack([c for x in a for c in (tuple(x) + pad)], nb)
            pb = _pack([c for x in b for c in (tuple(x) + pad)], nb)
            prod = gmpy2.mpz(pa) * gmpy2.mpz(pb)
            flat = _unpack(prod, nb, L * w)
            res = [self._red_poly(flat[k * w : (k + 1) * w]) for k in range(L)]
        if length is not None and length > L:
            res.extend([self.zero] * (length - L))
        return res

    def poly_mul_schoolbook(self, a, b, length=None):
        full = len(a) + len(b) - 1
        L = full if length is None else length
        acc = [[0] * (2 * self.n - 1) for _ in range(L)]
        for i, x in enumerate(a):
            if not any(x):
                continue
            for j in range(min(len(b), L - i)):
                y = b[j]
                row = acc[i + j]
                for s, xs in enumerate(x):
                    if xs:
                        for t, yt in enumerate(y):
                            row[s + t] += xs * yt
        return [self._red_poly(r) for r in acc]


@lru_cache(maxsize=None)
def sigma_of_generator(field: FieldSpec, prec: int):
    """Hensel-lift the root theta^p of the modulus, giving sigma(theta)."""
    R = field.ring(prec)
    f = [R.from_int(c) for c in field.modulus]
    df = [R.scal(f[i], i) for i in range(1, len(f))]
    theta = R.reduce((0, 1) + (0,) * (field.n - 2))
    z = R.pow(theta, field.p)

    def ev(poly, x):
        acc = R.zero
        for c in reversed(poly):
            acc = R.add(R.mul(acc, x), c)
        return acc

    if not R.is_zero(ev(f, z)) and R.valuation(ev(f, z)) < 1:
        raise InvalidInput("modulus is not irreducible mod p")
    k = 1
    while k < prec:
        z = R.sub(z, R.mul(ev(f, z), R.inv(ev(df, z))))
        k *= 2
    if not R.is_zero(ev(f, z)):
        raise PrecisionExhausted("Hensel lift of sigma(theta) did not converge")
    return z


# --------------------------------------------------------------------------
# value classes


class PadicElement:
    """An element of W(F_q)/p^M."""

    __slots__ = ("ring", "rep")

    def __init__(self, ring, rep):
        self.ring = ring
        self.rep = ring.reduce(rep)

    @classmethod
    def from_int(cls, field: FieldSpec, x: int, prec: int) -> "PadicElement":
        return cls(field.ring(prec), field.ring(prec).from_int(x))

    @property
    def field(self) -> FieldSpec:
        return self.ring.field

    @property
    def prec(self) -> int:
        return self.ring.prec

    def _coerce(self, other) -> tuple:
        if isinstance(other, PadicElement):
            if other.field != self.field:
                raise InvalidInput("field mismatch")
            R = self.ring if self.prec <= other.prec else other.ring
            return R, R.reduce(self.rep), R.reduce(other.rep)
        if isinstance(other, int):
            return self.ring, self.rep, self.ring.from_int(other)
        return NotImplemented

    def __add__(self, other):
        c = self._coerce(other)
        if c is NotImplemented:
            return c
        R, a, b = c
        return PadicElement(R, R.add(a, b))

    __radd__ = __add__

    def __sub__(self, other):
        c = self._coerce(other)
        if c is NotImplemented:
            return c
        R, a, b = c
        return PadicElement(R, R.sub(a, b))

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return PadicElement(self.ring, self.ring.neg(self.rep))

    def __mul__(self, other):
        c = self._coerce(other)
        if c is NotImplemented:
            return c
        R, a, b = c
        return PadicElement(R, R.mul(a, b))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return PadicElement(self.ring, self.ring.pow(self.rep, e))

    def inverse(self) -> "PadicElement":
        return PadicElement(self.ring, self.ring.inv(self.rep))

    def __truediv__(self, other):
        if isinstance(other, int):
            other = PadicElement(self.ring, self.ring.from_int(other))
        return self * other.inverse()

    def __eq__(self, other):
        c = self._coerce(other)
        if c is NotImplemented:
            return NotImplemented
        R, a, b = c
        return R.is_zero(R.sub(a, b))

    def __hash__(self):
        return hash((self.field, self.prec, self.rep))

    def __repr__(self):
        return f"PadicElement({self.rep!r} mod {self.field.p}^{self.prec})"

    def valuation(self) -> int:
        return self.ring.valuation(self.rep)

    def is_unit(self) -> bool:
        return self.ring.is_unit(self.rep)

    def is_zero(self) -> bool:
        return self.ring.is_zero(self.rep)

    def residue(self):
        return self.ring.residue(self.rep)

    def with_prec(self, prec: int) -> "PadicElement":
        return PadicElement(self.field.ring(prec), self.rep)


def padic_add(x: PadicElement, y: PadicElement) -> PadicElement:
    return x + y


def padic_mul(x: PadicElement, y: PadicElement) -> PadicElement:
    return x * y


def padic_inv(x: PadicElement) -> PadicElement:
    return x.inverse()


def teichmuller_lift(field: FieldSpec, residue, prec: int) -> PadicElement:
    """The root of x^q = x reducing to ``residue`` (an F_q element, int or list)."""
    R = field.ring(prec)
    gf = field.gf
    r = gf.elt(residue)
    x = R.lift_residue(r) if field.n > 1 else R.from_int(r[0])
    if not any(r):
        return PadicElement(R, R.zero)
    q = field.q
    # Newton on F(x) = x^q - x; F'(x) = q x^(q-1) - 1 is a unit
    k = 1
    while k < prec:
        xq1 = R.pow(x, q - 1)
        num = R.sub(R.mul(xq1, x), x)
        den = R.sub(R.scal(xq1, q), R.one)
        x = R.sub(x, R.mul(num, R.inv(den)))
        k *= 2
    return PadicElement(R, x)


def frobenius_sigma(x: PadicElement) -> PadicElement:
    return PadicElement(x.ring, x.ring.sigma(x.rep))


# --------------------------------------------------------------------------
# elements of K at finite absolute precision


class KCoefficient:
    """p^val * unit, known modulo p^prec (absolute precision).

    The zero element stores ``unit = None`` and means "zero modulo p^prec".
    """

    __slots__ = ("field", "unit", "val", "prec")

    def __init__(self, field: FieldSpec, unit, val: int, prec: int):
        self.field = field
        self.unit = unit
        self.val = val
        self.prec = prec

    # constructors
    @classmethod
    def zero(cls, field: FieldSpec, prec: int) -> "KCoefficient":
        return cls(field, None, prec, prec)

    @classmethod
    def from_raw(cls, field: FieldSpec, rep, den: int, prec: int) -> "KCoefficient":
        """The value rep / p^den, known modulo p^prec."""
        R = field.ring(prec + den)
        rep = R.reduce(rep)
        v = R.valuation(rep)
        if v >= prec + den:
            return cls.zero(field, prec)
        rel = prec + den - v
        u = field.ring(rel).reduce(R.div_p(rep, v))
        return cls(field, u, v - den, prec)

    @classmethod
    def from_int(cls, field: FieldSpec, x: int, prec: int) -> "KCoefficient":
        return cls.from_raw(field, field.ring(prec).from_int(x), 0, prec)

    @classmethod
    def from_fraction(cls, field: FieldSpec, x, prec: int) -> "KCoefficient":
        x = Fraction(x)
        if x == 0:
            return cls.zero(field, prec)
        num, den = x.numerator, x.denominator
        vn = _v_int(abs(num), field.p, 10**9)
        vd = _v_int(den, field.p, 10**9)
        val = vn - vd
        rel = prec - val
        if rel <= 0:
            return cls.zero(field, prec)
        R = field.ring(rel)
        u = R.from_int((num // field.p**vn) * pow(den // field.p**vd, -1, R.pN))
        return cls(field, u, val, prec)

    @classmethod
    def from_padic(cls, x: PadicElement) -> "KCoefficient":
        return cls.from_raw(x.field, x.rep, 0, x.prec)

    # queries
    def is_zero(self) -> bool:
        return self.unit is None

    @property
    def relprec(self) -> int:
        return self.prec - self.val

    def valuation(self) -> int:
        return self.val

    def __repr__(self):
        if self.unit is None:
            return f"O({self.field.p}^{self.prec})"
        return f"KCoefficient({self.unit!r}*{self.field.p}^{self.val} + O({self.field.p}^{self.prec}))"

    def raw(self, den: int, prec: int | None = None):
        """Representative of self * p^den in W/p^(prec+den); needs val >= -den."""
        prec = self.prec if prec is None else prec
        R = self.field.ring(prec + den)
        if self.unit is None:
            return R.zero
        if self.val + den < 0:
            raise PrecisionExhausted("denominator budget too small for coefficient")
        return R.mul_p(R.reduce(self.unit), self.val + den)

    def to_padic(self, prec: int | None = None) -> PadicElement:
        prec = self.prec if prec is None else prec
        return PadicElement(self.field.ring(prec), self.raw(0, prec))

    def balanced_int(self) -> int:
        """Balanced integer representative (requires val >= 0 and a Z_p value)."""
        R = self.field.ring(self.prec)
        return R.balanced(self.raw(0))

    # arithmetic
    def _lift_other(self, other) -> "KCoefficient":
        if isinstance(other, KCoefficient):
            return other
        if isinstance(other, (int, Fraction)):
            return KCoefficient.from_fraction(self.field, other, max(self.prec, 1) + 64)
        raise TypeError(type(other))

    def __add__(self, other):
        other = self._lift_other(other)
        prec = min(self.prec, other.prec)
        if self.unit is None:
            return other.with_prec(prec)
        if other.unit is None:
            return self.with_prec(prec)
        v = min(self.val, other.val)
        if prec <= v:
            return KCoefficient.zero(self.field, prec)
        R = self.field.ring(prec - v)
        a = R.mul_p(R.reduce(self.unit), self.val - v)
        b = R.mul_p(R.reduce(other.unit), other.val - v)
        return KCoefficient._from_scaled(self.field, R.add(a, b), v, prec)

    @staticmethod
    def _from_scaled(field, rep, v, prec):
        # the value rep * p^v, known mod p^prec
        R = field.ring(prec - v)
        w = R.valuation(rep)
        if w >= prec - v:
            return KCoefficient.zero(field, prec)
        u = field.ring(prec - v - w).reduce(R.div_p(rep, w))
        return KCoefficient(field, u, v + w, prec)

    __radd__ = __add__

    def __neg__(self):
        if self.unit is None:
            return self
        R = self.field.ring(self.relprec)
        return KCoefficient(self.field, R.neg(self.unit), self.val, self.prec)

    def __sub__(self, other):
        return self + (-self._lift_other(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._lift_other(other)
        if self.unit is None and other.unit is None:
            return KCoefficient.zero(self.field, self.prec + other.prec)
        if self.unit is None:
            return KCoefficient.zero(self.field, self.prec + other.val)
        if other.unit is None:
            return KCoefficient.zero(self.field, other.prec + self.val)
        rel = min(self.relprec, other.relprec)
        R = self.field.ring(rel)
        u = R.mul(R.reduce(self.unit), R.reduce(other.unit))
        return KCoefficient(self.field, u, self.val + other.val, self.val + other.val + rel)

    __rmul__ = __mul__

    def inverse(self) -> "KCoefficient":
        if self.unit is None:
            raise DivisionByNonUnit("inverse of an element that is zero to precision")
        R = self.field.ring(self.relprec)
        return KCoefficient(self.field, R.inv(self.unit), -self.val, -self.val + self.relprec)

    def __truediv__(self, other):
        return self * self._lift_other(other).inverse()

    def __rtruediv__(self, other):
        return self._lift_other(other) * self.inverse()

    def sigma(self, k: int = 1) -> "KCoefficient":
        if self.unit is None or self.field.n == 1:
            return self
        R = self.field.ring(self.relprec)
        return KCoefficient(self.field, R.sigma_power(self.unit, k), self.val, self.prec)

    def with_prec(self, prec: int) -> "KCoefficient":
        """Lower the absolute precision (never raises it)."""
        prec = min(prec, self.prec)
        if self.unit is None:
            return KCoefficient.zero(self.field, prec)
        if prec <= self.val:
            return KCoefficient.zero(self.field, prec)
        return KCoefficient(self.field, self.field.ring(prec - self.val).reduce(self.unit), self.val, prec)

    def eq_mod(self, other, prec: int | None = None) -> bool:
        """Equality at the common (or a given smaller) precision."""
        d = self - self._lift_other(other)
        if prec is not None:
            d = d.with_prec(prec)
        return d.is_zero()

    def __eq__(self, other):
        if not isinstance(other, (KCoefficient, int, Fraction)):
            return NotImplemented
        return self.eq_mod(other)

    __hash__ = None


# --------------------------------------------------------------------------
# linear algebra over K


class KernelBasis(list):
    """List of kernel vectors, with the pivot columns and precision loss."""

    pivots: list
    loss: int


def _min_prec(rows) -> int:
    return min((x.prec for r in rows for x in r), default=0)


def row_reduce(A, column_order=None, budget: int | None = None):
    """Gauss-Jordan elimination over K with minimal-valuation pivots.

    Returns (R, pivots) where R is the reduced matrix (pivot entries 1) and
    pivots maps pivot row index -> column.
    """
    rows = [list(r) for r in A]
    if not rows:
        return rows, []
    ncols = len(rows[0])
    if budget is None:
        budget = _min_prec(rows)
    order = list(range(ncols)) if column_order is None else list(column_order)
    pivots = []
    r0 = 0
    zero_decisions = 0
    for c in order:
        best = None
        for r in range(r0, len(rows)):
            x = rows[r][c]
            if x.unit is None:
                zero_decisions += 1
                continue
            if best is None or x.val < rows[best][c].val:
                best = r
        if best is None:
            continue
        piv = rows[best][c]
        if piv.val >= budget:
            raise PrecisionExhausted(f"pivot valuation {piv.val} meets budget {budget}")
        rows[r0], rows[best] = rows[best], rows[r0]
        inv = piv.inverse()
        rows[r0] = [x * inv for x in rows[r0]]
        prow = rows[r0]
        for r in range(len(rows)):
            if r == r0:
                continue
            f = rows[r][c]
            if f.unit is None:
                continue
            rows[r] = [x - f * y for x, y in zip(rows[r], prow)]
        pivots.append(c)
        r0 += 1
        if r0 == len(rows):
            break
    if zero_decisions:
        log.debug("row_reduce: %d entries treated as zero to precision", zero_decisions)
    return rows, pivots


def kernel_over_K(A, M: int | None = None, column_order=None) -> KernelBasis:
    """Basis of the right kernel of A (a list of rows of KCoefficient)."""
    rows = [list(r) for r in A]
    if not rows:
        raise InvalidInput("empty matrix")
    field = rows[0][0].field
    ncols = len(rows[0])
    in_prec = _min_prec(rows) if M is None else M
    R, pivots = row_reduce(rows, column_order, budget=in_prec)
    free = [c for c in range(ncols) if c not in pivots]
    out = KernelBasis()
    exact_prec = in_prec + 64
    for fcol in free:
        v = [KCoefficient.zero(field, exact_prec) for _ in range(ncols)]
        v[fcol] = KCoefficient.from_int(field, 1, exact_prec)
        for i, pc in enumerate(pivots):
            v[pc] = -R[i][fcol]
        out.append(v)
    out.pivots = pivots
    out_prec = min((x.prec for v in out for x in v), default=in_prec)
    out.loss = max(0, in_prec - out_prec)
    return out


def mat_vec(A, v):
    return [sum((a * x for a, x in zip(row, v)), KCoefficient.zero(v[0].field, 10**9)) for row in A]


def solve_linear(A, b):
    """Solve the square system A x = b over K; raises on singular A."""
    n = len(A)
    aug = [list(A[i]) + [b[i]] for i in range(n)]
    R, pivots = row_reduce(aug, column_order=list(range(n)))
    if pivots != list(range(n)):
        raise DivisionByNonUnit("singular system")
    return [R[i][n] for i in range(n)]
