"""Small finite-field toolkit: polynomials over F_p and the field F_p[x]/(f).

Polynomials are lists of ints, lowest degree first.  Elements of F_q are
tuples of length n (coefficients in the generator, little-endian).
"""

from __future__ import annotations

import random
from itertools import product
from typing import Iterator, Sequence


def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def fp_norm(a: Sequence[int], p: int) -> list[int]:
    return _trim([c % p for c in a])


def fp_add(a, b, p):
    n = max(len(a), len(b))
    return _trim([((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)) % p for i in range(n)])


def fp_sub(a, b, p):
    n = max(len(a), len(b))
    return _trim([((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % p for i in range(n)])


def fp_mul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return fp_norm(out, p)


def fp_divmod(a, b, p):
    b = fp_norm(b, p)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = fp_norm(a, p)
    inv_lead = pow(b[-1], -1, p)
    q = [0] * max(len(a) - len(b) + 1, 0)
    r = list(a)
    while len(r) >= len(b):
        c = r[-1] * inv_lead % p
        k = len(r) - len(b)
        q[k] = c
        for i, y in enumerate(b):
            r[k + i] = (r[k + i] - c * y) % p
        _trim(r)
    return _trim(q), r


def fp_mod(a, b, p):
    return fp_divmod(a, b, p)[1]


def fp_gcd(a, b, p):
    a, b = fp_norm(a, p), fp_norm(b, p)
    while b:
        a, b = b, fp_mod(a, b, p)
    if a:
        inv = pow(a[-1], -1, p)
        a = [c * inv % p for c in a]
    return a


def fp_powmod(base, e: int, mod, p):
    result = [1]
    base = fp_mod(base, mod, p)
    while e:
        if e & 1:
            result = fp_mod(fp_mul(result, base, p), mod, p)
        e >>= 1
        if e:
            base = fp_mod(fp_mul(base, base, p), mod, p)
    return result


def fp_derivative(a, p):
    return fp_norm([i * a[i] for i in range(1, len(a))], p)


def _prime_factors(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return _prime_factors(n) == [n]


def is_irreducible(f: Sequence[int], p: int) -> bool:
    """Rabin's test for irreducibility over F_p."""
    f = fp_norm(f, p)
    d = len(f) - 1
    if d < 1:
        return False
    if d == 1:
        return True
    x = [0, 1]
    # x^(p^k) mod f, computed by repeated p-th powering
    def frob_iter(k):
        y = x
        for _ in range(k):
            y = fp_powmod(y, p, f, p)
        return y

    if fp_sub(frob_iter(d), x, p):
        return False
    for r in _prime_factors(d):
        h = fp_sub(frob_iter(d // r), x, p)
        if len(fp_gcd(f, h, p)) != 1:
            return False
    return True


def find_irreducible(p: int, d: int, rng: random.Random | None = None) -> list[int]:
    """A monic irreducible polynomial of degree d over F_p (random search)."""
    if d == 1:
        return [0, 1]
    rng = rng or random.Random(p * 1000003 + d)
    while True:
        f = [rng.randrange(p) for _ in range(d)] + [1]
        if f[0] and is_irreducible(f, p):
            return f


class GF:
    """The finite field F_p[theta]/(modulus)."""

    def __init__(self, p: int, modulus: Sequence[int] | None = None):
        if modulus is None:
            modulus = [0, 1]
        modulus = fp_norm(modulus, p)
        if not modulus or modulus[-1] != 1:
            raise ValueError("modulus must be monic")
        self.p = p
        self.modulus = tuple(modulus)
        self.n = len(modulus) - 1
        self.q = p ** self.n
        if self.n > 1 and not is_irreducible(modulus, p):
            raise ValueError("modulus is not irreducible mod p")

    def __repr__(self):
        return f"GF({self.p}^{self.n})"

    def __eq__(self, other):
        return isinstance(other, GF) and (self.p, self.modulus) == (other.p, other.modulus)

    def __hash__(self):
        return hash((self.p, self.modulus))

    # elements
    def elt(self, x) -> tuple[int, ...]:
        """Coerce an int or a little-endian coefficient list into the field."""
        if isinstance(x, int):
            coeffs = [x]
        else:
            coeffs = list(x)
        if len(coeffs) > self.n:
            coeffs = fp_mod(coeffs, list(self.modulus), self.p)
        coeffs = [c % self.p for c in coeffs] + [0] * (self.n - len(coeffs))
        return tuple(coeffs[: self.n])

    @property
    def zero(self):
        return (0,) * self.n

    @property
    def one(self):
        return self.elt(1)

    def add(self, a, b):
        return tuple((x + y) % self.p for x, y in zip(a, b))

    def sub(self, a, b):
        return tuple((x - y) % self.p for x, y in zip(a, b))

    def neg(self, a):
        return tuple(-x % self.p for x in a)

    def mul(self, a, b):
        return self.elt(fp_mod(fp_mul(list(a), list(b), self.p), list(self.modulus), self.p))

    def pow(self, a, e: int):
        if e < 0:
            return self.pow(self.inv(a), -e)
        r = self.one
        while e:
            if e & 1:
                r = self.mul(r, a)
            e >>= 1
            if e:
                a = self.mul(a, a)
        return r

    def inv(self, a):
        if not any(a):
            raise ZeroDivisionError("inverse of zero in finite field")
        return self.pow(a, self.q - 2)

    def frobenius(self, a):
        return self.pow(a, self.p)

    def is_square(self, a) -> bool:
        return not any(a) or self.pow(a, (self.q - 1) // 2) == self.one

    def elements(self) -> Iterator[tuple[int, ...]]:
        for digits in product(range(self.p), repeat=self.n):
            yield tuple(reversed(digits))

    def is_in_prime_field(self, a) -> bool:
        return all(c == 0 for c in a[1:])

    # polynomials with coefficients in this field
    def poly_eval(self, coeffs, x):
        acc = self.zero
        for c in reversed(coeffs):
            acc = self.add(self.mul(acc, x), c)
        return acc

    def poly_from_roots(self, roots):
        poly = [self.one]
        for r in roots:
            shifted = [self.zero] + poly
            for i, c in enumerate(poly):
                shifted[i] = self.sub(shifted[i], self.mul(r, c))
            poly = shifted
        return poly

    def roots(self, coeffs) -> list[tuple[int, ...]]:
        """Roots with multiplicity of a polynomial over this field (brute force)."""
        coeffs = [self.elt(c) for c in coeffs]
        while coeffs and not any(coeffs[-1]):
            coeffs.pop()
        out = []
        for x in self.elements():
            c = list(coeffs)
            while len(c) > 1 and not any(self.poly_eval(c, x)):
                out.append(x)
                # synthetic division by (t - x)
                quo = [self.zero] * (len(c) - 1)
                acc = self.zero
                for i in range(len(c) - 1, 0, -1):
                    acc = self.add(self.mul(acc, x), c[i])
                    quo[i - 1] = acc
                c = quo
        return out
