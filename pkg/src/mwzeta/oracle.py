"""Brute-force point counting over F_{q^r}, used as ground truth."""

from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import FieldTooLarge
from .finite_field import find_irreducible
from .padic import FieldSpec
from .zeta import zeta_from_counts

MAX_FIELD = 10**7
CHUNK = 1 << 18


class _BigField:
    """F_p[x]/(f) with elements encoded as integers sum d_j p^j, vectorized."""

    def __init__(self, p: int, modulus: list[int]):
        self.p = p
        self.f = np.array(modulus, dtype=np.int64)
        self.m = len(modulus) - 1
        self.size = p**self.m
        self.pows = p ** np.arange(self.m, dtype=np.int64)

    def digits(self, xs):
        xs = np.asarray(xs, dtype=np.int64)
        return (xs[:, None] // self.pows[None, :]) % self.p

    def encode(self, D):
        return D @ self.pows

    def mul(self, A, B):
        """Digit arrays (N, m) x (N, m) -> (N, m)."""
        p, m = self.p, self.m
        C = np.zeros((A.shape[0], 2 * m - 1), dtype=np.int64)
        for i in range(m):
            C[:, i:i + m] += A[:, i:i + 1] * B
        C %= p
        for k in range(2 * m - 2, m - 1, -1):
            c = C[:, k:k + 1]
            C[:, k - m:k] = (C[:, k - m:k] - c * self.f[None, :m]) % p
        return C[:, :m]

    def sub_const(self, A, c):
        return (A - c[None, :]) % self.p

    def embed(self, poly_coeffs_digits):
        return np.array(poly_coeffs_digits, dtype=np.int64)


def _ext_field(field: FieldSpec, r: int) -> _BigField:
    p, m = field.p, field.n * r
    rng = random.Random(hash((p, field.n, tuple(field.gf.modulus), r)) & 0xFFFFFFFF)
    mod = find_irreducible(p, m, rng) if m > 1 else [0, 1]
    return _BigField(p, mod)


def _theta_image(field: FieldSpec, F: _BigField):
    """Digit vector of a root of the F_q modulus in F_{q^r}."""
    gmod = list(field.gf.modulus)
    if field.n == 1:
        return None
    for start in range(0, F.size, CHUNK):
        xs = np.arange(start, min(start + CHUNK, F.size), dtype=np.int64)
        X = F.digits(xs)
        acc = np.zeros_like(X)
        acc[:, 0] = gmod[-1]
        for c in reversed(gmod[:-1]):
            acc = F.mul(acc, X)
            acc[:, 0] = (acc[:, 0] + c) % F.p
        hit = np.nonzero(~acc.any(axis=1))[0]
        if len(hit):
            return X[hit[0]]
    raise RuntimeError("F_q modulus has no root in the extension")


def _embed_residue(field: FieldSpec, F: _BigField, theta, residue) -> np.ndarray:
    out = np.zeros(F.m, dtype=np.int64)
    power = np.zeros(F.m, dtype=np.int64)
    power[0] = 1
    for c in field.gf.elt(residue):
        out = (out + c * power) % F.p
        if theta is not None:
            power = F.mul(power[None, :], theta[None, :])[0]
    return out


def _square_table(F: _BigField) -> np.ndarray:
    table = np.zeros(F.size, dtype=bool)
    for start in range(0, F.size, CHUNK):
        Y = F.digits(np.arange(start, min(start + CHUNK, F.size), dtype=np.int64))
        table[F.encode(F.mul(Y, Y))] = True
    return table


def count_points_naive(residues, field: FieldSpec, r: int = 1) -> int:
    """#C(F_{q^r}) for y^2 = prod (x - lam_i), including the point at infinity."""
    size = field.q**r
    if size > MAX_FIELD:
        raise FieldTooLarge(f"q^r = {size} exceeds {MAX_FIELD}")
    F = _ext_field(field, r)
    theta = _theta_image(field, F)
    lams = [_embed_residue(field, F, theta, lam) for lam in residues]
    squares = _square_table(F)
    total = 1
    for start in range(0, F.size, CHUNK):
        X = F.digits(np.arange(start, min(start + CHUNK, F.size), dtype=np.int64))
        val = np.zeros_like(X)
        val[:, 0] = 1
        for lam in lams:
            val = F.mul(val, F.sub_const(X, lam))
        enc = F.encode(val)
        zero = enc == 0
        total += int(zero.sum()) + 2 * int((squares[enc] & ~zero).sum())
    return total


@dataclass
class CountTable:
    field: FieldSpec
    residues: list
    counts: list = dc_field(default_factory=list)

    def extend_to(self, r_max: int) -> "CountTable":
        for r in range(len(self.counts) + 1, r_max + 1):
            self.counts.append(count_points_naive(self.residues, self.field, r))
        return self

    def charpoly(self, g: int) -> list[int]:
        self.extend_to(g)
        return zeta_from_counts(self.counts, self.field.q, g)
