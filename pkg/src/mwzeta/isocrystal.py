"""The compact-support module of the hyperelliptic cover and its connection.

Elements are families of local pairs (g0, g1) meaning g0 + Y*g1, one pair per
point of Lambda = {lam_1, ..., lam_(2g+1), oo}.  At infinity the local
parameter is u = 1/t and constant terms are zero by convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Sequence

from .errors import InsufficientAnalyticPrecision, InvalidCurve
from .padic import FieldSpec, KCoefficient, PadicElement
from .series import (
    Center,
    LaurentLocal,
    Series,
    expand_rational_at,
    pole_reexpand,
    series_mul,
    split_principal,
)


@dataclass(eq=False)
class CurveData:
    """y^2 = Q(x) = prod (x - lam_i) with Teichmuller roots lam_i."""

    field: FieldSpec
    residues: list

    def __post_init__(self):
        gf = self.field.gf
        self.residues = [gf.elt(r) for r in self.residues]
        if len(set(self.residues)) != len(self.residues):
            raise InvalidCurve("ramification points not distinct")
        d = len(self.residues)
        if d < 3 or d % 2 == 0:
            raise InvalidCurve("need an odd number >= 3 of ramification points")
        self.finite_centers = [Center.teichmuller(self.field, r) for r in self.residues]
        self.infinity = Center.infinity(self.field)
        self._q_cache: dict = {}

    @property
    def g(self) -> int:
        return (len(self.residues) - 1) // 2

    @property
    def centers(self) -> list[Center]:
        """Lambda in the default order (lam_1, ..., lam_(2g+1), oo)."""
        return self.finite_centers + [self.infinity]

    def lambdas(self, prec: int) -> list[PadicElement]:
        return [c.value(prec) for c in self.finite_centers]

    def Q(self, prec: int) -> list[PadicElement]:
        """Coefficients of Q, low degree first."""
        if prec not in self._q_cache:
            R = self.field.ring(prec)
            poly = [R.one]
            for c in self.finite_centers:
                lam = c.rep(R)
                new = [R.zero] + poly
                for i, x in enumerate(poly):
                    new[i] = R.sub(new[i], R.mul(lam, x))
                poly = new
            self._q_cache[prec] = [PadicElement(R, x) for x in poly]
        return self._q_cache[prec]

    def dQ(self, prec: int) -> list[PadicElement]:
        Q = self.Q(prec)
        return [Q[i] * i for i in range(1, len(Q))]

    def residue_poly(self) -> list:
        """Q mod p as a list of F_q elements."""
        return [self.field.ring(1).residue(x.rep) for x in self.Q(1)]


class RationalFunction:
    """num(t)/den(t) with p-adic coefficients; local expansions are cached."""

    def __init__(self, num: Sequence, den: Sequence, prec: int):
        self.num = list(num)
        self.den = list(den)
        self.prec = prec
        self._cache: dict = {}

    def expand(self, center: Center, P1: int) -> LaurentLocal:
        key = (center, P1)
        if key not in self._cache:
            self._cache[key] = expand_rational_at(self.num, self.den, center, P1, prec=self.prec)
        return self._cache[key]

    def local(self, center: Center, P1: int) -> Series:
        return self.expand(center, P1).total()

    def pole_order(self, center: Center) -> int:
        pr = self.expand(center, 1).principal
        R = pr.ring
        for k, c in enumerate(pr.coeffs):
            if not R.is_zero(c):
                return max(0, -(pr.val + k))
        return 0


@dataclass
class RationalConnection:
    """Mat = G / Delta acting on the basis (1, Y)."""

    G: list
    delta: list
    prec: int
    centers: list
    entries: list = dc_field(init=False)
    m_o: int = dc_field(init=False)

    def __post_init__(self):
        self.entries = [[None if g is None else RationalFunction(g, self.delta, self.prec) for g in row]
                        for row in self.G]
        orders = [f.pole_order(c) for row in self.entries for f in row if f is not None
                  for c in self.centers]
        self.m_o = max(orders + [0])


def gauss_manin_matrix(curve: CurveData, prec: int) -> RationalConnection:
    """Delta = Q and G = [[0, 0], [0, Q'/2]] (from dY = Q'/(2Q) Y dX)."""
    Q = curve.Q(prec)
    half = [KCoefficient.from_padic(c) * Fraction(1, 2) for c in curve.dQ(prec)]
    return RationalConnection([[None, None], [None, half]], Q, prec, curve.centers)


# --------------------------------------------------------------------------
# elements of the compact-support module


class CompactSupportElement:
    """Per-center pairs (g0, g1) of power series."""

    def __init__(self, centers: Sequence[Center], parts: dict):
        self.centers = list(centers)
        self.parts = dict(parts)

    def __getitem__(self, center):
        return self.parts[center]

    @property
    def field(self):
        return self.centers[0].field

    @classmethod
    def zero(cls, centers, P1: int, prec: int) -> "CompactSupportElement":
        return cls(centers, {c: (Series.zero(c, P1, prec), Series.zero(c, P1, prec)) for c in centers})

    @classmethod
    def constant_at(cls, centers, center: Center, P1: int, prec: int, value=1) -> "CompactSupportElement":
        m = cls.zero(centers, P1, prec)
        one = Series.constant(center, value, prec, P1).copy(exact=False)
        m.parts[center] = (one, Series.zero(center, P1, prec))
        return m

    def analytic_length(self) -> int:
        return min(len(s) for pair in self.parts.values() for s in pair)

    @property
    def prec(self) -> int:
        return min(s.prec for pair in self.parts.values() for s in pair)

    def map(self, fn) -> "CompactSupportElement":
        return CompactSupportElement(self.centers, {c: tuple(fn(s) for s in pair) for c, pair in self.parts.items()})

    def __add__(self, other):
        return CompactSupportElement(self.centers, {c: (self[c][0] + other[c][0], self[c][1] + other[c][1])
                                                    for c in self.centers})

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, x) -> "CompactSupportElement":
        return self.map(lambda s: s.scale(x))

    def truncate(self, P1: int) -> "CompactSupportElement":
        return self.map(lambda s: s.truncate(P1))

    def infinity_constants_zero(self) -> bool:
        for c in self.centers:
            if c.is_infinity:
                return all(s.coeff(0).is_zero() for s in self[c])
        return True

    def equals(self, other, prec=None) -> bool:
        return all(self[c][j].equals(other[c][j], prec) for c in self.centers for j in range(2))

    def __repr__(self):
        return "CompactSupportElement(" + ", ".join(f"{c}: {self[c]}" for c in self.centers) + ")"


def _layout(centers, width: int):
    # one layout function for every vector/matrix index: center-major,
    # then Y-degree, then coefficient index
    return {(c, y, k): (ci * 2 + y) * width + k for ci, c in enumerate(centers)
            for y in range(2) for k in range(width)}


def vectorize(m: CompactSupportElement, n: int, m_o: int = 1, centers=None) -> list[KCoefficient]:
    """Coefficients of degree 0..m_o+n of every component in the block layout."""
    centers = centers or m.centers
    width = m_o + n + 1
    if width > m.analytic_length():
        raise InsufficientAnalyticPrecision(f"need {width} coefficients, have {m.analytic_length()}")
    out = []
    for c in centers:
        for y in range(2):
            s = m[c][y]
            out.extend(s.coeff(k) for k in range(width))
    return out


def devectorize(v: Sequence[KCoefficient], centers, n: int, m_o: int = 1) -> CompactSupportElement:
    width = m_o + n + 1
    parts = {}
    for ci, c in enumerate(centers):
        pair = []
        for y in range(2):
            chunk = v[(ci * 2 + y) * width:(ci * 2 + y + 1) * width]
            prec = max(min(x.prec for x in chunk), 1)
            pair.append(Series.from_scalars(c, chunk, prec))
        parts[c] = tuple(pair)
    return CompactSupportElement(centers, parts)


# --------------------------------------------------------------------------
# module action and connection


def _principal_at(pr: Series, src: Center, tgt: Center, L: int, prec: int) -> Series:
    """Expansion at tgt of a principal part living at src."""
    acc = Series.zero(tgt, L, prec)
    R = pr.ring
    for k, c in enumerate(pr.coeffs):
        e = pr.val + k
        if R.is_zero(c):
            continue
        coef = KCoefficient.from_raw(pr.field, c, pr.den, pr.prec)
        if src.is_infinity:
            term = pole_reexpand(src, -e, tgt, L, prec) if e < 0 else Series.constant(tgt, 1, prec, L)
        else:
            term = pole_reexpand(src, -e, tgt, L, prec)
        acc = acc + term.truncate(L).scale(coef)
    return acc


def project_compact(local: dict, centers, L: int) -> dict:
    """p_c: analytic part at each center minus every principal part re-expanded there."""
    splits = {c: split_principal(local[c], L) for c in centers}
    out = {}
    for tgt in centers:
        an = splits[tgt].analytic.truncate(L)
        for src in centers:
            if src == tgt:
                continue
            pr = splits[src].principal
            if pr.is_zero():
                continue
            an = an - _principal_at(pr, src, tgt, L, an.prec)
        out[tgt] = an
    return out


def _local_product(f, s: Series, L: int) -> Series:
    if f is None:
        return Series.zero(s.center, L, s.prec)
    if isinstance(f, RationalFunction):
        loc = f.local(s.center, L + 2)
    else:
        loc = f(s.center, L)
    return series_mul(loc, s.extend(L) if s.exact else s)


def apply_matrix(mat, m: CompactSupportElement, L: int | None = None) -> CompactSupportElement:
    """(Mat . m) component-wise, with principal parts redistributed."""
    L = L or m.analytic_length()
    locals_ = []
    for j in range(2):
        local = {}
        for c in m.centers:
            acc = None
            for k in range(2):
                if mat[j][k] is None:
                    continue
                term = _local_product(mat[j][k], m[c][k], L)
                acc = term if acc is None else acc + term
            local[c] = acc if acc is not None else Series.zero(c, L, m.prec)
        locals_.append(local)
    # a pole of order m_o costs m_o known coefficients
    Lout = min([L] + [s.top for local in locals_ for s in local.values() if not s.exact])
    parts = {c: [None, None] for c in m.centers}
    for j, local in enumerate(locals_):
        proj = project_compact(local, m.centers, Lout)
        for c in m.centers:
            parts[c][j] = proj[c]
    return CompactSupportElement(m.centers, {c: tuple(v) for c, v in parts.items()})


def module_action(f: RationalFunction, m: CompactSupportElement, L: int | None = None) -> CompactSupportElement:
    """f . m = p_c(local expansion of f times m)."""
    return apply_matrix([[f, None], [None, f]], m, L)


def derivative_component(s: Series) -> Series:
    """d/dt of a local component (d/dt = -u^2 d/du at infinity)."""
    if s.center.is_infinity:
        d = s.derivative().shift(2)
        return (-d).window(0, len(s))
    return s.derivative()


def apply_connection(conn: RationalConnection, m: CompactSupportElement, L: int | None = None) -> CompactSupportElement:
    """nabla_c(m) = Mat . m + dm/dt."""
    L = L or m.analytic_length()
    am = apply_matrix(conn.entries, m, L)
    parts = {}
    for c in m.centers:
        pair = []
        for j in range(2):
            d = derivative_component(m[c][j])
            top = min(len(d), len(am[c][j]))
            pair.append(am[c][j].truncate(top) + d.truncate(top))
        parts[c] = tuple(pair)
    return CompactSupportElement(m.centers, parts)


# --------------------------------------------------------------------------
# block matrices


@dataclass
class BlockSystem:
    n: int
    m_o: int
    centers: list
    M: list  # rows of KCoefficient

    @property
    def shape(self):
        return (len(self.M), len(self.M[0]) if self.M else 0)

    def __add__(self, other: "BlockSystem") -> "BlockSystem":
        return BlockSystem(self.n, self.m_o, self.centers,
                           [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.M, other.M)])

    def apply(self, v):
        zero = KCoefficient.zero(v[0].field, 10**6)
        return [sum((a * x for a, x in zip(row, v)), zero) for row in self.M]

    def dump(self) -> str:
        """Row-major text dump with rational-normalized entries (n = 1 fields)."""
        lines = []
        for row in self.M:
            lines.append(" ".join(_rational(x) for x in row))
        return "\n".join(lines)


def _rational(x: KCoefficient) -> str:
    if x.is_zero():
        return "0"
    fr = to_fraction(x)
    return str(fr) if fr is not None else repr(x)


def to_fraction(x: KCoefficient, bound: int | None = None):
    """Rational reconstruction of a Z_p-value (None if nothing small fits)."""
    if x.field.n > 1:
        return None
    if x.is_zero():
        return Fraction(0)
    pv = x.field.p ** x.relprec
    u = x.field.ring(x.relprec).reduce(x.unit)
    bound = bound or int((pv // 2) ** 0.5)
    # extended Euclid on (pv, u)
    r0, r1, s0, s1 = pv, u, 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound:
        return None
    return Fraction(r1, s1) * Fraction(x.field.p) ** x.val


def _local_coeffs(f: RationalFunction, c: Center, lo: int, hi: int) -> dict:
    loc = f.local(c, max(hi + 2, 2))
    return {e: loc.coeff(e) for e in range(lo, hi + 1)}


def build_multiplication_matrix(conn: RationalConnection, n: int, centers=None) -> BlockSystem:
    """M_n with vectorize(Mat.m, n - m_o) = M_n . vectorize(m, n)."""
    centers = centers or conn.centers
    m_o = conn.m_o
    field = centers[0].field
    prec = conn.prec
    rows_w, cols_w = n + 1, m_o + n + 1
    nr, nc = 2 * rows_w * len(centers), 2 * cols_w * len(centers)
    zero = KCoefficient.zero(field, prec)
    M = [[zero] * nc for _ in range(nr)]
    rl, cl = _layout(centers, rows_w), _layout(centers, cols_w)
    for r in range(2):
        for cy in range(2):
            f = conn.entries[r][cy]
            if f is None:
                continue
            for src in centers:
                co = _local_coeffs(f, src, -m_o, n + m_o + 1)
                for tgt in centers:
                    for k in range(cols_w):
                        if src.is_infinity and k == 0:
                            continue
                        if src == tgt:
                            for j in range(rows_w):
                                if tgt.is_infinity and j == 0:
                                    continue
                                e = j - k
                                if e >= -m_o:
                                    M[rl[(tgt, r, j)]][cl[(src, cy, k)]] = co[e]
                            continue
                        # principal part of f * z^k at src, re-expanded at tgt
                        cut = 1 if src.is_infinity else 0
                        for e in range(-m_o, cut):
                            fe = e - k
                            if fe < -m_o or co.get(fe) is None or co[fe].is_zero():
                                continue
                            if src.is_infinity and e == 0:
                                term = Series.constant(tgt, 1, prec, rows_w)
                            else:
                                term = pole_reexpand(src, -e, tgt, rows_w, prec)
                            for j in range(rows_w):
                                idx = (rl[(tgt, r, j)], cl[(src, cy, k)])
                                M[idx[0]][idx[1]] = M[idx[0]][idx[1]] - co[fe] * term.coeff(j)
    return BlockSystem(n, m_o, centers, M)


def build_derivative_matrix(centers, n: int, m_o: int = 1, prec: int = 20) -> BlockSystem:
    """D_n: d/dt on the coefficient blocks ((t - oo) = 1/t at infinity)."""
    field = centers[0].field
    rows_w, cols_w = n + 1, m_o + n + 1
    zero = KCoefficient.zero(field, prec)
    nr, nc = 2 * rows_w * len(centers), 2 * cols_w * len(centers)
    M = [[zero] * nc for _ in range(nr)]
    rl, cl = _layout(centers, rows_w), _layout(centers, cols_w)
    for c in centers:
        for y in range(2):
            for j in range(rows_w):
                if c.is_infinity:
                    if j >= 2:
                        M[rl[(c, y, j)]][cl[(c, y, j - 1)]] = KCoefficient.from_int(field, -(j - 1), prec)
                elif j + 1 < cols_w:
                    M[rl[(c, y, j)]][cl[(c, y, j + 1)]] = KCoefficient.from_int(field, j + 1, prec)
    return BlockSystem(n, m_o, list(centers), M)
