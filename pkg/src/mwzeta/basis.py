"""A basis of the compact-support cohomology: global seeds, filtering, local prolongation."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .errors import DimensionMismatch, GrowthBoundViolation, IndicialObstruction
from .isocrystal import (
    BlockSystem,
    CompactSupportElement,
    CurveData,
    RationalConnection,
    _layout,
    apply_connection,
    build_derivative_matrix,
    build_multiplication_matrix,
    gauss_manin_matrix,
)
from .padic import KCoefficient, kernel_over_K, row_reduce
from .series import Center, Series, expand_rational_at, pole_reexpand, solve_scalar_ode

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GrowthBound:
    """v_p(b_l) >= -(alpha log_p l + beta) for every basis coefficient b_l, l >= 1."""

    alpha: float
    beta: float
    B: float = 0.0

    @classmethod
    def for_prime(cls, p: int) -> "GrowthBound":
        lp = lambda x: math.log(x) / math.log(p)
        a1 = 2 * (1 + lp(2)) + 3
        b2 = a1
        b3 = 4 * (2 / (p - 1) + 4 * lp(3) + 2 * lp(2))
        b1 = a1 * lp(5) + b2 + b3
        # round up in the last printed digit so the bound stays conservative
        up = lambda x: math.ceil(x * 10**6) / 10**6
        return cls(up(2 * a1 + 2), up(2 * b1 + 2 * lp(3)))

    def floor(self, p: int, ell: int) -> float:
        return -(self.alpha * math.log(ell) / math.log(p) + self.beta)

    def check(self, s: Series, p: int) -> None:
        for ell in range(1, len(s)):
            c = s.coeff(ell)
            if not c.is_zero() and c.val < self.floor(p, ell):
                raise GrowthBoundViolation(f"coefficient {ell} at {s.center} has valuation {c.val}")


@dataclass
class CohomologyBasis:
    curve: CurveData
    elements: list
    w_part: list
    y_part: list
    seed_vectors: list
    P1: int
    prec: int
    centers: list = dc_field(default_factory=list)
    y_constants: list = dc_field(default_factory=list)  # seed constants of each y_part element

    def __len__(self):
        return len(self.elements)

    @property
    def dimension(self) -> int:
        return len(self.elements)


# --------------------------------------------------------------------------
# global stage


def global_system(curve: CurveData, conn: RationalConnection, n: int = 1, centers=None) -> BlockSystem:
    """M_n + D_n in the block layout over ``centers`` (default (lam_1, ..., oo))."""
    centers = centers or curve.centers
    return build_multiplication_matrix(conn, n, centers) + build_derivative_matrix(centers, n, conn.m_o, conn.prec)


def solve_global(curve: CurveData, conn: RationalConnection, n: int = 1, centers=None) -> list:
    """Kernel basis of (M_n + D_n) over K."""
    S = global_system(curve, conn, n, centers)
    return list(kernel_over_K(S.M))


def _constant_slots(centers, n: int, m_o: int):
    lay = _layout(centers, m_o + n + 1)
    fin = [(c, y) for c in centers if not c.is_infinity for y in range(2)]
    inf = [(c, y) for c in centers if c.is_infinity for y in range(2)]
    return [lay[(c, y, 0)] for c, y in fin], [lay[(c, y, 0)] for c, y in inf], fin


def filter_solutions(vectors: list, curve: CurveData, n: int = 1, m_o: int = 1, centers=None):
    """Reduce kernel vectors to 4g+1 seeds.

    Vectors violating the infinity-constant-zero convention are removed
    (intersection with the subspace where those slots vanish), and the
    remaining space is taken modulo vectors with zero constant terms at every
    finite center, which the analytic data cannot see.  Returns
    ``(constants, representatives)`` where each entry of ``constants`` maps
    (center, Y-degree) to the seed constant term, in reduced echelon form
    ordered as (all Y^0 slots, then Y^1 slots) over the finite centers.
    """
    centers = centers or curve.centers
    fin_idx, inf_idx, fin_keys = _constant_slots(centers, n, m_o)
    if not vectors:
        raise DimensionMismatch("empty kernel")
    field = vectors[0][0].field
    # Rel: combinations with zero constant terms at infinity
    k = len(vectors)
    rel_rows = [[v[i] for v in vectors] for i in inf_idx]
    if any(not x.is_zero() for r in rel_rows for x in r):
        coeffs = kernel_over_K(rel_rows)
        rel = [[sum((c[j] * vectors[j][i] for j in range(k)), KCoefficient.zero(field, 10**6))
                for i in range(len(vectors[0]))] for c in coeffs]
    else:
        rel = [list(v) for v in vectors]
    # image of the constant-term map, Y^0 slots ordered first
    order = sorted(range(len(fin_keys)), key=lambda i: (fin_keys[i][1], i))
    img = [[v[fin_idx[i]] for i in order] for v in rel]
    reps = [v for v, row in zip(rel, img) if any(not x.is_zero() for x in row)]
    img = [row for row in img if any(not x.is_zero() for x in row)]
    if not img:
        raise DimensionMismatch("no relevant solutions")
    R, piv = row_reduce([list(r) for r in img])
    rank = len(piv)
    expected = 4 * curve.g + 1
    if rank != expected:
        raise DimensionMismatch(f"found {rank} independent seeds, expected {expected}")
    consts = []
    for row in R[:rank]:
        consts.append({fin_keys[order[j]]: row[j] for j in range(len(order))})
    return consts, reps


# --------------------------------------------------------------------------
# local stage


def _residues(conn: RationalConnection, center: Center):
    """Residue matrix of Mat at a finite center (simple poles)."""
    out = [[None, None], [None, None]]
    for j in range(2):
        for k in range(2):
            f = conn.entries[j][k]
            if f is not None:
                out[j][k] = f.expand(center, 1).principal.coeff(-1)
    return out


def local_rhs(curve: CurveData, conn: RationalConnection, constants: dict, center: Center, P1: int):
    """The right-hand side u at ``center`` for a seed with given constant terms.

    u_j = sum over finite centers l of res_l(Mat_jk) c_k^l / (t - l), expanded
    at ``center``; returned as a pair of Laurent series (None when zero).
    """
    prec = conn.prec
    out = [None, None]
    for src in curve.finite_centers:
        res = _residues(conn, src)
        for j in range(2):
            w = None
            for k in range(2):
                c = constants.get((src, k))
                if res[j][k] is None or c is None or c.is_zero() or res[j][k].is_zero():
                    continue
                term = res[j][k] * c
                w = term if w is None else w + term
            if w is None or w.is_zero():
                continue
            if src == center:
                piece = Series(center.field, center, -1, [center.field.ring(prec).one], 0, prec, exact=True)
                piece = piece.scale(w)
            else:
                piece = pole_reexpand(src, 1, center, P1 + 2, prec).scale(w)
            out[j] = piece if out[j] is None else out[j] + piece
    return out


def _s(center: Center, prec: int, sign: int = 1) -> Series:
    R = center.field.ring(prec)
    return Series(center.field, center, 0, [R.zero, R.from_int(sign)], 0, prec, exact=True)


def prolong_local(curve: CurveData, conn: RationalConnection, constants: dict, P1: int,
                  bound: GrowthBound | None = None) -> CompactSupportElement:
    """The unique horizontal element with the given finite constant terms, to P1 terms."""
    prec = conn.prec
    parts = {}
    for center in curve.centers:
        rhs = local_rhs(curve, conn, constants, center, P1)
        comps = []
        for j in range(2):
            if conn.entries[j][1 - j] is not None:
                raise IndicialObstruction("coupled connections are not supported by the local stage")
            f = conn.entries[j][j]
            mat = None if f is None else f.local(center, P1 + 2)
            if center.is_infinity:
                # -u^2 dg/du + Mat g = rhs, divided by u
                lead = _s(center, prec, -1)
                a = None if mat is None else (-mat).shift(-1)
                b = None if rhs[j] is None else rhs[j].shift(-1)
                init = 0
            else:
                lead = _s(center, prec)
                a = None if mat is None else (-mat).shift(1)
                b = None if rhs[j] is None else rhs[j].shift(1)
                init = constants.get((center, j), 0)
            if a is None and b is None:
                ik = init if isinstance(init, KCoefficient) else KCoefficient.from_int(curve.field, init, prec)
                comps.append(Series.constant(center, ik, prec, P1).copy(exact=False))
                continue
            comps.append(solve_scalar_ode(lead, a, b, init, P1))
        parts[center] = tuple(comps)
    m = CompactSupportElement(curve.centers, parts)
    L = m.analytic_length()
    m = m.truncate(L)
    if bound is not None:
        for pair in m.parts.values():
            for s in pair:
                bound.check(s, curve.field.p)
    return m


def connection_residual(conn: RationalConnection, m: CompactSupportElement) -> CompactSupportElement:
    """nabla_c(m); zero up to truncation for horizontal elements."""
    return apply_connection(conn, m)


def compute_basis(curve: CurveData, P1: int, prec: int, centers=None, check: bool = True) -> CohomologyBasis:
    """Global seeds at block precision 1, filtered, prolonged locally to P1 terms."""
    conn = gauss_manin_matrix(curve, prec)
    order = centers or curve.centers
    vecs = solve_global(curve, conn, 1, order)
    consts, reps = filter_solutions(vecs, curve, 1, conn.m_o, order)
    bound = GrowthBound.for_prime(curve.field.p)
    elements, w_part, y_part, y_consts = [], [], [], []
    for cs in consts:
        nonzero = [k for k, v in cs.items() if not v.is_zero()]
        if all(y == 0 for _, y in nonzero):
            # horizontal constants: exact, no prolongation needed
            c = nonzero[0][0]
            el = CompactSupportElement.constant_at(curve.centers, c, P1, prec, cs[nonzero[0]])
            w_part.append(el)
        else:
            el = prolong_local(curve, conn, cs, P1, bound if check else None)
            y_part.append(el)
            y_consts.append({c: cs[(c, 1)] for c in curve.finite_centers})
        elements.append(el)
    log.info("basis: %d constant + %d Y-part elements", len(w_part), len(y_part))
    return CohomologyBasis(curve, elements, w_part, y_part, reps, P1, prec, list(order), y_consts)
