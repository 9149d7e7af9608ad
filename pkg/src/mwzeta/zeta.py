"""From the Frobenius matrix to the zeta function and point counts."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field as dc_field
from math import comb

from .errors import CoefficientOutOfWeilRange, InconsistentCounts, PrecisionExhausted
from .padic import KCoefficient

log = logging.getLogger(__name__)


def _mat_mul(A, B):
    n, m, k = len(A), len(B), len(B[0])
    zero = KCoefficient.zero(A[0][0].field, 10**6)
    return [[sum((A[i][l] * B[l][j] for l in range(m)), zero) for j in range(k)] for i in range(n)]


def _mat_sigma(A, k: int):
    return [[x.sigma(k) for x in row] for row in A]


def frobenius_norm(M, n_ext: int):
    """M * sigma(M) * ... * sigma^(n_ext-1)(M), by divide and conquer.

    With N_k the k-factor product, N_2k = N_k * sigma^k(N_k) and
    N_(k+1) = N_k * sigma^k(M).
    """
    if n_ext < 1:
        raise ValueError("n_ext must be positive")
    if n_ext == 1:
        return [list(r) for r in M]
    half = frobenius_norm(M, n_ext // 2)
    k = n_ext // 2
    out = _mat_mul(half, _mat_sigma(half, k))
    if n_ext % 2:
        out = _mat_mul(out, _mat_sigma(M, 2 * k))
    return out


def frobenius_norm_naive(M, n_ext: int):
    out = [list(r) for r in M]
    for k in range(1, n_ext):
        out = _mat_mul(out, _mat_sigma(M, k))
    return out


def berkowitz(A) -> list[KCoefficient]:
    """Coefficients c_0..c_n of det(t I - A), highest degree first (c_0 = 1); division free."""
    n = len(A)
    field = A[0][0].field
    one = KCoefficient.from_int(field, 1, 10**6)
    zero = KCoefficient.zero(field, 10**6)
    vec = [one, -A[0][0]]
    for r in range(1, n):
        # Toeplitz column for the leading (r+1)x(r+1) block
        R = A[r][:r]
        S = [A[i][r] for i in range(r)]
        Ar = [row[:r] for row in A[:r]]
        col = [one, -A[r][r]]
        X = S
        for _ in range(r):
            col.append(-sum((R[j] * X[j] for j in range(r)), zero))
            X = [sum((Ar[i][j] * X[j] for j in range(r)), zero) for i in range(r)]
        # multiply the (r+2) x (r+1) lower-triangular Toeplitz matrix by vec
        new = []
        for i in range(r + 2):
            acc = zero
            for j in range(min(i + 1, len(vec))):
                acc = acc + col[i - j] * vec[j]
            new.append(acc)
        vec = new
    return vec


def det_one_minus_t(A) -> list[KCoefficient]:
    """Coefficients of det(1 - t A), ascending."""
    return berkowitz(A)


def weil_bound(g: int, q: int, i: int) -> float:
    return comb(2 * g, i) * q ** (i / 2)


def charpoly_and_round(M, q: int, g: int, P2: int | None = None):
    """Integer coefficients of det(1 - t M) (balanced lift), with notes.

    Coefficients i <= g must be determined by the available precision;
    higher ones are rounded when the precision allows and otherwise taken
    from the functional equation (recorded in the returned notes).
    """
    p = M[0][0].field.p
    raw = det_one_minus_t(M)
    out = [1] + [None] * (2 * g)
    notes = []
    for i in range(1, 2 * g + 1):
        c = raw[i]
        prec = c.prec if P2 is None else min(c.prec, max(P2, c.prec if i > g else P2))
        if c.field.n > 1 and not c.is_zero():
            comps = c.raw(max(0, -c.val), c.prec)
            if any(x % p ** max(c.prec + max(0, -c.val), 0) for x in list(comps)[1:]):
                raise CoefficientOutOfWeilRange(f"coefficient {i} is not in Z_p")
        mod = p ** max(c.prec, 0)
        bound = weil_bound(g, q, i)
        if mod > 2 * bound:
            v = c.balanced_int()
            if abs(v) > bound:
                raise CoefficientOutOfWeilRange(f"a_{i} = {v} exceeds the Weil bound {bound:.1f}")
            out[i] = v
        elif i > g:
            notes.append(f"a_{i} from the functional equation")
        else:
            raise PrecisionExhausted(f"a_{i} known to {c.prec} digits, need > log_p(2*{bound:.1f})")
    for i in range(g + 1, 2 * g + 1):
        sym = q ** (i - g) * out[2 * g - i]
        if out[i] is None:
            out[i] = sym
    return out, notes


def power_sums(P: list[int], r_max: int) -> list[int]:
    """s_1..s_r_max of the reciprocal roots of P = 1 + a_1 t + ... (Newton's identities)."""
    a = list(P) + [0] * max(0, r_max + 1 - len(P))
    s = []
    for r in range(1, r_max + 1):
        v = -r * a[r] - sum(a[i] * s[r - i - 1] for i in range(1, r))
        s.append(v)
    return s


def counts_from_charpoly(P: list[int], q: int, r_max: int) -> list[int]:
    return [q**r + 1 - s for r, s in zip(range(1, r_max + 1), power_sums(P, r_max))]


def zeta_from_counts(counts: list[int], q: int, g: int) -> list[int]:
    """Recover det(1 - t phi) from N_1..N_g."""
    if g == 0:
        return [1]
    if len(counts) < g:
        raise InconsistentCounts(f"need {g} counts, got {len(counts)}")
    s = [q**r + 1 - counts[r - 1] for r in range(1, g + 1)]
    a = [1]
    for r in range(1, g + 1):
        num = s[r - 1] + sum(a[i] * s[r - i - 1] for i in range(1, r))
        if num % r:
            raise InconsistentCounts("counts do not come from an integral polynomial")
        a.append(-num // r)
    for i in range(g + 1, 2 * g + 1):
        a.append(q ** (i - g) * a[2 * g - i])
    return a


def validate_weil(P: list[int], q: int, g: int, r_max: int | None = None, oracle_counts=None) -> dict:
    """Functional equation, Hasse-Weil bounds and optional oracle agreement (reports only)."""
    flags = {}
    flags["functional_equation"] = len(P) == 2 * g + 1 and P[0] == 1 and all(
        P[2 * g - i] == q ** (g - i) * P[i] for i in range(g + 1))
    r_max = r_max or max(g, 1)
    counts = counts_from_charpoly(P, q, r_max)
    flags["hasse_weil"] = all(abs(N - (q**r + 1)) <= 2 * g * q ** (r / 2) + 1e-9
                              for r, N in zip(range(1, r_max + 1), counts))
    flags["coefficient_bounds"] = all(abs(P[i]) <= weil_bound(g, q, i) + 1e-9 for i in range(len(P)))
    if oracle_counts is not None:
        flags["oracle"] = list(oracle_counts) == counts[: len(oracle_counts)]
    return flags


@dataclass
class ZetaResult:
    charpoly: list
    counts: list
    q: int
    g: int
    validated: dict
    precisions: dict = dc_field(default_factory=dict)
    timings: dict = dc_field(default_factory=dict)
    notes: list = dc_field(default_factory=list)
    frobenius_digits: int = 0

    @property
    def ok(self) -> bool:
        return all(self.validated.values())

    def to_json(self) -> dict:
        return {"charpoly": self.charpoly, "counts": self.counts, "q": self.q, "g": self.g,
                "precisions_used": self.precisions, "timings": self.timings,
                "validation": self.validated, "notes": self.notes}


def zeta_and_counts(P: list[int], q: int, r_max: int, g: int | None = None) -> ZetaResult:
    g = (len(P) - 1) // 2 if g is None else g
    counts = counts_from_charpoly(P, q, r_max)
    return ZetaResult(list(P), counts, q, g, validate_weil(P, q, g, r_max))


def compute_zeta(curve, policy, r_max: int | None = None, method: str = "ode",
                 oracle: bool = False) -> ZetaResult:
    """Full pipeline: basis, Frobenius matrix, norm, charpoly, counts, validation."""
    from .basis import compute_basis
    from .frobenius import frobenius_matrix

    field = curve.field
    g = curve.g
    q = field.q
    r_max = r_max or max(g, 1)
    timings = {}
    t = time.perf_counter()
    basis = compute_basis(curve, policy.P1, policy.working)
    timings["basis"] = time.perf_counter() - t
    t = time.perf_counter()
    M = frobenius_matrix(curve, basis, policy, method)
    timings["frobenius"] = time.perf_counter() - t
    t = time.perf_counter()
    MS = frobenius_norm(M.entries, field.n)
    P, notes = charpoly_and_round(MS, q, g)
    counts = counts_from_charpoly(P, q, r_max)
    timings["zeta"] = time.perf_counter() - t
    oc = None
    if oracle:
        from .oracle import count_points_naive
        t = time.perf_counter()
        oc = [count_points_naive(curve.residues, field, r) for r in range(1, r_max + 1)]
        timings["oracle"] = time.perf_counter() - t
    flags = validate_weil(P, q, g, r_max, oc)
    res = ZetaResult(P, counts, q, g, flags, policy.as_dict(), timings, notes, M.prec)
    log.info("charpoly %s, counts %s", P, counts)
    return res
