"""The p-power Frobenius on the cohomology basis.

F acts on t by t -> t^p (sigma on coefficients) and on Y by
F(Y) = Y * phi with phi = Q(t)^((p-1)/2) * (1 + E/Q(t)^p)^(1/2),
E = Q^sigma(t^p) - Q(t)^p.  A horizontal element m with Y-part g is sent to
the element with Y-part phi * g^sigma(t^p) after principal parts are moved
to infinity; the first 2g+1 coefficients at infinity identify it.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction

from .basis import CohomologyBasis, GrowthBound
from .errors import PrecisionExhausted, SingularDecomposition
from .isocrystal import CurveData
from .padic import KCoefficient, PadicElement, row_reduce
from .series import (
    Center,
    Series,
    expand_rational_at,
    local_poly,
    pole_reexpand,
    series_invert,
    series_mul,
    series_pow,
    series_sqrt,
    solve_scalar_ode,
)

log = logging.getLogger(__name__)


# --------------------------------------------------------------------------
# precision policy


@dataclass(frozen=True)
class PrecisionPolicy:
    p: int
    g: int
    n_ext: int
    P2: int
    alpha: float
    beta: float
    N_frob: int
    P1: int
    working: int
    empirical: bool = False
    closed_form: float = 0.0

    def as_dict(self) -> dict:
        return {"P1": self.P1, "P2": self.P2, "N_frob": self.N_frob, "alpha": self.alpha,
                "beta": self.beta, "working": self.working, "empirical": self.empirical}


def target_digits(g: int, p: int, n_ext: int) -> int:
    """Digits of the charpoly needed by the Weil bound, without safety margin."""
    return math.ceil(g * n_ext / 2 + (2 * g + 1) * math.log(2) / math.log(p))


def truncation_ok(bound: GrowthBound, p: int, N: int, P2: int) -> bool:
    P1 = p * N - (p - 1) // 2
    return bound.alpha * math.log(P1) / math.log(p) + bound.beta - N <= -P2


def _working_precision(p: int, P1: int, P2: int) -> int:
    # the twisted equation loses 1/(p-1) digit per coefficient at a unit
    # center; the basis recurrence loses O(log_p P1)
    lp = math.ceil(math.log(2 * P1) / math.log(p))
    return P2 + math.ceil((P1 - 1) / (p - 1)) + 3 * lp + 4


def required_precisions(g: int, p: int, n_ext: int = 1, safety: int = 2) -> PrecisionPolicy:
    """Theoretical precisions: N_frob from the closed form, then raised until the bound holds."""
    bound = GrowthBound.for_prime(p)
    a, b = bound.alpha, bound.beta
    P2 = target_digits(g, p, n_ext) + safety
    # the first branch can be negative or undefined for small alpha; the
    # direct check below is authoritative
    arg = a / (2 * math.log(p))
    first = 2 * a * math.log(arg) / math.log(p) if arg > 0 else 0.0
    closed = max(first, 2 * (a + b + P2))
    N = max(1, math.ceil(closed))
    while not truncation_ok(bound, p, N, P2):
        N += 1
    P1 = p * N - (p - 1) // 2
    return PrecisionPolicy(p, g, n_ext, P2, a, b, N, P1, _working_precision(p, P1, P2), False, closed)


def empirical_precisions(g: int, p: int, n_ext: int = 1, P1: int | None = None,
                         P2: int | None = None, safety: int = 2) -> PrecisionPolicy:
    """User-chosen (or small default) precisions; results must pass validation."""
    bound = GrowthBound.for_prime(p)
    P2 = P2 if P2 is not None else target_digits(g, p, n_ext) + safety
    if P1 is None:
        N = P2 + 2 + math.ceil(math.log(2 * g + 2) / math.log(p))
        P1 = p * N - (p - 1) // 2
    else:
        N = math.ceil((P1 + (p - 1) // 2) / p)
    return PrecisionPolicy(p, g, n_ext, P2, bound.alpha, bound.beta, N, P1,
                           _working_precision(p, P1, P2), True)


# --------------------------------------------------------------------------
# polynomial helpers (raw reps, low degree first)


def _poly_sigma(R, poly):
    return [R.sigma(c) for c in poly]


def _poly_at_tp(R, poly, p: int):
    out = [R.zero] * ((len(poly) - 1) * p + 1)
    for i, c in enumerate(poly):
        out[i * p] = c
    return out


def _poly_from_roots(R, roots):
    poly = [R.one]
    for r in roots:
        new = [R.zero] + poly
        for i, x in enumerate(poly):
            new[i] = R.sub(new[i], R.mul(r, x))
        poly = new
    return poly


def _poly_mul(R, a, b):
    return R.poly_mul_schoolbook(a, b) if min(len(a), len(b)) < 12 else R.poly_mul(a, b)


def _poly_pow(R, a, e):
    out = [R.one]
    for _ in range(e):
        out = _poly_mul(R, out, a)
    return out


def _padic_list(R, poly):
    return [PadicElement(R, c) for c in poly]


def _half_binomial_scaled(field, k: int, prec: int) -> KCoefficient:
    """binom(1/2, k) * p^k (integral)."""
    b = Fraction(1)
    for i in range(k):
        b *= Fraction(1, 2) - i
        b /= i + 1
    return KCoefficient.from_fraction(field, b * field.p**k, prec)


def lift_terms(p: int, N: int) -> int:
    """Number of binomial terms so that every dropped term is divisible by p^N."""
    K = N
    while any(k - math.floor(math.log(2 * k - 1) / math.log(p)) < N for k in range(K + 1, K + 2 * p + 2)):
        K += 1
    return K


# --------------------------------------------------------------------------
# local expansions of F(Y)/Y


@dataclass
class FrobeniusLiftLocal:
    center: Center
    phi: Series  # F(Y)/Y on a window of exponents
    N_frob: int
    pole_order: int

    @property
    def principal(self) -> Series:
        return self.phi.window(self.phi.val, 0) if self.phi.val < 0 else self.phi.window(0, 0)


def lift_frobenius_local(curve: CurveData, center: Center, N_frob: int, prec: int,
                         lo: int, hi: int) -> FrobeniusLiftLocal:
    """F(Y)/Y at ``center`` on exponents [lo, hi), mod p^N_frob (plus the working digits)."""
    field = curve.field
    p = field.p
    R = field.ring(prec)
    roots = [c.rep(R) for c in curve.finite_centers]
    Q = _poly_from_roots(R, roots)
    Qs = _poly_from_roots(R, [R.sigma(r) for r in roots])
    half = (p - 1) // 2
    if center.is_infinity:
        # t = 1/u: Q = u^-d q(u) with q the reversed polynomial, q(0) = 1
        d = len(Q) - 1
        D = d * half
        L = hi + D
        if L <= 0:
            return FrobeniusLiftLocal(center, Series(field, center, lo, [R.zero] * max(hi - lo, 0), 0, prec),
                                      N_frob, D)
        q = Series(field, center, 0, list(reversed(Q)), 0, prec, exact=True)
        qs = Series(field, center, 0, _poly_at_tp(R, list(reversed(Qs)), p), 0, prec, exact=True)
        ratio = series_mul(qs, series_invert(series_pow(q, p, L), L), L)
        root = series_sqrt(ratio, L)
        phi = series_mul(series_pow(q, half, L), root, L).shift(-D)
        return FrobeniusLiftLocal(center, phi.window(lo, hi), N_frob, D)

    # E = Q^sigma(t^p) - Q^p is divisible by p; form E/p one digit wider
    R1 = field.ring(prec + 1)
    Q1 = _poly_from_roots(R1, [c.rep(R1) for c in curve.finite_centers])
    Qs1 = _poly_at_tp(R1, _poly_from_roots(R1, [R1.sigma(c.rep(R1)) for c in curve.finite_centers]), p)
    Qp1 = _poly_pow(R1, Q1, p)
    n = max(len(Qs1), len(Qp1))
    E = [R1.sub(Qs1[i] if i < len(Qs1) else R1.zero, Qp1[i] if i < len(Qp1) else R1.zero) for i in range(n)]
    if any(not R1.is_zero(c) and R1.valuation(c) < 1 for c in E):
        raise PrecisionExhausted("Frobenius correction term is not divisible by p")
    E1 = [R.reduce(R1.div_p(c, 1)) for c in E]
    K = lift_terms(p, N_frob)
    h0 = hi - half
    top = h0 + K * (p - 1) + p + 2
    Qloc = local_poly(field, _padic_list(R, Q), center, prec)
    U = Qloc.window(1, Qloc.top).shift(-1).copy(exact=True)
    Up = series_pow(U, p, top + p)
    Wloc = series_mul(local_poly(field, _padic_list(R, E1), center, prec), series_invert(Up, top + p), top + p)
    z = 0
    while z < len(Wloc.coeffs) and Wloc.ring.is_zero(Wloc.coeffs[z]):
        z += 1
    # E/p vanishes at the (Teichmuller) center, so V has a pole of order < p
    V = Wloc.copy(val=z - p, coeffs=Wloc.coeffs[z:])
    vV = V.val
    acc = Series.constant(center, _half_binomial_scaled(field, K, prec), prec)
    for k in range(K - 1, -1, -1):
        hk = h0 + k * (p - 1)
        need = hk - vV - acc.val
        prod = series_mul(V.truncate(max(need, 1)), acc if acc.exact else acc, max(need, 1))
        acc = (prod + Series.constant(center, _half_binomial_scaled(field, k, prec), prec)).truncate_top(hk)
    Uh = series_pow(U, half, hi + K * p + 2) if half else Series.constant(center, 1, prec)
    phi = series_mul(acc, Uh.truncate(max(h0 - acc.val + 1, 1)))
    phi = phi.shift(half).truncate_top(hi)
    pole = max(0, -phi.val)
    return FrobeniusLiftLocal(center, phi.window(lo, hi), N_frob, pole)


# --------------------------------------------------------------------------
# F_B: substitution t -> t^p with sigma on coefficients


def _twist(center: Center, prec: int) -> Series:
    """t^p - sigma(center) in the local parameter at a finite center."""
    field = center.field
    R = field.ring(prec)
    lam = center.rep(R)
    poly = [R.neg(R.pow(lam, field.p))] + [R.zero] * (field.p - 1) + [R.one]
    return local_poly(field, _padic_list(R, poly), center, prec)


def pullback_direct(g: Series, L: int | None = None) -> Series:
    """F_B(g) = sum sigma(b_l) c(s)^l by Horner (slow reference path)."""
    center = g.center
    field = g.field
    if center.is_infinity:
        raise ValueError("use pullback_infinity at infinity")
    L = L or len(g)
    c = _twist(center, g.prec)
    gs = g.sigma()
    acc = Series(field, center, 0, [gs.coeffs[-1]], gs.den, gs.prec, exact=True)
    ring = gs.ring
    for ell in range(len(gs.coeffs) - 2, -1, -1):
        acc = series_mul(c, acc, L)
        acc = acc + Series(field, center, 0, [gs.coeffs[ell]], gs.den, gs.prec, exact=True)
        acc = acc.truncate(L)
    return acc


def pullback_infinity(g: Series, L: int) -> Series:
    """F_B(g) at infinity: sum sigma(a_k) u^(pk)."""
    p = g.field.p
    gs = g.sigma()
    R = gs.ring
    out = [R.zero] * L
    for k, c in enumerate(gs.coeffs):
        if k * p >= L:
            break
        out[k * p] = c
    if (len(gs.coeffs) - 1) * p < L - 1 and not g.exact:
        raise PrecisionExhausted("not enough coefficients at infinity")
    return Series(g.field, g.center, 0, out, gs.den, gs.prec)


def twisted_equation(curve: CurveData, center: Center, constants: dict, P1: int, prec: int):
    """(c, a, b, init) with c(s) G' = a G + b satisfied by G = F_B(g) at a finite center.

    g is the Y-part of the horizontal element with Y-constant terms
    ``constants`` (center -> value).  With H = (t - lam) Q'/(2Q) and
    Rt = (t - lam) * 1/2 sum c_i/(t - lam_i):
    a = -p t^(p-1) F_B(H), b = p t^(p-1) F_B(Rt), init = sigma(c_lam).
    """
    field = curve.field
    p = field.p
    R = field.ring(prec)
    roots = [c.rep(R) for c in curve.finite_centers]
    sroots = [R.sigma(r) for r in roots]
    idx = curve.finite_centers.index(center)
    tpm1 = [R.zero] * (p - 1) + [R.one]
    ptpm1 = [R.zero] * (p - 1) + [R.from_int(p)]
    others = [_poly_at_tp(R, [R.neg(r), R.one], p) for i, r in enumerate(sroots) if i != idx]
    den = [R.from_int(2)]
    for f in others:
        den = _poly_mul(R, den, f)
    Qs = _poly_from_roots(R, sroots)
    dQs = [R.scal(Qs[i], i) for i in range(1, len(Qs))]
    num_a = [R.neg(x) for x in _poly_mul(R, ptpm1, _poly_at_tp(R, dQs, p))]
    L = P1 + p + 2
    a = expand_rational_at(_padic_list(R, num_a), _padic_list(R, den), center, L, prec).total()
    lead = _twist(center, prec)
    b = None
    half = KCoefficient.from_fraction(field, Fraction(1, 2), prec)
    for i, c_i in ((i, constants.get(cen)) for i, cen in enumerate(curve.finite_centers)):
        if c_i is None or c_i.is_zero():
            continue
        w = half * c_i.sigma()
        if i == idx:
            term = local_poly(field, _padic_list(R, ptpm1), center, prec).scale(w)
        else:
            num = _poly_mul(R, ptpm1, _poly_at_tp(R, [R.neg(sroots[idx]), R.one], p))
            dd = _poly_at_tp(R, [R.neg(sroots[i]), R.one], p)
            term = expand_rational_at(_padic_list(R, num), _padic_list(R, dd), center, L, prec).total().scale(w)
        b = term if b is None else b + term
    init = constants.get(center)
    init = init.sigma() if init is not None else KCoefficient.zero(field, prec)
    return lead, a, b, init


def pullback_ode(curve: CurveData, center: Center, constants: dict, P1: int, prec: int) -> Series:
    lead, a, b, init = twisted_equation(curve, center, constants, P1, prec)
    return solve_scalar_ode(lead, a, b, init, P1)


# --------------------------------------------------------------------------
# image at infinity and decomposition


def principal_moments(phi: Series, G: Series, r_max: int) -> list[KCoefficient]:
    """[phi G]_{-r} for r = 1..r_max."""
    out = []
    for r in range(1, r_max + 1):
        acc = KCoefficient.zero(G.field, 10**6)
        n = min(len(G), -r - phi.val + 1)
        if n > 0:
            R = G.field.ring(min(phi.prec - G.den, G.prec - phi.den) + phi.den + G.den)
            xs = [R.reduce(phi.raw_at(-r - j)) for j in range(n)]
            ys = [R.reduce(G.coeffs[j]) for j in range(n)]
            acc = KCoefficient.from_raw(G.field, R.dot(xs, ys), phi.den + G.den,
                                        min(phi.prec - G.den, G.prec - phi.den))
        out.append(acc)
    return out


def redistribute_to_infinity(inf_product: Series, moments: dict, r_max: int, prec: int) -> list[KCoefficient]:
    """Coefficients u^1..u^r_max of the infinity component after p_c."""
    center = inf_product.center
    out = [inf_product.coeff(i) for i in range(1, r_max + 1)]
    for src, mom in moments.items():
        for r, m in enumerate(mom, start=1):
            if m.is_zero():
                continue
            e = pole_reexpand(src, r, center, r_max + 1, prec)
            for i in range(1, r_max + 1):
                out[i - 1] = out[i - 1] - m * e.coeff(i)
    return out


@dataclass
class FrobeniusMatrix:
    entries: list  # rows of KCoefficient; column k is the image of basis element k
    prec: int

    @property
    def dim(self) -> int:
        return len(self.entries)


def decompose_in_basis(images: list, basis_inf: list, r_max: int) -> FrobeniusMatrix:
    """Solve image_k = sum_j X_jk e_j from the coefficients u^1..u^r_max at infinity."""
    dim = len(basis_inf)
    cols = []
    for img in images:
        rows = [[basis_inf[j][i] for j in range(dim)] + [img[i]] for i in range(r_max)]
        red, piv = row_reduce(rows, column_order=list(range(dim)))
        if piv != list(range(dim)):
            raise SingularDecomposition("basis is not separated by its coefficients at infinity")
        for extra in red[dim:]:
            if not extra[dim].is_zero():
                raise SingularDecomposition(f"image is not in the span of the basis (residual valuation {extra[dim].val})")
        cols.append([red[j][dim] for j in range(dim)])
    entries = [[cols[k][j] for k in range(len(images))] for j in range(dim)]
    prec = min(x.prec for row in entries for x in row)
    return FrobeniusMatrix(entries, prec)


def frobenius_images_at_infinity(curve: CurveData, basis: CohomologyBasis, policy: PrecisionPolicy,
                                 method: str = "ode") -> list:
    """Coefficients u^1..u^(2g+1) at infinity of F(e) for every Y-part basis element e."""
    g = curve.g
    r_max = 2 * g + 1
    prec = policy.working
    P1 = basis.P1
    lifts = {}
    for c in curve.finite_centers:
        lifts[c] = lift_frobenius_local(curve, c, policy.N_frob, prec, -(P1 + r_max + 1), 0)
    lift_inf = lift_frobenius_local(curve, curve.infinity, policy.N_frob, prec, -policy.p * (2 * g + 1), r_max + 1)
    images = []
    for el, consts in zip(basis.y_part, basis.y_constants):
        moments = {}
        for c in curve.finite_centers:
            if method == "ode":
                G = pullback_ode(curve, c, consts, P1, prec)
            else:
                G = pullback_direct(el[c][1], P1)
            moments[c] = principal_moments(lifts[c].phi, G, r_max)
        Lg = r_max + 1 + lift_inf.pole_order
        Ginf = pullback_infinity(el[curve.infinity][1], Lg)
        prod = series_mul(lift_inf.phi.window(-lift_inf.pole_order, r_max + 1), Ginf)
        img = redistribute_to_infinity(prod, moments, r_max, prec)
        # the lift is only correct mod p^N_frob, which tracked precision cannot see
        images.append([x.with_prec(min(x.prec, policy.N_frob)) for x in img])
    return images


def frobenius_matrix(curve: CurveData, basis: CohomologyBasis, policy: PrecisionPolicy,
                     method: str = "ode") -> FrobeniusMatrix:
    """Matrix of the p-power Frobenius on the Y-part of the basis."""
    r_max = 2 * curve.g + 1
    images = frobenius_images_at_infinity(curve, basis, policy, method)
    basis_inf = [[el[curve.infinity][1].coeff(i) for i in range(1, r_max + 1)] for el in basis.y_part]
    M = decompose_in_basis(images, basis_inf, r_max)
    log.info("Frobenius matrix computed with %d digits", M.prec)
    return M
