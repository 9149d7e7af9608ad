import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mwzeta.basis import GrowthBound, compute_basis
from mwzeta.errors import SingularDecomposition
from mwzeta.frobenius import (
    _padic_list,
    _poly_at_tp,
    _poly_from_roots,
    decompose_in_basis,
    empirical_precisions,
    frobenius_matrix,
    lift_frobenius_local,
    lift_terms,
    pullback_direct,
    pullback_infinity,
    pullback_ode,
    required_precisions,
    truncation_ok,
)
from mwzeta.isocrystal import CurveData
from mwzeta.padic import FieldSpec, KCoefficient
from mwzeta.series import local_poly, series_mul

RNGS = st.integers(0, 2**32 - 1).map(random.Random)

CROSS_CURVES = [
    (5, 1, [0, 1, 4]),
    (7, 1, [0, 1, 2, 3, 4]),
    (7, 1, [1, 2, 5]),
    (3, 2, [(0, 1), (1, 1), (2, 1)]),
]


def _curve(p, n, res):
    return CurveData(FieldSpec.make(p, n), res)


def test_theoretical_policy_p5_g1():
    pol = required_precisions(1, 5)
    assert (pol.alpha, pol.beta) == (13.722707, 57.544849)
    assert pol.P2 == math.ceil(0.5 + 3 * math.log(2, 5)) + 2
    assert (pol.N_frob, pol.P1, pol.working) == (151, 753, 211)
    gb = GrowthBound.for_prime(5)
    assert truncation_ok(gb, 5, pol.N_frob, pol.P2)
    # N comes from the closed form and is only raised if the direct check fails
    assert pol.N_frob == math.ceil(pol.closed_form)
    assert pol.P1 == 5 * pol.N_frob - 2


@pytest.mark.parametrize("p", [3, 5, 7, 11])
@pytest.mark.parametrize("N", [1, 4, 10, 30])
def test_lift_terms_drop_only_small_terms(p, N):
    K = lift_terms(p, N)

    def v(k):
        b = Fraction(1)
        for i in range(k):
            b = b * (Fraction(1, 2) - i) / (i + 1)
        x = b * p**k
        num, den = x.numerator, x.denominator
        out = 0
        while num % p == 0:
            num //= p
            out += 1
        while den % p == 0:
            den //= p
            out -= 1
        return out

    assert all(v(k) >= N for k in range(K + 1, K + 40))


@pytest.mark.parametrize("p,n,res", CROSS_CURVES)
def test_lift_squares_to_frobenius_twist(p, n, res):
    curve = _curve(p, n, res)
    f = curve.field
    N, prec = 4, 12
    R = f.ring(prec)
    Q = _poly_from_roots(R, [c.rep(R) for c in curve.finite_centers])
    Qs = _poly_at_tp(R, _poly_from_roots(R, [R.sigma(c.rep(R)) for c in curve.finite_centers]), p)
    bound = p * N - (p - 1) // 2
    for c in curve.centers:
        if c.is_infinity:
            D = (len(Q) - 1) * (p - 1) // 2
            lift = lift_frobenius_local(curve, c, N, prec, -D, 12)
            assert lift.pole_order == D
        else:
            lift = lift_frobenius_local(curve, c, N, prec, -bound - 1, bound + 12)
            # pole-order bound on the principal part
            assert lift.pole_order <= bound
            assert lift.phi.coeff(-bound - 1).with_prec(N).is_zero()
        phi = lift.phi
        lhs = series_mul(series_mul(phi, phi), local_poly(f, _padic_list(R, Q), c, prec))
        rhs = local_poly(f, _padic_list(R, Qs), c, prec)
        hi = min(lhs.top, 6)
        for e in range(-5 if not c.is_infinity else lhs.val, hi):
            assert lhs.coeff(e).eq_mod(rhs.coeff(e), N), (c, e)


@settings(max_examples=100)
@given(RNGS)
def test_pole_order_bound_random(rnd):
    p = rnd.choice([3, 5, 7])
    f = FieldSpec(p)
    g = rnd.randint(1, (p - 1) // 2)
    curve = CurveData(f, rnd.sample(range(p), 2 * g + 1))
    N = rnd.randint(1, 5)
    bound = p * N - (p - 1) // 2
    c = rnd.choice(curve.finite_centers)
    lift = lift_frobenius_local(curve, c, N, N + 4, -bound - 3, 0)
    assert lift.pole_order <= bound
    for e in range(-bound - 3, -bound):
        assert lift.phi.coeff(e).with_prec(N).is_zero()


@pytest.mark.parametrize("p,n,res", CROSS_CURVES)
def test_direct_and_ode_pullbacks_agree(p, n, res):
    curve = _curve(p, n, res)
    pol = empirical_precisions(curve.g, p, n)
    basis = compute_basis(curve, pol.P1, pol.working)
    gb = GrowthBound.for_prime(p)
    for el, consts in zip(basis.y_part, basis.y_constants):
        for c in curve.finite_centers:
            G1 = pullback_ode(curve, c, consts, pol.P1, pol.working)
            G2 = pullback_direct(el[c][1], pol.P1)
            L = min(len(G1), len(G2))
            prec = min(G1.prec, G2.prec)
            assert L >= pol.P1 - 1 and prec >= pol.P2
            for e in range(L):
                assert G1.coeff(e).eq_mod(G2.coeff(e), prec), (c, e)
            # the substituted series keeps the growth bound
            for e in range(1, L):
                x = G1.coeff(e)
                assert x.is_zero() or x.val >= gb.floor(p, e)
        G = pullback_infinity(el[curve.infinity][1], 2 * curve.g + 2)
        assert G.coeff(0).is_zero()


def test_pullback_infinity_spreads_coefficients(f5):
    from mwzeta.series import Center, Series

    inf = Center.infinity(f5)
    g = Series.from_scalars(inf, [0, 1, 2, 3], 6)
    G = pullback_infinity(g, 11)
    assert [int(G.coeff(e).balanced_int()) if not G.coeff(e).is_zero() else 0 for e in range(11)] == \
        [0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 2]


@pytest.mark.parametrize("method", ["ode", "direct"])
def test_golden_frobenius_trace_and_det(golden_curve, method):
    pol = empirical_precisions(1, 5)
    basis = compute_basis(golden_curve, pol.P1, pol.working)
    M = frobenius_matrix(golden_curve, basis, pol, method).entries
    tr = M[0][0] + M[1][1]
    det = M[0][0] * M[1][1] - M[0][1] * M[1][0]
    assert tr.balanced_int() == -2 and det.balanced_int() == 5


def test_methods_give_same_matrix():
    curve = _curve(7, 1, [0, 1, 2, 3, 4])
    pol = empirical_precisions(2, 7)
    basis = compute_basis(curve, pol.P1, pol.working)
    A = frobenius_matrix(curve, basis, pol, "ode")
    B = frobenius_matrix(curve, basis, pol, "direct")
    prec = min(A.prec, B.prec)
    assert prec >= pol.P2
    assert all(x.eq_mod(y, prec) for ra, rb in zip(A.entries, B.entries) for x, y in zip(ra, rb))


def test_decompose_rejects_image_outside_span(f5):
    k = lambda x: KCoefficient.from_int(f5, x, 8)
    basis_inf = [[k(1), k(0), k(0)], [k(0), k(1), k(0)]]
    M = decompose_in_basis([[k(2), k(3), k(0)]], basis_inf, 3)
    assert M.entries[0][0].balanced_int() == 2 and M.entries[1][0].balanced_int() == 3
    with pytest.raises(SingularDecomposition):
        decompose_in_basis([[k(2), k(3), k(1)]], basis_inf, 3)
