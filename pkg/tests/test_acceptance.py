"""Acceptance suite: one test per criterion, each recording a pass/fail line.

Criteria 1 and 2 compare against the printed reference data in golden.py.
Those values contain a known arithmetic slip (see README), so parts of both
criteria fail by design; the corrected values are checked in the module tests.
"""

import os
import random
import time

from conftest import ACCEPTANCE
from test_basis import test_basis_invariants_random_curves as _growth
from test_frobenius import test_pole_order_bound_random as _pole_order
from test_isocrystal import test_vectorization_identity as _vectorization
from test_padic import SMALL_FIELDS
from test_padic import test_sigma_has_order_n as _sigma_order
from test_padic import test_teichmuller_multiplicative_exhaustive as _teichmuller
from test_series import test_invert_property as _invert
from test_series import test_ode_residual as _ode
from test_series import test_split_recombine as _split
from test_series import test_sqrt_property as _sqrt
from test_zeta import test_emitted_charpolys_are_weil as _weil
from test_zeta import test_norm_divide_and_conquer_matches_naive as _norm

import golden
from mwzeta.basis import compute_basis, filter_solutions, solve_global
from mwzeta.frobenius import (
    empirical_precisions,
    frobenius_matrix,
    pullback_direct,
    pullback_ode,
    required_precisions,
)
from mwzeta.isocrystal import CurveData, build_derivative_matrix, build_multiplication_matrix, gauss_manin_matrix
from mwzeta.oracle import count_points_naive
from mwzeta.padic import FieldSpec, KCoefficient, row_reduce
from mwzeta.zeta import compute_zeta, zeta_from_counts

GOLDEN_PREC = 6


def record(k, passed, detail):
    ACCEPTANCE[k] = (passed, detail)
    print(f"criterion {k}: {'PASS' if passed else 'FAIL'} {detail}")
    assert passed, detail


def _golden():
    curve = CurveData(FieldSpec(5), [0, 1, 4])
    c0, c1, cm = curve.finite_centers
    return curve, {"oo": curve.infinity, 0: c0, 1: c1, -1: cm}


def _in_span(rows, v, digits):
    """Is v congruent mod p^digits to a K-combination of rows?"""
    R, piv = row_reduce(rows)
    w = list(v)
    for r, j in zip(R, piv):
        if not w[j].is_zero():
            c = w[j] / r[j]
            w = [a - c * b for a, b in zip(w, r)]
    return all(x.is_zero() or x.val >= digits for x in w)


def test_criterion_1_golden_expansions():
    t = time.perf_counter()
    curve, keys = _golden()
    h = gauss_manin_matrix(curve, GOLDEN_PREC).entries[1][1]
    f = curve.field
    bad = []
    for key, printed in golden.PRINTED_EXPANSIONS.items():
        loc = h.local(keys[key], GOLDEN_PREC)
        for e, v in golden.printed_expansion(key).items():
            if not loc.coeff(e).eq_mod(KCoefficient.from_fraction(f, v, GOLDEN_PREC), GOLDEN_PREC):
                bad.append(f"{key}:t^{e} printed {v}")
    dt = time.perf_counter() - t
    ok = not bad and dt < 1.0
    record(1, ok, f"({dt:.2f}s) mismatches: {bad or 'none'}")


def test_criterion_2_golden_matrix_and_kernel():
    t = time.perf_counter()
    curve, _ = _golden()
    order = [curve.infinity] + curve.finite_centers
    prec = 2 * GOLDEN_PREC
    conn = gauss_manin_matrix(curve, prec)
    M = build_multiplication_matrix(conn, 1, order).M
    D = build_derivative_matrix(order, 1, conn.m_o, prec).M
    printed = golden.printed_matrix()
    f = curve.field
    wrong = [(i, j) for i in range(len(printed)) for j in range(len(printed[0]))
             if not (M[i][j] + D[i][j]).eq_mod(KCoefficient.from_fraction(f, printed[i][j], prec), GOLDEN_PREC)]
    vecs = solve_global(curve, conn, 1, order)
    consts, _ = filter_solutions(vecs, curve, 1, conn.m_o, order)
    spans = {name: _in_span(vecs, [KCoefficient.from_fraction(f, x, prec) for x in golden.printed_vector(v)],
                            GOLDEN_PREC)
             for name, v in (("v10", golden.PRINTED_V10), ("v11", golden.PRINTED_V11))}
    dt = time.perf_counter() - t
    ok = (not wrong and len(vecs) == golden.KERNEL_DIM and len(consts) == golden.SEEDS
          and all(spans.values()) and dt < 5.0)
    record(2, ok, f"({dt:.2f}s) differing entries {wrong or 'none'}, kernel dim {len(vecs)}, "
                  f"seeds {len(consts)}, printed vectors in span {spans}")


def test_criterion_3_golden_zeta():
    curve, _ = _golden()
    lines = []
    ok = True
    for name, pol, limit in (("theoretical", required_precisions(1, 5), 120.0),
                             ("empirical", empirical_precisions(1, 5), 10.0)):
        t = time.perf_counter()
        res = compute_zeta(curve, pol, r_max=1)
        dt = time.perf_counter() - t
        good = res.ok and res.charpoly == [1, 2, 5] and res.counts == [8] == [count_points_naive([0, 1, 4], curve.field)]
        ok = ok and good and dt < limit
        lines.append(f"{name} {res.charpoly} N1={res.counts[0]} ({dt:.1f}s)")
    record(3, ok, "; ".join(lines))


def test_criterion_4_genus_two():
    seed = int(os.environ.get("MWZETA_SEED", "20261016"))
    rnd = random.Random(seed)
    field = FieldSpec(7)
    curves = [[0, 1, 2, 3, 4], sorted(rnd.sample(range(7), 5))]
    t = time.perf_counter()
    lines, ok = [], True
    for res in curves:
        curve = CurveData(field, res)
        expect = zeta_from_counts([count_points_naive(res, field, k) for k in (1, 2)], 7, 2)
        for mode, pol in (("empirical", empirical_precisions(2, 7)), ("theoretical", required_precisions(2, 7))):
            r = compute_zeta(curve, pol, r_max=2)
            ok = ok and r.ok and r.charpoly == expect
            lines.append(f"{res} {mode}: {r.charpoly} vs {expect}")
    dt = time.perf_counter() - t
    ok = ok and dt < 300
    record(4, ok, f"seed {seed} ({dt:.1f}s) " + "; ".join(lines))


def test_criterion_5_extension_fields():
    lines, ok = [], True
    for p, lams in ((3, [(0, 1), (1, 1), (2, 2)]), (5, [(0, 1), (1, 2), (3, 4)])):
        field = FieldSpec.make(p, 2)
        assert not any(field.gf.is_in_prime_field(field.gf.elt(x)) for x in lams)
        curve = CurveData(field, lams)
        t = time.perf_counter()
        r = compute_zeta(curve, required_precisions(1, p, 2), r_max=1)
        dt = time.perf_counter() - t
        n1 = count_points_naive(lams, field)
        ok = ok and r.ok and r.counts[0] == n1 and dt < 300
        lines.append(f"F_{field.q} N1={r.counts[0]} enumeration={n1} ({dt:.1f}s)")
    record(5, ok, "; ".join(lines))


def test_criterion_6_property_suite():
    props = [
        ("vectorization", _vectorization),
        ("split/recombine", _split),
        ("invert", _invert),
        ("sqrt", _sqrt),
        ("ode residual", _ode),
        ("growth bound", _growth),
        ("pole order", _pole_order),
        ("sigma^n = id", _sigma_order),
        ("norm vs naive", _norm),
        ("weil/hasse", _weil),
    ]
    failed = []
    for name, fn in props:
        try:
            fn()
        except Exception as e:  # noqa: BLE001
            failed.append(f"{name}: {type(e).__name__}")
    for p, n in SMALL_FIELDS:
        try:
            _teichmuller(p, n)
        except Exception as e:  # noqa: BLE001
            failed.append(f"teichmuller q={p ** n}: {type(e).__name__}")
    record(6, not failed, f"{len(props) + 1} properties, failures: {failed or 'none'}")


def test_criterion_7_direct_vs_ode():
    t = time.perf_counter()
    cases = [(FieldSpec(5), [0, 1, 4], required_precisions(1, 5)),
             (FieldSpec(7), [0, 1, 2, 3, 4], empirical_precisions(2, 7))]
    lines, ok = [], True
    for field, res, pol in cases:
        curve = CurveData(field, res)
        basis = compute_basis(curve, pol.P1, pol.working)
        worst = None
        for consts, el in zip(basis.y_constants, basis.y_part):
            for c in curve.finite_centers:
                G1 = pullback_ode(curve, c, consts, pol.P1, pol.working)
                G2 = pullback_direct(el[c][1], pol.P1)
                prec = min(G1.prec, G2.prec)
                agree = all(G1.coeff(e).eq_mod(G2.coeff(e), prec) for e in range(min(len(G1), len(G2))))
                ok = ok and agree and prec >= pol.P2
                worst = prec if worst is None else min(worst, prec)
        A = frobenius_matrix(curve, basis, pol, "ode")
        B = frobenius_matrix(curve, basis, pol, "direct")
        mp = min(A.prec, B.prec)
        same = all(x.eq_mod(y, mp) for ra, rb in zip(A.entries, B.entries) for x, y in zip(ra, rb))
        ok = ok and same and mp >= pol.P2
        lines.append(f"g={curve.g} q={field.q}: series agree to {worst} digits, matrices to {mp}")
    dt = time.perf_counter() - t
    ok = ok and dt < 120
    record(7, ok, f"({dt:.1f}s) " + "; ".join(lines))
