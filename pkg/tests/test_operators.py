import random
from fractions import Fraction

import pytest

from qcartier.modforms import build_dictionary
from qcartier.operators import (
    DefectError,
    align_series,
    build_defects,
    cartier,
    finite_difference_numerator,
    frak_e,
    hecke_t_p,
    layer_vectors,
    verschiebung,
    verschiebung_error_term,
)
from qcartier.rings import (
    ExactIntegers,
    PrimeContext,
    RationalsLocalizedAt,
    ResidueRing,
)
from qcartier.series import (
    TruncatedSeries,
    agree_on_overlap,
    exact_p_power_quotient,
    p_valuation,
    reduce_mod,
)

Z = ExactIntegers()


def S(coeffs, precision=None, lowest=0, ring=Z):
    return TruncatedSeries.from_coeffs(ring, coeffs, precision, lowest)


def random_laurent(rng, ring=Z, max_pole=3, terms=8, precision_pad=4):
    lowest = rng.randrange(-max_pole, 2)
    coeffs = [rng.randrange(-9, 10) for _ in range(terms)]
    return TruncatedSeries.from_coeffs(
        ring, coeffs, lowest + terms + precision_pad, lowest
    )


# -- Cartier / Verschiebung ------------------------------------------------------


def test_cartier_picks_multiples():
    f = S([1, 2, 0, 0, 0, 3, 0, 0, 0, 0, 4], 11)
    out = cartier(f, 5)
    assert out.coefficient(0) == 1
    assert out.coefficient(1) == 3
    assert out.coefficient(2) == 4


def test_cartier_principal_part_shortens():
    f = S([1] + [0] * 12 + [1], precision=0, lowest=-14)  # q^-14 + q^-1
    out = cartier(f, 7)
    assert out.lowest == -2
    assert out.coefficient(-2) == 1
    assert all(out.coefficient(n) == 0 for n in range(-1, out.precision))


def test_verschiebung_dilates():
    f = S([1, 1], 4)
    out = verschiebung(f, 3)
    assert out.coefficient(0) == 1 and out.coefficient(3) == 1
    assert out.precision == 12


def test_cartier_verschiebung_round_trip():
    rng = random.Random(7)
    for p in (5, 7):
        for _ in range(20):
            a = random_laurent(rng)
            assert cartier(verschiebung(a, p), p) == a


def test_projection_formula_random_pairs():
    # Cartier(dilate(a) * b) = a * Cartier(b) on Laurent pairs
    rng = random.Random(11)
    for p in (5, 7):
        for _ in range(40):
            a = random_laurent(rng)
            b = random_laurent(rng)
            lhs = cartier(verschiebung(a, p) * b, p)
            rhs = a * cartier(b, p)
            ok, detail = agree_on_overlap(lhs, rhs)
            assert ok, (p, detail)


def test_verschiebung_is_ring_homomorphism():
    rng = random.Random(13)
    for _ in range(20):
        a = random_laurent(rng)
        b = random_laurent(rng)
        assert verschiebung(a * b, 5) == verschiebung(a, 5) * verschiebung(b, 5)
        assert verschiebung(a + b, 5) == verschiebung(a, 5) + verschiebung(b, 5)


def test_hecke_on_monomial():
    ctx7 = PrimeContext(7)
    q = TruncatedSeries.q_power(Z, 1, 60)
    out = hecke_t_p(q, ctx7)
    assert out.coefficient(7) == 7**4
    assert all(out.coefficient(n) == 0 for n in range(out.lowest, 7))
    ctx5 = PrimeContext(5)
    out5 = hecke_t_p(q, ctx5)
    assert out5.coefficient(5) == -(5**4)  # inert sign flip


def test_hecke_constant_term_of_c0():
    ctx = PrimeContext(7, precision=60)
    d = build_dictionary(60, Z)
    out = hecke_t_p(d.c0, ctx)
    assert out.coefficient(0) == 1 + 7**4
    assert out.coefficient(0) % 7**4 == 1


# -- defects ------------------------------------------------------------------


@pytest.fixture(scope="module")
def defects7():
    ctx = PrimeContext(7, precision=120)
    d = build_dictionary(120, Z)
    return ctx, d, build_defects(d, ctx)


def test_defect_divisibility(defects7):
    ctx, d, bundle = defects7
    for name, s in bundle.as_dict().items():
        if name == "nu_p":
            assert s.coefficient(0) == 1
            continue
        assert s.lowest >= 1
        assert p_valuation(s, 7) >= 1


def test_defect_u_equals_v_minus_2w(defects7):
    # the truncated logs satisfy the linear relation within the working modulus
    ctx, d, bundle = defects7
    lhs = reduce_mod(bundle.u_p, 7, ctx.working_exponent)
    rhs = reduce_mod(bundle.v_p - 2 * bundle.w_p, 7, ctx.working_exponent)
    ok, detail = agree_on_overlap(lhs, rhs)
    assert ok, detail


def test_defect_invariants_fail_on_corrupt_dictionary():
    ctx = PrimeContext(7, precision=40)
    d = build_dictionary(40, Z, dual_checks=False)
    from qcartier.modforms import ModularDictionary

    objects = {name: d.series(name) for name in d.names()}
    objects["t"] = objects["t"] + TruncatedSeries.from_terms(
        Z, {2: 1}, objects["t"].precision
    )
    broken = ModularDictionary.from_series(d.ring, d.precision, objects)
    with pytest.raises(Exception):
        build_defects(broken, ctx)


def test_exponential_layer_tail_bound(defects7):
    # for k = 4, 5, 6 every coefficient of u_p^k / k! has valuation >= 4
    ctx, d, bundle = defects7
    u_p = bundle.u_p
    fact = 6
    upk = u_p * u_p * u_p
    for k in (4, 5, 6):
        upk = upk * u_p
        fact *= k
        scaled = upk * Fraction(1, fact)
        assert p_valuation(scaled, 7) >= 4, k


def test_layer_vectors_triangular(defects7):
    ctx, d, bundle = defects7
    phi_layers, u_layers = layer_vectors(bundle, verify=True)
    # row 3 by hand: phi^3/p^3 = -u^3/p^3 mod p
    lhs = reduce_mod(phi_layers.entry(3), 7, 1)
    rhs = reduce_mod(-1 * u_layers.entry(3), 7, 1)
    ok, detail = agree_on_overlap(lhs, rhs)
    assert ok, detail


def test_residue_and_rational_defects_agree():
    p = 7
    n = 120
    ctx = PrimeContext(p, precision=n)
    exact = build_defects(build_dictionary(n, Z), ctx)
    residue = build_defects(build_dictionary(n, ctx.residue_ring()), ctx)
    for name in ("u_p", "v_p", "w_p", "nu_p", "phi_p"):
        a = reduce_mod(exact.as_dict()[name], p, 4)
        b = reduce_mod(residue.as_dict()[name], p, 4)
        ok, detail = agree_on_overlap(a, b)
        assert ok, (name, detail)


# -- Hecke finite differences ------------------------------------------------------


@pytest.fixture(scope="module")
def stack7():
    p = 7
    ctx = PrimeContext(p)
    n = 5 * p * p + 2 * p + 1
    d = build_dictionary(n, ctx.residue_ring())
    return ctx, d, build_defects(d, ctx)


def test_finite_difference_ell0_is_hecke(stack7):
    ctx, d, bundle = stack7
    lhs = finite_difference_numerator(d.c0, d, ctx, 0)
    rhs = hecke_t_p(d.c0, ctx)
    ok, detail = agree_on_overlap(lhs, rhs)
    assert ok, detail


def test_finite_difference_ell1_formula(stack7):
    ctx, d, bundle = stack7
    p = ctx.p
    inv_t = d.t.invert()
    direct = d.t * hecke_t_p(d.c0 * inv_t**p, ctx) - hecke_t_p(d.c0, ctx)
    lhs = finite_difference_numerator(d.c0, d, ctx, 1)
    ok, detail = agree_on_overlap(lhs, direct)
    assert ok, detail


def test_numerator_valuation_saturates(stack7):
    ctx, d, bundle = stack7
    for name in ("c0", "u_c0"):
        for ell in (1, 2, 3):
            assert p_valuation(finite_difference_numerator(d.series(name), d, ctx, ell), 7) == ell


def test_frak_e_matches_cartier_of_phi_layer(stack7):
    ctx, d, bundle = stack7
    p = ctx.p
    for name in ("c0", "u_c0"):
        f = d.series(name)
        for ell in (1, 2, 3):
            e_l = frak_e(f, d, ctx, ell)
            phi_layer = exact_p_power_quotient(bundle.phi_p**ell, p, ell)
            f_al, layer_al = align_series(f, phi_layer)
            lam = cartier(f_al * layer_al, p)
            target = ctx.layer_exponent(ell)
            diff = reduce_mod(e_l, p, target) - reduce_mod(lam, p, target)
            assert diff.is_zero(), (name, ell, diff.lowest)


def test_frak_e_exact_verschiebung_error(stack7):
    # frak_e(f) - Cartier(f phi^l / p^l) equals p^(4-l) times the dilation term
    ctx, d, bundle = stack7
    p = ctx.p
    f = d.c0
    for ell in (1, 2):
        e_l = frak_e(f, d, ctx, ell)
        phi_layer = exact_p_power_quotient(bundle.phi_p**ell, p, ell)
        f_al, layer_al = align_series(f, phi_layer)
        lam = cartier(f_al * layer_al, p)
        v_l = verschiebung_error_term(f, d, ctx, ell)
        expected = p ** (4 - ell) * v_l
        lhs, rhs = align_series(e_l - lam.truncate(min(lam.precision, e_l.precision)), expected)
        ok, detail = agree_on_overlap(lhs, rhs)
        assert ok, (ell, detail)


def test_frak_e_smallest_case_single_digit(stack7):
    # ell = 3 at p = 7: the layer modulus is 7 itself
    ctx, d, bundle = stack7
    e_3 = frak_e(d.c0, d, ctx, 3)
    r = reduce_mod(e_3, 7, 1)
    assert r.ring == ResidueRing(7, 1)
