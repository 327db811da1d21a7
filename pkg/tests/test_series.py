import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import qcartier.series as series_mod
from qcartier.rings import (
    ExactIntegers,
    NotInvertibleError,
    PrimeContext,
    RationalsLocalizedAt,
    ResidueRing,
    RingError,
)
from qcartier.series import (
    PrecisionError,
    TruncatedSeries,
    agree_on_overlap,
    exact_p_power_quotient,
    exp_layered,
    log1p_scaled,
    p_valuation,
    reduce_mod,
)

Z = ExactIntegers()


def S(coeffs, precision=None, lowest=0, ring=Z):
    return TruncatedSeries.from_coeffs(ring, coeffs, precision, lowest)


# -- basic arithmetic ---------------------------------------------------------


def test_add_simple():
    assert (S([1, 1], 6) + S([0, 1], 6)).coeffs == (1, 2, 0, 0, 0, 0)


def test_add_identity():
    a = S([3, 1, 4], 8)
    assert a + TruncatedSeries.zero(Z, 8) == a


def test_add_laurent_cancellation_renormalizes():
    a = S([1, 1], precision=4, lowest=-1)  # q^-1 + 1
    b = S([-1], precision=4, lowest=-1)  # -q^-1
    c = a + b
    assert c.lowest == 0 and c.coefficient(0) == 1


def test_add_ring_mismatch():
    with pytest.raises(RingError):
        S([1]) + S([1], ring=ResidueRing(5, 1))


def test_mul_simple():
    c = S([1, 1], 6) * S([1, -1], 6)
    assert c.coefficient(0) == 1 and c.coefficient(1) == 0 and c.coefficient(2) == -1


def test_mul_monomials():
    c = S([1], precision=5, lowest=-2) * S([1], precision=9, lowest=3)
    assert c.lowest == 1 and c.coefficient(1) == 1


def test_mul_precision_propagation():
    # precision = min(prec_a + val_b, prec_b + val_a)
    a = S([1, 2], precision=5, lowest=1)
    b = S([1, 1], precision=7, lowest=2)
    assert (a * b).precision == min(5 + 2, 7 + 1)


def test_invert_geometric():
    inv = S([1, -1], 8).invert()
    assert inv.coeffs == (1,) * 8


def test_invert_laurent_unit():
    a = S([1, 1], precision=7, lowest=1)  # q (1 + q)
    inv = a.invert()
    assert inv.lowest == -1
    assert inv.coeffs[:4] == (1, -1, 1, -1)
    prod = a * inv
    assert prod.coefficient(0) == 1 and prod.is_zero() is False
    assert all(prod.coefficient(n) == 0 for n in range(1, prod.precision))


def test_invert_non_unit_leading():
    with pytest.raises(NotInvertibleError):
        S([2, 1], 5).invert()
    with pytest.raises(NotInvertibleError):
        S([5, 1], 5, ring=ResidueRing(5, 3)).invert()


def test_pow_basics():
    sq = S([1, 1], 6) ** 2
    assert sq.coeffs[:3] == (1, 2, 1)
    one = S([1, 7, 2], 9) ** 0
    assert one.coefficient(0) == 1 and one.precision == 9


def test_pow_negative():
    a = S([1, 1], 6)
    assert a**-2 == (a.invert()) ** 2


def test_shift_and_truncate():
    a = S([1, 2, 3], 5)
    assert a.shift(2).lowest == 2 and a.shift(2).precision == 7
    t = a.truncate(2)
    assert t.precision == 2 and t.coeffs == (1, 2)
    with pytest.raises(PrecisionError):
        a.truncate(9)


def test_coefficient_beyond_precision():
    a = S([1], 3)
    with pytest.raises(PrecisionError):
        a.coefficient(3)


def test_scalar_ops():
    a = S([0, 1], 5)
    assert (1 + 27 * a).coefficient(0) == 1
    assert (1 + 27 * a).coefficient(1) == 27
    assert (a - 1).coefficient(0) == -1


# -- reductions and valuations ---------------------------------------------------


def test_reduce_mod_fraction():
    ring = RationalsLocalizedAt(7)
    a = TruncatedSeries.from_coeffs(ring, [Fraction(1, 2)], 3)
    assert reduce_mod(a, 7, 2).coefficient(0) == 25


def test_reduce_mod_multiple_of_p():
    a = S([7, 14], 4)
    r = reduce_mod(a, 7, 1)
    assert r.is_zero()


def test_reduce_mod_rejects_extension():
    a = TruncatedSeries.from_coeffs(ResidueRing(7, 2), [3], 3)
    with pytest.raises(RingError):
        reduce_mod(a, 7, 4)


def test_p_valuation():
    assert p_valuation(S([0, 7, 49], 5), 7) == 1
    assert p_valuation(TruncatedSeries.zero(Z, 5), 7) == math.inf
    assert p_valuation(S([14, 21], 4), 7) == 1


def test_exact_p_power_quotient_checks():
    from qcartier.rings import ExactDivisionError

    a = S([49, 98], 4)
    q = exact_p_power_quotient(a, 7, 2)
    assert q.coeffs[:2] == (1, 2)
    with pytest.raises(ExactDivisionError):
        exact_p_power_quotient(S([7, 8], 4), 7, 1)


def test_exact_p_power_quotient_drops_residue_modulus():
    ring = ResidueRing(7, 4)
    a = TruncatedSeries.from_coeffs(ring, [49], 2)
    q = exact_p_power_quotient(a, 7, 2)
    assert q.ring == ResidueRing(7, 2)
    assert q.coefficient(0) == 1


# -- log / exp layers ------------------------------------------------------------


def _scaled_input(p=7, precision=40, seed=3):
    import random

    rng = random.Random(seed)
    ring = RationalsLocalizedAt(p)
    h = TruncatedSeries.from_coeffs(
        ring, [0] + [p * rng.randrange(-9, 10) for _ in range(precision - 1)], precision
    )
    return h + 1


def test_log_rejects_bad_inputs():
    ctx = PrimeContext(7)
    with pytest.raises(RingError):
        log1p_scaled(S([2, 7], 5), ctx)  # constant term 2
    with pytest.raises(RingError):
        log1p_scaled(S([1, 3], 5), ctx)  # 3 not divisible by 7


def test_log_of_one_is_zero():
    ctx = PrimeContext(7)
    assert log1p_scaled(TruncatedSeries.one(Z, 10), ctx).is_zero()


def test_log_exp_round_trip_mod_p4():
    ctx = PrimeContext(7)
    x = _scaled_input()
    back = exp_layered(log1p_scaled(x, ctx), ctx)
    assert reduce_mod(back - x, 7, 4).is_zero()


def test_log_truncation_matches_full_sum():
    # the k_max cut-off reproduces the full-series log modulo p^4
    ctx = PrimeContext(7)
    x = _scaled_input(precision=100, seed=11)
    short = log1p_scaled(x, ctx)
    full = log1p_scaled(x, ctx, k_terms=100)
    assert reduce_mod(short - full, 7, 4).is_zero()


def test_log_residue_matches_rational():
    ctx = PrimeContext(7)
    x = _scaled_input(precision=60, seed=5)
    rational = log1p_scaled(x, ctx)
    residue = log1p_scaled(reduce_mod(x, 7, 6), ctx)
    assert reduce_mod(rational, 7, 4) == reduce_mod(residue, 7, 4)


# -- serialization ------------------------------------------------------------------


def test_series_json_round_trip():
    for a in (
        S([1, -2, 3], 6, lowest=-1),
        TruncatedSeries.from_coeffs(RationalsLocalizedAt(5), [Fraction(1, 2), 3], 4),
        TruncatedSeries.from_coeffs(ResidueRing(7, 3), [5, 11], 4),
    ):
        assert TruncatedSeries.from_json_dict(a.to_json_dict()) == a


# -- property tests -----------------------------------------------------------------

RINGS = st.sampled_from([Z, RationalsLocalizedAt(5), ResidueRing(7, 3)])


@st.composite
def small_series(draw, ring=None, unit_leading=False, laurent=True):
    ring = ring or draw(RINGS)
    lowest = draw(st.integers(-3, 3)) if laurent else 0
    n = draw(st.integers(1, 7))
    coeffs = [draw(st.integers(-9, 9)) for _ in range(n)]
    if unit_leading:
        coeffs[0] = 1
    return TruncatedSeries.from_coeffs(ring, [ring.coerce(c) for c in coeffs], lowest + n, lowest)


@given(data=st.data())
@settings(max_examples=120, deadline=None)
def test_property_add_associative(data):
    ring = data.draw(RINGS)
    a = data.draw(small_series(ring=ring))
    b = data.draw(small_series(ring=ring))
    c = data.draw(small_series(ring=ring))
    assert (a + b) + c == a + (b + c)


@given(data=st.data())
@settings(max_examples=120, deadline=None)
def test_property_mul_associative_on_overlap(data):
    ring = data.draw(RINGS)
    a = data.draw(small_series(ring=ring))
    b = data.draw(small_series(ring=ring))
    c = data.draw(small_series(ring=ring))
    ok, detail = agree_on_overlap((a * b) * c, a * (b * c))
    assert ok, detail


@given(data=st.data())
@settings(max_examples=120, deadline=None)
def test_property_distributive_on_overlap(data):
    ring = data.draw(RINGS)
    a = data.draw(small_series(ring=ring))
    b = data.draw(small_series(ring=ring))
    c = data.draw(small_series(ring=ring))
    ok, detail = agree_on_overlap(a * (b + c), a * b + a * c)
    assert ok, detail


@given(data=st.data())
@settings(max_examples=100, deadline=None)
def test_property_invert_round_trip(data):
    ring = data.draw(RINGS)
    a = data.draw(small_series(ring=ring, unit_leading=True))
    prod = a * a.invert()
    assert prod.coefficient(0) == ring.coerce(1)
    assert all(prod.coefficient(n) == ring.zero for n in range(1, prod.precision))


@given(data=st.data())
@settings(max_examples=80, deadline=None)
def test_property_precision_honesty(data):
    """Recomputing at higher precision and truncating matches the direct result."""
    ring = data.draw(RINGS)
    n = data.draw(st.integers(2, 6))
    coeffs_a = [ring.coerce(data.draw(st.integers(-9, 9))) for _ in range(n + 4)]
    coeffs_b = [ring.coerce(data.draw(st.integers(-9, 9))) for _ in range(n + 4)]
    hi_a = TruncatedSeries.from_coeffs(ring, coeffs_a, n + 4)
    hi_b = TruncatedSeries.from_coeffs(ring, coeffs_b, n + 4)
    lo_a, lo_b = hi_a.truncate(n), hi_b.truncate(n)
    hi_prod = (hi_a * hi_b).truncate((lo_a * lo_b).precision)
    assert hi_prod == lo_a * lo_b
    assert (hi_a + hi_b).truncate(n) == lo_a + lo_b


@given(data=st.data())
@settings(max_examples=60, deadline=None)
def test_property_packed_convolution_equals_naive(data):
    ring = ResidueRing(data.draw(st.sampled_from([5, 7, 13])), data.draw(st.integers(1, 6)))
    n = data.draw(st.integers(1, 40))
    m = data.draw(st.integers(1, 40))
    a = [data.draw(st.integers(0, ring.modulus - 1)) for _ in range(n)]
    b = [data.draw(st.integers(0, ring.modulus - 1)) for _ in range(m)]
    nout = n + m - 1
    naive = [v % ring.modulus for v in series_mod._conv_naive(a, b, nout, 0)]
    packed = series_mod._conv_packed(ring.modulus, a, b, nout)
    assert naive == packed


@given(data=st.data())
@settings(max_examples=80, deadline=None)
def test_property_backend_coherence_small(data):
    """Evaluate an integer expression exactly then reduce, or reduce first:
    same answer."""
    p, k = 5, 3
    ring = ResidueRing(p, k)
    a_co = [data.draw(st.integers(-20, 20)) for _ in range(6)]
    b_co = [data.draw(st.integers(-20, 20)) for _ in range(6)]
    a_z, b_z = S(a_co, 6), S(b_co, 6)
    a_r = TruncatedSeries.from_coeffs(ring, a_co, 6)
    b_r = TruncatedSeries.from_coeffs(ring, b_co, 6)
    exact = a_z * b_z + a_z - b_z
    direct = a_r * b_r + a_r - b_r
    assert reduce_mod(exact, p, k) == direct
