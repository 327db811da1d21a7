import math
from fractions import Fraction

import pytest

from qcartier.rings import (
    ExactIntegers,
    NotInvertibleError,
    PrimeContext,
    RationalsLocalizedAt,
    ResidueRing,
    RingError,
    chi3,
    is_prime,
    p_adic_valuation,
    ring_from_json,
)


def test_chi3_values():
    assert [chi3(n) for n in range(1, 7)] == [1, -1, 0, 1, -1, 0]


def test_is_prime_small():
    primes = [n for n in range(2, 40) if is_prime(n)]
    assert primes == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]


def test_p_adic_valuation():
    assert p_adic_valuation(0, 7) == math.inf
    assert p_adic_valuation(49, 7) == 2
    assert p_adic_valuation(Fraction(7, 2), 7) == 1
    assert p_adic_valuation(Fraction(3, 49), 7) == -2


def test_residue_ring_canonical_representatives():
    ring = ResidueRing(7, 2)
    assert ring.coerce(-1) == 48
    assert ring.coerce(Fraction(1, 2)) == 25  # 2 * 25 = 50 = 1 mod 49
    assert ring.mul(7, 7) == 0
    with pytest.raises(NotInvertibleError):
        ring.inv(7)


def test_localized_rationals_reject_bad_denominators():
    ring = RationalsLocalizedAt(5)
    assert ring.coerce(Fraction(3, 7)) == Fraction(3, 7)
    with pytest.raises(RingError):
        ring.coerce(Fraction(1, 10))
    with pytest.raises(NotInvertibleError):
        ring.inv(Fraction(5, 3))


def test_exact_integers_units():
    ring = ExactIntegers()
    assert ring.inv(-1) == -1
    with pytest.raises(NotInvertibleError):
        ring.inv(2)
    with pytest.raises(RingError):
        ring.coerce(Fraction(1, 2))


def test_ring_json_round_trip():
    for ring in (ExactIntegers(), RationalsLocalizedAt(7), ResidueRing(13, 4)):
        assert ring_from_json(ring.to_json()) == ring


def test_prime_context_classification():
    assert PrimeContext(7).split
    assert PrimeContext(13).split
    assert PrimeContext(5).inert
    assert PrimeContext(11).inert
    ctx = PrimeContext(7)
    assert ctx.default_precision == 5 * 49
    assert ctx.working_exponent == 6
    assert ctx.layer_exponent(1) == 3


def test_prime_context_rejections():
    with pytest.raises(RingError):
        PrimeContext(3)
    with pytest.raises(RingError):
        PrimeContext(2)
    with pytest.raises(RingError):
        PrimeContext(9)
    with pytest.raises(RingError):
        PrimeContext(7, precision=7)  # below p + 1
