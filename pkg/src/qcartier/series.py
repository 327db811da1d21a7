"""Truncated Laurent series with explicit precision over pluggable rings.

A TruncatedSeries stores the coefficients of q^lowest .. q^(precision-1) as a
dense tuple; exponents at or beyond `precision` are unknown, not zero.
Arithmetic never claims coefficients it cannot justify: precision propagates
as the minimum of the input bounds, shifted by valuations under
multiplication and inversion.  Series are immutable and safe to share.

The three backends (ExactIntegers, RationalsLocalizedAt, ResidueRing) share
one code path; convolution dispatches to a packed big-integer kernel in the
residue backend, which is equivalent to the naive product (property-tested)
but delegates the O(N^2) work to CPython's big-int multiplication.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .rings import (
    CoefficientRing,
    ExactDivisionError,
    ExactIntegers,
    NotInvertibleError,
    PrimeContext,
    RationalsLocalizedAt,
    ResidueRing,
    RingError,
    p_adic_valuation,
    ring_from_json,
)

__all__ = [
    "TruncatedSeries",
    "PrecisionError",
    "log1p_scaled",
    "exp_layered",
    "reduce_mod",
    "p_valuation",
    "exact_p_power_quotient",
    "change_ring",
    "agree_on_overlap",
    "set_pole_cap",
]

SERIES_FORMAT_VERSION = 1

# Laurent principal parts are bounded by construction; the deepest pole in the
# operator pipeline is about 3*p^2 + O(p) at p=31, well under this cap.
_POLE_CAP = 20_000

# Below this product-of-lengths the naive convolution wins on constant factors.
_PACKED_MIN_OPS = 4096


class PrecisionError(ValueError):
    """A coefficient beyond the known precision was requested or required."""


def set_pole_cap(cap: int) -> int:
    """Set the maximum allowed pole order; returns the previous cap."""
    global _POLE_CAP
    old, _POLE_CAP = _POLE_CAP, cap
    return old


def _conv_naive(a, b, nout, zero):
    out = [zero] * nout
    for i, ai in enumerate(a):
        if i >= nout:
            break
        if not ai:
            continue
        jmax = min(len(b), nout - i)
        for j in range(jmax):
            bj = b[j]
            if bj:
                out[i + j] += ai * bj
    return out


def _conv_packed(m, a, b, nout):
    """Residue convolution via fixed-width packing into one big integer.

    Slot width is chosen so column sums cannot overflow into the next slot,
    so the product's base-2^(8w) digits are exactly the unreduced column sums.
    """
    slot_max = min(len(a), len(b)) * (m - 1) * (m - 1)
    width = (slot_max.bit_length() + 7) // 8
    packed_a = int.from_bytes(b"".join(c.to_bytes(width, "little") for c in a), "little")
    packed_b = int.from_bytes(b"".join(c.to_bytes(width, "little") for c in b), "little")
    prod = (packed_a * packed_b).to_bytes((len(a) + len(b)) * width, "little")
    nout = min(nout, len(a) + len(b) - 1)
    return [
        int.from_bytes(prod[i * width : (i + 1) * width], "little") % m
        for i in range(nout)
    ]


def _convolve(ring, a, b, nout):
    if nout <= 0:
        return []
    if isinstance(ring, ResidueRing):
        if len(a) * len(b) >= _PACKED_MIN_OPS:
            out = _conv_packed(ring.modulus, a, b, nout)
            return out + [0] * (nout - len(out))
        m = ring.modulus
        return [c % m for c in _conv_naive(a, b, nout, 0)]
    return _conv_naive(a, b, nout, ring.zero)


class TruncatedSeries:
    __slots__ = ("ring", "lowest", "coeffs", "precision")

    def __init__(self, ring: CoefficientRing, lowest: int, coeffs, precision: int, *, coerce: bool = True):
        if coerce:
            coeffs = [ring.coerce(c) for c in coeffs]
        else:
            coeffs = list(coeffs)
        if lowest + len(coeffs) != precision:
            raise PrecisionError(
                f"length {len(coeffs)} != precision {precision} - lowest {lowest}"
            )
        # normalize: the leading stored coefficient is nonzero (or the series
        # is the canonical zero with lowest == precision)
        k = 0
        while k < len(coeffs) and ring.is_zero(coeffs[k]):
            k += 1
        if k:
            lowest += k
            coeffs = coeffs[k:]
        if lowest < -_POLE_CAP:
            raise PrecisionError(f"pole order {-lowest} exceeds cap {_POLE_CAP}")
        object.__setattr__(self, "ring", ring)
        object.__setattr__(self, "lowest", lowest)
        object.__setattr__(self, "coeffs", tuple(coeffs))
        object.__setattr__(self, "precision", precision)

    def __setattr__(self, name, value):
        raise AttributeError("TruncatedSeries is immutable")

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, ring, precision):
        return cls(ring, precision, [], precision, coerce=False)

    @classmethod
    def one(cls, ring, precision):
        if precision < 1:
            return cls.zero(ring, precision)
        return cls.from_terms(ring, {0: 1}, precision)

    @classmethod
    def q_power(cls, ring, k, precision):
        if precision <= k:
            return cls.zero(ring, precision)
        return cls.from_terms(ring, {k: 1}, precision)

    @classmethod
    def from_terms(cls, ring, terms: dict, precision: int):
        if not terms:
            return cls.zero(ring, precision)
        lo = min(terms)
        coeffs = [ring.zero] * (precision - lo)
        for e, c in terms.items():
            if e < precision:
                coeffs[e - lo] = ring.coerce(c)
        return cls(ring, lo, coeffs, precision, coerce=False)

    @classmethod
    def from_coeffs(cls, ring, coeffs, precision=None, lowest=0):
        """Series from leading coefficients; the rest up to `precision` are zero."""
        coeffs = list(coeffs)
        if precision is None:
            precision = lowest + len(coeffs)
        if precision < lowest + len(coeffs):
            raise PrecisionError("more coefficients supplied than the precision admits")
        coeffs += [ring.zero] * (precision - lowest - len(coeffs))
        return cls(ring, lowest, coeffs, precision)

    # -- inspection --------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.coeffs

    def valuation(self):
        """q-order of the first known nonzero term; None for the zero series."""
        return None if self.is_zero() else self.lowest

    def coefficient(self, n: int):
        if n >= self.precision:
            raise PrecisionError(f"q^{n} is beyond precision O(q^{self.precision})")
        if n < self.lowest:
            return self.ring.zero
        return self.coeffs[n - self.lowest]

    def __eq__(self, other):
        return (
            isinstance(other, TruncatedSeries)
            and self.ring == other.ring
            and self.lowest == other.lowest
            and self.precision == other.precision
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.ring, self.lowest, self.coeffs, self.precision))

    def __repr__(self):
        parts = []
        for i, c in enumerate(self.coeffs[:6]):
            if not self.ring.is_zero(c):
                parts.append(f"{c}*q^{self.lowest + i}")
        body = " + ".join(parts) if parts else "0"
        more = " + ..." if len(self.coeffs) > 6 else ""
        return f"<{body}{more} + O(q^{self.precision}) over {self.ring!r}>"

    # -- ring-aligned binary ops -------------------------------------------

    def _check_ring(self, other):
        if self.ring != other.ring:
            raise RingError(f"ring mismatch: {self.ring!r} vs {other.ring!r}")

    def __add__(self, other):
        if not isinstance(other, TruncatedSeries):
            return self._add_scalar(other)
        self._check_ring(other)
        ring = self.ring
        prec = min(self.precision, other.precision)
        lo = min(self.lowest, other.lowest)
        if prec <= lo:
            return TruncatedSeries.zero(ring, prec)
        out = [ring.zero] * (prec - lo)
        for i, c in enumerate(self.coeffs):
            e = self.lowest + i
            if e < prec:
                out[e - lo] = c
        for i, c in enumerate(other.coeffs):
            e = other.lowest + i
            if e < prec:
                out[e - lo] = ring.add(out[e - lo], c)
        return TruncatedSeries(ring, lo, out, prec, coerce=False)

    def _add_scalar(self, scalar):
        c = self.ring.coerce(scalar)
        if self.ring.is_zero(c):
            return self
        if self.precision <= 0:
            raise PrecisionError("constant term is beyond this series' precision")
        return self + TruncatedSeries.from_terms(self.ring, {0: c}, self.precision)

    __radd__ = __add__

    def __neg__(self):
        ring = self.ring
        return TruncatedSeries(
            ring, self.lowest, [ring.neg(c) for c in self.coeffs], self.precision, coerce=False
        )

    def __sub__(self, other):
        if isinstance(other, TruncatedSeries):
            return self + (-other)
        return self._add_scalar(-self.ring.coerce(other))

    def __rsub__(self, other):
        return (-self)._add_scalar(other)

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return self._scale(other)
        self._check_ring(other)
        ring = self.ring
        prec = min(self.precision + other.lowest, other.precision + self.lowest)
        if self.is_zero() or other.is_zero():
            return TruncatedSeries.zero(ring, prec)
        lo = self.lowest + other.lowest
        out = _convolve(ring, self.coeffs, other.coeffs, prec - lo)
        return TruncatedSeries(ring, lo, out, prec, coerce=False)

    def _scale(self, scalar):
        ring = self.ring
        c = ring.coerce(scalar)
        if ring.is_zero(c):
            return TruncatedSeries.zero(ring, self.precision)
        return TruncatedSeries(
            ring, self.lowest, [ring.mul(c, x) for x in self.coeffs], self.precision, coerce=False
        )

    __rmul__ = __mul__

    def invert(self):
        """Multiplicative inverse; needs a unit leading coefficient.

        The inverse of a series with valuation v and precision N carries
        precision N - 2v, the sharp propagated bound.
        """
        ring = self.ring
        if self.is_zero():
            raise NotInvertibleError("cannot invert a series with no known nonzero term")
        v = self.lowest
        u = self.coeffs
        nterms = self.precision - v
        lead_inv = ring.inv(u[0])
        b = [lead_inv]
        t = 1
        while t < nterms:
            t = min(2 * t, nterms)
            ub = _convolve(ring, u[:t], b, t)
            # e = 2 - u*b, the Newton correction factor
            e = [ring.neg(c) for c in ub]
            e[0] = ring.add(e[0], ring.coerce(2))
            b = _convolve(ring, b, e, t)
        return TruncatedSeries(ring, -v, b, self.precision - 2 * v, coerce=False)

    def __pow__(self, e: int):
        if not isinstance(e, int):
            raise TypeError("series exponent must be an integer")
        if e == 0:
            return TruncatedSeries.one(self.ring, self.precision - self.lowest)
        if e < 0:
            return self.invert() ** (-e)
        result = None
        base = self
        k = e
        while k:
            if k & 1:
                result = base if result is None else result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # -- shape adjustments ---------------------------------------------------

    def shift(self, k: int):
        """Multiply by q^k (k may be negative)."""
        return TruncatedSeries(
            self.ring, self.lowest + k, self.coeffs, self.precision + k, coerce=False
        )

    def truncate(self, precision: int):
        if precision > self.precision:
            raise PrecisionError(
                f"cannot extend precision {self.precision} to {precision}"
            )
        if precision == self.precision:
            return self
        if precision <= self.lowest:
            return TruncatedSeries.zero(self.ring, precision)
        return TruncatedSeries(
            self.ring,
            self.lowest,
            list(self.coeffs[: precision - self.lowest]),
            precision,
            coerce=False,
        )

    def map_coefficients(self, fn, ring=None):
        ring = ring or self.ring
        return TruncatedSeries(
            ring, self.lowest, [fn(c) for c in self.coeffs], self.precision
        )

    # -- serialization ---------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "format_version": SERIES_FORMAT_VERSION,
            "ring": self.ring.to_json(),
            "lowest_exponent": self.lowest,
            "precision": self.precision,
            "coefficients": [_encode_coeff(c) for c in self.coeffs],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "TruncatedSeries":
        if data.get("format_version") != SERIES_FORMAT_VERSION:
            raise RingError(f"unsupported series format {data.get('format_version')!r}")
        ring = ring_from_json(data["ring"])
        coeffs = [_decode_coeff(s) for s in data["coefficients"]]
        return cls(ring, data["lowest_exponent"], coeffs, data["precision"])


def _encode_coeff(c) -> str:
    if isinstance(c, Fraction):
        return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    return str(c)


def _decode_coeff(s: str):
    if "/" in s:
        num, den = s.split("/")
        return Fraction(int(num), int(den))
    return int(s)


# -- ring changes ---------------------------------------------------------------


def change_ring(a: TruncatedSeries, ring: CoefficientRing) -> TruncatedSeries:
    """Map a series coefficientwise into another ring via coercion."""
    return a.map_coefficients(ring.coerce, ring)


def reduce_mod(a: TruncatedSeries, p: int, exponent: int) -> TruncatedSeries:
    """Canonical coefficientwise reduction into ResidueRing(p, exponent).

    Rational inputs must be p-integral (denominator coprime to p); residue
    inputs may only shrink their modulus.
    """
    if isinstance(a.ring, ResidueRing):
        if a.ring.prime != p:
            raise RingError(f"cannot reduce mod {p} a series over {a.ring!r}")
        if exponent > a.ring.exponent:
            raise RingError(
                f"cannot lift modulus exponent {a.ring.exponent} to {exponent}"
            )
    elif isinstance(a.ring, RationalsLocalizedAt) and a.ring.prime != p:
        raise RingError(f"series localized at {a.ring.prime}, reduction mod {p} refused")
    return change_ring(a, ResidueRing(p, exponent))


def p_valuation(a: TruncatedSeries, p: int):
    """Minimum p-adic valuation over known coefficients; math.inf if all vanish.

    Over a residue ring mod p^K the result is exact whenever it is < K;
    coefficients represented by 0 contribute math.inf (true valuation >= K).
    """
    if isinstance(a.ring, ResidueRing) and a.ring.prime != p:
        raise RingError(f"series over {a.ring!r} has no {p}-adic valuation")
    best = math.inf
    for c in a.coeffs:
        if c == 0:
            continue
        v = p_adic_valuation(c, p)
        if v < best:
            best = v
            if best == 0:
                break
    return best


def exact_p_power_quotient(a: TruncatedSeries, p: int, j: int) -> TruncatedSeries:
    """Divide by p^j, checking exactness coefficient by coefficient.

    Over ResidueRing(p, K) the quotient is only determined modulo p^(K-j),
    so the result lives in ResidueRing(p, K-j): the modulus drop is the
    run-time trace of the valuation claim.
    """
    if j == 0:
        return a
    if j < 0:
        raise ValueError("negative power")
    ring = a.ring
    pj = p**j
    if isinstance(ring, ResidueRing):
        if ring.prime != p:
            raise RingError(f"series over {ring!r}, cannot divide by {p}^{j}")
        if j >= ring.exponent:
            raise ExactDivisionError(
                f"dividing by p^{j} exhausts modulus p^{ring.exponent}"
            )
        out_ring = ResidueRing(p, ring.exponent - j)
        coeffs = []
        for i, c in enumerate(a.coeffs):
            if c % pj:
                raise ExactDivisionError(
                    f"coefficient of q^{a.lowest + i} = {c} is not divisible by {p}^{j}"
                )
            coeffs.append(c // pj)
        return TruncatedSeries(out_ring, a.lowest, coeffs, a.precision, coerce=False)
    if isinstance(ring, RationalsLocalizedAt) and ring.prime == p:
        coeffs = []
        for i, c in enumerate(a.coeffs):
            if c.numerator % pj:
                raise ExactDivisionError(
                    f"coefficient of q^{a.lowest + i} = {c} is not divisible by {p}^{j}"
                )
            coeffs.append(Fraction(c.numerator // pj, c.denominator))
        return TruncatedSeries(ring, a.lowest, coeffs, a.precision, coerce=False)
    if isinstance(ring, ExactIntegers):
        coeffs = []
        for i, c in enumerate(a.coeffs):
            if c % pj:
                raise ExactDivisionError(
                    f"coefficient of q^{a.lowest + i} = {c} is not divisible by {p}^{j}"
                )
            coeffs.append(c // pj)
        return TruncatedSeries(ring, a.lowest, coeffs, a.precision, coerce=False)
    raise RingError(f"unsupported ring {ring!r}")


def divide_exact_unit(a: TruncatedSeries, k: int, p: int) -> TruncatedSeries:
    """Divide by an integer k coprime to p (unit in every backend here)."""
    ring = a.ring
    if isinstance(ring, ResidueRing):
        return a * ring.inv(k % ring.modulus)
    if isinstance(ring, RationalsLocalizedAt):
        return a * Fraction(1, k)
    # exact integers: promote rather than fail, callers expect Z_(p) output
    return change_ring(a, RationalsLocalizedAt(p)) * Fraction(1, k)


# -- comparison helpers -----------------------------------------------------------


def agree_on_overlap(a: TruncatedSeries, b: TruncatedSeries):
    """Compare on the common known exponent range.

    Returns (True, None) or (False, (exponent, coeff_a, coeff_b)).
    """
    lo = min(a.lowest, b.lowest)
    hi = min(a.precision, b.precision)
    for n in range(lo, hi):
        ca, cb = a.coefficient(n), b.coefficient(n)
        if ca != cb:
            return False, (n, ca, cb)
    return True, None


# -- scaled logarithm / exponential layers ----------------------------------------


def _floor_log(p: int, k: int) -> int:
    j = 0
    q = p
    while q <= k:
        j += 1
        q *= p
    return j


def _legendre_vp_factorial(p: int, k: int) -> int:
    v = 0
    q = p
    while q <= k:
        v += k // q
        q *= p
    return v


def _log_term_count(p: int, target: int) -> int:
    k = 1
    while k - _floor_log(p, k) < target:
        k += 1
    return k


def _exp_term_count(p: int, target: int) -> int:
    k = 1
    while k - _legendre_vp_factorial(p, k) < target:
        k += 1
    return k


def _require_one_plus_multiple_of_p(x: TruncatedSeries, p: int) -> TruncatedSeries:
    if x.precision < 1 or x.lowest != 0 or x.coeffs[0] != x.ring.coerce(1):
        raise RingError("input must be a power series with constant term 1")
    h = x - 1
    for i, c in enumerate(h.coeffs):
        num = c.numerator if isinstance(c, Fraction) else c
        if num % p:
            raise RingError(
                f"coefficient of q^{h.lowest + i} = {c} is not divisible by {p}; "
                "input is not Frobenius-compatible"
            )
    return h


def log1p_scaled(x: TruncatedSeries, ctx: PrimeContext, k_terms: int | None = None) -> TruncatedSeries:
    """log of a series 1 + h whose h is divisible by p coefficientwise.

    Sums (-1)^(k+1) h^k / k for k up to the smallest k with
    k - floor(log_p k) >= modulus_exponent + guard_digits; omitted terms are
    0 modulo the working modulus.  Division by k cancels p-powers from h^k
    (whose coefficients carry valuation >= k) before the unit division, so
    over a residue ring the output modulus drops by max_k v_p(k), keeping the
    result an honest claim.  Exact-integer input is promoted to Z_(p).
    """
    p = ctx.p
    h = _require_one_plus_multiple_of_p(x, p)
    if isinstance(h.ring, ExactIntegers):
        h = change_ring(h, RationalsLocalizedAt(p))
    kmax = _log_term_count(p, ctx.working_exponent) if k_terms is None else k_terms
    jmax = max(_floor_log(p, k) for k in range(1, kmax + 1))
    if isinstance(h.ring, ResidueRing):
        out_ring = ResidueRing(p, h.ring.exponent - jmax) if jmax else h.ring
    else:
        out_ring = h.ring
    acc = TruncatedSeries.zero(out_ring, h.precision)
    hk = None
    for k in range(1, kmax + 1):
        hk = h if hk is None else hk * h
        if hk.is_zero() and hk.precision >= acc.precision:
            break
        j = 0
        kk = k
        while kk % p == 0:
            kk //= p
            j += 1
        term = exact_p_power_quotient(hk, p, j)
        if isinstance(term.ring, ResidueRing) and term.ring != out_ring:
            term = reduce_mod(term, p, out_ring.exponent)
        term = divide_exact_unit(term, kk, p)
        acc = acc + term if k % 2 else acc - term
    return acc


def exp_layered(x: TruncatedSeries, ctx: PrimeContext, k_terms: int | None = None) -> TruncatedSeries:
    """Truncated exponential sum_k x^k / k! for x divisible by p, x(0) = 0.

    The cut-off follows the same valuation rule as log1p_scaled with
    v_p(k!) from Legendre's formula; for p >= 7 every k! in range is a unit.
    """
    p = ctx.p
    if not x.is_zero() and x.lowest < 1:
        raise RingError("exponential layer input must vanish at q^0")
    for i, c in enumerate(x.coeffs):
        num = c.numerator if isinstance(c, Fraction) else c
        if num % p:
            raise RingError(
                f"coefficient of q^{x.lowest + i} = {c} is not divisible by {p}"
            )
    if isinstance(x.ring, ExactIntegers):
        x = change_ring(x, RationalsLocalizedAt(p))
    kmax = _exp_term_count(p, ctx.working_exponent) if k_terms is None else k_terms
    jmax = max(_legendre_vp_factorial(p, k) for k in range(1, kmax + 1))
    if isinstance(x.ring, ResidueRing):
        out_ring = ResidueRing(p, x.ring.exponent - jmax) if jmax else x.ring
    else:
        out_ring = x.ring
    acc = TruncatedSeries.one(out_ring, x.precision)
    xk = None
    fact = 1
    for k in range(1, kmax + 1):
        xk = x if xk is None else xk * x
        fact *= k
        if xk.is_zero() and xk.precision >= acc.precision:
            break
        j = _legendre_vp_factorial(p, k)
        term = exact_p_power_quotient(xk, p, j)
        if isinstance(term.ring, ResidueRing) and term.ring != out_ring:
            term = reduce_mod(term, p, out_ring.exponent)
        term = divide_exact_unit(term, fact // p**j, p)
        acc = acc + term
    return acc
