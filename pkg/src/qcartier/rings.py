"""Exact coefficient backends and the per-prime working context.

Every series in this package carries one of three rings: plain integers,
rationals with denominator prime to a fixed p (the localization Z_(p)), or
canonical residues modulo p^K.  Elements are ordinary Python ints and
Fractions; the ring object supplies the arithmetic so series code stays
backend-agnostic.
"""

from __future__ import annotations

import math
from fractions import Fraction

__all__ = [
    "CoefficientRing",
    "ExactIntegers",
    "RationalsLocalizedAt",
    "ResidueRing",
    "PrimeContext",
    "RingError",
    "NotInvertibleError",
    "ExactDivisionError",
    "chi3",
    "is_prime",
    "p_adic_valuation",
    "ring_from_json",
]


class RingError(ValueError):
    """Bad ring construction, coercion, or mixed-ring arithmetic."""


class NotInvertibleError(ZeroDivisionError):
    """Attempt to invert a non-unit coefficient."""


class ExactDivisionError(ArithmeticError):
    """A division that was promised to be exact is not."""


def is_prime(n: int) -> bool:
    """Trial-division primality test; all primes here are desk-scale."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def chi3(n: int) -> int:
    """Quadratic character mod 3: +1 for n=1 mod 3, -1 for n=2 mod 3, 0 else."""
    r = n % 3
    if r == 0:
        return 0
    return 1 if r == 1 else -1


def p_adic_valuation(x, p: int):
    """v_p of an int or Fraction; math.inf for zero."""
    if x == 0:
        return math.inf
    if isinstance(x, Fraction):
        return p_adic_valuation(x.numerator, p) - p_adic_valuation(x.denominator, p)
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


class CoefficientRing:
    """Abstract arithmetic backend for series coefficients."""

    kind = "abstract"
    zero = 0
    one = 1

    def coerce(self, x):
        raise NotImplementedError

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def inv(self, a):
        raise NotImplementedError

    def is_zero(self, a) -> bool:
        return a == 0

    def is_unit(self, a) -> bool:
        raise NotImplementedError

    def name_token(self) -> str:
        """Short stable token for cache keys and reports."""
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    def __repr__(self):
        return self.name_token()


class ExactIntegers(CoefficientRing):
    """Plain arbitrary-precision integers."""

    kind = "exact_integer"

    def coerce(self, x):
        if isinstance(x, bool):
            raise RingError("bool is not an integer coefficient")
        if isinstance(x, int):
            return x
        if isinstance(x, Fraction):
            if x.denominator == 1:
                return x.numerator
            raise RingError(f"{x} is not an integer")
        raise RingError(f"cannot coerce {x!r} into {self!r}")

    def inv(self, a):
        if a == 1 or a == -1:
            return a
        raise NotInvertibleError(f"{a} is not a unit in Z")

    def is_unit(self, a) -> bool:
        return a == 1 or a == -1

    def name_token(self) -> str:
        return "int"

    def to_json(self) -> dict:
        return {"kind": self.kind}

    def __eq__(self, other):
        return isinstance(other, ExactIntegers)

    def __hash__(self):
        return hash(self.kind)


class RationalsLocalizedAt(CoefficientRing):
    """Fractions with denominator coprime to a fixed prime p (the ring Z_(p))."""

    kind = "rational_localized"

    def __init__(self, prime: int):
        if not is_prime(prime):
            raise RingError(f"{prime} is not prime")
        self.prime = prime

    def coerce(self, x):
        if isinstance(x, bool):
            raise RingError("bool is not a coefficient")
        if isinstance(x, int):
            return Fraction(x)
        if isinstance(x, Fraction):
            if x.denominator % self.prime == 0:
                raise RingError(f"denominator of {x} is divisible by {self.prime}")
            return x
        raise RingError(f"cannot coerce {x!r} into {self!r}")

    def inv(self, a):
        if a == 0 or a.numerator % self.prime == 0:
            raise NotInvertibleError(f"{a} is not a unit at p={self.prime}")
        return 1 / a

    def is_unit(self, a) -> bool:
        return a != 0 and a.numerator % self.prime != 0

    def name_token(self) -> str:
        return f"rat{self.prime}"

    def to_json(self) -> dict:
        return {"kind": self.kind, "prime": self.prime}

    def __eq__(self, other):
        return isinstance(other, RationalsLocalizedAt) and other.prime == self.prime

    def __hash__(self):
        return hash((self.kind, self.prime))


class ResidueRing(CoefficientRing):
    """Canonical representatives in [0, p^K)."""

    kind = "residue"

    def __init__(self, prime: int, exponent: int):
        if not is_prime(prime):
            raise RingError(f"{prime} is not prime")
        if exponent < 1:
            raise RingError(f"exponent must be >= 1, got {exponent}")
        self.prime = prime
        self.exponent = exponent
        self.modulus = prime**exponent

    def coerce(self, x):
        if isinstance(x, bool):
            raise RingError("bool is not a coefficient")
        if isinstance(x, int):
            return x % self.modulus
        if isinstance(x, Fraction):
            if x.denominator % self.prime == 0:
                raise RingError(f"denominator of {x} is divisible by {self.prime}")
            return x.numerator * pow(x.denominator, -1, self.modulus) % self.modulus
        raise RingError(f"cannot coerce {x!r} into {self!r}")

    def add(self, a, b):
        return (a + b) % self.modulus

    def sub(self, a, b):
        return (a - b) % self.modulus

    def neg(self, a):
        return -a % self.modulus

    def mul(self, a, b):
        return a * b % self.modulus

    def inv(self, a):
        if a % self.prime == 0:
            raise NotInvertibleError(f"{a} is divisible by {self.prime}")
        return pow(a, -1, self.modulus)

    def is_unit(self, a) -> bool:
        return a % self.prime != 0

    def name_token(self) -> str:
        return f"res{self.prime}e{self.exponent}"

    def to_json(self) -> dict:
        return {"kind": self.kind, "prime": self.prime, "exponent": self.exponent}

    def __eq__(self, other):
        return (
            isinstance(other, ResidueRing)
            and other.prime == self.prime
            and other.exponent == self.exponent
        )

    def __hash__(self):
        return hash((self.kind, self.prime, self.exponent))


def ring_from_json(data: dict) -> CoefficientRing:
    kind = data.get("kind")
    if kind == ExactIntegers.kind:
        return ExactIntegers()
    if kind == RationalsLocalizedAt.kind:
        return RationalsLocalizedAt(data["prime"])
    if kind == ResidueRing.kind:
        return ResidueRing(data["prime"], data["exponent"])
    raise RingError(f"unknown ring descriptor {data!r}")


class PrimeContext:
    """A working prime p >= 5 with its mod-3 class and precision defaults.

    chi3 is +1 when p = 1 mod 3 (split) and -1 when p = 2 mod 3 (inert).
    The default q-precision is 5*p^2 and congruences are graded against the
    modulus p^4, computed with two guard digits of headroom.
    """

    def __init__(
        self,
        p: int,
        precision: int | None = None,
        modulus_exponent: int = 4,
        guard_digits: int = 2,
    ):
        if p == 3:
            raise RingError("p=3 excluded")
        if not is_prime(p):
            raise RingError(f"{p} is not prime")
        if p < 5:
            raise RingError(f"p must be >= 5, got {p}")
        if modulus_exponent < 1:
            raise RingError("modulus_exponent must be >= 1")
        if guard_digits < 0:
            raise RingError("guard_digits must be >= 0")
        self.p = p
        self.chi3 = 1 if p % 3 == 1 else -1
        self.default_precision = 5 * p * p if precision is None else precision
        if self.default_precision < p + 1:
            raise RingError(
                f"precision {self.default_precision} < p+1 = {p + 1}"
            )
        self.modulus_exponent = modulus_exponent
        self.guard_digits = guard_digits

    @property
    def split(self) -> bool:
        return self.chi3 == 1

    @property
    def inert(self) -> bool:
        return self.chi3 == -1

    @property
    def working_exponent(self) -> int:
        return self.modulus_exponent + self.guard_digits

    def layer_exponent(self, ell: int) -> int:
        """Exponent of the working modulus for layer ell: 4 - ell by default."""
        return self.modulus_exponent - ell

    def residue_ring(self, exponent: int | None = None) -> ResidueRing:
        return ResidueRing(self.p, self.working_exponent if exponent is None else exponent)

    def rational_ring(self) -> RationalsLocalizedAt:
        return RationalsLocalizedAt(self.p)

    def __repr__(self):
        label = "split" if self.split else "inert"
        return f"PrimeContext(p={self.p}, {label}, N={self.default_precision})"
