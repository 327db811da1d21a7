"""Integer sequence machinery: the main coefficient sequence by recurrence and
by direct hypergeometric expansion, divisor-sum tables, and branch extraction.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .rings import chi3

__all__ = [
    "a_mix_recurrence",
    "a_mix_direct",
    "divisor_sums",
    "c_mix_coefficients",
    "branch_coefficient",
    "lagrange_burmann_coefficient",
    "lagrange_burmann_sweep",
    "recurrence_residual",
    "SequenceCache",
    "build_sequence_cache",
    "SequenceError",
]

SEQUENCE_FORMAT_VERSION = 1

A_SEED = (1, 18, 864)


class SequenceError(ArithmeticError):
    """A sequence identity that should hold exactly failed."""


def _rec_b1(n: int) -> int:
    return 6 * (36 * n**4 + 198 * n**3 + 424 * n**2 + 417 * n + 158)


def _rec_b0(n: int) -> int:
    return 324 * (n + 1) * (2 * n + 1) * (3 * n + 2) * (6 * n + 5)


def a_mix_recurrence(n_max: int) -> list[int]:
    """A_0..A_n_max by the order-2 recurrence, asserting exact division.

    (n+2)^4 A_{n+2} = 6(36n^4+198n^3+424n^2+417n+158) A_{n+1}
                      - 324(n+1)(2n+1)(3n+2)(6n+5) A_n
    """
    a = [A_SEED[0], A_SEED[1]]
    for n in range(0, max(n_max - 1, 0)):
        num = _rec_b1(n) * a[n + 1] - _rec_b0(n) * a[n]
        den = (n + 2) ** 4
        if num % den:
            raise SequenceError(
                f"recurrence step n={n}: {num} not divisible by (n+2)^4={den}"
            )
        a.append(num // den)
    if n_max >= 2 and a[2] != A_SEED[2]:
        raise SequenceError(f"recurrence gives A_2={a[2]}, seed says {A_SEED[2]}")
    return a[: n_max + 1]


def recurrence_residual(a: list[int], n: int) -> int:
    """Value of the order-2 operator applied to the table at index n."""
    return (n + 2) ** 4 * a[n + 2] - _rec_b1(n) * a[n + 1] + _rec_b0(n) * a[n]


def a_mix_direct(n_max: int, cross_check: bool = True) -> list[int]:
    """A_0..A_n_max from 108^n times the n-th coefficient of the cubed
    hypergeometric series with parameters (1/6, 1/3; 1).

    Single-factor coefficients h_n = (1/6)_n (1/3)_n / (n!)^2 are exact
    rationals; the cube is formed by double convolution, and integrality plus
    agreement with the recurrence are asserted.
    """
    h = [Fraction(1)]
    for n in range(n_max):
        h.append(
            h[n]
            * (Fraction(1, 6) + n)
            * (Fraction(1, 3) + n)
            / ((n + 1) * (n + 1))
        )
    sq = [sum(h[i] * h[n - i] for i in range(n + 1)) for n in range(n_max + 1)]
    cube = [sum(h[i] * sq[n - i] for i in range(n + 1)) for n in range(n_max + 1)]
    out = []
    scale = 1
    for n in range(n_max + 1):
        v = scale * cube[n]
        if v.denominator != 1:
            raise SequenceError(f"108^{n} [z^{n}] is not an integer: {v}")
        out.append(v.numerator)
        scale *= 108
    if cross_check:
        rec = a_mix_recurrence(n_max)
        if rec != out:
            first = next(i for i in range(n_max + 1) if rec[i] != out[i])
            raise SequenceError(
                f"direct value A_{first}={out[first]} != recurrence {rec[first]}"
            )
    return out


def divisor_sums(n_max: int) -> tuple[list[int], list[int]]:
    """Sieved tables s(n) = sum_{d|n} chi3(d) d^4 and
    beta(n) = sum_{d|n} chi3(n/d) d^4, indexed 1..n_max (index 0 unused)."""
    s = [0] * (n_max + 1)
    beta = [0] * (n_max + 1)
    for d in range(1, n_max + 1):
        d4 = d**4
        cd = chi3(d)
        for n in range(d, n_max + 1, d):
            if cd:
                s[n] += cd * d4
            cm = chi3(n // d)
            if cm:
                beta[n] += cm * d4
    return s, beta


def c_mix_coefficients(n_max: int, tables=None) -> list[int]:
    """c_n = 3 s(n) - 27 beta(n) for n = 1..n_max (index 0 holds the constant 1)."""
    s, beta = tables if tables is not None else divisor_sums(n_max)
    out = [1]
    for n in range(1, n_max + 1):
        out.append(3 * s[n] - 27 * beta[n])
    return out


def branch_coefficient(m: int, eps: int, dictionary) -> int:
    """[q^m] of (C0 - 27 eps u C0) H^m for the branch sign eps in {+1, -1}."""
    if eps not in (1, -1):
        raise ValueError(f"branch sign must be +1 or -1, got {eps}")
    c_eps = dictionary.c0 - 27 * eps * dictionary.u_c0
    needed = m + 1
    if min(c_eps.precision, dictionary.h_mix.precision) < needed:
        raise SequenceError(
            f"dictionary precision {dictionary.precision} too small for m={m}"
        )
    val = (c_eps.truncate(needed) * (dictionary.h_mix.truncate(needed) ** m)).coefficient(m)
    return _as_int(val)


def lagrange_burmann_coefficient(m: int, dictionary) -> int:
    """[q^m] C_mix H^m, the coefficient-inversion form of A_m."""
    if min(dictionary.c_mix.precision, dictionary.h_mix.precision) < m + 1:
        raise SequenceError(
            f"dictionary precision {dictionary.precision} too small for m={m}"
        )
    val = (
        dictionary.c_mix.truncate(m + 1) * (dictionary.h_mix.truncate(m + 1) ** m)
    ).coefficient(m)
    return _as_int(val)


def lagrange_burmann_sweep(m_max: int, dictionary) -> list[int]:
    """A_0..A_m_max via coefficient inversion, reusing incremental H powers."""
    if min(dictionary.c_mix.precision, dictionary.h_mix.precision) < m_max + 1:
        raise SequenceError(
            f"dictionary precision {dictionary.precision} too small for m_max={m_max}"
        )
    h = dictionary.h_mix.truncate(m_max + 1)
    c = dictionary.c_mix.truncate(m_max + 1)
    out = []
    hm = None  # h^m, grown incrementally across the sweep
    for m in range(m_max + 1):
        prod = c if hm is None else c * hm
        out.append(_as_int(prod.coefficient(m)))
        hm = h if hm is None else hm * h
    return out


def _as_int(val) -> int:
    if isinstance(val, Fraction):
        if val.denominator != 1:
            raise SequenceError(f"expected an integer coefficient, got {val}")
        return val.numerator
    return val


@dataclass(frozen=True)
class SequenceCache:
    """Persisted integer tables with their generator provenance."""

    a_mix: tuple
    s_vals: tuple
    beta_vals: tuple
    c_mix: tuple
    provenance: str

    @property
    def n_max(self) -> int:
        return len(self.a_mix) - 1

    def to_json_dict(self) -> dict:
        return {
            "format_version": SEQUENCE_FORMAT_VERSION,
            "provenance": self.provenance,
            "a_mix": [str(v) for v in self.a_mix],
            "s_vals": [str(v) for v in self.s_vals],
            "beta_vals": [str(v) for v in self.beta_vals],
            "c_mix": [str(v) for v in self.c_mix],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "SequenceCache":
        if data.get("format_version") != SEQUENCE_FORMAT_VERSION:
            raise SequenceError(f"unsupported cache format {data.get('format_version')!r}")
        return cls(
            a_mix=tuple(int(v) for v in data["a_mix"]),
            s_vals=tuple(int(v) for v in data["s_vals"]),
            beta_vals=tuple(int(v) for v in data["beta_vals"]),
            c_mix=tuple(int(v) for v in data["c_mix"]),
            provenance=data["provenance"],
        )


def build_sequence_cache(n_max: int, provenance: str = "Recurrence") -> SequenceCache:
    if provenance == "Recurrence":
        a = a_mix_recurrence(n_max)
    elif provenance == "DirectHypergeometric":
        a = a_mix_direct(n_max)
    else:
        raise ValueError(f"unknown provenance {provenance!r}")
    s, beta = divisor_sums(n_max)
    c = c_mix_coefficients(n_max, (s, beta))
    return SequenceCache(
        a_mix=tuple(a),
        s_vals=tuple(s),
        beta_vals=tuple(beta),
        c_mix=tuple(c),
        provenance=provenance,
    )
