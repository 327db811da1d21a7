"""Operator calculus on q-expansions.

Cartier extraction, Verschiebung dilation, the Hecke operator in weight 5
with the mod-3 quadratic character, the multiplicative and additive Frobenius
defects of the modular parameters, Hecke finite differences, and the
triangular conversion between defect layers.

All congruence-graded outputs carry their working modulus explicitly: an
object read modulo p^(4-l) lives in ResidueRing(p, 4-l) or better, and every
division by a p-power is exactness-checked, so valuation claims fail loudly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .rings import (
    ExactDivisionError,
    ExactIntegers,
    PrimeContext,
    RationalsLocalizedAt,
    ResidueRing,
    RingError,
)
from .series import (
    TruncatedSeries,
    agree_on_overlap,
    change_ring,
    exact_p_power_quotient,
    exp_layered,
    log1p_scaled,
    p_valuation,
    reduce_mod,
)

__all__ = [
    "cartier",
    "verschiebung",
    "hecke_t_p",
    "FrobeniusDefects",
    "build_defects",
    "DefectError",
    "finite_difference_numerator",
    "frak_e",
    "verschiebung_error_term",
    "LayerVector",
    "layer_vectors",
    "binomial",
    "align_series",
]


class DefectError(ArithmeticError):
    """A structural invariant of the Frobenius defects failed."""


def binomial(n: int, k: int) -> int:
    return math.comb(n, k)


def cartier(f: TruncatedSeries, p: int) -> TruncatedSeries:
    """Index extraction sum a_{pn} q^n on Laurent series.

    A coefficient of the output at q^n is known iff pn < precision, so the
    output precision is ceil(precision / p) and a principal part of order m
    shortens to ceil(m / p).
    """
    lo = -(-f.lowest // p)
    prec = -(-f.precision // p)
    coeffs = []
    for n in range(lo, prec):
        coeffs.append(f.coefficient(p * n))
    return TruncatedSeries(f.ring, lo, coeffs, prec, coerce=False)


def verschiebung(f: TruncatedSeries, p: int) -> TruncatedSeries:
    """Exponent dilation q -> q^p; precision multiplies by p."""
    ring = f.ring
    lo = p * f.lowest
    prec = p * f.precision
    coeffs = [ring.zero] * (prec - lo)
    for i, c in enumerate(f.coeffs):
        coeffs[p * i] = c
    return TruncatedSeries(ring, lo, coeffs, prec, coerce=False)


def hecke_t_p(f: TruncatedSeries, ctx: PrimeContext) -> TruncatedSeries:
    """Weight-5 Hecke action on q-expansions: Cartier plus chi3(p) p^4 times
    Verschiebung."""
    p = ctx.p
    return cartier(f, p) + (ctx.chi3 * p**4) * verschiebung(f, p)


# -- Frobenius defects ------------------------------------------------------


@dataclass(frozen=True)
class FrobeniusDefects:
    """The logarithmic and multiplicative Frobenius defects of u, g, t.

    u_p = log(t(q)^p / t(q^p)), v_p and w_p likewise for u and g,
    nu_p = t(q^p) / t(q)^p, phi_p = nu_p - 1.  All have zero constant term
    (nu_p has constant term 1) and coefficients divisible by p.
    """

    ctx: PrimeContext
    u_p: TruncatedSeries
    v_p: TruncatedSeries
    w_p: TruncatedSeries
    nu_p: TruncatedSeries
    phi_p: TruncatedSeries

    def as_dict(self) -> dict:
        return {
            "u_p": self.u_p,
            "v_p": self.v_p,
            "w_p": self.w_p,
            "nu_p": self.nu_p,
            "phi_p": self.phi_p,
        }


def _log_defect(x: TruncatedSeries, ctx: PrimeContext) -> TruncatedSeries:
    """log of x(q)^p / x(q^p) for a parameter x with unit-normalized ratio."""
    p = ctx.p
    # the ratio's precision is capped near x.precision, so the dilated series
    # may be truncated before the costly inversion
    dilated = verschiebung(x, p)
    keep = min(dilated.precision, x.precision + 2 * max(p * x.lowest, p))
    ratio = (x**p) * dilated.truncate(keep).invert()
    return log1p_scaled(ratio, ctx)


def align_series(a: TruncatedSeries, b: TruncatedSeries):
    """Bring two series over compatible rings to a common ring.

    Residue rings at the same prime meet at the smaller modulus; exact
    integers promote to the localized rationals when paired with them.
    """
    ra, rb = a.ring, b.ring
    if ra == rb:
        return a, b
    if isinstance(ra, ResidueRing) and isinstance(rb, ResidueRing) and ra.prime == rb.prime:
        e = min(ra.exponent, rb.exponent)
        return reduce_mod(a, ra.prime, e), reduce_mod(b, ra.prime, e)
    if isinstance(ra, ExactIntegers) and isinstance(rb, RationalsLocalizedAt):
        return change_ring(a, rb), b
    if isinstance(ra, RationalsLocalizedAt) and isinstance(rb, ExactIntegers):
        return a, change_ring(b, ra)
    raise RingError(f"cannot align {ra!r} with {rb!r}")


def build_defects(dictionary, ctx: PrimeContext) -> FrobeniusDefects:
    """Construct the defect bundle and verify its structural invariants."""
    p = ctx.p
    t, u, g = dictionary.t, dictionary.u, dictionary.g
    if dictionary.precision < ctx.default_precision:
        raise DefectError(
            f"dictionary precision {dictionary.precision} below context "
            f"default {ctx.default_precision}"
        )
    u_p = _log_defect(t, ctx)
    v_p = _log_defect(u, ctx)
    w_p = _log_defect(g, ctx)
    t_p_inv = (t**p).invert()
    dilated_t = verschiebung(t, p)
    nu_p = dilated_t.truncate(min(dilated_t.precision, t.precision + 2 * p)) * t_p_inv
    phi_p = nu_p - 1

    for name, s in (("u_p", u_p), ("v_p", v_p), ("w_p", w_p), ("phi_p", phi_p)):
        if not s.is_zero() and s.lowest < 1:
            raise DefectError(f"{name} has a nonzero constant term")
        if p_valuation(s, p) < 1:
            raise DefectError(f"{name} has a coefficient not divisible by {p}")

    # the truncated logarithm is only additive within the working modulus,
    # so the linear relation is graded, not literal, over the exact backend
    target = ctx.working_exponent
    for s in (u_p, v_p, w_p):
        if isinstance(s.ring, ResidueRing):
            target = min(target, s.ring.exponent)
    lhs = reduce_mod(u_p, p, target)
    va, wa = align_series(v_p, w_p)
    rhs = reduce_mod(va - 2 * wa, p, target)
    ok, detail = agree_on_overlap(lhs, rhs)
    if not ok:
        raise DefectError(
            f"u_p != v_p - 2 w_p mod {p}^{target} at q^{detail[0]}: "
            f"{detail[1]} vs {detail[2]}"
        )

    # nu_p is exp(-u_p): their product with the layered exponential is 1
    # within the graded modulus.
    target = ctx.modulus_exponent
    nu_al, e_up = align_series(nu_p, exp_layered(u_p, ctx))
    prod = reduce_mod(nu_al * e_up, p, target)
    resid = prod - TruncatedSeries.one(prod.ring, prod.precision)
    if not resid.is_zero():
        raise DefectError(
            f"nu_p * exp(u_p) != 1 mod {p}^{target} at q^{resid.lowest}"
        )
    return FrobeniusDefects(ctx=ctx, u_p=u_p, v_p=v_p, w_p=w_p, nu_p=nu_p, phi_p=phi_p)


# -- Hecke finite differences ------------------------------------------------


def finite_difference_numerator(
    f: TruncatedSeries, dictionary, ctx: PrimeContext, ell: int
) -> TruncatedSeries:
    """The alternating Hecke combination
    sum_{j=0..ell} (-1)^(ell-j) C(ell,j) t^j T_p(f / t^(jp)).

    Every coefficient is divisible by p^ell (asserted by the caller via
    frak_e's exact division).  ell = 0 degenerates to T_p(f).
    """
    if ell < 0 or ell > 3:
        raise ValueError("ell must be in 0..3")
    p = ctx.p
    t = dictionary.t
    inv_t_p = (t.invert()) ** p
    acc = None
    t_j = None  # t^j
    f_over = f  # f / t^(jp)
    for j in range(ell + 1):
        term = hecke_t_p(f_over, ctx)
        if t_j is not None:
            term = t_j * term
        sign = -1 if (ell - j) % 2 else 1
        term = (sign * binomial(ell, j)) * term
        acc = term if acc is None else acc + term
        if j < ell:
            t_j = t if t_j is None else t_j * t
            f_over = f_over * inv_t_p
    return acc


def frak_e(
    f: TruncatedSeries, dictionary, ctx: PrimeContext, ell: int
) -> TruncatedSeries:
    """The divided Hecke finite difference N_ell(f) / p^ell.

    The division is exactness-checked; the result is meaningful modulo
    p^(4-ell) and carries at least that modulus.
    """
    n_ell = finite_difference_numerator(f, dictionary, ctx, ell)
    try:
        return exact_p_power_quotient(n_ell, ctx.p, ell)
    except ExactDivisionError as exc:
        raise DefectError(f"N_{ell} is not divisible by p^{ell}: {exc}") from exc


def verschiebung_error_term(
    f: TruncatedSeries, dictionary, ctx: PrimeContext, ell: int
) -> TruncatedSeries:
    """The dilation part of the finite difference:
    sum_j (-1)^(ell-j) C(ell,j) t^j Ver_p(f / t^(jp)).

    The divided difference satisfies, exactly on the computed window,
    frak_e(f) = Cartier(f phi^ell / p^ell) + p^(4-ell) * (this term).
    """
    p = ctx.p
    t = dictionary.t
    inv_t_p = (t.invert()) ** p
    acc = None
    t_j = None
    f_over = f
    for j in range(ell + 1):
        term = verschiebung(f_over, p)
        if t_j is not None:
            term = t_j * term
        sign = -1 if (ell - j) % 2 else 1
        term = (sign * binomial(ell, j)) * term
        acc = term if acc is None else acc + term
        if j < ell:
            t_j = t if t_j is None else t_j * t
            f_over = f_over * inv_t_p
    return acc


# -- Layer vectors and the triangular conversion ------------------------------


@dataclass(frozen=True)
class LayerVector:
    """Graded powers x^ell / p^ell for ell = 1, 2, 3; row ell is read mod
    p^(4-ell)."""

    entries: dict

    def entry(self, ell: int) -> TruncatedSeries:
        return self.entries[ell]


def _layer_powers(x: TruncatedSeries, ctx: PrimeContext) -> LayerVector:
    entries = {}
    xk = None
    for ell in (1, 2, 3):
        xk = x if xk is None else xk * x
        entries[ell] = exact_p_power_quotient(xk, ctx.p, ell)
    return LayerVector(entries)


def layer_vectors(defects: FrobeniusDefects, verify: bool = True):
    """Layers of phi_p and u_p, with the triangular relation checked row-wise.

    Row ell of the transition (phi-layers in terms of u_p-layers) is, modulo
    p^(4-ell):
        row 1: -1, p/2, -p^2/6
        row 2:  0, 1, -p
        row 3:  0, 0, -1
    with p/2 and p^2/6 as modular inverses.
    """
    ctx = defects.ctx
    p = ctx.p
    phi_layers = _layer_powers(defects.phi_p, ctx)
    u_layers = _layer_powers(defects.u_p, ctx)
    if verify:
        for ell in (1, 2, 3):
            e = ctx.layer_exponent(ell)
            if e < 1:
                continue
            ring = ResidueRing(p, e)
            u1 = reduce_mod(u_layers.entry(1), p, e)
            u2 = reduce_mod(u_layers.entry(2), p, e)
            u3 = reduce_mod(u_layers.entry(3), p, e)
            if ell == 1:
                rhs = (
                    -1 * u1
                    + (p * ring.inv(2 % ring.modulus)) * u2
                    - (p * p * ring.inv(6 % ring.modulus)) * u3
                )
            elif ell == 2:
                rhs = u2 - p * u3
            else:
                rhs = -1 * u3
            lhs = reduce_mod(phi_layers.entry(ell), p, e)
            ok, detail = agree_on_overlap(lhs, rhs)
            if not ok:
                raise DefectError(
                    f"triangular conversion fails in row {ell} at q^{detail[0]}: "
                    f"{detail[1]} vs {detail[2]}"
                )
    return phi_layers, u_layers
