"""qcartier: an exact-arithmetic q-series laboratory for the level-3 modular
dictionary, the Cartier/Hecke operator calculus on q-expansions, and
desk-scale verification of the split-prime supercongruence tower and the
inert-prime obstruction.
"""

__version__ = "0.1.0"

from .rings import (
    CoefficientRing,
    ExactIntegers,
    PrimeContext,
    RationalsLocalizedAt,
    ResidueRing,
    chi3,
)
from .series import TruncatedSeries, log1p_scaled, exp_layered, p_valuation, reduce_mod

__all__ = [
    "__version__",
    "CoefficientRing",
    "ExactIntegers",
    "RationalsLocalizedAt",
    "ResidueRing",
    "PrimeContext",
    "TruncatedSeries",
    "chi3",
    "log1p_scaled",
    "exp_layered",
    "p_valuation",
    "reduce_mod",
]
