"""Fractional quantum mechanics on a periodic spectral grid.

Riesz-derivative kinetics, free kernels and density matrices built from
stable-law series, closed-form spectra of the solvable fractional models,
and numerical eigensolvers/propagators used to cross-check them.
"""

__version__ = "0.1.0"

from .core import (
    FqmParams,
    Grid1D,
    Potential,
    WaveFunction,
    inner_product,
    make_grid,
    to_momentum,
    to_position,
)

__all__ = [
    "FqmParams",
    "Grid1D",
    "Potential",
    "WaveFunction",
    "inner_product",
    "make_grid",
    "to_momentum",
    "to_position",
    "__version__",
]
