"""Numerics for selfdual conformal geometry and its dimensional reductions.

Subpackages cover tensor calculus on charts (`tensorcalc`), the 1d matrix
Riccati backgrounds (`riccati`), gauge algebras and field equations (`gauge`,
`algebras`), the explicit geometry constructions (`builders`), grid
verification (`verify`), named example bundles (`catalog`) and a batch CLI
(`cli`).
"""

__version__ = "0.1.0"

from . import errors  # noqa: F401
