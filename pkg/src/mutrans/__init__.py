"""Numerical toolkit for mu-transmission boundary problems.

Subpackages by task:

- fourierops: uniform grids, Fourier multiplier application, one-sided
  power operators, discrete transform-pair reproduction.
- symcore: boundary symbols, homogeneity and transmission-compatibility
  checks, factorization index by winding.
- symexpr: the small expression language used by symcore and the CLI.
- wienerhopf: circle-compactified frequency grid, additive Cauchy
  splitting, multiplicative scalar factorization, truncated inversion.
- muspace: solution-space norms, boundary traces, Poisson-type lifts,
  trace transition matrices.
- halfline: model half-line solves built from the factorization.
- fracdomain: interval fractional Laplacian assemblies, Dirichlet solves,
  boundary exponent fitting.
- cli: deterministic batch command line driver.

Convention used everywhere: the forward transform is
F u(xi) = integral e^{-i x xi} u(x) dx, so symbols analytic in the lower
half xi-plane preserve support in x >= 0 ("plus"), and symbols analytic
in the upper half plane preserve x <= 0 ("minus").
"""

from mutrans.errors import (
    DomainError,
    EllipticityError,
    GridError,
    MutransError,
    SymbolError,
)

__version__ = "0.1.0"

__all__ = [
    "DomainError",
    "EllipticityError",
    "GridError",
    "MutransError",
    "SymbolError",
    "__version__",
]
