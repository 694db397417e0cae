"""Exact symbolic computations in quantum loop superalgebras of type sl(M,N).

Subpackages:

- ``coeffs``:    exact rational-function scalars, z-polynomials and series
- ``superfree``: graded words, the defining-relation catalog, quantum
                 brackets, phi series, guided rewriting
- ``pbw``:       positive roots, root vectors, PBW monomials, the
                 canonical (anti-)isomorphisms
- ``modrep``:    finite-dimensional modules, evaluation pullbacks, tensor
                 products, highest-weight extraction
- ``weyl``:      torsion triples, the highest-weight monoid, odd slices
- ``cli``:       batch verification suites with JSON reports
"""

from . import cli, coeffs, linalg, modrep, pbw, superfree, weyl

__version__ = "0.1.0"

__all__ = ["cli", "coeffs", "linalg", "modrep", "pbw", "superfree", "weyl", "__version__"]
