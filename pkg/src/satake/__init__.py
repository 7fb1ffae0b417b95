"""
Satake - counting exponents and integral points on affine symmetric varieties.

The package provides:

- Exact root-system, weight and boundary-stratum combinatorics
- Exponent triples from closed forms and from the weight-polytope LP
- Adaptive quadrature for chamber integrals and their limit functionals
- Integral-point enumeration, cap counting and exponent fitting
- Manifest-driven runs with CSV/JSON outputs
"""

__version__ = "0.1.0"
__license__ = "MIT"

from .core import RunManifest, Runner
from .presets import lookup, preset_registry
from .strata import exponents_global, exponents_rel, polytope_exponents

__all__ = [
    "RunManifest",
    "Runner",
    "lookup",
    "preset_registry",
    "exponents_global",
    "exponents_rel",
    "polytope_exponents",
]
