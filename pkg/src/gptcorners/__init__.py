"""Generalized polarization tensors, Riemann-map coefficients and geometric factors of planar domains."""

from .bie import GptTable, assemble_np, compute_gpts, gpt_table, solve_density
from .coeffs import GammaTable, GeometricFactors, MappingCoefficients, factors_from_gamma, gamma_from_gpt
from .geometry import BoundaryCurve, builtin_curve, curve_from_spec, reflect_curve
from .mesh import build_mesh

__version__ = "0.1.0"

__all__ = [
    "BoundaryCurve",
    "GammaTable",
    "GeometricFactors",
    "GptTable",
    "MappingCoefficients",
    "assemble_np",
    "build_mesh",
    "builtin_curve",
    "compute_gpts",
    "curve_from_spec",
    "factors_from_gamma",
    "gamma_from_gpt",
    "gpt_table",
    "reflect_curve",
    "solve_density",
]
