"""Discrete exterior calculus on simplicial complexes."""

from .complex import Chain, SimplicialComplex, boundary, build_complex, local_embed, validate_local_metric
from .geometry import Geometry, build_dual, circumcenter, double_dual_sign, dual_boundary

__all__ = [
    "Chain",
    "Geometry",
    "SimplicialComplex",
    "boundary",
    "build_complex",
    "build_dual",
    "circumcenter",
    "double_dual_sign",
    "dual_boundary",
    "local_embed",
    "validate_local_metric",
]
