"""Semi-analytic Marangoni boundary-layer solver (variational iteration + Padé closure)."""
from .exppoly import ExpPoly, differentiate, evaluate, integrate_kernel, taylor
from .params import PhysicalParams, SimilarityParams, derive_exponents, scaling_constants

__all__ = [
    "ExpPoly",
    "PhysicalParams",
    "SimilarityParams",
    "derive_exponents",
    "differentiate",
    "evaluate",
    "integrate_kernel",
    "scaling_constants",
    "taylor",
]
__version__ = "0.1.0"
