"""Two-mode Fresnel transforms, entangled-state representations and
Wigner-function tomography on a truncated Fock space."""
import os as _os

# FRESNELTOMO_THREADS caps the BLAS thread pools; it must be set before numpy loads.
if _os.environ.get("FRESNELTOMO_THREADS"):
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _os.environ["FRESNELTOMO_THREADS"])

from .errors import (  # noqa: E402
    ConfigError, DegenerateTransformError, FresnelError, NumericalError, ParseError, UnimodularityError,
)
from .symplectic import RayMatrix, SymplecticParams, compose, ray_to_sr, sr_to_ray  # noqa: E402

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DegenerateTransformError", "FresnelError", "NumericalError", "ParseError",
    "UnimodularityError", "RayMatrix", "SymplecticParams", "compose", "ray_to_sr", "sr_to_ray",
]
