"""Fox H-function numerics, fundamental solutions of the fractional
diffusion-wave equation, and moment/chaos bounds for the stochastic
version driven by Gaussian noise."""
import os

# FRACSPDE_THREADS caps the BLAS/OpenMP pools; it must be set before numpy loads
_threads = os.environ.get("FRACSPDE_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

from . import errors, foxh, kernels, quadrature, report, spde, specfun  # noqa: E402
from .errors import ConvergenceError, FracSPDEError, PreconditionError  # noqa: E402
from .kernels import FracParams, InitialData  # noqa: E402
from .spde import NoiseSpec  # noqa: E402
from .specfun import MittagLefflerParams, mittag_leffler  # noqa: E402

__all__ = [
    "errors", "foxh", "kernels", "quadrature", "report", "spde", "specfun",
    "ConvergenceError", "FracSPDEError", "PreconditionError",
    "FracParams", "InitialData", "NoiseSpec", "MittagLefflerParams", "mittag_leffler",
]
__version__ = "0.1.0"
