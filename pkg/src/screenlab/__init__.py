"""Exact kriging and screening-effect measurements for stationary Gaussian fields.

Subpackages and modules:

``specfun``      double-double arithmetic and special functions
``kernels``      covariance models with spectral densities
``kriging``      simple and ordinary kriging with precision control
``spectral``     frequency-domain error decompositions and diagnostics
``experiments``  scenario catalog, eps sweeps and covariance-limit checks
``cli``          the ``screenlab`` command
"""

__version__ = "0.1.0"

from .kernels import (  # noqa: E402
    CovarianceModel,
    DoublyMatern,
    Exponential,
    Matern,
    SpaceTime,
    TensorExponential,
    Triangular,
    model_from_spec,
)
from .kriging import (  # noqa: E402
    KrigingError,
    SingularGramError,
    SiteConfiguration,
    ordinary_krige,
    screening,
    screening_ratio,
    simple_krige,
)
from .spectral import (  # noqa: E402
    TrigPolynomial,
    band_fraction,
    fcond_profile,
    residual_correlation,
    spectral_mse,
)

__all__ = [
    "CovarianceModel",
    "DoublyMatern",
    "Exponential",
    "KrigingError",
    "Matern",
    "SingularGramError",
    "SiteConfiguration",
    "SpaceTime",
    "TensorExponential",
    "Triangular",
    "TrigPolynomial",
    "__version__",
    "band_fraction",
    "fcond_profile",
    "model_from_spec",
    "ordinary_krige",
    "residual_correlation",
    "screening",
    "screening_ratio",
    "simple_krige",
    "spectral_mse",
]
