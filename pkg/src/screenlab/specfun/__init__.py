"""Special functions and double-double arithmetic used by the rest of the package."""

from .bessel import bessel_k, ext_xnu_bessel_k, xnu_bessel_k
from .extended import (
    DD_EULER,
    DD_LN2,
    DD_PI,
    DD_SQRT_PI,
    ExtendedReal,
    ext,
    ext_erfc,
    ext_erfcx,
    ext_exp,
    ext_expm1,
    ext_log,
    ext_sqrt,
)
from .functions import EULER_GAMMA, erfc, log_gamma

__all__ = [
    "DD_EULER",
    "DD_LN2",
    "DD_PI",
    "DD_SQRT_PI",
    "EULER_GAMMA",
    "ExtendedReal",
    "bessel_k",
    "erfc",
    "ext",
    "ext_erfc",
    "ext_erfcx",
    "ext_exp",
    "ext_expm1",
    "ext_log",
    "ext_sqrt",
    "ext_xnu_bessel_k",
    "log_gamma",
    "xnu_bessel_k",
]
