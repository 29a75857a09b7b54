"""Exact simulation of squared Bessel and CIR processes by direct inversion.

The chi-square quantile is approximated by two-dimensional Chebyshev tables
(degrees of freedom x probability) built offline; sampling, process
simulation and the benchmark option pricers live on top.
"""

from .chebfit import (ChebyshevPatch, PatchCollection, PatchSet,
                      PerDeltaContext, Region, RegionSpec, coefficient,
                      default_collection, fit_interval, fit_patch,
                      load_patches, save_patches)
from .pricing import (Coupling, McResult, MomentReport, OptionKind,
                      OptionSpec, moment_report, price_asian_mc,
                      price_basket_mc, price_put_mc, put_price_exact,
                      relative_error)
from .processes import (BesselParams, CirParams, TimeGrid, bessel_step,
                        cir_path_exact, cir_path_fte, cir_terminal_exact,
                        time_change, transition_scale)
from .quadrature import QuadratureError, gauss_kronrod
from .sampler import (RngStream, central_chi2_inverse, clenshaw2d,
                      patch_inverse, sample_central, sample_noncentral,
                      sample_noncentral_extra, sample_poisson,
                      sample_standard_normal)
from .specfun import (NoncentralParams, chi2_cdf, chi2_inv_reference,
                      chi2_inv_series, chi2_pdf, chi2_sf, log_gamma,
                      noncentral_chi2_cdf, noncentral_chi2_moments,
                      noncentral_chi2_pdf, normal_inv_cdf)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
