"""heatlab: Dirichlet spectra, heat trace, heat content, and heat-expansion
coefficients for interval, circle, torus, product, and warped-product
manifolds, verified against independent discretization oracles."""

from . import expr
from .asymptotics import (AsymptoticFit, fit_expansion,
                          geometric_content_coefficients,
                          geometric_trace_coefficients)
from .errors import HeatLabError
from .experiments import (ExperimentReport, run_asymptotics_crosscheck,
                          run_content_factorization, run_cover_suite,
                          run_isospectrality_suite, run_sector_referee,
                          run_suite, run_warped_isospectrality)
from .heat import (HeatSeries, heat_content, heat_trace, mass_coefficients,
                   pde_heat_content_oracle, weighted_heat_content_base)
from .manifolds import (AbstractFiber, Circle, FlatTorus, GeometrySummary,
                        Interval, Product, WarpedProduct, geometry_summary,
                        load_spec, spec_from_dict, spec_to_dict, validate_spec)
from .spectral import (SectorOperator, SpectralResolution, circle_spectrum,
                       fd2d_warped_spectrum, interval_spectrum,
                       product_spectrum, schrodinger_dirichlet_spectrum,
                       sector_operator, spectral_resolution, torus_spectrum,
                       warped_product_spectrum)
from .tensor import (CurvatureSample, PatchMetric, christoffel, curvature_at,
                     derivative_scalars, second_fundamental_form)

__version__ = "0.1.0"
