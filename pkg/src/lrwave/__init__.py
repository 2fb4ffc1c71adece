"""Layered random media with long-range correlations.

Synthesis of long-memory and multifractional Gaussian fields, transformed
(possibly non-Gaussian) media, frequency-domain pulse propagation through
them, simulators of the limiting travel-time processes, and the estimators
that tie the two together.
"""

__version__ = "0.1.0"

from .errors import (ConfigurationError, DomainError, PhaseResolutionError,
                     QuadratureError, StateError, SynthesisError, WindowError)
from .gaussian_field import (FieldGrid, FrequencyGridSpec, SpectralWeight,
                             Trajectory, asymptotic_covariance_scale,
                             default_weight, fgn_covariance, field_covariance,
                             increment_field_covariance, renorm_constant,
                             renorm_constant_sq, renorm_constant_sq_quadrature,
                             sample_field_diagonal, synthesize_fgn,
                             synthesize_field_grid)
from .hermite import (HermiteSpec, Truncation, composed_covariance,
                      hermite_coeffs, hermite_poly, transform_path, truncation)
from .limits import (LimitSpec, hermite_covariance, sh_covariance, simulate,
                     simulate_hermite, simulate_sh, simulate_sh_hermite)
from .medium import (A2Report, A3Report, MediumRealization, MediumSpec,
                     VTriple, build_medium, check_a2, check_a3,
                     constant_profile, linear_profile, periodic_profile,
                     permuted_copy, profile_from_config, v_triple,
                     white_medium)
from .propagator import (FrequencyGrid, PropagatorState, TransmissionSpectrum,
                         propagate, spectrum, transmission)
from .pulse import (PulseDistance, PulseTrace, SourcePulse, gaussian_source,
                    pulse_distance, pulse_width, reflected_pulse,
                    ricker_source, table_source, theory_longrange,
                    theory_shortrange, transmitted_pulse)
from .stats import (CovarianceTable, EstimateWithCI, PVariationReport,
                    dyadic_p_variation, empirical_cov, hurst_estimate,
                    local_hurst, mc_aggregate)
