"""Linearization of analytic maps near an elliptic or hyperbolic fixed point by Lie transforms."""

from .algebra import HomPoly, HomVectorField, PolySeries, substitute, sup_norm_bound
from .bounds import (audit_iteration_lemma, c_sequence, cauchy_lie_bound,
                     composed_series_audit, composed_series_certificate,
                     explie_displacement_audit, explie_domain_check,
                     fit_hypothesis_constants, iteration_bounds, radius_lower_bound)
from .divisors import (DiophantineFloor, DivisorTable, alpha_seq, beta_seq, bruno_sum,
                       divisor_table, gamma_sum, istar, jset_enumerate, sigma_seq, t_bound,
                       t_exact, theta_bound, theta_exact, triangle_order)
from .errors import (DegreeMismatch, EnumerationTooLarge, GammaDiverged, InsufficientData,
                     NonResonanceViolated, RepresentationObstruction, ResonantDivisor)
from .lie import (GeneratingSequence, LieSeriesChain, apply_transform, compose_lie_series_chain,
                  compose_transforms, lie_derivative, lie_series_apply, lie_transform_E,
                  lie_transform_E_nonrecursive)
from .maps import (AnalyticMap, Spectrum, d_eigenvalue, generating_sequence_to_map,
                   map_to_generating_sequence, r_apply, read_map, solve_homological, write_map)
from .normalizer import NormalFormResult, normalize, normalize_step, transform_coordinates
from .verify import conjugacy_residual, exchange_check, koenigs_oracle, root_test_radius

__version__ = "0.1.0"
