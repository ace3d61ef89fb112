"""Half-space boundary layers for linearized kinetic equations.

Discrete velocity models for five collision-operator families, kernel
signature analysis over the drift speed, a coercive penalization of the
transport operator, closed-form half-space solves with removal conditions,
and the regime-transition study across degenerate drift values.
"""

from .velocity_space import (DiscreteSpace, GridSpec, HalfSpaceSplit,
                             build_grid, reflection_operator,
                             split_half_spaces, weighted_gram)
from .models import (MODEL_PRESETS, ModelSpec, WallState,
                     boundary_maxwellian_data, closed_form_speeds,
                     default_grid, equilibrium, equilibrium_moments,
                     wall_parameter_directions)
from .collision import (AssumptionReport, LinearizedOperator,
                        build_bgk_operator, image_complement,
                        validate_assumptions)
from .spectral import (KernelBasis, Signature, degenerate_speeds,
                       kernel_basis, signature, streaming_gram)
from .penalty import (CoercivityReport, PenaltyConfig, PenalizedOperator,
                      build_penalized_operator, build_projections,
                      coercivity_check, penalty_constants)
from .solver import (BoundaryOperator, CauchySolution, ExpSum,
                     ModeDecomposition, PenalizedSolution, SourceTerm,
                     TransportSolution, admissible_boundary,
                     boundary_operator, check_source, default_x_grid,
                     moment_law_report, probe_check, probe_sources,
                     removal_conditions, solve_asymptotic, solve_cauchy,
                     solve_halfspace, solve_penalized, source_normalize,
                     transport_modes)
from .regimes import (DecayEstimate, RegimeReport, SweepTable, default_window,
                      measure_decay, sweep_signature, uniform_decay_study)

__version__ = "0.1.0"
