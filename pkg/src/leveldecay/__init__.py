"""Level-set decay estimates with explicit constants, an extremal-function
oracle, a degenerate elliptic solver, and regularity diagnostics."""

from ._kernels import BACKEND_NAME
from .analysis import (DistributionFunction, ExpIntegrabilityParams,
                       ExponentTable, RegularityReport, default_levels,
                       distribution_function, energy_inequality_check,
                       exponent_table, fit_power_exponent, grid_stability,
                       levelset_recursion_fit, regime_verdict,
                       series_integrability_check, weak_norm_estimate)
from .errors import (ConvergenceError, FitError, InputError, LevelDecayError,
                     NonFiniteError, ParameterError, RegimeError)
from .lemmas import (DecayBound, ExponentialDecay, IterationParams,
                     LemmaParams, PowerLawDecay, VanishingLevel, bound_for,
                     classical_bound, compute_L, compute_power_constants,
                     compute_tau, doubling_transfer, generalized_bound,
                     iteration_limit, iteration_threshold, kv_bound)
from .oracle import (LevelFunction, LevelGrid, VerificationReport,
                     default_level_grid, extremal_level_function,
                     run_domination_suite, sample_lemma_params, verify_bound)
from .pde import (CoefficientSpec, FaceCoefficients, GridField, SolverConfig,
                  SourceSpec, apply_operator, assemble_and_solve_linear,
                  cell_centers, excess, face_coefficients, holder_check,
                  holder_integral_bound, picard_solve, sample_source,
                  truncate, weak_norm)

__version__ = "0.1.0"
