"""Spectral regularization of semi-discrete inverse problems with
reproducing-kernel weak-error analysis."""
from .errors import *  # noqa: F401,F403
from .experiments import (ExperimentConfig, RateRecord, RateStudy, Report, emit_outputs,
                          fit_loglog_slope, load_config, run_filter_certification, run_geometry,
                          run_lemma_bounds, run_noise_amplification, run_rate_study,
                          run_sampling_probe)
from .filters import Certificate, FilterFunction, analytic_constants, certify_constants
from .geometry import (Domain, FillDistance, PointSet, fill_distance, generate_points,
                       quasi_uniformity_ratio, separation_distance)
from .kernels import KernelModel, rkhs_norm_expansion
from .linalg import SymEig, apply_spectral_function, pinv_apply, sym_eig
from .operators import (ForwardProblem, OperatorConstants, SourcePair, analytic_svd_integration,
                        builtin_source_pairs, operator_constants, sample_data)
from .regularization import (GramSystem, NoiseModel, SpectralSolution, add_noise,
                             discrete_residual_norm, evaluate_g, hk_norm, solve)
from .weak_error import (TestFunctionalA1, TestFunctionalAdjoint, bound_a1, bound_adjoint,
                         optimal_lambda, pair_a1, pair_adjoint, theoretical_rate)

__version__ = "0.1.0"
