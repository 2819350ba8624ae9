"""Low-rank matrix recovery by modified iterative hard thresholding.

Solvers for recovering a rank-r matrix from compressive linear
measurements whose map satisfies an l1-flavored rank-restricted isometry
(Gaussian rank-one projections, subexponential dense ensembles), plus the
measurement ensembles, isometry-constant estimation, baselines, and an
experiment harness.
"""

from .matana import (SvdFactors, eta, hard_threshold, load_matrix_csv,
                     save_matrix_csv, sign_vector, svd)
from .measure import (DENSE_IID, RANK_ONE, MeasurementMap, load_map,
                      make_dense_map, make_rank_one_map, save_map)
from .recover import (CONDSRI_TRIGGERED, ITERATE_CONVERGED, MAX_ITER,
                      RESIDUAL_CONVERGED, MihtConfig, RecoveryResult,
                      StagnantDirectionError, TracePoint, iht_classic, miht,
                      niht, stepsize, theorem_config, theorem_parameters,
                      write_trace_csv)
from .rripcheck import (RripEstimate, concentration_curve, estimate_constants,
                        sample_rank_r, summarize_curve)
from .bench import ExperimentSpec, run_and_write

__version__ = "0.1.0"

__all__ = [
    "SvdFactors", "svd", "hard_threshold", "eta", "sign_vector",
    "save_matrix_csv", "load_matrix_csv",
    "MeasurementMap", "RANK_ONE", "DENSE_IID",
    "make_rank_one_map", "make_dense_map", "save_map", "load_map",
    "MihtConfig", "RecoveryResult", "TracePoint", "StagnantDirectionError",
    "miht", "iht_classic", "niht", "stepsize", "theorem_parameters",
    "theorem_config",
    "write_trace_csv",
    "RESIDUAL_CONVERGED", "ITERATE_CONVERGED", "MAX_ITER", "CONDSRI_TRIGGERED",
    "RripEstimate", "sample_rank_r", "estimate_constants", "concentration_curve",
    "summarize_curve",
    "ExperimentSpec", "run_and_write",
    "__version__",
]
