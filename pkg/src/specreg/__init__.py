"""Randomized regularization of non-normal matrices.

Perturb a matrix by a small random multiple of an iid sub-Gaussian matrix,
diagonalize the result, and certify its eigenvector condition number; a
Monte Carlo harness checks the probabilistic tail bounds this procedure
rests on, at desk scale.
"""

__version__ = "0.1.0"

from .errors import (
    FunctionEvaluationError,
    InvalidInputError,
    MatrixFormatError,
    NearDefectiveError,
    ResolutionError,
)
from .matcore import (
    DenseMatrix,
    SingularValues,
    SpectralDecomposition,
    eig,
    op_norm,
    read_matrix,
    singular_values,
    write_matrix,
)
from .spectral import (
    ConditionReport,
    condition_report,
    eigenvalue_condition_numbers,
    eigenvalue_gap,
    kappa2,
    kappa_v_bracket,
)
from .pseudospec import (
    GridRegion,
    PseudospectrumEstimate,
    in_pseudospectrum,
    pseudospectrum_volume,
    vol_bound_check,
    vol_limit_check,
)
from .perturb import (
    COMPLEX_GAUSSIAN,
    REAL_GAUSSIAN,
    REAL_UNIFORM,
    NoiseLaw,
    RegularizationResult,
    complex_regularize,
    law_by_name,
    regularize,
    sample_gn,
)
from .matfun import (
    MatFunResult,
    approx_matfun,
    davies_envelopes,
    matrix_function,
    resolve_scalar_function,
)
from .harness import (
    ExperimentConfig,
    ExperimentReport,
    calibrate,
    estimate_kprime,
    fit_loglog_slope,
    run_experiment,
    wilson_interval,
)
