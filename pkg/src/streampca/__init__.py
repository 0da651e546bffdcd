"""Memory-restricted streaming PCA estimators and a benchmark harness.

Two algorithm families run behind one streaming interface that keeps
O(k d) state: stochastic gradient updates (decaying or fixed rate) and
block power iterations (fixed or growing blocks).  Quality is measured
against a reference subspace by the squared sine of the largest
principal angle.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DegenerateBlockError,
    InfiniteAngleError,
    InvalidArgumentError,
    ParseError,
    RankDeficiencyError,
    StreamPCAError,
)
from .rng import RngState, derive_seed
from .linalg import (
    gaussian_matrix,
    qr_decompose,
    singular_values_small,
    smallest_singular_value,
)
from .streams import (
    BagOfWordsDataset,
    SparsePoint,
    SparseRows,
    StreamSource,
    SyntheticSpec,
    load_bag_of_words,
    make_stream,
    sample_synthetic,
)
from .estimators import (
    Algorithm,
    EstimatorConfig,
    EstimatorState,
    ScheduleParams,
    alecton_update,
    block_sizes,
    block_update,
    bpca_block_from_corpus,
    consume,
    current_basis,
    init,
    spca_update,
    theoretical_block_size,
)
from .metrics import (
    ReferenceSubspace,
    analytic_reference,
    reference_oracle,
    residual_error,
    spectral_error,
    tan_error,
)
from .harness import (
    ExperimentConfig,
    ExperimentResult,
    ExperimentSummary,
    TrialRecord,
    aggregate,
    run_experiment,
    run_trial,
    welch_t,
)

__all__ = [
    "__version__",
    "Algorithm",
    "BagOfWordsDataset",
    "ConfigError",
    "DegenerateBlockError",
    "EstimatorConfig",
    "EstimatorState",
    "ExperimentConfig",
    "ExperimentResult",
    "ExperimentSummary",
    "InfiniteAngleError",
    "InvalidArgumentError",
    "ParseError",
    "RankDeficiencyError",
    "ReferenceSubspace",
    "RngState",
    "ScheduleParams",
    "SparsePoint",
    "SparseRows",
    "StreamPCAError",
    "StreamSource",
    "SyntheticSpec",
    "TrialRecord",
    "aggregate",
    "alecton_update",
    "analytic_reference",
    "block_sizes",
    "block_update",
    "bpca_block_from_corpus",
    "consume",
    "current_basis",
    "derive_seed",
    "gaussian_matrix",
    "init",
    "load_bag_of_words",
    "make_stream",
    "qr_decompose",
    "reference_oracle",
    "residual_error",
    "run_experiment",
    "run_trial",
    "sample_synthetic",
    "singular_values_small",
    "smallest_singular_value",
    "spca_update",
    "spectral_error",
    "tan_error",
    "theoretical_block_size",
    "welch_t",
]
