from .kernels import BACKEND as KERNEL_BACKEND
from .noise import NoiseModel, load_noise
from .simulator import (
    PREP_STATES,
    DensityMatrix,
    ExecutionReport,
    exact_probabilities,
    execute_exact,
    expectation,
    run_exact,
    run_statevector,
    sample,
    sample_counts,
)
