from .circuit import PREP_LABELS, Circuit, gate_text, load_circuit, parse_circuit, serialize_circuit
from .distribution import (
    PROBABILITY,
    QUASI,
    Distribution,
    from_counts,
    load_distribution,
    merge_distributions_normalize,
    normalize,
    total_variation,
)
from .errors import (
    CheckInfeasibleError,
    CombinatorialBudgetError,
    DegenerateDistributionError,
    EmptyPostSelectionError,
    ExecutionError,
    InfeasibleCutError,
    ParseError,
    PlanningError,
    SqemError,
    UnsupportedSizeError,
    ValidationError,
)
from .gates import Gate, gate_matrix, gates_matrix_1q, u3_params_from_matrix
from .linalg import DENSE_LIMIT, circuit_unitary
from .pauli import (
    Hamiltonian,
    PauliString,
    load_hamiltonian,
    parse_hamiltonian,
    pauli_commutes_with_circuit,
    qubitwise_commute,
    serialize_hamiltonian,
)
