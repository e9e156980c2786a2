"""Single-qubit error mitigation by simulating Pauli check sandwiches."""

__version__ = "0.1.0"

from .core import Circuit, Distribution, Gate, Hamiltonian, PauliString  # noqa: E402
from .sim import NoiseModel  # noqa: E402

__all__ = ["Circuit", "Distribution", "Gate", "Hamiltonian", "NoiseModel", "PauliString", "__version__"]
