"""Statevector simulation: gate set, dense and factored backends."""

from .circuit import (
    Circuit,
    GateOp,
    bits_to_index,
    check_bitstring,
    h,
    i,
    index_to_bits,
    is_unitary,
    lower_zero_controls,
    ry,
    ry_matrix,
    unitary,
    x,
    z,
)
from .dense import (
    DENSE_LIMIT,
    StateVector,
    apply,
    circuit_unitary,
    init_state,
    measure,
    prob_of_bit,
    sample_counts,
    simulate,
)
from .factored import REGISTER_LIMIT, FactoredState, f_apply, f_measure, f_simulate, merge


def make_state(num_qubits: int, backend: str = "auto", dense_limit: int = DENSE_LIMIT):
    """Fresh |0...0> on the requested backend; ``auto`` picks dense when it fits."""
    if backend == "auto":
        backend = "dense" if num_qubits <= min(dense_limit, 16) else "factored"
    if backend == "dense":
        return StateVector.zero(num_qubits, dense_limit)
    if backend == "factored":
        return FactoredState(num_qubits)
    raise ValueError(f"unknown backend {backend!r}")


def run_circuit(circuit: Circuit, backend: str = "auto"):
    return make_state(circuit.num_qubits, backend).run(circuit)
