"""Dense statevector backend."""

from __future__ import annotations

from collections import Counter
from typing import Sequence

import numpy as np

from ..errors import CapacityError, InvalidCollapse, InvalidGate
from .circuit import Circuit, GateOp, index_to_bits

DENSE_LIMIT = 26
NORM_TOL = 1e-9
PROB_TOL = 1e-12


def apply_matrix(psi: np.ndarray, k: int, U: np.ndarray, targets: Sequence[int],
                 controls: Sequence[tuple[int, int]] = ()) -> None:
    """Apply ``U`` in place to the little-endian ``psi`` over ``k`` qubits.

    Only the slice selected by ``controls`` is touched.
    """
    t = psi.reshape((2,) * k)
    idx: list = [slice(None)] * k
    for q, v in controls:
        idx[k - 1 - q] = v
    sub = t[tuple(idx)]
    caxes = {k - 1 - q for q, _ in controls}
    remaining = [a for a in range(k) if a not in caxes]
    taxes = [remaining.index(k - 1 - q) for q in targets]
    m = len(targets)
    Ur = np.asarray(U, dtype=complex).reshape((2,) * (2 * m))
    new = np.tensordot(Ur, sub, axes=(list(range(m, 2 * m)), taxes))
    sub[...] = np.moveaxis(new, list(range(m)), taxes)


def bit_probability(psi: np.ndarray, k: int, q: int, bit: int) -> float:
    p = np.abs(psi.reshape((2,) * k)) ** 2
    idx: list = [slice(None)] * k
    idx[k - 1 - q] = bit
    return float(np.sum(p[tuple(idx)]))


def collapse_array(psi: np.ndarray, k: int, q: int, bit: int) -> float:
    """Project qubit ``q`` onto ``bit`` in place and renormalise; returns the branch probability."""
    p = bit_probability(psi, k, q, bit)
    if p <= PROB_TOL:
        raise InvalidCollapse(f"qubit {q} has probability {p:.3g} of reading {bit}")
    t = psi.reshape((2,) * k)
    idx: list = [slice(None)] * k
    idx[k - 1 - q] = 1 - bit
    t[tuple(idx)] = 0
    psi /= np.sqrt(p)
    return p


class StateVector:
    """Dense amplitudes over ``num_qubits`` qubits.

    Methods mutate in place and return ``self``; the module-level functions
    below give the copy-returning variants.
    """

    def __init__(self, amps, num_qubits: int | None = None, check: bool = True):
        amps = np.array(amps, dtype=complex)
        if num_qubits is None:
            num_qubits = int(amps.size).bit_length() - 1
        if amps.shape != (1 << num_qubits,):
            raise ValueError(f"expected {1 << num_qubits} amplitudes, got {amps.shape}")
        if check and abs(float(np.vdot(amps, amps).real) - 1.0) > NORM_TOL:
            raise ValueError("state is not normalised")
        self.num_qubits = num_qubits
        self.amps = amps

    @classmethod
    def zero(cls, num_qubits: int, limit: int = DENSE_LIMIT) -> "StateVector":
        if num_qubits < 1:
            raise ValueError("need at least one qubit")
        if num_qubits > limit:
            raise CapacityError(
                f"{num_qubits} qubits exceed the dense limit of {limit}; use the factored backend"
            )
        amps = np.zeros(1 << num_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(amps, num_qubits, check=False)

    def copy(self) -> "StateVector":
        return StateVector(self.amps.copy(), self.num_qubits, check=False)

    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amps, self.amps).real))

    def _check_op(self, op: GateOp) -> None:
        if any(q >= self.num_qubits for q in op.qubits):
            raise InvalidGate(f"{op.kind} gate on {op.qubits} does not fit {self.num_qubits} qubits")

    def apply(self, op: GateOp) -> "StateVector":
        self._check_op(op)
        if op.kind != "i":
            apply_matrix(self.amps, self.num_qubits, op.unitary(), op.targets, op.controls)
        return self

    def run(self, circuit: Circuit) -> "StateVector":
        for op in circuit.ops:
            self.apply(op)
        return self

    def prob_of_bit(self, qubit: int, bit: int) -> float:
        return min(1.0, max(0.0, bit_probability(self.amps, self.num_qubits, qubit, bit)))

    def collapse(self, qubit: int, bit: int) -> float:
        return collapse_array(self.amps, self.num_qubits, qubit, bit)

    def measure(self, qubit: int, rng: np.random.Generator) -> int:
        bit = int(rng.random() < self.prob_of_bit(qubit, 1))
        self.collapse(qubit, bit)
        return bit

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def reduced_purity(self, qubit: int) -> float:
        t = np.moveaxis(self.amps.reshape((2,) * self.num_qubits), self.num_qubits - 1 - qubit, 0)
        m = t.reshape(2, -1)
        rho = m @ m.conj().T
        return float(np.real(np.trace(rho @ rho)))

    def sample_counts(self, qubits: Sequence[int], shots: int, rng: np.random.Generator) -> dict[str, int]:
        if shots < 1:
            raise ValueError("shots must be >= 1")
        p = self.probabilities()
        p = p / p.sum()
        draws = rng.choice(p.size, size=shots, p=p)
        counts = Counter(draws.tolist())
        out: Counter = Counter()
        for idx, c in counts.items():
            out["".join("1" if (idx >> q) & 1 else "0" for q in qubits)] += c
        return dict(sorted(out.items()))

    def distribution(self, tol: float = PROB_TOL) -> dict[str, float]:
        """Nonzero basis probabilities keyed by bitstring."""
        p = self.probabilities()
        return {index_to_bits(int(j), self.num_qubits): float(p[j]) for j in np.flatnonzero(p > tol)}


def init_state(k: int, limit: int = DENSE_LIMIT) -> StateVector:
    return StateVector.zero(k, limit)


def apply(state: StateVector, op: GateOp) -> StateVector:
    return state.copy().apply(op)


def measure(state: StateVector, qubit: int, rng: np.random.Generator) -> tuple[int, StateVector]:
    out = state.copy()
    bit = out.measure(qubit, rng)
    return bit, out


def prob_of_bit(state: StateVector, qubit: int, bit: int) -> float:
    return state.prob_of_bit(qubit, bit)


def sample_counts(state, qubits: Sequence[int], shots: int, rng: np.random.Generator) -> dict[str, int]:
    return state.sample_counts(qubits, shots, rng)


def simulate(circuit: Circuit, limit: int = DENSE_LIMIT) -> StateVector:
    return StateVector.zero(circuit.num_qubits, limit).run(circuit)


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Full matrix of a small circuit, built column by column."""
    dim = 1 << circuit.num_qubits
    cols = []
    for j in range(dim):
        amps = np.zeros(dim, dtype=complex)
        amps[j] = 1.0
        cols.append(StateVector(amps, circuit.num_qubits, check=False).run(circuit).amps)
    return np.stack(cols, axis=1)
