"""Fixed-point subspace search on (ancilla, data) qubit pairs.

Two-qubit matrices here use the ordered basis
``|0_a R>, |0_a S>, |1_a R>, |1_a S>``: ancilla most significant, and the data
qubit written in its own solution/non-solution frame. ``physical_*`` helpers
convert to the computational basis, where ``S`` is ``|solution_bit>``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConstructionError, ContractViolation
from .sim.circuit import Circuit, GateOp, X, h, ry, ry_matrix, unitary, x, z
from .sim.dense import circuit_unitary

QUARTER = math.pi / 4
HALF = math.pi / 2
ALLOWED_ANGLES = (0.0, QUARTER, HALF)
ANCILLA_TOL = 1e-12
SUCCESS_TOL = 1e-12


def prep_matrix(theta: float) -> np.ndarray:
    return ry_matrix(theta)


def fixed_point_matrix(gamma: float) -> np.ndarray:
    c, s = math.cos(2 * gamma), math.sin(2 * gamma)
    return np.array(
        [
            [-c, 0, 0, -s],
            [-s, 0, 0, c],
            [0, 0, 1, 0],
            [0, 1, 0, 0],
        ],
        dtype=complex,
    )


def _frame_swap(solution_bit: int) -> np.ndarray:
    """Permutation taking the frame basis to the computational basis."""
    return np.kron(np.eye(2), np.eye(2) if solution_bit else X)


@dataclass(frozen=True)
class SubspaceSpec:
    data_qubit: int
    ancilla: int
    solution_bit: int
    gamma: float = QUARTER

    def __post_init__(self):
        if self.solution_bit not in (0, 1):
            raise ValueError("solution_bit must be 0 or 1")
        if self.data_qubit == self.ancilla:
            raise ValueError("data qubit and ancilla must differ")

    @property
    def basis_op(self) -> np.ndarray:
        """Maps the frame (R=|0>, S=|1>) onto the computational basis."""
        return np.eye(2, dtype=complex) if self.solution_bit else X.copy()

    def with_gamma(self, gamma: float) -> "SubspaceSpec":
        return SubspaceSpec(self.data_qubit, self.ancilla, self.solution_bit, gamma)


def subspace_oracle(spec: SubspaceSpec) -> np.ndarray:
    """Phase -1 on ``|1_a>|S>``, identity elsewhere (computational basis, ancilla first)."""
    m = np.eye(4, dtype=complex)
    m[2 + spec.solution_bit, 2 + spec.solution_bit] = -1
    return m


def physical_fixed_point_matrix(spec: SubspaceSpec) -> np.ndarray:
    p = _frame_swap(spec.solution_bit)
    return p @ fixed_point_matrix(spec.gamma) @ p


def oracle_gate(spec: SubspaceSpec) -> GateOp:
    return z(spec.ancilla, [(spec.data_qubit, spec.solution_bit)])


def fixed_point_gate(spec: SubspaceSpec) -> GateOp:
    return unitary((spec.ancilla, spec.data_qubit), physical_fixed_point_matrix(spec))


def prep_ops(spec: SubspaceSpec) -> list[GateOp]:
    """Prepare ``cos g |R> + sin g |S>`` on the data qubit from |0>."""
    ops = [ry(spec.data_qubit, spec.gamma)]
    if not spec.solution_bit:
        ops.append(x(spec.data_qubit))
    return ops


def fixed_point_circuit(spec: SubspaceSpec, check: bool = True) -> list[GateOp]:
    """Gate-level form of one fixed-point iteration.

    Oracle sandwiched in H on the ancilla (a CNOT from the solution state),
    then, on the ancilla-0 branch, a reflection about the prepared state
    ``P(gamma)|0>`` built from the basis op, the preparation rotation and a
    zero-controlled phase flip.
    """
    a, d = spec.ancilla, spec.data_qubit
    basis = [x(d)] if not spec.solution_bit else []
    ops = [h(a), oracle_gate(spec), h(a)]
    ops += basis
    ops += [ry(d, -spec.gamma), x(d), z(d, [(a, 0)]), x(d), ry(d, spec.gamma)]
    ops += basis
    if check:
        got = gate_sequence_matrix(ops, spec)
        want = physical_fixed_point_matrix(spec)
        if not equal_up_to_phase(got, want):
            raise ConstructionError(f"fixed-point circuit does not match F({spec.gamma}) for {spec}")
    return ops


def gate_sequence_matrix(ops: list[GateOp], spec: SubspaceSpec) -> np.ndarray:
    """4x4 matrix of ``ops`` on (ancilla, data), ancilla most significant."""
    remap = {spec.ancilla: 1, spec.data_qubit: 0}
    local = [
        GateOp(op.kind, tuple(remap[t] for t in op.targets), tuple((remap[q], v) for q, v in op.controls),
               op.angle, op.matrix)
        for op in ops
    ]
    return circuit_unitary(Circuit(2, local))


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-8) -> bool:
    j = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    if abs(a[j]) < tol:
        return False
    phase = a[j] / b[j]
    return abs(abs(phase) - 1) < tol and float(np.max(np.abs(a - phase * b))) < tol


class Status(str, enum.Enum):
    CONVERGED = "converged"
    PENDING = "pending"
    ABSENT = "absent"


@dataclass
class FixedPointOutcome:
    status: Status
    iterations_used: int
    success_probability: float
    ancilla_probabilities: list[float] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED


def _check_pair(state, spec: SubspaceSpec) -> None:
    if state.prob_of_bit(spec.ancilla, 1) > ANCILLA_TOL:
        raise ContractViolation(f"ancilla {spec.ancilla} is not in |0> before the search")
    if hasattr(state, "register_of"):
        reg = state.register_of(spec.data_qubit)
        outside = set(reg.qubits) - {spec.data_qubit, spec.ancilla}
        if outside:
            raise ContractViolation(
                f"data qubit {spec.data_qubit} shares a register with {sorted(outside)}; it is not separable"
            )
    elif 1.0 - state.reduced_purity(spec.data_qubit) > 1e-9:
        raise ContractViolation(f"data qubit {spec.data_qubit} is entangled with the rest of the state")


def fpqs_row(state, specs, rng=None, mode: str = "exact", max_iterations: int = 2):
    """Search every pair of a row simultaneously; returns ``(outcomes, oracle_calls)``.

    Each round applies F to all still-unconverged pairs at once and counts as
    one oracle call. ``exact`` mode follows the ancilla-0 branch whenever
    convergence is not certain and accumulates the closed-form success
    probability; ``sampled`` mode measures with ``rng``. ``state`` is updated
    in place: converged pairs are left as ``|1_a>|S>`` and their data qubit
    collapsed onto the solution bit.
    """
    specs = list(specs)
    if not specs:
        return [], 0
    if mode not in ("exact", "sampled"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "sampled" and rng is None:
        raise ValueError("sampled mode needs an rng")
    for spec in specs:
        _check_pair(state, spec)

    outcomes = [FixedPointOutcome(Status.PENDING, 0, 0.0) for _ in specs]
    # probability of still being on the ancilla-0 branch
    stay = [1.0] * len(specs)
    calls = 0
    pending = list(range(len(specs)))
    for it in range(max_iterations):
        if not pending:
            break
        last = it == max_iterations - 1
        calls += 1
        for k in pending:
            state.apply(fixed_point_gate(specs[k]))
        still = []
        for k in pending:
            spec, out = specs[k], outcomes[k]
            out.iterations_used += 1
            p1 = state.prob_of_bit(spec.ancilla, 1)
            out.ancilla_probabilities.append(p1)
            out.success_probability += stay[k] * p1
            if mode == "exact":
                # certain convergence, or post-selection on the final round
                bit = int(p1 > SUCCESS_TOL if last else p1 >= 1.0 - SUCCESS_TOL)
                state.collapse(spec.ancilla, bit)
            else:
                bit = state.measure(spec.ancilla, rng)
            if bit:
                state.collapse(spec.data_qubit, spec.solution_bit)
                out.status = Status.CONVERGED
            else:
                stay[k] *= 1.0 - p1
                still.append(k)
        pending = still
    for k in pending:
        outcomes[k].status = Status.ABSENT if outcomes[k].iterations_used >= 2 else Status.PENDING
    for out in outcomes:
        out.success_probability = min(1.0, out.success_probability)
    return outcomes, calls


def fpqs_qubit(state, spec: SubspaceSpec, rng=None, mode: str = "exact"):
    outcomes, _ = fpqs_row(state, [spec], rng, mode)
    return outcomes[0], state


def convergence_probability(gamma: float) -> float:
    """Closed-form success probability after at most two iterations."""
    return math.sin(gamma) ** 2 + math.cos(gamma) ** 2 * math.sin(2 * gamma) ** 2
