"""Factored backend: a product of independent small registers.

Every qubit starts in its own register. A gate touching several registers
merges them first; controls sitting on a qubit whose value is already
definite are resolved classically, so locked qubits never force a merge.
Measured qubits are split back out into singleton registers.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import CapacityError, InvalidGate
from .circuit import Circuit, GateOp
from .dense import StateVector, apply_matrix, bit_probability, collapse_array

REGISTER_LIMIT = 20
DEFINITE_TOL = 1e-12


@dataclass
class Register:
    qubits: tuple[int, ...]
    amps: np.ndarray  # little-endian over ``qubits``; qubits[0] is the LSB

    @property
    def size(self) -> int:
        return len(self.qubits)

    def local(self, q: int) -> int:
        return self.qubits.index(q)


class FactoredState:
    def __init__(self, num_qubits: int, register_limit: int = REGISTER_LIMIT):
        if num_qubits < 1:
            raise ValueError("need at least one qubit")
        self.num_qubits = num_qubits
        self.register_limit = register_limit
        self._owner: dict[int, Register] = {}
        for q in range(num_qubits):
            self._owner[q] = Register((q,), np.array([1.0, 0.0], dtype=complex))

    @property
    def registers(self) -> list[Register]:
        seen: dict[int, Register] = {}
        for reg in self._owner.values():
            seen.setdefault(id(reg), reg)
        return sorted(seen.values(), key=lambda r: min(r.qubits))

    def register_of(self, q: int) -> Register:
        return self._owner[q]

    def copy(self) -> "FactoredState":
        out = FactoredState.__new__(FactoredState)
        out.num_qubits = self.num_qubits
        out.register_limit = self.register_limit
        out._owner = {}
        for reg in self.registers:
            clone = Register(reg.qubits, reg.amps.copy())
            for q in reg.qubits:
                out._owner[q] = clone
        return out

    def merge(self, qubits: Sequence[int]) -> Register:
        """Fuse the registers holding ``qubits`` into one."""
        regs: list[Register] = []
        for q in qubits:
            reg = self._owner[q]
            if all(reg is not r for r in regs):
                regs.append(reg)
        if len(regs) == 1:
            return regs[0]
        total = sum(r.size for r in regs)
        if total > self.register_limit:
            raise CapacityError(f"merging into a {total}-qubit register exceeds the limit of {self.register_limit}")
        qs: tuple[int, ...] = ()
        amps = np.array([1.0], dtype=complex)
        for reg in regs:
            # later registers become more significant
            amps = np.kron(reg.amps, amps)
            qs = qs + reg.qubits
        merged = Register(qs, amps)
        for q in qs:
            self._owner[q] = merged
        return merged

    def _check_op(self, op: GateOp) -> None:
        if any(q >= self.num_qubits for q in op.qubits):
            raise InvalidGate(f"{op.kind} gate on {op.qubits} does not fit {self.num_qubits} qubits")

    def apply(self, op: GateOp) -> "FactoredState":
        self._check_op(op)
        if op.kind == "i":
            return self
        live = []
        for q, v in op.controls:
            p = self.prob_of_bit(q, v)
            if p < DEFINITE_TOL:
                return self
            if p <= 1.0 - DEFINITE_TOL:
                live.append((q, v))
        reg = self.merge(op.targets + tuple(q for q, _ in live))
        apply_matrix(
            reg.amps,
            reg.size,
            op.unitary(),
            [reg.local(t) for t in op.targets],
            [(reg.local(q), v) for q, v in live],
        )
        return self

    def run(self, circuit: Circuit) -> "FactoredState":
        for op in circuit.ops:
            self.apply(op)
        return self

    def prob_of_bit(self, qubit: int, bit: int) -> float:
        reg = self._owner[qubit]
        p = bit_probability(reg.amps, reg.size, reg.local(qubit), bit)
        return min(1.0, max(0.0, p))

    def collapse(self, qubit: int, bit: int) -> float:
        reg = self._owner[qubit]
        p = collapse_array(reg.amps, reg.size, reg.local(qubit), bit)
        self._split_out(qubit, bit)
        return p

    def measure(self, qubit: int, rng: np.random.Generator) -> int:
        bit = int(rng.random() < self.prob_of_bit(qubit, 1))
        self.collapse(qubit, bit)
        return bit

    def _split_out(self, qubit: int, bit: int) -> None:
        reg = self._owner[qubit]
        if reg.size == 1:
            return
        k = reg.size
        t = reg.amps.reshape((2,) * k)
        idx: list = [slice(None)] * k
        idx[k - 1 - reg.local(qubit)] = bit
        rest = Register(tuple(q for q in reg.qubits if q != qubit), np.ascontiguousarray(t[tuple(idx)]).ravel())
        single = np.zeros(2, dtype=complex)
        single[bit] = 1.0
        for q in rest.qubits:
            self._owner[q] = rest
        self._owner[qubit] = Register((qubit,), single)

    def definite_bit(self, qubit: int) -> int | None:
        p1 = self.prob_of_bit(qubit, 1)
        if p1 < DEFINITE_TOL:
            return 0
        if p1 > 1.0 - DEFINITE_TOL:
            return 1
        return None

    def to_dense(self) -> StateVector:
        n = self.num_qubits
        out = np.array([1.0], dtype=complex)
        order: list[int] = []
        for reg in self.registers:
            out = np.kron(reg.amps, out)
            order.extend(reg.qubits)
        # axis for position j (LSB first) is len-1-j; permute to qubit order
        t = out.reshape((2,) * n)
        src_axis_of_qubit = {q: n - 1 - j for j, q in enumerate(order)}
        perm = [src_axis_of_qubit[n - 1 - a] for a in range(n)]
        return StateVector(np.ascontiguousarray(np.transpose(t, perm)).ravel(), n, check=False)

    def probabilities(self) -> np.ndarray:
        return self.to_dense().probabilities()

    def distribution(self) -> dict[str, float]:
        return self.to_dense().distribution()

    def sample_counts(self, qubits: Sequence[int], shots: int, rng: np.random.Generator) -> dict[str, int]:
        if shots < 1:
            raise ValueError("shots must be >= 1")
        wanted = list(qubits)
        cols: dict[int, np.ndarray] = {}
        for reg in self.registers:
            hit = [q for q in reg.qubits if q in set(wanted)]
            if not hit:
                continue
            p = np.abs(reg.amps) ** 2
            draws = rng.choice(p.size, size=shots, p=p / p.sum())
            for q in hit:
                cols[q] = (draws >> reg.local(q)) & 1
        table = np.stack([cols[q] for q in wanted], axis=1) if wanted else np.zeros((shots, 0), dtype=int)
        counts = Counter("".join("1" if b else "0" for b in row) for row in table.tolist())
        return dict(sorted(counts.items()))


def f_apply(state: FactoredState, op: GateOp) -> FactoredState:
    return state.copy().apply(op)


def f_measure(state: FactoredState, qubit: int, rng: np.random.Generator) -> tuple[int, FactoredState]:
    out = state.copy()
    return out.measure(qubit, rng), out


def merge(state: FactoredState, qubits: Sequence[int]) -> FactoredState:
    out = state.copy()
    out.merge(qubits)
    return out


def f_simulate(circuit: Circuit, register_limit: int = REGISTER_LIMIT) -> FactoredState:
    return FactoredState(circuit.num_qubits, register_limit).run(circuit)

