"""Reference searchers (Grover, linear scan) and the query-complexity table."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .encoding import Dataset, encode
from .engine import SearchProblem, run_sqs
from .sim.circuit import Circuit, bits_to_index, check_bitstring, h, index_to_bits
from .sim.dense import simulate

UNIFORM_TOL = 1e-9


def grover_iterations(N: int) -> int:
    """Optimal iteration count for one marked item, rounding halves up."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if N == 1:
        return 0
    angle = math.asin(math.sqrt(1.0 / N))
    # tiny slack so exact halves (N=2) are not lost to rounding of asin
    return math.floor(math.pi / (4 * angle) + 1e-9)


def grover_success(N: int, k: int) -> float:
    angle = math.asin(math.sqrt(1.0 / N))
    return math.sin((2 * k + 1) * angle) ** 2


@dataclass
class GroverResult:
    iterations: int
    success_probability: float
    closed_form: float
    support_size: int
    top_state: str
    top_probability: float


def run_grover(prep: Circuit, target: str) -> GroverResult:
    """Textbook Grover search: phase oracle plus reflection about the prepared state.

    When the target is outside the prepared support the amplitude never moves;
    the result then reports zero success and the most likely state.
    """
    check_bitstring(target, prep.num_qubits)
    psi0 = simulate(prep).amps
    probs = np.abs(psi0) ** 2
    nz = probs[probs > UNIFORM_TOL]
    N = int(nz.size)
    if np.max(np.abs(nz - 1.0 / N)) > UNIFORM_TOL:
        raise ValueError("Grover reference needs an equal superposition over the dataset")
    k = grover_iterations(N)
    t = bits_to_index(target)
    psi = psi0.copy()
    for _ in range(k):
        psi[t] = -psi[t]
        psi = 2 * psi0 * np.vdot(psi0, psi) - psi
    p = np.abs(psi) ** 2
    top = int(np.argmax(p))
    return GroverResult(
        iterations=k,
        success_probability=float(p[t]),
        closed_form=grover_success(N, k) if probs[t] > UNIFORM_TOL else 0.0,
        support_size=N,
        top_state=index_to_bits(top, prep.num_qubits),
        top_probability=float(p[top]),
    )


def run_classical(dataset: Dataset, target: str, rng: np.random.Generator) -> int:
    """Queries a linear scan over a random order needs to hit ``target`` (N when absent)."""
    order = rng.permutation(len(dataset.entries))
    for pos, j in enumerate(order, start=1):
        if dataset.entries[j] == target:
            return pos
    return len(dataset.entries)


def full_superposition(n: int) -> Circuit:
    return Circuit(n, [h(q) for q in range(n)])


def chain_circuit(n: int) -> Circuit:
    """H on qubit 0 then controlled H from each qubit to the next: n rows."""
    c = Circuit(n, [h(0)])
    for q in range(n - 1):
        c.append(h(q + 1, [(q, 1)]))
    return c


def scenario(kind: str, n: int, rng: np.random.Generator) -> tuple[Circuit, str]:
    """Preparation circuit and a present target for a benchmark scenario."""
    if kind == "full":
        return full_superposition(n), "".join(rng.choice(["0", "1"], size=n))
    if kind == "chain":
        return chain_circuit(n), "1" * n
    if kind == "two-row":
        if n < 2:
            raise ValueError("two-row scenario needs n >= 2")
        removed = index_to_bits(int(rng.integers(1 << n)), n)
        rest = [index_to_bits(j, n) for j in range(1 << n)]
        rest = [b for b in rest if b != removed]
        # a target whose prefix still has both tails keeps pi/4 on the tail qubit
        candidates = [b for b in rest if b[:-1] != removed[:-1]]
        target = candidates[int(rng.integers(len(candidates)))]
        return encode(Dataset(n, tuple(rest))), target
    raise ValueError(f"unknown scenario {kind!r}")


@dataclass
class ComplexityRow:
    n: int
    N: int
    classical: int
    grover: int
    sqs: int

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.N, self.classical, self.grover, self.sqs)

    def to_dict(self) -> dict:
        return asdict(self)


def complexity_table(n_values, kind: str = "full", seed: int = 0, backend: str = "auto") -> list[ComplexityRow]:
    """Oracle queries per method; the SQS column is measured by running the search."""
    rng = np.random.default_rng(seed)
    rows = []
    for n in n_values:
        N = 1 << n
        prep, target = scenario(kind, n, rng)
        result = run_sqs(SearchProblem.from_circuit(prep, target, backend=backend), "exact", backend=backend)
        rows.append(ComplexityRow(n, N, N // 2, grover_iterations(N), result.oracle_calls))
    return rows
