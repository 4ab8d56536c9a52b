"""Row-by-row structured search over an entanglement map.

Data qubit ``q`` of an ``n``-qubit preparation is paired with ancilla
``n + q``. Rows are searched in map order: row-1 qubits are prepared with a
plain rotation, later rows with a rotation controlled on the already locked
qubits, then every pair of the row goes through the fixed-point protocol in
parallel. The search stops at the first row with a qubit that fails to
converge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import emap as emap_mod
from .emap import EntanglementMap
from .errors import ContractViolation, UnsupportedAngle
from .fpqs import ALLOWED_ANGLES, FixedPointOutcome, SubspaceSpec, fpqs_row, prep_ops
from .sim import make_state
from .sim.circuit import Circuit, GateOp, check_bitstring, ry, x

SNAP_TOL = 1e-6
LOCK_TOL = 1e-9


@dataclass
class PreparationSpec:
    """Preparation angles of one data qubit.

    ``theta`` is the unconditioned single-qubit angle, ``alpha`` the extra
    rotation applied when every earlier-row qubit holds its solution bit, and
    ``beta_table`` optional rotations for other prefix values (keyed by the
    prefix bitstring over the locked qubits, in locking order).
    """

    qubit: int
    row: int
    solution_bit: int
    theta: float
    alpha: float
    gamma: float
    beta_table: dict[str, float] = field(default_factory=dict)
    reachable: bool = True

    def __post_init__(self):
        if abs(self.theta + self.alpha - self.gamma) > 1e-12:
            raise ValueError("gamma must equal theta + alpha")


def _angle(p: float) -> float:
    return math.asin(math.sqrt(min(1.0, max(0.0, p))))


def snap_angle(raw: float, qubit: int) -> float:
    for a in ALLOWED_ANGLES:
        if abs(raw - a) < SNAP_TOL:
            return a
    raise UnsupportedAngle(qubit, raw)


def derive_gammas(prep: Circuit, em: EntanglementMap, target: str, backend: str = "auto",
                  state=None) -> dict[int, PreparationSpec]:
    """Read each qubit's preparation angle off the simulated preparation state.

    Row-1 angles come from single-qubit marginals; a later-row qubit uses its
    probability of holding the solution bit given that every earlier-row
    qubit holds its own. Angles are snapped to {0, pi/4, pi/2}. Rows after
    one containing a zero-probability solution bit are never reached by the
    search and are marked unreachable.
    """
    check_bitstring(target, prep.num_qubits)
    if state is None:
        state = make_state(prep.num_qubits, backend).run(prep)
    bit = {q: int(target[q]) for q in range(prep.num_qubits)}
    cond = state.copy()
    specs: dict[int, PreparationSpec] = {}
    reachable = True
    for r, row in enumerate(em.rows, start=1):
        if not reachable:
            for q in row:
                specs[q] = PreparationSpec(q, r, bit[q], 0.0, 0.0, 0.0, reachable=False)
            continue
        marg = {q: cond.prob_of_bit(q, bit[q]) for q in row}
        for q in row:
            gamma = snap_angle(_angle(marg[q]), q)
            theta = gamma if r == 1 else _angle(state.prob_of_bit(q, bit[q]))
            specs[q] = PreparationSpec(q, r, bit[q], theta, gamma - theta, gamma)
            if gamma == 0.0:
                reachable = False
        if not reachable:
            continue
        joint = 1.0
        for q in row:
            joint *= cond.collapse(q, bit[q])
        product = math.prod(marg.values())
        if abs(joint - product) > 1e-9:
            raise ContractViolation(
                f"row {r} qubits {list(row)} are not inter-separable under the preparation "
                f"(joint {joint:.6g} vs product {product:.6g})"
            )
    return specs


def build_m_op(spec: PreparationSpec, prefix: list[tuple[int, int]], state=None) -> list[GateOp]:
    """Preparation of a later-row qubit given the locked ``prefix`` (qubit, bit) pairs.

    On the locked branch the sequence reduces to ``RY(theta + alpha)``
    followed by the basis op, i.e. ``cos g |R> + sin g |S>``.
    """
    if state is not None:
        for q, b in prefix:
            if state.prob_of_bit(q, b) < 1.0 - LOCK_TOL:
                raise ContractViolation(f"prefix qubit {q} is not locked to {b}")
    q = spec.qubit
    ops = [ry(q, spec.theta)] if spec.theta != 0.0 else []
    if spec.alpha != 0.0:
        ops.append(ry(q, spec.alpha, prefix))
    for bits, beta in sorted(spec.beta_table.items()):
        if len(bits) != len(prefix):
            raise ValueError(f"beta key {bits!r} does not match a {len(prefix)}-qubit prefix")
        ctrl = [(pq, int(ch)) for (pq, _), ch in zip(prefix, bits)]
        if [v for _, v in ctrl] == [b for _, b in prefix]:
            raise ValueError("beta table may not contain the solution prefix")
        if beta != 0.0:
            ops.append(ry(q, beta, ctrl))
    if not spec.solution_bit:
        ops.append(x(q))
    return ops


@dataclass
class SearchProblem:
    prep: Circuit
    em: EntanglementMap
    target: str
    specs: dict[int, PreparationSpec]

    @classmethod
    def from_circuit(cls, prep: Circuit, target: str, em: EntanglementMap | None = None,
                     backend: str = "auto", state=None) -> "SearchProblem":
        if em is None:
            em = emap_mod.build(prep)
        else:
            emap_mod.validate(em, prep, strict=True)
        return cls(prep, em, target, derive_gammas(prep, em, target, backend, state))

    @property
    def num_data(self) -> int:
        return self.prep.num_qubits

    def subspace_spec(self, q: int) -> SubspaceSpec:
        p = self.specs[q]
        return SubspaceSpec(q, self.num_data + q, p.solution_bit, p.gamma)


@dataclass
class QueryLedger:
    """Oracle usage. One row-wide round of F counts as one call."""

    calls: int = 0
    oracle_applications: int = 0
    preparation_ops: int = 0

    def record_round(self, calls: int, applications: int) -> None:
        self.calls += calls
        self.oracle_applications += applications

    def merge(self, other: "QueryLedger") -> "QueryLedger":
        return QueryLedger(
            max(self.calls, other.calls),
            self.oracle_applications + other.oracle_applications,
            self.preparation_ops + other.preparation_ops,
        )


@dataclass
class ShotRecord:
    found: bool
    probability: float
    ancilla_bits: list[int]
    data_bits: str
    terminated_row: int | None
    ledger: QueryLedger
    outcomes: dict[int, FixedPointOutcome]


@dataclass
class SearchResult:
    found: bool
    probability: float
    ancilla_bits: list[int]
    data_bits: str
    oracle_calls: int
    terminated_row: int | None
    mode: str
    seed: int | None
    ledger: QueryLedger
    counts: dict[str, int] | None = None
    shots: list[ShotRecord] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "found": self.found,
            "oracle_calls": self.oracle_calls,
            "terminated_row": self.terminated_row,
            "ancillas": list(self.ancilla_bits),
            "counts": dict(self.counts or {}),
            "seed": self.seed,
            "mode": self.mode,
            "probability": self.probability,
            "data_bits": self.data_bits,
            "oracle_applications": self.ledger.oracle_applications,
            "preparation_ops": self.ledger.preparation_ops,
        }


def _search_once(problem: SearchProblem, mode: str, rng, backend: str):
    n = problem.num_data
    state = make_state(2 * n, backend)
    ledger = QueryLedger()
    locked: list[tuple[int, int]] = []
    outcomes: dict[int, FixedPointOutcome] = {}
    probability = 1.0
    terminated = None
    for r, row in enumerate(problem.em.rows, start=1):
        specs = []
        for q in row:
            pspec = problem.specs[q]
            sspec = problem.subspace_spec(q)
            ops = prep_ops(sspec) if r == 1 else build_m_op(pspec, locked, state)
            for op in ops:
                state.apply(op)
            ledger.preparation_ops += len(ops)
            specs.append(sspec)
        row_out, calls = fpqs_row(state, specs, rng, mode)
        ledger.record_round(calls, sum(o.iterations_used for o in row_out))
        for q, o in zip(row, row_out):
            outcomes[q] = o
            probability *= o.success_probability
        if not all(o.converged for o in row_out):
            terminated = r
            break
        locked.extend((q, problem.specs[q].solution_bit) for q in row)
    ancillas = [1 if q in outcomes and outcomes[q].converged else 0 for q in range(n)]
    if mode == "sampled":
        data = "".join(str(state.measure(q, rng)) for q in range(n))
    else:
        data = "".join("1" if state.prob_of_bit(q, 1) >= 0.5 else "0" for q in range(n))
    found = terminated is None and all(ancillas)
    return ShotRecord(found, probability if found or mode == "exact" else 0.0, ancillas, data,
                      terminated, ledger, outcomes), state


def run_sqs(problem: SearchProblem, mode: str = "exact", shots: int = 1, seed: int = 0,
            backend: str = "auto", keep_shots: bool = False) -> SearchResult:
    """Run the structured search.

    ``exact`` follows the deterministic branch once and reports the
    closed-form probability of finding the target. ``sampled`` repeats the
    protocol ``shots`` times with independent child seeds of ``seed`` and
    histograms the final data+ancilla readout (data bits first).
    """
    if mode == "exact":
        rec, _ = _search_once(problem, "exact", None, backend)
        return SearchResult(rec.found, rec.probability, rec.ancilla_bits, rec.data_bits,
                            rec.ledger.calls, rec.terminated_row, "exact", seed, rec.ledger,
                            shots=[rec] if keep_shots else [])
    if mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")
    if shots < 1:
        raise ValueError("shots must be >= 1")
    records = []
    counts: dict[str, int] = {}
    ledger = QueryLedger()
    for child in np.random.SeedSequence(seed).spawn(shots):
        rec, _ = _search_once(problem, "sampled", np.random.default_rng(child), backend)
        key = rec.data_bits + "".join(map(str, rec.ancilla_bits))
        counts[key] = counts.get(key, 0) + 1
        ledger = ledger.merge(rec.ledger)
        records.append(rec)
    found_shots = sum(r.found for r in records)
    n = problem.num_data
    majority = [int(sum(r.ancilla_bits[q] for r in records) * 2 > shots) for q in range(n)]
    terminated = [r.terminated_row for r in records if r.terminated_row is not None]
    top = max(counts, key=counts.get)
    return SearchResult(
        found=found_shots == shots,
        probability=found_shots / shots,
        ancilla_bits=majority,
        data_bits=top[:n],
        oracle_calls=ledger.calls,
        terminated_row=min(terminated) if terminated else None,
        mode="sampled",
        seed=seed,
        ledger=ledger,
        counts=dict(sorted(counts.items())),
        shots=records if keep_shots else [],
    )


def search(prep: Circuit, target: str, mode: str = "exact", shots: int = 1, seed: int = 0,
           backend: str = "auto") -> SearchResult:
    return run_sqs(SearchProblem.from_circuit(prep, target, backend=backend), mode, shots, seed, backend)
