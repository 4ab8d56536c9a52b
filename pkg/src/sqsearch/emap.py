"""Entanglement maps: rows of data qubits ordered by control dependency.

A qubit sits in row 1 when no controlled gate targets it; otherwise its row
is one past the deepest row among the controls of every gate that targets
it. Rows are listed with ascending qubit indices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from graphlib import CycleError, TopologicalSorter

from .errors import CyclicDependency, EMError, EMValidationError, TemporalDependency
from .sim.circuit import Circuit


@dataclass(frozen=True)
class EntanglementMap:
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(tuple(int(q) for q in r) for r in self.rows))
        flat = [q for r in self.rows for q in r]
        if len(flat) != len(set(flat)):
            raise EMError("a qubit appears in more than one row")
        if any(not r for r in self.rows):
            raise EMError("rows must be non-empty")

    @property
    def num_rows(self) -> int:
        return len(self.rows)

    @property
    def qubits(self) -> list[int]:
        return sorted(q for r in self.rows for q in r)

    def row_of(self, q: int) -> int:
        """1-based row index of qubit ``q``."""
        for r, row in enumerate(self.rows, start=1):
            if q in row:
                return r
        raise KeyError(q)

    def row_sizes(self) -> list[int]:
        return [len(r) for r in self.rows]

    def to_dict(self) -> dict:
        return {"rows": [list(r) for r in self.rows]}

    @classmethod
    def from_dict(cls, d: dict) -> "EntanglementMap":
        return cls(tuple(tuple(r) for r in d["rows"]))

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "EntanglementMap":
        return cls.from_dict(json.loads(text))


def dependencies(circuit: Circuit) -> dict[int, set[int]]:
    """Map each qubit to the union of controls over the controlled gates targeting it."""
    deps: dict[int, set[int]] = {q: set() for q in range(circuit.num_qubits)}
    for pos, op in enumerate(circuit.ops):
        if len(op.targets) != 1:
            raise EMError(f"op {pos}: multi-target '{op.kind}' gate has no control/target structure")
        if op.controls:
            deps[op.targets[0]].update(q for q, _ in op.controls)
    return deps


def _check_temporal(circuit: Circuit) -> None:
    used_as_control: set[int] = set()
    for pos, op in enumerate(circuit.ops):
        if not op.controls:
            continue
        t = op.targets[0]
        if t in used_as_control:
            raise TemporalDependency(f"op {pos}: q{t} is targeted after acting as a control; its row is ambiguous")
        used_as_control.update(q for q, _ in op.controls)


def build(circuit: Circuit) -> EntanglementMap:
    deps = dependencies(circuit)
    try:
        order = list(TopologicalSorter(deps).static_order())
    except CycleError as exc:
        raise CyclicDependency(exc.args[1]) from None
    _check_temporal(circuit)
    row: dict[int, int] = {}
    for q in order:
        row[q] = 1 + max((row[c] for c in deps[q]), default=0)
    depth = max(row.values())
    rows = tuple(tuple(sorted(q for q in row if row[q] == r)) for r in range(1, depth + 1))
    return EntanglementMap(rows)


def cumulative_size(em: EntanglementMap, r: int) -> int:
    """Number of qubits in rows strictly before row ``r`` (1-based)."""
    if not 1 <= r <= em.num_rows + 1:
        raise ValueError(f"row {r} outside 1..{em.num_rows + 1}")
    return sum(em.row_sizes()[: r - 1])


def misplaced(em: EntanglementMap, circuit: Circuit) -> dict[int, tuple[int | None, int | None]]:
    """Qubits whose row in ``em`` differs from the derived map, as ``{q: (given, expected)}``."""
    ref = build(circuit)
    out = {}
    for q in range(circuit.num_qubits):
        got = em.row_of(q) if q in em.qubits else None
        want = ref.row_of(q)
        if got != want:
            out[q] = (got, want)
    for q in em.qubits:
        if q >= circuit.num_qubits:
            out[q] = (em.row_of(q), None)
    return out


def validate(em: EntanglementMap, circuit: Circuit, strict: bool = False) -> bool:
    """True when ``em`` is exactly the map derived from ``circuit``.

    With ``strict`` a mismatch raises :class:`EMValidationError` carrying the
    misplaced qubits instead of returning False.
    """
    diff = misplaced(em, circuit)
    if diff and strict:
        raise EMValidationError(diff)
    return not diff
