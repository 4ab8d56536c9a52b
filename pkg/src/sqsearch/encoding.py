"""Basis encoding of classical datasets into preparation circuits.

The preparation puts all ``n`` qubits in uniform superposition and then
removes every absent entry by acting on the last (tail) qubit only, with the
first ``n - 1`` qubits as controls. A tail value of 1 is removed with a
controlled H (the tail goes from |+> to |0>); a tail value of 0 is removed with
controlled Z followed by controlled H (|+> to |-> to |1>). Either way the
partner entry inherits the removed probability, and the prefix qubits stay
in their product state.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import EncodingError, PartnerConflict
from .sim.circuit import Circuit, GateOp, bits_to_index, check_bitstring, h, index_to_bits, z
from .sim.dense import simulate

SUPPORT_TOL = 1e-12


@dataclass(frozen=True)
class Dataset:
    bit_length: int
    entries: tuple[str, ...]

    def __post_init__(self):
        entries = tuple(self.entries)
        if not entries:
            raise EncodingError("dataset is empty")
        if self.bit_length < 1:
            raise EncodingError("bit_length must be >= 1")
        for e in entries:
            try:
                check_bitstring(e, self.bit_length)
            except ValueError as exc:
                raise EncodingError(str(exc)) from None
        if len(set(entries)) != len(entries):
            dupes = sorted({e for e in entries if entries.count(e) > 1})
            raise EncodingError(f"duplicate entries: {', '.join(dupes)}")
        object.__setattr__(self, "entries", entries)

    def __len__(self):
        return len(self.entries)

    def __contains__(self, bits):
        return bits in set(self.entries)

    def complement(self) -> list[str]:
        """Absent bitstrings in ascending index order."""
        present = {bits_to_index(e) for e in self.entries}
        return [index_to_bits(j, self.bit_length) for j in range(1 << self.bit_length) if j not in present]

    @classmethod
    def from_entries(cls, entries: Iterable[str]) -> "Dataset":
        entries = list(entries)
        if not entries:
            raise EncodingError("dataset is empty")
        return cls(len(entries[0]), tuple(entries))


def basis_map(items: Sequence) -> Dataset:
    """Assign item ``i`` the little-endian binary form of ``i``.

    ``entries[i]`` of the result is the bitstring of ``items[i]``; the first
    ``2**(n-1)`` strings end in 0, later ones in 1.
    """
    count = len(items)
    if count < 1:
        raise EncodingError("need at least one item")
    n = max(1, math.ceil(math.log2(count)))
    return Dataset(n, tuple(index_to_bits(j, n) for j in range(count)))


def read_dataset(path: str | Path) -> Dataset:
    """One bitstring per line; '#' starts a comment; blank lines are skipped."""
    entries = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if any(ch not in "01" for ch in line):
            raise EncodingError(f"{path}:{lineno}: not a bitstring: {line!r}")
        entries.append(line)
    if not entries:
        raise EncodingError(f"{path}: no entries")
    lengths = {len(e) for e in entries}
    if len(lengths) != 1:
        raise EncodingError(f"{path}: mixed bit lengths {sorted(lengths)}")
    return Dataset.from_entries(entries)


def write_dataset(dataset: Dataset, path: str | Path) -> None:
    Path(path).write_text("".join(e + "\n" for e in dataset.entries), encoding="utf-8")


@dataclass(frozen=True)
class Removal:
    bits: str
    prefix_controls: tuple[tuple[int, int], ...]
    tail_op: str  # "MCH" or "MCZ*MCH"

    def ops(self, n: int) -> list[GateOp]:
        tail = n - 1
        if self.tail_op == "MCH":
            return [h(tail, self.prefix_controls)]
        return [z(tail, self.prefix_controls), h(tail, self.prefix_controls)]


@dataclass
class RemovalPlan:
    bit_length: int
    removals: list[Removal] = field(default_factory=list)


def _removal(bits: str) -> Removal:
    n = len(bits)
    controls = tuple((q, int(bits[q])) for q in range(n - 1))
    return Removal(bits, controls, "MCH" if bits[-1] == "1" else "MCZ*MCH")


def partner(bits: str) -> str:
    return bits[:-1] + ("0" if bits[-1] == "1" else "1")


def find_conflicts(missing: Iterable[str]) -> list[tuple[str, str]]:
    by_prefix = defaultdict(list)
    for b in missing:
        by_prefix[b[:-1]].append(b)
    return [tuple(sorted(v)) for v in by_prefix.values() if len(v) > 1]


def plan_removals(dataset: Dataset) -> RemovalPlan:
    missing = dataset.complement()
    conflicts = find_conflicts(missing)
    if conflicts:
        raise PartnerConflict(conflicts)
    return RemovalPlan(dataset.bit_length, [_removal(b) for b in missing])


def encode(dataset: Dataset) -> Circuit:
    plan = plan_removals(dataset)
    n = dataset.bit_length
    circuit = Circuit(n, [h(q) for q in range(n)])
    for rem in plan.removals:
        circuit.extend(rem.ops(n))
    return circuit


def support(circuit: Circuit, tol: float = SUPPORT_TOL) -> dict[str, float]:
    return {b: p for b, p in simulate(circuit).distribution().items() if p > tol}


def pop_state(circuit: Circuit, bits: str) -> Circuit:
    """Append the tail-removal block deleting ``bits`` from the prepared support."""
    check_bitstring(bits, circuit.num_qubits)
    before = support(circuit)
    if bits not in before:
        raise EncodingError(f"{bits} is not in the prepared support")
    if partner(bits) not in before:
        raise PartnerConflict([(min(bits, partner(bits)), max(bits, partner(bits)))])
    out = circuit.copy().extend(_removal(bits).ops(circuit.num_qubits))
    after = support(out)
    if bits in after:
        raise EncodingError(
            f"{bits} survives the removal block; the tail of its prefix is not in uniform superposition"
        )
    return out


def add_state(circuit: Circuit, bits: str) -> Circuit:
    """Append a block that brings ``bits`` into the support next to its partner.

    The partner's tail must be definite; a controlled H (followed by a
    controlled Z when adding a tail-0 entry) returns that tail to |+>, so the
    addition can later be undone with :func:`pop_state`.
    """
    check_bitstring(bits, circuit.num_qubits)
    before = support(circuit)
    if bits in before:
        raise EncodingError(f"{bits} is already in the prepared support")
    if partner(bits) not in before:
        raise EncodingError(f"cannot add {bits}: neither it nor its partner {partner(bits)} is present")
    n = circuit.num_qubits
    controls = tuple((q, int(bits[q])) for q in range(n - 1))
    ops = [h(n - 1, controls)]
    if bits[-1] == "0":
        ops.append(z(n - 1, controls))
    out = circuit.copy().extend(ops)
    after = support(out)
    if set(after) != set(before) | {bits}:
        raise EncodingError(f"adding {bits} did not grow the support by exactly that entry")
    return out


@dataclass
class EncodingReport:
    ok: bool
    missing: list[str]
    unexpected: list[str]
    doubled: list[str]
    probabilities: dict[str, float]

    def summary(self) -> str:
        if self.ok:
            msg = f"ok: support matches {len(self.probabilities)} entries"
            if self.doubled:
                msg += f"; doubled probability on {', '.join(self.doubled)}"
            return msg
        parts = []
        if self.missing:
            parts.append("missing " + ", ".join(self.missing))
        if self.unexpected:
            parts.append("unexpected " + ", ".join(self.unexpected))
        return "mismatch: " + "; ".join(parts)


def verify_encoding(circuit: Circuit, dataset: Dataset, tol: float = 1e-9) -> EncodingReport:
    if circuit.num_qubits != dataset.bit_length:
        raise EncodingError(
            f"circuit has {circuit.num_qubits} qubits but entries have {dataset.bit_length} bits"
        )
    probs = support(circuit)
    expected = set(dataset.entries)
    got = set(probs)
    base = 1.0 / (1 << circuit.num_qubits)
    doubled = sorted(b for b, p in probs.items() if abs(p - 2 * base) < tol)
    return EncodingReport(
        ok=expected == got,
        missing=sorted(expected - got),
        unexpected=sorted(got - expected),
        doubled=doubled,
        probabilities=dict(sorted(probs.items())),
    )
