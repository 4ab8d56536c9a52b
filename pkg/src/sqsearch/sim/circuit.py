"""Gate set, circuits and their JSON form.

Conventions used throughout the package:

* bitstring character ``i`` (leftmost = 0) is qubit ``i``;
* dense indices are little-endian, qubit 0 is the least significant bit;
* ``RY(theta)`` is the full-angle rotation ``[[cos, -sin], [sin, cos]]``;
* for a multi-target ``u`` gate the first listed target is the most
  significant factor of the matrix (``kron(first, second)`` ordering).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ..errors import InvalidGate, NonUnitaryError

UNITARY_TOL = 1e-9

SQRT1_2 = 1.0 / math.sqrt(2.0)

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) * SQRT1_2

FIXED_KINDS = {"i": I2, "x": X, "z": Z, "h": H}
KINDS = ("i", "x", "z", "h", "ry", "u")


def ry_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def bits_to_index(bits: str) -> int:
    return sum(1 << i for i, ch in enumerate(bits) if ch == "1")


def index_to_bits(index: int, num_qubits: int) -> str:
    return "".join("1" if (index >> i) & 1 else "0" for i in range(num_qubits))


def check_bitstring(bits: str, length: int | None = None) -> str:
    if not bits or any(ch not in "01" for ch in bits):
        raise ValueError(f"not a bitstring: {bits!r}")
    if length is not None and len(bits) != length:
        raise ValueError(f"bitstring {bits!r} has length {len(bits)}, expected {length}")
    return bits


def is_unitary(matrix: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))) < tol


@dataclass(frozen=True)
class GateOp:
    """One gate application: ``kind`` on ``targets`` when every control
    qubit holds its required bit."""

    kind: str
    targets: tuple[int, ...]
    controls: tuple[tuple[int, int], ...] = ()
    angle: float | None = None
    matrix: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidGate(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        object.__setattr__(self, "controls", tuple((int(q), int(v)) for q, v in self.controls))
        if not self.targets:
            raise InvalidGate("gate needs at least one target")
        if len(set(self.targets)) != len(self.targets):
            raise InvalidGate(f"repeated target in {self.targets}")
        cq = [q for q, _ in self.controls]
        if len(set(cq)) != len(cq):
            raise InvalidGate(f"repeated control qubit in {self.controls}")
        if set(cq) & set(self.targets):
            raise InvalidGate("targets and controls must be disjoint")
        if any(v not in (0, 1) for _, v in self.controls):
            raise InvalidGate("control values must be 0 or 1")
        if any(q < 0 for q in (*self.targets, *cq)):
            raise InvalidGate("negative qubit index")
        if self.kind == "u":
            if self.matrix is None:
                raise InvalidGate("'u' gate needs a matrix")
            m = np.array(self.matrix, dtype=complex)
            d = 1 << len(self.targets)
            if m.shape != (d, d) or d not in (2, 4):
                raise InvalidGate(f"'u' matrix shape {m.shape} does not fit {len(self.targets)} target(s)")
            if not is_unitary(m):
                raise NonUnitaryError("'u' matrix is not unitary within 1e-9")
            m.setflags(write=False)
            object.__setattr__(self, "matrix", m)
        else:
            if len(self.targets) != 1:
                raise InvalidGate(f"'{self.kind}' acts on exactly one target")
            if self.kind == "ry":
                if self.angle is None:
                    raise InvalidGate("'ry' gate needs an angle")
                object.__setattr__(self, "angle", float(self.angle))
            elif self.angle is not None:
                raise InvalidGate(f"'{self.kind}' takes no angle")

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.targets + tuple(q for q, _ in self.controls)

    def unitary(self) -> np.ndarray:
        """Matrix acting on the targets (controls excluded)."""
        if self.kind == "ry":
            return ry_matrix(self.angle)
        if self.kind == "u":
            return self.matrix
        return FIXED_KINDS[self.kind]

    def __eq__(self, other):
        if not isinstance(other, GateOp):
            return NotImplemented
        if (self.kind, self.targets, self.controls, self.angle) != (
            other.kind, other.targets, other.controls, other.angle
        ):
            return False
        if self.kind == "u":
            return bool(np.array_equal(self.matrix, other.matrix))
        return True

    def __hash__(self):
        return hash((self.kind, self.targets, self.controls, self.angle))

    def to_dict(self) -> dict:
        d = {
            "kind": self.kind,
            "targets": list(self.targets),
            "controls": [{"qubit": q, "value": v} for q, v in self.controls],
        }
        if self.kind == "ry":
            d["angle"] = self.angle
        if self.kind == "u":
            d["matrix"] = [[float(z.real), float(z.imag)] for z in self.matrix.ravel()]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GateOp":
        kind = d["kind"]
        controls = [(c["qubit"], c["value"]) for c in d.get("controls", [])]
        matrix = None
        if "matrix" in d:
            flat = [complex(re, im) for re, im in d["matrix"]]
            dim = math.isqrt(len(flat))
            if dim * dim != len(flat):
                raise InvalidGate("'u' matrix must have d*d entries")
            matrix = np.array(flat, dtype=complex).reshape(dim, dim)
        return cls(kind, tuple(d["targets"]), tuple(controls), d.get("angle"), matrix)


# Convenience constructors. ``controls`` accepts (qubit, bit) pairs.

def i(q: int) -> GateOp:
    return GateOp("i", (q,))


def x(q: int, controls: Iterable[tuple[int, int]] = ()) -> GateOp:
    return GateOp("x", (q,), tuple(controls))


def z(q: int, controls: Iterable[tuple[int, int]] = ()) -> GateOp:
    return GateOp("z", (q,), tuple(controls))


def h(q: int, controls: Iterable[tuple[int, int]] = ()) -> GateOp:
    return GateOp("h", (q,), tuple(controls))


def ry(q: int, angle: float, controls: Iterable[tuple[int, int]] = ()) -> GateOp:
    return GateOp("ry", (q,), tuple(controls), angle=angle)


def unitary(targets: Sequence[int], matrix, controls: Iterable[tuple[int, int]] = ()) -> GateOp:
    return GateOp("u", tuple(targets), tuple(controls), matrix=np.asarray(matrix, dtype=complex))


@dataclass
class Circuit:
    num_qubits: int
    ops: list[GateOp] = field(default_factory=list)

    def __post_init__(self):
        if self.num_qubits < 1:
            raise InvalidGate("circuit needs at least one qubit")
        self.ops = list(self.ops)
        for op in self.ops:
            self._check(op)

    def _check(self, op: GateOp) -> None:
        bad = [q for q in op.qubits if q >= self.num_qubits]
        if bad:
            raise InvalidGate(f"qubit(s) {bad} out of range for {self.num_qubits}-qubit circuit")

    def append(self, op: GateOp) -> "Circuit":
        self._check(op)
        self.ops.append(op)
        return self

    def extend(self, ops: Iterable[GateOp]) -> "Circuit":
        for op in ops:
            self.append(op)
        return self

    def copy(self) -> "Circuit":
        return Circuit(self.num_qubits, list(self.ops))

    def __len__(self):
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)

    def to_dict(self) -> dict:
        return {"num_qubits": self.num_qubits, "ops": [op.to_dict() for op in self.ops]}

    @classmethod
    def from_dict(cls, d: dict) -> "Circuit":
        return cls(int(d["num_qubits"]), [GateOp.from_dict(o) for o in d["ops"]])

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        return cls.from_dict(json.loads(text))


def lower_zero_controls(circuit: Circuit) -> Circuit:
    """Rewrite every 0-valued control as X-conjugation around a 1-valued one.

    The result uses only all-ones controls, the form in which multi-controlled
    gates are usually drawn.
    """
    out = Circuit(circuit.num_qubits)
    for op in circuit.ops:
        zeros = [q for q, v in op.controls if v == 0]
        if not zeros:
            out.append(op)
            continue
        flips = [x(q) for q in zeros]
        lifted = GateOp(op.kind, op.targets, tuple((q, 1) for q, _ in op.controls), op.angle, op.matrix)
        out.extend(flips).append(lifted).extend(flips)
    return out
