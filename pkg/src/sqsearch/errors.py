"""Exception hierarchy shared across the package."""

from __future__ import annotations


class SQSError(Exception):
    """Base class for all library errors."""


class CapacityError(SQSError):
    """A state would exceed the configured qubit limit of its backend."""


class NonUnitaryError(SQSError, ValueError):
    pass


class InvalidCollapse(SQSError):
    """Collapse onto a measurement branch with zero probability."""


class InvalidGate(SQSError, ValueError):
    pass


class EncodingError(SQSError, ValueError):
    pass


class PartnerConflict(EncodingError):
    """Both tail values of a prefix are in the complement; Algorithm-style
    tail removal cannot delete them together."""

    def __init__(self, pairs):
        self.pairs = sorted(pairs)
        listed = ", ".join(f"{a}/{b}" for a, b in self.pairs)
        super().__init__(f"partner conflict, cannot remove both of: {listed}")


class EMError(SQSError, ValueError):
    pass


class CyclicDependency(EMError):
    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("cyclic control dependency: " + " -> ".join(f"q{q}" for q in self.cycle))


class TemporalDependency(EMError):
    """A qubit is targeted by a controlled gate after it already acted as a control."""


class EMValidationError(EMError):
    def __init__(self, misplaced, message=None):
        self.misplaced = dict(misplaced)
        if message is None:
            parts = [f"q{q}: row {got} (expected {want})" for q, (got, want) in sorted(self.misplaced.items())]
            message = "entanglement map mismatch: " + "; ".join(parts)
        super().__init__(message)


class UnsupportedAngle(SQSError):
    """A derived preparation angle is outside {0, pi/4, pi/2}."""

    def __init__(self, qubit, angle):
        self.qubit = qubit
        self.angle = angle
        super().__init__(f"qubit {qubit}: preparation angle {angle:.9f} rad is not one of 0, pi/4, pi/2")


class ContractViolation(SQSError):
    """A precondition of the search protocol does not hold for the given state."""


class ConstructionError(SQSError):
    """An internally built circuit does not match its reference matrix."""
