import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sqsearch.errors import CapacityError, InvalidCollapse, InvalidGate, NonUnitaryError
from sqsearch.sim import (
    Circuit,
    GateOp,
    StateVector,
    apply,
    bits_to_index,
    h,
    index_to_bits,
    init_state,
    is_unitary,
    lower_zero_controls,
    measure,
    prob_of_bit,
    ry,
    ry_matrix,
    sample_counts,
    simulate,
    unitary,
    x,
    z,
)
from sqsearch.sim.circuit import FIXED_KINDS

S = 1 / math.sqrt(2)


def test_init_state_ground():
    assert np.array_equal(init_state(1).amps, [1, 0])
    assert np.array_equal(init_state(2).amps, [1, 0, 0, 0])


def test_init_state_over_dense_limit():
    with pytest.raises(CapacityError, match="factored"):
        init_state(27)


def test_bit_order_convention():
    # character i is qubit i, qubit 0 is the least significant index bit
    assert bits_to_index("10") == 1
    assert bits_to_index("01") == 2
    assert index_to_bits(6, 3) == "011"
    s = init_state(3).apply(x(0))
    assert s.distribution() == {"100": 1.0}


def test_hadamard_on_zero():
    s = apply(init_state(1), h(0))
    assert np.allclose(s.amps, [S, S], atol=1e-12)


def test_apply_returns_copy():
    s0 = init_state(1)
    apply(s0, h(0))
    assert np.array_equal(s0.amps, [1, 0])


def test_mcz_on_11():
    s = init_state(2).apply(x(0)).apply(x(1))
    s.apply(z(1, [(0, 1)]))
    assert np.allclose(s.amps, [0, 0, 0, -1])


def test_pop_101_from_uniform():
    # (I x X x I) . MCH_3 . (I x X x I) on H^3|000>
    c = Circuit(3, [h(0), h(1), h(2), x(1), h(2, [(0, 1), (1, 1)]), x(1)])
    d = simulate(c).distribution()
    assert "101" not in d
    assert d["100"] == pytest.approx(2 / 8, abs=1e-12)
    assert all(d[b] == pytest.approx(1 / 8, abs=1e-12) for b in d if b != "100")


def test_zero_control_matches_x_conjugation():
    native = Circuit(3, [h(0), h(1), h(2), h(2, [(0, 1), (1, 0)])])
    lowered = lower_zero_controls(native)
    assert [op.kind for op in lowered.ops][3:] == ["x", "h", "x"]
    assert lowered.ops[4].controls == ((0, 1), (1, 1))
    assert np.allclose(simulate(native).amps, simulate(lowered).amps, atol=1e-12)


def test_controls_unmet_act_as_identity():
    s = init_state(2).apply(h(1, [(0, 1)]))
    assert np.array_equal(s.amps, [1, 0, 0, 0])


def test_ry_full_angle_convention():
    m = ry_matrix(math.pi / 2)
    assert np.allclose(m @ [1, 0], [0, 1])
    s = init_state(1).apply(ry(0, math.pi / 4))
    assert np.allclose(s.amps, [S, S])


def test_builtin_gates_unitary():
    mats = list(FIXED_KINDS.values()) + [ry_matrix(t) for t in np.linspace(-7, 7, 29)]
    for m in mats:
        assert np.max(np.abs(m.conj().T @ m - np.eye(2))) < 1e-9


def test_non_unitary_rejected():
    with pytest.raises(NonUnitaryError):
        unitary((0,), [[1, 1], [0, 1]])


def test_gate_validation():
    with pytest.raises(InvalidGate):
        GateOp("h", (0,), ((0, 1),))
    with pytest.raises(InvalidGate):
        GateOp("ry", (0,))
    with pytest.raises(InvalidGate):
        Circuit(2, [h(2)])
    with pytest.raises(InvalidGate):
        init_state(2).apply(h(3))


def test_measure_deterministic_one(rng):
    s = init_state(1).apply(x(0))
    bit, post = measure(s, 0, rng)
    assert bit == 1 and np.allclose(post.amps, [0, 1])


def test_measure_frequency_plus_state():
    counts = [0, 0]
    shots = 10_000
    for seed in range(shots):
        bit, _ = measure(init_state(1).apply(h(0)), 0, np.random.default_rng(seed))
        counts[bit] += 1
    sigma = math.sqrt(shots * 0.25)
    assert abs(counts[1] - shots / 2) < 3 * sigma


def test_measure_collapses_and_renormalises(rng):
    s = simulate(Circuit(2, [h(0), h(1, [(0, 1)])]))
    bit, post = measure(s, 0, rng)
    assert abs(post.norm() - 1) < 1e-12
    assert post.prob_of_bit(0, bit) == pytest.approx(1.0)


def test_collapse_onto_impossible_branch():
    with pytest.raises(InvalidCollapse):
        init_state(1).collapse(0, 1)


def test_prob_of_bit_examples():
    assert prob_of_bit(init_state(1), 0, 1) == 0
    assert prob_of_bit(init_state(1).apply(h(0)), 0, 1) == pytest.approx(0.5, abs=1e-12)


def test_prob_matches_ancilla_marginal_of_fixed_point_state():
    # ancilla (qubit 1) state after one F(pi/4) round on P(pi/4)|0>: P(1) = sin^2(pi/4)
    from sqsearch.fpqs import SubspaceSpec, fixed_point_gate, prep_ops

    spec = SubspaceSpec(0, 1, 1, math.pi / 4)
    s = init_state(2)
    for op in prep_ops(spec):
        s.apply(op)
    s.apply(fixed_point_gate(spec))
    assert s.prob_of_bit(1, 1) == pytest.approx(0.5, abs=1e-12)


def test_sample_counts_basis_state(rng):
    s = init_state(2).apply(x(0))
    assert sample_counts(s, [0, 1], 100, rng) == {"10": 100}


def test_sample_counts_uniform():
    s = simulate(Circuit(4, [h(q) for q in range(4)]))
    counts = sample_counts(s, [0, 1, 2, 3], 16_000, np.random.default_rng(7))
    assert sum(counts.values()) == 16_000 and len(counts) == 16
    sigma = math.sqrt(16_000 * (1 / 16) * (15 / 16))
    assert all(abs(c - 1000) < 3 * sigma for c in counts.values())


def test_sample_counts_reproducible():
    s = simulate(Circuit(3, [h(0), h(1), h(2)]))
    a = sample_counts(s, [0, 1, 2], 500, np.random.default_rng(3))
    b = sample_counts(s, [0, 1, 2], 500, np.random.default_rng(3))
    assert a == b


def test_sample_counts_needs_shots(rng):
    with pytest.raises(ValueError):
        sample_counts(init_state(1), [0], 0, rng)


def random_op(rng, n):
    kind = rng.choice(["x", "z", "h", "ry", "u1", "u2"])
    qubits = list(rng.permutation(n))
    if kind in ("u1", "u2"):
        d = 2 if kind == "u1" else 4
        m = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))[0]
        k = 1 if d == 2 else 2
        targets, rest = qubits[:k], qubits[k:]
        nc = int(rng.integers(0, min(2, len(rest)) + 1))
        return unitary(targets, m, [(q, int(rng.integers(2))) for q in rest[:nc]])
    target, rest = qubits[0], qubits[1:]
    nc = int(rng.integers(0, min(3, len(rest)) + 1))
    ctrl = [(int(q), int(rng.integers(2))) for q in rest[:nc]]
    if kind == "ry":
        return ry(int(target), float(rng.uniform(-math.pi, math.pi)), ctrl)
    return GateOp(str(kind), (int(target),), tuple(ctrl))


def test_norm_preserved_over_many_random_gates():
    rng = np.random.default_rng(99)
    s = init_state(6)
    for _ in range(1000):
        s.apply(random_op(rng, 6))
    assert abs(s.norm() - 1) < 1e-8


def test_circuit_json_round_trip_bit_exact():
    rng = np.random.default_rng(5)
    c = Circuit(5, [random_op(rng, 5) for _ in range(60)])
    text = c.to_json()
    back = Circuit.from_json(text)
    assert back == c
    assert back.to_json() == text


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False))
def test_ry_angle_round_trip(theta):
    c = Circuit(1, [ry(0, theta)])
    assert Circuit.from_json(c.to_json()).ops[0].angle == theta


def test_unitary_check_helper():
    assert is_unitary(np.eye(4))
    assert not is_unitary(np.ones((2, 2)))


def test_statevector_rejects_unnormalised():
    with pytest.raises(ValueError):
        StateVector([1, 1])
