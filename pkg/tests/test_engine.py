import math

import numpy as np
import pytest

from sqsearch.emap import EntanglementMap, build
from sqsearch.encoding import Dataset, encode
from sqsearch.engine import (
    PreparationSpec,
    QueryLedger,
    SearchProblem,
    _search_once,
    build_m_op,
    derive_gammas,
    run_sqs,
    search,
    snap_angle,
)
from sqsearch.errors import ContractViolation, EMValidationError, UnsupportedAngle
from sqsearch.fpqs import HALF, QUARTER
from sqsearch.reference import chain_circuit, full_superposition
from sqsearch.sim import Circuit, StateVector, h, ry, simulate, x
from sqsearch.sim.circuit import index_to_bits

from test_encoding import random_conflict_free


def entry_mass(dataset: Dataset) -> dict[str, float]:
    """Probability of each entry under tail-removal encoding, from set membership alone."""
    n = dataset.bit_length
    present = set(dataset.entries)
    flip = {"0": "1", "1": "0"}
    return {e: (2 if e[:-1] + flip[e[-1]] not in present else 1) / 2 ** n for e in present}


def tail_gamma_oracle(dataset: Dataset, target: str) -> float:
    mass = entry_mass(dataset)
    prefix = target[:-1]
    total = mass.get(prefix + "0", 0) + mass.get(prefix + "1", 0)
    return math.asin(math.sqrt(mass.get(target, 0) / total))


def test_uniform_all_quarter():
    for target in ("0000", "1010", "1111"):
        specs = derive_gammas(full_superposition(4), build(full_superposition(4)), target)
        assert all(s.gamma == QUARTER and s.row == 1 for s in specs.values())


@pytest.mark.parametrize("target,want", [("1010", QUARTER), ("1100", HALF), ("1101", 0.0), ("0001", QUARTER)])
def test_d_prime_tail_gamma(d_prime, target, want):
    prep = encode(d_prime)
    specs = derive_gammas(prep, build(prep), target)
    assert [specs[q].gamma for q in range(3)] == [QUARTER] * 3
    assert specs[3].row == 2
    assert specs[3].gamma == pytest.approx(tail_gamma_oracle(d_prime, target), abs=1e-12)
    assert specs[3].gamma == want


def test_pinned_qubit_half():
    prep = Circuit(2, [h(0), x(1)])
    specs = derive_gammas(prep, build(prep), "01")
    assert specs[1].gamma == HALF and specs[0].gamma == QUARTER


def test_unsupported_angle():
    prep = Circuit(1, [ry(0, 0.3)])
    with pytest.raises(UnsupportedAngle):
        derive_gammas(prep, build(prep), "1")
    assert snap_angle(QUARTER + 1e-8, 0) == QUARTER


def test_theta_alpha_split(d_prime):
    prep = encode(d_prime)
    spec = derive_gammas(prep, build(prep), "1100")[3]
    # unconditioned tail marginal P(0) = 9/16
    assert spec.theta == pytest.approx(math.asin(math.sqrt(9 / 16)))
    assert spec.theta + spec.alpha == pytest.approx(HALF)
    with pytest.raises(ValueError):
        PreparationSpec(0, 1, 1, 0.1, 0.1, 0.5)


def locked_prefix_state(prefix, n):
    s = StateVector.zero(n)
    for q, b in prefix:
        if b:
            s.apply(x(q))
    return s


@pytest.mark.parametrize("gamma,theta", [(QUARTER, 0.2), (HALF, 1.0), (QUARTER, QUARTER), (0.0, -0.4)])
@pytest.mark.parametrize("bit", [0, 1])
def test_build_m_op_equivalence(gamma, theta, bit):
    prefix = [(0, 1), (1, 0), (2, 1)]
    spec = PreparationSpec(3, 2, bit, theta, gamma - theta, gamma, beta_table={"000": 0.7, "111": -0.2})
    s = locked_prefix_state(prefix, 4)
    for op in build_m_op(spec, prefix, s):
        s.apply(op)
    ref = locked_prefix_state(prefix, 4).apply(ry(3, gamma))
    if not bit:
        ref.apply(x(3))
    assert np.max(np.abs(s.amps - ref.amps)) < 1e-12


def test_build_m_op_alpha_zero_is_bare_rotation():
    spec = PreparationSpec(1, 2, 1, QUARTER, 0.0, QUARTER)
    ops = build_m_op(spec, [(0, 1)])
    assert len(ops) == 1 and ops[0].kind == "ry" and not ops[0].controls


def test_build_m_op_needs_lock():
    s = StateVector.zero(2).apply(h(0))
    spec = PreparationSpec(1, 2, 1, QUARTER, 0.0, QUARTER)
    with pytest.raises(ContractViolation):
        build_m_op(spec, [(0, 1)], s)


def test_build_m_op_rejects_solution_prefix_in_beta():
    spec = PreparationSpec(1, 2, 1, QUARTER, 0.0, QUARTER, beta_table={"1": 0.3})
    with pytest.raises(ValueError):
        build_m_op(spec, [(0, 1)])


def test_uniform_search_1010():
    r = search(full_superposition(4), "1010")
    assert r.found and r.probability == pytest.approx(1.0, abs=1e-9)
    assert r.oracle_calls == 2 and r.data_bits == "1010" and r.terminated_row is None


def test_d_prime_searches(d_prime):
    prep = encode(d_prime)
    r = search(prep, "1010")
    assert r.found and r.probability == pytest.approx(1.0, abs=1e-9) and r.oracle_calls == 4
    r = search(prep, "1101")
    assert not r.found and r.probability < 1e-9
    assert r.ancilla_bits == [1, 1, 1, 0] and r.terminated_row == 2
    r = search(prep, "1100")
    assert r.found and r.oracle_calls == 3


def test_search_stops_at_absent_row():
    prep = chain_circuit(4)
    r = search(prep, "0110")
    # qubit 1 can only be 1 after qubit 0 is 1, so row 2 is absent and rows 3-4 never run
    assert not r.found and r.terminated_row == 2 and r.oracle_calls == 4


def test_lock_preservation(d_prime):
    prep = encode(d_prime)
    problem = SearchProblem.from_circuit(prep, "0110")
    rec, state = _search_once(problem, "exact", None, "dense")
    assert rec.found
    for q, b in enumerate("0110"):
        assert state.prob_of_bit(q, int(b)) == pytest.approx(1.0, abs=1e-9)


def test_exact_mode_deterministic(d_prime):
    prep = encode(d_prime)
    a = run_sqs(SearchProblem.from_circuit(prep, "0011")).to_dict()
    b = run_sqs(SearchProblem.from_circuit(prep, "0011")).to_dict()
    assert a == b


def test_sampled_mode(d_prime):
    prep = encode(d_prime)
    problem = SearchProblem.from_circuit(prep, "1010")
    r = run_sqs(problem, "sampled", shots=50, seed=3)
    assert r.found and r.probability == 1.0
    assert r.counts == {"10101111": 50}
    assert r.to_dict() == run_sqs(problem, "sampled", shots=50, seed=3).to_dict()
    miss = run_sqs(SearchProblem.from_circuit(prep, "1101"), "sampled", shots=20, seed=1)
    assert not miss.found and miss.probability == 0.0 and miss.ancilla_bits[3] == 0


def test_sampled_needs_shots():
    with pytest.raises(ValueError):
        run_sqs(SearchProblem.from_circuit(full_superposition(2), "01"), "sampled", shots=0)


def test_factored_matches_dense(d_prime):
    prep = encode(d_prime)
    for target in ("1010", "1101", "1100"):
        d = search(prep, target, backend="dense").to_dict()
        f = search(prep, target, backend="factored").to_dict()
        assert d["found"] == f["found"] and d["oracle_calls"] == f["oracle_calls"]
        assert d["probability"] == pytest.approx(f["probability"], abs=1e-12)


def test_given_em_must_match():
    prep = chain_circuit(3)
    with pytest.raises(EMValidationError):
        SearchProblem.from_circuit(prep, "111", em=EntanglementMap(((0, 1, 2),)))


@pytest.mark.parametrize("seed", range(20))
def test_call_bound(seed):
    rng = np.random.default_rng(500 + seed)
    n = int(rng.integers(2, 6))
    ds = random_conflict_free(rng, n)
    prep = encode(ds)
    for target in ds.entries:
        problem = SearchProblem.from_circuit(prep, target)
        r = run_sqs(problem)
        assert r.found
        l = problem.em.num_rows
        assert r.oracle_calls <= 2 * l
        if all(s.gamma == QUARTER for s in problem.specs.values()):
            assert r.oracle_calls == 2 * l


def test_ledger_merge():
    a, b = QueryLedger(2, 5, 3), QueryLedger(4, 1, 1)
    m = a.merge(b)
    assert (m.calls, m.oracle_applications, m.preparation_ops) == (4, 6, 4)


def test_result_json_keys():
    d = search(full_superposition(2), "10").to_dict()
    for key in ("found", "oracle_calls", "terminated_row", "ancillas", "counts", "seed", "mode"):
        assert key in d
