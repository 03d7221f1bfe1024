import numpy as np
import pytest

from vqapde.core_sim import (
    CNOT,
    CZ,
    H,
    MCX,
    MCZ,
    TOFFOLI,
    X,
    Z,
    Circuit,
    GateOp,
    Statevector,
    ancilla_expectation,
    apply,
    circuit_to_matrix,
    controlled,
    formal_matrix,
    is_unitary,
    op,
    run,
    run_array,
    ry,
    rz,
)


def test_x_on_qubit0_flips_least_significant_bit():
    s = run(Circuit(2).add(X, 0))
    assert np.allclose(s.amplitudes, [0, 1, 0, 0])


def test_cnot_little_endian():
    # control q0, target q1: |01> (index 1) -> |11> (index 3)
    c = Circuit(2).add(X, 0).add(CNOT, 1, 0)
    assert np.allclose(run(c).amplitudes, [0, 0, 0, 1])


def test_hadamard_superposition_and_norm():
    s = run(Circuit(1).add(H, 0))
    assert np.allclose(s.amplitudes, [1 / np.sqrt(2)] * 2)
    assert abs(s.norm() - 1) < 1e-12


def test_toffoli_truth_table():
    m = circuit_to_matrix(Circuit(3).add(TOFFOLI, 2, 0, 1))
    expect = np.eye(8)
    expect[[3, 7]] = expect[[7, 3]]
    assert np.array_equal(m.real, expect)


def test_mcx_and_mcz_act_only_on_all_ones_controls():
    mx = circuit_to_matrix(Circuit(4).add(MCX, 3, 0, 1, 2))
    mz = circuit_to_matrix(Circuit(4).add(MCZ, 3, 0, 1, 2))
    assert mx[15, 7] == 1 and mx[7, 15] == 1 and mx[0, 0] == 1
    assert mz[15, 15] == -1 and np.count_nonzero(np.diag(mz) == -1) == 1


def test_ry_rz_conventions():
    t = 0.37
    ry_m = circuit_to_matrix(Circuit(1).add(ry(t), 0))
    rz_m = circuit_to_matrix(Circuit(1).add(rz(t), 0))
    c, s = np.cos(t / 2), np.sin(t / 2)
    assert np.allclose(ry_m, [[c, -s], [s, c]])
    assert np.allclose(rz_m, np.diag([np.exp(-1j * t / 2), np.exp(1j * t / 2)]))


def test_fast_matrix_equals_formal_kronecker_product(rng):
    c = Circuit(4)
    for _ in range(25):
        q = rng.permutation(4)
        kind = rng.integers(5)
        if kind == 0:
            c.add(ry(rng.uniform(0, 6)), int(q[0]))
        elif kind == 1:
            c.add(rz(rng.uniform(0, 6)), int(q[0]))
        elif kind == 2:
            c.add(CNOT, int(q[0]), int(q[1]))
        elif kind == 3:
            c.add(TOFFOLI, int(q[0]), int(q[1]), int(q[2]))
        else:
            c.add(controlled(ry(0.4)), int(q[0]), int(q[1]))
    a = circuit_to_matrix(c)
    assert np.abs(a - formal_matrix(c)).max() < 1e-12
    assert is_unitary(a)


def test_dagger_inverts(rng):
    c = Circuit(3).add(H, 0).add(ry(0.3), 1).add(CZ, 2, 0).add(rz(1.1), 2).add(TOFFOLI, 0, 1, 2)
    m = circuit_to_matrix(c) @ circuit_to_matrix(c.dagger())
    assert np.allclose(m, np.eye(8))


def test_batched_run_matches_single(rng):
    c = Circuit(3).add(H, 0).add(CNOT, 1, 0).add(ry(0.7), 2)
    psi = rng.standard_normal((5, 8)) + 1j * rng.standard_normal((5, 8))
    out = run_array(c, psi)
    for b in range(5):
        assert np.allclose(out[b], run(c, Statevector(3, psi[b])).amplitudes)


def test_ancilla_expectation_is_partial_trace():
    s = run(Circuit(2).add(ry(0.8), 1))
    assert abs(ancilla_expectation(s, 1) - np.cos(0.8)) < 1e-12
    with pytest.raises(IndexError):
        ancilla_expectation(s, 2)


def test_apply_returns_new_state():
    s0 = Statevector.zero(1)
    s1 = apply(s0, op(X, 0))
    assert np.allclose(s0.amplitudes, [1, 0]) and np.allclose(s1.amplitudes, [0, 1])


def test_invalid_gates_rejected():
    with pytest.raises(ValueError):
        GateOp(CNOT, (0,), (0,))
    with pytest.raises(ValueError):
        GateOp(TOFFOLI, (2,), (0,))
    with pytest.raises(ValueError):
        Circuit(2).add(X, 2)
    with pytest.raises(ValueError):
        Statevector(2, np.zeros(3))
    with pytest.raises(ValueError):
        Statevector(1, np.zeros(2)).normalize()


def test_matrix_cap():
    with pytest.raises(ValueError):
        circuit_to_matrix(Circuit(12), cap=10)


def test_z_phase():
    s = run(Circuit(1).add(X, 0).add(Z, 0))
    assert np.allclose(s.amplitudes, [0, -1])
