import numpy as np
import pytest

from vqapde import qnpu as Q
from vqapde.ansatz import AnsatzConfig, ansatz_states, build_ansatz, parameter_count
from vqapde.core_sim import MCZ, Circuit, GateOp, circuit_to_matrix, is_unitary, ry
from vqapde.hadamard import compile_term
from vqapde.verify import HALF_ADDER, boundary_c


def _rand_real(n, count, rng):
    u = rng.standard_normal((count, 2**n))
    return u / np.linalg.norm(u, axis=1, keepdims=True)


def test_half_adder_and_cyclic_increment():
    assert np.array_equal(Q.data_action(Q.laplace_qnpu(2)).real, HALF_ADDER)
    for n in (3, 4, 5):
        q = Q.laplace_qnpu(n)
        assert np.abs(Q.data_action(q) - Q.increment_matrix(n)).max() < 1e-12
        assert Q.work_leakage(q) < 1e-12


def test_laplace_n6_gate_tally():
    c = Q.gate_census(Q.laplace_qnpu(6).controlled, decompose_toffoli=False)
    assert dict(c.by_kind) == {"CNOT": 4, "Toffoli": 10}
    for n in range(3, 9):
        k = Q.gate_census(Q.laplace_qnpu(n).controlled).by_kind
        assert k["CNOT"] == n - 2 and k["Toffoli"] == 2 * n - 2


@pytest.mark.parametrize("variant", [Q.DEEP, Q.SHALLOW])
@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_transform_is_increment(n, variant):
    assert np.abs(Q.restricted_matrix(Q.transform_tt(n, variant), n) - Q.increment_matrix(n)).max() < 1e-12
    t = Q.transform_tt(n, variant)
    assert np.abs(circuit_to_matrix(t) @ circuit_to_matrix(Q.transform_tt_dagger(n, variant)) - np.eye(2**t.n_qubits)).max() < 1e-12


def test_transform_n2_is_cnot_then_x():
    names = [(g.kind.name, g.target, g.controls) for g in Q.transform_tt(2).ops]
    assert names == [("CNOT", 1, (0,)), ("X", 0, ())]


@pytest.mark.parametrize("n", [2, 3, 4])
def test_c_corner_and_antisymmetric_structure(n):
    # the published 4-qubit C keeps its interior entries next to the main
    # diagonal, so only the corners sit on the antidiagonal
    c = boundary_c(n).real
    dim = 2**n
    assert c[0, -1] == 1 and c[-1, 0] == 1
    rest = c.copy()
    rest[0, -1] = rest[-1, 0] = 0
    assert np.array_equal(rest, -rest.T)
    assert np.allclose(c @ c.T, np.eye(dim))
    assert set(np.unique(c)) <= {-1.0, 0.0, 1.0}


def test_boundary_dn_expectation_n3(rng):
    u = _rand_real(3, 20, rng)
    c = compile_term(Q.boundary_dn_qnpu(3), Q.transform_tt(3))
    assert np.abs(c(u) - 2 * u[:, 0] * u[:, -1]).max() < 1e-12


def test_boundary_n_examples():
    t2 = Q.transform_tt(2)
    c2 = compile_term(Q.boundary_n_qnpu(2), t2)
    e1 = np.eye(4)[0]
    assert abs(c2(e1) - 1) < 1e-12
    assert abs(c2(np.full(4, 0.5)) - 0.5) < 1e-12
    c3 = compile_term(Q.boundary_n_qnpu(3), Q.transform_tt(3))
    interior = np.zeros(8)
    interior[1:-1] = 1 / np.sqrt(6)
    assert abs(c3(interior)) < 1e-12
    dn3 = compile_term(Q.boundary_dn_qnpu(3), Q.transform_tt(3))
    assert abs(dn3(interior)) < 1e-12


@pytest.mark.parametrize("variant", [Q.DEEP, Q.SHALLOW])
def test_one_sided_neumann(variant, rng):
    u = _rand_real(3, 10, rng)
    t = Q.transform_tt(3, variant)
    left = compile_term(Q.boundary_n_qnpu(3, variant, "left"), t)
    right = compile_term(Q.boundary_n_qnpu(3, variant, "right"), t)
    assert np.abs(left(u) - u[:, 0] ** 2).max() < 1e-12
    assert np.abs(right(u) - u[:, -1] ** 2).max() < 1e-12
    with pytest.raises(ValueError):
        Q.boundary_n_qnpu(3, variant, "middle")


def _prep(n, vec, rng):
    """Ansatz circuit preparing a random state (returns circuit, state)."""
    cfg = AnsatzConfig(n, 2)
    p = rng.uniform(0, 4 * np.pi, parameter_count(cfg))
    return build_ansatz(cfg, p), ansatz_states(cfg, p)


def test_potential_weights_diagonal(rng):
    n = 3
    prep, pstate = _prep(n, None, rng)
    q = Q.potential_qnpu(n, prep)
    u = _rand_real(n, 5, rng)
    expect = (u**2) @ pstate.real
    assert np.abs(compile_term(q)(u) - expect).max() < 1e-12
    with pytest.raises(ValueError):
        Q.potential_qnpu(n, Circuit(2))


def test_potential_basis_example():
    # p = e1 prepared by the empty circuit: <e1|M|e1> = p_1 = 1
    q = Q.potential_qnpu(2, Circuit(2))
    assert abs(compile_term(q)(np.eye(4)[0]) - 1) < 1e-12
    assert abs(compile_term(q)(np.eye(4)[1])) < 1e-12


def test_source_overlap(rng):
    n = 2
    prep, f = _prep(n, None, rng)
    term = compile_term(Q.source_qnpu(n, prep), overlap=True)
    assert abs(term(f) - 1) < 1e-12
    # u = e1, f = uniform: prepared with H on both qubits
    from vqapde.core_sim import H

    h = Circuit(2).add(H, 0).add(H, 1)
    assert abs(compile_term(Q.source_qnpu(2, h), overlap=True)(np.eye(4)[0]) - 0.5) < 1e-12
    with pytest.raises(ValueError):
        Q.source_qnpu(2, Circuit(3))


def test_mcg_base_and_errors():
    g = GateOp(MCZ, (3,), (0, 1, 2))
    with pytest.raises(ValueError):
        Q.mcg_decompose(g, carries=[4])
    dec = Q.mcg_decompose(GateOp(MCZ, (5,), (0, 1, 2, 3, 4)), carries=[6, 7, 8, 9])
    kinds = [op.kind.name for op in dec.ops]
    assert kinds.count("Toffoli") == 8 and len(kinds) == 9
    from vqapde.core_sim import TOFFOLI

    assert len(Q.mcg_decompose(GateOp(TOFFOLI, (2,), (0, 1)), carries=[]).ops) == 1


def test_units_unitary():
    for n in (2, 3):
        for v in (Q.DEEP, Q.SHALLOW):
            for q in (Q.boundary_dn_qnpu(n, v), Q.boundary_n_qnpu(n, v), Q.boundary_n_qnpu(n, v, "left")):
                assert is_unitary(circuit_to_matrix(q.controlled))
        assert is_unitary(circuit_to_matrix(Q.laplace_qnpu(n).controlled))


def test_census_examples():
    assert Q.gate_census(Circuit(3)).total == 0
    cfg = AnsatzConfig(6, 1)
    assert Q.gate_census(build_ansatz(cfg, np.zeros(parameter_count(cfg)))).total == 3 * 11
    tof = Q.toffoli_decomposition(0, 1, 2)
    c = Q.gate_census(tof)
    assert (c.one_qubit, c.two_qubit) == (Q.TOFFOLI_1Q, Q.TOFFOLI_2Q)
    from vqapde.core_sim import TOFFOLI

    ref = circuit_to_matrix(Circuit(3).add(TOFFOLI, 2, 0, 1))
    m = circuit_to_matrix(tof)
    phase = m[0, 0] / ref[0, 0]
    assert np.abs(m - phase * ref).max() < 1e-12


def test_census_sum():
    a = Q.gate_census(Q.laplace_qnpu(3).controlled)
    b = Q.gate_census(Q.transform_tt(3))
    s = a + b
    assert s.total == a.total + b.total


def test_n_below_two_rejected():
    for f in (Q.laplace_qnpu, Q.transform_tt, Q.boundary_dn_qnpu, Q.boundary_n_qnpu):
        with pytest.raises(ValueError):
            f(1)


def test_mc_ry_decomposition():
    from vqapde.core_sim import controlled

    g = GateOp(controlled(ry(0.3)), (3,), (0, 1, 2))
    dec = Q.mcg_decompose(g, [4, 5]).widened(6)
    a = circuit_to_matrix(Circuit(6).append(g))
    b = circuit_to_matrix(dec)
    assert np.abs(a[:, :16] - b[:, :16]).max() < 1e-12
