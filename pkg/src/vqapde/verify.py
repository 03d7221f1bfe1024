"""Deterministic matrix-oracle checks behind the ``verify`` subcommand.

Each check returns ``(name, passed, detail)``; nothing here is stochastic.
"""
from __future__ import annotations

import numpy as np

from . import qnpu as Q
from .ansatz import AnsatzConfig, ansatz_states, build_ansatz, parameter_count
from .core_sim import CNOT, MCX, MCZ, X, Circuit, GateOp, circuit_to_matrix, controlled, formal_matrix, ry
from .hadamard import REVERSING, TermAssembly, compile_term, evaluate_term

TOL = 1e-10

HALF_ADDER = np.array([[0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]], dtype=float)
B2 = np.array([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]], dtype=float)
C2 = np.array([[0, 0, 0, 1], [0, 0, -1, 0], [0, 1, 0, 0], [1, 0, 0, 0]], dtype=float)


def half_adder() -> Circuit:
    """CNOT(q0 -> q1) then X(q0): the two-qubit increment."""
    c = Circuit(2)
    c.add(CNOT, 1, 0)
    c.add(X, 0)
    return c


def boundary_c4() -> np.ndarray:
    """Four-qubit boundary matrix in its published block form."""
    c11 = np.zeros((8, 8))
    for a in (1, 3, 5):
        c11[a, a + 1], c11[a + 1, a] = -1, 1
    c = np.zeros((16, 16))
    c[:8, :8] = c[8:, 8:] = c11
    c[0, 15], c[7, 8], c[8, 7], c[15, 0] = 1, -1, 1, 1
    return c


def boundary_c(n: int, variant: str = Q.DEEP) -> np.ndarray:
    t = Q.restricted_matrix(Q.transform_tt(n, variant), n)
    return t.conj().T @ Q.data_action(Q.boundary_dn_qnpu(n, variant)) @ t


def _random_real_states(n: int, count: int, rng) -> np.ndarray:
    u = rng.standard_normal((count, 2**n))
    return u / np.linalg.norm(u, axis=1, keepdims=True)


def check_matrices() -> list:
    out = []
    a = circuit_to_matrix(half_adder())
    out.append(("half-adder matrix", np.array_equal(a.real, HALF_ADDER) and not a.imag.any(), ""))
    out.append(("half-adder formal == fast", np.allclose(formal_matrix(half_adder()), a, atol=0), ""))
    t2 = Q.restricted_matrix(Q.transform_tt(2), 2)
    out.append(("T_t n=2", np.array_equal(t2, HALF_ADDER), ""))
    b2 = Q.restricted_matrix(Q.boundary_b(2), 2)
    out.append(("B n=2", np.array_equal(b2, B2), ""))
    out.append(("C n=2", np.array_equal(boundary_c(2), C2), ""))
    out.append(("C n=4 block form", np.array_equal(boundary_c(4), boundary_c4()), ""))
    for n in (2, 3, 4):
        t = Q.restricted_matrix(Q.transform_tt(n), n)
        b = Q.restricted_matrix(Q.boundary_b(n), n)
        c = compile_term(Q.boundary_dn_qnpu(n), Q.transform_tt(n)).matrix
        err = np.abs(np.linalg.inv(t) @ b @ t - c).max()
        out.append((f"C = T^-1 B T n={n}", err <= 1e-12, f"{err:.1e}"))
    return out


def _hadamard(n: int, q: Q.Qnpu, transform, layout, params) -> float:
    circ = build_ansatz(AnsatzConfig(n, 2), params)
    return q.scale * evaluate_term(TermAssembly(circ, q, transform, layout))


def check_semantics(states: int = 50, seed: int = 7) -> list:
    """Hadamard tests against dense expectations on random real states."""
    rng = np.random.default_rng(seed)
    out = []
    for n in (2, 3, 4):
        u = _random_real_states(n, states, rng)
        n_p = 2**n
        shift = Q.increment_matrix(n)
        t = Q.transform_tt(n)
        dn = compile_term(Q.boundary_dn_qnpu(n), t)
        nn = compile_term(Q.boundary_n_qnpu(n, Q.DEEP, "both"), t)
        lap = compile_term(Q.laplace_qnpu(n))
        e_dn = np.abs(dn(u) - 2 * u[:, 0] * u[:, -1]).max()
        e_n = np.abs(nn(u) - (u[:, 0] ** 2 + u[:, -1] ** 2)).max()
        dense = np.einsum("bi,ij,bj->b", u, shift + shift.T - 2 * np.eye(n_p), u)
        e_l = np.abs(2 * lap(u) - 2 - dense).max()
        out.append((f"j_DN n={n}", e_dn <= TOL, f"{e_dn:.1e}"))
        out.append((f"j_N n={n}", e_n <= TOL, f"{e_n:.1e}"))
        out.append((f"laplace n={n}", e_l <= TOL, f"{e_l:.1e}"))
        # full circuits agree with the compiled operators on ansatz states
        cfg = AnsatzConfig(n, 2)
        p = rng.uniform(0, 4 * np.pi, parameter_count(cfg))
        v = ansatz_states(cfg, p)
        worst = 0.0
        for q, tr, comp in ((Q.boundary_dn_qnpu(n), t, dn), (Q.boundary_n_qnpu(n), t, nn), (Q.laplace_qnpu(n), None, lap)):
            worst = max(worst, abs(_hadamard(n, q, tr, REVERSING, p) - comp(v)))
        out.append((f"circuit == compiled n={n}", worst <= TOL, f"{worst:.1e}"))
    return out


def flag_action(q: Q.Qnpu) -> np.ndarray:
    """Images on (flag, data) with carries in |0>, for units whose top work qubit is a flag."""
    rows = Q._basis_images(q)
    flag = q.n_data + q.n_work - 1
    d = np.arange(2**q.n_data)
    keep = np.concatenate([d, d | (1 << flag)]) | (1 << q.ancilla)
    return rows[:, keep].T


def _basis_equal(a: np.ndarray, b: np.ndarray) -> bool:
    return bool(np.abs(a - b).max() <= 1e-12)


def check_shallow(ns=(3, 4, 5)) -> list:
    out = []
    for n in ns:
        ok_t = _basis_equal(Q.restricted_matrix(Q.transform_tt(n, Q.SHALLOW), n), Q.increment_matrix(n))
        ok_t &= _basis_equal(Q.restricted_matrix(Q.transform_tt(n, Q.DEEP), n), Q.increment_matrix(n))
        out.append((f"T_t shallow == deep n={n}", ok_t, ""))
        for name, make in (
            ("j_DN", lambda v: Q.boundary_dn_qnpu(n, v)),
            ("j_N both", lambda v: Q.boundary_n_qnpu(n, v, "both")),
            ("j_N left", lambda v: Q.boundary_n_qnpu(n, v, "left")),
            ("j_N right", lambda v: Q.boundary_n_qnpu(n, v, "right")),
        ):
            deep, shallow = make(Q.DEEP), make(Q.SHALLOW)
            flagged = deep.n_work == 1
            same = _basis_equal(flag_action(deep), flag_action(shallow)) if flagged else _basis_equal(
                Q.data_action(deep), Q.data_action(shallow)
            )
            clean = Q.work_leakage(shallow, skip_top=1 if flagged else 0) <= 1e-12
            out.append((f"{name} shallow == deep n={n}", same and clean, ""))
    return out


def check_mcg(ns=(3, 4, 5)) -> list:
    """Carry-ladder decomposition == monolithic gate for n controls, carries restored."""
    out = []
    for n in ns:
        ctrls = tuple(range(n))
        target = n
        carries = list(range(n + 1, 2 * n))
        width = 2 * n
        for name, kind in (("MCX", MCX), ("MCZ", MCZ), ("MC-Ry", controlled(ry(0.7)))):
            g = GateOp(kind, (target,), ctrls)
            mono = Circuit(width).append(g)
            dec = Q.mcg_decompose(g, carries).widened(width)
            a, b = circuit_to_matrix(mono), circuit_to_matrix(dec)
            dim = 2 ** (n + 1)  # carries in |0>
            ok = np.abs(a[:, :dim] - b[:, :dim]).max() <= 1e-12
            out.append((f"{name} ladder == monolithic n={n}", bool(ok), ""))
    return out


def run_all() -> list:
    return check_matrices() + check_semantics() + check_shallow() + check_mcg()


__all__ = ["run_all", "check_matrices", "check_semantics", "check_shallow", "check_mcg", "half_adder", "boundary_c", "boundary_c4"]
