"""Hadamard-test assembly and exact evaluation of objective-term expectations.

Two layouts are supported:

* ``reversing``: H, U, T, controlled unit, H.  The transform is applied to
  both ancilla branches, so it needs no dagger.
* ``explicit_dagger``: H, U, controlled T, controlled unit, controlled T^dag,
  H.  Required when the transform borrows carry qubits.

Both return <sigma_z> of the ancilla = Re<u|T^dag M T|u>, obtained by exact
partial trace of the final statevector.  ``compile_term`` produces the same
number from a dense data-register operator, which is the fast path used
inside optimisation loops.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core_sim import Circuit, H, Statevector, add_control, ancilla_expectation, run
from .qnpu import Qnpu, data_action, restricted_matrix

REVERSING, EXPLICIT_DAGGER = "reversing", "explicit_dagger"


@dataclass
class TermAssembly:
    ansatz: Circuit
    qnpu: Qnpu
    transform: Circuit | None = None
    layout: str = REVERSING
    controlled_ansatz: bool = False

    def __post_init__(self):
        if self.layout not in (REVERSING, EXPLICIT_DAGGER):
            raise ValueError(f"unknown layout {self.layout!r}")
        if self.ansatz.n_qubits != self.qnpu.n_data:
            raise ValueError("ansatz and unit act on different data registers")
        if self.layout == EXPLICIT_DAGGER and self.transform is None:
            raise ValueError("explicit-dagger layout needs a transform")


def assemble(a: TermAssembly) -> tuple[Circuit, int]:
    """Full Hadamard-test circuit and the index of its ancilla."""
    q = a.qnpu
    n_reg = q.n_data + q.n_work
    if a.transform is not None:
        n_reg = max(n_reg, a.transform.n_qubits)
    anc = n_reg
    remap = {i: i for i in range(q.n_data + q.n_work)}
    remap[q.ancilla] = anc
    circ = Circuit(n_reg + 1)
    circ.add(H, anc)
    for g in a.ansatz.ops:
        circ.append(add_control(g, anc) if a.controlled_ansatz else g)
    if a.transform is not None and a.layout == REVERSING:
        circ.extend(a.transform)
    if a.transform is not None and a.layout == EXPLICIT_DAGGER:
        for g in a.transform.ops:
            circ.append(add_control(g, anc))
    circ.extend(q.controlled, mapping=remap)
    if a.transform is not None and a.layout == EXPLICIT_DAGGER:
        for g in a.transform.dagger().ops:
            circ.append(add_control(g, anc))
    circ.add(H, anc)
    return circ, anc


def evaluate_term(a: TermAssembly) -> float:
    """Raw <sigma_z> of the ancilla (multiply by ``qnpu.scale`` for the term value)."""
    circ, anc = assemble(a)
    return ancilla_expectation(run(circ), anc)


@dataclass
class CompiledTerm:
    """Dense stand-in for one Hadamard test.

    ``matrix`` (quadratic terms) gives scale * Re(u^dag M u); ``vector``
    (overlap terms with a controlled ansatz) gives scale * Re(v^dag u).
    """

    scale: float
    matrix: np.ndarray | None = None
    vector: np.ndarray | None = None

    def __call__(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u)
        if self.matrix is not None:
            val = np.einsum("...i,ij,...j->...", u.conj(), self.matrix, u).real
        else:
            val = (u @ self.vector.conj()).real
        return self.scale * val


def compile_term(qnpu: Qnpu, transform: Circuit | None = None, overlap: bool = False) -> CompiledTerm:
    """Dense operator equal to the Hadamard test of ``qnpu`` after ``transform``."""
    if overlap:
        # controlled U then controlled F^dag: <sigma_z> = Re<0|F^dag U|0> = Re<f|u>
        f_dag = data_action(qnpu)
        f_state = f_dag.conj().T[:, 0]
        return CompiledTerm(qnpu.scale, vector=f_state)
    m = data_action(qnpu)
    if transform is not None:
        t = restricted_matrix(transform, qnpu.n_data)
        m = t.conj().T @ m @ t
    return CompiledTerm(qnpu.scale, matrix=m)


def identity_check(ansatz: Circuit) -> float:
    """Hadamard test around an identity unit; 1.0 for any normalized state."""
    n = ansatz.n_qubits
    q = Qnpu("identity", "deep", n, 0, Circuit(n + 1))
    return evaluate_term(TermAssembly(ansatz, q))


def direct_expectation(state: Statevector | np.ndarray, matrix: np.ndarray) -> float:
    u = state.amplitudes if isinstance(state, Statevector) else np.asarray(state)
    return float(np.real(u.conj() @ matrix @ u))


def evaluate_all_terms(control, eff, mode: str = "circuit") -> dict:
    """Raw expectation of every active term family for one control.

    Thin wrapper over the term plan kept by the objective; see
    :func:`vqapde.objective.term_values`.
    """
    from .objective import term_values

    return term_values(control, eff, mode=mode)


__all__ = [
    "REVERSING",
    "EXPLICIT_DAGGER",
    "TermAssembly",
    "assemble",
    "evaluate_term",
    "CompiledTerm",
    "compile_term",
    "identity_check",
    "direct_expectation",
    "evaluate_all_terms",
]
