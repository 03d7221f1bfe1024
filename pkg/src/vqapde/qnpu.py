"""Processing-unit circuits for each objective-term family, plus gate census.

Register layout of every unit: data qubits ``0..n-1``, work qubits (carries,
flag, potential register) right above them, and the Hadamard-test ancilla at
the very top index.  Each builder returns a :class:`Qnpu` whose ``controlled``
circuit already contains the ancilla control, so gate counts reflect how the
unit is actually wired (for instance the adder only needs the ancilla on its
first three gates).

Data-register actions (after the increment ``T`` that moves the first and
last grid points to basis states 1 and 0):

* adder: cyclic increment e_k -> e_{k+1}
* boundary DN: C = T^dag B T with Re<u|C|u> = 2 Re(u_1^* u_N)
* boundary N: Re<u|T^dag V T|u> = |u_1|^2 + |u_N|^2 (or one side only)
* potential: Re<u,0|M|u,0> = sum_k |u_k|^2 p_k / |p|
* source: F^dag, giving Re<f|u>
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .core_sim import (
    CNOT,
    CZ,
    H,
    MCX,
    MCZ,
    TOFFOLI,
    X,
    Z,
    Circuit,
    GateKind,
    GateOp,
    add_control,
    circuit_to_matrix,
    controlled,
    run_array,
    rz,
)

DEEP, SHALLOW = "deep", "shallow"
KINDS = ("laplace", "transform", "boundary_dn", "boundary_n", "potential", "source")


@dataclass
class Qnpu:
    """A processing unit ready for a Hadamard test.

    ``controlled`` acts on ``n_data + n_work + 1`` qubits with the ancilla on
    the last one.  ``scale`` converts the raw expectation into the intended
    quantity (norms of fitted P or F states).
    """

    kind: str
    variant: str
    n_data: int
    n_work: int
    controlled: Circuit
    scale: float = 1.0
    meta: dict = field(default_factory=dict)

    @property
    def n_total(self) -> int:
        return self.n_data + self.n_work + 1

    @property
    def ancilla(self) -> int:
        return self.n_data + self.n_work


def _check_n(n: int):
    if n < 2:
        raise ValueError("need at least two data qubits")


def _mc(kind_base: str, target: int, controls) -> GateOp:
    """Multi-controlled X or Z with the conventional family name."""
    controls = tuple(controls)
    k = len(controls)
    if kind_base == "X":
        kind = X if k == 0 else CNOT if k == 1 else TOFFOLI if k == 2 else MCX
    else:
        kind = Z if k == 0 else CZ if k == 1 else MCZ
    return GateOp(kind, (target,), controls)


def control_all(circ: Circuit, anc: int, n_total: int) -> Circuit:
    """Naive controlled version: every gate gets the ancilla as an extra control."""
    out = Circuit(n_total)
    for g in circ.ops:
        out.append(add_control(g, anc))
    return out


# ---------------------------------------------------------------- MCG


def mcg_decompose(g: GateOp, carries, extra_controls=()) -> Circuit:
    """Carry-qubit version of a multi-controlled single-qubit gate.

    The AND of the k controls is built in ``k-1`` carries by a Toffoli ladder,
    the inner gate is applied controlled on the last carry (plus
    ``extra_controls``), and the ladder is mirrored to restore the carries.
    Two-control X gates and single-control gates are returned unchanged.
    """
    ctrls = list(g.controls)
    k = len(ctrls)
    base = g.kind.base
    n_total = max(list(g.qubits) + list(carries) + list(extra_controls) + [0]) + 1
    out = Circuit(n_total)
    if k <= 1 or (k == 2 and base.name == "X" and not extra_controls):
        inner = GateOp(g.kind, g.targets, g.controls)
        for c in extra_controls:
            inner = add_control(inner, c)
        return out.append(inner)
    if len(carries) < k - 1:
        raise ValueError(f"{k} controls need {k - 1} carry qubits, got {len(carries)}")
    ladder = [GateOp(TOFFOLI, (carries[0],), (ctrls[0], ctrls[1]))]
    for i in range(2, k):
        ladder.append(GateOp(TOFFOLI, (carries[i - 1],), (carries[i - 2], ctrls[i])))
    last = carries[k - 2]
    centre = [last] + list(extra_controls)
    if base.name in ("X", "Z"):
        core = _mc(base.name, g.target, centre)
    else:
        core = GateOp(controlled(base), g.targets, centre)
    out.extend(ladder)
    out.append(core)
    out.extend(list(reversed(ladder)))
    return out


def _emit(out: Circuit, g: GateOp, variant: str, carries, extra=()):
    """Append a (multi-)controlled gate, decomposing it for shallow layouts."""
    if variant == SHALLOW:
        out.extend(mcg_decompose(g, carries, extra))
    else:
        for c in extra:
            g = add_control(g, c)
        out.append(g)


# ---------------------------------------------------------------- adder


def _decrement_with_control(n: int) -> Circuit:
    """Controlled cyclic decrement using n-2 carries, gate for gate as drawn.

    Ancilla at index 2n-2 (n > 2) or 2 (n == 2).  Tally: n-2 CNOT, 2n-2 Toffoli.
    """
    n_carry = max(n - 2, 0)
    anc = n + n_carry
    c = [n + i for i in range(n_carry)]  # c[0] holds a & q0, c[i] the running borrow
    circ = Circuit(anc + 1)
    circ.add(CNOT, 0, anc)
    circ.add(TOFFOLI, 1, anc, 0)
    if n == 2:
        return circ
    circ.add(TOFFOLI, c[0], anc, 0)
    for i in range(1, n - 2):
        circ.add(TOFFOLI, c[i], c[i - 1], i)
        circ.add(CNOT, i + 1, c[i])
    circ.add(TOFFOLI, n - 1, c[n - 3], n - 2)
    for i in range(n - 3, 0, -1):
        circ.add(TOFFOLI, c[i], c[i - 1], i)
    circ.add(TOFFOLI, c[0], anc, 0)
    return circ


def laplace_qnpu(n: int) -> Qnpu:
    """Controlled cyclic increment (the half-adder for n = 2).

    The drawn carry circuit realises the decrement; its mirror image is used
    so that the data-register action is the increment e_k -> e_{k+1}.  The
    Laplacian term only needs Re<u|S|u>, which is identical for both.
    """
    _check_n(n)
    circ = _decrement_with_control(n).dagger()
    return Qnpu("laplace", SHALLOW if n > 2 else DEEP, n, max(n - 2, 0), circ)


# ---------------------------------------------------------------- transform


def transform_tt(n: int, variant: str = DEEP) -> Circuit:
    """Increment T: e_k -> e_{k+1 mod 2^n} on the data register.

    Deep: MCX ladder from the most significant bit down, then CNOT and X.
    Shallow: the AND prefixes q0&...&q_i live in n-2 carries above the data.
    """
    _check_n(n)
    if variant == DEEP or n == 2:
        circ = Circuit(n if variant == DEEP else 2 * n - 2)
        for k in range(n - 1, 0, -1):
            circ.append(_mc("X", k, range(k)))
        return circ.add(X, 0)
    c = [n + i for i in range(n - 2)]
    circ = Circuit(2 * n - 2)
    circ.add(TOFFOLI, c[0], 0, 1)
    for i in range(1, n - 2):
        circ.add(TOFFOLI, c[i], c[i - 1], i + 1)
    for k in range(n - 1, 1, -1):
        circ.add(CNOT, k, c[k - 2])
        if k - 2 >= 1:
            circ.add(TOFFOLI, c[k - 2], c[k - 3], k - 1)
        else:
            circ.add(TOFFOLI, c[0], 0, 1)
    circ.add(CNOT, 1, 0)
    return circ.add(X, 0)


def transform_tt_dagger(n: int, variant: str = DEEP) -> Circuit:
    return transform_tt(n, variant).dagger()


# ---------------------------------------------------------------- boundary


def n_work_boundary(n: int, variant: str, kind: str, sides: str = "both") -> int:
    one_sided = kind == "boundary_n" and sides != "both"
    if variant == DEEP:
        return 1 if one_sided else 0
    carries = (n - 1) if one_sided else (n - 2)
    return carries + (1 if one_sided else 0)


def boundary_b(n: int, variant: str = DEEP) -> Circuit:
    """Uncontrolled B on the data register (carries above it when shallow).

    Z^(q_1..q_{n-1}) X^(q_1..q_{n-1}) then MCZ over all data qubits, then X
    and Z on every qubit.  For odd n the final pair on qubit 0 is swapped
    (X before Z), flipping the global sign so both corners of C come out +1.
    """
    _check_n(n)
    n_carry = 0 if variant == DEEP else n - 2
    circ = Circuit(n + n_carry)
    carries = list(range(n, n + n_carry))
    _append_b(circ, n, variant, carries, extra=())
    return circ


def _append_b(circ: Circuit, n: int, variant: str, carries, extra):
    def single(kind, q):
        g = GateOp(kind, (q,))
        for c in extra:
            g = add_control(g, c)
        circ.append(g)

    for q in range(1, n):
        single(X, q)
    for q in range(1, n):
        single(Z, q)
    _emit(circ, _mc("Z", 0, range(1, n)), variant, carries, extra)
    for q in range(n):
        if q == 0 and n % 2 == 1:
            continue
        single(X, q)
    for q in range(n):
        single(Z, q)
    if n % 2 == 1:
        single(X, 0)


def boundary_dn_qnpu(n: int, variant: str = DEEP) -> Qnpu:
    """Unit whose conjugation by T yields C, Re<u|C|u> = 2 Re(u_1^* u_N)."""
    _check_n(n)
    n_work = n_work_boundary(n, variant, "boundary_dn")
    anc = n + n_work
    circ = Circuit(anc + 1)
    _append_b(circ, n, variant, list(range(n, n + n_work)), extra=(anc,))
    return Qnpu("boundary_dn", variant, n, n_work, circ)


def boundary_n_qnpu(n: int, variant: str = DEEP, sides: str = "both") -> Qnpu:
    """Unit for the Neumann diagonal terms, evaluated after T.

    ``sides='both'``: identity on basis states 0 and 1 (where T puts u_N and
    u_1), an antisymmetric real rotation Z.X on qubit 0 elsewhere, so the
    real expectation is |u_1|^2 + |u_N|^2 for any complex u.

    ``sides='left'`` / ``'right'``: a flag qubit is flipped unless the data
    register holds the boundary basis state, giving |u_1|^2 or |u_N|^2.
    (A one-sided real orthogonal unit without a flag cannot exist: the
    remaining odd-dimensional block would have to be antisymmetric.)
    """
    _check_n(n)
    if sides not in ("both", "left", "right"):
        raise ValueError("sides must be 'both', 'left' or 'right'")
    n_work = n_work_boundary(n, variant, "boundary_n", sides)
    anc = n + n_work
    circ = Circuit(anc + 1)
    if sides == "both":
        carries = list(range(n, n + n_work))
        circ.add(CNOT, 0, anc)
        circ.add(CZ, 0, anc)
        for q in range(1, n):
            circ.add(X, q)
        _emit(circ, _mc("Z", 0, range(1, n)), variant, carries, (anc,))
        _emit(circ, _mc("X", 0, range(1, n)), variant, carries, (anc,))
        for q in range(1, n):
            circ.add(X, q)
    else:
        flag = n + n_work - 1
        carries = list(range(n, flag))
        target_index = 1 if sides == "left" else 0
        zeros = [q for q in range(n) if not (target_index >> q) & 1]
        circ.add(CNOT, flag, anc)
        for q in zeros:
            circ.add(X, q)
        _emit(circ, _mc("X", flag, range(n)), variant, carries, (anc,))
        for q in zeros:
            circ.add(X, q)
    return Qnpu("boundary_n", variant, n, n_work, circ, meta={"sides": sides})


# ---------------------------------------------------------------- potential / source


def potential_qnpu(n: int, prep: Circuit, scale: float = 1.0) -> Qnpu:
    """Diagonal weighting by a prepared state |p> on an n-qubit register.

    Controlled on the ancilla: prepare |p> on the register, then copy the data
    bits onto it with CNOTs.  <u,0|M|u,0> = sum_k |u_k|^2 p_k.
    """
    _check_n(n)
    if prep.n_qubits != n:
        raise ValueError("potential preparation circuit must act on n qubits")
    anc = 2 * n
    circ = Circuit(anc + 1)
    for g in prep.ops:
        circ.append(add_control(g.remap({q: q + n for q in range(n)}), anc))
    for q in range(n):
        circ.add(TOFFOLI, q + n, anc, q)
    return Qnpu("potential", SHALLOW, n, n, circ, scale=scale)


def source_qnpu(n: int, prep: Circuit, scale: float = 1.0) -> Qnpu:
    """F^dag controlled on the ancilla; paired with a controlled ansatz it yields Re<f|u>."""
    _check_n(n)
    if prep.n_qubits != n:
        raise ValueError("source preparation circuit must act on n qubits")
    circ = control_all(prep.dagger(), n, n + 1)
    return Qnpu("source", DEEP, n, 0, circ, scale=scale)


def neumann_weight_prep(n: int, sides: str = "both") -> tuple[Circuit, float]:
    """Exact preparation of the boundary indicator state used by the shallow
    potential-style Neumann route; returns (circuit, scale)."""
    circ = Circuit(n)
    if sides == "both":  # (e_0 + e_{N-1}) / sqrt(2) in grid order
        circ.add(H, 0)
        for q in range(1, n):
            circ.add(CNOT, q, 0)
        return circ, float(np.sqrt(2.0))
    if sides == "right":
        for q in range(n):
            circ.add(X, q)
    return circ, 1.0


# ---------------------------------------------------------------- matrices


def _basis_images(q: Qnpu) -> np.ndarray:
    """Images of |data=j, work=0, ancilla=1> for every j (rows)."""
    dim = 2 ** q.n_data
    psi = np.zeros((dim, 2 ** q.n_total), dtype=complex)
    psi[np.arange(dim), np.arange(dim) | (1 << q.ancilla)] = 1.0
    return run_array(q.controlled, psi)


def data_action(q: Qnpu) -> np.ndarray:
    """Matrix of the controlled unit restricted to ancilla=1, work qubits |0>."""
    dim = 2 ** q.n_data
    rows = _basis_images(q)
    return rows[:, np.arange(dim) | (1 << q.ancilla)].T


def register_action(q: Qnpu) -> np.ndarray:
    """Images of data basis states on the whole (data + work) register, ancilla=1.

    Shape (2**(n_data+n_work), 2**n_data); used for deep/shallow comparisons
    where extra flag qubits are part of the action.
    """
    rows = _basis_images(q)
    keep = np.arange(2 ** (q.n_data + q.n_work)) | (1 << q.ancilla)
    return rows[:, keep].T


def work_leakage(q: Qnpu, skip_top: int = 0) -> float:
    """Largest amplitude left on carry qubits from data basis inputs (ancilla=1).

    ``skip_top`` excludes that many highest work qubits (e.g. a flag that is
    meant to be flipped).
    """
    n_carry = q.n_work - skip_top
    if n_carry <= 0:
        return 0.0
    rows = _basis_images(q)
    idx = np.arange(rows.shape[1])
    dirty = ((idx >> q.n_data) & ((1 << n_carry) - 1)) != 0
    return float(np.abs(rows[:, dirty]).max())


def restricted_matrix(circ: Circuit, n_data: int) -> np.ndarray:
    """Top-left data block of a circuit whose extra qubits start (and must end) in |0>."""
    full = circuit_to_matrix(circ)
    dim = 2 ** n_data
    return full[:dim, :dim]


def increment_matrix(n: int) -> np.ndarray:
    dim = 2 ** n
    return np.roll(np.eye(dim), 1, axis=0)


# ---------------------------------------------------------------- census


@dataclass
class GateCensus:
    one_qubit: int = 0
    two_qubit: int = 0
    by_kind: Counter = field(default_factory=Counter)

    @property
    def total(self) -> int:
        return self.one_qubit + self.two_qubit

    def __add__(self, other: "GateCensus") -> "GateCensus":
        return GateCensus(
            self.one_qubit + other.one_qubit,
            self.two_qubit + other.two_qubit,
            self.by_kind + other.by_kind,
        )


# Standard Toffoli: 6 CNOT, 7 T/T^dag, 2 H.
TOFFOLI_1Q, TOFFOLI_2Q = 9, 6


def toffoli_decomposition(c1: int, c2: int, t: int, n_qubits: int | None = None) -> Circuit:
    """Six-CNOT Toffoli with T gates written as Rz(+-pi/4); exact up to a global phase."""
    n_qubits = n_qubits or max(c1, c2, t) + 1
    T, Td = rz(np.pi / 4), rz(-np.pi / 4)
    circ = Circuit(n_qubits)
    circ.add(H, t)
    circ.add(CNOT, t, c2)
    circ.add(Td, t)
    circ.add(CNOT, t, c1)
    circ.add(T, t)
    circ.add(CNOT, t, c2)
    circ.add(Td, t)
    circ.add(CNOT, t, c1)
    circ.add(T, c2)
    circ.add(T, t)
    circ.add(H, t)
    circ.add(CNOT, c2, c1)
    circ.add(T, c1)
    circ.add(Td, c2)
    circ.add(CNOT, c2, c1)
    return circ


def _count_mc(base: str, k: int) -> tuple[int, int]:
    """(1q, 2q) cost of a k-controlled single-qubit gate without ancillas.

    k = 1 is one two-qubit gate; a 2-controlled X is the standard Toffoli;
    otherwise the square-root recursion C^k(U) = C(V) C^{k-1}X C(V^dag)
    C^{k-1}X C^{k-1}(V) is unrolled (exponential in k, as expected for
    ancilla-free networks).
    """
    if k == 0:
        return 1, 0
    if k == 1:
        return 0, 1
    if base == "X" and k == 2:
        return TOFFOLI_1Q, TOFFOLI_2Q
    if base == "Z":  # H-conjugated X
        a, b = _count_mc("X", k)
        return a + 2, b
    ax, bx = _count_mc("X", k - 1)
    av, bv = _count_mc("V", k - 1)
    return 2 * ax + av, 2 * bx + bv + 2


def gate_census(circuit: Circuit, decompose_toffoli: bool = True) -> GateCensus:
    out = GateCensus()
    for g in circuit.ops:
        name = g.kind.name
        k = len(g.controls)
        out.by_kind[name] += 1
        if not decompose_toffoli:
            if k == 0:
                out.one_qubit += 1
            else:
                out.two_qubit += 1  # multi-qubit gates kept whole
            continue
        base = g.kind.base.name
        a, b = _count_mc(base if base in ("X", "Z") else "U", k)
        out.one_qubit += a
        out.two_qubit += b
    return out


def build_kind(kind: str, n: int, variant: str = DEEP, sides: str = "both") -> Circuit:
    """Representative circuit of one unit family for census reports."""
    from .ansatz import AnsatzConfig, build_ansatz, parameter_count

    if kind == "laplace":
        return laplace_qnpu(n).controlled
    if kind == "transform":
        return transform_tt(n, variant)
    if kind == "boundary_dn":
        return boundary_dn_qnpu(n, variant).controlled
    if kind == "boundary_n":
        return boundary_n_qnpu(n, variant, sides).controlled
    cfg = AnsatzConfig(n, 1)
    prep = build_ansatz(cfg, np.full(parameter_count(cfg), 0.3))
    if kind == "potential":
        return potential_qnpu(n, prep).controlled
    if kind == "source":
        return source_qnpu(n, prep).controlled
    if kind == "ansatz":
        return prep
    raise ValueError(f"unknown unit kind {kind!r}")
