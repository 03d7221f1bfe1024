"""Dense statevector engine with little-endian qubit ordering.

Qubit 0 is the least significant bit of a basis index and is drawn as the
top wire of a circuit.  Every gate is a single-target (optionally
multi-controlled) 2x2 unitary, which covers the whole gate set used by the
solver: Pauli gates, H, Ry, Rz, CNOT, CZ, Toffoli, MCX, MCZ and a generic
controlled wrapper.

Amplitude arrays may carry leading batch axes; a batch of states (or a batch
of gate matrices, one per state) is pushed through the same circuit in one
numpy call, which is what makes swarm optimisation affordable.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

NORM_TOL = 1e-12
UNITARY_TOL = 1e-10
DEFAULT_MATRIX_CAP = 10

_SINGLE = {"I", "X", "Y", "Z", "H", "Ry", "Rz"}
_N_PARAMS = {"Ry": 1, "Rz": 1}
# controlled families: name -> (base gate, fixed control count or None)
_CONTROLLED = {
    "CNOT": ("X", 1),
    "CZ": ("Z", 1),
    "Toffoli": ("X", 2),
    "MCX": ("X", None),
    "MCZ": ("Z", None),
}


@dataclass(frozen=True)
class GateKind:
    """Gate identity plus its parameters.

    ``name`` is one of I, X, Y, Z, H, Ry, Rz, CNOT, CZ, Toffoli, MCX, MCZ,
    Controlled.  ``Controlled`` wraps a single-qubit ``inner`` kind.
    """

    name: str
    params: tuple = ()
    inner: "GateKind | None" = None

    def __post_init__(self):
        if self.name == "Controlled":
            if self.inner is None or self.inner.name not in _SINGLE:
                raise ValueError("Controlled gate needs a single-qubit inner kind")
        elif self.name not in _SINGLE and self.name not in _CONTROLLED:
            raise ValueError(f"unsupported gate kind {self.name!r}")
        if len(self.params) != _N_PARAMS.get(self.name, 0):
            raise ValueError(
                f"{self.name} expects {_N_PARAMS.get(self.name, 0)} parameters, got {len(self.params)}"
            )

    @property
    def base(self) -> "GateKind":
        """Single-qubit kind acting on the target."""
        if self.name in _SINGLE:
            return self
        if self.name == "Controlled":
            return self.inner
        return GateKind(_CONTROLLED[self.name][0])

    @property
    def n_controls(self) -> int | None:
        """Fixed control count, or None when any count >= 1 is allowed."""
        if self.name in _SINGLE:
            return 0
        if self.name == "Controlled":
            return None
        return _CONTROLLED[self.name][1]

    def dagger(self) -> "GateKind":
        if self.name in ("Ry", "Rz"):
            return GateKind(self.name, (-self.params[0],))
        if self.name == "Controlled":
            return GateKind("Controlled", inner=self.inner.dagger())
        return self  # every other kind is self-inverse


# convenience constructors
I = GateKind("I")
X = GateKind("X")
Y = GateKind("Y")
Z = GateKind("Z")
H = GateKind("H")
CNOT = GateKind("CNOT")
CZ = GateKind("CZ")
TOFFOLI = GateKind("Toffoli")
MCX = GateKind("MCX")
MCZ = GateKind("MCZ")


def ry(theta: float) -> GateKind:
    return GateKind("Ry", (float(theta),))


def rz(theta: float) -> GateKind:
    return GateKind("Rz", (float(theta),))


def controlled(inner: GateKind) -> GateKind:
    return GateKind("Controlled", inner=inner)


def single_qubit_matrix(kind: GateKind) -> np.ndarray:
    name = kind.name
    if name == "I":
        return np.eye(2, dtype=complex)
    if name == "X":
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if name == "Y":
        return np.array([[0, -1j], [1j, 0]], dtype=complex)
    if name == "Z":
        return np.array([[1, 0], [0, -1]], dtype=complex)
    if name == "H":
        return np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)
    if name == "Ry":
        c, s = np.cos(kind.params[0] / 2), np.sin(kind.params[0] / 2)
        return np.array([[c, -s], [s, c]], dtype=complex)
    if name == "Rz":
        t = kind.params[0] / 2
        return np.diag([np.exp(-1j * t), np.exp(1j * t)])
    raise ValueError(f"{name} is not a single-qubit kind")


def gate_matrix(kind: GateKind, n_controls: int | None = None) -> np.ndarray:
    """Full matrix of a gate in little-endian order.

    Controls occupy qubits 0..k-1 and the target is qubit k, so CNOT comes
    out as [[1,0,0,0],[0,0,0,1],[0,0,1,0],[0,1,0,0]].
    """
    base = single_qubit_matrix(kind.base)
    k = kind.n_controls
    if k is None:
        if n_controls is None:
            raise ValueError(f"{kind.name} needs an explicit control count")
        k = n_controls
    if k == 0:
        return base
    dim = 2 ** (k + 1)
    m = np.eye(dim, dtype=complex)
    on = (1 << k) - 1  # all controls set
    i0, i1 = on, on | (1 << k)
    m[i0, i0], m[i0, i1] = base[0, 0], base[0, 1]
    m[i1, i0], m[i1, i1] = base[1, 0], base[1, 1]
    return m


@dataclass(frozen=True)
class GateOp:
    kind: GateKind
    targets: tuple
    controls: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        object.__setattr__(self, "controls", tuple(int(c) for c in self.controls))
        if len(self.targets) != 1:
            raise ValueError("every gate acts on exactly one target qubit")
        if set(self.targets) & set(self.controls) or len(set(self.controls)) != len(self.controls):
            raise ValueError("targets and controls overlap")
        k = self.kind.n_controls
        if k is None:
            if len(self.controls) < 1:
                raise ValueError(f"{self.kind.name} needs at least one control")
        elif len(self.controls) != k:
            raise ValueError(f"{self.kind.name} needs {k} controls, got {len(self.controls)}")

    @property
    def target(self) -> int:
        return self.targets[0]

    @property
    def qubits(self) -> tuple:
        return self.controls + self.targets

    def dagger(self) -> "GateOp":
        return GateOp(self.kind.dagger(), self.targets, self.controls)

    def remap(self, mapping) -> "GateOp":
        return GateOp(self.kind, [mapping[q] for q in self.targets], [mapping[q] for q in self.controls])


def op(kind: GateKind, target: int, *controls: int) -> GateOp:
    return GateOp(kind, (target,), controls)


def add_control(g: GateOp, control: int) -> GateOp:
    """Promote a gate by one extra control, keeping the named family when possible."""
    base = g.kind.base
    ctrls = g.controls + (control,)
    k = len(ctrls)
    if base.name == "X":
        kind = CNOT if k == 1 else TOFFOLI if k == 2 else MCX
    elif base.name == "Z":
        kind = CZ if k == 1 else MCZ
    elif base.name == "I":
        return g
    else:
        kind = controlled(base)
    return GateOp(kind, g.targets, ctrls)


@dataclass
class Circuit:
    n_qubits: int
    ops: list = field(default_factory=list)

    def __post_init__(self):
        for g in self.ops:
            self._check(g)

    def _check(self, g: GateOp):
        if max(g.qubits) >= self.n_qubits or min(g.qubits) < 0:
            raise ValueError(f"gate {g.kind.name} on {g.qubits} outside {self.n_qubits} qubits")

    def add(self, kind: GateKind, target: int, *controls: int) -> "Circuit":
        g = GateOp(kind, (target,), controls)
        self._check(g)
        self.ops.append(g)
        return self

    def append(self, g: GateOp) -> "Circuit":
        self._check(g)
        self.ops.append(g)
        return self

    def extend(self, other: "Circuit | Iterable[GateOp]", mapping: Sequence[int] | None = None) -> "Circuit":
        ops = other.ops if isinstance(other, Circuit) else list(other)
        for g in ops:
            self.append(g if mapping is None else g.remap(mapping))
        return self

    def dagger(self) -> "Circuit":
        return Circuit(self.n_qubits, [g.dagger() for g in reversed(self.ops)])

    def widened(self, n_qubits: int, mapping: Sequence[int] | None = None) -> "Circuit":
        """Same gates embedded in a larger register (optionally relabelled)."""
        out = Circuit(n_qubits)
        return out.extend(self, mapping)

    def __len__(self):
        return len(self.ops)


@dataclass
class Statevector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape[-1] != 2 ** self.n_qubits:
            raise ValueError("amplitude length must be 2**n_qubits")

    @classmethod
    def zero(cls, n_qubits: int) -> "Statevector":
        a = np.zeros(2 ** n_qubits, dtype=complex)
        a[0] = 1.0
        return cls(n_qubits, a)

    @classmethod
    def from_vector(cls, vec) -> "Statevector":
        vec = np.asarray(vec, dtype=complex)
        n = int(round(np.log2(vec.shape[-1])))
        return cls(n, vec.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> "Statevector":
        nrm = self.norm()
        if nrm == 0:
            raise ValueError("cannot normalize the zero vector")
        self.amplitudes = self.amplitudes / nrm
        return self

    def copy(self) -> "Statevector":
        return Statevector(self.n_qubits, self.amplitudes.copy())


@lru_cache(maxsize=4096)
def _pair_indices(n: int, target: int, controls: tuple) -> tuple:
    idx = np.arange(2 ** n)
    mask = (idx >> target) & 1 == 0
    for c in controls:
        mask &= (idx >> c) & 1 == 1
    i0 = idx[mask]
    return i0, i0 | (1 << target)


def apply_array(psi: np.ndarray, g: GateOp, n: int, matrix: np.ndarray | None = None) -> np.ndarray:
    """Apply one gate to amplitudes of shape (..., 2**n) in place and return them.

    ``matrix`` overrides the 2x2 target matrix; it may be batched with shape
    (B, 2, 2) matching a leading batch axis of ``psi``.
    """
    if max(g.qubits) >= n or min(g.qubits) < 0:
        raise IndexError(f"gate qubits {g.qubits} out of range for {n} qubits")
    m = single_qubit_matrix(g.kind.base) if matrix is None else matrix
    i0, i1 = _pair_indices(n, g.target, tuple(sorted(g.controls)))
    a0 = psi[..., i0]
    a1 = psi[..., i1]
    if m.ndim == 2:
        psi[..., i0] = m[0, 0] * a0 + m[0, 1] * a1
        psi[..., i1] = m[1, 0] * a0 + m[1, 1] * a1
    else:
        psi[..., i0] = m[:, 0, 0, None] * a0 + m[:, 0, 1, None] * a1
        psi[..., i1] = m[:, 1, 0, None] * a0 + m[:, 1, 1, None] * a1
    return psi


def apply(state: Statevector, g: GateOp) -> Statevector:
    """Return a new statevector with one gate applied."""
    out = state.copy()
    apply_array(out.amplitudes, g, state.n_qubits)
    return out


def run(circuit: Circuit, state: Statevector | None = None) -> Statevector:
    """Push a state (default |0...0>) through a circuit."""
    state = Statevector.zero(circuit.n_qubits) if state is None else state
    if state.n_qubits != circuit.n_qubits:
        raise ValueError("state and circuit qubit counts differ")
    psi = state.amplitudes.copy()
    for g in circuit.ops:
        apply_array(psi, g, circuit.n_qubits)
    return Statevector(circuit.n_qubits, psi)


def run_array(circuit: Circuit, psi: np.ndarray) -> np.ndarray:
    """Batched variant of ``run`` on raw amplitude arrays (copied)."""
    psi = np.array(psi, dtype=complex)
    for g in circuit.ops:
        apply_array(psi, g, circuit.n_qubits)
    return psi


def circuit_to_matrix(circuit: Circuit, cap: int = DEFAULT_MATRIX_CAP) -> np.ndarray:
    """Full unitary, built column by column from basis-state images."""
    if circuit.n_qubits > cap:
        raise ValueError(f"{circuit.n_qubits} qubits exceeds matrix cap {cap}")
    dim = 2 ** circuit.n_qubits
    rows = run_array(circuit, np.eye(dim, dtype=complex))  # row j = image of |j>
    return rows.T


def embed_matrix(u: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    """Kronecker-embed a k-qubit matrix acting on ``qubits`` (little-endian) into n qubits.

    Slow reference path used by tests and the formal matrix conversion.
    """
    k = len(qubits)
    dim = 2 ** n
    out = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        sub_in = sum(((col >> q) & 1) << i for i, q in enumerate(qubits))
        base = col & ~sum(1 << q for q in qubits)
        for sub_out in range(2 ** k):
            amp = u[sub_out, sub_in]
            if amp == 0:
                continue
            row = base | sum(((sub_out >> i) & 1) << q for i, q in enumerate(qubits))
            out[row, col] += amp
    return out


def formal_matrix(circuit: Circuit) -> np.ndarray:
    """Product of Kronecker-embedded gate matrices (the slow 'formal' route)."""
    dim = 2 ** circuit.n_qubits
    m = np.eye(dim, dtype=complex)
    for g in circuit.ops:
        full = gate_matrix(g.kind, len(g.controls))
        m = embed_matrix(full, list(g.controls) + [g.target], circuit.n_qubits) @ m
    return m


def ancilla_expectation(state: Statevector, ancilla: int) -> float:
    """Exact <sigma_z> of one qubit from the full state (partial trace, no sampling)."""
    n = state.n_qubits
    if not 0 <= ancilla < n:
        raise IndexError("ancilla index out of range")
    probs = np.abs(state.amplitudes) ** 2
    bit = (np.arange(2 ** n) >> ancilla) & 1
    return float(probs[bit == 0].sum() - probs[bit == 1].sum())


def is_unitary(m: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    return bool(np.allclose(m @ m.conj().T, np.eye(m.shape[0]), atol=tol))
