"""SO4 bricklayer trial-state circuits U(lambda_c).

A block on neighbouring qubits (a, a+1) is

    Rz(pi/2) on both, Ry(pi/2) on a+1, CNOT(a+1 -> a),
    Rz(l1) Ry(l2) Rz(l3) on a,  Rz(l4) Ry(l5) Rz(l6) on a+1,
    CNOT(a+1 -> a), Ry(-pi/2) on a+1, Rz(-pi/2) on both.

Blocks in the first layer carry only l1..l3; the rotations on a+1 are left
out entirely.  Odd layers hold blocks on (0,1), (2,3), ...; even layers on
(1,2), (3,4), ...; a qubit without a partner gets nothing.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core_sim import CNOT, Circuit, GateOp, apply_array, ry, rz

HALF_PI = np.pi / 2


@dataclass(frozen=True)
class AnsatzConfig:
    n_qubits: int
    depth: int

    def __post_init__(self):
        if self.n_qubits < 2:
            raise ValueError("ansatz needs at least two qubits")
        if self.depth < 1:
            raise ValueError("ansatz depth must be >= 1")


def layer_pairs(n_qubits: int, layer: int) -> list[tuple[int, int]]:
    """Qubit pairs touched by 1-based ``layer``."""
    start = 0 if layer % 2 == 1 else 1
    return [(a, a + 1) for a in range(start, n_qubits - 1, 2)]


def block_layout(config: AnsatzConfig) -> list[tuple[int, int, int]]:
    """(layer, a, b) for every block in application order."""
    return [(l, a, b) for l in range(1, config.depth + 1) for a, b in layer_pairs(config.n_qubits, l)]


def parameter_count(config: AnsatzConfig) -> int:
    return sum(3 if l == 1 else 6 for l, _, _ in block_layout(config))


def _block_template(a: int, b: int, first_layer: bool, offset: int) -> list:
    """(GateOp with placeholder angle, parameter index or None)."""
    t = [
        (GateOp(rz(HALF_PI), (a,)), None),
        (GateOp(rz(HALF_PI), (b,)), None),
        (GateOp(ry(HALF_PI), (b,)), None),
        (GateOp(CNOT, (a,), (b,)), None),
        (GateOp(rz(0.0), (a,)), offset),
        (GateOp(ry(0.0), (a,)), offset + 1),
        (GateOp(rz(0.0), (a,)), offset + 2),
    ]
    if not first_layer:
        t += [
            (GateOp(rz(0.0), (b,)), offset + 3),
            (GateOp(ry(0.0), (b,)), offset + 4),
            (GateOp(rz(0.0), (b,)), offset + 5),
        ]
    t += [
        (GateOp(CNOT, (a,), (b,)), None),
        (GateOp(ry(-HALF_PI), (b,)), None),
        (GateOp(rz(-HALF_PI), (a,)), None),
        (GateOp(rz(-HALF_PI), (b,)), None),
    ]
    return t


@lru_cache(maxsize=256)
def _template(config: AnsatzConfig) -> tuple:
    out, offset = [], 0
    for l, a, b in block_layout(config):
        out += _block_template(a, b, l == 1, offset)
        offset += 3 if l == 1 else 6
    return tuple(out)


def _with_angle(g: GateOp, theta: float) -> GateOp:
    kind = ry(theta) if g.kind.name == "Ry" else rz(theta)
    return GateOp(kind, g.targets, g.controls)


def so4_block(params, a: int = 0, b: int = 1, n_qubits: int = 2) -> Circuit:
    """One SO4 block; 3 parameters give the reduced first-layer form."""
    params = np.asarray(params, dtype=float).ravel()
    if params.size not in (3, 6):
        raise ValueError(f"SO4 block takes 3 or 6 parameters, got {params.size}")
    circ = Circuit(n_qubits)
    for g, k in _block_template(a, b, params.size == 3, 0):
        circ.append(g if k is None else _with_angle(g, params[k]))
    return circ


def build_ansatz(config: AnsatzConfig, params) -> Circuit:
    params = np.asarray(params, dtype=float).ravel()
    if params.size != parameter_count(config):
        raise ValueError(f"expected {parameter_count(config)} parameters, got {params.size}")
    circ = Circuit(config.n_qubits)
    for g, k in _template(config):
        circ.append(g if k is None else _with_angle(g, params[k]))
    return circ


def _batched_rotation(name: str, theta: np.ndarray) -> np.ndarray:
    m = np.zeros((theta.size, 2, 2), dtype=complex)
    h = theta / 2
    if name == "Ry":
        c, s = np.cos(h), np.sin(h)
        m[:, 0, 0], m[:, 0, 1], m[:, 1, 0], m[:, 1, 1] = c, -s, s, c
    else:
        m[:, 0, 0], m[:, 1, 1] = np.exp(-1j * h), np.exp(1j * h)
    return m


def ansatz_states(config: AnsatzConfig, params) -> np.ndarray:
    """U(lambda)|0> for a batch of parameter vectors.

    ``params`` has shape (c,) or (B, c); the result has shape (2**n,) or
    (B, 2**n) accordingly.  Equivalent to running ``build_ansatz`` per row.
    """
    params = np.asarray(params, dtype=float)
    single = params.ndim == 1
    params = np.atleast_2d(params)
    if params.shape[1] != parameter_count(config):
        raise ValueError(f"expected {parameter_count(config)} parameters, got {params.shape[1]}")
    n = config.n_qubits
    psi = np.zeros((params.shape[0], 2 ** n), dtype=complex)
    psi[:, 0] = 1.0
    for g, k in _template(config):
        if k is None:
            apply_array(psi, g, n)
        else:
            apply_array(psi, g, n, _batched_rotation(g.kind.name, params[:, k]))
    return psi[0] if single else psi
