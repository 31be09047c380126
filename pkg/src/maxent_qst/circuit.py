"""Statevector simulation of gate lists and the layered rotation ansatz.

The simulator is dense and exact.  States are ``(2**w,)`` complex arrays with
qubit 0 as the least-significant index bit.  Internally states are reshaped to
``(batch, 2, 2, ..., 2)`` tensors; qubit ``q`` lives on tensor axis
``1 + (w - 1 - q)``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, ParameterCountError
from .qmath import num_qubits_of, partial_trace

ROTATION_KINDS = ("RX", "RY", "RZ")
FIXED_1Q_KINDS = ("H", "X", "Y", "Z")
TWO_QUBIT_KINDS = ("CNOT", "CZ")

_SQRT2_INV = 1.0 / np.sqrt(2.0)
_FIXED_1Q = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT2_INV,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class Gate:
    """One circuit operation.

    ``control`` is set for two-qubit kinds only; ``angle`` (radians) for
    rotation kinds only.
    """

    kind: str
    target: int
    control: int | None = None
    angle: float | None = None

    def __post_init__(self):
        if self.kind in ROTATION_KINDS:
            if self.angle is None:
                raise ValueError(f"{self.kind} requires an angle")
            if self.control is not None:
                raise ValueError(f"{self.kind} takes no control qubit")
        elif self.kind in FIXED_1Q_KINDS:
            if self.angle is not None or self.control is not None:
                raise ValueError(f"{self.kind} takes no angle or control")
        elif self.kind in TWO_QUBIT_KINDS:
            if self.control is None:
                raise ValueError(f"{self.kind} requires a control qubit")
            if self.angle is not None:
                raise ValueError(f"{self.kind} takes no angle")
            if self.control == self.target:
                raise ValueError("control and target must differ")
        else:
            raise ValueError(f"unknown gate kind {self.kind!r}")


def rotation_matrix(kind: str, angle: float) -> np.ndarray:
    """Single-qubit rotation matrix; RY(theta) is the real convention
    [[cos t/2, -sin t/2], [sin t/2, cos t/2]]."""
    half = angle / 2.0
    c, s = np.cos(half), np.sin(half)
    if kind == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if kind == "RY":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind == "RZ":
        return np.array([[np.exp(-1j * half), 0], [0, np.exp(1j * half)]])
    raise ValueError(f"not a rotation kind: {kind}")


# -- batched tensor primitives ------------------------------------------------
# All take a (B, 2, ..., 2) tensor; matrix entries may be scalars or (B,) arrays.


def _bcast(x, ndim: int):
    x = np.asarray(x)
    if x.ndim == 0:
        return x
    return x.reshape(x.shape + (1,) * (ndim - 1))


def _apply_1q(tensor: np.ndarray, axis: int, m00, m01, m10, m11) -> np.ndarray:
    t = np.moveaxis(tensor, axis, 1)
    a0, a1 = t[:, 0], t[:, 1]
    nd = a0.ndim
    out = np.empty_like(t)
    out[:, 0] = _bcast(m00, nd) * a0 + _bcast(m01, nd) * a1
    out[:, 1] = _bcast(m10, nd) * a0 + _bcast(m11, nd) * a1
    return np.moveaxis(out, 1, axis)


def _apply_cnot(tensor: np.ndarray, ax_control: int, ax_target: int) -> np.ndarray:
    t = np.moveaxis(tensor, (ax_control, ax_target), (1, 2))
    out = t.copy()
    out[:, 1, 0] = t[:, 1, 1]
    out[:, 1, 1] = t[:, 1, 0]
    return np.moveaxis(out, (1, 2), (ax_control, ax_target))


def _apply_cz(tensor: np.ndarray, ax_control: int, ax_target: int) -> np.ndarray:
    t = np.moveaxis(tensor, (ax_control, ax_target), (1, 2))
    out = t.copy()
    out[:, 1, 1] = -t[:, 1, 1]
    return np.moveaxis(out, (1, 2), (ax_control, ax_target))


def _axis(width: int, qubit: int) -> int:
    if qubit < 0 or qubit >= width:
        raise IndexError(f"qubit {qubit} out of range for width {width}")
    return 1 + (width - 1 - qubit)


def apply_gate(psi: np.ndarray, gate: Gate) -> np.ndarray:
    """Apply one gate to a statevector, returning a new array."""
    psi = np.asarray(psi, dtype=complex)
    w = num_qubits_of(psi.size)
    tensor = psi.reshape((1,) + (2,) * w)
    ax_t = _axis(w, gate.target)
    if gate.kind in FIXED_1Q_KINDS:
        m = _FIXED_1Q[gate.kind]
        tensor = _apply_1q(tensor, ax_t, m[0, 0], m[0, 1], m[1, 0], m[1, 1])
    elif gate.kind in ROTATION_KINDS:
        m = rotation_matrix(gate.kind, gate.angle)
        tensor = _apply_1q(tensor, ax_t, m[0, 0], m[0, 1], m[1, 0], m[1, 1])
    else:
        ax_c = _axis(w, gate.control)
        if gate.kind == "CNOT":
            tensor = _apply_cnot(tensor, ax_c, ax_t)
        else:
            tensor = _apply_cz(tensor, ax_c, ax_t)
    return tensor.reshape(-1)


def run_circuit(gates: list[Gate], width: int) -> np.ndarray:
    """Apply gates in list order to |0...0> on ``width`` qubits."""
    for g in gates:
        _axis(width, g.target)
        if g.control is not None:
            _axis(width, g.control)
    psi = np.zeros(2**width, dtype=complex)
    psi[0] = 1.0
    for g in gates:
        psi = apply_gate(psi, g)
    return psi


# -- ansatz -------------------------------------------------------------------


@dataclass(frozen=True)
class AnsatzCircuit:
    """Hardware-efficient layered ansatz on ``system + ancilla`` qubits.

    Structure: ``depth`` repetitions of [rotation layer on every qubit,
    CNOT chain q0->q1->...], then one trailing rotation layer.  Ancillas are
    the highest-indexed qubits and join the chain like any other qubit.
    ``rotation_kind`` is "RY" (real states) or "RY+RZ"; an RY+RZ layer applies
    RY then RZ on each qubit, parameters ordered [all RY angles, all RZ
    angles] per layer, qubit-ascending.
    """

    system_qubits: int
    ancilla_qubits: int = 1
    depth: int = 2
    rotation_kind: str = "RY"
    parameters: np.ndarray | None = None

    def __post_init__(self):
        if self.system_qubits < 1 or self.ancilla_qubits < 0 or self.depth < 0:
            raise ValueError("invalid ansatz geometry")
        if self.rotation_kind not in ("RY", "RY+RZ"):
            raise ValueError(f"unknown rotation kind {self.rotation_kind!r}")
        if self.parameters is not None:
            p = np.asarray(self.parameters, dtype=float).reshape(-1)
            object.__setattr__(self, "parameters", p)
            if p.size != self.parameter_count:
                raise ParameterCountError(
                    f"expected {self.parameter_count} parameters, got {p.size}"
                )

    @property
    def width(self) -> int:
        return self.system_qubits + self.ancilla_qubits

    @property
    def parameter_count(self) -> int:
        per_layer = self.width * (2 if self.rotation_kind == "RY+RZ" else 1)
        return (self.depth + 1) * per_layer

    def with_parameters(self, parameters: np.ndarray) -> "AnsatzCircuit":
        return dataclasses.replace(self, parameters=parameters)

    def gates(self) -> list[Gate]:
        """Explicit gate list (rotations bound to the stored parameters)."""
        if self.parameters is None:
            raise ParameterCountError("ansatz has no bound parameters")
        w = self.width
        gates: list[Gate] = []
        idx = 0
        for layer in range(self.depth + 1):
            for q in range(w):
                gates.append(Gate("RY", q, angle=float(self.parameters[idx])))
                idx += 1
            if self.rotation_kind == "RY+RZ":
                for q in range(w):
                    gates.append(Gate("RZ", q, angle=float(self.parameters[idx])))
                    idx += 1
            if layer < self.depth:
                for q in range(w - 1):
                    gates.append(Gate("CNOT", target=q + 1, control=q))
        return gates


def ansatz_states_batch(template: AnsatzCircuit, params: np.ndarray) -> np.ndarray:
    """Statevectors for a ``(B, P)`` batch of parameter vectors.

    Vectorized over the batch; this is the workhorse behind every
    finite-difference gradient sweep.
    """
    params = np.asarray(params, dtype=float)
    if params.ndim == 1:
        params = params[None, :]
    B, P = params.shape
    if P != template.parameter_count:
        raise ParameterCountError(f"expected {template.parameter_count} parameters, got {P}")
    w = template.width
    tensor = np.zeros((B,) + (2,) * w, dtype=complex)
    tensor[(slice(None),) + (0,) * w] = 1.0
    idx = 0
    for layer in range(template.depth + 1):
        for q in range(w):
            half = params[:, idx] / 2.0
            c, s = np.cos(half), np.sin(half)
            tensor = _apply_1q(tensor, _axis(w, q), c, -s, s, c)
            idx += 1
        if template.rotation_kind == "RY+RZ":
            for q in range(w):
                half = params[:, idx] / 2.0
                ph = np.exp(-1j * half)
                tensor = _apply_1q(tensor, _axis(w, q), ph, 0.0, 0.0, ph.conj())
                idx += 1
        if layer < template.depth:
            for q in range(w - 1):
                tensor = _apply_cnot(tensor, _axis(w, q), _axis(w, q + 1))
    return tensor.reshape(B, 2**w)


def ansatz_densities_batch(template: AnsatzCircuit, params: np.ndarray) -> np.ndarray:
    """System-register density matrices, ancillas traced out, for a batch."""
    states = ansatz_states_batch(template, params)
    n, m = template.system_qubits, template.ancilla_qubits
    psi = states.reshape(states.shape[0], 2**m, 2**n)
    return np.einsum("bax,bay->bxy", psi, psi.conj())


def ansatz_state(a: AnsatzCircuit) -> np.ndarray:
    """Statevector of the full (system + ancilla) register."""
    if a.parameters is None:
        raise ParameterCountError("ansatz has no bound parameters")
    return ansatz_states_batch(a, a.parameters[None, :])[0]


def ansatz_density(a: AnsatzCircuit) -> np.ndarray:
    """System-register density matrix with the ancilla qubits traced out."""
    psi = ansatz_state(a)
    rho_full = np.outer(psi, psi.conj())
    if a.ancilla_qubits == 0:
        return rho_full
    return partial_trace(rho_full, range(a.system_qubits, a.width))
