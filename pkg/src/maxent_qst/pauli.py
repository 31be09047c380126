"""Informationally complete operator sets, Pauli decompositions, expectations.

Pauli letter strings are written most-significant qubit first: in ``"ZX"`` the
``Z`` acts on qubit 1 and the ``X`` on qubit 0, so the matrix is
``kron(Z, X)``.  Basis kets are 0-indexed; the projector onto basis state 0 of
a 2-qubit register is ``|00><00|``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatchError,
    NotHermitianError,
    NotPowerOfTwoError,
)
from .qmath import is_hermitian, num_qubits_of

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

PROJECTOR = "projector"
SYMMETRIC_COHERENCE = "symmetric-coherence"
ANTISYMMETRIC_COHERENCE = "antisymmetric-coherence"
CUSTOM = "custom"

# Decomposition coefficients below this are numerical dust and dropped.
PRUNE_THRESHOLD = 1e-12


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis with a real coefficient."""

    letters: str
    coefficient: float = 1.0

    def __post_init__(self):
        if not self.letters or any(c not in PAULI_MATRICES for c in self.letters):
            raise ValueError(f"letters must be a nonempty string over IXYZ, got {self.letters!r}")

    @property
    def num_qubits(self) -> int:
        return len(self.letters)


@dataclass(frozen=True)
class HermitianOperator:
    """Dense Hermitian matrix with a label and a structural kind."""

    label: str
    matrix: np.ndarray
    kind: str = CUSTOM

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        if not is_hermitian(m):
            raise NotHermitianError(f"operator {self.label!r} is not Hermitian within 1e-10")


@dataclass(frozen=True)
class MeasurementRecord:
    """Expectation values of an ordered operator list."""

    operator_labels: tuple[str, ...]
    expectation_values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "operator_labels", tuple(self.operator_labels))
        vals = np.asarray(self.expectation_values, dtype=float)
        object.__setattr__(self, "expectation_values", vals)
        if len(self.operator_labels) != vals.size:
            raise DimensionMismatchError("label/value counts differ")

    def to_dict(self) -> dict:
        return {
            "operator_labels": list(self.operator_labels),
            "expectation_values": [float(v) for v in self.expectation_values],
        }


def pauli_matrix(p: PauliString) -> np.ndarray:
    """Dense matrix of a Pauli string (coefficient included)."""
    m = PAULI_MATRICES[p.letters[0]]
    for c in p.letters[1:]:
        m = np.kron(m, PAULI_MATRICES[c])
    return p.coefficient * m


def pauli_terms_to_matrix(terms: list[PauliString]) -> np.ndarray:
    if not terms:
        raise ValueError("empty term list")
    n = terms[0].num_qubits
    if any(t.num_qubits != n for t in terms):
        raise DimensionMismatchError("terms act on differing qubit counts")
    total = np.zeros((2**n, 2**n), dtype=complex)
    for t in terms:
        total += pauli_matrix(t)
    return total


def ic_set(num_qubits: int, include_antisymmetric: bool = True) -> list[HermitianOperator]:
    """Informationally complete Hermitian operators for an n-qubit system.

    Returns the ``d`` basis projectors ``|i><i|``, then the symmetric
    coherences ``|i><j| + |j><i|`` for ``i < j``, then (if flagged) the
    antisymmetric coherences ``-i(|i><j| - |j><i|)``; ``d**2`` operators in
    total when flagged, ``d(d+1)/2`` otherwise.  Labels use 1-based basis
    indices (``P_1``, ``S_1_2``, ``A_1_2``).
    """
    if num_qubits < 1:
        raise ValueError("num_qubits must be >= 1")
    d = 2**num_qubits
    ops: list[HermitianOperator] = []
    for i in range(d):
        m = np.zeros((d, d), dtype=complex)
        m[i, i] = 1.0
        ops.append(HermitianOperator(f"P_{i + 1}", m, PROJECTOR))
    for i, j in itertools.combinations(range(d), 2):
        m = np.zeros((d, d), dtype=complex)
        m[i, j] = 1.0
        m[j, i] = 1.0
        ops.append(HermitianOperator(f"S_{i + 1}_{j + 1}", m, SYMMETRIC_COHERENCE))
    if include_antisymmetric:
        for i, j in itertools.combinations(range(d), 2):
            m = np.zeros((d, d), dtype=complex)
            m[i, j] = -1j
            m[j, i] = 1j
            ops.append(HermitianOperator(f"A_{i + 1}_{j + 1}", m, ANTISYMMETRIC_COHERENCE))
    return ops


def pauli_decompose(op: HermitianOperator | np.ndarray) -> list[PauliString]:
    """Expand a Hermitian matrix in the Pauli-string basis.

    Coefficients are ``tr(P @ M) / 2**n``; strings with |coefficient| below
    the prune threshold are dropped.  The coefficients of a Hermitian matrix
    are real.
    """
    m = op.matrix if isinstance(op, HermitianOperator) else np.asarray(op, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] & (m.shape[0] - 1):
        raise NotPowerOfTwoError(f"matrix shape {m.shape} is not a square power of two")
    if not is_hermitian(m):
        raise NotHermitianError("matrix is not Hermitian within 1e-10")
    n = num_qubits_of(m.shape[0])
    terms = []
    for letters in itertools.product("IXYZ", repeat=n):
        p = PauliString("".join(letters))
        c = np.trace(pauli_matrix(p) @ m) / 2**n
        assert abs(c.imag) < 1e-10
        if abs(c.real) > PRUNE_THRESHOLD:
            terms.append(PauliString(p.letters, float(c.real)))
    return terms


def expectation(rho: np.ndarray, op: HermitianOperator | np.ndarray) -> float:
    """``Re tr(rho @ M)``; the imaginary part must be numerical noise."""
    m = op.matrix if isinstance(op, HermitianOperator) else np.asarray(op)
    rho = np.asarray(rho)
    if rho.shape != m.shape:
        raise DimensionMismatchError(f"state {rho.shape} vs operator {m.shape}")
    val = np.einsum("ij,ji->", rho, m)
    assert abs(val.imag) <= 1e-9, f"expectation has imaginary part {val.imag}"
    return float(val.real)


def expectations_stack(rho: np.ndarray, op_stack: np.ndarray) -> np.ndarray:
    """Expectations of a stacked ``(L, d, d)`` operator array in one sweep."""
    return np.real(np.einsum("kij,ji->k", op_stack, rho))


def measure_true_state(psi: np.ndarray, ops: list[HermitianOperator]) -> MeasurementRecord:
    """Exact (noise-free) expectation values of a pure state."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    d = psi.size
    if any(o.matrix.shape[0] != d for o in ops):
        raise DimensionMismatchError("operator dimension does not match the state")
    stack = np.stack([o.matrix for o in ops])
    vals = np.real(np.einsum("i,kij,j->k", psi.conj(), stack, psi))
    return MeasurementRecord(tuple(o.label for o in ops), vals)


def gram_matrix(ops: list[HermitianOperator]) -> np.ndarray:
    """Hilbert-Schmidt inner products tr(A_i A_j); real for Hermitian inputs."""
    stack = np.stack([o.matrix for o in ops])
    return np.real(np.einsum("aij,bji->ab", stack, stack))


def is_informationally_complete(ops: list[HermitianOperator]) -> bool:
    """True iff the operators span the full d**2-dimensional Hermitian space."""
    d = ops[0].matrix.shape[0]
    if len(ops) < d * d:
        return False
    stack = np.stack([o.matrix for o in ops]).reshape(len(ops), -1)
    return np.linalg.matrix_rank(stack, tol=1e-10) == d * d
