"""Dense complex linear algebra and quantum-information functionals.

Conventions used throughout the package:

* States and operators are plain ``numpy`` arrays (``complex128``).
* Qubit 0 is the least-significant bit of the basis-state index, so the
  amplitude of ``|q_{n-1} ... q_1 q_0>`` sits at index ``sum(q_i * 2**i)``.
* A density matrix on ``n`` qubits is a ``(2**n, 2**n)`` Hermitian,
  unit-trace, positive semidefinite array.
"""

from __future__ import annotations

from typing import Callable, Iterable

import numpy as np

from .errors import (
    DimensionMismatchError,
    MathDomainError,
    NotHermitianError,
)

HERMITIAN_ATOL = 1e-10
# Variational states sit at the boundary of the PSD cone; eigenvalues this far
# below zero are treated as numerical noise.
EIGENVALUE_CLIP = 1e-8


def is_hermitian(a: np.ndarray, atol: float = HERMITIAN_ATOL) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and np.abs(a - a.conj().T).max() <= atol


def _require_hermitian(a: np.ndarray, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if not is_hermitian(a, atol):
        raise NotHermitianError(f"matrix of shape {a.shape} is not Hermitian within {atol}")
    return a


def num_qubits_of(dim: int) -> int:
    """Number of qubits for a dimension that must be a power of two."""
    n = int(dim).bit_length() - 1
    if dim <= 0 or 2**n != dim:
        raise DimensionMismatchError(f"dimension {dim} is not a power of two")
    return n


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; the second factor occupies the low (least-significant) bits."""
    return np.kron(np.asarray(a), np.asarray(b))


def density_from_statevector(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, psi.conj())


def check_density_matrix(rho: np.ndarray, atol: float = 1e-8) -> None:
    """Raise if ``rho`` is not Hermitian, unit-trace and PSD within tolerance."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionMismatchError(f"density matrix must be square, got {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > HERMITIAN_ATOL:
        raise NotHermitianError("density matrix is not Hermitian within 1e-10")
    tr = np.trace(rho)
    if abs(tr - 1.0) > 1e-8:
        raise ValueError(f"density matrix trace is {tr}, expected 1")
    if np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() < -atol:
        raise ValueError("density matrix has an eigenvalue below -1e-8")


def hermitian_eig(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues ascending and
    eigenvectors as columns, so ``h = V @ diag(w) @ V.conj().T``.
    """
    h = _require_hermitian(h)
    return np.linalg.eigh(h)


def matrix_function_hermitian(h: np.ndarray, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Apply a real scalar function to a Hermitian matrix through its spectrum."""
    vals, vecs = hermitian_eig(h)
    with np.errstate(all="ignore"):
        fvals = np.asarray(f(vals), dtype=float)
    if not np.all(np.isfinite(fvals)):
        raise MathDomainError(f"function undefined on eigenvalues {vals[~np.isfinite(fvals)]}")
    return (vecs * fvals) @ vecs.conj().T


def partial_trace(rho: np.ndarray, traced_qubits: Iterable[int]) -> np.ndarray:
    """Trace out the given qubits of a multi-qubit density matrix.

    Remaining qubits keep their relative order and are relabelled 0..k-1.
    """
    rho = np.asarray(rho, dtype=complex)
    n = num_qubits_of(rho.shape[0])
    traced = sorted(set(int(q) for q in traced_qubits))
    for q in traced:
        if q < 0 or q >= n:
            raise IndexError(f"qubit {q} out of range for {n}-qubit state")
    # Axis layout after reshape: row bits of qubits n-1..0, then column bits.
    tensor = rho.reshape([2] * (2 * n))
    remaining = n
    for q in reversed(traced):  # highest qubit first keeps lower axes stable
        ax = remaining - 1 - q
        tensor = np.trace(tensor, axis1=ax, axis2=ax + remaining)
        remaining -= 1
    dim = 2**remaining
    return tensor.reshape(dim, dim)


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(rho)
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.conj().T


def fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Squared Uhlmann fidelity ``(tr sqrt(sqrt(rho) sigma sqrt(rho)))**2``.

    Equals 1 iff the states coincide; reduces to ``<psi|rho|psi>`` when one
    argument is pure.
    """
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape:
        raise DimensionMismatchError(f"shape mismatch {rho.shape} vs {sigma.shape}")
    s = _psd_sqrt(rho)
    inner_vals = np.linalg.eigvalsh(s @ sigma @ s)
    f = float(np.sqrt(np.clip(inner_vals, 0.0, None)).sum() ** 2)
    return min(max(f, 0.0), 1.0)


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Half the trace norm of ``rho - sigma``."""
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape:
        raise DimensionMismatchError(f"shape mismatch {rho.shape} vs {sigma.shape}")
    return float(0.5 * np.abs(np.linalg.eigvalsh(rho - sigma)).sum())


def von_neumann_entropy(rho: np.ndarray) -> float:
    """``-tr(rho ln rho)`` with eigenvalues clipped to [0, 1] and 0*ln(0) = 0."""
    vals = np.clip(np.linalg.eigvalsh(np.asarray(rho, dtype=complex)), 0.0, 1.0)
    vals = vals[vals > 0]
    return float(max(0.0, -np.sum(vals * np.log(vals))))
