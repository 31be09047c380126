"""Inner optimization level: variational Gibbs state preparation.

Given a Hamiltonian H and inverse temperature beta, the ansatz parameters are
tuned to minimize the truncated free energy

    F_K(theta) = tr(rho(theta) H) - (1/beta) * S_K(rho(theta))

where S_K is the order-K Taylor polynomial of the von Neumann entropy about
the identity, a function of the moments tr(rho^k) only.  ``exact_gibbs`` is
the circuit-free oracle the variational result is checked against.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

from .circuit import AnsatzCircuit, ansatz_densities_batch, ansatz_density
from .errors import DimensionMismatchError, NotHermitianError
from .optim import Adam
from .qmath import hermitian_eig

# Plateau learning-rate decay: halve after this many iterations without
# improvement, never below floor_ratio * initial rate.
_DECAY_PATIENCE = 15
_DECAY_FACTOR = 0.5
_LR_FLOOR_RATIO = 1e-3
# Rows per chunk in batched loss sweeps; bounds peak memory for big batches.
_CHUNK_ROWS = 8192

_TWO_PI = 2.0 * np.pi


@dataclass
class GibbsConfig:
    """Knobs of the inner loop; defaults are tuned for 1-4 qubit systems."""

    beta: float = 1.0
    truncation_order: int = 4
    max_iterations: int = 300
    learning_rate: float = 0.05
    gradient_step: float = 1e-3
    convergence_tol: float = 1e-7
    stationarity_tol: float = 1e-3

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.truncation_order < 1:
            raise ValueError("truncation order must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if not 0 < self.gradient_step <= 1e-1:
            raise ValueError("gradient step must be in (0, 1e-1]")


@dataclass
class GibbsResult:
    optimal_parameters: np.ndarray
    prepared_state: np.ndarray
    final_loss: float
    loss_history: list[float] = field(repr=False)
    iterations_used: int = 0


def exact_gibbs(h: np.ndarray, beta: float) -> np.ndarray:
    """``exp(-beta H) / tr(exp(-beta H))`` via eigendecomposition.

    The exponent is shifted by the smallest eigenvalue before exponentiation;
    the shift cancels in the ratio but keeps large beta*H from overflowing.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    vals, vecs = hermitian_eig(h)
    w = np.exp(-beta * (vals - vals[0]))
    return (vecs * (w / w.sum())) @ vecs.conj().T


def log_partition_function(h: np.ndarray, beta: float) -> float:
    """``ln tr(exp(-beta H))``, overflow-safe."""
    vals, _ = hermitian_eig(h)
    shifted = -beta * (vals - vals[0])
    return float(np.log(np.exp(shifted).sum()) - beta * vals[0])


def state_moments(rho: np.ndarray, max_power: int) -> list[float]:
    """``(tr rho^2, ..., tr rho^max_power)`` by direct matrix powers."""
    if max_power < 2:
        raise ValueError("max_power must be >= 2")
    rho = np.asarray(rho, dtype=complex)
    out = []
    p = rho
    for _ in range(2, max_power + 1):
        p = p @ rho
        out.append(float(np.trace(p).real))
    return out


@lru_cache(maxsize=None)
def _entropy_weights(order: int) -> np.ndarray:
    """Coefficients w with S_K = w[0] + sum_j w[j] * tr(rho^(j+1)), j=1..K.

    Derived from S_K = -sum_{k=1..K} ((-1)^(k-1)/k) tr(rho (rho-I)^k) by
    binomial expansion; w[0] is the harmonic number H_K.
    """
    w = np.zeros(order + 1)
    w[0] = sum(1.0 / k for k in range(1, order + 1))
    for j in range(1, order + 1):
        w[j] = (-1) ** j * sum(comb(k, j) / k for k in range(j, order + 1))
    return w


def truncated_entropy(rho: np.ndarray, order: int) -> float:
    """Order-K Taylor polynomial of the von Neumann entropy.

    Exactly zero for projector-valued (pure) states at every order.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    w = _entropy_weights(order)
    moments = state_moments(rho, order + 1)
    return float(w[0] + np.dot(w[1:], moments))


def _entropy_from_density_batch(rho: np.ndarray, order: int) -> np.ndarray:
    """Truncated entropy of a ``(B, d, d)`` density batch."""
    w = _entropy_weights(order)
    s = np.full(rho.shape[0], w[0])
    p = rho
    for j in range(1, order + 1):
        p = p @ rho
        s = s + w[j] * np.einsum("bii->b", p).real
    return s


def _free_energy_of_densities(rho: np.ndarray, h: np.ndarray, cfg: GibbsConfig) -> np.ndarray:
    energy = np.einsum("bij,ji->b", rho, h).real
    entropy = _entropy_from_density_batch(rho, cfg.truncation_order)
    return energy - entropy / cfg.beta


def _loss_batch(template: AnsatzCircuit, params: np.ndarray, h: np.ndarray,
                cfg: GibbsConfig) -> np.ndarray:
    """Truncated free energy for a ``(B, P)`` parameter batch, shared H."""
    out = np.empty(params.shape[0])
    for lo in range(0, params.shape[0], _CHUNK_ROWS):
        chunk = params[lo:lo + _CHUNK_ROWS]
        rho = ansatz_densities_batch(template, chunk)
        out[lo:lo + _CHUNK_ROWS] = _free_energy_of_densities(rho, h, cfg)
    return out


def free_energy_loss(a: AnsatzCircuit, h: np.ndarray, cfg: GibbsConfig) -> float:
    """``tr(rho(theta) H) - S_K(rho(theta)) / beta`` for a bound ansatz."""
    h = np.asarray(h, dtype=complex)
    if h.shape != (2**a.system_qubits,) * 2:
        raise DimensionMismatchError(
            f"hamiltonian shape {h.shape} does not match {a.system_qubits} system qubits"
        )
    return float(_loss_batch(a, a.parameters[None, :], h, cfg)[0])


def _fd_gradient_batch(template: AnsatzCircuit, params: np.ndarray, h: np.ndarray,
                       cfg: GibbsConfig) -> np.ndarray:
    """Central-difference gradients for a ``(B, P)`` batch, shared H."""
    B, P = params.shape
    offsets = cfg.gradient_step * np.eye(P)
    probes = np.concatenate(
        [params[:, None, :] + offsets[None], params[:, None, :] - offsets[None]], axis=1
    ).reshape(B * 2 * P, P)
    vals = _loss_batch(template, probes, h, cfg).reshape(B, 2 * P)
    return (vals[:, :P] - vals[:, P:]) / (2.0 * cfg.gradient_step)


def inner_optimize(
    h: np.ndarray,
    cfg: GibbsConfig,
    template: AnsatzCircuit,
    initial_parameters: np.ndarray | None = None,
    seed: int = 0,
) -> GibbsResult:
    """Minimize the truncated free energy over the ansatz parameters.

    Adam with central finite-difference gradients and plateau learning-rate
    decay.  Stops when the gradient sup-norm falls below ``stationarity_tol``
    (so a warm restart at a converged point exits immediately), when the loss
    change stays below ``convergence_tol`` for 10 consecutive iterations, or
    at ``max_iterations``.  The loss history is recorded as-is and is not
    guaranteed monotone.
    """
    h = np.asarray(h, dtype=complex)
    dim = 2**template.system_qubits
    if h.shape != (dim, dim):
        raise DimensionMismatchError(
            f"hamiltonian shape {h.shape} does not match {template.system_qubits} system qubits"
        )
    if np.abs(h - h.conj().T).max() > 1e-10:
        raise NotHermitianError("hamiltonian is not Hermitian within 1e-10")

    P = template.parameter_count
    if initial_parameters is not None:
        theta = np.asarray(initial_parameters, dtype=float).reshape(-1).copy()
        if theta.size != P:
            raise DimensionMismatchError(f"expected {P} initial parameters, got {theta.size}")
    else:
        theta = np.random.default_rng(seed).uniform(0.0, _TWO_PI, P)

    loss = float(_loss_batch(template, theta[None, :], h, cfg)[0])
    history = [loss]
    adam = Adam(cfg.learning_rate)
    lr = cfg.learning_rate
    lr_floor = cfg.learning_rate * _LR_FLOOR_RATIO
    best_loss = loss
    stale = 0
    flat_streak = 0
    for _ in range(cfg.max_iterations):
        grad = _fd_gradient_batch(template, theta[None, :], h, cfg)[0]
        if np.abs(grad).max() < cfg.stationarity_tol:
            break
        adam.learning_rate = lr
        theta = adam.step(theta, grad)
        new_loss = float(_loss_batch(template, theta[None, :], h, cfg)[0])
        history.append(new_loss)
        if new_loss < best_loss - cfg.convergence_tol:
            best_loss = new_loss
            stale = 0
        else:
            stale += 1
            if stale >= _DECAY_PATIENCE:
                lr = max(lr * _DECAY_FACTOR, lr_floor)
                stale = 0
        flat_streak = flat_streak + 1 if abs(new_loss - loss) < cfg.convergence_tol else 0
        loss = new_loss
        if flat_streak >= 10:
            break
    rho = ansatz_density(template.with_parameters(theta))
    return GibbsResult(theta, rho, history[-1], history, iterations_used=len(history) - 1)


def refine_batch(
    template: AnsatzCircuit,
    thetas: np.ndarray,
    h_batch: np.ndarray,
    cfg: GibbsConfig,
    iterations: int,
    learning_rate: float,
) -> np.ndarray:
    """Warm-started Adam refinement of B independent Gibbs problems at once.

    ``thetas`` is ``(B, P)`` and ``h_batch`` is ``(B, d, d)``; problem b is
    optimized against its own Hamiltonian.  Runs a fixed iteration count (the
    callers warm-start from a converged neighbour, so a short budget tracks
    the shifted optimum well).
    """
    thetas = np.array(thetas, dtype=float)
    B, P = thetas.shape
    offsets = cfg.gradient_step * np.eye(P)
    adam = Adam(learning_rate)
    rows = max(1, _CHUNK_ROWS // (2 * P))  # problems per chunk
    for _ in range(iterations):
        grads = np.empty((B, P))
        for lo in range(0, B, rows):
            th = thetas[lo:lo + rows]
            probes = np.concatenate(
                [th[:, None, :] + offsets[None], th[:, None, :] - offsets[None]], axis=1
            )
            b = th.shape[0]
            rho = ansatz_densities_batch(template, probes.reshape(b * 2 * P, P))
            rho = rho.reshape(b, 2 * P, *rho.shape[1:])
            energy = np.einsum("bpij,bji->bp", rho, h_batch[lo:lo + rows]).real
            entropy = _entropy_from_density_batch(
                rho.reshape(b * 2 * P, *rho.shape[2:]), cfg.truncation_order
            ).reshape(b, 2 * P)
            vals = energy - entropy / cfg.beta
            grads[lo:lo + rows] = (vals[:, :P] - vals[:, P:]) / (2.0 * cfg.gradient_step)
        thetas = adam.step(thetas, grads)
    return thetas
