"""Two-qubit channel state between the reference qubit A and R_S1.

Basis ordering is ``|00>, |01>, |10>, |11>`` with A the first factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .model import K_QUANTUM, ModelParams, Regime

# eigenvalues closer to zero than this are treated as round-off
EIG_FLOOR = 1e-12
NS_FACTOR = 2.0
LN2 = math.log(2.0)


@dataclass(frozen=True)
class ChannelState:
    rho: np.ndarray
    k_value: float | None = None


def density_from_k(k: float) -> ChannelState:
    """Large-N channel state generated by the response ``k``."""
    k = float(k)
    if not abs(k) <= 1.0 + 1e-12:
        raise DomainError(f"|K| must not exceed 1, got {k!r}")
    k2 = k * k
    rho = np.zeros((4, 4))
    rho[0, 0] = rho[3, 3] = 0.25 * (1.0 + k2)
    rho[1, 1] = rho[2, 2] = 0.25 * (1.0 - k2)
    rho[0, 3] = rho[3, 0] = 0.5 * k
    return ChannelState(rho=rho, k_value=k)


def density_batch(k) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    if np.any(np.abs(k) > 1.0 + 1e-12):
        raise DomainError("|K| must not exceed 1")
    k2 = k * k
    rho = np.zeros(k.shape + (4, 4))
    rho[..., 0, 0] = rho[..., 3, 3] = 0.25 * (1.0 + k2)
    rho[..., 1, 1] = rho[..., 2, 2] = 0.25 * (1.0 - k2)
    rho[..., 0, 3] = rho[..., 3, 0] = 0.5 * k
    return rho


def partial_transpose(rho: np.ndarray, subsystem: int = 0) -> np.ndarray:
    """Partial transpose of a two-qubit operator (leading axes are batched)."""
    r = np.asarray(rho).reshape(rho.shape[:-2] + (2, 2, 2, 2))
    if subsystem == 0:
        r = np.swapaxes(r, -4, -2)
    elif subsystem == 1:
        r = np.swapaxes(r, -3, -1)
    else:
        raise DomainError("subsystem must be 0 (A) or 1 (R_S1)")
    return r.reshape(rho.shape)


def pt_spectrum(k: float) -> np.ndarray:
    """Closed-form partial-transpose spectrum, sorted ascending."""
    k2 = k * k
    vals = [0.25 * (1 + k2), 0.25 * (1 + k2), 0.25 * (1 - k2) + 0.5 * k, 0.25 * (1 - k2) - 0.5 * k]
    return np.sort(np.array(vals))


def _negativity_from_eigs(eigs: np.ndarray) -> np.ndarray:
    neg = np.where(eigs < -EIG_FLOOR, -eigs, 0.0)
    return neg.sum(axis=-1)


def negativity(state: ChannelState, subsystem: int = 0) -> float:
    """Sum of the magnitudes of negative partial-transpose eigenvalues."""
    rho = np.asarray(state.rho)
    pt = partial_transpose(rho, subsystem)
    eigs = np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))
    return float(_negativity_from_eigs(eigs))


def _entropy(eigs: np.ndarray) -> np.ndarray:
    p = np.clip(eigs, 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, -p * np.log(np.where(p > 0, p, 1.0)), 0.0)
    return terms.sum(axis=-1)


def von_neumann_entropy(rho: np.ndarray) -> float:
    return float(_entropy(np.linalg.eigvalsh(rho)))


def _marginals(rho: np.ndarray):
    r = rho.reshape(rho.shape[:-2] + (2, 2, 2, 2))
    rho_a = np.einsum("...ijkj->...ik", r)
    rho_b = np.einsum("...ijil->...jl", r)
    return rho_a, rho_b


def mutual_information(state: ChannelState) -> float:
    """``S_A + S_R - S_AR`` in nats."""
    rho = np.asarray(state.rho)
    rho_a, rho_b = _marginals(rho)
    mi = (
        _entropy(np.linalg.eigvalsh(rho_a))
        + _entropy(np.linalg.eigvalsh(rho_b))
        - _entropy(np.linalg.eigvalsh(rho))
    )
    return float(max(mi, 0.0))


def metrics_from_k(k) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised ``(negativity, mutual information in nats)`` for many ``k``."""
    rho = density_batch(k)
    pt = partial_transpose(rho, 0)
    neg = _negativity_from_eigs(np.linalg.eigvalsh(pt))
    rho_a, rho_b = _marginals(rho)
    mi = (
        _entropy(np.linalg.eigvalsh(rho_a))
        + _entropy(np.linalg.eigvalsh(rho_b))
        - _entropy(np.linalg.eigvalsh(rho))
    )
    return neg, np.clip(mi, 0.0, None)


def classify(k_max: float, params: ModelParams, ns_factor: float = NS_FACTOR) -> Regime:
    """Regime label from the peak response.

    Quantum when the channel state carries negativity (``|K| > sqrt 2 - 1``
    beyond round-off), no-signal when the peak is within ``ns_factor * |g|``,
    classical otherwise.  The no-signal cutoff is a heuristic: only its
    ``O(g)`` scaling is fixed.
    """
    if not 0.0 <= k_max <= 1.0 + 1e-12:
        raise DomainError(f"k_max must lie in [0, 1], got {k_max!r}")
    if negativity(density_from_k(min(k_max, 1.0))) > 0.0:
        return Regime.QUANTUM
    if k_max <= ns_factor * abs(params.g):
        return Regime.NO_SIGNAL
    return Regime.CLASSICAL


__all__ = [
    "ChannelState",
    "K_QUANTUM",
    "classify",
    "density_from_k",
    "metrics_from_k",
    "mutual_information",
    "negativity",
    "partial_transpose",
    "pt_spectrum",
]
