"""Shannon entropy primitives and entropic uncertainty of observables (nats)."""

from __future__ import annotations

import math

import numpy as np

from .observables import OperatorSet, SpectralObservable
from .qstate import DensityMatrix

PROB_FLOOR = 1e-15
NEG_TOL = 1e-12
SUM_TOL = 1e-9
LN2 = math.log(2)


class DistributionError(ValueError):
    pass


def f_func(x):
    """``-x ln x`` with ``F(0) = 0``; probabilities below ``PROB_FLOOR`` count as 0."""
    x = np.asarray(x, dtype=float)
    safe = np.where(x > PROB_FLOOR, x, 1.0)
    out = np.where(x > PROB_FLOOR, -safe * np.log(safe), 0.0)
    return float(out) if out.ndim == 0 else out


def binary_entropy(x):
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    out = f_func(x) + f_func(1.0 - x)
    return float(out) if np.ndim(out) == 0 else out


def clean_distribution(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if np.any(p < -NEG_TOL):
        raise DistributionError(f"negative probability {p.min():.3e}")
    if abs(p.sum() - 1.0) > SUM_TOL:
        raise DistributionError(f"probabilities sum to {p.sum():.12f}")
    return np.clip(p, 0.0, 1.0)


def shannon(p) -> float:
    return float(np.sum(f_func(clean_distribution(p))))


def outcome_probabilities(obs: SpectralObservable, rho: DensityMatrix) -> np.ndarray:
    """``P_k = Tr(X_k rho)`` for each eigenprojector of ``obs``."""
    if obs.dim != rho.dim:
        raise DistributionError(f"dimension mismatch: observable {obs.dim}, state {rho.dim}")
    # Tr(V V^dag rho) = sum over columns of <v|rho|v>
    return np.array(
        [np.real(np.einsum("ik,ij,jk->", b.conj(), rho.matrix, b)) for b in obs.bases]
    )


def entropic_uncertainty(obs: SpectralObservable, rho: DensityMatrix) -> float:
    return shannon(outcome_probabilities(obs, rho))


def total_uncertainty(opset: OperatorSet, rho: DensityMatrix) -> float:
    return sum(entropic_uncertainty(o, rho) for o in opset)


def ket_probabilities(obs: SpectralObservable, kets: np.ndarray) -> np.ndarray:
    """Outcome probabilities for a batch of kets (rows); shape ``(n, K)``."""
    kets = np.atleast_2d(kets)
    return np.stack(
        [np.sum(np.abs(kets @ b.conj()) ** 2, axis=1) for b in obs.bases], axis=1
    )


def total_uncertainty_kets(opset: OperatorSet, kets: np.ndarray) -> np.ndarray:
    """Vectorised total uncertainty over a batch of pure states."""
    total = 0.0
    for obs in opset:
        total = total + np.sum(f_func(np.clip(ket_probabilities(obs, kets), 0.0, 1.0)), axis=1)
    return np.asarray(total)


def operator_norm(m: np.ndarray) -> float:
    return float(np.linalg.svd(m, compute_uv=False)[0])


def pair_bound(a: SpectralObservable, b: SpectralObservable) -> float:
    """Lower bound ``-2 ln max_{k,k'} ||X_k Y_k'||`` on ``H(X) + H(Y)``."""
    if a.dim != b.dim:
        raise DistributionError("observables act on different dimensions")
    # ||P Q|| = ||A^dag B|| for orthonormal bases A, B of the two ranges.
    overlap = max(operator_norm(u.conj().T @ v) for u in a.bases for v in b.bases)
    return max(0.0, -2.0 * math.log(min(overlap, 1.0)))
