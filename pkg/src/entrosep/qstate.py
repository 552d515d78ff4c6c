"""Bipartite states: construction, validation, partial operations, sampling.

Global basis order is lexicographic ``|i>_A |l>_B``, so ``|01> = |0>_A |1>_B``
sits at index 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

TOL_HERM = 1e-9
TOL_TRACE = 1e-9
TOL_NORM = 1e-9
TOL_PSD = 1e-9

SeedLike = int | np.random.SeedSequence | None


class StateValidationError(ValueError):
    """Raised when a matrix or vector fails a state invariant.

    ``failed`` lists the names of the violated invariants.
    """

    def __init__(self, failed: Sequence[str], detail: str = ""):
        self.failed = list(failed)
        msg = "invalid state: " + ", ".join(self.failed)
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


def make_rng(seed: SeedLike = None) -> np.random.Generator:
    """Counter-based generator (Philox) for a seed or seed sequence."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(seed))


def spawn_rngs(seed: SeedLike, n: int) -> list[np.random.Generator]:
    """Split one seed into ``n`` independent Philox streams."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [np.random.Generator(np.random.Philox(child)) for child in ss.spawn(n)]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


def density_failures(matrix: np.ndarray) -> list[str]:
    """Names of the density-matrix invariants that ``matrix`` violates."""
    failed = []
    if not np.allclose(matrix, matrix.conj().T, rtol=0.0, atol=TOL_HERM):
        failed.append("hermitian")
    if abs(np.trace(matrix) - 1.0) > TOL_TRACE:
        failed.append("unit_trace")
    herm = 0.5 * (matrix + matrix.conj().T)
    if np.linalg.eigvalsh(herm)[0] < -TOL_PSD:
        failed.append("positive_semidefinite")
    return failed


@dataclass(frozen=True)
class DensityMatrix:
    """Density matrix of a ``dimA x dimB`` system, validated on construction."""

    dimA: int
    dimB: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        n = self.dimA * self.dimB
        if self.dimA < 2 or self.dimB < 2:
            raise StateValidationError(["dimensions"], f"got {self.dimA}x{self.dimB}")
        if m.shape != (n, n):
            raise StateValidationError(["shape"], f"expected {(n, n)}, got {m.shape}")
        failed = density_failures(m)
        if failed:
            raise StateValidationError(failed)
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return self.dimA * self.dimB

    @classmethod
    def from_ket(cls, ket: np.ndarray, dimA: int, dimB: int | None = None) -> "DensityMatrix":
        ket = np.asarray(ket, dtype=complex).ravel()
        return cls(dimA, dimA if dimB is None else dimB, np.outer(ket, ket.conj()))

    @classmethod
    def maximally_mixed(cls, d: int) -> "DensityMatrix":
        return cls(d, d, np.eye(d * d) / (d * d))

    def expectation(self, op: np.ndarray) -> float:
        return float(np.real(np.trace(op @ self.matrix)))

    def to_json(self) -> dict:
        flat = self.matrix.ravel()
        return {
            "dimA": self.dimA,
            "dimB": self.dimB,
            "matrix": [[float(z.real), float(z.imag)] for z in flat],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "DensityMatrix":
        try:
            dimA = int(obj["dimA"])
            dimB = int(obj["dimB"])
            entries = obj["matrix"]
        except (KeyError, TypeError, ValueError) as exc:
            raise StateValidationError(["schema"], str(exc)) from exc
        n = dimA * dimB
        if len(entries) != n * n:
            raise StateValidationError(
                ["shape"], f"expected {n * n} entries for {dimA}x{dimB}, got {len(entries)}"
            )
        try:
            arr = np.array(entries, dtype=float)
        except ValueError as exc:
            raise StateValidationError(["schema"], "entries must be [re, im] pairs") from exc
        if arr.shape != (n * n, 2):
            raise StateValidationError(["schema"], "entries must be [re, im] pairs")
        return cls(dimA, dimB, (arr[:, 0] + 1j * arr[:, 1]).reshape(n, n))


def load_state(path: str | Path) -> DensityMatrix:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise StateValidationError(["json"], str(exc)) from exc
    return DensityMatrix.from_json(obj)


def save_state(rho: DensityMatrix, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(rho.to_json(), fh)


@dataclass(frozen=True)
class PureState:
    dimA: int
    dimB: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex).ravel()
        if amp.size != self.dimA * self.dimB:
            raise StateValidationError(["shape"])
        if abs(np.vdot(amp, amp).real - 1.0) > TOL_NORM:
            raise StateValidationError(["unit_norm"])
        object.__setattr__(self, "amplitudes", _frozen(amp))

    def density(self) -> DensityMatrix:
        return DensityMatrix.from_ket(self.amplitudes, self.dimA, self.dimB)


@dataclass(frozen=True)
class ProductParams:
    """Angles of a two-qubit product state.

    ``(cos a|0> + e^{i delta} sin a|1>) (x) (cos b|0> + e^{i gamma} sin b|1>)``
    """

    alpha: float
    beta: float
    delta: float
    gamma: float

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.delta, self.gamma])

    def canonical(self) -> "ProductParams":
        """Equivalent angles with alpha, beta in [0, pi/2] and phases in [0, 2 pi).

        The state is preserved up to a global phase.
        """
        a, d = _canonical_pair(self.alpha, self.delta)
        b, g = _canonical_pair(self.beta, self.gamma)
        return ProductParams(a, b, d, g)


def _canonical_pair(angle: float, phase: float) -> tuple[float, float]:
    c, s = math.cos(angle), math.sin(angle)
    sign_c = -1.0 if c < 0 else 1.0
    if sign_c * s < 0:
        phase += math.pi
    phase %= 2 * math.pi
    if phase >= 2 * math.pi:  # -tiny % 2pi rounds up to 2pi
        phase = 0.0
    return math.atan2(abs(s), abs(c)), phase


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def qubit_ket(angle: float, phase: float) -> np.ndarray:
    return np.array([math.cos(angle), np.exp(1j * phase) * math.sin(angle)])


def product_ket(p: ProductParams) -> np.ndarray:
    return np.kron(qubit_ket(p.alpha, p.delta), qubit_ket(p.beta, p.gamma))


def product_state(p: ProductParams) -> PureState:
    return PureState(2, 2, product_ket(p))


def partial_trace(rho: DensityMatrix | np.ndarray, keep: str = "A", dims=None) -> np.ndarray:
    """Reduced matrix on subsystem ``keep`` ('A' or 'B')."""
    m, dA, dB = _unpack(rho, dims)
    t = m.reshape(dA, dB, dA, dB)
    if keep == "A":
        return np.einsum("ijkj->ik", t)
    if keep == "B":
        return np.einsum("ijil->jl", t)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def partial_transpose(rho: DensityMatrix | np.ndarray, subsystem: str = "B", dims=None) -> np.ndarray:
    """Transpose on one tensor factor; the result is Hermitian."""
    m, dA, dB = _unpack(rho, dims)
    t = m.reshape(dA, dB, dA, dB)
    if subsystem == "A":
        t = t.transpose(2, 1, 0, 3)
    elif subsystem == "B":
        t = t.transpose(0, 3, 2, 1)
    else:
        raise ValueError(f"subsystem must be 'A' or 'B', got {subsystem!r}")
    return t.reshape(dA * dB, dA * dB)


def is_ppt(rho: DensityMatrix) -> tuple[bool, float]:
    """PPT test. Returns ``(ppt, min eigenvalue of the partial transpose)``.

    For two qubits this decides separability exactly.
    """
    pt = partial_transpose(rho, "B")
    lam = float(np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))[0])
    return lam >= -TOL_PSD, lam


def _unpack(rho, dims):
    if isinstance(rho, DensityMatrix):
        return rho.matrix, rho.dimA, rho.dimB
    m = np.asarray(rho, dtype=complex)
    if dims is None:
        d = math.isqrt(m.shape[0])
        if d * d != m.shape[0]:
            raise ValueError("dims required for a non-square bipartition")
        dims = (d, d)
    return m, dims[0], dims[1]


def haar_ket(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def random_pure_product(d: int, seed: SeedLike = None) -> PureState:
    """Product of two independent Haar-random kets of dimension ``d``."""
    if d < 2:
        raise ValueError("d must be >= 2")
    rng = make_rng(seed)
    a = haar_ket(d, rng)
    b = haar_ket(d, rng)
    return PureState(d, d, np.kron(a, b))


def random_product_kets(d: int, n: int, seed: SeedLike = None) -> np.ndarray:
    """``n`` Haar product kets stacked as rows, shape ``(n, d*d)``."""
    rng = make_rng(seed)
    a = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
    b = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    b /= np.linalg.norm(b, axis=1, keepdims=True)
    return (a[:, :, None] * b[:, None, :]).reshape(n, d * d)


@dataclass(frozen=True)
class SeparableEnsemble:
    """Convex mixture ``sum_n w_n |a_n><a_n| (x) |b_n><b_n|``.

    ``factors_a`` and ``factors_b`` hold the local kets as rows.
    """

    weights: np.ndarray
    factors_a: np.ndarray
    factors_b: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < 0) or abs(w.sum() - 1.0) > TOL_TRACE:
            raise StateValidationError(["weights"])
        if not (len(w) == len(self.factors_a) == len(self.factors_b)):
            raise StateValidationError(["shape"])

    @property
    def dim(self) -> int:
        return self.factors_a.shape[1]

    def density(self) -> DensityMatrix:
        kets = (self.factors_a[:, :, None] * self.factors_b[:, None, :]).reshape(len(self.weights), -1)
        m = np.einsum("n,ni,nj->ij", self.weights, kets, kets.conj())
        return DensityMatrix(self.dim, self.dim, m)


def random_separable_mixture(d: int, n: int, seed: SeedLike = None) -> SeparableEnsemble:
    """``n`` Haar product terms with flat-Dirichlet weights."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = make_rng(seed)
    a = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
    b = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    b /= np.linalg.norm(b, axis=1, keepdims=True)
    w = rng.dirichlet(np.ones(n))
    return SeparableEnsemble(w, a, b)


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random mixed state from a Ginibre matrix (Hilbert-Schmidt for full rank)."""
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    m = g @ g.conj().T
    return m / np.trace(m).real
