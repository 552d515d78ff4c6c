"""Observables and observable sets diagonal in maximally entangled bases.

Pauli matrices follow the convention where ``|0>`` and ``|1>`` are the +1 and
-1 eigenvectors of ``pauli(1)``, and ``pauli(1) @ pauli(2) == 1j * pauli(3)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .qstate import partial_trace

EIG_GAP = 1e-8
TOL_PROJ = 1e-9

_PAULI = {
    1: np.array([[1, 0], [0, -1]], dtype=complex),
    2: np.array([[0, 1j], [-1j, 0]], dtype=complex),
    3: np.array([[0, 1], [1, 0]], dtype=complex),
}


class ObservableError(ValueError):
    pass


def pauli(axis: int) -> np.ndarray:
    return _PAULI[axis].copy()


@dataclass(frozen=True)
class SpectralObservable:
    """An observable stored as its distinct eigenvalues and eigenprojectors.

    ``bases[k]`` holds orthonormal columns spanning the k-th eigenspace, so
    ``projectors[k] == bases[k] @ bases[k].conj().T``.
    """

    label: str
    eigenvalues: tuple[float, ...]
    bases: tuple[np.ndarray, ...] = field(repr=False)

    def __post_init__(self):
        if len(self.eigenvalues) != len(self.bases):
            raise ObservableError(f"{self.label}: eigenvalue/projector count mismatch")
        vals = sorted(self.eigenvalues)
        if any(b - a <= EIG_GAP for a, b in zip(vals, vals[1:])):
            raise ObservableError(f"{self.label}: eigenvalues not distinct")
        bases = []
        for b in self.bases:
            b = np.array(b, dtype=complex)
            b.setflags(write=False)
            bases.append(b)
        object.__setattr__(self, "bases", tuple(bases))
        dim = bases[0].shape[0]
        v = np.hstack(bases)
        if v.shape != (dim, dim) or not np.allclose(v.conj().T @ v, np.eye(dim), atol=TOL_PROJ):
            raise ObservableError(f"{self.label}: eigenprojectors not complete and orthogonal")

    @property
    def dim(self) -> int:
        return self.bases[0].shape[0]

    @property
    def projectors(self) -> list[np.ndarray]:
        return [b @ b.conj().T for b in self.bases]

    @property
    def ranks(self) -> tuple[int, ...]:
        return tuple(b.shape[1] for b in self.bases)

    def matrix(self) -> np.ndarray:
        return sum(x * p for x, p in zip(self.eigenvalues, self.projectors))

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "eigenvalues": list(self.eigenvalues),
            "projectors": [
                [[float(z.real), float(z.imag)] for z in p.ravel()] for p in self.projectors
            ],
        }


def spectral_decompose(m: np.ndarray, tol: float = 1e-9, label: str = "") -> SpectralObservable:
    """Group the eigenvectors of a Hermitian matrix by eigenvalue.

    Eigenvalues closer than ``EIG_GAP`` to their sorted neighbour share a
    projector.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ObservableError(f"{label or 'matrix'}: not square")
    if not np.allclose(m, m.conj().T, rtol=0.0, atol=tol):
        raise ObservableError(f"{label or 'matrix'}: not hermitian")
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    groups = [[0]]
    for i in range(1, len(w)):
        if w[i] - w[i - 1] > EIG_GAP:
            groups.append([i])
        else:
            groups[-1].append(i)
    values = tuple(float(np.mean(w[g])) for g in groups)
    return SpectralObservable(label, values, tuple(v[:, g] for g in groups))


def diagonal_observable(label: str, vectors: np.ndarray, values) -> SpectralObservable:
    """Observable ``sum_v values[v] |vectors[v]><vectors[v]|``; vectors are rows."""
    distinct = sorted(set(values))
    bases = tuple(
        vectors[[i for i, x in enumerate(values) if x == val]].T for val in distinct
    )
    return SpectralObservable(label, tuple(float(x) for x in distinct), bases)


@dataclass(frozen=True)
class BellBasis:
    """Orthonormal basis of maximally entangled kets, stored as rows."""

    dim: int
    vectors: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.vectors, dtype=complex)
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)
        n = self.dim * self.dim
        if v.shape != (n, n):
            raise ObservableError("basis shape")
        if not np.allclose(v @ v.conj().T, np.eye(n), atol=TOL_PROJ):
            raise ObservableError("basis not orthonormal")
        for ket in v:
            red = partial_trace(np.outer(ket, ket.conj()), "A", (self.dim, self.dim))
            if not np.allclose(red, np.eye(self.dim) / self.dim, atol=TOL_PROJ):
                raise ObservableError("basis vector not maximally entangled")

    def __len__(self):
        return len(self.vectors)

    def projections(self, ket: np.ndarray) -> np.ndarray:
        """``Q_v = |<Psi_v|ket>|^2`` for every basis vector."""
        return np.abs(self.vectors.conj() @ ket) ** 2


@dataclass(frozen=True)
class OperatorSet:
    """A named set of observables with its separable and unrestricted floors (nats)."""

    name: str
    observables: tuple[SpectralObservable, ...]
    sep_floor: float
    global_floor: float = 0.0
    d: int = 2
    basis: BellBasis | None = field(default=None, repr=False)

    def __post_init__(self):
        if not self.sep_floor >= self.global_floor >= 0:
            raise ObservableError(f"{self.name}: need sep_floor >= global_floor >= 0")
        if any(o.dim != self.d * self.d for o in self.observables):
            raise ObservableError(f"{self.name}: observable dimension mismatch")

    @property
    def dim(self) -> int:
        return self.d * self.d

    def __len__(self):
        return len(self.observables)

    def __iter__(self):
        return iter(self.observables)

    def pairwise_commuting(self) -> bool:
        mats = [o.matrix() for o in self.observables]
        return all(np.allclose(a @ b, b @ a, atol=1e-9) for a, b in combinations(mats, 2))

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "d": self.d,
            "sep_floor": self.sep_floor,
            "global_floor": self.global_floor,
            "observables": [o.to_json() for o in self.observables],
        }


def bell_basis_2() -> BellBasis:
    s = 1 / math.sqrt(2)
    return BellBasis(
        2,
        np.array(
            [
                [s, 0, 0, s],
                [s, 0, 0, -s],
                [0, s, s, 0],
                [0, s, -s, 0],
            ],
            dtype=complex,
        ),
    )


def me_basis(d: int) -> BellBasis:
    """Maximally entangled basis from cyclic shifts and a discrete Fourier transform.

    Vector ``s*d + t`` is ``d**-0.5 * sum_i exp(2 pi i i t / d) |i, i+s mod d>``.
    For ``d == 2`` this reproduces ``bell_basis_2`` exactly.
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    vecs = np.zeros((d * d, d * d), dtype=complex)
    i = np.arange(d)
    for s in range(d):
        cols = i * d + (i + s) % d
        for t in range(d):
            vecs[s * d + t, cols] = np.exp(2j * np.pi * i * t / d) / math.sqrt(d)
    return BellBasis(d, vecs)


def _local_pair_observable(label, op) -> SpectralObservable:
    return spectral_decompose(np.kron(op, op), label=label)


_LN2 = math.log(2)


def xy_set() -> OperatorSet:
    obs = tuple(_xyz_observables()[:2])
    return OperatorSet("xy", obs, _LN2, 0.0, 2, bell_basis_2())


def xyz_set() -> OperatorSet:
    return OperatorSet("xyz", tuple(_xyz_observables()), 2 * _LN2, 0.0, 2, bell_basis_2())


def _xyz_observables():
    # Bell-basis sign table; equal to pauli(j) (x) pauli(j).
    bb = bell_basis_2()
    signs = {"X": (1, 1, -1, -1), "Y": (-1, 1, 1, -1), "Z": (1, -1, 1, -1)}
    return [diagonal_observable(k, bb.vectors, v) for k, v in signs.items()]


_TABLE_1_3 = [
    (1, -1, -1, -1),
    (-1, 1, -1, -1),
    (-1, -1, 1, -1),
    (-1, -1, -1, 1),
]

_TABLE_1_1_2 = [
    (0, 0, 1, -1),
    (0, 1, 0, -1),
    (0, 1, -1, 0),
    (1, 0, 0, -1),
    (1, 0, -1, 0),
    (1, -1, 0, 0),
]


def set_1_3() -> OperatorSet:
    bb = bell_basis_2()
    obs = tuple(
        diagonal_observable(f"X^(1,3)_{j + 1}", bb.vectors, row) for j, row in enumerate(_TABLE_1_3)
    )
    return OperatorSet("1_3", obs, 2 * _LN2, 0.0, 2, bb)


def set_1_1_2() -> OperatorSet:
    bb = bell_basis_2()
    obs = tuple(
        diagonal_observable(f"X^(1,1,2)_{j + 1}", bb.vectors, row)
        for j, row in enumerate(_TABLE_1_1_2)
    )
    return OperatorSet("1_1_2", obs, 5 * _LN2, 0.0, 2, bb)


def x_1111() -> OperatorSet:
    bb = bell_basis_2()
    obs = (diagonal_observable("X^(1,1,1,1)", bb.vectors, (1, 2, 3, 4)),)
    return OperatorSet("1111", obs, _LN2, 0.0, 2, bb)


def spin_set() -> OperatorSet:
    """Total-spin components; they do not commute and share only the singlet."""
    eye = np.eye(2)
    obs = tuple(
        spectral_decompose(np.kron(pauli(j), eye) + np.kron(eye, pauli(j)), label=f"S_{j}")
        for j in (1, 2, 3)
    )
    return OperatorSet("spin", obs, 3 * _LN2, 0.0, 2)


def bell_set_extreme(d: int) -> OperatorSet:
    basis = me_basis(d)
    values = tuple(range(1, d * d + 1))
    obs = (diagonal_observable(f"X^(1..1)_d{d}", basis.vectors, values),)
    return OperatorSet(f"extreme-{d}", obs, math.log(d), 0.0, d, basis)


def bell_set_one_rest(d: int) -> OperatorSet:
    basis = me_basis(d)
    n = d * d
    obs = tuple(
        diagonal_observable(
            f"X^(1,{n - 1})_{v + 1}", basis.vectors, tuple(1 if u == v else -1 for u in range(n))
        )
        for v in range(n)
    )
    p = 1.0 / d
    floor = d * (-p * math.log(p) - (1 - p) * math.log(1 - p))
    return OperatorSet(f"onerest-{d}", obs, floor, 0.0, d, basis)


SET_NAMES = ("xy", "xyz", "1_3", "1_1_2", "1111", "spin", "extreme", "onerest")
QUBIT_SETS = {
    "xy": xy_set,
    "xyz": xyz_set,
    "1_3": set_1_3,
    "1_1_2": set_1_1_2,
    "1111": x_1111,
    "spin": spin_set,
}


def get_set(name: str, d: int = 2) -> OperatorSet:
    """Look up an operator set by name; only ``extreme``/``onerest`` accept d > 2."""
    if name == "extreme":
        return bell_set_extreme(d)
    if name == "onerest":
        return bell_set_one_rest(d)
    if name not in QUBIT_SETS:
        raise KeyError(f"unknown operator set {name!r}; choose from {', '.join(SET_NAMES)}")
    if d != 2:
        raise ValueError(f"set {name!r} is defined for two qubits only")
    return QUBIT_SETS[name]()
