"""Backend selection for the entropy objective.

The compiled ``_ckernels`` module is used when importable; setting
``ENTROSEP_PURE_PYTHON=1`` forces the pure-Python fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from types import ModuleType

import numpy as np

from . import _pykernels
from .observables import OperatorSet

KIND_ANGLES = 0
KIND_PRODUCT = 1
KIND_GLOBAL = 2

try:
    if os.environ.get("ENTROSEP_PURE_PYTHON"):
        raise ImportError("pure-Python backend requested")
    from . import _ckernels
except ImportError:
    _ckernels = None

BACKEND = "cython" if _ckernels is not None else "python"


def get_backend(name: str | None = None) -> ModuleType:
    name = name or BACKEND
    if name == "python":
        return _pykernels
    if name == "cython":
        if _ckernels is None:
            raise RuntimeError("compiled kernels are not built")
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")


def available_backends() -> list[str]:
    return ["python"] + (["cython"] if _ckernels is not None else [])


@dataclass(frozen=True)
class EntropyPlan:
    """An operator set flattened into deduplicated rows and outcome groups."""

    d: int
    rows_re: np.ndarray
    rows_im: np.ndarray
    pair_row: np.ndarray
    pair_group: np.ndarray
    n_groups: int

    @classmethod
    def from_set(cls, opset: OperatorSet) -> "EntropyPlan":
        rows: list[np.ndarray] = []
        pair_row, pair_group = [], []
        g = 0
        for obs in opset:
            for basis in obs.bases:
                for v in basis.T:
                    r = v.conj()
                    idx = next(
                        (i for i, old in enumerate(rows) if np.allclose(old, r, rtol=0, atol=1e-13)),
                        None,
                    )
                    if idx is None:
                        rows.append(r)
                        idx = len(rows) - 1
                    pair_row.append(idx)
                    pair_group.append(g)
                g += 1
        m = np.array(rows)
        return cls(
            opset.d,
            np.ascontiguousarray(m.real),
            np.ascontiguousarray(m.imag),
            np.array(pair_row, dtype=np.intc),
            np.array(pair_group, dtype=np.intc),
            g,
        )

    def args(self, kind: int) -> tuple:
        return (kind, self.d, self.rows_re, self.rows_im, self.pair_row, self.pair_group, self.n_groups)

    def n_params(self, kind: int) -> int:
        if kind == KIND_ANGLES:
            return 4
        if kind == KIND_PRODUCT:
            return 4 * self.d
        return 2 * self.d * self.d

    def objective(self, x, kind: int, backend: str | None = None) -> float:
        return get_backend(backend).objective(np.ascontiguousarray(x, dtype=float), *self.args(kind))

    def batch(self, xs, kind: int, backend: str | None = None) -> np.ndarray:
        return get_backend(backend).batch_objective(
            np.ascontiguousarray(xs, dtype=float), *self.args(kind)
        )

    def refine(self, x0, kind: int, backend: str | None = None, **opts):
        return get_backend(backend).refine(
            np.ascontiguousarray(x0, dtype=float), *self.args(kind), **opts
        )


def kets_to_params(kets: np.ndarray) -> np.ndarray:
    """Pack joint kets (rows) as kind-2 parameter vectors."""
    kets = np.atleast_2d(kets)
    return np.ascontiguousarray(np.hstack([kets.real, kets.imag]))


def params_to_ket(x: np.ndarray, kind: int, d: int) -> np.ndarray:
    """Normalised joint ket for a parameter vector of the given kind."""
    x = np.asarray(x, dtype=float)
    if kind == KIND_ANGLES:
        a, b, dl, g = x
        return np.kron(
            [np.cos(a), np.exp(1j * dl) * np.sin(a)], [np.cos(b), np.exp(1j * g) * np.sin(b)]
        )
    if kind == KIND_PRODUCT:
        a = x[:d] + 1j * x[d:2 * d]
        b = x[2 * d:3 * d] + 1j * x[3 * d:]
        return np.kron(a / np.linalg.norm(a), b / np.linalg.norm(b))
    n = len(x) // 2
    psi = x[:n] + 1j * x[n:]
    return psi / np.linalg.norm(psi)
