"""Entropic separability criteria and closed forms on two-qubit product states."""

from __future__ import annotations

import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .entropy import LN2, binary_entropy, entropic_uncertainty, f_func, total_uncertainty
from .observables import OperatorSet, get_set
from .qstate import DensityMatrix, ProductParams

TOL_VERDICT = 1e-9

QUBIT_CRITERIA = {
    "E8-XY": "xy",
    "E12-XYZ": "xyz",
    "E14-1_3": "1_3",
    "E16-1_1_2": "1_1_2",
    "E18-1111": "1111",
    "E22-SPIN": "spin",
}
_DIM_CRITERION = re.compile(r"^E(33)-EXTREME-(\d+)$|^E(37)-ONEREST-(\d+)$")


@lru_cache(maxsize=None)
def criterion_set(criterion_id: str) -> OperatorSet:
    if criterion_id in QUBIT_CRITERIA:
        return get_set(QUBIT_CRITERIA[criterion_id])
    m = _DIM_CRITERION.match(criterion_id)
    if m is None:
        raise KeyError(f"unknown criterion {criterion_id!r}")
    if m.group(1):
        return get_set("extreme", int(m.group(2)))
    return get_set("onerest", int(m.group(4)))


def criteria_for_dim(d: int) -> list[str]:
    if d == 2:
        return list(QUBIT_CRITERIA)
    return [f"E33-EXTREME-{d}", f"E37-ONEREST-{d}"]


@dataclass(frozen=True)
class CriterionVerdict:
    criterion_id: str
    value: float
    bound: float
    violated: bool
    margin: float

    @property
    def value_bits(self) -> float:
        return self.value / LN2

    @property
    def bound_bits(self) -> float:
        return self.bound / LN2


def evaluate(opset: OperatorSet, rho: DensityMatrix, criterion_id: str | None = None) -> CriterionVerdict:
    """Compare the total uncertainty of ``rho`` with the separable floor.

    ``violated`` certifies entanglement; it requires the value to undercut the
    floor by more than ``TOL_VERDICT``.
    """
    value = total_uncertainty(opset, rho)
    bound = opset.sep_floor
    return CriterionVerdict(
        criterion_id or opset.name,
        value,
        bound,
        value < bound - TOL_VERDICT,
        bound - value,
    )


def evaluate_all(rho: DensityMatrix, ids: list[str] | None = None) -> list[CriterionVerdict]:
    if rho.dimA != rho.dimB:
        raise ValueError(f"criteria need a d x d system, got {rho.dimA}x{rho.dimB}")
    ids = criteria_for_dim(rho.dimA) if ids is None else ids
    return [evaluate(criterion_set(c), rho, c) for c in ids]


def evaluate_batch(states, ids: list[str] | None = None, workers: int = 1) -> list[list[CriterionVerdict]]:
    """``evaluate_all`` over many states; output order follows input order."""
    if workers <= 1:
        return [evaluate_all(r, ids) for r in states]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(lambda r: evaluate_all(r, ids), states))


@dataclass(frozen=True)
class QParams:
    """Bell-basis overlap parameters of a two-qubit product state."""

    q0: float
    q1: float
    q2: float
    q: float

    def bell_projections(self):
        q0, q1, q2 = self.q0, self.q1, self.q2
        return ((q0 + q1) / 2, (q0 - q1) / 2, (1 - q0 + q2) / 2, (1 - q0 - q2) / 2)


def qparams(p: ProductParams) -> QParams:
    ca, sa = np.cos(p.alpha), np.sin(p.alpha)
    cb, sb = np.cos(p.beta), np.sin(p.beta)
    q0 = (ca * cb) ** 2 + (sa * sb) ** 2
    q = 2 * ca * cb * sa * sb
    return QParams(q0, q * np.cos(p.delta + p.gamma), q * np.cos(p.delta - p.gamma), q)


def _weighted_h2(weight, num):
    """``weight * H2(num / weight)``, taken as 0 when the weight vanishes."""
    weight = np.asarray(weight, dtype=float)
    safe = np.where(weight > 1e-300, weight, 1.0)
    return np.where(weight > 1e-300, weight * binary_entropy(np.asarray(num) / safe), 0.0)


def closed_form_xy(p: ProductParams):
    """``H(X) + H(Y)`` on a product state."""
    q0 = qparams(p).q0
    s = np.sin(p.delta) * np.sin(p.gamma) * np.sin(2 * p.alpha) * np.sin(2 * p.beta)
    return binary_entropy(q0) + binary_entropy((1 - s) / 2)


def closed_form_xyz(p: ProductParams):
    qp = qparams(p)
    return (
        binary_entropy(qp.q0)
        + binary_entropy((1 + qp.q2 - qp.q1) / 2)
        + binary_entropy((1 + qp.q1 + qp.q2) / 2)
    )


def closed_form_1_3(p: ProductParams):
    return sum(binary_entropy(qv) for qv in qparams(p).bell_projections())


def pair_split_1_3(qp: QParams):
    """``H2(Q1) + H2(Q2)`` rewritten through ``q0`` and ``q1``."""
    q0, q1 = qp.q0, qp.q1
    return (
        f_func(q0)
        + f_func(2 - q0)
        + _weighted_h2(q0, (q0 + q1) / 2)
        + _weighted_h2(2 - q0, (2 - q0 + q1) / 2)
    )


def f_terms(qp: QParams):
    """The three-way split ``(f0, f1, f2)`` of the X^(1,1,2) total uncertainty."""
    q0, q1, q2 = qp.q0, qp.q1, qp.q2
    f0 = binary_entropy(q0) + binary_entropy((1 + q2 - q1) / 2) + binary_entropy((1 + q1 + q2) / 2)
    f1 = 3 * _weighted_h2(q0, (q0 + q1) / 2) + 3 * f_func(q0)
    f2 = 3 * _weighted_h2(1 - q0, (1 - q0 + q2) / 2) + 3 * f_func(1 - q0)
    return f0, f1, f2


def closed_form_1_1_2(p: ProductParams):
    return sum(f_terms(qparams(p)))


def closed_form_1111(p: ProductParams):
    return sum(f_func(np.clip(qv, 0.0, 1.0)) for qv in qparams(p).bell_projections())


def closed_form_spin(p: ProductParams):
    """Total-spin uncertainty on a product state, one term per component."""
    a, b, dl, g = p.alpha, p.beta, p.delta, p.gamma
    ca, sa, cb, sb = np.cos(a), np.sin(a), np.cos(b), np.sin(b)
    s2a, s2b = np.sin(2 * a), np.sin(2 * b)
    F = lambda x: f_func(np.clip(x, 0.0, 1.0))  # noqa: E731
    h1 = F((ca * sb) ** 2 + (sa * cb) ** 2) + F((ca * cb) ** 2) + F((sa * sb) ** 2)
    h2 = (
        F((1 - np.sin(dl) * np.sin(g) * s2a * s2b) / 2)
        + F((1 - np.sin(dl) * s2a) * (1 - np.sin(g) * s2b) / 4)
        + F((1 + np.sin(dl) * s2a) * (1 + np.sin(g) * s2b) / 4)
    )
    h3 = (
        F((1 - np.cos(dl) * np.cos(g) * s2a * s2b) / 2)
        + F((1 - np.cos(dl) * s2a) * (1 - np.cos(g) * s2b) / 4)
        + F((1 + np.cos(dl) * s2a) * (1 + np.cos(g) * s2b) / 4)
    )
    return h1 + h2 + h3


def g_func(q0):
    """``H2(q0) + H2(1/2 + min(q0, 1 - q0))``; minimum ``ln 2`` at ``q0 = 1/2``."""
    q0 = np.asarray(q0, dtype=float)
    out = binary_entropy(q0) + binary_entropy(0.5 + np.minimum(q0, 1 - q0))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class ImplicationReport:
    h_x: float
    h_y: float
    h_z: float
    xy_violated: bool
    xyz_violated: bool

    @property
    def consistent(self) -> bool:
        # a two-observable violation must carry over to the three-observable criterion
        return self.xyz_violated or not self.xy_violated


def implication_check(rho: DensityMatrix) -> ImplicationReport:
    if rho.dim != 4:
        raise ValueError("implication check is defined for two qubits")
    hx, hy, hz = (entropic_uncertainty(o, rho) for o in criterion_set("E12-XYZ"))
    return ImplicationReport(
        hx,
        hy,
        hz,
        hx + hy < LN2 - TOL_VERDICT,
        hx + hy + hz < 2 * LN2 - TOL_VERDICT,
    )


def h2_floor(d: int) -> float:
    """``d * H2(1/d)``, the separable floor of the one-versus-rest Bell set."""
    return d * binary_entropy(1.0 / d)


def log_floor(d: int) -> float:
    return math.log(d)
