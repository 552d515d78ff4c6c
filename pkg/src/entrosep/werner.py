"""Werner states and the detection thresholds of each criterion on them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .criteria import QUBIT_CRITERIA, criterion_set, evaluate
from .entropy import binary_entropy, f_func
from .observables import bell_basis_2
from .qstate import DensityMatrix, is_ppt

PPT_THRESHOLD = 1.0 / 3.0


class ThresholdError(ValueError):
    pass


@dataclass(frozen=True)
class WernerPoint:
    p: float
    state: DensityMatrix


def werner_matrix(p: float) -> np.ndarray:
    singlet = bell_basis_2().vectors[3]
    return (1 - p) / 4 * np.eye(4) + p * np.outer(singlet, singlet.conj())


def werner(p: float) -> WernerPoint:
    """Mixture of white noise and the singlet with singlet weight ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    return WernerPoint(p, DensityMatrix(2, 2, werner_matrix(p)))


def _h2(x):
    return binary_entropy(x)


def _F(x):
    return f_func(np.clip(x, 0.0, 1.0))


CLOSED_FORMS: dict[str, Callable] = {
    "E8-XY": lambda p: 2 * _h2((1 + p) / 2),
    "E12-XYZ": lambda p: 3 * _h2((1 + p) / 2),
    "E14-1_3": lambda p: 3 * _h2((1 - p) / 4) + _h2((1 + 3 * p) / 4),
    "E16-1_1_2": lambda p: 3 * _h2((1 + p) / 2) + 3 * _F((1 + 3 * p) / 4) + 9 * _F((1 - p) / 4),
    "E18-1111": lambda p: 3 * _F((1 - p) / 4) + _F((1 + 3 * p) / 4),
    "E22-SPIN": lambda p: 3 * _F((1 + p) / 2) + 6 * _F((1 - p) / 4),
}


def closed_form(criterion_id: str, p):
    """Total uncertainty of the criterion's set on ``w_p`` (accepts arrays)."""
    try:
        fn = CLOSED_FORMS[criterion_id]
    except KeyError:
        raise KeyError(f"no Werner closed form for {criterion_id!r}") from None
    return fn(np.asarray(p, dtype=float))


def threshold(criterion_id: str, tol: float = 1e-6, grid: int = 1000) -> float:
    """Werner parameter above which ``criterion_id`` certifies entanglement."""
    bound = criterion_set(criterion_id).sep_floor
    ps = np.linspace(0.0, 1.0, grid)
    vals = closed_form(criterion_id, ps)
    if np.any(np.diff(vals) > 1e-12):
        raise ThresholdError(f"{criterion_id}: not monotone decreasing on [0, 1]")
    lo, hi = 0.0, 1.0
    if closed_form(criterion_id, lo) < bound or closed_form(criterion_id, hi) >= bound:
        raise ThresholdError(f"{criterion_id}: criterion never fires on Werner family")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if closed_form(criterion_id, mid) >= bound:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def all_thresholds(tol: float = 1e-6) -> dict[str, float]:
    return {c: threshold(c, tol) for c in QUBIT_CRITERIA}


def sweep(criterion_ids: Sequence[str], p_grid: Sequence[float], matrix: bool = False) -> list[dict]:
    """One row per ``p``: value and violation flag per criterion, then PPT flag.

    With ``matrix=True`` values come from the density-matrix pipeline instead
    of the closed forms.
    """
    rows = []
    for p in p_grid:
        wp = werner(float(p))
        row: dict = {"p": float(p)}
        for c in criterion_ids:
            bound = criterion_set(c).sep_floor
            if matrix:
                verdict = evaluate(criterion_set(c), wp.state, c)
                value, violated = verdict.value, verdict.violated
            else:
                value = float(closed_form(c, p))
                violated = value < bound - 1e-9
            row[f"{c}_value"] = value
            row[f"{c}_violated"] = violated
        row["ppt_flag"] = is_ppt(wp.state)[0]
        rows.append(row)
    return rows


def threshold_order(thresholds: dict[str, float]) -> list[str]:
    return sorted(thresholds, key=thresholds.get)
