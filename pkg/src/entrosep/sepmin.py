"""Multistart minimisation of total entropic uncertainty.

Separable minima are taken over pure product states only: the Shannon entropy
is concave, so mixing product states can only raise the total uncertainty.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm, qmc

from .kernels import KIND_ANGLES, KIND_GLOBAL, KIND_PRODUCT, EntropyPlan, params_to_ket
from .observables import OperatorSet, me_basis
from .qstate import ProductParams, make_rng, random_product_kets

DEFAULT_STARTS = {2: 512, 3: 4096}


@dataclass(frozen=True)
class MinConfig:
    starts: int | None = None
    seed: int = 0
    ftol: float = 1e-10
    xtol: float = 1e-8
    maxfev: int = 20000
    backend: str | None = None
    workers: int = 1

    def n_starts(self, d: int) -> int:
        if self.starts is not None:
            if self.starts < 1:
                raise ValueError("starts must be >= 1")
            return self.starts
        return DEFAULT_STARTS.get(d, 4096)


@dataclass(frozen=True)
class StartRecord:
    index: int
    initial_value: float
    value: float
    nfev: int
    converged: bool
    params: tuple[float, ...]


@dataclass(frozen=True)
class MinimizationResult:
    value: float
    argmin: tuple[float, ...]
    kind: int
    d: int
    starts: int
    converged: bool
    records: tuple[StartRecord, ...] = field(default=(), repr=False)

    @property
    def ket(self) -> np.ndarray:
        return params_to_ket(np.array(self.argmin), self.kind, self.d)

    def product_params(self) -> ProductParams:
        if self.kind != KIND_ANGLES:
            raise ValueError("argmin is not a two-qubit angle vector")
        return ProductParams(*self.argmin).canonical()


def start_points(kind: int, n_params: int, n: int, seed: int) -> np.ndarray:
    """Scrambled Sobol starts; the first ``n`` points do not depend on the total count."""
    sampler = qmc.Sobol(n_params, scramble=True, seed=make_rng(seed))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)  # non power-of-two counts
        u = sampler.random(n)
    if kind == KIND_ANGLES:
        return u * np.array([math.pi / 2, math.pi / 2, 2 * math.pi, 2 * math.pi])
    return norm.ppf(np.clip(u, 1e-12, 1 - 1e-12))


def _multistart(opset: OperatorSet, kind: int, config: MinConfig) -> MinimizationResult:
    plan = EntropyPlan.from_set(opset)
    n = config.n_starts(opset.d)
    x0s = start_points(kind, plan.n_params(kind), n, config.seed)
    initial = plan.batch(x0s, kind, config.backend)
    opts = dict(
        h=math.pi / 4 if kind == KIND_ANGLES else 0.5,
        step=0.2 if kind == KIND_ANGLES else 0.1,
        ftol=config.ftol,
        xtol=config.xtol,
        maxfev=config.maxfev,
    )

    def run(i):
        return plan.refine(x0s[i], kind, config.backend, **opts)

    if config.workers > 1:
        with ThreadPoolExecutor(config.workers) as pool:
            outs = list(pool.map(run, range(n)))
    else:
        outs = [run(i) for i in range(n)]

    records = tuple(
        StartRecord(i, float(initial[i]), float(f), int(nfev), bool(conv), tuple(map(float, x)))
        for i, (x, f, nfev, conv) in enumerate(outs)
    )
    # np.argmin keeps the lowest start index on ties
    best = records[int(np.argmin([r.value for r in records]))]
    return MinimizationResult(
        value=max(best.value, 0.0),
        argmin=best.params,
        kind=kind,
        d=opset.d,
        starts=n,
        converged=best.converged,
        records=records,
    )


def minimize_sep(opset: OperatorSet, d: int | None = None, config: MinConfig | None = None) -> MinimizationResult:
    """Minimum total uncertainty over pure product states."""
    d = opset.d if d is None else d
    if opset.dim != d * d:
        raise ValueError(f"set {opset.name} acts on dimension {opset.dim}, not {d}x{d}")
    kind = KIND_ANGLES if d == 2 else KIND_PRODUCT
    return _multistart(opset, kind, config or MinConfig())


def minimize_global(opset: OperatorSet, config: MinConfig | None = None) -> MinimizationResult:
    """Minimum total uncertainty over all pure states of the joint system."""
    return _multistart(opset, KIND_GLOBAL, config or MinConfig())


def gap(opset: OperatorSet, config: MinConfig | None = None) -> float:
    return minimize_sep(opset, config=config).value - minimize_global(opset, config).value


@dataclass(frozen=True)
class CapReport:
    d: int
    samples: int
    max_projection: float
    bound: float
    violations: int
    min_support: int

    @property
    def ok(self) -> bool:
        return self.violations == 0 and self.min_support >= self.d


def projection_cap_check(d: int, samples: int = 10_000, seed: int = 0, tol: float = 1e-9) -> CapReport:
    """Largest overlap of product states with the maximally entangled basis.

    Besides ``samples`` random product kets, the ``d**2`` computational product
    kets are included; each of them overlaps exactly ``d`` basis vectors.
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    basis = me_basis(d)
    kets = np.vstack([random_product_kets(d, samples, seed), np.eye(d * d)])
    q = np.abs(kets @ basis.vectors.conj().T) ** 2
    bound = 1.0 / d
    support = np.sum(q > 1e-12, axis=1)
    return CapReport(
        d=d,
        samples=len(kets),
        max_projection=float(q.max()),
        bound=bound,
        violations=int(np.sum(q > bound + tol)),
        min_support=int(support.min()),
    )
