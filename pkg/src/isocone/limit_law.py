"""Limit laws of isotonized estimators and Monte Carlo checks against them.

The basic estimator satisfies ``B_n (g_n - g0) -> lambda`` with ``lambda``
Gaussian.  The isotonized estimator then satisfies
``B_n (g_n* - g0) -> phi^w(lambda)``, with ``phi^w`` the level-set
concatenation from :mod:`isocone.level_structure`.  This module samples both
sides at finite ``n`` and summarises the discrepancy with two-sample
Kolmogorov-Smirnov distances.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Literal, NamedTuple, Sequence

import numpy as np
from scipy.stats import ks_2samp

from . import _rng
from .estimators import pmf_from_counts, regression_from_sums
from .level_structure import LevelPartition, phi
from .preorder import PreOrder, grid_preorder

EIGEN_FLOOR = 1e-12


class CovarianceError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Gaussian limit


@dataclass
class LimitSpec:
    """Covariance recipe of the Gaussian limit plus per-index rates.

    ``kind="regression"``: ``diag(sigma**2 / w)`` for a cell mean whose cell
    holds a fraction ``w`` of the design.
    ``kind="multinomial"``: ``diag(p) - p p^T``.
    ``kind="custom"``: ``matrix`` as given.
    """

    kind: Literal["regression", "multinomial", "custom"]
    sigma: float = 1.0
    weights: np.ndarray | None = None
    pmf: np.ndarray | None = None
    matrix: np.ndarray | None = None
    rates: np.ndarray | None = None

    def covariance(self) -> np.ndarray:
        if self.kind == "regression":
            w = np.asarray(self.weights, dtype=float)
            return np.diag(self.sigma**2 / w)
        if self.kind == "multinomial":
            p = np.asarray(self.pmf, dtype=float)
            return np.diag(p) - np.outer(p, p)
        if self.kind == "custom":
            return np.asarray(self.matrix, dtype=float)
        raise ValueError(f"unknown covariance kind {self.kind!r}")

    def rate_vector(self, s: int) -> np.ndarray:
        if self.rates is None:
            return np.full(s, 0.5)
        rates = np.asarray(self.rates, dtype=float)
        if rates.shape != (s,) or np.any(rates <= 0):
            raise ValueError("rates must be a positive vector over the ground set")
        return rates

    def check_rates(self, lp: LevelPartition) -> None:
        """Rates must be constant on every piece of the level partition."""
        rates = self.rate_vector(lp.preorder.size)
        for idx in lp.pieces:
            if np.ptp(rates[idx]) > 0:
                raise ValueError(f"rates differ inside level set {idx.tolist()}")


def gaussian_factor(cov: np.ndarray) -> np.ndarray:
    """``L`` with ``L @ L.T == cov``; falls back to a floored eigen-factor for singular ``cov``."""
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise CovarianceError("covariance must be square")
    if not np.allclose(cov, cov.T, atol=1e-14):
        raise CovarianceError("covariance must be symmetric")
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    vals, vecs = np.linalg.eigh(cov)
    top = max(float(vals.max()), 0.0)
    floor = EIGEN_FLOOR * max(top, 1.0)
    if vals.min() < -floor:
        raise CovarianceError(f"covariance has eigenvalue {vals.min():.3g} below -{floor:.1g}")
    vals = np.where(vals < floor, 0.0, vals)
    return vecs * np.sqrt(vals)


def scale(theta, n: float, rates) -> np.ndarray:
    """Apply ``B_n``: multiply coordinate ``i`` by ``n**rates[i]``."""
    return np.asarray(theta, dtype=float) * np.power(float(n), np.asarray(rates, dtype=float))


# ---------------------------------------------------------------------------
# scenarios


def allocate_design(n: int, weights) -> np.ndarray:
    """Deterministic cell counts summing to ``n``, proportional to ``weights`` (largest remainder)."""
    w = np.asarray(weights, dtype=float)
    w = w / w.sum()
    raw = n * w
    counts = np.floor(raw).astype(np.int64)
    short = n - int(counts.sum())
    if short:
        order = np.lexsort((np.arange(len(w)), -(raw - counts)))
        counts[order[:short]] += 1
    return counts


@dataclass
class PmfScenario:
    """i.i.d. draws from a decreasing pmf ``pmf`` over ``preorder``."""

    preorder: PreOrder
    pmf: np.ndarray
    antitonic: bool = field(default=True, init=False)

    def __post_init__(self):
        self.pmf = np.asarray(self.pmf, dtype=float)
        if self.pmf.shape != (self.preorder.size,) or np.any(self.pmf < 0):
            raise ValueError("pmf must be a nonnegative vector over the ground set")
        self._cdf = np.cumsum(self.pmf)
        self._cdf /= self._cdf[-1]

    @property
    def truth(self) -> np.ndarray:
        return self.pmf

    @property
    def reference(self) -> np.ndarray:
        """Isotonic reference whose level sets define phi."""
        return -self.pmf

    def limit_spec(self) -> LimitSpec:
        return LimitSpec("multinomial", pmf=self.pmf)

    def limit_weights(self) -> np.ndarray:
        return np.ones(self.preorder.size)

    def simulate(self, n: int, rng: np.random.Generator):
        draws = np.searchsorted(self._cdf, rng.random(n), side="right")
        counts = np.bincount(draws, minlength=self.preorder.size)
        out = pmf_from_counts(self.preorder, counts)
        return out.basic.values, out.isotonized.fitted, out.basic.weights


@dataclass
class RegressionScenario:
    """Fixed design with cell fractions ``design_weights`` and i.i.d. ``N(0, sigma^2)`` noise."""

    preorder: PreOrder
    g0: np.ndarray
    sigma: float = 1.0
    design_weights: np.ndarray | None = None
    antitonic: bool = field(default=False, init=False)

    def __post_init__(self):
        self.g0 = np.asarray(self.g0, dtype=float)
        s = self.preorder.size
        if self.design_weights is None:
            self.design_weights = np.full(s, 1.0 / s)
        self.design_weights = np.asarray(self.design_weights, dtype=float)
        self.design_weights = self.design_weights / self.design_weights.sum()
        self._cells: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    @property
    def truth(self) -> np.ndarray:
        return self.g0

    @property
    def reference(self) -> np.ndarray:
        return self.g0

    def limit_spec(self) -> LimitSpec:
        return LimitSpec("regression", sigma=self.sigma, weights=self.design_weights)

    def limit_weights(self) -> np.ndarray:
        return self.design_weights

    def design(self, n: int):
        if n not in self._cells:
            counts = allocate_design(n, self.design_weights)
            if np.any(counts == 0):
                raise ValueError(f"n={n} leaves some design cells empty")
            self._cells[n] = (counts, np.repeat(np.arange(len(counts)), counts))
        return self._cells[n]

    def simulate(self, n: int, rng: np.random.Generator):
        counts, cell = self.design(n)
        noise = rng.normal(0.0, self.sigma, n) if self.sigma > 0 else np.zeros(n)
        sums = self.g0 * counts + np.bincount(cell, weights=noise, minlength=len(counts))
        out = regression_from_sums(self.preorder, sums, counts)
        return out.basic.values, out.isotonized.fitted, out.basic.weights


Scenario = PmfScenario | RegressionScenario


# ---------------------------------------------------------------------------
# replicate loops


def _chunks(replicates: int, workers: int) -> list[tuple[int, int]]:
    workers = max(1, min(workers, replicates))
    edges = np.linspace(0, replicates, workers + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _run(fn: Callable, args: tuple, replicates: int, workers: int):
    """Run ``fn(*args, start, stop)`` over replicate ranges; results in replicate order."""
    ranges = _chunks(replicates, workers)
    if len(ranges) <= 1:
        return [fn(*args, 0, replicates)]
    with ProcessPoolExecutor(max_workers=len(ranges)) as pool:
        futures = [pool.submit(fn, *args, a, b) for a, b in ranges]
        return [f.result() for f in futures]


def _limit_chunk(factor, lp, weights, antitonic, seed, start, stop):
    p = lp.preorder
    out = np.empty((stop - start, p.size))
    for row, i in enumerate(range(start, stop)):
        z = _rng.stream(seed, _rng.LIMIT, i).standard_normal(factor.shape[1])
        out[row] = phi(p, lp, factor @ z, weights, antitonic=antitonic)
    return out


def _raw_limit_chunk(factor, seed, start, stop):
    out = np.empty((stop - start, factor.shape[0]))
    for row, i in enumerate(range(start, stop)):
        out[row] = factor @ _rng.stream(seed, _rng.LIMIT, i).standard_normal(factor.shape[1])
    return out


def sample_limit(spec: LimitSpec, p: PreOrder, lp: LevelPartition, weights, replicates: int,
                 seed: int | None = None, antitonic: bool = False, workers: int = 1) -> np.ndarray:
    """Rows are ``phi^w(lambda)`` for independent ``lambda ~ N(0, C)``."""
    seed = _rng.resolve_seed(seed)
    cov = spec.covariance()
    if cov.shape != (p.size, p.size):
        raise CovarianceError(f"covariance is {cov.shape}, ground set has {p.size} elements")
    spec.check_rates(lp)
    factor = gaussian_factor(cov)
    w = np.ones(p.size) if weights is None else np.asarray(weights, dtype=float)
    parts = _run(_limit_chunk, (factor, lp, w, antitonic, seed), replicates, workers)
    return np.concatenate(parts)


def sample_gaussian(spec: LimitSpec, replicates: int, seed: int | None = None) -> np.ndarray:
    """Raw ``lambda`` draws, on the same streams :func:`sample_limit` uses."""
    seed = _rng.resolve_seed(seed)
    factor = gaussian_factor(spec.covariance())
    return _raw_limit_chunk(factor, seed, 0, replicates)


class FiniteSampleDraws(NamedTuple):
    scaled_fit: np.ndarray      # B_n (g_n* - g0)
    scaled_raw: np.ndarray      # B_n (g_n - g0)
    localized: np.ndarray       # g_n* equals phi(g_n) to 1e-9


def _finite_chunk(scenario, lp, n, rates, seed, tag, start, stop):
    s = scenario.preorder.size
    fit_rows = np.empty((stop - start, s))
    raw_rows = np.empty((stop - start, s))
    local = np.empty(stop - start, dtype=bool)
    mult = np.power(float(n), rates)
    truth = scenario.truth
    for row, i in enumerate(range(start, stop)):
        raw, fit, w = scenario.simulate(n, _rng.stream(seed, tag, i))
        fit_rows[row] = mult * (fit - truth)
        raw_rows[row] = mult * (raw - truth)
        if lp is not None:
            conc = phi(scenario.preorder, lp, raw, w, antitonic=scenario.antitonic)
            local[row] = np.max(np.abs(conc - fit)) < 1e-9
        else:
            local[row] = False
    return fit_rows, raw_rows, local


def simulate_finite_sample(scenario: Scenario, n: int, lp: LevelPartition | None, replicates: int,
                           seed: int | None = None, rates=None, workers: int = 1,
                           tag: int = _rng.FINITE) -> FiniteSampleDraws:
    seed = _rng.resolve_seed(seed)
    s = scenario.preorder.size
    rates = np.full(s, 0.5) if rates is None else np.asarray(rates, dtype=float)
    parts = _run(_finite_chunk, (scenario, lp, n, rates, seed, tag), replicates, workers)
    return FiniteSampleDraws(*(np.concatenate(x) for x in zip(*parts)))


def finite_sample_law(scenario: Scenario, n: int, lp: LevelPartition, replicates: int,
                      seed: int | None = None, rates=None, workers: int = 1) -> np.ndarray:
    """Rows are ``B_n (g_n* - g0)`` over independent simulated samples of size ``n``."""
    return simulate_finite_sample(scenario, n, lp, replicates, seed, rates, workers).scaled_fit


# ---------------------------------------------------------------------------
# truncation of infinitely supported pmfs


class TruncatedPmf(NamedTuple):
    preorder: PreOrder
    masses: np.ndarray
    dims: tuple[int, ...]
    tail_mass: float


def truncate_infinite_pmf(recipe: Callable[..., np.ndarray], mass_tol: float, dim: int = 2,
                          max_side: int = 4096, max_cells: int = 2_000_000) -> TruncatedPmf:
    """Smallest cube ``{1..K}^dim`` holding at least ``1 - mass_tol`` of the mass.

    ``recipe`` takes ``dim`` broadcastable arrays of 1-based coordinates and
    returns masses.  Masses are not renormalised; the leftover is reported as
    ``tail_mass``.
    """
    if not 0 <= mass_tol < 1:
        raise ValueError("mass_tol must lie in [0, 1)")

    def cube(K):
        axes = np.meshgrid(*[np.arange(1, K + 1)] * dim, indexing="ij")
        return np.asarray(recipe(*axes), dtype=float).reshape((K,) * dim)

    target = 1.0 - mass_tol
    K = 1
    while True:
        if K > max_side or K**dim > max_cells:
            raise ValueError(f"mass does not reach {target} within a side of {K - 1}")
        masses = cube(K)
        if np.any(masses < 0):
            raise ValueError("recipe produced negative mass")
        total = float(masses.sum())
        if total >= target - 1e-15:
            break
        K = K + 1 if K < 32 else int(K * 1.25) + 1
    # a geometric step may overshoot; walk back to the smallest side that works
    while K > 1 and float(cube(K - 1).sum()) >= target - 1e-15:
        K -= 1
    masses = cube(K)
    dims = (K,) * dim
    return TruncatedPmf(grid_preorder(dims), masses.ravel(), dims, max(0.0, 1.0 - float(masses.sum())))


# ---------------------------------------------------------------------------
# reporting


@dataclass
class MCReport:
    functional_samples: dict[str, dict[str, np.ndarray]]
    ks_distances: dict[str, float]
    n_used: int
    replicates: int
    seed: int
    extras: dict = field(default_factory=dict)
    finite_draws: np.ndarray | None = field(default=None, repr=False)
    limit_draws: np.ndarray | None = field(default=None, repr=False)
    raw_draws: np.ndarray | None = field(default=None, repr=False)
    localized: np.ndarray | None = field(default=None, repr=False)

    def max_ks(self, prefix: str = "") -> float:
        return max(v for k, v in self.ks_distances.items() if k.startswith(prefix))

    def to_dict(self, include_samples: bool = False) -> dict:
        out = {
            "n_used": self.n_used,
            "replicates": self.replicates,
            "seed": self.seed,
            "ks_distances": self.ks_distances,
            "extras": self.extras,
        }
        if include_samples:
            out["functional_samples"] = {
                k: {side: v.tolist() for side, v in d.items()}
                for k, d in self.functional_samples.items()
            }
        return out

    def to_json(self, include_samples: bool = False) -> str:
        return json.dumps(self.to_dict(include_samples), indent=2, sort_keys=True)


def functionals(draws: np.ndarray) -> dict[str, np.ndarray]:
    out = {f"coord_{i}": draws[:, i] for i in range(draws.shape[1])}
    out["l1"] = np.abs(draws).sum(axis=1)
    out["l2"] = np.sqrt((draws**2).sum(axis=1))
    return out


def compare_laws(finite: np.ndarray, limit: np.ndarray, n: int, seed: int,
                 extras: dict | None = None) -> MCReport:
    fin = functionals(finite)
    lim = functionals(limit)
    samples = {k: {"finite": fin[k], "limit": lim[k]} for k in fin}
    ks = {k: float(ks_2samp(fin[k], lim[k]).statistic) for k in fin}
    return MCReport(samples, ks, n, len(finite), seed, extras or {},
                    finite_draws=finite, limit_draws=limit)


def pooling_frequency(draws: np.ndarray, indices: Sequence[int], atol: float = 1e-12) -> float:
    """Fraction of rows on which the given coordinates are all equal."""
    sub = draws[:, list(indices)]
    return float(np.mean(np.ptp(sub, axis=1) <= atol * np.maximum(1.0, np.abs(sub).max(axis=1))))


def limit_check(scenario: Scenario, lp: LevelPartition, n: int, replicates: int,
                seed: int | None = None, workers: int = 1) -> MCReport:
    """Finite-sample law against limit law on the same level partition."""
    seed = _rng.resolve_seed(seed)
    spec = scenario.limit_spec()
    fin = simulate_finite_sample(scenario, n, lp, replicates, seed, workers=workers)
    lim = sample_limit(spec, scenario.preorder, lp, scenario.limit_weights(), replicates, seed,
                       antitonic=scenario.antitonic, workers=workers)
    extras = {
        "localization_frequency": float(fin.localized.mean()),
        "epsilon_tilde": lp.epsilon_tilde if math.isfinite(lp.epsilon_tilde) else None,
        "n_level_sets": len(lp.sets),
        "raw_variance": fin.scaled_raw.var(axis=0, ddof=1).tolist(),
        "limit_variance_diag": np.diag(spec.covariance()).tolist(),
    }
    report = compare_laws(fin.scaled_fit, lim, n, seed, extras)
    report.raw_draws = fin.scaled_raw
    report.localized = fin.localized
    return report
