"""Basic (unconstrained) estimators and their isotonized versions.

Two sampling models are covered:

* pmf draws: i.i.d. element indices; the basic estimator is the empirical
  pmf and the constrained estimate is its antitonic (decreasing) projection
  with unit weights;
* regression pairs: ``(element index, response)``; the basic estimator is
  the per-cell mean and the constrained estimate is the isotonic projection
  weighted by cell occupancy fractions.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .isotone_solver import IsotonicFit, WeightedFunction, antitonic_regression, isotonic_regression
from .preorder import PreOrder


@dataclass(frozen=True)
class Sample:
    kind: Literal["pmf", "regression"]
    indices: np.ndarray
    responses: np.ndarray | None = None

    @property
    def n(self) -> int:
        return len(self.indices)

    @classmethod
    def pmf_draws(cls, indices: Sequence[int]) -> "Sample":
        return cls("pmf", np.asarray(indices, dtype=np.intp))

    @classmethod
    def regression_pairs(cls, pairs: Sequence[tuple[int, float]]) -> "Sample":
        pairs = list(pairs)
        if not pairs:
            return cls("regression", np.empty(0, dtype=np.intp), np.empty(0))
        idx, y = zip(*pairs)
        return cls("regression", np.asarray(idx, dtype=np.intp), np.asarray(y, dtype=float))


@dataclass
class EstimatorOutput:
    basic: WeightedFunction
    isotonized: IsotonicFit
    empirical_weights: np.ndarray | None = None


def _check_indices(p: PreOrder, sample: Sample, kind: str) -> None:
    if sample.kind != kind:
        raise ValueError(f"expected a {kind} sample, got {sample.kind}")
    if sample.n == 0:
        raise ValueError("empty sample")
    if sample.indices.min() < 0 or sample.indices.max() >= p.size:
        raise ValueError("sample index outside the ground set")


def empirical_pmf(p: PreOrder, sample: Sample) -> EstimatorOutput:
    _check_indices(p, sample, "pmf")
    counts = np.bincount(sample.indices, minlength=p.size)
    return pmf_from_counts(p, counts)


def pmf_from_counts(p: PreOrder, counts) -> EstimatorOutput:
    counts = np.asarray(counts)
    n = counts.sum()
    if n <= 0:
        raise ValueError("empty sample")
    basic = WeightedFunction(counts / n, np.ones(p.size))
    return EstimatorOutput(basic, antitonic_regression(p, basic))


def regression_means(p: PreOrder, sample: Sample) -> EstimatorOutput:
    _check_indices(p, sample, "regression")
    counts = np.bincount(sample.indices, minlength=p.size)
    if np.any(counts == 0):
        empty = np.flatnonzero(counts == 0).tolist()
        raise ValueError(f"no observations in cells {empty}; the cell mean is undefined")
    sums = np.bincount(sample.indices, weights=sample.responses, minlength=p.size)
    return regression_from_sums(p, sums, counts)


def regression_from_sums(p: PreOrder, sums, counts) -> EstimatorOutput:
    counts = np.asarray(counts, dtype=float)
    w = counts / counts.sum()
    basic = WeightedFunction(np.asarray(sums) / counts, w)
    return EstimatorOutput(basic, isotonic_regression(p, basic), w)


def mixture_uniform_pmf(dims: Sequence[int], q) -> np.ndarray:
    """``sum_r q_r * Uniform({1..r}^d)`` on the cube of side ``len(q)``, row-major.

    ``p(x) = sum_{r >= max(x)} q_r / r**d``; decreasing in every coordinate.
    """
    q = np.asarray(q, dtype=float)
    dims = [int(r) for r in dims]
    if q.ndim != 1 or len(q) == 0 or np.any(q < 0) or not np.isclose(q.sum(), 1.0, atol=1e-12):
        raise ValueError("q must be a nonnegative vector summing to 1")
    if any(r != len(q) for r in dims):
        raise ValueError(f"every grid side must equal len(q) = {len(q)}, got {dims}")
    d = len(dims)
    r = np.arange(1, len(q) + 1)
    tail = np.cumsum((q / r**d)[::-1])[::-1]          # tail[k] = sum_{r >= k+1}
    grids = np.meshgrid(*[np.arange(len(q))] * d, indexing="ij")
    top = np.max(np.stack(grids), axis=0)
    return tail[top].ravel()
