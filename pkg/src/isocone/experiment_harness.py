"""Reproducible experiment runs.

Two kinds of run are supported:

``figure1``
    The bimonotone pmf comparison: draw multinomial samples from a mixture of
    uniforms on a square grid and compare the empirical pmf with its
    antitonic projection in l1, l2 and Hellinger distance.

``limit-check-pmf`` / ``limit-check-reg``
    Finite-sample law of the scaled isotonized estimator against its limit
    law, summarised as an :class:`~isocone.limit_law.MCReport`.

Configs are plain JSON; see :class:`ExperimentConfig` for the fields.
"""
from __future__ import annotations

import csv
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import _rng
from .estimators import mixture_uniform_pmf, pmf_from_counts
from .level_structure import level_partition
from .limit_law import MCReport, PmfScenario, RegressionScenario, limit_check, _run
from .preorder import PreOrder, grid_preorder
from .io import format_float, preorder_from_dict

HELLINGER_CONVENTION = "H(p,q) = sqrt(sum_i (sqrt(p_i) - sqrt(q_i))^2), no 1/sqrt(2) factor"
FIGURE1_Q = (0.1, 0.2, 0.3, 0.2, 0.2)
SCENARIOS = ("figure1", "limit-check-pmf", "limit-check-reg")


@dataclass
class ExperimentConfig:
    name: str = "figure1"
    scenario: str = "figure1"
    dims: list[int] = field(default_factory=lambda: [5, 5])
    q: list[float] | None = None
    g0: list[float] | None = None
    pmf: list[float] | None = None
    preorder: dict | None = None
    sigma: float = 1.0
    n: list[int] = field(default_factory=lambda: [50, 300])
    replicates: int = 1000
    seed: int | None = None
    out: str | None = None

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        if isinstance(self.n, int):
            self.n = [self.n]
        if self.replicates < 1 or any(int(n) < 1 for n in self.n):
            raise ValueError("replicates and every n must be at least 1")
        if self.scenario == "figure1" and self.q is None:
            self.q = list(FIGURE1_Q)
        self.seed = _rng.resolve_seed(self.seed)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def build_preorder(self) -> PreOrder:
        if self.preorder is not None:
            return preorder_from_dict(self.preorder)
        return grid_preorder(self.dims)


# ---------------------------------------------------------------------------
# distances


def distances(p_hat, p_true) -> tuple[float, float, float]:
    """l1, l2 and (unsquared, unnormalised) Hellinger distance."""
    p_hat = np.asarray(p_hat, dtype=float)
    p_true = np.asarray(p_true, dtype=float)
    if p_hat.shape != p_true.shape:
        raise ValueError("p_hat and p_true must have the same length")
    if np.any(p_hat < -1e-12) or np.any(p_true < -1e-12):
        raise ValueError("distances need nonnegative vectors")
    diff = p_hat - p_true
    l1 = float(np.abs(diff).sum())
    l2 = float(np.sqrt((diff**2).sum()))
    root = np.sqrt(np.clip(p_hat, 0, None)) - np.sqrt(np.clip(p_true, 0, None))
    return l1, l2, float(np.sqrt((root**2).sum()))


METRICS = ("l1", "l2", "hellinger")
ESTIMATORS = ("empirical", "isotonized")


@dataclass
class DistanceSummary:
    n: int
    raw: dict[str, np.ndarray]          # "<estimator>_<metric>" -> per-replicate distances

    def quartiles(self) -> dict[str, dict[str, float]]:
        out = {}
        for key, vals in self.raw.items():
            q = np.quantile(vals, [0.0, 0.25, 0.5, 0.75, 1.0])
            out[key] = dict(zip(("min", "q1", "median", "q3", "max"), map(float, q)))
        return out

    def median(self, estimator: str, metric: str) -> float:
        return float(np.median(self.raw[f"{estimator}_{metric}"]))

    def columns(self) -> list[str]:
        return [f"{e}_{m}" for e in ESTIMATORS for m in METRICS]

    def write_csv(self, path, estimator: str) -> None:
        """One row per replicate with the three distances of ``estimator``."""
        cols = [f"{estimator}_{m}" for m in METRICS]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["replicate", *METRICS])
            for i in range(len(self.raw[cols[0]])):
                writer.writerow([i, *(format_float(self.raw[c][i]) for c in cols)])


def _figure1_chunk(p, pmf, n, seed, n_index, start, stop):
    cdf = np.cumsum(pmf)
    cdf /= cdf[-1]
    rows = np.empty((stop - start, 6))
    for row, i in enumerate(range(start, stop)):
        rng = _rng.stream(seed, _rng.FIGURE1, n_index * 1_000_003 + i)
        counts = np.bincount(np.searchsorted(cdf, rng.random(n), side="right"), minlength=p.size)
        est = pmf_from_counts(p, counts)
        rows[row, :3] = distances(est.basic.values, pmf)
        rows[row, 3:] = distances(est.isotonized.fitted, pmf)
    return rows


def run_figure1(cfg: ExperimentConfig, workers: int = 1) -> dict[int, DistanceSummary]:
    """Empirical vs isotonized pmf distances for every ``n`` in the config."""
    if cfg.scenario != "figure1":
        raise ValueError("run_figure1 needs scenario 'figure1'")
    p = grid_preorder(cfg.dims)
    pmf = mixture_uniform_pmf(cfg.dims, cfg.q)
    out = {}
    for k, n in enumerate(cfg.n):
        rows = np.concatenate(_run(_figure1_chunk, (p, pmf, int(n), cfg.seed, k), cfg.replicates, workers))
        keys = [f"{e}_{m}" for e in ESTIMATORS for m in METRICS]
        out[int(n)] = DistanceSummary(int(n), {key: rows[:, j] for j, key in enumerate(keys)})
    if cfg.out:
        write_figure1(cfg, out)
    return out


def write_figure1(cfg: ExperimentConfig, results: dict[int, DistanceSummary]) -> None:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    for n, summary in results.items():
        for est in ESTIMATORS:
            summary.write_csv(out / f"distances_{est}_n{n}.csv", est)
    summary = {
        "config": asdict(cfg),
        "hellinger_convention": HELLINGER_CONVENTION,
        "quartiles": {str(n): s.quartiles() for n, s in results.items()},
    }
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# limit checks


def build_scenario(cfg: ExperimentConfig):
    p = cfg.build_preorder()
    if cfg.scenario == "limit-check-pmf":
        if cfg.pmf is not None:
            pmf = np.asarray(cfg.pmf, dtype=float)
        elif cfg.q is not None:
            pmf = mixture_uniform_pmf(cfg.dims, cfg.q)
        else:
            raise ValueError("limit-check-pmf needs 'pmf' or 'q'")
        return PmfScenario(p, pmf)
    if cfg.scenario == "limit-check-reg":
        if cfg.g0 is None:
            raise ValueError("limit-check-reg needs 'g0'")
        return RegressionScenario(p, np.asarray(cfg.g0, dtype=float), sigma=cfg.sigma)
    raise ValueError(f"not a limit-check scenario: {cfg.scenario}")


def run_limit_check(cfg: ExperimentConfig, workers: int = 1) -> MCReport:
    scenario = build_scenario(cfg)
    lp = level_partition(scenario.preorder, scenario.reference)
    n = int(cfg.n[-1])
    report = limit_check(scenario, lp, n, cfg.replicates, cfg.seed, workers=workers)
    if cfg.out:
        write_limit_check(cfg, report)
    return report


def write_limit_check(cfg: ExperimentConfig, report: MCReport) -> None:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "mcreport.json", "w") as fh:
        fh.write(report.to_json())
        fh.write("\n")
    for name, draws in (("finite", report.finite_draws), ("limit", report.limit_draws)):
        write_matrix_csv(out / f"draws_{name}.csv", draws)


def write_matrix_csv(path, matrix: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in matrix:
            writer.writerow([format_float(x) for x in row])


def run_experiment(cfg: ExperimentConfig, workers: int = 1):
    if cfg.scenario == "figure1":
        return run_figure1(cfg, workers)
    return run_limit_check(cfg, workers)


def default_workers() -> int:
    return os.cpu_count() or 1
