"""Independent oracles and property checks shared by unit and acceptance tests."""
import itertools

import numpy as np

from isocone.isotone_solver import isotonic_regression
from isocone.synthetic import random_isotonic


def brute_force_chain(values, weights=None):
    """Best isotonic fit on a chain by enumerating every split into contiguous blocks."""
    y = np.asarray(values, dtype=float)
    w = np.ones_like(y) if weights is None else np.asarray(weights, dtype=float)
    s = len(y)
    best, best_obj = None, np.inf
    for cuts in itertools.product([False, True], repeat=s - 1):
        bounds = [0] + [i + 1 for i, c in enumerate(cuts) if c] + [s]
        fit = np.empty(s)
        for a, b in zip(bounds[:-1], bounds[1:]):
            fit[a:b] = np.dot(w[a:b], y[a:b]) / w[a:b].sum()
        if np.all(np.diff(fit) >= -1e-15):
            obj = float(np.sum(w * (fit - y) ** 2))
            if obj < best_obj:
                best, best_obj = fit, obj
    return best


def wnorm(x, w):
    return float(np.sqrt(np.sum(np.asarray(x) ** 2 * w)))


def check_projection_properties(p, g, w, rng, n_h=100):
    """Assert the standard projection properties of one instance; returns nothing."""
    fit = isotonic_regression(p, g, w).fitted
    # isotonic
    assert p.is_isotonic(fit, slack=1e-12)
    # idempotence
    again = isotonic_regression(p, fit, w).fitted
    assert np.max(np.abs(again - fit)) <= 1e-12 * max(1.0, np.abs(fit).max())
    # weighted sum
    assert abs(np.dot(fit, w) - np.dot(g, w)) < 1e-9 * max(np.dot(np.abs(g), w), 1e-300)
    # bounds
    assert g.min() - 1e-12 <= fit.min() and fit.max() <= g.max() + 1e-12
    # translation and positive scaling
    c = float(rng.normal() * 3)
    shifted = isotonic_regression(p, g + c, w).fitted
    assert np.max(np.abs(shifted - (fit + c))) <= 1e-12 * max(1.0, np.abs(fit).max() + abs(c))
    a = float(rng.uniform(0.1, 10))
    scaled = isotonic_regression(p, a * g, w).fitted
    assert np.max(np.abs(scaled - a * fit)) <= 1e-12 * max(1.0, a * np.abs(fit).max())
    # nonexpansive
    g2 = g + rng.normal(size=len(g))
    fit2 = isotonic_regression(p, g2, w).fitted
    assert wnorm(fit - fit2, w) <= wnorm(g - g2, w) + 1e-12
    # error reduction against random isotonic h, for |.| and (.)^2
    for _ in range(n_h):
        h = random_isotonic(p, rng, levels=None) * float(rng.uniform(0.1, 2))
        for phi_ in (np.abs, np.square):
            assert np.sum(phi_(fit - h) * w) <= np.sum(phi_(g - h) * w) + 1e-9


ACCEPTANCE_LINES: list[str] = []


def report(label: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
