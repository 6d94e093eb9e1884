"""
Antitonic pmf estimation on a 5x5 grid
======================================

Draw samples from a mixture of uniforms on nested squares, estimate the pmf
by relative frequencies and by their antitonic projection, and compare both
with the truth.
"""

import numpy as np

from isocone import ExperimentConfig, run_figure1

cfg = ExperimentConfig(n=[50, 300], replicates=1000, seed=20240517)
results = run_figure1(cfg)

for n, summary in results.items():
    print(f"n = {n}")
    for metric in ("l1", "l2", "hellinger"):
        emp = summary.median("empirical", metric)
        iso = summary.median("isotonized", metric)
        print(f"  {metric:9s} median  empirical {emp:.4f}   isotonized {iso:.4f}")

# the projection never loses in l2, sample by sample
s = results[50]
print("worst l2 gain:", np.max(s.raw["isotonized_l2"] - s.raw["empirical_l2"]))

# pass out="some_dir" to the config to get per-estimator CSVs and summary.json
