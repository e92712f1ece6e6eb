"""How many replicates does a weight point need?

Runs one corner of the weight hypercube many times over random initial
center layouts, summarizes the spread of each metric, and applies the
normal-approximation trial-count rule to see how many runs a target
confidence interval would take.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from morphogen import EngineConfig, Scenario, run
from morphogen.explorer import replicate_stats, required_trials

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

N_RUNS = 60
metrics = {"D": [], "I": [], "S": [], "A": []}
for seed in range(N_RUNS):
    result = run(Scenario(size=28), EngineConfig(alpha=(1, 0, 0, 0), seed=seed))
    for name in metrics:
        if name in result.metrics:
            metrics[name].append(result.metrics[name])

fig, axes = plt.subplots(1, 4, figsize=(16, 3.5))
for ax, (name, values) in zip(axes, metrics.items()):
    mean, std, count, (hist, edges) = replicate_stats(values)
    rel = std / abs(mean) if mean else float("inf")
    print(f"{name}: mean={mean:.4f} std={std:.4f} (std/mean={rel:.2%}, {count} runs)")
    for length in (0.05, 0.17):
        print(f"   95% CI of length {length}: {required_trials(std, length)} trials")
    ax.stairs(hist, edges, fill=True, color="steelblue")
    ax.axvline(mean, color="firebrick")
    ax.set_title(name)
fig.tight_layout()
fig.savefig(OUT / "sensitivity_replicates.png", dpi=150)
print("saved", OUT / "sensitivity_replicates.png")
