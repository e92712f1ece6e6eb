"""Run one reference-scale simulation and inspect the outcome.

A 56x56 world, four random centers on a percolated initial network, thirty
steps of fifteen cells. Prints the metric vector and saves the occupancy
pattern with the final road network drawn on top.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from morphogen import EngineConfig, Scenario, run

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

config = EngineConfig(alpha=(0.4, 0.2, 0.3, 0.8), steps=30, n_per_step=15, seed=2014)
result = run(Scenario(size=56), config, compute_h=True)

print("built cells:", result.state.lattice.built_count)
for name, value in sorted(result.metrics.items()):
    print(f"  {name:>6s} = {value:.4f}")
for name, reason in result.metric_errors.items():
    print(f"  {name:>6s} undefined: {reason}")

# pattern + network overlay
fig, ax = plt.subplots(figsize=(7, 7))
occ = result.state.lattice.occupancy
ax.imshow(occ.T, origin="lower", cmap="Blues", extent=(0, 56, 0, 56), alpha=0.85)
net = result.state.network
pts = np.asarray(net.nodes)
for u, v in net.edges:
    ax.plot([pts[u, 0], pts[v, 0]], [pts[u, 1], pts[v, 1]], color="firebrick", lw=0.8)
centers = np.asarray([net.nodes[n] for n, _ in net.centers])
ax.scatter(centers[:, 0], centers[:, 1], marker="s", s=60, color="black", zorder=5,
           label="centers")
ax.set_title(f"growth after {config.steps} steps (seed {config.seed})")
ax.legend(loc="upper right")
fig.tight_layout()
fig.savefig(OUT / "single_run.png", dpi=150)
print("saved", OUT / "single_run.png")
