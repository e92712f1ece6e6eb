"""Command-line entry point.

Subcommands:
    run        one simulation: result JSON + occupancy PGM + network JSON
    sweep      weight-grid sweep: aggregate CSV, per-run CSV, histogram CSV
    diffmap    sequential-vs-parallel difference map CSV
    optimize   zoning assignment enumeration + Pareto front CSV

Exit codes: 0 success, 1 runtime error, 2 usage or schema error. The
default seed comes from --seed, then the scenario file, then the
MORPHOGEN_SEED environment variable, then 0. All commands are
deterministic for fixed inputs and seeds, independent of --jobs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from . import explorer, optimizer, scenario as scen
from .engine import run as engine_run


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def _config_hash(config) -> str:
    payload = json.dumps(asdict(config), sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def _provenance(config, base_seed) -> str:
    return (f"# config_hash={_config_hash(config)} "
            f"seed_policy=seedseq(base={base_seed},point,replicate)")


def _write_csv(path, header, rows, comment):
    lines = [comment, ",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _parse_alpha(text):
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("alpha needs 4 comma-separated values")
    return tuple(float(p) for p in parts)


def _add_common(p):
    p.add_argument("scenario", help="scenario JSON path")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--alpha", type=_parse_alpha, default=None, metavar="a1,a2,a3,a4")
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--n-per-step", type=int, default=None)
    p.add_argument("--theta2", type=float, default=None)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--moran-m", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out-dir", default=".")


def build_parser():
    parser = argparse.ArgumentParser(prog="morphogen",
                                     description="urban growth simulator and exploration harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="single simulation")
    _add_common(p_run)
    p_run.add_argument("--with-h", action="store_true",
                       help="also run the residential dynamics and report H")

    p_sweep = sub.add_parser("sweep", help="weight-grid sweep")
    _add_common(p_sweep)
    p_sweep.add_argument("--step", type=float, default=None)
    p_sweep.add_argument("--replicates", type=int, default=None)

    p_diff = sub.add_parser("diffmap", help="update-scheme difference map")
    _add_common(p_diff)
    p_diff.add_argument("--step", type=float, default=None)
    p_diff.add_argument("--n-parallel", type=int, default=None)
    p_diff.add_argument("--replicates", type=int, default=None)

    p_opt = sub.add_parser("optimize", help="zoning assignment enumeration")
    _add_common(p_opt)
    p_opt.add_argument("--replicates", type=int, default=None)
    return parser


def _load(args):
    loaded = scen.load_scenario(args.scenario)
    config = loaded.engine
    overrides = {}
    if args.alpha is not None:
        overrides["alpha"] = args.alpha
    if args.steps is not None:
        overrides["steps"] = args.steps
    if args.n_per_step is not None:
        overrides["n_per_step"] = args.n_per_step
    if args.theta2 is not None:
        overrides["theta2"] = args.theta2
    if args.rho is not None:
        overrides["rho"] = args.rho
    seed = args.seed
    if seed is None and "MORPHOGEN_SEED" in os.environ:
        seed = int(os.environ["MORPHOGEN_SEED"])
    if seed is not None:
        overrides["seed"] = seed
    if overrides:
        config = replace(config, **overrides)
    moran_areas = args.moran_m if args.moran_m is not None else loaded.moran_areas
    return loaded, config, moran_areas


def cmd_run(args) -> int:
    loaded, config, moran_areas = _load(args)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = engine_run(loaded.scenario, config, compute_h=args.with_h,
                        segregation_config=loaded.segregation, moran_areas=moran_areas)
    scen.write_json(out / "result.json", scen.result_to_json(result, moran_areas))
    scen.write_pgm(out / "pattern.pgm", result.state.lattice)
    scen.write_json(out / "network.json", scen.network_to_json(result.state.network))
    return 0


def cmd_sweep(args) -> int:
    loaded, config, _ = _load(args)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    plan = explorer.SweepPlan(
        base_config=config,
        step=args.step if args.step is not None else loaded.sweep.get("step", 0.2),
        replicates=(args.replicates if args.replicates is not None
                    else loaded.sweep.get("replicates", 5)),
        base_seed=config.seed,
        jobs=args.jobs,
    )
    records = explorer.sweep(plan, loaded.scenario)
    comment = _provenance(config, config.seed)

    header = ["alpha1", "alpha2", "alpha3", "alpha4", "replicates"]
    for m in explorer.SWEEP_METRICS:
        header += [f"{m}_mean", f"{m}_std", f"{m}_excluded"]
    rows = []
    for rec in records:
        row = list(rec.alpha) + [len(rec.seeds)]
        for m in explorer.SWEEP_METRICS:
            row += [rec.means.get(m), rec.stds.get(m), rec.excluded.get(m, 0)]
        rows.append(row)
    _write_csv(out / "sweep.csv", header, rows, comment)

    run_header = ["alpha1", "alpha2", "alpha3", "alpha4", "seed",
                  "D", "I", "S", "A", "H", "lambda"]
    run_rows = []
    for rec in records:
        for seed, values in zip(rec.seeds, rec.runs):
            run_rows.append(list(rec.alpha) + [seed] + [values.get(m) for m in
                                                        ("D", "I", "S", "A", "H", "lambda")])
    _write_csv(out / "runs.csv", run_header, run_rows, comment)

    hist_header = ["alpha1", "alpha2", "alpha3", "alpha4", "metric", "bin_lo", "bin_hi", "count"]
    hist_rows = []
    for rec in records:
        for m, vals in rec.values.items():
            _, _, _, (counts, edges) = explorer.replicate_stats(vals)
            for b, count in enumerate(counts):
                hist_rows.append(list(rec.alpha) + [m, edges[b], edges[b + 1], int(count)])
    _write_csv(out / "histograms.csv", hist_header, hist_rows, comment)
    return 0


def cmd_diffmap(args) -> int:
    loaded, config, _ = _load(args)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    block = loaded.diffmap
    step = args.step if args.step is not None else block.get("step", 0.5)
    points = explorer.alpha_grid(step)
    records = explorer.scheme_difference_map(
        points,
        loaded.scenario,
        config,
        n_parallel=(args.n_parallel if args.n_parallel is not None
                    else block.get("n_parallel", 20)),
        replicates=(args.replicates if args.replicates is not None
                    else block.get("replicates", 3)),
        base_seed=config.seed,
        jobs=args.jobs,
    )
    header = ["alpha1", "alpha2", "alpha3", "alpha4", "replicates",
              "mean_abs_delta", "D", "I", "significance", "sizes"]
    rows = [list(r.alpha) + [len(r.sizes), r.mean_size, r.d_proj, r.i_proj, r.significance,
                             ";".join(str(s) for s in r.sizes)]
            for r in records]
    _write_csv(out / "diffmap.csv", header, rows, _provenance(config, config.seed))
    return 0


def _build_zoning(loaded, config, moran_areas):
    sc = loaded.scenario
    if sc.centers is None or sc.network_nodes is None:
        raise ValueError("optimize needs explicit centers and an explicit network")
    if not loaded.assignable_centers:
        raise ValueError("optimize needs centers marked assignable")
    pts = np.asarray(sc.network_nodes, dtype=float)

    def node_of(center_idx):
        (x, y), _ = sc.centers[center_idx]
        d = np.linalg.norm(pts - np.array([x, y]), axis=1)
        idx = int(np.argmin(d))
        if d[idx] > 1e-9:
            raise ValueError(f"center ({x},{y}) does not coincide with any network node")
        return idx

    include_fixed = loaded.optimize.get("include_fixed_in_access", True)
    return optimizer.ZoningScenario(
        size=sc.size,
        network_nodes=sc.network_nodes,
        network_edges=sc.network_edges,
        assignable_nodes=[node_of(i) for i in loaded.assignable_centers],
        fixed_centers=[(node_of(i), sc.centers[i][1]) for i in loaded.fixed_centers],
        engine_template=config,
        segregation=loaded.segregation,
        include_fixed_in_access=include_fixed,
        moran_areas=moran_areas,
    )


def cmd_optimize(args) -> int:
    loaded, config, moran_areas = _load(args)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    zoning = _build_zoning(loaded, config, moran_areas)
    replicates = (args.replicates if args.replicates is not None
                  else loaded.optimize.get("replicates", 5))
    records = optimizer.optimize(zoning, replicates=replicates,
                                 base_seed=config.seed, jobs=args.jobs)
    header = ["assignment", "H_mean", "H_std", "A_mean", "A_std",
              "lambda", "pareto", "valid", "replicates"]
    rows = [[r.bits, r.mean_h, r.std_h, r.mean_a, r.std_a, r.heterogeneity,
             int(bool(r.pareto)), int(r.valid), replicates]
            for r in records]
    _write_csv(out / "assignments.csv", header, rows, _provenance(config, config.seed))
    return 0


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "diffmap": cmd_diffmap, "optimize": cmd_optimize}


def _preflight(args) -> None:
    """Everything that should fail with a usage error (exit 2) before any
    output is touched: schema, overrides, plan shape, zoning structure, and
    scenario consistency for the configs the command will actually run."""
    from .engine import validate_scenario_state

    loaded, config, moran_areas = _load(args)
    if args.command == "optimize":
        # activity coverage comes from the assignments themselves; only the
        # zoning structure and network shape can be checked up front
        _build_zoning(loaded, config, moran_areas)
        config = replace(config, alpha=(1.0, 0.0, 0.0, 0.0))
    if args.command in ("sweep", "diffmap"):
        step = args.step if args.step is not None else loaded.sweep.get("step", 0.2)
        explorer.alpha_grid(step)
        # a full grid sweep includes every corner, so the scenario must
        # support all four components at once
        config = replace(config, alpha=(1.0, 1.0, 1.0, 1.0))
    state = loaded.scenario.build_state(np.random.default_rng(config.seed))
    validate_scenario_state(state, config)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _preflight(args)
    except (OSError, scen.ScenarioError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](args)
    except Exception as exc:  # runtime failure after validation
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
