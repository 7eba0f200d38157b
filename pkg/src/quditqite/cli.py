"""Command line front end: ``quditqite <subcommand> ...``."""
import argparse
import csv
import logging
import sys
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import bench
from ._accel import backend_name
from .problem import InstanceError, generate_instance, load_instance, save_instance
from .qubo import CONSTRAINT_MODES, write_exports
from .solver import RunRecord, SolverConfig, solve

log = logging.getLogger("quditqite")

SUMMARY_COLUMNS = ["instance", "seed", "N", "d", "c_max", "final_cost", "cut_cost", "feasible",
                   "violated_partitions", "max_violation", "steps", "best_step", "stop_reason", "wall_ms"]
TRAJECTORY_COLUMNS = ["step", "energy", "rounded_cost", "rounded_cut_cost", "partition_counts"]
AR_INSTANCE_COLUMNS = ["instance", "seed", "N", "d", "metric", "qite_cost", "baseline_cost", "ar", "note"]
AR_TABLE_COLUMNS = ["N", "d", "instances", "na", "mean_ar", "std_ar"]
HISTOGRAM_COLUMNS = ["N", "d", "c_max", "size", "size_pct_of_N", "count", "fraction_of_partitions"]
VIOLATION_COLUMNS = ["N", "d", "c_max", "partitions", "violating", "violation_fraction", "max_margin"]


def _int_list(text):
    return [int(x) for x in text.split(",") if x.strip()]


def _fmt(x):
    if x is None:
        return "NA"
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (float, np.floating)):
        return "NA" if not np.isfinite(x) else repr(float(x))
    return str(x)


def _write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(c)) for c in columns])


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _ensure_dir(path):
    path = Path(path)
    if path.exists() and not path.is_dir():
        raise SystemExit(f"error: output path {path} exists and is not a directory")
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise SystemExit(f"error: cannot create output directory {path}: {exc}")
    return path


def instance_seed(base_seed, num_vertices, d, index):
    return int(np.random.SeedSequence([base_seed, num_vertices, d, index]).generate_state(1)[0])


# ------------------------------------------------------------------- generate

def cmd_generate(args):
    out = _ensure_dir(args.out)
    written = 0
    for n in args.sizes:
        for d in args.dims:
            for idx in range(args.instances):
                seed = instance_seed(args.seed, n, d, idx)
                inst = generate_instance(n, args.neighbors, d=d, seed=seed, lambda1=args.lambda1, c_max=args.c_max)
                inst.meta["index"] = idx
                save_instance(inst, out / f"n{n}_d{d}_{idx:03d}.json")
                written += 1
    log.info("wrote %d instances to %s", written, out)
    return 0


# ---------------------------------------------------------------------- solve

def _expand_inputs(paths, pattern="*.json"):
    files = []
    for p in paths:
        p = Path(p)
        files.extend(sorted(p.glob(pattern)) if p.is_dir() else [p])
    return files


def _config_from_args(args):
    return SolverConfig(delta_tau=args.dtau, max_steps=args.max_steps, plateau_window=args.plateau_window,
                        record_every=args.record_every, record_selections=not args.no_selections,
                        init_noise=args.init_noise, seed=args.seed)


def summary_row(name, instance_seed_value, rec):
    counts = np.array(rec.best_counts)
    over = counts - rec.c_max
    return {
        "instance": name, "seed": instance_seed_value, "N": rec.num_vertices, "d": rec.num_partitions,
        "c_max": rec.c_max, "final_cost": rec.best_cost, "cut_cost": rec.best_cut_cost,
        "feasible": rec.feasible, "violated_partitions": int((over > 0).sum()),
        "max_violation": int(max(0, over.max())), "steps": rec.steps_executed, "best_step": rec.best_step,
        "stop_reason": rec.stop_reason, "wall_ms": rec.wall_time * 1e3,
    }


def _solve_one(task):
    path, out, config, timing, trajectory = task
    name = Path(path).stem
    try:
        inst = load_instance(path)
    except InstanceError as exc:
        return name, None, str(exc)
    rec = solve(inst, config)
    rec.to_json(Path(out) / f"{name}.run.json", timing=timing)
    if trajectory:
        rows = [{"step": t, "energy": e, "rounded_cost": c, "rounded_cut_cost": ct,
                 "partition_counts": ";".join(map(str, cn))}
                for t, e, c, ct, cn in zip(rec.steps, rec.energies, rec.rounded_costs,
                                           rec.rounded_cut_costs, rec.partition_counts)]
        _write_csv(Path(out) / f"{name}.trajectory.csv", TRAJECTORY_COLUMNS, rows)
    row = summary_row(name, inst.seed, rec)
    if not timing:
        row["wall_ms"] = None
    return name, row, None


def cmd_solve(args):
    out = _ensure_dir(args.out)
    files = _expand_inputs(args.instances)
    if not files:
        raise SystemExit("error: no instance files given")
    config = _config_from_args(args)
    tasks = [(str(f), str(out), config, not args.no_timing, not args.no_trajectory) for f in files]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_solve_one, tasks))
    else:
        results = [_solve_one(t) for t in tasks]
    rows = [r for _, r, err in results if err is None]
    errors = [{"instance": name, "error": err} for name, _, err in results if err is not None]
    rows.sort(key=lambda r: (r["N"], r["d"], r["instance"]))
    _write_csv(out / "summary.csv", SUMMARY_COLUMNS, rows)
    if errors:
        _write_csv(out / "errors.csv", ["instance", "error"], errors)
        for e in errors:
            log.error("%s: %s", e["instance"], e["error"])
        return 1
    log.info("solved %d instances (%s kernels)", len(rows), backend_name())
    return 0


# -------------------------------------------------------------------- compare

def _as_float(text):
    try:
        v = float(text)
    except (TypeError, ValueError):
        return None
    return v if np.isfinite(v) else None


def approximation_ratios(summary_rows, baseline_rows, constraint_mode="penalized"):
    """Per-instance AR rows and per-(N, d) cells; cells cover every summary cell."""
    metric = "final_cost" if constraint_mode == "penalized" else "cut_cost"
    baseline = {}
    for b in baseline_rows:
        baseline[(str(b["seed"]), int(b["N"]), int(b["d"]))] = _as_float(b.get("baseline_cost"))
    per_instance = []
    cells = defaultdict(list)
    missing = 0
    for r in summary_rows:
        key = (str(r["seed"]), int(r["N"]), int(r["d"]))
        qite = _as_float(r[metric])
        note = ""
        ar = None
        if key not in baseline:
            note, missing = "missing baseline", missing + 1
        elif baseline[key] is None:
            note = "baseline not numeric"
        elif baseline[key] == 0:
            note = "baseline cost is zero"
        elif constraint_mode == "hard" and r["feasible"] not in ("1", True):
            note = "qite solution infeasible"
        elif qite is None:
            note = "qite cost missing"
        else:
            ar = qite / baseline[key]
        per_instance.append({"instance": r.get("instance", ""), "seed": key[0], "N": key[1], "d": key[2],
                             "metric": metric, "qite_cost": qite, "baseline_cost": baseline.get(key),
                             "ar": ar, "note": note})
        cells[(key[1], key[2])].append(ar)
    if missing:
        log.warning("%d instances have no baseline row; their AR is NA", missing)
    table = []
    for (n, d), ars in sorted(cells.items()):
        vals = np.array([a for a in ars if a is not None])
        table.append({
            "N": n, "d": d, "instances": len(ars), "na": len(ars) - len(vals),
            "mean_ar": float(vals.mean()) if len(vals) else None,
            "std_ar": float(vals.std(ddof=1)) if len(vals) > 1 else None,
        })
    return per_instance, table


def format_table(table):
    sizes = sorted({c["N"] for c in table})
    dims = sorted({c["d"] for c in table})
    lookup = {(c["N"], c["d"]): c for c in table}
    lines = ["Vertices | " + " | ".join(f"d={d}" for d in dims)]
    for n in sizes:
        cells = []
        for d in dims:
            c = lookup.get((n, d))
            if c is None or c["mean_ar"] is None:
                cells.append("NA")
            elif c["std_ar"] is None:
                cells.append(f"{c['mean_ar']:.3f}")
            else:
                cells.append(f"{c['mean_ar']:.3f} ± {c['std_ar']:.3f}")
        lines.append(f"{n} | " + " | ".join(cells))
    return "\n".join(lines)


def cmd_compare(args):
    out = _ensure_dir(args.out)
    per_instance, table = approximation_ratios(_read_csv(args.summary), _read_csv(args.baseline),
                                               args.constraint_mode)
    _write_csv(out / "ar_instances.csv", AR_INSTANCE_COLUMNS, per_instance)
    _write_csv(out / "ar_table.csv", AR_TABLE_COLUMNS, table)
    print(format_table(table))
    return 0


# ------------------------------------------------------------------ histogram

def partition_histogram(records):
    """Pool final partition sizes per (N, d) cell at one-vertex resolution."""
    pooled = defaultdict(list)
    cmax = {}
    for rec in records:
        key = (rec.num_vertices, rec.num_partitions)
        pooled[key].extend(rec.best_counts)
        cmax[key] = rec.c_max
    hist_rows, viol_rows = [], []
    for (n, d), sizes in sorted(pooled.items()):
        sizes = np.array(sizes, dtype=np.int64)
        c = cmax[(n, d)]
        counts = np.bincount(sizes, minlength=n + 1)
        for size, cnt in enumerate(counts):
            hist_rows.append({"N": n, "d": d, "c_max": c, "size": size, "size_pct_of_N": 100.0 * size / n,
                              "count": int(cnt), "fraction_of_partitions": cnt / len(sizes)})
        over = sizes - c
        viol_rows.append({"N": n, "d": d, "c_max": c, "partitions": len(sizes),
                          "violating": int((over > 0).sum()), "violation_fraction": float((over > 0).mean()),
                          "max_margin": int(max(0, over.max()))})
    return hist_rows, viol_rows


def cmd_histogram(args):
    files = _expand_inputs(args.records, "*.run.json")
    if not files:
        raise SystemExit("error: no RunRecord files given")
    records = [RunRecord.load(f) for f in files]
    hist_rows, viol_rows = partition_histogram(records)
    out = _ensure_dir(args.out)
    _write_csv(out / "histogram.csv", HISTOGRAM_COLUMNS, hist_rows)
    _write_csv(out / "violations.csv", VIOLATION_COLUMNS, viol_rows)
    for v in viol_rows:
        print(f"N={v['N']} d={v['d']}: {v['violating']}/{v['partitions']} partitions over C_max, "
              f"max margin {v['max_margin']}")
    return 0


# ---------------------------------------------------------------- export-qubo

def cmd_export_qubo(args):
    out = _ensure_dir(args.out)
    status = 0
    for path in _expand_inputs(args.instances):
        try:
            inst = load_instance(path)
        except InstanceError as exc:
            log.error("%s", exc)
            status = 1
            continue
        for p in write_exports(inst, args.constraint_mode, out, Path(path).stem):
            log.info("wrote %s", p)
    return status


# -------------------------------------------------------------- bench-scaling

def cmd_bench_scaling(args):
    out = Path(args.out)
    if out.parent != Path(""):
        _ensure_dir(out.parent)
    edges = bench.edge_scaling(args.num_vertices, args.neighbors, args.d, seed=args.seed)
    dims = bench.dim_scaling(args.num_vertices, args.neighbors, (args.d, 2 * args.d), seed=args.seed)
    rows = [dict(kind="edges", **r) for r in edges] + [dict(kind="dim", **r) for r in dims]
    _write_csv(out, ["kind", "num_vertices", "neighbors", "num_edges", "d", "sec_per_step"], rows)
    e_ratio = edges[1]["sec_per_step"] / edges[0]["sec_per_step"]
    d_ratio = dims[1]["sec_per_step"] / dims[0]["sec_per_step"]
    print(f"backend={backend_name()}")
    print(f"|E| {edges[0]['num_edges']} -> {edges[1]['num_edges']}: step time x{e_ratio:.2f}")
    print(f"d {dims[0]['d']} -> {dims[1]['d']}: step time x{d_ratio:.2f}")
    if args.compare_backends:
        comp = bench.backend_comparison(seed=args.seed)
        comp_path = out.with_name(out.stem + "_backends.csv")
        _write_csv(comp_path, ["num_vertices", "neighbors", "d", "num_edges", "loops_sec", "numpy_sec",
                               "speedup"], comp)
        for r in comp:
            print(f"N={r['num_vertices']} d={r['d']} |E|={r['num_edges']}: loops {r['loops_sec'] * 1e6:.1f} us, "
                  f"numpy {r['numpy_sec'] * 1e6:.1f} us, x{r['speedup']:.1f}")
    return 0


# ---------------------------------------------------------------------- parser

def build_parser():
    p = argparse.ArgumentParser(prog="quditqite", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write random k-NN Min-d-Cut instances")
    g.add_argument("--sizes", type=_int_list, default=[50, 100, 150])
    g.add_argument("--dims", type=_int_list, default=[3, 5, 7])
    g.add_argument("--instances", type=int, default=50, help="instances per (N, d) cell")
    g.add_argument("--neighbors", type=int, default=10)
    g.add_argument("--lambda1", type=float, default=None, help="override the linear penalty scalar")
    g.add_argument("--c-max", type=int, default=None, help="override the capacity (default ceil(2N/d))")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="run the solver on instance files")
    s.add_argument("instances", nargs="+", help="instance JSON files or directories")
    s.add_argument("--out", required=True)
    s.add_argument("--dtau", type=float, default=SolverConfig.delta_tau)
    s.add_argument("--max-steps", type=int, default=SolverConfig.max_steps)
    s.add_argument("--plateau-window", type=int, default=SolverConfig.plateau_window)
    s.add_argument("--record-every", type=int, default=1)
    s.add_argument("--init-noise", type=float, default=SolverConfig.init_noise)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--no-timing", action="store_true", help="leave wall_ms empty so outputs are reproducible")
    s.add_argument("--no-trajectory", action="store_true")
    s.add_argument("--no-selections", action="store_true", help="do not store selected pool indices")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("compare", help="approximation ratios against imported baseline costs")
    c.add_argument("summary")
    c.add_argument("baseline", help="CSV with columns seed,N,d,baseline_cost")
    c.add_argument("--constraint-mode", choices=CONSTRAINT_MODES, default="penalized")
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_compare)

    h = sub.add_parser("histogram", help="partition-size distribution of solved runs")
    h.add_argument("records", nargs="+", help="RunRecord JSON files or directories")
    h.add_argument("--out", required=True)
    h.set_defaults(func=cmd_histogram)

    q = sub.add_parser("export-qubo", help="write LP and JSON QUBO files for external solvers")
    q.add_argument("instances", nargs="+")
    q.add_argument("--constraint-mode", choices=CONSTRAINT_MODES, default="penalized")
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_export_qubo)

    b = sub.add_parser("bench-scaling", help="per-step time versus |E| and d")
    b.add_argument("--num-vertices", type=int, default=1000)
    b.add_argument("--neighbors", type=int, default=30)
    b.add_argument("--d", type=int, default=8)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--compare-backends", action="store_true")
    b.add_argument("--out", default="bench_scaling.csv")
    b.set_defaults(func=cmd_bench_scaling)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
