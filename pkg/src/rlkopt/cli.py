"""Command-line entry points: `solve` for one run, `bench` for the full
run-matrix with gap aggregation.

`bench` reads a TOML run specification, fans (instance, mode, seed)
triples across a worker pool, and writes results.json, results.csv, and
cumgap.tsv (cumulative average gap per mode, instances sorted by size).
"""

import argparse
import csv
import json
import sys
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .tsplib import parse_tsplib, parse_tsptw, write_tour
from .core import Instance
from .rl import RLConfig
from .kopt import KOptConfig
from .solver import MODES, SolverConfig, SolveResult, solve, solve_tsptw


@dataclass
class RunSpec:
    instances: list[str]
    modes: list[str]
    runs: int = 10
    base_seed: int = 0
    bks: dict[str, int] = field(default_factory=dict)
    output_dir: str = "."
    workers: int | None = None
    i_max: int | None = None
    t_max: float | None = None

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if not self.modes:
            raise ValueError("modes list must not be empty")
        if not self.instances:
            raise ValueError("instances list must not be empty")
        for m in self.modes:
            if m not in MODES:
                raise ValueError(f"unknown mode {m!r}")


@dataclass
class GapRow:
    instance: str
    n: int
    mode: str
    best: int
    average: float
    seconds: float
    trials: int
    gap: float | None  # mean (length - BKS) / BKS over runs; None without BKS


@dataclass
class GapReport:
    rows: list[GapRow]
    errors: list[str] = field(default_factory=list)


def load_runspec(path: str) -> RunSpec:
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    bks = {str(k): int(v) for k, v in data.get("bks", {}).items()}
    bks_file = data.get("bks_file")
    if bks_file:
        # Plain two-column table: instance name, best known length.
        base = Path(path).parent
        for line in (base / bks_file).read_text().splitlines():
            parts = line.split()
            if len(parts) >= 2 and not line.lstrip().startswith("#"):
                bks[parts[0]] = int(parts[1])
    return RunSpec(
        instances=[str(p) for p in data["instances"]],
        modes=[str(m) for m in data["modes"]],
        runs=int(data.get("runs", 10)),
        base_seed=int(data.get("base_seed", 0)),
        bks=bks,
        output_dir=str(data.get("output_dir", ".")),
        workers=data.get("workers"),
        i_max=data.get("i_max"),
        t_max=data.get("t_max"),
    )


def _one_run(args) -> dict:
    path, mode, seed, i_max, t_max = args
    raw = parse_tsplib(Path(path).read_text())
    instance = Instance(raw)
    cfg = SolverConfig(mode=mode, seed=seed, i_max=i_max, t_max=t_max)
    result = solve(instance, cfg, name=raw.name or Path(path).stem)
    out = result.payload()
    out["seconds"] = result.seconds
    out["n"] = instance.n
    return out

def run(spec: RunSpec) -> tuple[GapReport, list[dict]]:
    """Solve every (instance, mode, seed) triple and aggregate per row."""
    jobs = []
    errors = []
    readable = []
    for path in spec.instances:
        try:
            parse_tsplib(Path(path).read_text())
            readable.append(path)
        except Exception as exc:  # record and keep going
            errors.append(f"{path}: {exc}")
    for path in readable:
        for mode in spec.modes:
            for k in range(spec.runs):
                jobs.append((path, mode, spec.base_seed + k,
                             spec.i_max, spec.t_max))

    if spec.workers == 1 or len(jobs) == 1:
        results = [_one_run(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(_one_run, jobs))

    rows = []
    by_key: dict[tuple[str, str], list[dict]] = {}
    for r in results:
        by_key.setdefault((r["instance"], r["mode"]), []).append(r)
    for (name, mode), group in sorted(by_key.items()):
        lengths = [g["best_length"] for g in group]
        bks = spec.bks.get(name)
        gap = None
        if bks:
            gap = sum((L - bks) / bks for L in lengths) / len(lengths)
        rows.append(GapRow(instance=name, n=group[0]["n"], mode=mode,
                           best=min(lengths),
                           average=sum(lengths) / len(lengths),
                           seconds=sum(g["seconds"] for g in group) / len(group),
                           trials=len(group), gap=gap))
    return GapReport(rows=rows, errors=errors), results


def emit_cumulative_gap(report: GapReport, modes: list[str]) -> str:
    """Tab-separated cumulative average gap per mode, one row per instance,
    instances in ascending city-count order."""
    instances = sorted({(r.n, r.instance) for r in report.rows})
    gap_of = {(r.instance, r.mode): r.gap for r in report.rows}
    lines = ["\t".join(["instance"] + modes)]
    cum = {m: 0.0 for m in modes}
    for _, name in instances:
        cells = [name]
        for m in modes:
            g = gap_of.get((name, m))
            cum[m] += g if g is not None else 0.0
            cells.append(f"{cum[m]:.6f}")
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"


def write_outputs(spec: RunSpec, report: GapReport, results: list[dict]) -> None:
    out = Path(spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    # Wall-clock numbers vary run to run; keep them out of the deterministic
    # results block so identical seeds reproduce it byte for byte.
    runs_payload = []
    timings = []
    for r in results:
        r = dict(r)
        timings.append(r.pop("seconds"))
        runs_payload.append(r)
    payload = {"runs": runs_payload, "errors": report.errors,
               "timing": {"seconds": timings}}
    (out / "results.json").write_text(json.dumps(payload, sort_keys=True,
                                                 indent=1) + "\n")

    with open(out / "results.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["instance", "n", "mode", "best", "average",
                         "seconds", "trials", "gap"])
        for row in report.rows:
            writer.writerow([row.instance, row.n, row.mode, row.best,
                             f"{row.average:.2f}", f"{row.seconds:.3f}",
                             row.trials,
                             "" if row.gap is None else f"{row.gap:.6f}"])

    (out / "cumgap.tsv").write_text(emit_cumulative_gap(report, spec.modes))


def _cmd_solve(args) -> int:
    windows = None
    if args.tsptw is not None:
        raw, windows = parse_tsptw(Path(args.tsptw).read_text())
    else:
        raw = parse_tsplib(Path(args.instance).read_text())
    instance = Instance(raw)
    rl = None
    if args.nmax is not None or args.lam != 0.1 or args.gamma != 0.9:
        rl = RLConfig(lam=args.lam, gamma=args.gamma,
                      n_max=args.nmax if args.nmax is not None else 1.0)
    cfg = SolverConfig(mode=args.mode, i_max=args.imax, t_max=args.tmax,
                       seed=args.seed, rl=rl,
                       kopt=KOptConfig(k_max=args.kmax))
    name = raw.name or Path(args.instance or args.tsptw).stem
    if windows is not None:
        result = solve_tsptw(instance, windows, cfg, name=name)
    else:
        result = solve(instance, cfg, name=name)
    print(result.to_json())
    if args.tour_out:
        Path(args.tour_out).write_text(write_tour(result.best_tour, raw))
    return 0


def _cmd_bench(args) -> int:
    try:
        spec = load_runspec(args.config)
    except (ValueError, KeyError) as exc:
        print(f"bad run specification: {exc}", file=sys.stderr)
        return 2
    report, results = run(spec)
    write_outputs(spec, report, results)
    for err in report.errors:
        print(f"skipped: {err}", file=sys.stderr)
    print(f"wrote {len(results)} runs to {spec.output_dir}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="rlkopt",
        description="Reinforced k-opt TSP/TSPTW solver")
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="solve a single instance")
    ps.add_argument("instance", nargs="?", help="TSPLIB instance file")
    ps.add_argument("--mode", default="vsr-alpha", choices=sorted(MODES))
    ps.add_argument("--tmax", type=float, default=None, help="time cap, seconds")
    ps.add_argument("--imax", type=int, default=None, help="iteration cap")
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--tsptw", default=None,
                    help="time-window instance file (replaces the TSPLIB file)")
    ps.add_argument("--kmax", type=int, default=5)
    ps.add_argument("--lambda", dest="lam", type=float, default=0.1)
    ps.add_argument("--gamma", type=float, default=0.9)
    ps.add_argument("--nmax", type=float, default=None,
                    help="stagnation budget before a strategy switch")
    ps.add_argument("--tour-out", default=None, help="write the best tour here")
    ps.set_defaults(func=_cmd_solve)

    pb = sub.add_parser("bench", help="run a benchmark matrix from a TOML spec")
    pb.add_argument("config", help="run specification (TOML)")
    pb.set_defaults(func=_cmd_bench)

    args = parser.parse_args(argv)
    if args.command == "solve" and args.instance is None and args.tsptw is None:
        parser.error("an instance file (or --tsptw) is required")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
