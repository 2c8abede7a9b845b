"""Command-line interface: ``euclid-match {solve,exact,baseline,gen,schedule,bench,verify}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence, TextIO

import numpy as np

from .baseline import even_forest_baseline
from .even_component import Matching
from .exact import CapacityError, exact_matching
from .geometry import Metric, OddCardinalityError, PointFileError, PointSet, format_points, read_points, write_points
from .instances import GeneratorSpec
from .invariants import Check, exact_optimum, reduction_checks
from .iterated import SCHEMA_VERSION, SEED_ENV, SolveConfig, default_seed, solve
from .schedule import solve_schedule

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_PARITY = 2
EXIT_IO = 3
EXIT_CAPACITY = 4

log = logging.getLogger("euclid_match")


def _format_matching(m: Matching) -> str:
    return "".join(f"{a} {b}\n" for a, b in m.as_list())


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _load(args: argparse.Namespace) -> PointSet:
    return read_points(args.points, Metric.parse(args.metric))


def _config(args: argparse.Namespace) -> SolveConfig:
    kw = dict(
        r=args.r,
        epsilon=args.epsilon,
        mode=args.mode,
        seed=args.seed if args.seed is not None else default_seed(),
        ties=args.ties,
    )
    return SolveConfig.quality(**kw) if args.quality else SolveConfig(**kw)


def cmd_solve(args: argparse.Namespace) -> int:
    ps = _load(args)
    matching, report = solve(ps, _config(args))
    _emit(_format_matching(matching), args.out)
    doc = json.dumps(report.to_dict(), indent=2)
    if args.json_out:
        Path(args.json_out).write_text(doc + "\n")
    if args.json:
        sys.stderr.write(doc + "\n")
    else:
        sys.stderr.write(
            f"n={report.n} iterations={len(report.iterations)} tail={report.exact_tail['size']} "
            f"length={report.total_length:.12g}\n"
        )
    return EXIT_OK


def cmd_exact(args: argparse.Namespace) -> int:
    ps = _load(args)
    if ps.n == 0 or ps.n % 2:
        raise OddCardinalityError(f"odd-cardinality input ({ps.n} points)")
    matching, length = exact_matching(ps, engine=args.engine, max_n=args.max_n)
    _emit(_format_matching(matching) + f"# length {length!r}\n", args.out)
    return EXIT_OK


def cmd_baseline(args: argparse.Namespace) -> int:
    ps = _load(args)
    matching, length = even_forest_baseline(ps)
    _emit(_format_matching(matching) + f"# length {length!r}\n", args.out)
    return EXIT_OK


def _spec_from_args(args: argparse.Namespace) -> GeneratorSpec:
    return GeneratorSpec(
        kind=args.kind,
        n=args.n,
        dim=args.dim,
        clusters=args.clusters,
        spread=args.spread,
        level=args.level,
        gaps=tuple(args.gaps or ()),
        seed=args.seed,
    )


def cmd_gen(args: argparse.Namespace) -> int:
    spec = _spec_from_args(args)
    ps = spec.generate()
    if args.out:
        write_points(args.out, ps.coords, header=spec.label)
    else:
        sys.stdout.write(format_points(ps.coords))
    return EXIT_OK


def cmd_schedule(args: argparse.Namespace) -> int:
    sched = solve_schedule(args.r)
    sig = lambda x: float(f"{x:.12g}")  # noqa: E731
    if args.json:
        doc = {"r": sched.r, "xs": [sig(x) for x in sched.xs], "x_terminal": sig(sched.x_terminal)}
        sys.stdout.write(json.dumps(doc) + "\n")
    else:
        for i, x in enumerate(sched.xs, start=1):
            sys.stdout.write(f"x{i} {x:.12g}\n")
        sys.stdout.write(f"x{sched.r + 1} {sched.x_terminal:.12g}\n")
    return EXIT_OK


@dataclass
class BenchRecord:
    instance: str
    n: int
    dim: int
    algorithm: str  # inra | even_forest_baseline | exact
    length: float | None
    wall_time: float | None
    ratio: float | None = None
    reduction_time: float | None = None
    error: str | None = None


def _bench_instance(spec: GeneratorSpec, algorithms: Sequence[str], seed: int, exact_max: int) -> list[BenchRecord]:
    ps = spec.generate()
    rows: list[BenchRecord] = []
    optimum = None
    if "exact" in algorithms or ps.n <= exact_max:
        t0 = time.perf_counter()
        try:
            _, optimum = exact_matching(ps, max_n=exact_max)
            if "exact" in algorithms:
                rows.append(BenchRecord(spec.label, ps.n, ps.dim, "exact", optimum, time.perf_counter() - t0, 1.0))
        except (CapacityError, ValueError) as exc:
            if "exact" in algorithms:
                rows.append(BenchRecord(spec.label, ps.n, ps.dim, "exact", None, None, error=str(exc)))
    for alg in algorithms:
        if alg == "exact":
            continue
        t0 = time.perf_counter()
        try:
            reduction_time = None
            if alg == "inra":
                ties = "given" if spec.adversarial else "seeded"
                _, report = solve(ps, SolveConfig(seed=seed, ties=ties))
                length = report.total_length
                reduction_time = report.wall_times["reduction"]
            elif alg == "even_forest_baseline":
                _, length = even_forest_baseline(ps)
            else:
                raise ValueError(f"unknown algorithm {alg!r}")
            elapsed = time.perf_counter() - t0
            ratio = length / optimum if optimum else None
            rows.append(BenchRecord(spec.label, ps.n, ps.dim, alg, length, elapsed, ratio, reduction_time))
        except Exception as exc:  # recorded, the run continues
            rows.append(BenchRecord(spec.label, ps.n, ps.dim, alg, None, None, error=f"{type(exc).__name__}: {exc}"))
    return rows


def doubling_series(records: Sequence[BenchRecord]) -> list[dict]:
    """Reduction time per ``n`` for uniform INRA runs, with the growth per doubling."""
    rows = sorted(
        (r for r in records if r.algorithm == "inra" and r.instance.startswith("uniform") and r.reduction_time is not None),
        key=lambda r: (r.dim, r.n),
    )
    out: list[dict] = []
    for prev, cur in zip([None] + rows[:-1], rows):
        growth = None
        if prev is not None and prev.dim == cur.dim and cur.n == 2 * prev.n and prev.reduction_time > 0:
            growth = cur.reduction_time / prev.reduction_time
        out.append({"n": cur.n, "dim": cur.dim, "seconds": cur.reduction_time, "growth": growth})
    return out


def run_bench(instances: Sequence[GeneratorSpec], algorithms: Sequence[str], seed: int, exact_max: int) -> dict:
    records: list[BenchRecord] = []
    for spec in instances:
        try:
            records.extend(_bench_instance(spec, algorithms, seed, exact_max))
        except Exception as exc:
            records.append(BenchRecord(spec.label, spec.n, spec.dim, "-", None, None, error=f"{type(exc).__name__}: {exc}"))
    return {"schema": SCHEMA_VERSION, "records": [asdict(r) for r in records], "scaling": doubling_series(records)}


def _bench_instances(args: argparse.Namespace) -> tuple[list[GeneratorSpec], list[str], int]:
    algorithms = args.algorithms.split(",") if args.algorithms else ["inra", "even_forest_baseline"]
    instances: list[GeneratorSpec] = []
    exact_max = args.exact_max
    if args.spec:
        doc = json.loads(Path(args.spec).read_text() or "{}")
        algorithms = doc.get("algorithms", algorithms)
        exact_max = doc.get("exact_max", exact_max)
        for item in doc.get("instances", []):
            item = dict(item)
            if "gaps" in item:
                item["gaps"] = tuple(item["gaps"])
            instances.append(GeneratorSpec(**item))
    for n in args.uniform or ():
        instances.append(GeneratorSpec("uniform", n=n, dim=args.dim, seed=args.seed))
    for level in args.lower_bound or ():
        instances.append(GeneratorSpec("lower_bound", level=level, adversarial=True))
    return instances, algorithms, exact_max


def _print_table(doc: dict, out: TextIO) -> None:
    out.write(f"{'instance':<28} {'alg':<22} {'n':>8} {'length':>14} {'ratio':>8} {'time[s]':>9}\n")
    for r in doc["records"]:
        if r["error"]:
            out.write(f"{r['instance']:<28} {r['algorithm']:<22} {r['n']:>8} ERROR {r['error']}\n")
            continue
        ratio = f"{r['ratio']:.4f}" if r["ratio"] is not None else "-"
        out.write(f"{r['instance']:<28} {r['algorithm']:<22} {r['n']:>8} {r['length']:>14.6f} {ratio:>8} {r['wall_time']:>9.3f}\n")
    for s in doc["scaling"]:
        growth = f"{s['growth']:.3f}" if s["growth"] is not None else "-"
        out.write(f"scaling d={s['dim']} n={s['n']:>8} reduction={s['seconds']:.3f}s growth={growth}\n")


def cmd_bench(args: argparse.Namespace) -> int:
    seed = args.seed if args.seed is not None else default_seed()
    args.seed = seed
    instances, algorithms, exact_max = _bench_instances(args)
    doc = run_bench(instances, algorithms, seed, exact_max)
    _print_table(doc, sys.stdout)
    if args.json_out:
        Path(args.json_out).write_text(json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    ps = _load(args)
    cfg = _config(args).resolve(ps)
    if ps.n == 0 or ps.n % 2:
        raise OddCardinalityError(f"odd-cardinality input ({ps.n} points)")
    if cfg.ties == "seeded":
        ps = ps.with_tie_order(np.random.default_rng(cfg.seed).permutation(ps.n))
    sched = solve_schedule(cfg.r)
    optimum = exact_optimum(ps, args.exact_max) if ps.n <= args.exact_max else None
    checks = reduction_checks(ps, np.arange(ps.n), sched, cfg.mode, optimum)
    matching, report = solve(ps, cfg)
    checks.append(Check("perfect_matching", matching.is_perfect_on(np.arange(ps.n)), f"{len(matching)} pairs"))
    if optimum is not None:
        opt = optimum(np.arange(ps.n))
        ratio = report.total_length / opt if opt > 0 else 1.0
        checks.append(Check("ratio_bound", ratio <= report.ratio_bound() * (1 + 1e-9), f"ratio {ratio:.6g} <= {report.ratio_bound():.6g}"))
    for c in checks:
        sys.stdout.write(c.line() + "\n")
    return EXIT_OK if all(c.ok for c in checks) else EXIT_CHECK_FAILED


def _add_solve_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--r", type=int, default=None, help="edge-adding rounds (default 1000 in 2-D, 3 otherwise)")
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=None, help=f"tie-order seed (default ${SEED_ENV} or 0)")
    p.add_argument("--mode", choices=["auto", "tree2d", "knn_highdim"], default="auto")
    p.add_argument("--quality", action="store_true", help="loop threshold n^(2/3 - eps): larger exact tail")
    p.add_argument("--ties", choices=["seeded", "given"], default="seeded")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="euclid-match", description="Approximate and exact Euclidean minimum-weight perfect matching.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="iterated node reduction with an exact tail")
    p.add_argument("points")
    p.add_argument("--metric", default="l2")
    _add_solve_flags(p)
    p.add_argument("--out", help="matching file (default stdout)")
    p.add_argument("--json-out", help="write the run report as JSON")
    p.add_argument("--json", action="store_true", help="print the JSON report to stderr")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("exact", help="optimal matching")
    p.add_argument("points")
    p.add_argument("--metric", default="l2")
    p.add_argument("--engine", choices=["auto", "blossom", "bruteforce"], default="auto")
    p.add_argument("--max-n", type=int, default=5000)
    p.add_argument("--out")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("baseline", help="even-forest heuristic")
    p.add_argument("points")
    p.add_argument("--metric", default="l2")
    p.add_argument("--out")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("gen", help="generate a point file")
    p.add_argument("kind", choices=["uniform", "clustered", "lower_bound", "collinear"])
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--clusters", type=int, default=8)
    p.add_argument("--spread", type=float, default=0.01)
    p.add_argument("--level", "--i", dest="level", type=int, default=1)
    p.add_argument("--gaps", type=float, nargs="+")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("schedule", help="print the round thresholds for r rounds")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("bench", help="run algorithms over an instance list")
    p.add_argument("--spec", help="JSON file: {instances: [...], algorithms: [...], exact_max: N}")
    p.add_argument("--uniform", type=int, nargs="*", help="uniform instance sizes")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--lower-bound", type=int, nargs="*", help="lower-bound levels (adversarial ties)")
    p.add_argument("--algorithms", help="comma list of inra, even_forest_baseline, exact")
    p.add_argument("--exact-max", type=int, default=2000, help="compute ratios up to this n")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--json-out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("verify", help="check the reduction invariants on a point file")
    p.add_argument("points")
    p.add_argument("--metric", default="l2")
    _add_solve_flags(p)
    p.add_argument("--exact-max", type=int, default=2000)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except OddCardinalityError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARITY
    except CapacityError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CAPACITY
    except (PointFileError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
