"""Command-line benchmark harness.

Subcommands: ``gen`` writes random instances as TSPLIB files, ``run``
executes one heuristic on one instance, ``suite`` sweeps a heuristic grid
over generated instances and emits CSV, ``verify`` cross-checks the solver
against the exhaustive oracles on a small instance.

Exit codes: 0 success, 2 configuration error, 3 input/parse error, 4 guard
violation, 5 internal invariant failure.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import dataclass
from typing import Optional, Sequence, TextIO

from .downsweep import Tour, downsweep, write_tour_plain, write_tour_tsplib
from .errors import ConfigError, GuardError, InternalInvariantError, ParseError
from .hk_bound import held_karp_lower_bound
from .instances import (
    Instance,
    MetricKind,
    generate_clustered,
    generate_uniform,
    parse_tsplib,
    write_tsplib,
)
from .oracles import (
    brute_force_optimal,
    depth_first_shortcut,
    enumerate_conforming_min,
    is_conforming,
)
from .spanning_tree import degree_increase, minimum_spanning_tree, root_tree, tree_weight
from .upsweep import upsweep

CSV_HEADER = "instance,n,heuristic,D,k,mst_weight,tour_weight,hk_bound,excess_pct,wall_time_ms,seed"

DEFAULT_GRID = "1x16,3x16,3x32,4x16,4x32,5x16,5x32"
DEFAULT_BOX = 1e6
FULL_DT_SIZE_CAP = 31623  # quadratic full-table cost beyond this is impractical


@dataclass
class RunConfig:
    """One heuristic execution: instance source plus heuristic parameters."""

    input: Optional[str] = None
    gen: Optional[str] = None
    degree_limit: int = 1  # 1 disables the degree-increasing pass
    depth: Optional[int] = None  # None searches without a depth cap
    seed: int = 0
    hk_iterations: int = 1000
    timing: bool = True

    def __post_init__(self) -> None:
        if self.degree_limit < 1 or self.degree_limit == 2:
            raise ConfigError(
                f"degree limit must be 1 (off) or >= 3, got {self.degree_limit}"
            )
        if self.depth is not None and self.depth < 1:
            raise ConfigError(f"depth must be >= 1 or unlimited, got {self.depth}")
        if (self.input is None) == (self.gen is None):
            raise ConfigError("exactly one of an input file or a generator spec is required")

    @property
    def heuristic_label(self) -> str:
        if self.degree_limit == 1 and self.depth is None:
            return "DT"
        return f"DT_{self.degree_limit}_{_fmt_k(self.depth)}"


@dataclass
class RunRecord:
    instance: str
    n: int
    heuristic: str
    D: int
    k: Optional[int]
    mst_weight: float
    tour_weight: float
    hk_bound: float
    excess_pct: float
    wall_time_ms: float
    seed: int

    def csv_row(self) -> str:
        return ",".join(
            [
                self.instance,
                str(self.n),
                self.heuristic,
                str(self.D),
                _fmt_k(self.k),
                _fmt(self.mst_weight),
                _fmt(self.tour_weight),
                _fmt(self.hk_bound),
                f"{self.excess_pct:.4f}" if math.isfinite(self.excess_pct) else "nan",
                f"{self.wall_time_ms:.3f}",
                str(self.seed),
            ]
        )


def _fmt(x: float) -> str:
    return f"{x:.6f}" if math.isfinite(x) else "nan"


def _fmt_k(k: Optional[int]) -> str:
    return "inf" if k is None else str(k)


def _parse_gen_spec(spec: str) -> tuple[Instance, int]:
    """Generator specs look like ``uniform:n=1000,seed=3,box=1e6``."""
    head, _, rest = spec.partition(":")
    kind = head.strip().lower()
    if kind not in ("uniform", "clustered"):
        raise ConfigError(f"unknown generator {kind!r} (expected uniform or clustered)")
    params: dict[str, str] = {}
    if rest:
        for item in rest.split(","):
            key, eq, value = item.partition("=")
            if not eq:
                raise ConfigError(f"bad generator parameter {item!r} (expected key=value)")
            params[key.strip().lower()] = value.strip()
    try:
        n = int(params.pop("n"))
        seed = int(params.pop("seed", "0"))
        box = float(params.pop("box", str(DEFAULT_BOX)))
        clusters = int(params.pop("clusters")) if "clusters" in params else None
    except KeyError as exc:
        raise ConfigError(f"generator spec misses required parameter {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"bad generator parameter value: {exc}") from exc
    if params:
        raise ConfigError(f"unknown generator parameters: {sorted(params)}")
    try:
        if kind == "uniform":
            return generate_uniform(n, seed, box), seed
        return generate_clustered(n, seed, box, clusters=clusters), seed
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _load_instance(cfg: RunConfig) -> tuple[Instance, int]:
    if cfg.gen is not None:
        return _parse_gen_spec(cfg.gen)
    try:
        with open(cfg.input, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {cfg.input}: {exc}") from exc
    return parse_tsplib(text), cfg.seed


def construct_tour(
    inst: Instance, degree_limit: int = 1, depth: Optional[int] = None
) -> tuple[Tour, float, float]:
    """MST -> root -> optional reattachment -> table pass -> reconstruction.

    Returns (tour, mst weight, wall milliseconds).  The emitted tour has been
    verified: a permutation, admissible for the tree it was built on, weight
    in agreement with the table pass, and within twice the tree weight.
    """
    t0 = time.perf_counter()
    edges = minimum_spanning_tree(inst)
    tree = root_tree(edges, inst.n)
    if degree_limit >= 3:
        tree = degree_increase(tree, degree_limit)
    result = upsweep(inst, tree, k=depth, keep_bipartitions=True)
    tour = downsweep(inst, tree, result)
    wall_ms = (time.perf_counter() - t0) * 1000.0
    if not is_conforming(tour, tree):
        raise InternalInvariantError("emitted tour violates subtree contiguity")
    mst_w = tree_weight(edges)
    # integer rounding lets each of the <= n-2 shortcuts gain up to one unit
    slack = float(inst.n) if inst.metric.kind is MetricKind.EUCLID_ROUNDED_TSPLIB else 0.0
    if tour.weight > 2.0 * mst_w * (1.0 + 1e-12) + 1e-9 + slack:
        raise InternalInvariantError(
            f"tour weight {tour.weight} exceeds twice the tree weight {mst_w}"
        )
    return tour, mst_w, wall_ms


def run_single(cfg: RunConfig) -> tuple[RunRecord, Tour]:
    """Full pipeline for one instance; verification failures raise."""
    inst, seed = _load_instance(cfg)
    if inst.n < 2:
        raise ConfigError("tour construction needs at least 2 nodes")
    tour, mst_w, wall_ms = construct_tour(inst, cfg.degree_limit, cfg.depth)
    if inst.n >= 3:
        hk = held_karp_lower_bound(inst, iterations=cfg.hk_iterations)
        excess = 100.0 * (tour.weight / hk - 1.0)
        if excess < -1e-6:
            raise InternalInvariantError(
                f"lower bound {hk} exceeds tour weight {tour.weight}"
            )
    else:
        hk = math.nan
        excess = math.nan
    record = RunRecord(
        instance=inst.name,
        n=inst.n,
        heuristic=cfg.heuristic_label,
        D=cfg.degree_limit,
        k=cfg.depth,
        mst_weight=mst_w,
        tour_weight=tour.weight,
        hk_bound=hk,
        excess_pct=excess,
        wall_time_ms=wall_ms if cfg.timing else 0.0,
        seed=seed,
    )
    return record, tour


# ---------------------------------------------------------------------------
# suite


def parse_grid(spec: str) -> list[tuple[int, Optional[int]]]:
    """Grid tokens: ``dt`` (full search) or ``DxK`` with K an int or ``inf``."""
    out: list[tuple[int, Optional[int]]] = []
    for token in spec.split(","):
        token = token.strip().lower()
        if not token:
            continue
        if token == "dt":
            out.append((1, None))
            continue
        d_part, sep, k_part = token.partition("x")
        if not sep:
            raise ConfigError(f"bad grid token {token!r} (expected 'dt' or 'DxK')")
        try:
            d = int(d_part)
            k = None if k_part == "inf" else int(k_part)
        except ValueError as exc:
            raise ConfigError(f"bad grid token {token!r}: {exc}") from exc
        if d < 1 or d == 2:
            raise ConfigError(f"grid degree limit must be 1 or >= 3, got {d}")
        if k is not None and k < 1:
            raise ConfigError(f"grid depth must be >= 1 or inf, got {k}")
        out.append((d, k))
    if not out:
        raise ConfigError("empty heuristic grid")
    return out


def run_suite(
    sizes: Sequence[int],
    seeds: int,
    grid: Sequence[tuple[int, Optional[int]]],
    klass: str = "uniform",
    box: float = DEFAULT_BOX,
    hk_iterations: int = 1000,
    timing: bool = False,
    log: Optional[TextIO] = None,
) -> str:
    """CSV for the cartesian product sizes x seeds x grid, plus mean rows.

    The bound is computed once per instance and shared across the grid.  By
    default wall_time_ms is reported as 0 so reruns of one configuration are
    byte-identical; pass timing=True for measured times.
    """
    if seeds < 1:
        raise ConfigError("need at least one seed")
    for size in sizes:
        if size < 4:
            raise ConfigError(f"suite sizes must be >= 4, got {size}")
    if klass not in ("uniform", "clustered"):
        raise ConfigError(f"unknown instance class {klass!r}")
    if any(k is None for _, k in grid) and max(sizes) > FULL_DT_SIZE_CAP:
        raise ConfigError(
            f"full-table search is capped at n <= {FULL_DT_SIZE_CAP}; "
            "drop 'dt'/'...xinf' entries or reduce sizes"
        )
    rows: list[str] = [CSV_HEADER]
    means: list[str] = []
    for size in sizes:
        by_heuristic: dict[tuple[int, Optional[int]], list[RunRecord]] = {g: [] for g in grid}
        for seed in range(1, seeds + 1):
            if klass == "uniform":
                inst = generate_uniform(size, seed, box)
            else:
                inst = generate_clustered(size, seed, box)
            hk = held_karp_lower_bound(inst, iterations=hk_iterations)
            for d, k in grid:
                try:
                    tour, mst_w, wall_ms = construct_tour(inst, d, k)
                    excess = 100.0 * (tour.weight / hk - 1.0)
                    if excess < -1e-6:
                        raise InternalInvariantError("lower bound exceeds tour weight")
                    rec = RunRecord(
                        instance=inst.name,
                        n=size,
                        heuristic=_grid_label(d, k),
                        D=d,
                        k=k,
                        mst_weight=mst_w,
                        tour_weight=tour.weight,
                        hk_bound=hk,
                        excess_pct=excess,
                        wall_time_ms=wall_ms if timing else 0.0,
                        seed=seed,
                    )
                    by_heuristic[(d, k)].append(rec)
                    rows.append(rec.csv_row())
                except (GuardError, InternalInvariantError, ValueError) as exc:
                    if log is not None:
                        print(f"FAILED {inst.name} {_grid_label(d, k)}: {exc}", file=log)
                    rec = RunRecord(
                        instance=f"{inst.name}#FAILED",
                        n=size,
                        heuristic=_grid_label(d, k),
                        D=d,
                        k=k,
                        mst_weight=math.nan,
                        tour_weight=math.nan,
                        hk_bound=math.nan,
                        excess_pct=math.nan,
                        wall_time_ms=0.0,
                        seed=seed,
                    )
                    rows.append(rec.csv_row())
        for d, k in grid:
            recs = by_heuristic[(d, k)]
            if not recs:
                continue
            mean = RunRecord(
                instance=f"mean-{klass}-n{size}",
                n=size,
                heuristic=_grid_label(d, k),
                D=d,
                k=k,
                mst_weight=sum(r.mst_weight for r in recs) / len(recs),
                tour_weight=sum(r.tour_weight for r in recs) / len(recs),
                hk_bound=sum(r.hk_bound for r in recs) / len(recs),
                excess_pct=sum(r.excess_pct for r in recs) / len(recs),
                wall_time_ms=sum(r.wall_time_ms for r in recs) / len(recs),
                seed=-1,
            )
            means.append(mean.csv_row())
    return "\n".join(rows + means) + "\n"


def _grid_label(d: int, k: Optional[int]) -> str:
    return "DT" if (d == 1 and k is None) else f"DT_{d}_{_fmt_k(k)}"


# ---------------------------------------------------------------------------
# plotting


def emit_plot(inst: Instance, tree, tour: Tour, path: str, size: int = 800) -> None:
    """Debug SVG: points, tree edges and tour edges in distinct strokes."""
    if inst.points is None:
        raise ValueError("plotting needs a coordinate instance")
    xy = inst.coords
    lo = xy.min(axis=0)
    hi = xy.max(axis=0)
    span = max(float((hi - lo).max()), 1e-12)
    margin = 0.04 * size
    scale = (size - 2 * margin) / span

    def sx(x: float) -> float:
        return margin + (x - lo[0]) * scale

    def sy(y: float) -> float:
        return size - margin - (y - lo[1]) * scale

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    for v in range(inst.n):
        p = tree.parent[v]
        if p is None:
            continue
        parts.append(
            f'<line class="tree" x1="{sx(xy[v, 0]):.2f}" y1="{sy(xy[v, 1]):.2f}" '
            f'x2="{sx(xy[p, 0]):.2f}" y2="{sy(xy[p, 1]):.2f}" '
            'stroke="#999999" stroke-width="1" stroke-dasharray="4 3"/>'
        )
    order = tour.order
    for i in range(len(order)):
        a, b = order[i], order[(i + 1) % len(order)]
        parts.append(
            f'<line class="tour" x1="{sx(xy[a, 0]):.2f}" y1="{sy(xy[a, 1]):.2f}" '
            f'x2="{sx(xy[b, 0]):.2f}" y2="{sy(xy[b, 1]):.2f}" '
            'stroke="#cc3333" stroke-width="1.5"/>'
        )
    for v in range(inst.n):
        parts.append(
            f'<circle class="pt" cx="{sx(xy[v, 0]):.2f}" cy="{sy(xy[v, 1]):.2f}" '
            'r="2.5" fill="#224488"/>'
        )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")


# ---------------------------------------------------------------------------
# verify


def run_verify(inst: Instance, max_n: int, out: TextIO) -> None:
    if inst.n > max_n:
        raise GuardError(f"verify limited to n <= {max_n}, instance has n={inst.n}")
    if inst.n < 2:
        raise ConfigError("verification needs at least 2 nodes")
    edges = minimum_spanning_tree(inst)
    tree = root_tree(edges, inst.n)
    result = upsweep(inst, tree, keep_bipartitions=True)
    tour = downsweep(inst, tree, result)
    oracle = enumerate_conforming_min(inst, tree)
    optimal = brute_force_optimal(inst)
    dfs = depth_first_shortcut(inst, tree)
    checks = [
        ("solver matches exhaustive admissible minimum",
         abs(tour.weight - oracle.weight) <= 1e-9),
        ("tour is admissible for the tree", is_conforming(tour, tree)),
        ("tour within factor 2 of the optimum",
         tour.weight <= 2.0 * optimal.weight + 1e-9),
        ("tour no worse than depth-first traversal", tour.weight <= dfs.weight + 1e-9),
    ]
    if inst.n >= 3:
        hk = held_karp_lower_bound(inst)
        checks.append(("lower bound below the optimum", hk <= optimal.weight + 1e-9))
    for label, ok in checks:
        print(f"{'PASS' if ok else 'FAIL'}: {label}", file=out)
    if not all(ok for _, ok in checks):
        raise InternalInvariantError("oracle cross-check failed")
    print(
        f"verified {inst.name}: tour={tour.weight:.6f} "
        f"optimal={optimal.weight:.6f} dfs={dfs.weight:.6f}",
        file=out,
    )


# ---------------------------------------------------------------------------
# argument parsing and dispatch


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dt", description="Minimum-weight double-tree shortcutting for Metric TSP"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a random instance as a TSPLIB file")
    p_gen.add_argument("klass", choices=["uniform", "clustered"])
    p_gen.add_argument("--n", type=int, required=True)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--box", type=float, default=DEFAULT_BOX)
    p_gen.add_argument("--clusters", type=int, default=None)
    p_gen.add_argument("-o", "--output", default="-", help="output file ('-' = stdout)")
    p_gen.set_defaults(func=_cmd_gen)

    p_run = sub.add_parser("run", help="run one heuristic on one instance")
    src = p_run.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="TSPLIB file")
    src.add_argument("--gen", help="generator spec, e.g. uniform:n=1000,seed=1,box=1e6")
    p_run.add_argument("--heuristic", choices=["dt", "dtk"], default="dt")
    p_run.add_argument("--degree-limit", type=int, default=1)
    p_run.add_argument("--depth", default=None, help="search depth (int or 'inf')")
    p_run.add_argument("--hk-iterations", type=int, default=1000)
    p_run.add_argument("--tour-out", default=None)
    p_run.add_argument(
        "--tour-format", choices=["tsplib", "plain"], default="tsplib"
    )
    p_run.add_argument("--plot", default=None, help="write an SVG of tree and tour")
    p_run.add_argument("--csv", action="store_true", help="emit a CSV row instead of text")
    p_run.set_defaults(func=_cmd_run)

    p_suite = sub.add_parser("suite", help="benchmark a heuristic grid, emit CSV")
    p_suite.add_argument("--sizes", required=True, help="comma-separated node counts")
    p_suite.add_argument("--seeds", type=int, required=True, help="instances per size")
    p_suite.add_argument("--grid", default=DEFAULT_GRID)
    p_suite.add_argument("--include-full", action="store_true",
                         help="add the unrestricted search to the grid")
    p_suite.add_argument("--class", dest="klass", choices=["uniform", "clustered"],
                         default="uniform")
    p_suite.add_argument("--box", type=float, default=DEFAULT_BOX)
    p_suite.add_argument("--hk-iterations", type=int, default=1000)
    p_suite.add_argument("--timing", action="store_true",
                         help="report measured wall times (breaks rerun byte-identity)")
    p_suite.add_argument("-o", "--output", required=True, help="CSV file ('-' = stdout)")
    p_suite.set_defaults(func=_cmd_suite)

    p_verify = sub.add_parser("verify", help="cross-check the solver against oracles")
    p_verify.add_argument("--input", required=True, help="TSPLIB file")
    p_verify.add_argument("--max-n", type=int, default=11)
    p_verify.set_defaults(func=_cmd_verify)

    return parser


def _parse_depth_arg(value: Optional[str]) -> Optional[int]:
    if value is None or value == "inf":
        return None
    try:
        return int(value)
    except ValueError as exc:
        raise ConfigError(f"bad depth {value!r} (expected an integer or 'inf')") from exc


def _write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _cmd_gen(args: argparse.Namespace) -> int:
    try:
        if args.klass == "uniform":
            inst = generate_uniform(args.n, args.seed, args.box)
        else:
            inst = generate_clustered(args.n, args.seed, args.box, clusters=args.clusters)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    _write_text(args.output, write_tsplib(inst))
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    depth = _parse_depth_arg(args.depth)
    degree = args.degree_limit
    if args.heuristic == "dt":
        if depth is not None or degree != 1:
            raise ConfigError("heuristic 'dt' is the unrestricted search; "
                              "use --heuristic dtk with --depth/--degree-limit")
    cfg = RunConfig(
        input=args.input,
        gen=args.gen,
        degree_limit=degree,
        depth=depth,
        hk_iterations=args.hk_iterations,
    )
    record, tour = run_single(cfg)
    if args.tour_out:
        text = (
            write_tour_tsplib(tour, name=record.instance)
            if args.tour_format == "tsplib"
            else write_tour_plain(tour)
        )
        _write_text(args.tour_out, text)
    if args.plot:
        inst, _ = _load_instance(cfg)
        edges = minimum_spanning_tree(inst)
        tree = root_tree(edges, inst.n)
        if cfg.degree_limit >= 3:
            tree = degree_increase(tree, cfg.degree_limit)
        emit_plot(inst, tree, tour, args.plot)
    if args.csv:
        print(CSV_HEADER)
        print(record.csv_row())
    else:
        print(f"instance      : {record.instance} (n={record.n})")
        print(f"heuristic     : {record.heuristic}")
        print(f"tree weight   : {record.mst_weight:.6f}")
        print(f"tour weight   : {record.tour_weight:.6f}")
        print(f"lower bound   : {record.hk_bound:.6f}")
        print(f"excess        : {record.excess_pct:.4f}%")
        print(f"wall time     : {record.wall_time_ms:.1f} ms")
    return 0


def _cmd_suite(args: argparse.Namespace) -> int:
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --sizes: {exc}") from exc
    if not sizes:
        raise ConfigError("no sizes given")
    grid = parse_grid(args.grid)
    if args.include_full:
        grid = [(1, None)] + [g for g in grid if g != (1, None)]
    csv = run_suite(
        sizes,
        args.seeds,
        grid,
        klass=args.klass,
        box=args.box,
        hk_iterations=args.hk_iterations,
        timing=args.timing,
        log=sys.stderr,
    )
    _write_text(args.output, csv)
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    cfg = RunConfig(input=args.input)
    inst, _ = _load_instance(cfg)
    run_verify(inst, args.max_n, sys.stdout)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on bad usage, 0 on --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 3
    except GuardError as exc:
        print(f"guard violation: {exc}", file=sys.stderr)
        return 4
    except InternalInvariantError as exc:
        print(f"internal invariant failure: {exc}", file=sys.stderr)
        return 5
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
