"""Command-line interface: ``mesoblock <subcommand> ...``.

Exit status is 0 on success and 2 on bad input.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import MesoError
from .experiments import (
    InferCensusConfig,
    ScanCpConfig,
    ScanNestedConfig,
    cp_boundary_points,
    grid_axis,
    run_infer_census,
    run_scan_cp,
    run_scan_nested,
)
from .generators import RNG_ALGORITHM, configuration_sample, derive_seed
from .graph import block_summary, load_edge_list, load_partition
from .heatmap import emit_heatmap, read_grid_csv
from .inference import ensemble_census, greedy_optimize
from .modularity import block_modularity, newman_modularity, parse_block_matrix, q_matrix, sum_rules
from .nulls import NullKind, NullModel
from .patterns import admissible_under_configuration, classify_2x2, enumerate_patterns

log = logging.getLogger("mesoblock")


def _fmt(x):
    return f"{float(x):.12g}"


def _matrix_lines(m):
    return ["  ".join(_fmt(v) for v in row) for row in np.asarray(m)]


def _emit(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _threads(args):
    env = os.environ.get("MESO_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise MesoError(f"MESO_THREADS must be an integer, got {env!r}") from None
    return max(1, args.threads)


def _read_graph(args):
    return load_edge_list(Path(args.input).read_text(), directed=args.directed)


def _null(args, k=None):
    kind = NullKind(args.null)
    if kind is NullKind.SCALED:
        return NullModel.scaled(args.gamma)
    if kind is NullKind.BLOCK_SCALED:
        if not args.gamma_matrix:
            raise MesoError("--null block-scaled needs --gamma-matrix")
        rows = [[float(t) for t in ln.split()] for ln in Path(args.gamma_matrix).read_text().splitlines()
                if ln.strip() and not ln.startswith("#")]
        return NullModel.block_scaled(rows)
    return NullModel(kind)


def cmd_analyze(args):
    g = _read_graph(args)
    p = load_partition(Path(args.partition).read_text(), n=g.n)
    bs = block_summary(g, p)
    null = _null(args, bs.k)
    q = q_matrix(bs, null)
    rules = sum_rules(q, null, bs)
    lines = [
        f"# mesoblock {__version__} analyze",
        f"# nodes={g.n} edges={g.num_edges} directed={int(g.directed)} groups={bs.k} null={null.kind.value}"
        + (f" gamma={_fmt(null.gamma)}" if null.kind is NullKind.SCALED else ""),
        "# S", *_matrix_lines(bs.S),
        "# Q", *_matrix_lines(q.values),
        "# row_sums " + " ".join(map(_fmt, rules.rows)),
        "# col_sums " + " ".join(map(_fmt, rules.cols)),
        f"# total {_fmt(rules.total)} expected {_fmt(rules.expected_total)}",
        f"# sum_rule_max_residual {_fmt(rules.max_residual())}",
        f"newman_modularity,{_fmt(newman_modularity(bs))}",
    ]
    if args.pattern:
        B = parse_block_matrix(Path(args.pattern).read_text(), directed=g.directed)
        lines.append(f"block_modularity,{_fmt(block_modularity(q, B))}")
    _emit("\n".join(lines) + "\n", args.out)


def cmd_patterns(args):
    rows = [f"# mesoblock {__version__} patterns k={args.k} directed={int(args.directed)}",
            "# labels Uniform and Other are not part of the literature taxonomy",
            "bits,admissible,label,invented"]
    for B in enumerate_patterns(args.k, args.directed):
        label, invented = "", ""
        if args.k == 2:
            cls = classify_2x2(B, args.directed)
            label, invented = cls.label.value, str(int(cls.invented))
        rows.append(f"{B.bits()},{int(admissible_under_configuration(B))},{label},{invented}")
    _emit("\n".join(rows) + "\n", args.out)


def cmd_sample(args):
    g = _read_graph(args)
    out_dir = Path(args.out_dir or args.out or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    width = max(4, len(str(args.samples - 1)))
    for i in range(args.samples):
        s = configuration_sample(g, derive_seed(args.seed, i), args.swaps)
        (out_dir / f"sample_{i:0{width}d}.txt").write_text(s.to_text())
    log.info("wrote %d samples to %s", args.samples, out_dir)


def _graph_or_planted(args):
    if args.input:
        return _read_graph(args), None
    if args.directed:
        raise MesoError("the planted network is undirected")
    from .generators import planted_fig4_network
    return planted_fig4_network(derive_seed(args.seed, 0))


def cmd_infer(args):
    g, planted = _graph_or_planted(args)
    res = greedy_optimize(g, args.k, args.restarts, args.max_sweeps, derive_seed(args.seed, 1),
                          alternating=args.alternating)
    scheme = "alternating" if args.alternating else "per-move"
    lines = [
        f"# mesoblock {__version__} infer k={args.k} restarts={args.restarts} "
        f"max_sweeps={args.max_sweeps} seed={args.seed} rates={scheme} rng={RNG_ALGORITHM}",
        f"# input={args.input or 'planted'} nodes={g.n} edges={g.num_edges}",
        f"# log_likelihood {_fmt(res.score)} restart {res.restart} sweeps {res.sweeps}",
        *("# omega " + ln for ln in _matrix_lines(res.omega)),
    ]
    if planted is not None:
        from .inference import nmi
        lines.append(f"# nmi_vs_planted {_fmt(nmi(planted.labels, res.partition.labels))}")
    _emit("\n".join(lines) + "\n" + res.partition.to_text(), args.out)


def cmd_census(args):
    g, _ = _graph_or_planted(args)
    threads = _threads(args)
    cen = ensemble_census(g, args.k, args.samples, args.f, args.seed, args.restarts,
                          args.max_sweeps, args.swaps, threads)
    header = [f"# mesoblock {__version__} census k={args.k} samples={args.samples} f={_fmt(args.f)} "
              f"restarts={args.restarts} max_sweeps={args.max_sweeps} swaps={args.swaps} "
              f"seed={args.seed} rng={RNG_ALGORITHM}",
              f"# input={args.input or 'planted'} nodes={g.n} edges={g.num_edges}",
              "structure,count,proportion"]
    rows = [f"{lab.value},{cen.counts[lab]},{_fmt(p)}" for lab, p in cen.proportions.items()]
    _emit("\n".join(header + rows) + "\n", args.out)


def cmd_infer_census(args):
    cfg = InferCensusConfig(k=args.k, restarts=args.restarts, max_sweeps=args.max_sweeps,
                            samples=args.samples, f=args.f, census_restarts=args.census_restarts,
                            swaps_per_edge=args.swaps, seed=args.seed, threads=_threads(args))
    g, planted = _graph_or_planted(args) if args.input else (None, None)
    res = run_infer_census(cfg, g, planted)
    header = [
        f"mesoblock {__version__} infer-census k={cfg.k} restarts={cfg.restarts} samples={cfg.samples} "
        f"f={_fmt(cfg.f)} census_restarts={cfg.census_restarts} swaps={cfg.swaps_per_edge} seed={cfg.seed}",
        f"q_cp={_fmt(res.q_cp)} q_bipartite={_fmt(res.q_bipartite)} log_likelihood={_fmt(res.inference.score)}"
        + (f" nmi={_fmt(res.nmi)}" if res.nmi is not None else ""),
    ]
    _emit(res.census_csv(header), args.out)


def cmd_scan_cp(args):
    lo = 0.05 if args.grid_min is None else args.grid_min
    hi = 1.0 if args.grid_max is None else args.grid_max
    cfg = ScanCpConfig(p_m=tuple(args.p_m), p_p_min=lo, p_p_max=hi, p_c_min=lo, p_c_max=hi,
                       step=args.step, n=args.n, reps=args.reps, seed=args.seed, threads=_threads(args))
    res = run_scan_cp(cfg)
    text = res.to_csv()
    _emit(text, args.out)
    if args.svg_dir:
        svg_dir = Path(args.svg_dir)
        svg_dir.mkdir(parents=True, exist_ok=True)
        pps = grid_axis(cfg.p_p_min, cfg.p_p_max, cfg.step / 4)
        for p_m in cfg.p_m:
            xs, ys, grid = read_grid_csv(text, "p_p", "p_c", "mean_qcp_minus_qbip",
                                         where={"p_m": f"{p_m:.12g}"})
            svg = emit_heatmap(xs, ys, grid, boundary=cp_boundary_points(p_m, pps),
                               title=f"Q_CP - Q_Bipartite, p_m={p_m:g}", x_label="p_p", y_label="p_c")
            (svg_dir / f"scan_cp_pm{p_m:g}.svg").write_text(svg)


def cmd_scan_nested(args):
    lo = 0.0 if args.grid_min is None else args.grid_min
    hi = 1.0 if args.grid_max is None else args.grid_max
    cfg = ScanNestedConfig(p_cp_min=lo, p_cp_max=hi, p_cc_min=lo, p_cc_max=hi, step=args.step,
                           n_core=args.n_core, n_periphery=args.n_periphery,
                           reps=args.reps, seed=args.seed, threads=_threads(args))
    res = run_scan_nested(cfg)
    text = res.to_csv()
    _emit(text, args.out)
    if args.svg_dir:
        svg_dir = Path(args.svg_dir)
        svg_dir.mkdir(parents=True, exist_ok=True)
        for col, name in (("mean_qcp_minus_qbip", "scan_nested_q.svg"), ("mean_nodf", "scan_nested_nodf.svg")):
            xs, ys, grid = read_grid_csv(text, "p_cp", "p_cc", col)
            svg = emit_heatmap(xs, ys, grid, title=col, x_label="p_cp", y_label="p_cc")
            (svg_dir / name).write_text(svg)


def cmd_heatmap(args):
    where = dict(w.split("=", 1) for w in args.where or [])
    xs, ys, grid = read_grid_csv(Path(args.input).read_text(), args.x, args.y, args.value, where)
    boundary = None
    if args.boundary:
        boundary = [tuple(map(float, ln.split(",")[:2])) for ln in Path(args.boundary).read_text().splitlines()
                    if ln.strip() and not ln.startswith("#")]
    _emit(emit_heatmap(xs, ys, grid, boundary=boundary, title=args.value, x_label=args.x, y_label=args.y),
          args.out)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--directed", action="store_true")
    common.add_argument("--null", choices=[k.value for k in NullKind], default="config")
    common.add_argument("--gamma", type=float, default=1.0)
    common.add_argument("--gamma-matrix", help="file with K rows of K block scales")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--threads", type=int, default=1, help="worker processes (MESO_THREADS overrides)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="mesoblock", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"mesoblock {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="S, Q and modularity of a partition")
    p.add_argument("--input", required=True)
    p.add_argument("--partition", required=True)
    p.add_argument("--pattern", help="block matrix file for Q(B)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("patterns", parents=[common], help="enumerate block patterns")
    p.add_argument("--k", type=int, default=2)
    p.set_defaults(func=cmd_patterns)

    p = sub.add_parser("sample", parents=[common], help="degree-preserving random samples")
    p.add_argument("--input", required=True)
    p.add_argument("--samples", type=int, default=1)
    p.add_argument("--swaps", type=int, default=20, help="swap attempts per edge")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_sample)

    def fit_args(p, restarts):
        p.add_argument("--input", help="edge list (default: the planted three-group network)")
        p.add_argument("--k", type=int, default=3)
        p.add_argument("--restarts", type=int, default=restarts)
        p.add_argument("--max-sweeps", type=int, default=100)

    p = sub.add_parser("infer", parents=[common], help="fit a dc-SBM by greedy label swaps")
    fit_args(p, 20)
    p.add_argument("--alternating", action="store_true",
                   help="re-estimate rates between sweeps only (experimental)")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("census", parents=[common], help="structure census over degree-preserving samples")
    fit_args(p, 5)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--f", type=float, default=0.5)
    p.add_argument("--swaps", type=int, default=20)
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("infer-census", parents=[common], help="fit, score CP vs bipartite, then census")
    fit_args(p, 20)
    p.add_argument("--census-restarts", type=int, default=5)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--f", type=float, default=0.5)
    p.add_argument("--swaps", type=int, default=20)
    p.set_defaults(func=cmd_infer_census)

    p = sub.add_parser("scan-cp", parents=[common], help="Q_CP - Q_Bipartite over (p_p, p_c)")
    p.add_argument("--p-m", type=float, nargs="+", default=[0.2, 0.5, 0.8])
    p.add_argument("--step", type=float, default=0.05)
    p.add_argument("--grid-min", type=float, help="lower bound of both axes (default 0.05)")
    p.add_argument("--grid-max", type=float, help="upper bound of both axes (default 1)")
    p.add_argument("--n", type=int, default=30)
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--svg-dir")
    p.set_defaults(func=cmd_scan_cp)

    p = sub.add_parser("scan-nested", parents=[common], help="nested bipartite scan over (p_cp, p_cc)")
    p.add_argument("--step", type=float, default=0.05)
    p.add_argument("--grid-min", type=float, help="lower bound of both axes (default 0)")
    p.add_argument("--grid-max", type=float, help="upper bound of both axes (default 1)")
    p.add_argument("--n-core", type=int, default=10)
    p.add_argument("--n-periphery", type=int, default=25)
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--svg-dir")
    p.set_defaults(func=cmd_scan_nested)

    p = sub.add_parser("heatmap", parents=[common], help="SVG heatmap from a long-format grid CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--value", required=True)
    p.add_argument("--where", action="append", help="column=value row filter")
    p.add_argument("--boundary", help="CSV of x,y boundary points")
    p.set_defaults(func=cmd_heatmap)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (MesoError, OSError) as exc:
        print(f"mesoblock: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
