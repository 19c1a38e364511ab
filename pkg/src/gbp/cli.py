"""Batch command line: build or load a problem, run a schedule, emit artifacts.

Every run writes a trace CSV (`iter,messages_sent,delta,total_energy`) and a
result JSON mapping variable ids to belief means and covariances; with
``--oracle`` an exact reference solution and a comparison summary are written
alongside.  Exit status: 0 converged, 2 iteration budget exhausted, 1 error.

GBP_THREADS caps the engine's worker count; the engine runs sequentially
(the deterministic mode that any cap permits), so results never depend on it.
"""

from __future__ import annotations

import argparse
import copy
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import oracle, problems, schedules
from .errors import GbpError
from .factor_graph import FactorGraph, load_graph
from .gaussian import SingularPrecision, to_moments

SCHEDULES = ["synchronous", "random", "sweep", "round-robin", "residual", "attention"]


def add_run_options(p: argparse.ArgumentParser):
    p.add_argument("--schedule", choices=SCHEDULES, default="synchronous")
    p.add_argument("--damping", type=float, default=None,
                   help="override the problem's damping (0, 1]")
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--loss", choices=["squared", "huber"], default="squared")
    p.add_argument("--huber-t", type=float, default=1.0,
                   help="Huber transition point (Mahalanobis units)")
    p.add_argument("--oracle", action="store_true",
                   help="also solve exactly and write a comparison summary")
    p.add_argument("--focus", default=None, help="attention focus variable id")
    p.add_argument("--radius", type=int, default=2, help="attention radius in hops")
    p.add_argument("--levels", type=int, default=1, help="multiscale levels (denoise)")
    p.add_argument("--out-dir", default=".", help="directory for artifacts")


def parse_id(text):
    """Graph JSON ids may be ints or strings; accept both on the command line."""
    try:
        return int(text)
    except (TypeError, ValueError):
        return text


def make_policy(args, graph: FactorGraph) -> schedules.SchedulePolicy:
    focus = None
    if args.schedule == "attention":
        if args.focus is None:
            raise GbpError("attention schedule needs --focus")
        focus = (parse_id(args.focus), args.radius)
    return schedules.SchedulePolicy(args.schedule, seed=args.seed, focus=focus)


def belief_entry(graph: FactorGraph, vid) -> dict:
    belief = graph.belief(vid)
    try:
        moments = to_moments(belief)
    except SingularPrecision:
        return {"mean": None, "cov": None}
    return {"mean": moments.mean.tolist(), "cov": moments.cov.tolist()}


def write_json(path: Path, doc) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def run_graph(graph: FactorGraph, args, out_dir: Path,
              oracle_means=None, oracle_margs=None) -> int:
    """Common run loop: schedule to convergence, write trace/result artifacts."""
    if args.damping is not None:
        graph.damping = args.damping
    policy = make_policy(args, graph)
    rows = ["iter,messages_sent,delta,total_energy"]

    def record(rec):
        rows.append(f"{rec.iteration},{rec.messages_sent},{rec.delta!r},{rec.energy!r}")

    converged, _ = schedules.run(graph, policy, max_iters=args.iters, tol=args.tol,
                                 on_iteration=record)
    with open(out_dir / "trace.csv", "w") as fh:
        fh.write("\n".join(rows) + "\n")
    result = {str(vid): belief_entry(graph, vid) for vid in graph.variables}
    write_json(out_dir / "result.json", result)

    if args.oracle:
        if oracle_margs is None:
            margs = oracle.marginals(oracle.assemble(graph))
        else:
            margs = oracle_margs
        if oracle_means is None:
            oracle_means = {vid: margs[vid].mean for vid in margs}
        oracle_doc = {str(vid): {"mean": oracle_means[vid].tolist(),
                                 "cov": margs[vid].cov.tolist()} for vid in margs}
        write_json(out_dir / "oracle.json", oracle_doc)
        max_mean_err = 0.0
        max_var_err = 0.0
        for vid in graph.variables:
            entry = result[str(vid)]
            if entry["mean"] is None:
                max_mean_err = float("inf")
                continue
            mean = np.array(entry["mean"])
            cov = np.array(entry["cov"])
            max_mean_err = max(max_mean_err,
                               float(np.abs(mean - oracle_means[vid]).max()))
            max_var_err = max(max_var_err,
                              float(np.abs(np.diagonal(cov)
                                           - np.diagonal(margs[vid].cov)).max()))
        comparison = {"max_mean_err": max_mean_err, "max_var_err": max_var_err}
        write_json(out_dir / "comparison.json", comparison)
        print(json.dumps(comparison))

    print(f"{'converged' if converged else 'iteration budget exhausted'}; "
          f"artifacts in {out_dir}")
    return 0 if converged else 2


def cmd_solve(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    graph = load_graph(args.graph)
    return run_graph(graph, args, out_dir)


def cmd_linefit(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    huber_t = args.huber_t if args.loss == "huber" else None
    spec = problems.line_fit_preset(args.preset, huber_t=huber_t, seed=args.seed)
    graph = problems.build_line_fit(spec)
    return run_graph(graph, args, out_dir)


def cmd_denoise(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    image = problems.read_pgm(args.infile)
    huber_t = args.huber_t if args.loss == "huber" else None
    spec = problems.GridSpec(image.shape[1], image.shape[0],
                             tuple(image.reshape(-1).tolist()),
                             data_sigma=args.data_sigma, smooth_sigma=args.smooth_sigma,
                             huber_t=huber_t, levels=args.levels)
    prob = problems.build_grid(spec)
    if args.levels > 1:
        report = problems.solve_multiscale(prob, levels=args.levels, tol=args.tol,
                                           max_iters=args.iters)
        print(f"multiscale: fine iterations {report.fine_iterations}, "
              f"coarse {report.coarse_iterations}")
        status = run_graph(prob.graph, args, out_dir)  # finish + artifacts
    else:
        status = run_graph(prob.graph, args, out_dir)
    problems.write_pgm(args.outfile, prob.image())
    return status


def cmd_posegraph(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    huber_t = args.huber_t if args.loss == "huber" else None
    spec = problems.default_pose_sim(args.poses, args.landmarks, seed=args.seed,
                                     huber_t=huber_t)
    graph, truth = problems.simulate_poses(spec)
    if args.export:
        from .factor_graph import save_graph
        save_graph(graph, args.export)
        write_json(Path(str(args.export) + ".ground_truth.json"),
                   {vid: truth[vid].tolist() for vid in truth})
        print(f"wrote {args.export} and ground truth side file")
        if not args.run:
            return 0
    oracle_means = None
    oracle_margs = None
    if args.oracle:
        gn = oracle.gauss_newton(graph, max_iters=60, tol=1e-12)
        # Marginals evaluated at the Gauss-Newton solution.
        work = copy.deepcopy(graph)
        for fid, factor in work.factors.items():
            x0 = np.concatenate([gn.means[vid] for vid in factor.neighbors])
            work.relinearize_factor(fid, x0)
        oracle_margs = oracle.marginals(oracle.assemble(work))
        oracle_means = gn.means
        print(f"gauss-newton baseline: energy {gn.energy!r}, "
              f"converged {gn.converged}")
    return run_graph(graph, args, out_dir, oracle_means, oracle_margs)


def cmd_serve(args) -> int:
    from .session import serve
    serve(args.host, args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gbp", description="Gaussian belief propagation engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run GBP on a graph JSON file")
    p.add_argument("--graph", required=True)
    add_run_options(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("linefit", help="1D line fitting presets")
    p.add_argument("--preset", choices=["outlier", "step", "random"], required=True)
    add_run_options(p)
    p.set_defaults(func=cmd_linefit)

    p = sub.add_parser("denoise", help="denoise a PGM image")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--data-sigma", type=float, default=30.0)
    p.add_argument("--smooth-sigma", type=float, default=15.0)
    add_run_options(p)
    p.set_defaults(func=cmd_denoise)

    p = sub.add_parser("posegraph", help="simulate and solve a robot/landmark graph")
    p.add_argument("--poses", type=int, default=20)
    p.add_argument("--landmarks", type=int, default=5)
    p.add_argument("--export", default=None, help="write the graph JSON here")
    p.add_argument("--run", action="store_true",
                   help="run inference even when exporting")
    add_run_options(p)
    p.set_defaults(func=cmd_posegraph)

    p = sub.add_parser("serve", help="start the interactive session service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8733)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    threads = os.environ.get("GBP_THREADS")
    if threads is not None:
        try:
            if int(threads) < 0:
                raise ValueError
        except ValueError:
            print(f"invalid GBP_THREADS={threads!r}", file=sys.stderr)
            return 1
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GbpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
