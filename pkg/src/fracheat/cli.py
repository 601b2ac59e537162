"""Command line driver for the benchmark experiments.

Subcommands:
  solve        run one solver configuration, write a JSON/CSV report
  order-study  maximum errors and reduction orders over doubling M
  hmat-check   compression error vs rank and storage accounting
  bench        wall-time scaling sweep doubling N and M

Every flag can also be given through a key=value config file (--config);
command line flags override file entries.  FRACHEAT_THREADS limits the
BLAS thread count.  Exit codes: 0 success, 2 usage error, 3 the solver
did not converge.
"""
from __future__ import annotations

import argparse
import math
import os
import sys

# honor the thread limit before numpy initializes its BLAS pools
if "FRACHEAT_THREADS" in os.environ:
    _n = os.environ["FRACHEAT_THREADS"]
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _n)

import numpy as np  # noqa: E402

from . import reporting  # noqa: E402
from .analytic import ErrorStudy, max_error, observed_orders  # noqa: E402
from .hmatrix import build, storage_report  # noqa: E402
from .l1disc import assemble_dense_R, dump_r_csv  # noqa: E402
from .mesh import make_graded_mesh, make_uniform_mesh  # noqa: E402
from .problems import heat1d, heat2d  # noqa: E402
from .solver import CycleConfig, WaveformSolver  # noqa: E402

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NO_CONVERGENCE = 3


def _parse_cycle(spec: str) -> tuple[int, int, int]:
    """Cycle strings like v01 (V-cycle, nu1=0, nu2=1) or w11 (W-cycle)."""
    spec = spec.lower()
    if len(spec) != 3 or spec[0] not in "vw" or not spec[1:].isdigit():
        raise argparse.ArgumentTypeError(f"bad cycle spec {spec!r}, expected e.g. v01 or w11")
    return int(spec[1]), int(spec[2]), 1 if spec[0] == "v" else 2


def _delta(value: str) -> float:
    d = float(value)
    if not 0.0 < d < 1.0:
        raise argparse.ArgumentTypeError("delta must lie in (0, 1)")
    return d


def _int_list(value: str) -> list[int]:
    return [int(v) for v in value.split(",") if v]


def _apply_config_file(argv: list[str]) -> list[str]:
    """Expand --config FILE into the equivalent long flags (lowest priority)."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    try:
        path = argv[i + 1]
    except IndexError:
        raise SystemExit(EXIT_USAGE)
    extra: list[str] = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, val = line.partition("=")
            extra += [f"--{key.strip().replace('_', '-')}", val.strip()]
    # insert after the subcommand so explicit flags (later) win
    rest = argv[:i] + argv[i + 2 :]
    return rest[:1] + extra + rest[1:]


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fracheat", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, problem=True):
        if problem:
            p.add_argument("--problem", choices=["heat1d", "heat2d"], default="heat1d")
        p.add_argument("--delta", type=_delta, default=0.4, help="fractional order in (0,1)")
        p.add_argument("--mesh", choices=["graded", "uniform"], default="graded")
        p.add_argument("--rank", type=int, default=20, help="compression rank k")
        p.add_argument("--n-min", type=int, default=32, help="dense leaf size")
        p.add_argument("--output", default=None, help="report file path")
        p.add_argument("--config", help="key=value file supplying defaults for any flag")

    p = sub.add_parser("solve", help="run one configuration")
    common(p)
    p.add_argument("--n", type=int, required=True, help="interior points per axis (subdivisions - 1)")
    p.add_argument("--m", type=int, required=True, help="number of time steps")
    p.add_argument("--cycle", type=_parse_cycle, default=None, help="e.g. v01, v11, w11")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--start", choices=["zero", "random"], default="random",
                   help="initial guess; random (seeded) is the benchmark protocol")
    p.add_argument("--seed", type=int, default=1234)
    p.add_argument("--format", choices=["json", "csv"], default="json")

    p = sub.add_parser("order-study", help="error reduction orders over doubling M")
    common(p)
    p.add_argument("--n", type=int, default=1023)
    p.add_argument("--m-min", type=int, default=32)
    p.add_argument("--m-max", type=int, default=512)
    p.add_argument("--both-meshes", action="store_true", help="run graded and uniform")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--plot", action="store_true", help="render a figure next to the CSV")

    p = sub.add_parser("hmat-check", help="compression error vs rank, storage counts")
    common(p, problem=False)
    p.add_argument("--m", type=int, default=512)
    p.add_argument("--ranks", type=_int_list, default=[5, 10, 15, 20])
    p.add_argument("--tree", action="store_true", help="print the block tree")
    p.add_argument("--dump-r", default=None, help="also dump dense R entries to this CSV")
    p.add_argument("--plot", action="store_true")

    p = sub.add_parser("bench", help="wall-time scaling while doubling N and M")
    common(p)
    p.add_argument("--n", type=int, default=127, help="interior points at the smallest size")
    p.add_argument("--m-list", type=_int_list, default=[128, 256, 512, 1024])
    p.add_argument("--fixed-n", action="store_true", help="keep N fixed instead of doubling it")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--plot", action="store_true")
    return ap


def _make_problem(args, N, M):
    maker = heat1d if args.problem == "heat1d" else heat2d
    if M > 4 and N <= 0:
        raise SystemExit(EXIT_USAGE)
    return maker(args.delta, N, M, mesh_type=args.mesh)


def _solver(problem, args, coarsest=1):
    return WaveformSolver(
        problem.grid, problem.mesh, problem.delta, rank=args.rank, n_min=args.n_min,
        coarsest_interior=coarsest,
    )


def cmd_solve(args) -> int:
    if args.cycle is None:
        args.cycle = (0, 1, 1) if args.problem == "heat1d" else (1, 1, 1)
    nu1, nu2, gamma = args.cycle
    problem = _make_problem(args, args.n, args.m)
    cfg = CycleConfig(nu1=nu1, nu2=nu2, gamma=gamma, tol=args.tol, max_iter=args.max_iter)
    solver = _solver(problem, args)
    u, rep = solver.solve(problem.rhs, cfg, start=args.start, seed=args.seed)
    payload = {
        "problem": args.problem,
        "delta": args.delta,
        "N": args.n,
        "M": args.m,
        "mesh": args.mesh,
        "rank": args.rank,
        "cycle": f"{'v' if gamma == 1 else 'w'}{nu1}{nu2}",
        "iterations": rep.iterations,
        "converged": rep.converged,
        "residuals": rep.residuals,
        "convergence_factor": rep.convergence_factor,
        "wall_time_s": rep.wall_time,
    }
    if problem.exact is not None:
        payload["max_error"] = max_error(u, problem.exact)
    out = args.output or f"solve_{args.problem}_d{args.delta}_n{args.n}_m{args.m}.{args.format}"
    if args.format == "json":
        reporting.write_json(out, payload)
    else:
        reporting.write_csv(out, list(payload), [[payload[k] for k in payload]])
    print(f"iterations={rep.iterations} rho={rep.convergence_factor:.4f} "
          f"converged={rep.converged} report={out}")
    if not rep.converged:
        print("solver did not reach the residual reduction target", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def cmd_order_study(args) -> int:
    Ms = []
    m = args.m_min
    while m <= args.m_max:
        Ms.append(m)
        m *= 2
    mesh_types = ["graded", "uniform"] if args.both_meshes else [args.mesh]
    rows = []
    summary: dict[str, list[tuple[int, float]]] = {}
    for mesh_type in mesh_types:
        errors = []
        for M in Ms:
            problem = heat1d(args.delta, args.n, M, mesh_type=mesh_type) \
                if args.problem == "heat1d" else heat2d(args.delta, args.n, M, mesh_type=mesh_type)
            cfg = CycleConfig(tol=args.tol) if problem.grid.dim == 1 else \
                CycleConfig(nu1=1, nu2=1, tol=args.tol)
            solver = _solver(problem, args)
            u, rep = solver.solve(problem.rhs, cfg)
            errors.append(max_error(u, problem.exact))
        orders = observed_orders(ErrorStudy(tuple(Ms), tuple(errors)))
        summary[mesh_type] = list(zip(Ms, errors))
        for i, M in enumerate(Ms):
            rows.append([mesh_type, M, f"{errors[i]:.6e}",
                         f"{orders[i]:.3f}" if i < len(orders) else ""])
    out = args.output or f"order_study_{args.problem}_d{args.delta}.csv"
    reporting.write_csv(out, ["mesh", "M", "E_M", "log2(E_M/E_2M)"], rows)
    print(f"wrote {out}")
    if args.plot:
        print(f"wrote {reporting.plot_order_study(out, summary, args.delta)}")
    return EXIT_OK


def cmd_hmat_check(args) -> int:
    if args.m > 4096:
        print("M too large to densify (limit 4096)", file=sys.stderr)
        return EXIT_USAGE
    mesh = make_graded_mesh(1.0, args.m, args.delta) if args.mesh == "graded" \
        else make_uniform_mesh(1.0, args.m)
    R = assemble_dense_R(mesh, args.delta)
    if args.dump_r:
        dump_r_csv(R, args.dump_r)
        print(f"wrote {args.dump_r}")
    rows = []
    for k in args.ranks:
        H = build(mesh, args.delta, rank=k, n_min=args.n_min)
        err = float(np.abs(H.todense() - R).max())
        st = storage_report(H)
        rows.append([k, f"{err:.6e}", st.bytes_compressed])
        if args.tree and k == args.ranks[-1]:
            print(H.tree_summary())
    out = args.output or f"hmat_check_d{args.delta}_m{args.m}.csv"
    reporting.write_csv(out, ["rank", "max_error", "bytes_compressed"], rows)
    print(f"wrote {out} (dense equivalent: {storage_report(H).bytes_dense_equivalent} bytes)")
    if args.plot:
        print(f"wrote {reporting.plot_hmat_errors(out, [(r[0], float(r[1]), r[2]) for r in rows])}")
    return EXIT_OK


def cmd_bench(args) -> int:
    rows = []
    N = args.n
    for M in args.m_list:
        problem = _make_problem(args, N, M)
        cfg = CycleConfig(tol=args.tol) if problem.grid.dim == 1 else \
            CycleConfig(nu1=1, nu2=1, tol=args.tol)
        solver = _solver(problem, args)
        _, rep = solver.solve(problem.rhs, cfg, start="random")
        rows.append([N, M, rep.wall_time])
        if not args.fixed_n:
            N = 2 * (N + 1) - 1
    out = args.output or f"bench_{args.problem}_d{args.delta}.csv"
    reporting.write_csv(out, ["N", "M", "wall_time_s"], rows)
    # slope of time against N*M*log2(M)
    work = [n * m * math.log2(m) for n, m, _ in rows]
    times = [t for _, _, t in rows]
    if len(rows) > 1:
        ratios = [times[i + 1] / times[i] for i in range(len(times) - 1)]
        print("doubling time ratios:", ", ".join(f"{r:.2f}" for r in ratios))
        print("time per unit N*M*log2(M):",
              ", ".join(f"{t / w:.3e}" for t, w in zip(times, work)))
    print(f"wrote {out}")
    if args.plot:
        print(f"wrote {reporting.plot_bench(out, [(r[0], r[1], r[2]) for r in rows])}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _apply_config_file(argv)
    except OSError as exc:
        print(f"cannot read config file: {exc}", file=sys.stderr)
        return EXIT_USAGE
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    handlers = {
        "solve": cmd_solve,
        "order-study": cmd_order_study,
        "hmat-check": cmd_hmat_check,
        "bench": cmd_bench,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
