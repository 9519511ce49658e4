"""Command line entry point: ``ncvxscreen {solve,path,gen-toy}``."""

import argparse
import logging
import sys

import numpy as np

from .baselines import GistConfig
from .bench import SOLVERS, PathConfig, PathResult, emit_results, run_path, solve_point
from .data import ToyConfig, generate_toy, load_problem, save_dense_csv, save_libsvm
from .mm import MmConfig
from .penalties import FAMILIES, Penalty, lambda_max


def _add_data_args(parser):
    src = parser.add_argument_group("data")
    src.add_argument("--data", help="dataset file (.csv: dense, target in last column; "
                                    "otherwise libsvm)")
    src.add_argument("--data-format", choices=("csv", "libsvm"))
    src.add_argument("--normalize", action="store_true",
                     help="scale columns to unit norm")
    src.add_argument("--n", type=int, default=50, help="toy samples (without --data)")
    src.add_argument("--d", type=int, default=100, help="toy features")
    src.add_argument("--p", type=int, default=5, help="toy active features")
    src.add_argument("--sigma", type=float, default=2.0, help="toy noise level")
    src.add_argument("--seed", type=int, default=0)


def _add_solver_args(parser):
    opt = parser.add_argument_group("solver")
    opt.add_argument("--penalty", choices=sorted(FAMILIES), default="logsum")
    opt.add_argument("--solver", choices=SOLVERS, default="mm-screen")
    opt.add_argument("--alpha", type=float, default=1e9)
    opt.add_argument("--tol", type=float, default=1e-4, help="KKT tolerance")
    opt.add_argument("--inner-tol", type=float, default=1e-4,
                     help="duality-gap tolerance of the inner solver")
    opt.add_argument("--screen-every-inner", type=int, default=5)
    opt.add_argument("--rescreen-every-outer", type=int, default=10)
    opt.add_argument("--no-propagation", action="store_true",
                     help="drop cross-iteration screening (same as --solver mm-genuine)")
    opt.add_argument("--no-screen", action="store_true", help="disable all screening")
    opt.add_argument("--paper-radius", action="store_true",
                     help="use the sqrt(2G)(||x_j|| + 1/alpha) screening radius")
    opt.add_argument("--max-outer-iters", type=int, default=10_000)
    opt.add_argument("--out", help="result file")
    opt.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ncvxscreen",
        description="Non-convex sparse regression with safe screening.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve at a single (lambda, theta)")
    _add_data_args(solve)
    _add_solver_args(solve)
    solve.add_argument("--theta", type=float, required=True)
    lam = solve.add_mutually_exclusive_group(required=True)
    lam.add_argument("--lambda", dest="lam", type=float)
    lam.add_argument("--lambda-ratio", type=float, help="lambda as a fraction of lambda_max")

    path = sub.add_parser("path", help="regularization path over a (lambda, theta) grid")
    _add_data_args(path)
    _add_solver_args(path)
    path.add_argument("--theta", type=float, nargs="+", default=[0.01, 0.1, 1.0])
    path.add_argument("--n-lambdas", type=int, default=50)
    path.add_argument("--lambda-decades", type=float, default=3.0)

    gen = sub.add_parser("gen-toy", help="write a synthetic toy dataset")
    gen.add_argument("--n", type=int, default=50)
    gen.add_argument("--d", type=int, default=100)
    gen.add_argument("--p", type=int, default=5)
    gen.add_argument("--sigma", type=float, default=2.0)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.add_argument("--format", choices=("csv", "libsvm"), default="csv")
    gen.add_argument("--w-out", help="also write the true coefficients (one per line)")
    return parser


def _load(args):
    if args.data:
        return load_problem(args.data, args.data_format, args.normalize)
    prob, _ = generate_toy(ToyConfig(args.n, args.d, args.p, args.sigma, args.seed))
    return prob.normalized() if args.normalize else prob


def _mm_config(args):
    return MmConfig(alpha=args.alpha, outer_tol=args.tol, inner_tol=args.inner_tol,
                    exact_rescreen_every=args.rescreen_every_outer,
                    inner_screen_every=args.screen_every_inner,
                    max_outer_iters=args.max_outer_iters,
                    screening=not args.no_screen,
                    propagation=not args.no_propagation,
                    paper_radius=args.paper_radius)


def _print_record(rec):
    print(f"{rec['solver']:>10} theta={rec['theta']:<8g} lambda={rec['lambda']:<12.6g} "
          f"{rec['status']:>5} F={rec['objective']:<14.8g} kkt={rec['kkt']:<10.3g} "
          f"nnz={rec['nnz']:<5d} updates={rec['n_updates']:<9d} time={rec['time']:.4f}s")


def cmd_solve(args):
    prob = _load(args)
    p = Penalty(args.penalty, 1.0, args.theta)
    lam = args.lam if args.lam is not None else args.lambda_ratio * lambda_max(p, prob)
    p = p.with_lambda(lam)
    w, rec = solve_point(prob, p, np.zeros(prob.n_features), args.solver, args.tol,
                         _mm_config(args), GistConfig())
    rec["lambda_index"] = 0
    _print_record(rec)
    if args.out:
        result = PathResult(config={"penalty": args.penalty, "command": "solve"},
                            records=[rec])
        extra = {"coef": w.tolist()} if args.format == "json" else None
        emit_results(result, args.format, args.out, extra)
    return 0 if rec["status"] == "ok" else 1


def cmd_path(args):
    prob = _load(args)
    cfg = PathConfig(n_lambdas=args.n_lambdas, lambda_decades=args.lambda_decades,
                     thetas=tuple(args.theta), tol=args.tol, solver=args.solver)
    result = run_path(prob, args.penalty, cfg, _mm_config(args), GistConfig(),
                      callback=_print_record if args.verbose else None)
    totals = result.totals
    print(f"{cfg.solver}: {totals['n_points']} grid points, {totals['n_failed']} failed, "
          f"{totals['n_updates']} coordinate updates, {totals['time']:.3f}s")
    if args.out:
        emit_results(result, args.format, args.out)
    return 0 if result.all_solved else 1


def cmd_gen_toy(args):
    prob, w_true = generate_toy(ToyConfig(args.n, args.d, args.p, args.sigma, args.seed))
    if args.format == "csv":
        save_dense_csv(args.out, prob.X, prob.y)
    else:
        save_libsvm(args.out, prob.X, prob.y)
    if args.w_out:
        np.savetxt(args.w_out, w_true, fmt="%.17g")
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {"solve": cmd_solve, "path": cmd_path, "gen-toy": cmd_gen_toy}
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
