"""Command-line front end.

Subcommands: solve an instance file, embed a distance matrix into trees,
denoise a PGM image, and run the synthetic benchmark suite.  Exit codes:
0 success, 1 usage, 2 invalid input, 3 internal failure.
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from .bench import ALGORITHMS, SyntheticSpec, run_benchmark
from .denoise import denoise
from .formats import (
    FormatError,
    read_instance,
    read_matrix,
    read_pgm,
    write_labeling,
    write_pgm,
)
from .hst import distortion, learn_mixture
from .moves import ab_swap, alpha_expansion
from .mrf import energy
from .solver import SolveConfig, solve


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _grid(text):
    try:
        rows, cols = text.lower().split("x")
        return int(rows), int(cols)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected ROWSxCOLS, got {text!r}") from None


def _csv_list(text):
    return [tok.strip() for tok in text.split(",") if tok.strip()]


def _add_solver_flags(p, trees_default=50):
    p.add_argument("--trees", type=int, default=trees_default,
                   help="number of trees in the mixture")
    p.add_argument("--lambda", dest="lam", type=float, default=0.1,
                   help="mixture reweighting rate")
    p.add_argument("--dp-samples", type=int, default=64,
                   help="candidate trees per tree-fitting call")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1,
                   help="threads for the per-tree subproblems")


def _config(args, refine=False):
    return SolveConfig(trees=args.trees, lam=args.lam,
                       dp_samples=args.dp_samples, seed=args.seed,
                       refine=refine, workers=args.workers)


def cmd_solve(args):
    instance = read_instance(args.instance)
    out = args.out or str(args.instance) + ".labeling"
    if args.algo == "ours":
        report = solve(instance, _config(args, refine=args.refine))
        lab, e = report.labeling, report.energy
        print(f"energy {e!r}")
        print(f"distortion {report.distortion!r}")
        for phase, secs in report.phase_seconds.items():
            print(f"phase {phase} {secs:.3f}s")
        if args.refine:
            print("refine trace " + " ".join(repr(v) for v in report.refine_trace))
    else:
        mover = alpha_expansion if args.algo == "alpha-exp" else ab_swap
        t0 = time.perf_counter()
        lab, _ = mover(instance, np.zeros(instance.n_vars, np.int64))
        e = float(energy(instance, lab))
        print(f"energy {e!r}")
        print(f"phase solve {time.perf_counter() - t0:.3f}s")
    write_labeling(out, e, lab)
    print(f"wrote {out}")
    return 0


def cmd_embed(args):
    m = read_matrix(args.matrix)
    mixture = learn_mixture(m, trees=args.trees, lam=args.lam,
                            samples=args.dp_samples, seed=args.seed)
    out_dir = Path(args.out or str(args.matrix) + ".mix")
    out_dir.mkdir(parents=True, exist_ok=True)
    for i, tree in enumerate(mixture.trees):
        (out_dir / f"tree_{i:03d}.txt").write_text(tree.to_text() + "\n")
    rho = " ".join(repr(float(v)) for v in mixture.rho)
    (out_dir / "rho.txt").write_text(f"RHO {rho}\n")
    print(f"distortion {distortion(mixture, m)!r}")
    print(f"wrote {len(mixture.trees)} trees to {out_dir}")
    return 0


def cmd_denoise(args):
    img = read_pgm(args.image)
    mask = read_pgm(args.mask) if args.mask else None
    out = args.out or str(args.image) + ".out.pgm"
    result, e = denoise(img, mask, kappa=args.kappa, trunc=args.trunc,
                        stride=args.label_stride, algorithm=args.algo,
                        config=_config(args))
    write_pgm(out, result)
    print(f"energy {e!r}")
    print(f"wrote {out}")
    return 0


def cmd_bench(args):
    cases = _csv_list(args.cases)
    algos = _csv_list(args.algos)
    specs = [SyntheticSpec(case, grid=args.grid, h=args.labels, seed=s)
             for case in cases for s in range(args.seeds)]
    report = run_benchmark(specs, algos, _config(args))
    Path(args.out).write_text(report.to_csv())
    print(report.to_markdown())
    for case, seed, algo, msg in report.errors:
        print(f"failed: {case} seed {seed} {algo}: {msg}", file=sys.stderr)
    for v in report.ordering_violations():
        print(f"ordering violation: {v}", file=sys.stderr)
    print(f"wrote {args.out}")
    return 0


def build_parser():
    parser = _Parser(prog="hiercut",
                     description="MAP inference for pairwise MRFs via "
                                 "hierarchical tree metrics and graph cuts")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("solve", help="solve an instance file")
    p.add_argument("instance")
    p.add_argument("--algo", choices=("ours", "alpha-exp", "ab-swap"),
                   default="ours")
    p.add_argument("--refine", action="store_true",
                   help="re-fit trees to the labeling until no improvement")
    p.add_argument("--out", help="labeling output path "
                                 "(default: <instance>.labeling)")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("embed", help="embed a distance matrix into trees")
    p.add_argument("matrix")
    p.add_argument("--out", help="output directory (default: <matrix>.mix)")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("denoise", help="denoise a PGM image")
    p.add_argument("image")
    p.add_argument("--mask", help="PGM marking missing pixels (nonzero)")
    p.add_argument("--kappa", type=float, default=30.0,
                   help="pairwise weight")
    p.add_argument("--trunc", type=float, default=50.0,
                   help="intensity difference truncation")
    p.add_argument("--label-stride", type=int, default=1,
                   help="spacing of the intensity labels")
    p.add_argument("--algo", choices=("ours", "alpha-exp", "ab-swap"),
                   default="ours")
    p.add_argument("--out", help="output PGM (default: <image>.out.pgm)")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_denoise)

    p = sub.add_parser("bench", help="run synthetic benchmarks")
    p.add_argument("--cases", default="i,ii,iii,iv,v",
                   help="comma-separated case names or numerals")
    p.add_argument("--grid", type=_grid, default=(20, 20))
    p.add_argument("--labels", type=int, default=8)
    p.add_argument("--seeds", type=int, default=20,
                   help="instances per case, seeded 0..N-1")
    p.add_argument("--algos", default=",".join(ALGORITHMS))
    p.add_argument("--out", default="bench.csv")
    _add_solver_flags(p, trees_default=16)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - last-resort reporting
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
