import argparse
import sys

from .script import run_file


def set_threads(n: int) -> int:
    """Cap compiled-kernel parallelism; results do not depend on it."""
    import numba
    n = max(1, min(n, numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spatial-mc",
        description="Spatial model checking of images with distance and texture operators.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="execute an analysis script")
    run.add_argument("script", help="path to the script file")
    run.add_argument("--verbose", action="store_true",
                     help="report timing and point counts for every let")
    run.add_argument("--threads", type=int, default=None, metavar="N",
                     help="worker threads for compiled kernels")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is not None:
        if args.threads < 1:
            print("error: --threads must be at least 1", file=sys.stderr)
            return 1
        set_threads(args.threads)
    return run_file(args.script, verbose=args.verbose)


if __name__ == "__main__":
    sys.exit(main())
