"""Command line entry point ``pcrlb``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
import argparse
import sys

from . import harness
from .errors import ConfigError, NumericalError, SequenceFailure

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _parser():
    parser = argparse.ArgumentParser(prog="pcrlb", description="Particle estimates of the posterior Cramer-Rao bound.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run from a YAML config file")
    run_p.add_argument("--config", required=True)
    run_p.add_argument("--workers", type=int)

    pre = sub.add_parser("preset", help="run a named preset")
    pre.add_argument("name")
    pre.add_argument("--n", type=int, dest="n_particles")
    pre.add_argument("--m", type=int, dest="m_sequences")
    pre.add_argument("--t", type=int, dest="horizon_steps")
    pre.add_argument("--seed", type=int)
    pre.add_argument("--out", dest="out_dir", default="pcrlb-out")
    pre.add_argument("--workers", type=int)
    pre.add_argument("--no-theory", action="store_true", help="skip the true-state reference bound")
    pre.add_argument("--full-scale", action="store_true", help="ballistic presets at N=1000, M=200")

    sub.add_parser("presets", help="list presets")
    return parser


def _summary(report, out):
    cfg = report.config
    lines = [f"{cfg.model} N={cfg.n_particles} M={cfg.m_sequences} T={cfg.horizon_steps} seed={cfg.seed}",
             f"seconds per sequence: {report.seconds_per_sequence:.3f}"]
    if report.quality is not None:
        diag = " ".join(harness.format_float(v) for v in report.quality.diagonal)
        lines.append(f"lambda_J diagonal: {diag}")
    if cfg.out_dir is not None:
        lines.append(f"outputs in {cfg.out_dir}")
    print("\n".join(lines), file=out)


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    args = _parser().parse_args(argv)
    try:
        if args.command == "presets":
            for name, cfg in harness.PRESETS.items():
                print(f"{name:20s} {cfg.comment}", file=out)
            return EXIT_OK
        if args.command == "run":
            config = harness.load_config(args.config)
            if args.workers is not None:
                config = config.replace(workers=args.workers)
        else:
            config = harness.preset(args.name, full_scale=args.full_scale,
                                    n_particles=args.n_particles, m_sequences=args.m_sequences,
                                    horizon_steps=args.horizon_steps, seed=args.seed,
                                    out_dir=args.out_dir, workers=args.workers,
                                    emit_theory=False if args.no_theory else None)
        report = harness.run(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=err)
        return EXIT_CONFIG
    except SequenceFailure as exc:
        print(f"numerical failure: j={exc.j} t={exc.t}: {type(exc.cause).__name__}: {exc.cause}", file=err)
        return EXIT_NUMERICAL
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=err)
        return EXIT_NUMERICAL
    _summary(report, out)
    return EXIT_OK


def main_exit():
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
