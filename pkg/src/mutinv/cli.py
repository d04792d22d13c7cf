"""Command-line entry point: ``mutinv [global flags] <command> [flags]``.

Commands run one pipeline stage each, reading and writing the experiment
directory given by ``--out`` (or the config's ``output_dir``):

    simulate   positive traces from every initial state
    mutate     sample, run and screen mutants
    train      cross-validate and fit the pooled classifier, export the invariant
    validate   SPRT and a Hoeffding estimate on fresh positive runs
    report     summarise whatever the directory holds
    run        all of the above in order

Flags that change the hashed configuration (``--seed``, ``--duration``,
``--limit``, ``--ops``, ``--k``) are global, so that every stage of one
experiment can be given the same ones.
"""

from __future__ import annotations

import argparse
import enum
import sys
from pathlib import Path

from . import __version__
from .dsl import DslSyntaxError
from .experiment import ConfigError, Experiment, ExperimentConfig, HashMismatchError, SimulationFault
from .learner import LearnerError
from .plant import PlantConfigError
from .smc import ACCEPT_H1, UNDECIDED


class ExitCode(enum.IntEnum):
    OK = 0
    USAGE = 2  # argparse's own code for bad arguments
    FILE = 3  # missing file or other I/O failure
    CONFIG = 4  # malformed experiment or plant config, controller syntax or check error
    DSL_RUNTIME = 5  # the unmutated controller faulted while simulating
    NO_DISTINCT = 6  # warning: screening left no mutant to train against
    DATA = 7  # learner input unusable (single class, k too large)
    UNDECIDED = 8  # SPRT exhausted its sample budget
    HASH_MISMATCH = 9  # artifacts come from a different configuration
    REJECTED = 10  # SPRT accepted H1: the invariant does not hold often enough


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mutinv", description="Learn plant invariants from mutated controllers.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--config", type=Path, help="experiment config JSON (default: the packaged example)")
    p.add_argument("--out", type=Path, help="experiment directory (default: the config's output_dir)")
    p.add_argument("--seed", type=_seed, help="mutant sampling seed")
    p.add_argument("--duration", type=float, help="trace duration in seconds")
    p.add_argument("--limit", type=_positive_int, help="number of mutants to sample")
    p.add_argument("--ops", help="comma-separated mutation operators, e.g. ROR,AOR")
    p.add_argument("--k", type=int, help="cross-validation folds")
    p.add_argument("--jobs", type=_positive_int, help="worker processes for mutant runs")
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    sub.add_parser("simulate", help="write positive traces")
    sub.add_parser("mutate", help="generate, run and screen mutants")
    train = sub.add_parser("train", help="cross-validate and fit the pooled model")
    train.add_argument("--individual", action="store_true", help="also fit one model per training mutant")
    validate = sub.add_parser("validate", help="statistically check the invariant on fresh runs")
    validate.add_argument("--model", type=Path, help="model JSON (default: <out>/model.json)")
    validate.add_argument("--budget", type=_positive_int, help="SPRT sample budget")
    validate.add_argument("--granularity", choices=("vector", "run"), help="one sample per vector or per run")
    validate.add_argument("--negate", action="store_true", help="test the complement of the invariant")
    sub.add_parser("report", help="summarise the experiment directory")
    run = sub.add_parser("run", help="simulate, mutate, train, validate and report")
    run.add_argument("--individual", action="store_true")
    return p


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config)
    if args.seed is not None:
        cfg.mutation.seed = args.seed
    if args.duration is not None:
        cfg.duration_s = args.duration
    if args.limit is not None:
        cfg.mutation.limit = args.limit
    if args.ops is not None:
        cfg.mutation.ops = tuple(o.strip() for o in args.ops.split(",") if o.strip())
    if args.k is not None:
        cfg.learner.k = args.k
    if args.jobs is not None:
        cfg.jobs = args.jobs
    if getattr(args, "budget", None) is not None:
        cfg.smc.budget = args.budget
    if getattr(args, "granularity", None) is not None:
        cfg.smc.granularity = args.granularity
    cfg.check()
    return cfg


def _print_file(path: Path) -> None:
    sys.stdout.write(path.read_text(encoding="utf-8"))


def _simulate(exp: Experiment, args) -> ExitCode:
    traces = exp.simulate()
    for t in traces:
        print(f"{t.label}/{t.init_id}: {t.n_frames} frames -> {exp.trace_path(t.label, t.init_id)}")
    return ExitCode.OK


def _mutate(exp: Experiment, args) -> ExitCode:
    result = exp.mutate()
    _print_file(exp.out / "screen.txt")
    if not result.training:
        print("warning: no distinct mutants survived screening", file=sys.stderr)
        return ExitCode.NO_DISTINCT
    return ExitCode.OK


def _train(exp: Experiment, args) -> ExitCode:
    exp.train(individual=args.individual)
    _print_file(exp.out / "train.txt")
    return ExitCode.OK


def _validate(exp: Experiment, args) -> ExitCode:
    inv = exp.load_invariant(args.model)
    if args.negate:
        inv = inv.negated()
    result = exp.validate(invariant=inv)
    _print_file(exp.out / "smc.txt")
    if result.verdict.decision == UNDECIDED:
        return ExitCode.UNDECIDED
    if result.verdict.decision == ACCEPT_H1:
        return ExitCode.REJECTED
    return ExitCode.OK


def _report(exp: Experiment, args) -> ExitCode:
    exp.report()
    _print_file(exp.out / "report.txt")
    return ExitCode.OK


def _run(exp: Experiment, args) -> ExitCode:
    _simulate(exp, args)
    code = _mutate(exp, args)
    if code != ExitCode.OK:
        return code
    _train(exp, args)
    args.model, args.negate = None, False
    code = _validate(exp, args)
    _report(exp, args)
    return code


COMMANDS = {
    "simulate": _simulate,
    "mutate": _mutate,
    "train": _train,
    "validate": _validate,
    "report": _report,
    "run": _run,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = None
    try:
        cfg = load_config(args)
        exp = Experiment(cfg, args.out)
        return int(COMMANDS[args.command](exp, args))
    except FileNotFoundError as exc:
        msg = str(exc) if "file not found" in str(exc) else f"file not found: {exc.filename or exc}"
        print(f"error: {msg}", file=sys.stderr)
        return ExitCode.FILE
    except (ConfigError, PlantConfigError) as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return ExitCode.CONFIG
    except DslSyntaxError as exc:
        print(f"error: {exc.format(str(cfg.controller) if cfg else '<controller>')}", file=sys.stderr)
        return ExitCode.CONFIG
    except SimulationFault as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ExitCode.DSL_RUNTIME
    except HashMismatchError as exc:
        print(f"error: config hash mismatch: {exc}", file=sys.stderr)
        return ExitCode.HASH_MISMATCH
    except LearnerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ExitCode.DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ExitCode.FILE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
