"""Command-line entry point: ``spikelsm <gen|train|retrain|predict|eval|bench> ...``.

Exit codes: 0 success, 1 usage error, 2 data or format error, 3 numeric
failure. Failures print one diagnostic line on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import persistence
from .bench import DelayTask, nmse, run_benchmark
from .config import ReservoirConfig, default_config
from .errors import ConfigError, FormatError, LsmError, NumericError, ShapeError
from .pipeline import LsmModel, predict_sequence, retrain, train
from .readout import VARIANTS, FeatureMode
from .reservoir import generate_reservoir

EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _fmt(value: float) -> str:
    text = repr(float(value))
    return text[:-2] if text.endswith(".0") else text


def load_config(path, seed=None) -> ReservoirConfig:
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as exc:
        raise FormatError(f"config {path}: invalid JSON ({exc.msg}, line {exc.lineno})") from None
    if not isinstance(data, dict):
        raise FormatError(f"config {path}: expected a JSON object")
    if seed is not None:
        data["seed"] = seed
    return ReservoirConfig.from_dict(data)


def _cmd_gen(args):
    config = load_config(args.config, args.seed)
    persistence.save_model(LsmModel(generate_reservoir(config)), args.out)


def _cmd_train(args):
    if args.model:
        source = persistence.load_model(args.model).reservoir
        if args.seed is not None:
            raise UsageError("--seed applies to --config only; a saved model already fixes its reservoir")
    else:
        source = generate_reservoir(load_config(args.config, args.seed))
    xs = persistence.import_csv(args.inputs)
    ys = persistence.import_csv(args.targets)
    mode = FeatureMode(args.mode, args.trace_decay)
    model = train(source, [(xs, ys)], args.lam, mode, keep_cache=args.keep_cache, washout=args.washout)
    persistence.save_model(model, args.out)


def _cmd_retrain(args):
    model = persistence.load_model(args.model)
    ys = persistence.import_csv(args.targets)
    persistence.save_model(retrain(model, ys, args.lam), args.out)


def _cmd_predict(args):
    model = persistence.load_model(args.model)
    xs = persistence.import_csv(args.inputs)
    persistence.export_csv(predict_sequence(model, xs), args.out)


def _cmd_eval(args):
    model = persistence.load_model(args.model)
    xs = persistence.import_csv(args.inputs)
    ys = persistence.import_csv(args.targets)
    print(f"nmse={_fmt(nmse(predict_sequence(model, xs), ys))}")


def _cmd_bench(args):
    config = load_config(args.config) if args.config else default_config()
    try:
        task = DelayTask.parse(args.task, t_train=args.t_train, t_test=args.t_test)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    report = run_benchmark(config, task, seeds=args.seeds)
    sys.stdout.write(report.to_text())
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as f:
            f.write(report.to_csv())


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spikelsm", description="Liquid state machine: spiking reservoir + ridge readout.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate an untrained reservoir")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("train", help="fit the readout on one input/target sequence")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--model", help="untrained or trained model file whose reservoir is reused")
    src.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--inputs", required=True)
    p.add_argument("--targets", required=True)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--mode", choices=VARIANTS, default="spike_trace")
    p.add_argument("--trace-decay", type=float, default=0.9)
    p.add_argument("--washout", type=int, default=0)
    p.add_argument("--keep-cache", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("retrain", help="refit the readout from a model's cached states")
    p.add_argument("--model", required=True)
    p.add_argument("--targets", required=True)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_retrain)

    p = sub.add_parser("predict", help="write readout outputs for an input sequence")
    p.add_argument("--model", required=True)
    p.add_argument("--inputs", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("eval", help="print the NMSE of a model on a sequence")
    p.add_argument("--model", required=True)
    p.add_argument("--inputs", required=True)
    p.add_argument("--targets", required=True)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("bench", help="delay-recall benchmark report")
    p.add_argument("--config")
    p.add_argument("--task", default="delay:3")
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--t-train", type=int, default=2000)
    p.add_argument("--t-test", type=int, default=500)
    p.add_argument("--csv")
    p.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (FormatError, ShapeError, ConfigError, LsmError, ValueError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
