"""Command-line front end.

Three subcommands:

``llp generate``  write one seeded dataset + bag assignment as CSV files
``llp run``       run a configured experiment, write results.csv / results.json
``llp sweep``     run one base config across several size/proportion formats

Experiment configs are JSON files mirroring ExperimentConfig field for
field; unknown keys are rejected rather than ignored.
"""

import argparse
import json
import re
import sys
from pathlib import Path

from .data import write_bag_csv, write_dataset_csv
from .exceptions import ConfigError, LLPError
from .experiment import (
    ExperimentConfig,
    compose_trial,
    emit_results,
    format_cell,
    run_experiment,
)

_FORMAT_CODE = re.compile(r"^(\d+)([A-Za-z]+)$")


def _load_config(path):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path} is not valid JSON: {err}") from None
    return ExperimentConfig.from_dict(raw)


def _cmd_generate(args):
    dataset_cfg = {"generator": args.dataset}
    if args.dataset == "half_kernel" and args.noise_sd is not None:
        dataset_cfg["noise_sd"] = args.noise_sd
    if args.bag_config in ("A", "B"):
        bag_config = args.bag_config
    else:
        bag_config = [float(p) for p in args.bag_config.split(",")]
    config = ExperimentConfig(
        dataset=dataset_cfg,
        bag_config=bag_config,
        n_train=args.n,
        test_fraction=args.test_fraction,
        repeats=1,
        seed=args.seed,
    )
    dataset, bags, test_mask = compose_trial(config, 0)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    data_path = out / "dataset.csv"
    bag_path = out / "bags.csv"
    write_dataset_csv(dataset, data_path)
    write_bag_csv(bags.assignment, bag_path)
    pi = ", ".join(f"{p:.4f}" for p in bags.proportions[:, 1])
    print(f"wrote {data_path} ({dataset.n} instances) and {bag_path}")
    print(
        f"bags: sizes {bags.sizes.tolist()}, positive proportions [{pi}] "
        f"(last bag is the {int(test_mask.sum())}-instance test bag)"
    )
    return 0


def _write_outputs(results, out_dir, trace):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    emit_results(results, format="csv", path=out / "results.csv")
    emit_results(results, format="json", path=out / "results.json")
    written = [out / "results.csv", out / "results.json"]
    if trace:
        payload = {
            res.name: [
                {
                    "index": rec.index,
                    "residual_trace": None
                    if rec.diagnostics is None
                    else rec.diagnostics["residual_trace"],
                    "objective_trace": None
                    if rec.diagnostics is None
                    else rec.diagnostics["objective_trace"],
                }
                for rec in res.records
            ]
            for res in results
        }
        trace_path = out / "trace.json"
        with open(trace_path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        written.append(trace_path)
    return written


def _cmd_run(args):
    config = _load_config(args.config)
    if args.trace and not config.track_objective:
        config = ExperimentConfig.from_dict({**config.to_dict(), "track_objective": True})
    result = run_experiment(config)
    written = _write_outputs([result], args.out, args.trace)
    print(
        f"{result.name}: accuracy {format_cell(result.mean, result.std)} "
        f"over {result.completed}/{len(result.records)} repeats "
        f"in {result.wall_time:.1f}s"
    )
    for path in written:
        print(f"wrote {path}")
    return 0


def _parse_format_code(code):
    m = _FORMAT_CODE.match(code.strip())
    if not m:
        raise ConfigError(
            f"bad format code {code!r}; expected size + preset letter, like 600B"
        )
    return int(m.group(1)), m.group(2)


def _cmd_sweep(args):
    base = _load_config(args.config)
    results = []
    for code in args.formats.split(","):
        n_train, label = _parse_format_code(code)
        overrides = {
            **base.to_dict(),
            "n_train": n_train,
            "bag_config": label,
            "name": code.strip(),
        }
        config = ExperimentConfig.from_dict(overrides)
        result = run_experiment(config)
        results.append(result)
        print(
            f"{result.name}: accuracy {format_cell(result.mean, result.std)} "
            f"over {result.completed}/{len(result.records)} repeats"
        )
    written = _write_outputs(results, args.out, args.trace)
    for path in written:
        print(f"wrote {path}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="llp",
        description="Transductive classification from bag-level label proportions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a seeded dataset + bag CSV pair")
    gen.add_argument("--dataset", choices=("xor", "half_kernel"), required=True)
    gen.add_argument("--n", type=int, required=True, help="training-set size")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="output directory")
    gen.add_argument(
        "--bag-config",
        default="A",
        help="preset A or B, or comma-separated positive proportions",
    )
    gen.add_argument("--noise-sd", type=float, default=None)
    gen.add_argument("--test-fraction", type=float, default=0.2)
    gen.set_defaults(func=_cmd_generate)

    run = sub.add_parser("run", help="run one experiment config")
    run.add_argument("--config", required=True, help="JSON experiment config")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument(
        "--trace",
        action="store_true",
        help="also write trace.json with residual/objective traces",
    )
    run.set_defaults(func=_cmd_run)

    sweep = sub.add_parser("sweep", help="run a config across several formats")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--out", required=True)
    sweep.add_argument(
        "--formats",
        required=True,
        help="comma-separated codes like 120A,600B (size + preset letter)",
    )
    sweep.add_argument("--trace", action="store_true")
    sweep.set_defaults(func=_cmd_sweep)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except LLPError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
