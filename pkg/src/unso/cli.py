"""Command-line interface.

Subcommands: train, ortho, curve, bench, flops. Data (CSV, matrix text)
goes to stdout or --out; diagnostics go to stderr. Exit codes: 0 success,
2 degenerate input or diverged training, 64 flag/usage errors, 65 file
parse errors, 66 missing input file. UNSO_SEED overrides --seed when set.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import bench as bench_mod
from . import data as data_mod
from .coeff_train import (
    CesistaStepParams,
    TrainConfig,
    read_step_triples,
    train,
    write_loss_history,
)
from .densemat import read_matrix, write_matrix
from .errors import (
    DegenerateInputError,
    ParseError,
    ShapeError,
    TrainingDivergedError,
)
from .ortho import (
    MethodKind,
    MethodSpec,
    Scaling,
    kernel_model_flops,
    orthogonalize,
)
from .scalarpoly import BRule, CoefficientSet, read_coefficients, write_coefficients

EXIT_OK = 0
EXIT_RUNTIME = 2
EXIT_USAGE = 64
EXIT_PARSE = 65
EXIT_NOFILE = 66

DEFAULT_SHAPES = "128x128,128x512,128x1024"
DEFAULT_METHODS = "unso,original,muon,cesista,external"
DEFAULT_SEEDS = ",".join(str(s) for s in range(10))


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # bad/missing flags: exit 64 with usage text
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _parse_shape(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"shape must look like 128x512, got {text!r}")
    try:
        rows, cols = int(parts[0]), int(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"shape must look like 128x512, got {text!r}")
    if rows < 1 or cols < 1:
        raise argparse.ArgumentTypeError(f"shape dimensions must be positive: {text!r}")
    return rows, cols


def _parse_shapes(text: str) -> list[tuple[int, int]]:
    return [_parse_shape(part) for part in text.split(",") if part]


def _parse_seeds(text: str) -> list[int]:
    try:
        seeds = [int(s) for s in text.split(",") if s]
    except ValueError:
        raise argparse.ArgumentTypeError(f"seeds must be comma-separated integers: {text!r}")
    if not seeds:
        raise argparse.ArgumentTypeError("at least one seed is required")
    return seeds


def _build_spec(name: str, param: str | None, scaling, gelfand_power: int, iters: int | None = None) -> MethodSpec:
    kind = MethodKind(name)
    if kind is MethodKind.UNSO:
        coeffs = read_coefficients(param) if param else data_mod.default_coefficients()
        return MethodSpec(kind, coeffs=coeffs, scaling=scaling, gelfand_power=gelfand_power)
    if kind in (MethodKind.ORIGINAL_NS, MethodKind.MUON_NS):
        iterations = iters
        if iterations is None and param is not None:
            try:
                iterations = int(param)
            except ValueError:
                raise ValueError(f"{name!r} takes an iteration count, got {param!r}")
        return MethodSpec(kind, iterations=iterations, scaling=scaling, gelfand_power=gelfand_power)
    if kind is MethodKind.CESISTA_NS:
        triples = read_step_triples(param) if param else data_mod.default_cesista_triples()
        return MethodSpec(
            kind, step_params=CesistaStepParams(triples), scaling=scaling, gelfand_power=gelfand_power
        )
    schedule = read_step_triples(param) if param else data_mod.external_demo_schedule()
    return MethodSpec(kind, schedule=schedule, scaling=scaling, gelfand_power=gelfand_power)


def _parse_method_list(text: str, scaling, gelfand_power: int) -> list[tuple[str, MethodSpec]]:
    """Grammar: comma-separated name[:param] entries."""
    methods = []
    for entry in text.split(","):
        entry = entry.strip()
        if not entry:
            continue
        name, _, param = entry.partition(":")
        try:
            MethodKind(name)
        except ValueError:
            known = ", ".join(k.value for k in MethodKind)
            raise ValueError(f"unknown method {name!r} (expected one of {known})")
        methods.append((entry, _build_spec(name, param or None, scaling, gelfand_power)))
    if not methods:
        raise ValueError("no methods given")
    return methods


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _seed_override(seed: int) -> int:
    env = os.environ.get("UNSO_SEED")
    if env is None:
        return seed
    try:
        return int(env)
    except ValueError:
        raise ParseError(f"UNSO_SEED must be an integer, got {env!r}")


def _cmd_train(args) -> int:
    config = TrainConfig(
        n=args.n,
        b_rule=BRule(args.b_rule),
        learning_rate=args.lr,
        decay_factor=args.decay_factor,
        decay_every=args.decay_every,
        epochs=args.epochs,
        samples_per_step=args.samples,
        sample_low=args.sample_low,
        sample_high=args.sample_high,
        seed=_seed_override(args.seed),
    )
    state = train(config)
    write_coefficients(args.out, state.coeffs)
    loss_path = args.loss_out or args.out + ".loss.csv"
    write_loss_history(loss_path, config, state.loss_history)
    print(
        f"trained order={config.n} rule={config.b_rule.value} steps={state.step} "
        f"final_lr={state.current_lr:.6g}",
        file=sys.stderr,
    )
    return EXIT_OK


def _cmd_ortho(args) -> int:
    m = read_matrix(args.input)
    scaling = Scaling(args.scaling) if args.scaling else None
    spec = _build_spec(args.method, args.coeffs or args.schedule, scaling, args.gelfand_power, args.iters)
    result = orthogonalize(m, spec)
    write_matrix(args.out, result.y)
    error = bench_mod.ortho_error_any(result.y)
    print(
        f"error={error:.10g} flops={result.flops} preprocess_flops={result.preprocess_flops}",
        file=sys.stderr,
    )
    return EXIT_OK


def _cmd_curve(args) -> int:
    scaling = Scaling(args.scaling) if args.scaling else None
    methods = _parse_method_list(args.methods, scaling, args.gelfand_power)
    table = bench_mod.sample_curves(methods, args.grid)
    _emit(bench_mod.curve_csv(table), args.out)
    return EXIT_OK


def _cmd_bench(args) -> int:
    scaling = Scaling(args.scaling) if args.scaling else None
    methods = _parse_method_list(args.methods, scaling, args.gelfand_power)
    reports = bench_mod.run_table(args.shapes, methods, args.seeds)
    _emit(bench_mod.report_csv(reports), args.out)
    return EXIT_OK


def _cmd_flops(args) -> int:
    rows, cols = args.shape
    scaling = Scaling(args.scaling) if args.scaling else None
    param = args.coeffs or args.schedule
    if args.method == "unso" and args.n is not None and param is None:
        # untrained order-n set: measured/model equality is order-dependent
        spec = MethodSpec(
            MethodKind.UNSO,
            coeffs=CoefficientSet(args.n, np.ones(args.n - 1)),
            scaling=scaling,
            gelfand_power=args.gelfand_power,
        )
    else:
        spec = _build_spec(args.method, param, scaling, args.gelfand_power, args.iters)
    m = bench_mod.gaussian_matrix(rows, cols, _seed_override(args.seed))
    result = orthogonalize(m, spec)
    h, w = (rows, cols) if rows <= cols else (cols, rows)
    analytic = kernel_model_flops(h, w, spec)
    _emit(
        "method,rows,cols,measured,analytic\n"
        f"{args.method},{rows},{cols},{result.flops},{analytic}\n",
        args.out,
    )
    if result.flops != analytic:
        print(
            f"warning: measured {result.flops} != analytic {analytic}",
            file=sys.stderr,
        )
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="unso", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="fit polynomial coefficients")
    p_train.add_argument("--n", type=int, default=14)
    p_train.add_argument("--epochs", type=int, default=20000)
    p_train.add_argument("--lr", type=float, default=0.1)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--b-rule", choices=[r.value for r in BRule], default=BRule.EXACT.value)
    p_train.add_argument("--decay-factor", type=float, default=0.5)
    p_train.add_argument("--decay-every", type=int, default=10000)
    p_train.add_argument("--samples", type=int, default=1000)
    p_train.add_argument("--sample-low", type=float, default=0.0)
    p_train.add_argument("--sample-high", type=float, default=1.0)
    p_train.add_argument("--out", required=True)
    p_train.add_argument("--loss-out", default=None)
    p_train.set_defaults(func=_cmd_train)

    p_ortho = sub.add_parser("ortho", help="orthogonalize a matrix file")
    p_ortho.add_argument("--in", dest="input", required=True)
    p_ortho.add_argument("--out", required=True)
    p_ortho.add_argument("--method", choices=[k.value for k in MethodKind], required=True)
    p_ortho.add_argument("--coeffs", default=None)
    p_ortho.add_argument("--schedule", default=None)
    p_ortho.add_argument("--iters", type=int, default=None)
    p_ortho.add_argument("--scaling", choices=[s.value for s in Scaling], default=None)
    p_ortho.add_argument("--gelfand-power", type=int, default=2)
    p_ortho.set_defaults(func=_cmd_ortho)

    p_curve = sub.add_parser("curve", help="sample composed scalar maps as CSV")
    p_curve.add_argument("--methods", default=DEFAULT_METHODS)
    p_curve.add_argument("--grid", type=int, default=bench_mod.DEFAULT_CURVE_GRID)
    p_curve.add_argument("--scaling", choices=[s.value for s in Scaling], default=None)
    p_curve.add_argument("--gelfand-power", type=int, default=2)
    p_curve.add_argument("--out", default=None)
    p_curve.set_defaults(func=_cmd_curve)

    p_bench = sub.add_parser("bench", help="error/FLOPs table as CSV")
    p_bench.add_argument("--shapes", type=_parse_shapes, default=_parse_shapes(DEFAULT_SHAPES))
    p_bench.add_argument("--methods", default=DEFAULT_METHODS)
    p_bench.add_argument("--seeds", type=_parse_seeds, default=_parse_seeds(DEFAULT_SEEDS))
    p_bench.add_argument("--scaling", choices=[s.value for s in Scaling], default=None)
    p_bench.add_argument("--gelfand-power", type=int, default=2)
    p_bench.add_argument("--out", default=None)
    p_bench.set_defaults(func=_cmd_bench)

    p_flops = sub.add_parser("flops", help="measured vs analytic kernel FLOPs")
    p_flops.add_argument("--method", choices=[k.value for k in MethodKind], required=True)
    p_flops.add_argument("--shape", type=_parse_shape, required=True)
    p_flops.add_argument("--n", type=int, default=None)
    p_flops.add_argument("--iters", type=int, default=None)
    p_flops.add_argument("--coeffs", default=None)
    p_flops.add_argument("--schedule", default=None)
    p_flops.add_argument("--seed", type=int, default=0)
    p_flops.add_argument("--scaling", choices=[s.value for s in Scaling], default=None)
    p_flops.add_argument("--gelfand-power", type=int, default=2)
    p_flops.add_argument("--out", default=None)
    p_flops.set_defaults(func=_cmd_flops)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename or exc}", file=sys.stderr)
        return EXIT_NOFILE
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ShapeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DegenerateInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except TrainingDivergedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ValueError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
