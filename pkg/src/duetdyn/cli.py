"""duetdyn command line: single runs, sweeps, figure datasets, self-validation.

All rates and couplings are entered in units of the inter-well coupling V and
time in units of 1/V; V is 1 internally.  Pass --v to rescale to dimensional
output.  Exit codes: 0 success, 1 validation or physics-guard failure,
2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .experiment import (
    FIGURE_NAMES,
    SweepSpec,
    export,
    figure_preset,
    load_run_config,
    run_sweep,
    split_gamma,
)
from .integrate import IntegrationError, IntegratorConfig, Method, TimeGrid
from .model import (
    InitialState,
    LindbladPreset,
    LindbladSpec,
    ModelParams,
    ValidationError,
    parse_complex,
)
from .validate import run_validation

__all__ = ["run_command", "main", "build_parser"]

_OPS = {
    "sigma_plus": LindbladSpec.sigma_plus,
    "sigma_x": LindbladSpec.sigma_x,
    "sigma_z": LindbladSpec.sigma_z,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="duetdyn",
        description="Two-mode condensate dynamics in a double well under decoherence.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("evolve", help="integrate one trajectory and write it as CSV")
    ev.add_argument("--c", type=float, default=0.0, help="nonlinearity, units of V")
    ev.add_argument("--gamma-rate", type=float, default=0.0, help="decoherence rate, units of V")
    ev.add_argument("--energy-bias", type=float, default=0.0, help="well bias gamma, units of V")
    ev.add_argument(
        "--op",
        choices=["sigma_plus", "sigma_x", "sigma_z", "custom"],
        default="sigma_plus",
        help="decoherence operator preset",
    )
    ev.add_argument(
        "--lambdas",
        default=None,
        metavar="LX,LY,LZ",
        help="custom operator coefficients, 'a+bi' literals (e.g. 1,i,0)",
    )
    ev.add_argument("--op-scale", type=float, default=1.0, help="multiplier on the operator")
    ev.add_argument("--z0", type=float, default=1.0, help="initial population imbalance")
    ev.add_argument("--theta0", type=float, default=0.0, help="initial relative phase of a_L")
    ev.add_argument("--t-final", type=float, default=50.0, help="final time, units of 1/V")
    ev.add_argument("--dt", type=float, default=1e-3, help="integrator step, units of 1/V")
    ev.add_argument("--record-stride", type=int, default=1, help="keep every Nth step")
    ev.add_argument("--method", choices=["rk4", "rk45"], default="rk4")
    ev.add_argument("--v", type=float, default=1.0, help="dimensional value of V")
    ev.add_argument("--out", required=True, help="output CSV path")

    sw = sub.add_parser("sweep", help="run a sweep described by a JSON config file")
    sw.add_argument("--config", required=True, help="run-config JSON (SweepSpec + output block)")

    fg = sub.add_parser("figures", help="write the datasets behind the figure presets")
    fg.add_argument("names", nargs="+", choices=list(FIGURE_NAMES), metavar="fig1..fig6")
    fg.add_argument("--out-dir", default=".", help="directory for the CSV files")

    sub.add_parser("validate", help="run the invariant suite and print pass/fail lines")
    return parser


def _lindblad_from_args(args) -> LindbladSpec:
    if args.op == "custom":
        if not args.lambdas:
            raise ValidationError("--op custom requires --lambdas LX,LY,LZ")
        parts = args.lambdas.split(",")
        if len(parts) != 3:
            raise ValidationError(f"--lambdas needs three entries, got {len(parts)}")
        return LindbladSpec.custom(tuple(parse_complex(p) for p in parts), scale=args.op_scale)
    if args.lambdas:
        raise ValidationError("--lambdas is only valid together with --op custom")
    return _OPS[args.op](scale=args.op_scale)


def _cmd_evolve(args) -> int:
    v = args.v
    if not v > 0.0:
        raise ValidationError(f"--v must be positive, got {v}")
    params = ModelParams(
        gamma=args.energy_bias * v,
        c=args.c * v,
        v=v,
        decoherence_rate=args.gamma_rate * v,
        lindblad=_lindblad_from_args(args),
    )
    grid = TimeGrid(t_final=args.t_final / v, dt=args.dt / v, record_stride=args.record_stride)
    spec = SweepSpec(
        base=params,
        c_axis=(params.c, params.c, 1),
        gamma_axis=(params.decoherence_rate,),
        init=InitialState(z0=args.z0, theta0=args.theta0),
        grid=grid,
        cfg=IntegratorConfig(method=Method(args.method)),
    )
    result = run_sweep(spec)
    cell = result.cell(0, 0)
    if cell.error is not None:
        raise IntegrationError(
            f"{cell.error['type']}: {cell.error['message']}", cell.error["time"]
        )
    export(result, "csv", args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_sweep(args) -> int:
    spec, output = load_run_config(args.config)
    result = run_sweep(spec)
    export(result, output["format"], output["path"])
    failed = [(i, j) for i, j, cell in result.iter_cells() if cell.error is not None]
    print(f"wrote {output['path']}")
    if failed:
        print(f"warning: {len(failed)} cell(s) failed and were recorded as errors", file=sys.stderr)
    return 0


def _cmd_figures(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name in args.names:
        result = run_sweep(figure_preset(name))
        for j, g in enumerate(result.spec.gamma_axis):
            path = out_dir / f"{name}_gamma_{g:g}.csv"
            export(split_gamma(result, j), "csv", path)
            print(f"wrote {path}")
    return 0


def _cmd_validate(_args) -> int:
    results = run_validation()
    width = max(len(r.name) for r in results)
    ok = True
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status}  {r.name:<{width}}  {r.detail}")
        ok = ok and r.passed
    return 0 if ok else 1


def run_command(argv) -> int:
    """Parse argv and run; always terminates with exit code 0, 1 or 2."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {
        "evolve": _cmd_evolve,
        "sweep": _cmd_sweep,
        "figures": _cmd_figures,
        "validate": _cmd_validate,
    }
    try:
        return handlers[args.command](args)
    except (ValidationError, IntegrationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> int:
    return run_command(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
