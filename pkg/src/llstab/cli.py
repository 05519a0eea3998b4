"""Command-line interface.

Exit codes: 0 success, 1 a verification certificate failed, 2 usage,
configuration or I/O error, 3 numerical breakdown during integration.
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from pathlib import Path

from .config import ConfigError, RunConfig, describe_keys, override, parse_config, serialize_config
from .experiments import SweepError, axis_setups, setups_sweep, frequency_sweep, run_stabilization
from .grid_field import DegenerateNodeError
from .results import (
    ResultBundle,
    hysteresis_table,
    loops_table,
    omega_label,
    trajectory_table,
    write_results,
)
from .verify import run_suite

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

log = logging.getLogger("llstab")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    epilog = (
        "configuration keys (one 'key = value' per line, '#' comments):\n"
        + describe_keys()
        + "\n\nexit codes: 0 success, 1 verification failure, 2 usage/config/I-O error, "
        "3 numerical blow-up"
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="configuration file (defaults apply when omitted)")
    common.add_argument("--out", type=Path, help="directory for summary and CSV output")
    common.add_argument("--omega", help="comma-separated frequencies, overrides hysteresis.omegas")
    common.add_argument("--seedless", action="store_true", help="reserved; runs are always deterministic")
    common.add_argument("--quiet", action="store_true", help="suppress the printed summary")

    parser = _Parser(
        prog="llstab",
        description="Controlled 1-D Landau-Lifshitz simulator and stability certificates.",
        epilog=epilog,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in [
        ("simulate", "stabilisation run toward control.r"),
        ("hysteresis", "periodic-input runs for hysteresis.component"),
        ("sweep", "periodic-input runs for all three components"),
        ("verify", "lemma and invariant certificates"),
    ]:
        sub.add_parser(
            name, parents=[common], help=help_, epilog=epilog,
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
    return parser


def load_config(args) -> RunConfig:
    text = ""
    if args.config is not None:
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc.strerror or exc}") from None
    with warnings.catch_warnings(record=True):
        warnings.simplefilter("always")
        cfg = parse_config(text)
        if args.omega:
            cfg = override(cfg, "hysteresis.omegas", args.omega, source="--omega")
    return cfg


def _echo(args, line: str) -> None:
    if not args.quiet:
        print(line)


def cmd_simulate(cfg: RunConfig, args) -> int:
    params, r = cfg.sim_params(), cfg.equilibrium()
    rep = run_stabilization(
        params, r, cfg.initial_field(), t_end=cfg.t_end, tol_conv=cfg.tol_conv,
        cfg=cfg.integrator(), sample_every=cfg.sample_every,
    )
    summary = {
        "experiment": "stabilize",
        "converged": rep.converged,
        "t_converge": rep.t_converge,
        "violations": rep.violations,
        "V_initial": rep.samples[0].V,
        "V_final": rep.samples[-1].V,
        "err_norm_initial": rep.samples[0].err_norm,
        "err_norm_final": rep.samples[-1].err_norm,
        "max_norm_deviation": rep.max_norm_deviation,
        "dt": rep.dt,
        "n_steps": rep.n_steps,
    }
    bundle = ResultBundle(serialize_config(cfg), {"trajectory": trajectory_table(rep.samples)}, summary)
    _finish(args, bundle)
    return EXIT_OK


def _hysteresis_bundle(cfg: RunConfig, runs_by_component: dict) -> ResultBundle:
    tables, summary = {}, {"experiment": cfg.experiment}
    multi = len(runs_by_component) > 1
    all_runs = []
    for comp, runs in sorted(runs_by_component.items()):
        for run in runs:
            label = omega_label(run.omega)
            name = f"hysteresis_c{comp}_{label}" if multi else f"hysteresis_{label}"
            tables[name] = hysteresis_table(run)
            key = f"c{comp}_" if multi else ""
            summary[f"{key}loop_area_{label}"] = run.loop_area
            summary[f"{key}closed_{label}"] = run.closed
            all_runs.append(run)
    tables["loops"] = loops_table(all_runs)
    return ResultBundle(serialize_config(cfg), tables, summary)


def cmd_hysteresis(cfg: RunConfig, args) -> int:
    runs = frequency_sweep(cfg.hysteresis_setup(), cfg.omegas)
    _finish(args, _hysteresis_bundle(cfg, {cfg.component: runs}))
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, args) -> int:
    setups = axis_setups(
        grid=cfg.grid, nu=cfg.nu, k=cfg.k, amplitude=cfg.amplitude, periods=cfg.periods,
        xstar=cfg.xstar, cfg=cfg.hysteresis_setup().cfg,
    )
    _finish(args, _hysteresis_bundle(cfg, setups_sweep(setups, cfg.omegas)))
    return EXIT_OK


def cmd_verify(cfg: RunConfig, args) -> int:
    certs = run_suite(cfg.sim_params(), cfg.equilibrium())
    for c in certs:
        _echo(args, f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}")
    summary = {"experiment": "verify"}
    summary.update({f"{c.name}_passed": c.passed for c in certs})
    if args.out is not None:
        write_results(ResultBundle(serialize_config(cfg), {}, summary), args.out)
    return EXIT_OK if all(c.passed for c in certs) else EXIT_VERIFY_FAILED


def _finish(args, bundle: ResultBundle) -> None:
    for k, v in bundle.summary.items():
        _echo(args, f"{k} = {v}")
    if args.out is not None:
        paths = write_results(bundle, args.out)
        _echo(args, f"wrote {len(paths)} files to {args.out}")


COMMANDS = {"simulate": cmd_simulate, "hysteresis": cmd_hysteresis, "sweep": cmd_sweep, "verify": cmd_verify}


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    try:
        cfg = load_config(args)
        for note in cfg.warnings:
            print(f"warning: {note}", file=sys.stderr)
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DegenerateNodeError as exc:
        print(f"numerical blow-up: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except SweepError as exc:
        print(f"sweep failed: {exc}", file=sys.stderr)
        numerical = all(isinstance(e, DegenerateNodeError) for e in exc.errors.values())
        return EXIT_NUMERICAL if numerical else EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(cli_main())
