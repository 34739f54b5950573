"""Command-line entry point.

Subcommands::

    leadfollow preset NAME -o OUT            finite-volume run of a preset
    leadfollow macro ...                     finite-volume run
    leadfollow nu-sigma ...                  total-distribution run
    leadfollow micro ...                     one particle trajectory
    leadfollow equivalence ...               coupled vs nu-sigma gap
    leadfollow convergence --Ns ... --seeds  mean-field convergence study

Every run writes a ``manifest.json`` echoing the fully resolved configuration
(including defaults and overrides); re-running with ``--config manifest.json``
reproduces the outputs bitwise.  Exit codes: 2 for configuration problems,
3 for numerical failures (CFL violation, positivity loss).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import (
    ConfigError,
    apply_override,
    build_manifest,
    load_config_file,
    macro_from_dict,
    macro_to_dict,
    micro_from_dict,
    micro_to_dict,
    parse_override,
)
from .errors import CflViolation, PositivityLoss
from .harness import convergence_study
from .io import (
    write_convergence_csvs,
    write_convergence_summary,
    write_densities_csv,
    write_diagnostics_csv,
    write_json,
    write_micro_csv,
    write_particles_csv,
)
from .macro import equivalence_check, fv_solve, nu_sigma_solve
from .micro import simulate
from .presets import PRESET_NAMES, macro_preset

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _add_common(p: argparse.ArgumentParser, preset_positional: bool = False):
    if preset_positional:
        p.add_argument("name", help="preset name")
    else:
        p.add_argument("--preset", help=f"one of: {', '.join(PRESET_NAMES)}")
        p.add_argument("--config", type=Path, help="TOML config or JSON manifest")
    p.add_argument("-o", "--out", type=Path, default=Path("out"), help="output directory")
    p.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a config key (repeatable), e.g. --set rates.F.delta=0.15",
    )
    p.add_argument("--record-every", type=int, default=None, metavar="STEPS")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="leadfollow",
        description="Leader-follower mean-field dynamics: solvers and studies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    _add_common(sub.add_parser("preset", help="run a named preset (finite volume)"),
                preset_positional=True)
    _add_common(sub.add_parser("macro", help="finite-volume solve"))
    _add_common(sub.add_parser("nu-sigma", help="total-distribution solve"))

    micro = sub.add_parser("micro", help="one particle-system trajectory")
    _add_common(micro)
    micro.add_argument("--dump-particles", action="store_true")

    _add_common(sub.add_parser("equivalence", help="coupled vs nu-sigma gap"))

    conv = sub.add_parser("convergence", help="mean-field convergence study")
    _add_common(conv)
    conv.add_argument("--Ns", default="50,200,800", help="comma-separated particle counts")
    conv.add_argument("--seeds", type=int, default=8, help="number of seeds")
    conv.add_argument(
        "--checkpoints", default=None, help="comma-separated times (default: t_final)"
    )
    return parser


def _resolve_config(args) -> tuple[dict, str | None]:
    preset_name = getattr(args, "name", None) or getattr(args, "preset", None)
    config_path = getattr(args, "config", None)
    if preset_name is not None and config_path is not None:
        raise ConfigError("give either a preset or --config, not both")
    if preset_name is not None:
        try:
            config = macro_to_dict(macro_preset(preset_name))
        except KeyError as exc:
            raise ConfigError(exc.args[0]) from exc
    elif config_path is not None:
        config = load_config_file(config_path)
    else:
        raise ConfigError("a preset name or --config is required")
    for item in args.overrides:
        path_keys, value = parse_override(item)
        apply_override(config, path_keys, value)
    if args.seed is not None:
        apply_override(config, ("micro", "seed"), args.seed)
    if args.record_every is not None:
        apply_override(config, ("time", "record_every"), args.record_every)
    return config, preset_name


def _emit_manifest(out: Path, args, config: dict, preset, extra=None):
    write_json(
        out / "manifest.json",
        build_manifest(args.command, config, preset, args.overrides, extra),
    )


def _run(args) -> int:
    config, preset = _resolve_config(args)
    out = args.out

    if args.command in ("preset", "macro", "nu-sigma"):
        macro = macro_from_dict(config)
        series = fv_solve(macro) if args.command != "nu-sigma" else nu_sigma_solve(macro)
        write_densities_csv(out / "densities.csv", series)
        write_diagnostics_csv(out / "diagnostics.csv", series)
        _emit_manifest(out, args, config, preset)
        return 0

    if args.command == "micro":
        macro = macro_from_dict(config)
        micro_cfg = micro_from_dict(config, macro)
        series = simulate(micro_cfg)
        write_micro_csv(out / "micro.csv", series)
        if args.dump_particles:
            write_particles_csv(out / "particles.csv", series)
        config["micro"] = micro_to_dict(micro_cfg)
        _emit_manifest(out, args, config, preset)
        return 0

    if args.command == "equivalence":
        macro = macro_from_dict(config)
        gap = equivalence_check(macro)
        write_json(out / "equivalence.json", {"flat_gap": gap})
        _emit_manifest(out, args, config, preset, {"flat_gap": gap})
        return 0

    if args.command == "convergence":
        macro = macro_from_dict(config)
        micro_cfg = micro_from_dict(config, macro)
        try:
            ns_list = tuple(int(tok) for tok in args.Ns.split(",") if tok)
        except ValueError as exc:
            raise ConfigError(f"--Ns: {exc}") from exc
        if args.seeds < 1:
            raise ConfigError("--seeds must be >= 1")
        seeds = tuple(range(args.seeds))
        if args.checkpoints:
            try:
                checkpoints = tuple(float(tok) for tok in args.checkpoints.split(",") if tok)
            except ValueError as exc:
                raise ConfigError(f"--checkpoints: {exc}") from exc
        else:
            checkpoints = (macro.t_final,)
        report = convergence_study(
            macro, micro_cfg, ns_list, seeds, checkpoints, threads=args.threads
        )
        write_convergence_csvs(
            out / "convergence_raw.csv", out / "convergence_aggregate.csv", report
        )
        write_convergence_summary(out / "summary.json", report)
        config["micro"] = micro_to_dict(micro_cfg)
        _emit_manifest(
            out, args, config, preset,
            {"Ns": list(ns_list), "n_seeds": len(seeds), "checkpoints": list(checkpoints)},
        )
        return 0

    raise ConfigError(f"unknown command {args.command!r}")  # pragma: no cover


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CflViolation, PositivityLoss) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
