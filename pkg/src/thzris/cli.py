"""Command-line interface.

Subcommands:
  run               run an experiment from a config file or preset, write CSV
  presets           list the built-in figure presets (or show one as a config)
  config-reference  print every config key with its default and meaning
  replay            rebuild a dumped channel realization and report on it

Exit codes: 0 success, 2 configuration/usage error, 1 runtime error.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from . import beamforming, harness, optimizer
from .harness import ConfigError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thzris",
        description="Link-level simulation lab for graphene-RIS assisted THz MIMO")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment and write its CSV")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="path to a key = value config file")
    src.add_argument("--preset", help="built-in preset name (see 'presets list')")
    run.add_argument("--seed", type=int, help="override the master seed")
    run.add_argument("--out", default=".", help="output directory (default .)")
    run.add_argument("--workers", type=int, default=1,
                     help="parallel realization workers (default 1)")
    run.add_argument("--sweep", choices=harness.SWEEPS,
                     help="override the sweep kind (uses that sweep's default grid)")
    run.add_argument("--dump-channels", metavar="DIR",
                     help="write per-realization channel dumps into DIR")
    run.add_argument("--timing", action="store_true",
                     help="record wall-clock times (makes CSV non-reproducible)")

    presets = sub.add_parser("presets", help="list or show built-in presets")
    presets.add_argument("action", choices=("list", "show"))
    presets.add_argument("name", nargs="?", help="preset name for 'show'")

    sub.add_parser("config-reference", help="print all config keys and defaults")

    replay = sub.add_parser("replay", help="rebuild a dumped channel realization")
    replay.add_argument("--channel-dump", required=True, help="dump file path")
    replay.add_argument("--snr-db", type=float, default=10.0,
                        help="SNR for the replayed rate comparison (default 10)")
    return parser


_SWEEP_DEFAULT_GRID = {
    "vs_phimax": (60.0, 120.0, 180.0, 240.0, 306.82, 360.0),
    "vs_bits": (1.0, 2.0, 3.0, 4.0),
    "vs_nris": (16.0, 32.0, 64.0, 96.0, 128.0),
}


def _cmd_run(args) -> int:
    if args.config:
        config = harness.load_config(args.config)
        stem = os.path.splitext(os.path.basename(args.config))[0]
    else:
        config = harness.preset(args.preset)
        stem = args.preset
    if args.seed is not None:
        config = replace(config, master_seed=args.seed)
    if args.sweep is not None and args.sweep != config.sweep:
        grid = _SWEEP_DEFAULT_GRID.get(args.sweep, ())
        config = replace(config, sweep=args.sweep, sweep_grid=grid)
    if args.timing:
        config = replace(config, record_wall_time=True)
    config.validate()

    if args.dump_channels:
        os.makedirs(args.dump_channels, exist_ok=True)
    os.makedirs(args.out, exist_ok=True)
    out_path = os.path.join(args.out, stem + ".csv")

    result = harness.run_experiment(config, workers=max(1, args.workers),
                                    dump_dir=args.dump_channels)
    harness.emit_csv(result, out_path)

    top_snr = max(config.snr_grid_dB)
    print(f"wrote {len(result.rows)} rows to {out_path}")
    print(f"mean rate at {top_snr:g} dB (first sweep point):")
    first_value = result.rows[0].sweep_value
    for row in result.rows:
        if row.snr_db == top_snr and row.sweep_value == first_value:
            print(f"  {row.scheme:<10} {row.mean_rate:8.3f} bps/Hz")
    return 0


def _cmd_presets(args) -> int:
    if args.action == "list":
        for name in harness.preset_names():
            print(name)
        return 0
    if not args.name:
        raise ConfigError("'presets show' needs a preset name")
    print(harness.config_to_text(harness.preset(args.name)), end="")
    return 0


def _cmd_replay(args) -> int:
    from .channel import load_realization

    real = load_realization(args.channel_dump)
    h1 = harness._normalized_hop(real.h1)
    h2 = harness._normalized_hop(real.h2)
    n_ris = real.h1.shape[0]
    print(f"seed {real.seed}")
    print(f"h1 {real.h1.shape[0]}x{real.h1.shape[1]}  ||h1||_F = "
          f"{np.linalg.norm(real.h1):.6e}  paths = {len(real.paths_h1)}")
    print(f"h2 {real.h2.shape[0]}x{real.h2.shape[1]}  ||h2||_F = "
          f"{np.linalg.norm(real.h2):.6e}  paths = {len(real.paths_h2)}")

    defaults = harness.ExperimentConfig()
    codebook = defaults.codebook()
    n_streams = min(defaults.n_streams, real.h2.shape[0], real.h1.shape[1])
    form, _ = optimizer.build_quadratic_form(h1, h2).trace_normalized()
    snr = 10.0 ** (args.snr_db / 10.0)

    agd = optimizer.run_agd(form, codebook, defaults.optimizer)
    rng = np.random.default_rng(real.seed)
    rnd = optimizer.run_random_phase(form, codebook, 1, rng)
    for label, phases in (("agd", agd.quantized_phases_rad),
                          ("random", rnd.quantized_phases_rad)):
        state = beamforming.ReflectionState.from_phases(phases, codebook.mean_amplitude)
        he = beamforming.cascaded_channel(h1, h2, state)
        pair = beamforming.svd_beamformers(he, n_streams)
        rate = beamforming.achievable_rate(he, pair, snr)
        print(f"{label:<8} rate at {args.snr_db:g} dB: {rate:.3f} bps/Hz "
              f"({n_ris} elements, {n_streams} streams)")
    return 0


def cli_main(argv) -> int:
    """Entry point used by tests; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "presets":
            return _cmd_presets(args)
        if args.command == "config-reference":
            print(harness.config_reference(), end="")
            return 0
        if args.command == "replay":
            return _cmd_replay(args)
        return 2
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # surfaced as a runtime failure, exit 1
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    raise SystemExit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
