"""Command line entry points.

Subcommands: ``instrument`` (live MIDI bridge), ``conductor`` (control
surface host), ``render`` (offline file transformation), ``bench-latency``
(gesture dispatch timing).  Exit codes: 0 success, 1 usage, 2 I/O or data
error, 3 configuration error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .bench import run_latency_benchmark
from .config import (
    ConductorConfig,
    ConfigError,
    InstrumentConfig,
    parse_host_port,
)
from .midiio import MidiPortError
from .render import RenderError, ScriptError, parse_command_script, render_offline
from .service import run_conductor, run_instrument
from .smf import SMFError, read_smf, write_smf

__all__ = ["main"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_CONFIG = 3


class _Parser(argparse.ArgumentParser):
    """argparse's default exit code for usage errors is 2; ours is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="livescaler",
        description="Live MIDI pitch transformation: instruments, conductor, "
        "offline rendering.",
    )
    parser.add_argument(
        "-v", "--verbose", action="count", default=0,
        help="log more (-v info, -vv debug)",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    instrument = commands.add_parser(
        "instrument", help="run a MIDI transformer following broadcasts"
    )
    instrument.add_argument("--config", required=True, metavar="FILE")
    instrument.set_defaults(func=_cmd_instrument)

    conductor = commands.add_parser(
        "conductor", help="host the pad surface and broadcast transforms"
    )
    conductor.add_argument("--config", required=True, metavar="FILE")
    conductor.add_argument(
        "--ui-listen", metavar="HOST:PORT",
        help="override the UI endpoint from the config file",
    )
    conductor.set_defaults(func=_cmd_conductor)

    render = commands.add_parser(
        "render", help="apply a command script to a MIDI file offline"
    )
    render.add_argument("--in", dest="infile", required=True, metavar="SMF")
    render.add_argument("--script", required=True, metavar="FILE")
    render.add_argument(
        "--config", metavar="FILE",
        help="instrument profile (mode, window, anchor); defaults apply if omitted",
    )
    render.add_argument("--out", required=True, metavar="SMF")
    render.set_defaults(func=_cmd_render)

    bench = commands.add_parser(
        "bench-latency", help="measure in-process gesture dispatch latency"
    )
    bench.add_argument("--gestures", type=int, default=10_000)
    bench.add_argument("--instruments", type=int, default=4)
    bench.add_argument("--seed", type=int, default=0xC0FFEE)
    bench.set_defaults(func=_cmd_bench)
    return parser


def _cmd_instrument(args) -> int:
    cfg = InstrumentConfig.from_file(args.config)
    run_instrument(cfg)
    return EXIT_OK


def _cmd_conductor(args) -> int:
    cfg = ConductorConfig.from_file(args.config)
    ui_listen = None
    if args.ui_listen:
        ui_listen = parse_host_port(args.ui_listen, allow_ephemeral=True)

    def announce(service) -> None:
        # the operator needs the URL to open the pad UI, and with port 0
        # this line is the only place the bound port appears
        print(f"ui listening on ws://{service.ui_host}:{service.ui_port}",
              flush=True)

    run_conductor(cfg, ui_listen, started=announce)
    return EXIT_OK


def _cmd_render(args) -> int:
    if args.config:
        cfg = InstrumentConfig.from_file(args.config)
    else:
        cfg = InstrumentConfig()
    with open(args.infile, "rb") as handle:
        mf = read_smf(handle.read())
    with open(args.script, encoding="utf-8") as handle:
        script = parse_command_script(handle.read())
    rendered = render_offline(
        mf,
        script,
        mode=cfg.mode,
        bounds=cfg.bounds,
        anchor_midi=cfg.anchor_midi,
        base=cfg.base,
        retrigger_delay_us=cfg.retrigger_delay_us,
        channels=cfg.channels,
    )
    with open(args.out, "wb") as handle:
        handle.write(write_smf(rendered))
    return EXIT_OK


def _cmd_bench(args) -> int:
    report = run_latency_benchmark(args.gestures, args.instruments, args.seed)
    print(report.format())
    print("target: p99 < 1000 us on the in-process path")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    levels = {0: logging.WARNING, 1: logging.INFO}
    logging.basicConfig(level=levels.get(args.verbose, logging.DEBUG))
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"livescaler: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SMFError, ScriptError, RenderError) as exc:
        print(f"livescaler: {exc}", file=sys.stderr)
        return EXIT_IO
    except MidiPortError as exc:
        print(f"livescaler: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"livescaler: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
