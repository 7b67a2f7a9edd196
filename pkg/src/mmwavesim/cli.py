"""Command-line scenario runner.

    mmwavesim run <scenario> [--seed N] [--out DIR] [--no-figures]
    mmwavesim drops <scenario> --n N [--workers W] [--seed N] [--out DIR]
    mmwavesim sweep <scenario> --offsets 0,5,10 [--seed N] [--out DIR]

<scenario> is a file path or the name of a bundled scenario
(mmwave-tdma, mmwave-tcp-building, mmwave-amc-test, mmwave-mobility).
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .engine import ConfigError
from .runner import run_drops, run_scenario, sweep_pathloss
from .scenario import find_scenario


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("scenario", help="scenario file or bundled scenario name")
    p.add_argument("--seed", type=int, default=None, help="override scenario seed")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmwavesim", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute one scenario run")
    _add_common(run_p)

    drops_p = sub.add_parser("drops", help="run N drops and aggregate a rate CDF")
    _add_common(drops_p)
    drops_p.add_argument("--n", type=int, required=True, help="number of drops")
    drops_p.add_argument("--workers", type=int, default=1,
                         help="parallel drop workers (default 1)")

    sweep_p = sub.add_parser("sweep", help="pathloss-offset AMC sweep")
    _add_common(sweep_p)
    sweep_p.add_argument("--offsets", required=True,
                         help="comma-separated pathloss offsets in dB")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scenario = find_scenario(args.scenario)
        if args.seed is not None:
            scenario = dataclasses.replace(scenario, seed=args.seed)

        if args.command == "run":
            summary = run_scenario(scenario, args.out)
            print(f"cell throughput: {summary.cell_throughput_bps / 1e6:.2f} Mbps "
                  f"(seed {summary.seed}, {summary.duration_s:g} s)")
            if summary.tcp is not None:
                print(f"tcp goodput: {summary.tcp['goodput_bps'] / 1e6:.2f} Mbps, "
                      f"{summary.tcp['retransmissions']} retransmissions, "
                      f"{summary.tcp['timeouts']} timeouts")
        elif args.command == "drops":
            summaries = run_drops(scenario, args.n, args.out, workers=args.workers)
            mean_cell = sum(s.cell_throughput_bps for s in summaries) / len(summaries)
            print(f"{len(summaries)} drops, mean cell throughput "
                  f"{mean_cell / 1e6:.2f} Mbps")
        elif args.command == "sweep":
            offsets = [float(x) for x in args.offsets.split(",") if x.strip()]
            if not offsets:
                raise ConfigError("--offsets is empty")
            points = sweep_pathloss(scenario, offsets, args.out)
            for p in points:
                print(f"offset {p.offset_db:6.2f} dB  sinr {p.avg_sinr_db:7.2f} dB  "
                      f"rate {p.phy_rate_bps / 1e6:8.2f} Mbps  mcs {p.modal_mcs:2d}  "
                      f"err {p.tb_error_rate:.3f}")

        if not args.no_figures:
            from .report import render_run_figures
            for path in render_run_figures(args.out):
                print(f"figure: {path}")
        return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
