"""
Command-line entry point.

    uv run -m cli.main point --L 10 --nup 5 --ndown 5 --U 0
    uv run -m cli.main scan-v --L 8 --U 4 --v-range 0:4 --v-steps 41
    uv run -m cli.main --config previous.json --output again.json
"""

import argparse
import contextlib
import logging
import os
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Any, Callable, NamedTuple, Optional, Sequence, TextIO

from dotenv import load_dotenv
from pydantic import ValidationError

from cli.config import Command, OutputFormat, RunConfig, SeriesKind, load_config
from cli.output import (
    curve_payload,
    grid_payload,
    write_curve_csv,
    write_grid_csv,
    write_json,
    write_matrix,
    write_record_csv,
    write_records_csv,
)
from hubbard import bethe
from hubbard.errors import ContractError, ConvergenceError, QuadratureError, SectorError
from hubbard.observables import charge_gap, entanglement_at, sector_for
from scan.engine import (
    SlopeJump,
    scan_filling,
    scan_slope,
    scan_u,
    scan_uv,
    scan_v,
    select_sector_by_mu,
    slope_jump_at_half_filling,
)

logger = logging.getLogger(__name__)


class Outcome(NamedTuple):
    result: dict[str, Any]
    # writers for the tabular formats, keyed by format
    tables: dict[OutputFormat, Callable[[TextIO], None]]
    failures: list[str]


def _span(text: str) -> tuple[float, float]:
    lo, sep, hi = text.partition(":")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}")
    try:
        return float(lo), float(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numbers in {text!r}")


'''
Parser
'''


def build_parser() -> argparse.ArgumentParser:
    # SUPPRESS keeps unset flags out of the namespace so RunConfig and
    # replayed configs supply the defaults
    quiet = argparse.SUPPRESS
    parser = argparse.ArgumentParser(
        prog="hubent",
        description="Local entanglement of the 1D extended Hubbard model",
        argument_default=quiet,
    )
    parser.add_argument("--config", type=Path, help="replay the config of a previous JSON output")
    parser.add_argument("--output", type=Path, help="write here instead of stdout")
    parser.add_argument("--verbose", action="store_true", help="debug logging")

    common = argparse.ArgumentParser(add_help=False, argument_default=quiet)
    common.add_argument("--L", type=int, help="number of sites")
    common.add_argument("--U", type=float, help="on-site coupling")
    common.add_argument("--V", type=float, help="nearest-neighbour coupling")
    common.add_argument("--mu", type=float, help="chemical potential")
    common.add_argument("--boundary", choices=["open", "periodic"])
    common.add_argument("--seed", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--max-iter", dest="max_iter", type=int)
    common.add_argument("--jobs", type=int, help="worker threads for sweeps")
    common.add_argument("--output", type=Path, help="write here instead of stdout")
    common.add_argument("--format", choices=[f.value for f in OutputFormat])
    common.add_argument("--verbose", action="store_true", help="debug logging")

    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    point = sub.add_parser("point", parents=[common], argument_default=quiet, help="E_v of one sector")
    point.add_argument("--nup", type=int)
    point.add_argument("--ndown", type=int)
    point.add_argument("--N", type=int, help="total particles (Sz-minimal sector)")

    uv = sub.add_parser("scan-uv", parents=[common], argument_default=quiet, help="E_v over a U-V grid at half filling")
    _ranges(uv, "u")
    _ranges(uv, "v")

    u = sub.add_parser("scan-u", parents=[common], argument_default=quiet, help="E_v against U at half filling")
    _ranges(u, "u")
    u.add_argument("--bethe", action="store_true", help="add the L=infinity Bethe column")

    v = sub.add_parser("scan-v", parents=[common], argument_default=quiet, help="E_v against V at half filling")
    _ranges(v, "v")
    v.add_argument("--theta", type=float, help="cusp threshold")

    n = sub.add_parser("scan-n", parents=[common], argument_default=quiet, help="E_v against filling")
    n.add_argument("--theta", type=float, help="cusp threshold")

    slope = sub.add_parser("slope", parents=[common], argument_default=quiet, help="slope jump of E_v at half filling")
    slope.add_argument("--no-gap-estimate", dest="gap_estimate", action="store_false", help="skip the gap-derivative estimate")
    _ranges(slope, "u")

    gap = sub.add_parser("gap", parents=[common], argument_default=quiet, help="charge gap")
    gap.add_argument("--N", type=int, help="total particles (default L)")

    b = sub.add_parser("bethe", parents=[common], argument_default=quiet, help="exact L=infinity half filling values")
    b.add_argument("--series", choices=[s.value for s in SeriesKind])

    sub.add_parser("mu", parents=[common], argument_default=quiet, help="particle number selected by a chemical potential")
    return parser


def _ranges(parser: argparse.ArgumentParser, axis: str) -> None:
    parser.add_argument(f"--{axis}-range", dest=f"{axis}_range", type=_span, help="lo:hi")
    parser.add_argument(f"--{axis}-steps", dest=f"{axis}_steps", type=int)


def setup_logging(verbose: bool) -> None:
    level = logging.DEBUG if verbose else os.getenv("HUBENT_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


'''
Commands
'''


def _point(config: RunConfig) -> Outcome:
    if config.nup is not None:
        n_up, n_down = config.nup, config.ndown
    else:
        n_up, n_down = sector_for(config.L if config.N is None else config.N, config.L)
    ev, rdm, ground = entanglement_at(config.model_params(), n_up, n_down, config.solver_options())
    record = {
        "ev": ev,
        **asdict(rdm),
        "n_up": n_up,
        "n_down": n_down,
        "ground_energy": ground.ground_energy,
        "degeneracy": ground.degeneracy,
        "residual": float(ground.residuals.max()),
        "method": ground.method,
    }
    return Outcome(record, {OutputFormat.CSV: lambda s: write_record_csv(record, s)}, [])


def _curve_outcome(curve, report=None) -> Outcome:
    failures = [f"{curve.axis_name}={curve.axis_values[i]:.12g}: {e}" for i, e in curve.errors.items()]
    return Outcome(
        curve_payload(curve, report),
        {OutputFormat.CSV: lambda s: write_curve_csv(curve, s)},
        failures,
    )


def _scan_uv(config: RunConfig) -> Outcome:
    grid = scan_uv(
        config.L, config.u_range, config.v_range, (config.u_steps, config.v_steps),
        boundary=config.boundary, options=config.solver_options(), jobs=config.jobs,
    )
    failures = [
        f"U={grid.u_values[i]:.12g}, V={grid.v_values[j]:.12g}: {e}" for (i, j), e in grid.errors.items()
    ]
    tables = {
        OutputFormat.CSV: lambda s: write_grid_csv(grid, s),
        OutputFormat.MATRIX: lambda s: write_matrix(grid, s),
    }
    return Outcome(grid_payload(grid), tables, failures)


def _scan_u(config: RunConfig) -> Outcome:
    curve = scan_u(
        config.L, config.u_range, config.u_steps, config.V, bethe=config.bethe,
        boundary=config.boundary, options=config.solver_options(), jobs=config.jobs,
    )
    return _curve_outcome(curve)


def _scan_v(config: RunConfig) -> Outcome:
    curve, report = scan_v(
        config.L, config.U, config.v_range, config.v_steps, theta=config.theta,
        boundary=config.boundary, options=config.solver_options(), jobs=config.jobs,
    )
    return _curve_outcome(curve, report)


def _scan_n(config: RunConfig) -> Outcome:
    curve, report = scan_filling(
        config.L, config.U, config.V, theta=config.theta,
        boundary=config.boundary, options=config.solver_options(), jobs=config.jobs,
    )
    return _curve_outcome(curve, report)


def _slope_record(jump: SlopeJump) -> dict[str, Any]:
    return {**asdict(jump), "jump": jump.jump, "antisymmetry": jump.antisymmetry}


def _slope(config: RunConfig) -> Outcome:
    common = dict(
        with_gap_estimate=config.gap_estimate,
        boundary=config.boundary, options=config.solver_options(), jobs=config.jobs,
    )
    if config.u_range is not None:
        records = [_slope_record(j) for j in scan_slope(config.L, config.u_range, config.u_steps, **common)]
        return Outcome({"points": records}, {OutputFormat.CSV: lambda s: write_records_csv(records, s)}, [])
    record = _slope_record(slope_jump_at_half_filling(config.L, config.U, **common))
    return Outcome(record, {OutputFormat.CSV: lambda s: write_record_csv(record, s)}, [])


def _gap(config: RunConfig) -> Outcome:
    N = config.L if config.N is None else config.N
    record = asdict(charge_gap(config.model_params(), N, config.solver_options()))
    return Outcome(record, {OutputFormat.CSV: lambda s: write_record_csv(record, s)}, [])


def _bethe(config: RunConfig) -> Outcome:
    U = config.U
    w = bethe.double_occupancy(U)
    record: dict[str, Any] = {
        "U": U,
        "e": bethe.gs_energy_per_site(U),
        "w": w,
        "ev": bethe.ev_half_filling(U),
    }
    if config.series is not None:
        strong = config.series == SeriesKind.STRONG
        series_w = (bethe.series_strong_w if strong else bethe.series_weak_w)(U)
        series_ev = (bethe.series_strong_ev if strong else bethe.series_weak_ev)(U)
        record.update(
            series=config.series.value,
            series_w=series_w.value,
            w_difference=w - series_w.value,
            series_w_omitted=series_w.omitted,
            series_ev=series_ev.value,
            ev_difference=record["ev"] - series_ev.value,
            series_valid=series_w.valid,
        )
        if series_w.warning:
            record["series_warning"] = series_w.warning
    return Outcome(record, {OutputFormat.CSV: lambda s: write_record_csv(record, s)}, [])


def _mu(config: RunConfig) -> Outcome:
    selection = select_sector_by_mu(
        config.L, config.U, config.V, config.mu,
        boundary=config.boundary, options=config.solver_options(),
    )
    record = {
        "mu": selection.mu,
        "N": selection.n_particles,
        "n": selection.filling,
        "ground_energy": selection.ground_energy,
        "degenerate": selection.degenerate,
        "plateau": selection.plateau,
        "energies": selection.energies,
    }
    return Outcome(record, {OutputFormat.CSV: lambda s: write_record_csv(record, s)}, [])


COMMANDS: dict[Command, Callable[[RunConfig], Outcome]] = {
    Command.POINT: _point,
    Command.SCAN_UV: _scan_uv,
    Command.SCAN_U: _scan_u,
    Command.SCAN_V: _scan_v,
    Command.SCAN_N: _scan_n,
    Command.SLOPE: _slope,
    Command.GAP: _gap,
    Command.BETHE: _bethe,
    Command.MU: _mu,
}


def _emit(config: RunConfig, outcome: Outcome) -> None:
    fmt = config.output_format
    with contextlib.ExitStack() as stack:
        stream = sys.stdout
        if config.output is not None:
            stream = stack.enter_context(open(config.output, "w", encoding="utf-8", newline=""))
        if fmt == OutputFormat.JSON:
            write_json(config.model_dump(mode="json"), outcome.result, stream)
        elif fmt in outcome.tables:
            outcome.tables[fmt](stream)
        else:
            raise ContractError(f"{config.command.value} has no {fmt.value} output")


def run(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    parser = build_parser()
    try:
        args = vars(parser.parse_args(argv))
    except SystemExit as exc:
        return int(exc.code or 0)

    verbose = args.pop("verbose", False)
    setup_logging(verbose)
    replay = args.pop("config", None)

    fields: dict[str, Any] = {}
    try:
        if replay is not None:
            fields.update(load_config(replay))
            # a replay writes to stdout unless --output is given again
            fields.pop("output", None)
    except (OSError, ValueError) as exc:
        print(f"hubent: cannot replay {replay}: {exc}", file=sys.stderr)
        return 2
    fields.update({k: v for k, v in args.items() if v is not None})
    if "command" not in fields:
        parser.print_usage(sys.stderr)
        print("hubent: a command (or --config) is required", file=sys.stderr)
        return 2

    try:
        config = RunConfig.model_validate(fields)
        outcome = COMMANDS[config.command](config)
    except (ValidationError, SectorError, ContractError) as exc:
        parser.print_usage(sys.stderr)
        print(f"hubent: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceError, QuadratureError) as exc:
        logger.error("numerical failure: %s", exc)
        print(f"hubent: numerical failure: {exc}", file=sys.stderr)
        return 1

    _emit(config, outcome)
    if outcome.failures:
        for failure in outcome.failures:
            print(f"hubent: failed point {failure}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
