from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Sequence
import argparse
import csv
import io
import json
import logging
import sys

from sandpairs.asymptotics import (
    DECIMAL_CONSTANT,
    EstimatorRow,
    sand_prime_constant,
    twin_prime_constant,
)
from sandpairs.checkpoint import (
    CheckpointError,
    append_record,
    find_checkpoints,
    load_records,
    merge_checkpoints,
    repair_tail,
)
from sandpairs.config import CapExceededError, RunConfig
from sandpairs.digitsum import Base
from sandpairs.fluct import BOUNDS, fluctuation_series, theta_series
from sandpairs.primes import DEFAULT_SEGMENT_SIZE, count_primes_between
from sandpairs.sandcore import (
    DeltaHistogram,
    admissible_delta_rule,
    count_sand_primes_at,
    list_sand_primes,
    plan_units,
    sand_prime_deltas,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_BAD_ARGUMENTS = 2
EXIT_IO = 3
EXIT_CAP = 4


@dataclass(frozen=True)
class Table:
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)
    note: str | None = None
    decimals: int = 4


def _cell(value, decimals: int):
    if isinstance(value, float):
        return f"{value:.{decimals}f}"
    return str(value)


def render(table: Table, output_format: str = "csv") -> str:
    if output_format == "json":
        rows = [
            {
                column: round(value, table.decimals) if isinstance(value, float) else value
                for column, value in zip(table.columns, row)
            }
            for row in table.rows
        ]
        document = {"columns": list(table.columns), "rows": rows}
        if table.note:
            document["note"] = table.note
        return json.dumps(document, indent=2) + "\n"

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_cell(value, table.decimals) for value in row])
    if table.note:
        buffer.write(f"# {table.note}\n")
    return buffer.getvalue()


def _histograms(config: RunConfig) -> list[DeltaHistogram]:
    completed = {}
    on_unit = None
    path = config.checkpoint_path

    if path is not None:
        if path.exists() and not config.resume:
            raise FileExistsError(f"Checkpoint already exists: {path} (pass --resume to continue it)")
        if path.exists():
            repair_tail(path)
            completed = load_records(path, config.base)
            planned = set(plan_units(config.thresholds, config.segment_size))
            stray = [unit for unit in completed if unit not in planned]
            if stray:
                raise CheckpointError(
                    f"Checkpoint {path} holds range [{stray[0].lo}, {stray[0].hi}) "
                    "that this run does not plan; thresholds or segment size changed"
                )
        on_unit = partial(append_record, path)

    logger.info(
        "Counting base %d SanD primes up to %d at %d thresholds on %d worker(s)",
        config.base.b,
        config.x_max,
        len(config.thresholds),
        config.threads,
    )

    return count_sand_primes_at(
        config.thresholds,
        config.base,
        threads=config.threads,
        segment_size=config.segment_size,
        completed=completed,
        on_unit=on_unit,
        progress=config.progress,
    )


def cmd_table1(config: RunConfig) -> Table:
    deltas = sand_prime_deltas(config.x_max, config.base)
    histograms = _histograms(config)

    rule = admissible_delta_rule(config.base, "primes")
    counted = [pair for pair in rule.sporadic if pair.b <= histograms[-1].x]
    note = None
    if counted:
        pairs = ", ".join(f"({pair.a}, {pair.b})" for pair in counted)
        note = f"total includes the sporadic pair(s) {pairs} outside the delta columns"

    return Table(
        columns=("x", *(f"delta_{delta}" for delta in deltas), "total"),
        rows=[(h.x, *h.row(deltas), h.total) for h in histograms],
        note=note,
    )


def cmd_estimators(config: RunConfig) -> Table:
    histograms = _histograms(config)

    rows = []
    pi_x, previous = 0, 1
    for histogram in histograms:
        pi_x += count_primes_between(previous + 1, histogram.x + 1, config.segment_size)
        previous = histogram.x
        if histogram.x < 3:
            continue
        row = EstimatorRow(x=histogram.x, T=histogram.total, pi_x=pi_x)
        rows.append((row.x, row.T, row.est_pi, row.est_log, row.est_li2))

    return Table(columns=("x", "T", "est_pi", "est_log", "est_li2"), rows=rows)


def cmd_theta(config: RunConfig) -> Table:
    constant = float(sand_prime_constant(config.base))
    if constant == 0:
        raise ValueError(f"Base {config.base.b} has no SanD primes; theta is undefined")

    totals = [(h.x, h.total) for h in _histograms(config) if h.x >= 10]
    return Table(columns=("x", "T", "theta"), rows=theta_series(totals, constant), decimals=6)


def cmd_fluct(n_min: int, n_max: int, bound: str = "larger") -> Table:
    rows = [
        (row.n, row.u, row.d_n, row.d_prime, row.D_fluc_scaled, row.P_fluc_scaled)
        for row in fluctuation_series(n_min, n_max, bound)
    ]
    return Table(
        columns=("n", "u", "d_n", "d_prime", "D_fluc_scaled", "P_fluc_scaled"),
        rows=rows,
        decimals=6,
    )


def cmd_list(delta: int, k: int, base: int | Base = 10) -> Table:
    pairs = list_sand_primes(delta, k, base)
    return Table(
        columns=("p", "q", "delta", "product"),
        rows=[(pair.a, pair.b, pair.delta, pair.product) for pair in pairs],
    )


def cmd_constants(base: int | Base = 10) -> Table:
    constant = sand_prime_constant(base)
    twin = twin_prime_constant()
    return Table(
        columns=("base", "c_b", "c_b_decimal", "C2", "two_C2"),
        rows=[(int(Base(int(base))), str(constant), float(constant), twin, 2 * twin)],
        note=f"decimal SanD primes are compared against c = {DECIMAL_CONSTANT}",
        decimals=6,
    )


def cmd_merge(patterns: Sequence[str], destination: str | Path) -> Table:
    shards = find_checkpoints(*patterns)
    merged = merge_checkpoints(shards, destination)
    return Table(columns=("shards", "destination"), rows=[(len(shards), str(merged))])


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--max", default="10^4", help="largest x, e.g. 10^8, 3*10^4 or 1e6")
    parser.add_argument("--thresholds", help="comma separated x values (default: 10^k and 3*10^k)")
    parser.add_argument("--threads", type=int, help="worker processes (default: $SAND_THREADS or 1)")
    parser.add_argument("--segment-size", type=int, default=DEFAULT_SEGMENT_SIZE)
    parser.add_argument("--checkpoint", help="line-delimited JSON file of completed ranges")
    parser.add_argument("--resume", action="store_true", help="skip ranges already in --checkpoint")
    parser.add_argument("--progress", action="store_true", help="show a progress bar on stderr")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--base", type=int, default=10)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--output", help="write here instead of stdout")
    common.add_argument("--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="sandpairs",
        description="Enumerate SanD numbers and primes and reproduce their count tables.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    table1 = commands.add_parser(
        "table1", parents=[common], help="per-delta SanD prime counts",
        description="CSV columns: x, delta_<d> for each admissible delta, total.",
    )
    _add_run_options(table1)
    table1.set_defaults(handler=lambda args: cmd_table1(RunConfig.from_args(args)))

    estimators = commands.add_parser(
        "estimators", parents=[common], help="estimators of the growth constant",
        description="CSV columns: x, T, est_pi = xT/pi(x)^2, est_log = T log^2 x / x, est_li2 = T/Li2(x).",
    )
    _add_run_options(estimators)
    estimators.set_defaults(handler=lambda args: cmd_estimators(RunConfig.from_args(args)))

    theta_parser = commands.add_parser(
        "theta", parents=[common], help="relative deviation from c_b x / log^2 x",
        description="CSV columns: x, T, theta.",
    )
    _add_run_options(theta_parser)
    theta_parser.set_defaults(handler=lambda args: cmd_theta(RunConfig.from_args(args)))

    fluct = commands.add_parser(
        "fluct", parents=[common], help="restricted counts d(n) and fluctuation series",
        description="CSV columns: n, u, d_n, d_prime, D_fluc_scaled, P_fluc_scaled.",
    )
    fluct.add_argument("--n-min", type=int, default=13)
    fluct.add_argument("--n-max", type=int, default=39)
    fluct.add_argument("--bound", choices=BOUNDS, default="larger")
    fluct.set_defaults(handler=lambda args: cmd_fluct(args.n_min, args.n_max, args.bound))

    listing = commands.add_parser(
        "list", parents=[common], help="first SanD primes with a given delta",
        description="CSV columns: p, q, delta, product.",
    )
    listing.add_argument("--delta", type=int, required=True)
    listing.add_argument("--count", type=int, default=19)
    listing.set_defaults(handler=lambda args: cmd_list(args.delta, args.count, args.base))

    constants = commands.add_parser(
        "constants", parents=[common], help="predicted constant c_b and the twin prime constant",
        description="CSV columns: base, c_b, c_b_decimal, C2, two_C2.",
    )
    constants.set_defaults(handler=lambda args: cmd_constants(args.base))

    merge = commands.add_parser(
        "merge", parents=[common], help="merge checkpoint shards from separate runs",
        description="CSV columns: shards, destination.",
    )
    merge.add_argument("shards", nargs="+", help="checkpoint files or glob patterns")
    merge.add_argument("--into", required=True, help="merged checkpoint path")
    merge.set_defaults(handler=lambda args: cmd_merge(args.shards, args.into))

    return parser


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
        stream=sys.stderr,
    )


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)

    try:
        table = args.handler(args)
        text = render(table, args.format)
        if args.output:
            Path(args.output).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
    except CapExceededError as e:
        print(f"sandpairs: {e}", file=sys.stderr)
        return EXIT_CAP
    except (CheckpointError, OSError) as e:
        print(f"sandpairs: {e}", file=sys.stderr)
        return EXIT_IO
    except ValueError as e:
        print(f"sandpairs: {e}", file=sys.stderr)
        return EXIT_BAD_ARGUMENTS

    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
