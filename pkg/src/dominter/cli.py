r"""
Command-line interface.

::

    dominter analytic --preset fig4
    dominter compare --config run.yaml --trials 100000 --workers 8 --out curves.csv
    dominter preset fig5 --out fig5.yaml

Exit codes: 0 on success, 2 for configuration or usage errors, 3 for numeric failures. After a numeric failure the scenarios that did finish are still written, with ``truncated: true`` in the metadata.
"""

import argparse
import logging
import os
import sys
import time

from . import __version__
from .analytic import FadingShift, density_bound, outage_capacity
from .config import ConfigError, dump, load, preset, scenario_to_dict, with_overrides
from .fading import NoFading
from .filtering import q_factor
from .results import ResultTable
from .simulator import analytic_curve, dominance_report, estimate_outage_curve
from .utils import db_to_linear, linear_to_db

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

NUMERIC_ERRORS = (RuntimeError, ArithmeticError, FloatingPointError)

ANALYTIC_COLUMNS = [
    "scenario",
    "d_db",
    "p_exact",
    "p_approx",
    "regime_valid",
    "d0_db",
    "fading_shift",
    "q_factor",
]
SIMULATE_COLUMNS = ["scenario", "d_db", "p_mc_nearest", "p_mc_total", "ci_lo", "ci_hi"]
COMPARE_COLUMNS = SIMULATE_COLUMNS + ["p_exact", "p_approx", "within_ci"]
DOMINANCE_COLUMNS = [
    "scenario",
    "x_db",
    "p_nearest",
    "p_total",
    "ratio",
    "ratio_ci_lo",
    "ratio_ci_hi",
    "insufficient",
    "lower_ratio",
    "upper_ratio",
    "tail_index",
    "expected_tail_index",
]
TRADEOFF_COLUMNS = [
    "scenario",
    "epsilon",
    "q_factor",
    "n_bar_exact",
    "n_bar_small_eps",
    "rho_exact",
    "rho_small_eps",
]
CAPACITY_COLUMNS = [
    "scenario",
    "gamma_db",
    "epsilon",
    "d_eps_db",
    "d_eps_closed_db",
    "capacity",
    "capacity_high_sir",
    "capacity_low_sir",
    "capacity_low_sir_closed",
]

# reported from the retained reservoir
QUANTILE_LEVELS = (0.5, 0.9, 0.99)


class Truncated(Exception):
    r"""
    A numeric failure after some scenarios finished; carries the partial tables.
    """

    def __init__(self, tables, cause):
        self.tables = tables
        self.cause = cause
        super().__init__(str(cause))


def _metadata(command, config):
    return {
        "version": __version__,
        "command": command,
        "master_seed": {s.label: s.master_seed for s in config.scenarios},
        "scenarios": [scenario_to_dict(s) for s in config.scenarios],
    }


def _run_scenarios(config, tables, fill):
    # fill(scenario, tables) appends the rows of one scenario
    for scenario in config.scenarios:
        try:
            fill(scenario, tables)
        except NUMERIC_ERRORS as e:
            for table in tables:
                table.metadata["truncated"] = True
                table.metadata["failed_scenario"] = scenario.label
            raise Truncated(tables, e)
        logger.info("scenario %s done", scenario.label)
    return tables


def cmd_analytic(config):
    r"""
    Closed-form outage columns over the INR grid.
    """
    d_db = config.grid.values
    table = ResultTable(ANALYTIC_COLUMNS, metadata=_metadata("analytic", config))

    def fill(scenario, tables):
        cols = analytic_curve(scenario, d_db)
        for i, d in enumerate(d_db):
            tables[0].add_row(
                [
                    scenario.label,
                    d,
                    cols["p_exact"][i],
                    cols["p_approx"][i],
                    bool(cols["regime_valid"][i]),
                    cols["d0_db"],
                    cols["fading_shift"],
                    cols["q_factor"],
                ]
            )

    return _run_scenarios(config, [table], fill)


def _simulation(command, config):
    d_db = config.grid.values
    compare = command == "compare"
    tables = [ResultTable(COMPARE_COLUMNS if compare else SIMULATE_COLUMNS, metadata=_metadata(command, config))]
    if config.dominance:
        tables.append(ResultTable(DOMINANCE_COLUMNS, metadata=_metadata("dominance", config)))
    pass_rate = {}
    quantiles = {}

    def fill(scenario, tables):
        curve = estimate_outage_curve(
            scenario, d_db, workers=config.workers, retain=config.retain
        )
        lo, hi = curve.ci_total
        within = curve.within_ci()
        for i, d in enumerate(d_db):
            row = [scenario.label, d, curve.p_nearest[i], curve.p_total[i], lo[i], hi[i]]
            if compare:
                row += [curve.p_exact[i], curve.p_approx[i], bool(within[i])]
            tables[0].add_row(row)
        if compare:
            pass_rate[scenario.label] = curve.pass_rate()
            tables[0].metadata["pass_rate"] = pass_rate
        if config.retain:
            quantiles[scenario.label] = {
                str(level): float(q) for level, q in zip(QUANTILE_LEVELS, curve.quantiles(QUANTILE_LEVELS))
            }
            tables[0].metadata["quantiles_db"] = quantiles

        if config.dominance:
            report = dominance_report(scenario, config.dominance_grid.values, workers=config.workers)
            for i, x in enumerate(report.x_db):
                tables[1].add_row(
                    [
                        scenario.label,
                        x,
                        report.p_nearest[i],
                        report.p_total[i],
                        report.ratio[i],
                        report.ci_lo[i],
                        report.ci_hi[i],
                        bool(report.insufficient[i]),
                        report.lower_ratio[i],
                        report.upper_ratio[i],
                        report.tail_index[i],
                        report.expected_tail_index,
                    ]
                )

    return _run_scenarios(config, tables, fill)


def cmd_simulate(config):
    r"""
    Monte-Carlo outage curves with 99% Wilson intervals of the total statistic.
    """
    return _simulation("simulate", config)


def cmd_compare(config):
    r"""
    Monte-Carlo curves next to the analytic columns, with a per-point coverage flag and a per-scenario pass rate in the metadata.
    """
    return _simulation("compare", config)


def cmd_tradeoff(config):
    r"""
    Density bounds over the epsilon list, for the filter's :math:`Q` or the configured ``q_factor`` list.
    """
    d = float(db_to_linear(config.d_db))
    table = ResultTable(TRADEOFF_COLUMNS, metadata=_metadata("tradeoff", config))
    table.metadata["d_db"] = config.d_db

    def fill(scenario, tables):
        qs = config.q_factor or [q_factor(scenario.filter, scenario.m, scenario.params.nu)]
        for eps in config.epsilon:
            for q in qs:
                b = density_bound(eps, d, scenario.policy, scenario.m, scenario.params, q)
                tables[0].add_row(
                    [
                        scenario.label,
                        eps,
                        b.q_factor,
                        b.n_bar_exact,
                        b.n_bar_small_eps,
                        b.rho_exact,
                        b.rho_small_eps,
                    ]
                )

    return _run_scenarios(config, [table], fill)


def cmd_capacity(config):
    r"""
    Outage capacity over the SNR list and the epsilon list.
    """
    table = ResultTable(CAPACITY_COLUMNS, metadata=_metadata("capacity", config))

    def fill(scenario, tables):
        m, params = scenario.m, scenario.params
        shift = None
        if not isinstance(scenario.fading, NoFading):
            shift = FadingShift.for_policy(scenario.fading, scenario.policy, m, params.nu)
        q = q_factor(scenario.filter, m, params.nu)
        for gamma_db in config.gamma_db:
            for eps in config.epsilon:
                c = outage_capacity(
                    float(db_to_linear(gamma_db)),
                    eps,
                    scenario.policy,
                    scenario.density,
                    m,
                    params,
                    shift,
                    q,
                )
                closed = None
                if c.d_eps_closed is not None:
                    closed = float(linear_to_db(c.d_eps_closed))
                tables[0].add_row(
                    [
                        scenario.label,
                        gamma_db,
                        eps,
                        c.d_eps_db,
                        closed,
                        c.capacity,
                        c.capacity_high_sir,
                        c.capacity_low_sir,
                        c.capacity_low_sir_closed,
                    ]
                )

    return _run_scenarios(config, [table], fill)


def cmd_preset(name):
    r"""
    Fully resolved configuration of a built-in preset.
    """
    return preset(name)


COMMANDS = {
    "analytic": cmd_analytic,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "tradeoff": cmd_tradeoff,
    "capacity": cmd_capacity,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dominter",
        description="Interference outage in Poisson fields: closed forms and Monte-Carlo validation.",
    )
    parser.add_argument("--version", action="version", version="%(prog)s " + __version__)
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v for progress, -vv for debug output"
    )

    common = argparse.ArgumentParser(add_help=False)
    source = common.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", metavar="PATH", help="YAML run configuration")
    source.add_argument("--preset", metavar="NAME", help="built-in configuration (fig3, fig4, fig5)")
    common.add_argument("--trials", type=int, metavar="N", help="trials per scenario")
    common.add_argument("--seed", type=int, metavar="U64", help="master seed of every scenario")
    common.add_argument("--workers", type=int, metavar="N", help="simulator worker processes")
    common.add_argument("--grid", metavar="START:STOP:STEP", help="INR grid [dB]")
    common.add_argument("--out", metavar="PATH", help="output table (default: stdout)")
    common.add_argument("--format", choices=("csv", "records"), help="output format")

    sub = parser.add_subparsers(dest="command", required=True)
    for name, func in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=func.__doc__.strip().splitlines()[0])
    p = sub.add_parser("preset", help="print the configuration of a built-in preset")
    p.add_argument("name", help="fig3, fig4 or fig5")
    p.add_argument("--out", metavar="PATH", help="output YAML (default: stdout)")
    return parser


def _configure_logging(verbosity):
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(level=level, format="%(asctime)s %(name)s %(levelname)s: %(message)s")


def _load(args):
    config = load(args.config) if args.config else preset(args.preset)
    return with_overrides(
        config,
        trials=args.trials,
        seed=args.seed,
        workers=args.workers,
        grid=args.grid,
        out=args.out,
        format=args.format,
    )


def suffixed(path, suffix):
    r"""
    ``runs/out.csv`` with suffix ``dominance`` becomes ``runs/out.dominance.csv``.
    """
    stem, ext = os.path.splitext(path)
    return "{:}.{:}{:}".format(stem, suffix, ext)


def _write(tables, config, elapsed):
    for table in tables:
        table.metadata["wall_clock_s"] = elapsed
    if config.output_path is None:
        sys.stdout.write("\n".join(t.dumps(config.output_format) for t in tables))
        return
    tables[0].write(config.output_path, config.output_format)
    for table in tables[1:]:
        table.write(suffixed(config.output_path, table.metadata["command"]), config.output_format)


def main(argv=None):
    r"""
    Entry point of the ``dominter`` executable.

    Returns:
        int: exit code
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if not e.code else EXIT_CONFIG
    _configure_logging(args.verbose)

    if args.command == "preset":
        try:
            text = dump(cmd_preset(args.name))
        except ConfigError as e:
            print("dominter: {:}".format(e), file=sys.stderr)
            return EXIT_CONFIG
        if args.out:
            with open(args.out, "w") as f:
                f.write(text)
        else:
            sys.stdout.write(text)
        return EXIT_OK

    start = time.perf_counter()
    try:
        config = _load(args)
        tables = COMMANDS[args.command](config)
    except Truncated as e:
        logger.error("numeric failure: %s", e.cause)
        print("dominter: numeric failure: {:}".format(e.cause), file=sys.stderr)
        _write(e.tables, config, time.perf_counter() - start)
        return EXIT_NUMERIC
    except ValueError as e:
        print("dominter: {:}".format(e), file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC_ERRORS as e:
        print("dominter: numeric failure: {:}".format(e), file=sys.stderr)
        return EXIT_NUMERIC

    elapsed = time.perf_counter() - start
    logger.info("%s finished in %.1f s", args.command, elapsed)
    _write(tables, config, elapsed)
    return EXIT_OK
