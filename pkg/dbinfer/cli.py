"""The ``dbinfer`` command line.

Subcommands load a corpus instance or a design, mapping and schedule file triple, run one
analysis and write its report as JSON (exact rationals) or CSV (decimals) to ``--output`` or
standard output.

Exit codes: 0 success, 1 input error, 2 positivity failure, 3 assumption failure.
"""
import argparse
import logging
import pathlib
import sys

import anyconfig
import munch

import dbinfer

logger = logging.getLogger(__name__)

OK, INPUT_ERROR, POSITIVITY_FAILURE, ASSUMPTION_FAILURE = 0, 1, 2, 3

SUMMARY_COLUMNS = """\
simulate columns: target, statistic, R, seed, mean, variance (empty when R = 1), standard_error,
expected (exact expectation of the statistic when the support is small enough), truth, bias,
rmse, coverage, level, provenance. Sweep rows: N, truth, mean, bias, rmse, coverage, b_N, c_N,
interaction_ratio."""

UNIT_NUMBERING = "Units are numbered from 0 in every report: unit 0 is the first unit of the population."


def _labels(values):
    return [int(x) for value in values or () for x in str(value).split(",")]


def _pair(value):
    labels = _labels([value])
    if len(labels) != 2:
        raise argparse.ArgumentTypeError(f"expected two labels d,d', got {value!r}")
    return tuple(labels)


def _sizes(value):
    return [int(x) for x in value.split(",")]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise dbinfer.ValidationError(f"{self.prog}: {message}")


def parser() -> argparse.ArgumentParser:
    shared = _Parser(add_help=False)
    inputs = shared.add_argument_group("inputs")
    inputs.add_argument("--corpus", help=f"a built in instance: {', '.join(dbinfer.corpus.names())}")
    inputs.add_argument("--design", help="design JSON file")
    inputs.add_argument("--mapping", help="exposure mapping JSON file")
    inputs.add_argument("--schedule", help="outcome schedule JSON file")
    inputs.add_argument("--space", help="design space JSON file, for SUTVA checks")
    shared.add_argument("--output", "-o", help="write the report here instead of standard output")
    shared.add_argument("--format", choices=("json", "csv"), default=None)
    shared.add_argument("--config", action="append", default=[], help="settings file, repeatable")
    shared.add_argument("--threads", type=int, help="replication threads, default all cores")
    shared.add_argument("--cap", type=int, help=f"enumeration cap; {dbinfer.config.CAP_VARIABLE} wins")
    shared.add_argument("--verbose", "-v", action="count", default=0)

    root = _Parser(prog="dbinfer", description=dbinfer.__doc__.splitlines()[0], epilog=UNIT_NUMBERING)
    commands = root.add_subparsers(dest="command", required=True)

    estimands = commands.add_parser(
        "estimands", parents=[shared], help="EPOs, AEPOs, EEDs and AEEDs", epilog=UNIT_NUMBERING
    )
    estimands.add_argument("--label", action="append", help="exposure labels, comma separated")
    estimands.add_argument("--contrast", action="append", type=_pair, default=[], help="d,d'")
    estimands.add_argument("--trim", action="store_true", help="trim contrasts failing positivity")

    check = commands.add_parser(
        "check", parents=[shared], help="NURVA and SUTVA verdicts", epilog=UNIT_NUMBERING
    )
    check.add_argument("--label", action="append", help="restrict the scan to these labels")
    check.add_argument("--tolerance", type=float)

    estimate = commands.add_parser("estimate", parents=[shared], help="Horvitz-Thompson estimates")
    realized = estimate.add_mutually_exclusive_group(required=True)
    realized.add_argument("--data", help="realized data JSON file with z and y")
    realized.add_argument("--draw", type=int, metavar="SEED", help="draw z from the design")
    estimate.add_argument("--target", default="aepo:1", help="aepo:d or aeed:d,d'")
    estimate.add_argument("--level", type=float, default=0.95)
    estimate.add_argument("--monte-carlo", action="store_true", help="estimate the probabilities by sampling")
    estimate.add_argument("--R", type=int, default=10000)
    estimate.add_argument("--seed", type=int, default=0)

    simulate = commands.add_parser(
        "simulate",
        parents=[shared],
        help="replications, exact expectations, sweeps and coverage",
        epilog=f"{SUMMARY_COLUMNS}\n\n{UNIT_NUMBERING}",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    simulate.add_argument("--target", default="aepo:1", help="aepo:d or aeed:d,d'")
    simulate.add_argument("--statistic", choices=dbinfer.montecarlo.STATISTICS, default="point")
    simulate.add_argument("--exact", action="store_true", help="only the exact expectation and its bias")
    simulate.add_argument("--R", type=int, default=1000)
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--level", type=float, default=0.95)
    simulate.add_argument("--sweep", metavar="POPULATION", help="partial-interference or no-interference")
    simulate.add_argument("--sizes", type=_sizes, default=[20, 80, 320])
    simulate.add_argument("--coverage", action="store_true", help="coverage of the Wald interval")
    simulate.add_argument("--plot-data", metavar="FILE", help="also write tidy CSV rows here")

    probabilities = commands.add_parser(
        "probabilities", parents=[shared], help="exposure probabilities", epilog=UNIT_NUMBERING
    )
    probabilities.add_argument("--label", action="append", help="exposure labels, comma separated")
    probabilities.add_argument("--monte-carlo", action="store_true")
    probabilities.add_argument("--R", type=int, default=10000)
    probabilities.add_argument("--seed", type=int, default=0)
    return root


def _run_document(args) -> dict:
    document = {
        key: getattr(args, key, None)
        for key in (
            "command", "corpus", "design", "mapping", "schedule", "space", "output", "format",
            "R", "seed", "level", "threads", "sweep",
        )
    }
    return {key: value for key, value in document.items() if value is not None}


def _load(path) -> dict:
    path = pathlib.Path(path)
    if not path.is_file():
        raise dbinfer.ValidationError(f"no such file: {path}")
    return dict(anyconfig.load(str(path), ac_parser="json"))


def load_instance(args) -> dbinfer.corpus.Instance:
    """The corpus instance or file triple named on the command line."""
    if args.corpus:
        return dbinfer.corpus.load_corpus(args.corpus)
    if getattr(args, "sweep", None):
        raise dbinfer.ValidationError("--sweep runs on a generated population, not on an instance")
    return dbinfer.corpus.Instance(
        dbinfer.design.design_from_document(_load(args.design)),
        dbinfer.design.space_from_document(_load(args.space)) if args.space else None,
        dbinfer.exposure.mapping_from_document(_load(args.mapping)),
        dbinfer.outcomes.schedule_from_document(_load(args.schedule)),
    )


def cmd_estimands(args):
    instance = load_instance(args)
    labels = _labels(args.label) or None
    report = dbinfer.estimands.estimand_report(
        instance.design, instance.mapping, instance.schedule, labels, args.contrast, trim=args.trim
    )
    failed = not all(status.holds for status in report.positivity.values()) or any(
        row.aeed is None for row in report.contrasts
    )
    return report, POSITIVITY_FAILURE if failed else OK


def cmd_check(args):
    instance = load_instance(args)
    labels = _labels(args.label) or None
    nurva = dbinfer.assumptions.check_nurva(
        instance.design, instance.mapping, instance.schedule, labels, args.tolerance
    )
    sutva = None
    if instance.space is not None:
        sutva = dbinfer.assumptions.check_sutva(
            instance.space, instance.mapping, instance.schedule, labels, args.tolerance
        )
    else:
        logger.warning("no design space given, SUTVA is not checked")
    report = munch.Munch(design=instance.design.label, nurva=nurva, sutva=sutva)
    holds = nurva.holds and (sutva is None or sutva.holds)
    return report, OK if holds else ASSUMPTION_FAILURE


def cmd_estimate(args):
    instance = load_instance(args)
    config = dbinfer.montecarlo.EstimatorConfig.parse(args.target, level=args.level)
    if args.data:
        data = _load(args.data)
        dbinfer.manager.hook.validate_document(document=data, schema=dbinfer.schema.DATA)
        z = dbinfer.as_assignment(data["z"])
        y = dbinfer.exact_array(data["y"])
        if len(z) != instance.design.N or len(y) != instance.design.N:
            raise dbinfer.ValidationError(f"realized data must have {instance.design.N} units")
        dvec = dbinfer.exposure.apply_exposure(instance.mapping, z)
    else:
        observed = dbinfer.outcomes.observe(
            instance.schedule, instance.mapping, dbinfer.design.sample_assignment(instance.design, args.draw)
        )
        z, y, dvec = observed.z, observed.y, observed.d
    probs = dbinfer.estimands.exposure_probabilities(
        instance.design,
        instance.mapping,
        config.labels,
        method=dbinfer.estimands.MONTE_CARLO if args.monte_carlo else "auto",
        R=args.R if args.monte_carlo else None,
        seed=args.seed,
    )
    if config.target == "aepo":
        report = dbinfer.estimation.aepo_estimate_with_variance(y, dvec, probs, *config.labels, level=args.level)
    else:
        report = dbinfer.estimation.aeed_estimate_with_variance(y, dvec, probs, *config.labels, level=args.level)
    report.data = munch.Munch(z=list(z), y=list(y), d=list(dvec))
    return report, OK


def cmd_simulate(args):
    config = dbinfer.montecarlo.EstimatorConfig.parse(args.target, statistic=args.statistic, level=args.level)
    if args.sweep:
        return (
            dbinfer.montecarlo.consistency_sweep(args.sweep, args.sizes, config, args.R, args.seed, args.threads),
            OK,
        )
    instance = load_instance(args)
    design, mapping, schedule = instance.design, instance.mapping, instance.schedule
    if args.exact:
        expected = dbinfer.montecarlo.exact_expectation(design, mapping, schedule, config)
        truth = dbinfer.montecarlo.estimand_value(design, mapping, schedule, config)
        report = munch.Munch(target=config.name, statistic=config.statistic, expected=expected, truth=truth)
        if config.statistic in dbinfer.montecarlo.POINT_STATISTICS:
            report.bias = expected - truth
        return report, OK
    if args.coverage:
        report = dbinfer.montecarlo.coverage_study(
            design, mapping, schedule, config.labels, args.R, args.seed, level=args.level, threads=args.threads
        )
        return report, OK
    return dbinfer.montecarlo.replicate(design, mapping, schedule, config, args.R, args.seed, threads=args.threads), OK


def cmd_probabilities(args):
    instance = load_instance(args)
    labels = _labels(args.label) or instance.mapping.codes
    probs = dbinfer.estimands.exposure_probabilities(
        instance.design,
        instance.mapping,
        labels,
        method=dbinfer.estimands.MONTE_CARLO if args.monte_carlo else "auto",
        R=args.R if args.monte_carlo else None,
        seed=args.seed,
    )
    return dbinfer.reports.probabilities_document(probs), OK


COMMANDS = {
    "estimands": cmd_estimands,
    "check": cmd_check,
    "estimate": cmd_estimate,
    "simulate": cmd_simulate,
    "probabilities": cmd_probabilities,
}


def _emit(report, args):
    format = args.format or ("csv" if args.output and args.output.endswith(".csv") else "json")
    if args.output:
        dbinfer.reports.write(report, args.output, format)
    else:
        sys.stdout.write(dbinfer.reports.dumps(report, format).rstrip("\n") + "\n")
    if getattr(args, "plot_data", None):
        dbinfer.reports.write(report, args.plot_data, "csv")


def _configure(args):
    settings = dbinfer.config.settings
    if args.config:
        settings.update(dbinfer.config.load_config(*args.config))
    if args.threads:
        settings.threads = args.threads
    if args.cap:
        settings.cap = args.cap


def main(argv=None) -> int:
    try:
        args = parser().parse_args(argv)
    except dbinfer.ValidationError as error:
        logging.getLogger().error("%s", error.message)
        return INPUT_ERROR
    logging.basicConfig(
        level=[logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)],
        format="%(levelname)s %(name)s: %(message)s",
    )
    previous = dict(dbinfer.config.settings)
    try:
        _configure(args)
        dbinfer.manager.hook.validate_document(document=_run_document(args), schema=dbinfer.schema.RUN)
        report, code = COMMANDS[args.command](args)
        _emit(report, args)
        return code
    except dbinfer.PositivityError as error:
        logger.error("positivity fails at units %s: %s", list(error.units), error.message)
        return POSITIVITY_FAILURE
    except dbinfer.AssumptionError as error:
        logger.error("%s", error.message)
        return ASSUMPTION_FAILURE
    except dbinfer.ValidationError as error:
        logger.error("%s", error.message)
        return INPUT_ERROR
    except (OSError, ValueError) as error:
        logger.error("%s", error)
        return INPUT_ERROR
    finally:
        dbinfer.config.settings.update(previous)
