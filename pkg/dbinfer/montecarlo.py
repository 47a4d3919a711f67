"""Monte Carlo replications, exact expectations, consistency sweeps and coverage studies.

Replication ``r`` draws its assignment from ``SeedSequence(seed, spawn_key=(r,))``, and batches of
replications are evaluated in fixed blocks, so summaries depend on the seed alone and never on
the number of threads.

Examples
--------

    >>> design, space, mapping, schedule = dbinfer.corpus.load_corpus('household')
    >>> config = EstimatorConfig.parse('aepo:0')
    >>> exact_expectation(design, mapping, schedule, config)
    Fraction(1, 1)
    >>> summary = replicate(design, mapping, schedule, config, R=200, seed=1)
    >>> summary.mean, summary.truth
    (1.0, 1.0)
"""
import concurrent.futures
import dataclasses
import logging
import math
import time
import typing

import munch
import numpy
import scipy.stats

import dbinfer

logger = logging.getLogger(__name__)

Fraction = dbinfer.Fraction

BLOCK = 250
EXACT_LIMIT = 4096
TARGETS = ("aepo", "aeed")
STATISTICS = ("point", "conservative", "ht_variance", "regression")
POINT_STATISTICS = ("point", "regression")

SWEEP_CAVEAT = (
    "a shrinking bias and RMSE along finite N is evidence for the limit, not proof; the limit "
    "concerns a sequence of populations and designs while every row above is one finite population"
)


@dataclasses.dataclass(frozen=True)
class EstimatorConfig:
    """What a replication computes.

Parameters
----------
target : str
    ``aepo`` with one label or ``aeed`` with two.
statistic : str
    ``point``, ``conservative``, ``ht_variance`` or ``regression``.
X, f, beta
    Covariates, ``PredictionFunction`` and fixed parameters of the regression statistic.
    """

    target: str = "aepo"
    labels: tuple = (1,)
    statistic: str = "point"
    level: float = 0.95
    X: typing.Any = None
    f: typing.Any = None
    beta: typing.Any = None

    def __post_init__(self):
        if self.target not in TARGETS:
            raise dbinfer.ValidationError(f"unknown target {self.target!r}")
        if self.statistic not in STATISTICS:
            raise dbinfer.ValidationError(f"unknown statistic {self.statistic!r}")
        expected = 1 if self.target == "aepo" else 2
        if len(self.labels) != expected:
            raise dbinfer.ValidationError(f"{self.target} takes {expected} labels, got {self.labels}")
        if self.target == "aeed" and self.labels[0] == self.labels[1]:
            raise dbinfer.ValidationError("an aeed between identical labels is identically zero")
        if self.statistic == "regression" and self.f is None:
            raise dbinfer.ValidationError("the regression statistic needs a prediction function")

    @classmethod
    def parse(cls, text, **kwargs) -> "EstimatorConfig":
        """Read ``aepo:1`` or ``aeed:1,0``.

        >>> EstimatorConfig.parse('aeed:1,0').labels
        (1, 0)
        """
        target, _, labels = str(text).partition(":")
        if not labels:
            raise dbinfer.ValidationError(f"expected target:labels, got {text!r}")
        return cls(target=target.strip().lower(), labels=tuple(int(x) for x in labels.split(",")), **kwargs)

    @property
    def name(self) -> str:
        return f"{self.target}({','.join(map(str, self.labels))})"


def _kernel(config, probs):
    kernel = dbinfer.estimation.VarianceKernel.build(probs, *config.labels)
    if config.statistic == "ht_variance" and kernel.refused:
        raise dbinfer.RefusalError(
            f"{config.name} has {len(kernel.zero_pairs)} pairs with zero joint probability",
            pairs=kernel.zero_pairs,
        )
    return kernel


def _predictions(config, probs):
    if config.statistic != "regression":
        return None
    X = numpy.zeros((probs.N, 1), dtype=int) if config.X is None else config.X
    return dbinfer.estimation.predictions(probs, config.labels, X, config.f, config.beta)


def _statistics(config, kernel, predictions, Y, D) -> munch.Munch:
    """Statistic, point and conservative variance for every row of a batch."""
    revealed, indicators = kernel.stack(Y, D)
    quadratic = kernel.quadratic(revealed)
    conservative = quadratic + kernel.young_terms(revealed)
    if config.statistic == "regression":
        point = kernel.point(revealed - predictions * indicators) + (kernel.signs * predictions).sum() / kernel.N
    else:
        point = kernel.point(revealed)
    value = {"point": point, "regression": point, "conservative": conservative, "ht_variance": quadratic}
    return munch.Munch(value=value[config.statistic], point=point, conservative=conservative)


def estimand_value(design, mapping, schedule, config: EstimatorConfig):
    """The exact estimand a configuration targets; requires an enumerable design."""
    if config.target == "aepo":
        return dbinfer.estimands.aepo(design, mapping, schedule, config.labels[0])
    return dbinfer.estimands.aeed(design, mapping, schedule, *config.labels)


def exact_expectation(design, mapping, schedule, config: EstimatorConfig, probs=None):
    """The expectation of the statistic over the design, summed exactly over the support."""
    design.require_enumerable()
    if probs is None:
        probs = dbinfer.estimands.exposure_probabilities(design, mapping, config.labels)
    kernel, predictions = _kernel(config, probs), _predictions(config, probs)
    total = Fraction(0) if probs.exact else 0.0
    for vectors, masses in design.chunks():
        values = _statistics(
            config, kernel, predictions, schedule.evaluate_batch(vectors), mapping.apply_batch(vectors)
        ).value
        if not probs.exact:
            masses = masses.astype(float)
        total += (masses * values).sum()
    return total


def draw(design, seed, start, stop) -> numpy.ndarray:
    """The assignments of replications ``start`` to ``stop``."""
    return numpy.stack(
        [
            dbinfer.design.sample_assignments(design, numpy.random.SeedSequence(seed, spawn_key=(r,)), 1)[0]
            for r in range(start, stop)
        ]
    )


def _blocks(R):
    return [(start, min(start + BLOCK, R)) for start in range(0, R, BLOCK)]


def replicate(
    design, mapping, schedule, config: EstimatorConfig, R, seed, probs=None, truth=None, threads=None, exact=None
) -> munch.Munch:
    """Summarize ``R`` draws of the statistic.

Parameters
----------
probs : dbinfer.estimands.ExposureProbabilities, optional
    Computed with ``method="auto"`` when omitted.
truth : number, optional
    The estimand, required for bias and coverage when the design cannot be enumerated.
threads : int, optional
    Worker threads; defaults to ``settings.threads``. Results do not depend on it.
exact : bool, optional
    Sum the exact expectation of the statistic over the support; by default only for supports
    of at most ``EXACT_LIMIT`` assignments.

Returns
-------
munch.Munch
    ``mean``, ``variance`` (``None`` when ``R = 1``), ``standard_error``, ``expected`` (the exact
    expectation when enumerable), ``truth``, ``bias``, ``rmse`` and ``coverage``.
    """
    if int(R) < 1:
        raise dbinfer.ValidationError(f"R={R} must be a positive number of replications")
    R, started = int(R), time.perf_counter()
    if probs is None:
        probs = dbinfer.estimands.exposure_probabilities(design, mapping, config.labels)
    expected = None
    if exact is None:
        exact = design.enumerable and design.size <= EXACT_LIMIT
    if exact:
        expected = exact_expectation(design, mapping, schedule, config, probs=probs)
    if truth is None and design.enumerable:
        truth = estimand_value(design, mapping, schedule, config)
    fast = probs.to_float()
    kernel, predictions = _kernel(config, fast), _predictions(config, fast)
    rows = schedule.to_float()

    def block(bounds):
        Z = draw(design, seed, *bounds)
        return _statistics(config, kernel, predictions, rows.evaluate_batch(Z), mapping.apply_batch(Z))

    threads = threads or dbinfer.config.settings.threads
    with concurrent.futures.ThreadPoolExecutor(max_workers=max(1, int(threads))) as executor:
        results = list(executor.map(block, _blocks(R)))
    values = numpy.concatenate([result.value for result in results]).astype(float)
    points = numpy.concatenate([result.point for result in results]).astype(float)
    variances = numpy.concatenate([result.conservative for result in results]).astype(float)

    mean = float(values.mean())
    variance = float(values.var(ddof=1)) if R > 1 else None
    summary = munch.Munch(
        target=config.name,
        statistic=config.statistic,
        R=R,
        seed=seed,
        mean=mean,
        variance=variance,
        variance_defined=variance is not None,
        standard_error=None if variance is None else math.sqrt(variance / R),
        expected=expected,
        truth=None if truth is None else float(truth),
        bias=None,
        rmse=None,
        coverage=None,
        level=config.level,
        provenance=probs.provenance.kind,
    )
    if config.statistic in POINT_STATISTICS and truth is not None:
        summary.bias = mean - float(truth)
        summary.rmse = float(numpy.sqrt(numpy.mean((values - float(truth)) ** 2)))
        half = float(scipy.stats.norm.ppf(0.5 + config.level / 2)) * numpy.sqrt(numpy.maximum(variances, 0))
        summary.coverage = float(numpy.mean(numpy.abs(points - float(truth)) <= half))
    elif expected is not None:
        summary.bias = mean - float(expected)
    logger.info("%d replications of %s %s in %.3fs", R, config.name, config.statistic, time.perf_counter() - started)
    return summary


def consistency_sweep(population, sizes, config: EstimatorConfig, R, seed, threads=None) -> munch.Munch:
    """Bias, RMSE and the regularity diagnostics of a generated population at every size.

    >>> sweep = consistency_sweep('partial-interference', (4, 8), EstimatorConfig.parse('aepo:1'), R=50, seed=0)
    >>> [row.N for row in sweep.rows]
    [4, 8]
    """
    rows = []
    for N in sorted(int(N) for N in sizes):
        try:
            generated = dbinfer.generators.make_population(population, N, seed)
        except dbinfer.ValidationError as error:
            raise dbinfer.ValidationError(f"the {population} generator fails at N={N}: {error}") from error
        probs = dbinfer.estimands.exposure_probabilities(generated.design, generated.mapping, config.labels)
        target = (
            generated.truth[config.labels[0]]
            if config.target == "aepo"
            else generated.truth[config.labels[0]] - generated.truth[config.labels[1]]
        )
        d = config.labels[0]
        diagnostics = dbinfer.assumptions.regularity_diagnostics(
            generated.design, generated.mapping, generated.schedule, d, probs=probs, epos=generated.epos[d]
        )
        summary = replicate(
            generated.design,
            generated.mapping,
            generated.schedule,
            config,
            R,
            seed,
            probs=probs,
            truth=target,
            threads=threads,
        )
        rows.append(
            munch.Munch(
                N=N,
                truth=summary.truth,
                mean=summary.mean,
                bias=summary.bias,
                rmse=summary.rmse,
                coverage=summary.coverage,
                b_N=diagnostics.b_N,
                c_N=diagnostics.c_N,
                interaction_ratio=diagnostics.interaction_ratio,
            )
        )
    return munch.Munch(
        population=population, target=config.name, statistic=config.statistic, R=int(R), seed=seed,
        rows=rows, caveat=SWEEP_CAVEAT,
    )


def coverage_study(design, mapping, schedule, labels, R, seed, level=0.95, truth=None, probs=None, threads=None):
    """The share of replications whose Wald interval with the conservative variance covers the truth.

``labels`` is one label for an AEPO or a pair for an AEED.
    """
    labels = tuple(labels) if isinstance(labels, (tuple, list)) else (labels,)
    config = EstimatorConfig(target="aepo" if len(labels) == 1 else "aeed", labels=labels, level=level)
    if truth is None:
        truth = estimand_value(design, mapping, schedule, config)
    summary = replicate(design, mapping, schedule, config, R, seed, probs=probs, truth=truth, threads=threads)
    return munch.Munch(
        target=config.name, coverage=summary.coverage, level=level, R=summary.R, seed=seed,
        truth=summary.truth, mean=summary.mean, bias=summary.bias,
    )
