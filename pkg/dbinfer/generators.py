"""Synthetic populations for consistency sweeps and coverage studies.

Each population supplies its design, mapping and schedule together with the analytic truth, so
sweeps stay exact about their target even when the design is far too large to enumerate.

Examples
--------

    >>> population = make_population('partial-interference', 8, seed=0)
    >>> population.design.kind, population.design.size
    ('cluster', 6)
    >>> check = dbinfer.assumptions.check_nurva(population.design, population.mapping, population.schedule)
    >>> check.holds
    True
"""
import logging
import typing

import numpy

import dbinfer

logger = logging.getLogger(__name__)

Fraction = dbinfer.Fraction


class Population(typing.NamedTuple):
    design: "dbinfer.design.Design"
    mapping: "dbinfer.exposure.ExposureMapping"
    schedule: "dbinfer.outcomes.OutcomeSchedule"
    epos: dict
    truth: dict


def _population(design, mapping, schedule, epos):
    epos = {d: dbinfer.exact_array(values) for d, values in epos.items()}
    truth = {d: sum(values.tolist(), Fraction(0)) / len(values) for d, values in epos.items()}
    return Population(design, mapping, schedule, epos, truth)


def partial_interference(N, seed, size=2, effect=1):
    """Clusters of ``size`` units, half of the clusters treated as wholes.

Every unit gains ``effect`` per treated member of its cluster, so a treated unit's EPO is its
baseline plus ``effect * size``.
    """
    if N % size or N // size < 2:
        raise dbinfer.DesignError(f"N={N} must split into at least two clusters of {size}")
    rng = numpy.random.default_rng(seed)
    baseline = rng.integers(0, 10, N)
    clusters = numpy.arange(N) // size
    design = dbinfer.design.make_cluster_randomization(
        clusters, N // size // 2, label=f"partial-interference({N})"
    )
    schedule = dbinfer.outcomes.make_rule_schedule(
        "partial-interference",
        {"clusters": clusters.tolist(), "baseline": baseline.tolist(), "effect": effect},
        N=N,
    )
    mapping = dbinfer.exposure.make_individualistic_mapping(N)
    return _population(design, mapping, schedule, {0: baseline, 1: baseline + effect * size})


def no_interference(N, seed):
    """Bernoulli(1/2) assignment with heterogeneous baselines and effects."""
    rng = numpy.random.default_rng(seed)
    baseline, effect = rng.integers(0, 10, N), rng.integers(0, 5, N)
    design = dbinfer.design.make_bernoulli_design(N, Fraction(1, 2), label=f"no-interference({N})")
    schedule = dbinfer.outcomes.make_rule_schedule(
        "no-interference", {"baseline": baseline.tolist(), "effect": effect.tolist()}, N=N
    )
    mapping = dbinfer.exposure.make_individualistic_mapping(N)
    return _population(design, mapping, schedule, {0: baseline, 1: baseline + effect})


POPULATIONS = {"partial-interference": partial_interference, "no-interference": no_interference}


class _Implementation:
    """Built in populations for the make_population hook."""

    @dbinfer.implementation
    def make_population(name, N, seed):
        if name in POPULATIONS:
            return POPULATIONS[name](N, seed)


dbinfer.manager.register(_Implementation, name=__name__)


def make_population(name, N, seed=0) -> Population:
    population = dbinfer.manager.hook.make_population(name=name, N=int(N), seed=seed)
    if population is None:
        raise dbinfer.ValidationError(f"unknown population {name!r}; choose from {', '.join(POPULATIONS)}")
    logger.debug("generated %s population with N=%d", name, N)
    return Population(*population)
