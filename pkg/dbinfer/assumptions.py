"""NURVA, SUTVA and the regularity diagnostics behind consistency.

Both assumptions are decided by the same scan. For every unit and exposure label, the outcomes
of all assignments giving the unit that label must be equal. NURVA scans the design support;
SUTVA scans an explicit design space and never assumes the two coincide.

Counterexamples are deterministic: units ascending, labels descending, then the smallest
assignment of the cell against the smallest assignment whose outcome differs from it.

Examples
--------

    >>> design, space, mapping, schedule = dbinfer.corpus.load_corpus('household')
    >>> check_nurva(design, mapping, schedule).holds
    True
    >>> verdict = check_sutva(space, mapping, schedule)
    >>> verdict.holds, verdict.counterexample.z, verdict.counterexample.z_prime
    (False, (1, 0), (1, 1))
"""
import logging

import munch
import numpy

import dbinfer

logger = logging.getLogger(__name__)

Fraction = dbinfer.Fraction


def _lexicographic(vectors):
    return numpy.lexsort(vectors.T[::-1]) if len(vectors) else numpy.arange(0)


def _differs(values, reference, tolerance):
    if tolerance:
        return numpy.array([abs(value - reference) > tolerance for value in values], dtype=bool)
    return numpy.array([value != reference for value in values], dtype=bool)


def _scan(vectors, exposures, outcomes, labels, tolerance):
    """The first counterexample in unit, label and assignment order, or ``None``."""
    order = _lexicographic(vectors)
    vectors, exposures, outcomes = vectors[order], exposures[order], outcomes[order]
    for i in range(vectors.shape[1]):
        present = set(exposures[:, i].tolist())
        if labels is not None:
            present &= set(labels)
        for d in sorted(present, reverse=True):
            rows = numpy.nonzero(exposures[:, i] == d)[0]
            values = outcomes[rows, i]
            different = _differs(values, values[0], tolerance)
            if different.any():
                other = rows[numpy.argmax(different)]
                return munch.Munch(
                    unit=i,
                    label=d,
                    z=dbinfer.as_assignment(vectors[rows[0]]),
                    z_prime=dbinfer.as_assignment(vectors[other]),
                    y=values[0],
                    y_prime=outcomes[other, i],
                )
    return None


def _tolerance(tolerance):
    return dbinfer.config.settings.tolerance if tolerance is None else tolerance


def _verdict(assumption, scope, counterexample, tolerance, labels, checked, **extra):
    verdict = munch.Munch(
        assumption=assumption,
        holds=counterexample is None,
        scope=scope,
        counterexample=counterexample,
        tolerance=tolerance,
        labels=None if labels is None else sorted(labels),
        checked=checked,
        **extra,
    )
    if not verdict.holds:
        logger.warning(
            "%s fails for unit %d between %s and %s",
            assumption,
            counterexample.unit,
            counterexample.z,
            counterexample.z_prime,
        )
    return verdict


def check_nurva(design, mapping, schedule, labels=None, tolerance=None) -> munch.Munch:
    """Whether outcomes are constant within every unit and exposure cell of the support.

Parameters
----------
labels : sequence, optional
    Restrict the scan to these exposure cells.
tolerance : number, optional
    Largest difference still treated as equal; defaults to ``settings.tolerance``.

Examples
--------

    >>> instance = dbinfer.corpus.load_corpus('household-alt2')
    >>> verdict = check_nurva(instance.design, instance.mapping, instance.schedule)
    >>> verdict.counterexample.unit, verdict.counterexample.z, verdict.counterexample.z_prime
    (0, (1, 0), (1, 1))
    """
    vectors, _ = design.support
    tolerance = _tolerance(tolerance)
    counterexample = _scan(
        vectors, mapping.apply_batch(vectors), schedule.evaluate_batch(vectors), labels, tolerance
    )
    return _verdict("NURVA", "support", counterexample, tolerance, labels, len(vectors))


def check_sutva(space, mapping, schedule, labels=None, tolerance=None) -> munch.Munch:
    """Whether outcomes are constant within every cell across the whole design space.

Assignments of the space where the mapping is undefined are reported as ``gaps`` and left out
of the scan.

Raises
------
dbinfer.OutcomeError
    The schedule is not defined on the full design space.
    """
    if space is None:
        raise dbinfer.ValidationError("a SUTVA check needs an explicit design space")
    vectors = space.vectors()
    defined = mapping.defined_batch(vectors)
    gaps = [dbinfer.as_assignment(z) for z in vectors[~defined]]
    if gaps:
        logger.info("the %s mapping is undefined at %d assignments of the space", mapping.kind, len(gaps))
    vectors = vectors[defined]
    tolerance = _tolerance(tolerance)
    counterexample = _scan(
        vectors, mapping.apply_batch(vectors), schedule.evaluate_batch(vectors), labels, tolerance
    )
    return _verdict("SUTVA", "design-space", counterexample, tolerance, labels, len(vectors), gaps=gaps)


def verify_counterexample(mapping, schedule, counterexample, tolerance=0) -> bool:
    """Re-evaluate a counterexample: equal exposures and different outcomes."""
    i = counterexample.unit
    same = dbinfer.exposure.apply_exposure(mapping, counterexample.z)[i] == dbinfer.exposure.apply_exposure(
        mapping, counterexample.z_prime
    )[i]
    y, y_prime = schedule.evaluate(counterexample.z)[i], schedule.evaluate(counterexample.z_prime)[i]
    return bool(same and abs(y - y_prime) > tolerance)


def _largest_reweighted(design, mapping, schedule, d, pi):
    largest = numpy.zeros(design.N, dtype=object)
    for vectors, _ in design.chunks():
        cells = mapping.apply_batch(vectors) == d
        outcomes = numpy.abs(schedule.evaluate_batch(vectors))
        values = numpy.where(cells, outcomes, 0)
        largest = numpy.maximum(largest, values.max(axis=0))
    return max((largest[i] / pi[i] for i in range(design.N)), default=Fraction(0))


def regularity_diagnostics(design, mapping, schedule, d, probs=None, epos=None) -> munch.Munch:
    """Bounded variation, restricted dependence and their interaction for label ``d``.

``c_N`` is the largest revealable outcome magnitude reweighted by ``1 / pi_i(d)``; ``b_N`` sums
``|pi_ij(d) - pi_i(d) pi_j(d)|`` over all pairs.

Parameters
----------
probs : dbinfer.estimands.ExposureProbabilities, optional
    Precomputed probabilities of ``d``.
epos : array, optional
    Unit EPOs standing in for the support scan when the design cannot be enumerated and NURVA
    holds.

Examples
--------

    >>> design, space, mapping, schedule = dbinfer.corpus.load_corpus('household')
    >>> diagnostics = regularity_diagnostics(design, mapping, schedule, 1)
    >>> diagnostics.c_N, diagnostics.b_N
    (Fraction(0, 1), Fraction(1, 1))
    """
    if probs is None:
        probs = dbinfer.estimands.exposure_probabilities(design, mapping, d)
    positivity = dbinfer.estimands.check_positivity(probs, d)
    if not positivity.holds:
        raise dbinfer.PositivityError(f"positivity fails for label {d}", units=positivity.units)
    pi, joint = probs.pi(d), probs.pi_joint(d)
    if design.enumerable and epos is None:
        c = _largest_reweighted(design, mapping, schedule, d, pi)
    elif epos is not None:
        c = max(abs(value) / p for value, p in zip(list(epos), pi.tolist()))
    else:
        design.require_enumerable()
    b = numpy.abs(joint - numpy.outer(pi, pi)).sum()
    N = probs.N
    return munch.Munch(
        N=N,
        label=d,
        c_N=c,
        b_N=b,
        interaction=b * c,
        c_ratio=c / N,
        b_ratio=b / N ** 2,
        interaction_ratio=b * c / N ** 2,
    )
