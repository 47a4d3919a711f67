"""Horvitz-Thompson estimation of AEPOs and AEEDs from one realization.

Estimators consume precomputed ``ExposureProbabilities`` rather than designs, so exact,
analytic and Monte Carlo probabilities share one code path.

Variances are quadratic forms over stacked unit-label pairs. An AEPO stacks ``(i, d)`` for every
unit; an AEED stacks ``(i, d)`` with sign ``+1`` and ``(i, d')`` with sign ``-1``. Pairs with a
positive joint probability enter through plug-in weights. Pairs that are never observed together
are bounded with Young's inequality, which turns each into squared outcome terms of its members.
The pairs ``(i, d), (i, d')`` of an AEED are never jointly observed, so the AEED bound always
carries such terms.

Examples
--------

    >>> design, space, mapping, schedule = dbinfer.corpus.load_corpus('household')
    >>> probs = dbinfer.estimands.exposure_probabilities(design, mapping, (0, 1))
    >>> data = dbinfer.outcomes.observe(schedule, mapping, (1, 0))
    >>> ht_estimate(data.y, data.d, probs, 0), conservative_variance_estimate(data.y, data.d, probs, 0)
    (Fraction(1, 1), Fraction(1, 1))
"""
import dataclasses
import logging
import math
import typing

import munch
import numpy
import scipy.stats

import dbinfer

logger = logging.getLogger(__name__)

Fraction = dbinfer.Fraction

YOUNG_NOTE = (
    "pairs never jointly observed, including each unit's own pair of contrasted labels, are "
    "bounded by Young's inequality; cross-label pairs of distinct units with positive joint "
    "probability use plug-in terms"
)


@dataclasses.dataclass(frozen=True)
class VarianceKernel:
    """Plug-in weights and Young counts for a target, computed once per probability table.

Parameters
----------
labels : tuple
    ``(d,)`` for an AEPO, ``(d, d')`` for an AEED.
signs, pi : numpy.ndarray
    Sign and probability of every stacked unit-label pair.
weights : numpy.ndarray
    ``(pi_uv - pi_u pi_v) / (pi_u pi_v pi_uv)`` where ``pi_uv > 0`` and zero elsewhere.
young : numpy.ndarray
    The number of partners ``v`` with ``pi_uv = 0`` of every pair ``u``.
    """

    N: int
    labels: tuple
    units: tuple
    population: int
    signs: numpy.ndarray
    pi: numpy.ndarray
    weights: numpy.ndarray
    young: numpy.ndarray
    zero_pairs: tuple
    provenance: munch.Munch

    @classmethod
    def build(cls, probs, d, d_prime=None) -> "VarianceKernel":
        labels = (d,) if d_prime is None else (d, d_prime)
        for label in labels:
            status = dbinfer.estimands.check_positivity(probs, label)
            if not status.holds:
                raise dbinfer.PositivityError(
                    f"positivity fails for label {label} at units {status.units}", units=status.units
                )
        pi = numpy.concatenate([probs.pi(label) for label in labels])
        joint = numpy.block([[probs.pi_joint(a, b) for b in labels] for a in labels])
        signs = numpy.repeat(numpy.array([1, -1][: len(labels)]), probs.N)
        zero = joint == 0
        outer = numpy.outer(pi, pi)
        safe = numpy.where(zero, 1, joint)
        weights = numpy.where(zero, 0, (safe - outer) / (outer * safe))
        if not probs.exact:
            weights = weights.astype(float)
        rows, columns = numpy.nonzero(numpy.triu(zero, 1))
        pairs = tuple(
            ((probs.units[u % probs.N], labels[u // probs.N]), (probs.units[v % probs.N], labels[v // probs.N]))
            for u, v in zip(rows.tolist(), columns.tolist())
        )
        return cls(
            N=probs.N,
            labels=labels,
            units=probs.units,
            population=probs.population,
            signs=signs,
            pi=pi,
            weights=weights,
            young=zero.sum(axis=1),
            zero_pairs=pairs,
            provenance=probs.provenance,
        )

    @property
    def refused(self) -> bool:
        return bool(self.zero_pairs)

    def stack(self, y, dvec) -> typing.Tuple[numpy.ndarray, numpy.ndarray]:
        """Stacked revealed outcomes ``Y_i I[D_i = label]`` and indicators for ``(R, N)`` batches."""
        y, dvec = numpy.asarray(y), numpy.asarray(dvec)
        if y.shape != dvec.shape:
            raise dbinfer.ValidationError(f"outcomes {y.shape} and exposures {dvec.shape} differ in shape")
        if y.ndim == 1:
            y, dvec = y[None, :], dvec[None, :]
        if y.shape[1] != self.population:
            raise dbinfer.ValidationError(f"expected {self.population} units, got {y.shape[1]}")
        index = list(self.units)
        y, dvec = y[:, index], dvec[:, index]
        exact = self.pi.dtype == object
        y = dbinfer.exact_array(y) if exact else y.astype(float)
        cells = numpy.concatenate([dvec == label for label in self.labels], axis=1)
        indicators = dbinfer.indicator(cells, exact=exact)
        return numpy.concatenate([y] * len(self.labels), axis=1) * indicators, indicators

    def point(self, revealed) -> numpy.ndarray:
        return (revealed * (self.signs / self.pi)).sum(axis=1) / self.N

    def quadratic(self, revealed) -> numpy.ndarray:
        signed = revealed * self.signs
        return ((signed @ self.weights) * signed).sum(axis=1) / self.N ** 2

    def young_terms(self, revealed) -> numpy.ndarray:
        return (revealed * revealed * (self.young / self.pi)).sum(axis=1) / self.N ** 2

    def estimates(self, y, dvec) -> munch.Munch:
        """Point, conservative and (when defined) unbiased variance estimates of a batch."""
        revealed, _ = self.stack(y, dvec)
        quadratic = self.quadratic(revealed)
        return munch.Munch(
            point=self.point(revealed),
            conservative=quadratic + self.young_terms(revealed),
            ht_variance=None if self.refused else quadratic,
        )

    def regression(self, y, dvec, predictions) -> numpy.ndarray:
        """Augmented estimates given stacked predictions independent of the exposures."""
        revealed, indicators = self.stack(y, dvec)
        residual = revealed - predictions * indicators
        return self.point(residual) + (self.signs * predictions).sum() / self.N


def _scalar(values):
    return None if values is None else values[0]


def ht_estimate(y, dvec, probs, d):
    """The inverse probability weighted mean over units exposed to ``d``."""
    return _scalar(VarianceKernel.build(probs, d).estimates(y, dvec).point)


def ht_variance_estimate(y, dvec, probs, d):
    """The unbiased variance estimate; refused when some joint probability is zero.

Raises
------
dbinfer.RefusalError
    Lists the zero joint pairs; use ``conservative_variance_estimate`` instead.
    """
    kernel = VarianceKernel.build(probs, d)
    if kernel.refused:
        logger.warning("refusing the unbiased variance estimate: %d zero joint pairs", len(kernel.zero_pairs))
        raise dbinfer.RefusalError(
            f"{len(kernel.zero_pairs)} unit pairs are never jointly exposed to {d}; "
            "use the conservative variance estimate",
            pairs=kernel.zero_pairs,
        )
    return _scalar(kernel.estimates(y, dvec).ht_variance)


def conservative_variance_estimate(y, dvec, probs, d):
    """The variance estimate with Young bounds for never jointly observed pairs."""
    return _scalar(VarianceKernel.build(probs, d).estimates(y, dvec).conservative)


def _stacked_epos(design, mapping, schedule, labels, epos):
    if epos is None:
        design.require_enumerable()
        verdict = dbinfer.assumptions.check_nurva(design, mapping, schedule, labels=labels)
        if not verdict.holds:
            raise dbinfer.AssumptionError(
                "NURVA fails, the variance is defined only by a random analogue", verdict=verdict
            )
        totals = dbinfer.estimands.support_totals(design, mapping, labels, schedule)
        epos = {d: dbinfer.estimands._epos(totals, d, range(design.N)) for d in labels}
    return numpy.concatenate([numpy.asarray(epos[d], dtype=object) for d in labels])


def ht_variance_true(design, mapping, schedule, d, d_prime=None, probs=None, epos=None):
    """The exact variance of the HT estimator of ``AEPO(d)`` or ``AEED(d, d')``.

Parameters
----------
probs : dbinfer.estimands.ExposureProbabilities, optional
epos : dict, optional
    Unit EPOs per label, accepted in place of the support scan when NURVA is known to hold.

Raises
------
dbinfer.AssumptionError
    NURVA fails on the labels involved.

Examples
--------

    >>> design = dbinfer.design.make_bernoulli_design(2, '1/2')
    >>> schedule = dbinfer.outcomes.make_rule_schedule('no-interference', {'baseline': 1}, N=2)
    >>> ht_variance_true(design, dbinfer.exposure.make_individualistic_mapping(2), schedule, 1)
    Fraction(1, 2)
    """
    labels = (d,) if d_prime is None or d_prime == d else (d, d_prime)
    if d_prime is not None and d_prime == d:
        return Fraction(0)
    if probs is None:
        probs = dbinfer.estimands.exposure_probabilities(design, mapping, labels)
    kernel = VarianceKernel.build(probs, *labels)
    joint = numpy.block([[probs.pi_joint(a, b) for b in labels] for a in labels])
    outer = numpy.outer(kernel.pi, kernel.pi)
    signed = _stacked_epos(design, mapping, schedule, labels, epos) * kernel.signs
    if not probs.exact:
        signed = signed.astype(float)
    return signed @ ((joint - outer) / outer) @ signed / probs.N ** 2


def sample_mean(y, dvec, d):
    """The plain mean outcome of units exposed to ``d``."""
    y, dvec = numpy.asarray(y), numpy.asarray(dvec)
    chosen = y[dvec == d]
    if not len(chosen):
        raise dbinfer.ValidationError(f"no unit is exposed to {d}")
    if y.dtype == object:
        return sum(chosen.tolist(), Fraction(0)) / len(chosen)
    return float(chosen.mean())


def wald_ci(point, variance, level=0.95) -> typing.Tuple[float, float]:
    """A normal approximation interval ``point +/- q sqrt(variance)``.

    >>> lo, hi = wald_ci(0, 1, 0.95)
    >>> round(hi, 6), wald_ci(5, 0, 0.95)
    (1.959964, (5.0, 5.0))
    """
    if variance < 0:
        raise dbinfer.ValidationError(f"the variance {variance} is negative")
    if not 0 < level < 1:
        raise dbinfer.ValidationError(f"the level {level} is not a probability")
    half = float(scipy.stats.norm.ppf(0.5 + level / 2)) * math.sqrt(float(variance))
    return float(point) - half, float(point) + half


def _report(target, kernel, y, dvec, level):
    estimates = kernel.estimates(y, dvec)
    point, conservative = _scalar(estimates.point), _scalar(estimates.conservative)
    ci = None
    if conservative < 0:
        logger.warning("%s: the variance estimate %s is negative, no interval is reported", target, conservative)
    else:
        ci = list(wald_ci(point, conservative, level))
    if kernel.refused:
        logger.info("%s: %d zero joint pairs, reporting the conservative variance", target, len(kernel.zero_pairs))
    return munch.Munch(
        target=target,
        point=point,
        var_ht=_scalar(estimates.ht_variance),
        var_cons=conservative,
        ci=ci,
        level=level,
        zero_joint_pairs=len(kernel.zero_pairs),
        provenance=kernel.provenance.kind,
        units=list(kernel.units),
    )


def aepo_estimate_with_variance(y, dvec, probs, d, level=0.95) -> munch.Munch:
    """The EstimateReport of ``AEPO(d)``, with the sample mean of exposed units alongside."""
    report = _report(f"aepo({d})", VarianceKernel.build(probs, d), y, dvec, level)
    index = list(probs.units)
    exposed = numpy.asarray(dvec)[index] == d
    report.sample_mean = sample_mean(numpy.asarray(y)[index], numpy.asarray(dvec)[index], d) if exposed.any() else None
    return report


def aeed_estimate_with_variance(y, dvec, probs, d, d_prime, level=0.95) -> munch.Munch:
    """The EstimateReport of ``AEED(d, d')`` with the cross terms documented in ``variance_terms``.

    >>> design, space, mapping, schedule = dbinfer.corpus.load_corpus('household')
    >>> probs = dbinfer.estimands.exposure_probabilities(design, mapping, (0, 1))
    >>> report = aeed_estimate_with_variance((0, 1), (1, 0), probs, 1, 0)
    >>> report.point, report.var_cons > 0
    (Fraction(-1, 1), True)
    """
    target = f"aeed({d},{d_prime})"
    if d == d_prime:
        zero = Fraction(0) if probs.exact else 0.0
        return munch.Munch(
            target=target, point=zero, var_ht=zero, var_cons=zero, ci=[0.0, 0.0], level=level,
            zero_joint_pairs=0, provenance=probs.provenance.kind, units=list(probs.units),
            variance_terms="identical labels, the estimator is zero",
        )
    report = _report(target, VarianceKernel.build(probs, d, d_prime), y, dvec, level)
    report.variance_terms = YOUNG_NOTE
    return report


@dataclasses.dataclass(frozen=True)
class PredictionFunction:
    """Per label prediction functions ``f_d(X, beta)``.

``beta`` is either one parameter vector or a mapping from labels to parameter vectors.
    """

    functions: dict = dataclasses.field(default_factory=dict)
    default: typing.Optional[typing.Callable] = None

    def predict(self, d, X, beta) -> numpy.ndarray:
        function = self.functions.get(d, self.default)
        if function is None:
            raise dbinfer.ValidationError(f"no prediction function for label {d}")
        parameters = beta.get(d) if isinstance(beta, typing.Mapping) else beta
        return numpy.asarray(function(X, parameters))

    @classmethod
    def linear(cls):
        return cls(default=lambda X, beta: X @ beta)

    @classmethod
    def constant(cls, value):
        return cls(default=lambda X, beta: numpy.full(len(X), value, dtype=object))


def predictions(probs, labels, X, f, beta) -> numpy.ndarray:
    """Stacked predictions of every label for the units in ``probs``."""
    exact = probs.exact
    X = dbinfer.exact_array(X) if exact else numpy.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if len(X) != probs.N:
        raise dbinfer.ValidationError(f"X has {len(X)} rows for {probs.N} units")
    if exact:
        beta = {k: dbinfer.exact_array(v) for k, v in beta.items()} if isinstance(beta, typing.Mapping) else (
            None if beta is None else dbinfer.exact_array(beta)
        )
    stacked = []
    for d in labels:
        values = f.predict(d, X, beta)
        if values.shape != (probs.N,):
            raise dbinfer.ValidationError(f"predictions for label {d} have shape {values.shape}")
        stacked.append(dbinfer.exact_array(values) if exact else values.astype(float))
    return numpy.concatenate(stacked)


def regression_adjusted_estimate(y, dvec, probs, d, X, f, beta, d_prime=None):
    """The augmented estimator of ``AEPO(d)`` (or ``AEED(d, d')``) with externally fixed ``beta``.

``X`` has one row per unit in ``probs``; predictions must not depend on the realized exposures.

    >>> design, space, mapping, schedule = dbinfer.corpus.load_corpus('household')
    >>> probs = dbinfer.estimands.exposure_probabilities(design, mapping, 1)
    >>> regression_adjusted_estimate((0, 1), (1, 0), probs, 1, None, PredictionFunction.constant(0), None)
    Fraction(0, 1)
    """
    labels = (d,) if d_prime is None else (d, d_prime)
    kernel = VarianceKernel.build(probs, *labels)
    X = numpy.zeros((probs.N, 1), dtype=int) if X is None else X
    return _scalar(kernel.regression(y, dvec, predictions(probs, labels, X, f, beta)))
