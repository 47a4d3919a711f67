"""Exposure probabilities and the expected potential outcome estimands.

Probabilities come from one of three sources, recorded as ``provenance``:

``exact-enumeration``
    A weighted pass over the full design support.
``analytic``
    Closed form code probabilities of a structured design, for mappings whose labels depend
    only on each unit's own code.
``monte-carlo``
    Opt in; ``R`` draws from the design with a fixed ``seed``.

EPOs, AEPOs and their differences are exact rationals computed in a single support pass that
accumulates, per unit and label, the mass and the mass weighted outcome.

Examples
--------

    >>> design, space, mapping, schedule = dbinfer.corpus.load_corpus('household')
    >>> aeed(design, mapping, schedule, 1, 0)
    Fraction(-1, 1)
    >>> probs = exposure_probabilities(*dbinfer.corpus.load_corpus('voter-carryover')[::2], 1)
    >>> probs.pi(1).tolist()
    [Fraction(1, 2), Fraction(3, 4), Fraction(3, 4), Fraction(3, 4)]
"""
import dataclasses
import logging
import math
import typing

import munch
import numpy

import dbinfer

logger = logging.getLogger(__name__)

Fraction = dbinfer.Fraction

EXACT, ANALYTIC, MONTE_CARLO = "exact-enumeration", "analytic", "monte-carlo"


def _labels(labels) -> tuple:
    if isinstance(labels, (int, numpy.integer)):
        return (int(labels),)
    return tuple(dict.fromkeys(int(d) for d in labels))


@dataclasses.dataclass(frozen=True)
class ExposureProbabilities:
    """Marginal ``pi_i(d)`` and joint ``pi_ij(d, e)`` tables for a set of labels.

Parameters
----------
N : int
    The number of units in the tables.
labels : tuple
marginal : dict
    ``label -> (N,)`` array.
joint : dict
    ``(label, label) -> (N, N)`` array for every ordered pair of labels.
provenance : munch.Munch
    ``kind`` plus ``R``, ``seed`` and ``half_width`` for Monte Carlo tables.
units : tuple
    The population index of each row.
population : int
    The size of the population the rows are drawn from.
    """

    N: int
    labels: tuple
    marginal: dict
    joint: dict
    provenance: munch.Munch
    units: tuple = ()
    population: int = 0

    def __post_init__(self):
        if not self.units:
            object.__setattr__(self, "units", tuple(range(self.N)))
        if not self.population:
            object.__setattr__(self, "population", max(self.units, default=-1) + 1)

    @property
    def exact(self) -> bool:
        return all(dbinfer.is_exact(value) for value in self.marginal.values())

    def _require(self, d):
        if d not in self.marginal:
            raise dbinfer.ValidationError(f"label {d} is not among the computed labels {self.labels}")

    def pi(self, d) -> numpy.ndarray:
        self._require(d)
        return self.marginal[d]

    def pi_joint(self, d, e=None) -> numpy.ndarray:
        e = d if e is None else e
        self._require(d), self._require(e)
        return self.joint[d, e]

    def zero_joint_pairs(self, d, e=None) -> typing.List[typing.Tuple[int, int]]:
        """Unit pairs, by population index, never jointly observed in ``d`` and ``e``."""
        rows, columns = numpy.nonzero(self.pi_joint(d, e) == 0)
        return [(self.units[i], self.units[j]) for i, j in zip(rows.tolist(), columns.tolist())]

    def subset(self, units) -> "ExposureProbabilities":
        """Restrict the tables to the given population units."""
        position = {unit: k for k, unit in enumerate(self.units)}
        try:
            index = numpy.array([position[int(unit)] for unit in units], dtype=numpy.int64)
        except KeyError as error:
            raise dbinfer.ValidationError(f"unit {error} is not in these tables")
        return ExposureProbabilities(
            N=len(index),
            labels=self.labels,
            marginal={d: value[index] for d, value in self.marginal.items()},
            joint={key: value[numpy.ix_(index, index)] for key, value in self.joint.items()},
            provenance=self.provenance,
            units=tuple(self.units[k] for k in index),
            population=self.population,
        )

    def to_float(self) -> "ExposureProbabilities":
        return dataclasses.replace(
            self,
            marginal={d: dbinfer.to_float(value) for d, value in self.marginal.items()},
            joint={key: dbinfer.to_float(value) for key, value in self.joint.items()},
        )


def _scaled(masses):
    """Integer weights over a common denominator, or ``None`` beyond 62 bits."""
    common = math.lcm(*{mass.denominator for mass in masses})
    if common >= 2 ** 62:
        return None, common
    return (
        numpy.array([mass.numerator * (common // mass.denominator) for mass in masses], dtype=numpy.int64),
        common,
    )


def _over(values, common):
    return numpy.frompyfunc(lambda x: Fraction(int(x), common), 1, 1)(values).astype(object)


def _weighted(indicators, masses, other=None):
    """``sum_s mass_s * I_s`` per unit, or the joint ``sum_s mass_s * I_s J_s'`` matrix."""
    weights, common = _scaled(masses)
    if weights is not None:
        if other is None:
            return _over(weights @ indicators.astype(numpy.int64), common)
        return _over(
            indicators.astype(numpy.int64).T @ (weights[:, None] * other.astype(numpy.int64)), common
        )
    if other is None:
        return masses @ dbinfer.indicator(indicators)
    return dbinfer.indicator(indicators).T @ (masses[:, None] * dbinfer.indicator(other))


def support_totals(design, mapping, labels, schedule=None, joints=False) -> munch.Munch:
    """One pass over the support accumulating per unit and label totals.

Returns
-------
munch.Munch
    ``mass[d]`` the marginal probabilities, ``outcome[d]`` the mass weighted outcomes,
    ``placeholder[d]`` whether a placeholder cell was touched, ``joint[d, e]`` when
    ``joints`` is true, and ``size`` the number of support points.
    """
    labels = _labels(labels)
    N = design.N
    if mapping.N is not None and mapping.N != N:
        raise dbinfer.ExposureError(f"the mapping has {mapping.N} units but the design has {N}")
    if schedule is not None and schedule.N != N:
        raise dbinfer.OutcomeError(f"the schedule has {schedule.N} units but the design has {N}")
    zeros = lambda *shape: numpy.full(shape, Fraction(0), dtype=object)
    totals = munch.Munch(
        mass={d: zeros(N) for d in labels},
        outcome={d: zeros(N) for d in labels},
        placeholder={d: numpy.zeros(N, dtype=bool) for d in labels},
        joint={(d, e): zeros(N, N) for d in labels for e in labels} if joints else {},
        size=0,
    )
    for vectors, masses in design.chunks():
        exposures = mapping.apply_batch(vectors)
        cells = {d: exposures == d for d in labels}
        if schedule is not None:
            outcomes = schedule.evaluate_batch(vectors)
            undefined = schedule.undefined_batch(vectors)
        for d in labels:
            totals.mass[d] = totals.mass[d] + _weighted(cells[d], masses)
            if schedule is not None:
                weighted = masses[:, None] * outcomes * dbinfer.indicator(cells[d])
                totals.outcome[d] = totals.outcome[d] + weighted.sum(axis=0)
                totals.placeholder[d] |= (cells[d] & undefined).any(axis=0)
            if joints:
                for e in labels:
                    totals.joint[d, e] = totals.joint[d, e] + _weighted(cells[d], masses, cells[e])
        totals.size += len(vectors)
    logger.debug("accumulated %d support points over labels %s", totals.size, labels)
    return totals


def _analytic(design, mapping, labels):
    probabilities = dbinfer.design.code_probabilities(design)
    local = numpy.asarray(mapping.local(numpy.asarray(probabilities.codes)))
    codes = {d: [a for a, label in zip(probabilities.codes, local.tolist()) if label == d] for d in labels}
    return (
        {d: probabilities.marginal_vector(codes[d]) for d in labels},
        {(d, e): probabilities.joint_matrix(codes[d], codes[e]) for d in labels for e in labels},
    )


def _monte_carlo(design, mapping, labels, R, seed):
    exposures = mapping.apply_batch(dbinfer.design.sample_assignments(design, seed, R))
    cells = {d: (exposures == d).astype(float) for d in labels}
    marginal = {d: cells[d].mean(axis=0) for d in labels}
    joint = {(d, e): cells[d].T @ cells[e] / R for d in labels for e in labels}
    half_width = max(float(numpy.max(4 * numpy.sqrt(p * (1 - p) / R))) for p in marginal.values())
    return marginal, joint, half_width


def exposure_probabilities(design, mapping, labels, method="auto", R=None, seed=None, exact=True) -> ExposureProbabilities:
    """Marginal and joint exposure probabilities for one or several labels.

Parameters
----------
design : dbinfer.design.Design
mapping : dbinfer.exposure.ExposureMapping
labels : int or sequence of int
method : str
    ``auto``, ``enumerate``, ``analytic`` or ``monte-carlo``. ``auto`` enumerates enumerable
    designs, falls back to the closed form when it exists and to Monte Carlo only when ``R``
    is given.
R, seed : int
    Draws and seed of the Monte Carlo estimate.
exact : bool
    Rational tables when true, floats otherwise.

Raises
------
dbinfer.EnumerationCapError
    The design is too large to enumerate and no other method applies.

Examples
--------

    >>> probs = exposure_probabilities(*dbinfer.corpus.load_corpus('rebel-survey')[::2], 1)
    >>> set(probs.pi(1).tolist())
    {Fraction(3, 10)}
    """
    labels = _labels(labels)
    if method == "auto":
        if design.enumerable:
            method = "enumerate"
        elif mapping.local is not None and design.kind != "explicit":
            method = "analytic"
        elif R is not None:
            method = MONTE_CARLO
        else:
            design.require_enumerable()
    if method == "enumerate":
        totals = support_totals(design, mapping, labels, joints=True)
        marginal, joint, provenance = totals.mass, totals.joint, munch.Munch(kind=EXACT)
    elif method == "analytic":
        if mapping.local is None:
            raise dbinfer.ExposureError(f"the {mapping.kind} mapping has no closed form probabilities")
        marginal, joint = _analytic(design, mapping, labels)
        provenance = munch.Munch(kind=ANALYTIC)
    elif method == MONTE_CARLO:
        if R is None or seed is None:
            raise dbinfer.ValidationError("Monte Carlo probabilities need both R and seed")
        marginal, joint, half_width = _monte_carlo(design, mapping, labels, int(R), seed)
        provenance = munch.Munch(kind=MONTE_CARLO, R=int(R), seed=seed, half_width=half_width)
    else:
        raise dbinfer.ValidationError(f"unknown probability method {method!r}")
    logger.info("%s exposure probabilities for labels %s of %r", provenance.kind, labels, design.label)
    probs = ExposureProbabilities(design.N, labels, marginal, joint, provenance)
    return probs if exact or not probs.exact else probs.to_float()


def check_positivity(probs: ExposureProbabilities, d) -> munch.Munch:
    """Whether every unit can receive ``d``, listing those that cannot.

    >>> probs = exposure_probabilities(dbinfer.design.make_explicit_design([(0, 0)], [1]),
    ...     dbinfer.exposure.make_individualistic_mapping(2), 1)
    >>> check_positivity(probs, 1).units
    [0, 1]
    """
    pi = probs.pi(d)
    zero = numpy.nonzero(pi == 0)[0]
    status = munch.Munch(
        label=d,
        holds=not len(zero),
        minimum=min(pi.tolist()) if len(pi) else None,
        units=[probs.units[k] for k in zero.tolist()],
    )
    if not status.holds:
        logger.warning("positivity fails for label %s at units %s", d, status.units)
    return status


def trim_population(probs: ExposureProbabilities, d, d_prime) -> typing.Tuple[int, ...]:
    """The units with positive probability of both ``d`` and ``d_prime``."""
    keep = (probs.pi(d) > 0) & (probs.pi(d_prime) > 0)
    units = tuple(probs.units[k] for k in numpy.nonzero(keep)[0].tolist())
    if not units:
        raise dbinfer.PositivityError(f"no unit can receive both {d} and {d_prime}", units=probs.units)
    if len(units) < probs.N:
        logger.warning("trimmed %d units for the contrast (%s, %s)", probs.N - len(units), d, d_prime)
    return units


def _units(N, units):
    if units is None:
        return tuple(range(N))
    units = tuple(int(i) for i in units)
    if not units:
        raise dbinfer.ValidationError("no units were selected")
    outside = [i for i in units if not 0 <= i < N]
    if outside:
        raise dbinfer.ValidationError(f"units {outside} are not among the {N} units")
    return units


def _epos(totals, d, units):
    mass, outcome = totals.mass[d], totals.outcome[d]
    zero = [i for i in units if mass[i] == 0]
    if zero:
        raise dbinfer.PositivityError(
            f"positivity fails for label {d} at units {zero}; trim the population", units=zero
        )
    return numpy.array([outcome[i] / mass[i] for i in units], dtype=object)


def _mean(values):
    return sum(values.tolist(), Fraction(0)) / len(values)


def unit_epos(design, mapping, schedule, d, units=None) -> numpy.ndarray:
    """The expected potential outcomes ``ybar_i(d)`` of the given units."""
    units = _units(design.N, units)
    return _epos(support_totals(design, mapping, d, schedule), d, units)


def epo(design, mapping, schedule, i, d):
    """The expected outcome of unit ``i`` given that it receives ``d``.

    >>> instance = dbinfer.corpus.load_corpus('job-training-uniform')
    >>> epo(instance.design, instance.mapping, instance.schedule, 0, 1)
    Fraction(1, 2)
    """
    return unit_epos(design, mapping, schedule, d, units=(i,))[0]


def aepo(design, mapping, schedule, d, units=None):
    """The average of the EPOs over all units, or over ``units`` after trimming."""
    return _mean(unit_epos(design, mapping, schedule, d, units))


def eed(design, mapping, schedule, i, d, d_prime):
    units = _units(design.N, (i,))
    totals = support_totals(design, mapping, (d, d_prime), schedule)
    return _epos(totals, d, units)[0] - _epos(totals, d_prime, units)[0]


def aeed(design, mapping, schedule, d, d_prime, units=None):
    """The average expected exposure difference ``ybar(d) - ybar(d_prime)``."""
    units = _units(design.N, units)
    totals = support_totals(design, mapping, (d, d_prime), schedule)
    return _mean(_epos(totals, d, units)) - _mean(_epos(totals, d_prime, units))


def estimand_report(design, mapping, schedule, labels=None, contrasts=(), units=None, trim=False) -> munch.Munch:
    """Every estimand for the requested labels and contrasts from one support pass.

Parameters
----------
labels : sequence, optional
    Defaults to the mapping's labels together with those named in ``contrasts``.
contrasts : sequence of pairs
units : sequence, optional
    Average over these units only.
trim : bool
    Trim each contrast to the units with positive probability of both labels.

Returns
-------
munch.Munch
    ``epo``, ``aepo`` and ``positivity`` per label; ``contrasts`` with ``eed``, ``aeed`` and the
    included units; ``placeholder_labels`` listing labels whose cells touch placeholder outcomes.
    Estimands blocked by positivity are ``None`` and come with a ``trim_suggestion``.
    """
    contrasts = [tuple(int(x) for x in pair) for pair in contrasts]
    labels = _labels(labels if labels is not None else [*mapping.codes, *(x for pair in contrasts for x in pair)])
    totals = support_totals(design, mapping, labels, schedule)
    included = _units(design.N, units)
    report = munch.Munch(
        design=design.label,
        N=design.N,
        provenance=EXACT,
        support_size=totals.size,
        labels=list(labels),
        units=list(included),
        epo={},
        aepo={},
        positivity={},
        contrasts=[],
        placeholder_labels=[d for d in labels if totals.placeholder[d][list(included)].any()],
    )
    for d in labels:
        mass = totals.mass[d]
        report.epo[d] = [totals.outcome[d][i] / mass[i] if mass[i] else None for i in range(design.N)]
        zero = [i for i in included if mass[i] == 0]
        report.positivity[d] = munch.Munch(holds=not zero, units=zero, minimum=min(mass[i] for i in included))
        report.aepo[d] = None if zero else _mean(numpy.array([report.epo[d][i] for i in included], dtype=object))
    for d, d_prime in contrasts:
        both = [i for i in included if totals.mass[d][i] and totals.mass[d_prime][i]]
        row = munch.Munch(d=d, d_prime=d_prime, units=list(included), eed=[], aeed=None, trim_suggestion=None)
        if len(both) < len(included):
            row.trim_suggestion = both
            if trim and both:
                row.units = both
                logger.warning("trimmed contrast (%s, %s) to units %s", d, d_prime, both)
        if set(row.units) <= set(both):
            row.eed = [report.epo[d][i] - report.epo[d_prime][i] for i in row.units]
            row.aeed = _mean(numpy.array(row.eed, dtype=object))
        report.contrasts.append(row)
    return report
