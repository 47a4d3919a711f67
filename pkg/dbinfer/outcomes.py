"""Schedules of raw potential outcomes.

A schedule answers ``y_i(z)`` for every unit and every assignment in its domain, whether it is
backed by an explicit table or by a named rule. Estimand code only ever calls
``evaluate_batch`` and never learns which backing it has.

Survey schedules carry a placeholder recorded for units that were not sampled.

Examples
--------

    >>> household = make_table_schedule({(0, 0): (0, 0), (0, 1): (1, 0), (1, 0): (0, 1), (1, 1): (1, 1)})
    >>> lookup(household, 1, (1, 1))
    Fraction(1, 1)
    >>> list(map(int, make_rule_schedule('partial-interference', {'size': 2}, N=2).evaluate((1, 1))))
    [2, 2]
"""
import dataclasses
import logging
import typing

import munch
import numpy

import dbinfer

logger = logging.getLogger(__name__)

Fraction = dbinfer.Fraction


def _numbers(values, exact):
    """Rational object arrays when exact, floats otherwise."""
    return dbinfer.exact_array(values) if exact else numpy.asarray(dbinfer.to_float(dbinfer.exact_array(values)), dtype=float)


def _counts(values, exact):
    values = numpy.asarray(values, dtype=numpy.int64)
    return values.astype(object) if exact else values.astype(float)


@dataclasses.dataclass(frozen=True)
class OutcomeSchedule:
    """The common read interface of outcome schedules.

Parameters
----------
N : int
domain : dbinfer.design.DesignSpace, optional
    The assignments the schedule is defined on; ``None`` accepts any assignment.
placeholder : number
    Recorded for unsampled units of a survey schedule.
survey : bool
exact : bool
    Rational outputs when true, floats otherwise.
    """

    N: int
    domain: typing.Optional[dbinfer.design.DesignSpace] = None
    placeholder: typing.Any = Fraction(0)
    survey: bool = False
    exact: bool = True

    def _values(self, vectors) -> numpy.ndarray:
        raise NotImplementedError

    def evaluate_batch(self, vectors) -> numpy.ndarray:
        """Outcomes for an ``(S, N)`` batch of assignments."""
        vectors = numpy.asarray(vectors, dtype=numpy.int64)
        if vectors.ndim == 1:
            vectors = vectors[None, :]
        if vectors.shape[1] != self.N:
            raise dbinfer.OutcomeError(
                f"assignments of length {vectors.shape[1]} given to a schedule of {self.N} units"
            )
        if self.domain is not None:
            inside = self.domain.contains(vectors)
            if not inside.all():
                z = dbinfer.as_assignment(vectors[numpy.argmin(inside)])
                raise dbinfer.OutcomeError(f"{z} lies outside the schedule's domain")
        values = self._values(vectors)
        if self.survey:
            values = numpy.where(vectors > 0, values, self.placeholder)
        return values

    def evaluate(self, z) -> numpy.ndarray:
        return self.evaluate_batch(numpy.asarray(z)[None, :])[0]

    def undefined_batch(self, vectors) -> numpy.ndarray:
        """Cells holding the placeholder rather than an outcome."""
        vectors = numpy.asarray(vectors, dtype=numpy.int64)
        if not self.survey:
            return numpy.zeros(vectors.shape, dtype=bool)
        return vectors <= 0

    def undefined(self, z) -> numpy.ndarray:
        return self.undefined_batch(numpy.asarray(z)[None, :])[0]

    def with_placeholder(self, value):
        return set_placeholder(self, value)

    def to_float(self):
        """The same schedule emitting floats."""
        return dataclasses.replace(self, exact=False, placeholder=float(self.placeholder))


@dataclasses.dataclass(frozen=True)
class TableSchedule(OutcomeSchedule):
    rows: dict = dataclasses.field(default_factory=dict, repr=False)

    def _values(self, vectors):
        out = []
        for z in vectors:
            key = tuple(map(int, z))
            if key not in self.rows:
                raise dbinfer.OutcomeError(f"no outcomes are recorded for {key}")
            out.append(self.rows[key])
        return _numbers(numpy.array(out, dtype=object).reshape(len(vectors), self.N), self.exact)


@dataclasses.dataclass(frozen=True)
class RuleSchedule(OutcomeSchedule):
    name: str = ""
    params: dict = dataclasses.field(default_factory=dict, repr=False)
    rule: typing.Optional[typing.Callable] = dataclasses.field(default=None, repr=False)

    def _values(self, vectors):
        return self.rule(vectors, self.exact)


@dataclasses.dataclass(frozen=True)
class ObservedData:
    """One realization: the assignment, the outcomes and the exposures it produced."""

    z: tuple
    y: numpy.ndarray
    d: tuple


def lookup(schedule: OutcomeSchedule, i, z):
    """The raw potential outcome ``y_i(z)``; the placeholder for unsampled survey units."""
    if not 0 <= i < schedule.N:
        raise dbinfer.OutcomeError(f"unit {i} is not among the {schedule.N} units")
    return schedule.evaluate(z)[i]


def set_placeholder(schedule: OutcomeSchedule, value) -> OutcomeSchedule:
    """A copy of a survey schedule with a new placeholder.

    >>> survey = make_rule_schedule('survey', {'members': [5, 7]}, N=2)
    >>> lookup(set_placeholder(survey, -99), 1, (1, 0))
    Fraction(-99, 1)
    """
    if not schedule.survey:
        raise dbinfer.OutcomeError("only survey schedules carry a placeholder")
    value = dbinfer.as_fraction(value) if schedule.exact else float(value)
    return dataclasses.replace(schedule, placeholder=value)


def observe(schedule: OutcomeSchedule, mapping, z) -> ObservedData:
    """The data revealed by assignment ``z``."""
    z = dbinfer.as_assignment(z)
    return ObservedData(z=z, y=schedule.evaluate(z), d=dbinfer.exposure.apply_exposure(mapping, z))


def make_table_schedule(rows, domain=None, placeholder=0, survey=False, N=None) -> TableSchedule:
    """A schedule from explicit ``assignment -> outcome vector`` rows."""
    rows = {dbinfer.as_assignment(z): tuple(dbinfer.as_fraction(v) for v in y) for z, y in dict(rows).items()}
    if not rows:
        raise dbinfer.OutcomeError("an outcome table needs at least one row")
    N = N or len(next(iter(rows)))
    for z, y in rows.items():
        if len(z) != N or len(y) != N:
            raise dbinfer.OutcomeError(f"table row {z} -> {y} does not have length {N}")
    if domain is None:
        domain = dbinfer.design.DesignSpace.explicit(rows, N=N)
    return TableSchedule(
        N=N, domain=domain, placeholder=dbinfer.as_fraction(placeholder), survey=survey, rows=rows
    )


def make_rule_schedule(name, params=None, N=None, domain=None, placeholder=0, survey=None) -> RuleSchedule:
    """A schedule evaluated lazily from a rule registered on the make_outcome_rule hook.

    >>> make_rule_schedule('household', N=2).evaluate((0, 1)).tolist()
    [1, 0]
    """
    params = dict(params or {})
    rule = dbinfer.manager.hook.make_outcome_rule(name=name, params=params)
    if rule is None:
        raise dbinfer.OutcomeError(f"no outcome rule named {name!r} is registered")
    if N is None:
        if domain is None:
            raise dbinfer.OutcomeError("a rule schedule needs N or a domain")
        N = domain.N
    return RuleSchedule(
        N=N,
        domain=domain,
        placeholder=dbinfer.as_fraction(placeholder),
        survey=name == "survey" if survey is None else survey,
        name=name,
        params=params,
        rule=rule,
    )


def _vector(params, key, N, default):
    value = params.get(key, default)
    return numpy.broadcast_to(numpy.asarray(value, dtype=object), (N,))


def household(params):
    """Each person votes exactly when their partner is treated."""

    def rule(vectors, exact):
        partner = params.get("partner") or list(range(vectors.shape[1]))[::-1]
        return _counts(vectors[:, partner] > 0, exact)

    return rule


def partial_interference(params):
    """Baseline plus an effect per treated unit of the own cluster.

Clusters are named by ``clusters`` (one id per unit) or formed from consecutive blocks of
``size`` units.
    """

    def rule(vectors, exact):
        N = vectors.shape[1]
        ids = params.get("clusters")
        if ids is None:
            ids = numpy.arange(N) // int(params.get("size", N))
        _, index = numpy.unique(numpy.asarray(ids), return_inverse=True)
        index = index.ravel()
        members = numpy.eye(index.max() + 1, dtype=numpy.int64)[index]
        counts = ((vectors > 0).astype(numpy.int64) @ members)[:, index]
        baseline = _numbers(_vector(params, "baseline", N, 0), exact)
        effect = _numbers(_vector(params, "effect", N, 1), exact)
        return baseline + effect * _counts(counts, exact)

    return rule


def no_interference(params):
    """Outcomes depend on the unit's own code only.

``values`` lists one outcome per code for every unit; ``baseline`` and ``effect`` are a
shorthand for binary treatments.
    """

    def rule(vectors, exact):
        N = vectors.shape[1]
        if "values" in params:
            table = numpy.asarray(params["values"], dtype=object)
        else:
            baseline = _vector(params, "baseline", N, 0)
            effect = _vector(params, "effect", N, 0)
            table = numpy.stack([baseline, baseline + effect], axis=1)
        table = _numbers(table, exact)
        if table.shape[0] != N or vectors.max(initial=0) >= table.shape[1]:
            raise dbinfer.OutcomeError("no outcome is recorded for some unit and code")
        return table[numpy.arange(N)[None, :], vectors]

    return rule


def comparative_advantage(params):
    """Trained units take up to ``jobs`` jobs first; the rest are shared by the untrained."""

    def rule(vectors, exact):
        N = vectors.shape[1]
        jobs = dbinfer.as_fraction(params.get("jobs", Fraction(N, 2)))
        trained, untrained = [], []
        for k in range(N + 1):
            taken = min(jobs, k)
            trained.append(taken / k if k else Fraction(0))
            untrained.append((jobs - taken) / (N - k) if k < N else Fraction(0))
        treated = vectors > 0
        k = treated.sum(axis=1)[:, None]
        return numpy.where(
            treated, _numbers(trained, exact)[k], _numbers(untrained, exact)[k]
        )

    return rule


def backfire(params):
    """Treated units lose ``penalty`` once at least ``threshold`` units are treated."""

    def rule(vectors, exact):
        N = vectors.shape[1]
        treated = vectors > 0
        crowded = treated.sum(axis=1, keepdims=True) >= int(params.get("threshold", N))
        penalty = _numbers(params.get("penalty", 1), exact)
        return -penalty * _counts(treated & crowded, exact)

    return rule


def survey(params):
    """The measured value of every unit; unsampled units get the schedule's placeholder."""

    def rule(vectors, exact):
        members = _numbers(_vector(params, "members", vectors.shape[1], 0), exact)
        return numpy.broadcast_to(members, vectors.shape).copy()

    return rule


def carryover(params):
    """Baseline plus ``effect`` on days treated that day or the day before."""

    def rule(vectors, exact):
        N = vectors.shape[1]
        exposed = dbinfer.exposure.make_carryover_mapping(N).rule(vectors)
        baseline = _numbers(_vector(params, "baseline", N, 0), exact)
        return baseline + _numbers(params.get("effect", 1), exact) * _counts(exposed, exact)

    return rule


def network(params):
    """Binary outcome: the baseline, own treatment, or a treated neighbour of a susceptible unit."""

    def rule(vectors, exact):
        N = vectors.shape[1]
        adjacency = dbinfer.exposure.adjacency_matrix(params["adjacency"])
        treated = (vectors > 0).astype(numpy.int64)
        spill = (treated @ adjacency.T > 0) & (
            numpy.asarray(_vector(params, "susceptible", N, 1), dtype=numpy.int64) > 0
        )
        base = numpy.asarray(_vector(params, "baseline", N, 0), dtype=numpy.int64) > 0
        return _counts(base | (treated > 0) | spill, exact)

    return rule


RULES = {
    "household": household,
    "partial-interference": partial_interference,
    "no-interference": no_interference,
    "comparative-advantage": comparative_advantage,
    "backfire": backfire,
    "survey": survey,
    "carryover": carryover,
    "network": network,
}


class _Implementation:
    """Built in outcome rules for the make_outcome_rule hook."""

    @dbinfer.implementation
    def make_outcome_rule(name, params):
        if name in RULES:
            return RULES[name](params)


dbinfer.manager.register(_Implementation, name=__name__)


def schedule_from_document(document) -> OutcomeSchedule:
    """Build a table or rule schedule from its JSON document.

    >>> schedule_from_document({'kind': 'rule', 'rule': {'name': 'backfire'},
    ...     'space': {'N': 2, 'rule': 'product'}}).evaluate((1, 1)).tolist()
    [Fraction(-1, 1), Fraction(-1, 1)]
    """
    dbinfer.manager.hook.validate_document(document=dict(document), schema=dbinfer.schema.SCHEDULE)
    document = munch.Munch.fromDict(dict(document))
    space = document.get("space")
    domain = None if space is None else dbinfer.design.space_from_document(space)
    placeholder = document.get("placeholder", 0)
    if document.kind == "table":
        return make_table_schedule(
            {tuple(row.z): tuple(row.y) for row in document.rows},
            domain=domain,
            placeholder=placeholder,
            survey=document.get("survey", False),
            N=document.get("N"),
        )
    return make_rule_schedule(
        document.rule.name,
        munch.unmunchify(document.rule.get("params", {})),
        N=document.get("N"),
        domain=domain,
        placeholder=placeholder,
        survey=document.get("survey"),
    )


def schedule_to_document(schedule: OutcomeSchedule) -> dict:
    document = {
        "N": schedule.N,
        "placeholder": dbinfer.reports.rational(schedule.placeholder),
        "survey": schedule.survey,
    }
    if schedule.domain is not None:
        document["space"] = schedule.domain.to_document()
    if isinstance(schedule, TableSchedule):
        document.update(
            kind="table",
            rows=[
                {"z": list(z), "y": [dbinfer.reports.rational(v) for v in y]}
                for z, y in schedule.rows.items()
            ],
        )
    else:
        document.update(kind="rule", rule={"name": schedule.name, "params": schedule.params})
    return document
