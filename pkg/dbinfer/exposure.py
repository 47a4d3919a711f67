"""Exposure mappings.

A mapping collapses a whole assignment vector into one exposure label per unit. Mappings are
rule objects evaluated on demand, row by row over an ``(S, N)`` batch of assignments.

Mappings whose label depends only on a unit's own code carry a ``local`` function from codes
to labels; exposure probabilities of such mappings have a closed form under structured designs.

Examples
--------

    >>> apply_exposure(make_carryover_mapping(4), (0, 1, 0, 0))
    (0, 1, 1, 0)
    >>> apply_exposure(make_peer_mapping((1, 0)), (0, 1))
    (1, 0)
"""
import dataclasses
import logging
import typing

import munch
import networkx
import numpy

import dbinfer

logger = logging.getLogger(__name__)

CONTROL, ISOLATED_DIRECT, INDIRECT, DIRECT_INDIRECT = 0, 1, 2, 3


@dataclasses.dataclass(frozen=True)
class ExposureLabel:
    code: int
    name: str = ""

    def __str__(self):
        return self.name or str(self.code)


@dataclasses.dataclass(frozen=True)
class ExposureMapping:
    """The per-unit exposure functions ``g_i``.

Parameters
----------
N : int
    Population size, ``None`` when the mapping accepts any length.
kind : str
labels : tuple
    The ``ExposureLabel`` set; codes are unique.
rule : callable
    Maps an ``(S, N)`` integer array of assignments to an ``(S, N)`` array of label codes.
local : callable, optional
    Maps an array of a unit's own codes to labels when no other unit matters.
defined : callable, optional
    Row-wise mask of assignments the mapping is defined for.
    """

    N: typing.Optional[int]
    kind: str
    labels: tuple
    rule: typing.Callable = dataclasses.field(repr=False)
    local: typing.Optional[typing.Callable] = dataclasses.field(default=None, repr=False)
    defined: typing.Optional[typing.Callable] = dataclasses.field(default=None, repr=False)
    params: dict = dataclasses.field(default_factory=dict, repr=False)

    def __post_init__(self):
        codes = [label.code for label in self.labels]
        if len(set(codes)) != len(codes):
            raise dbinfer.ExposureError(f"duplicate label codes in {codes}")

    @property
    def codes(self) -> tuple:
        return tuple(label.code for label in self.labels)

    def name(self, code) -> str:
        return str(dict(zip(self.codes, self.labels)).get(code, code))

    def _check(self, vectors):
        vectors = numpy.asarray(vectors, dtype=numpy.int64)
        if vectors.ndim == 1:
            vectors = vectors[None, :]
        if self.N is not None and vectors.shape[1] != self.N:
            raise dbinfer.ExposureError(
                f"assignments of length {vectors.shape[1]} given to a mapping of {self.N} units"
            )
        return vectors

    def apply_batch(self, vectors) -> numpy.ndarray:
        """Exposure vectors for an ``(S, N)`` batch of assignments."""
        vectors = self._check(vectors)
        if self.defined is not None:
            inside = self.defined(vectors)
            if not inside.all():
                z = dbinfer.as_assignment(vectors[numpy.argmin(inside)])
                raise dbinfer.ExposureError(f"the {self.kind} mapping is undefined at {z}")
        return numpy.asarray(self.rule(vectors), dtype=numpy.int64)

    def defined_batch(self, vectors) -> numpy.ndarray:
        vectors = self._check(vectors)
        if self.defined is None:
            return numpy.ones(len(vectors), dtype=bool)
        return numpy.asarray(self.defined(vectors), dtype=bool)

    def __call__(self, z) -> tuple:
        return apply_exposure(self, z)


def apply_exposure(mapping: ExposureMapping, z) -> tuple:
    """The exposure vector ``(g_1(z), ..., g_N(z))``."""
    return dbinfer.as_assignment(mapping.apply_batch(numpy.asarray(z)[None, :])[0])


def _levels(levels, names=None):
    names = names or ({0: "control", 1: "treated"} if levels == 2 else {})
    return tuple(ExposureLabel(a, names.get(a, f"level {a}")) for a in range(levels))


def make_individualistic_mapping(N=None, levels=2) -> ExposureMapping:
    """Every unit's exposure is its own assignment code."""

    def rule(vectors):
        if (vectors >= levels).any():
            raise dbinfer.ExposureError(f"assignment codes must be below {levels}")
        return vectors

    return ExposureMapping(
        N, "individualistic", _levels(levels), rule, local=lambda codes: numpy.asarray(codes), params={"levels": levels}
    )


def make_peer_mapping(permutation, levels=2) -> ExposureMapping:
    """Unit ``i`` takes its exposure from the code of unit ``permutation[i]``."""
    permutation = numpy.asarray(permutation, dtype=numpy.int64)
    if sorted(permutation.tolist()) != list(range(len(permutation))):
        raise dbinfer.ExposureError(f"{permutation.tolist()} is not a permutation")

    def rule(vectors):
        return vectors[:, permutation]

    return ExposureMapping(
        len(permutation),
        "peer",
        _levels(levels),
        rule,
        params={"permutation": permutation.tolist(), "levels": levels},
    )


def make_carryover_mapping(N) -> ExposureMapping:
    """Exposed on a day when treated that day or the day before; nothing precedes day one.

    >>> apply_exposure(make_carryover_mapping(4), (1, 0, 0, 0))
    (1, 1, 0, 0)
    """
    if N < 1:
        raise dbinfer.ExposureError("a carryover mapping needs at least one unit")

    def rule(vectors):
        today = vectors == 1
        yesterday = numpy.zeros_like(today)
        yesterday[:, 1:] = today[:, :-1]
        return (today | yesterday).astype(numpy.int64)

    return ExposureMapping(N, "carryover", _levels(2, {0: "unexposed", 1: "exposed"}), rule)


def make_survey_indicator_mapping(N=None, names=None) -> ExposureMapping:
    """Label 1 for every unit with a positive code.

    >>> apply_exposure(make_survey_indicator_mapping(4), (3, 2, 1, 0))
    (1, 1, 1, 0)
    """

    def rule(vectors):
        return (vectors > 0).astype(numpy.int64)

    names = names or {0: "not surveyed", 1: "surveyed"}
    return ExposureMapping(
        N, "survey", _levels(2, names), rule, local=lambda codes: (numpy.asarray(codes) > 0).astype(numpy.int64)
    )


def adjacency_matrix(adjacency) -> numpy.ndarray:
    """A validated 0/1 adjacency matrix from an array or a ``networkx.Graph``."""
    if isinstance(adjacency, networkx.Graph):
        if adjacency.is_directed():
            raise dbinfer.ExposureError("the peer network must be undirected")
        adjacency = networkx.to_numpy_array(
            adjacency, nodelist=sorted(adjacency.nodes), dtype=numpy.int64
        )
    adjacency = numpy.asarray(adjacency, dtype=numpy.int64)
    if adjacency.ndim != 2 or adjacency.shape[0] != adjacency.shape[1]:
        raise dbinfer.ExposureError("the adjacency matrix must be square")
    if not numpy.isin(adjacency, (0, 1)).all():
        raise dbinfer.ExposureError("the adjacency matrix must be binary")
    if numpy.diag(adjacency).any():
        raise dbinfer.ExposureError("the adjacency matrix must have a zero diagonal")
    if (adjacency != adjacency.T).any():
        raise dbinfer.ExposureError("the adjacency matrix must be symmetric")
    return adjacency


def make_network_mapping(adjacency) -> ExposureMapping:
    """Four network exposures from own treatment and treated neighbours.

Codes are 0 control, 1 isolated direct, 2 indirect and 3 direct and indirect. A unit is
indirectly exposed when at least one neighbour is treated.

Examples
--------

    >>> path = networkx.path_graph(3)
    >>> apply_exposure(make_network_mapping(path), (1, 0, 0))
    (1, 2, 0)
    >>> apply_exposure(make_network_mapping(networkx.complete_graph(2)), (1, 1))
    (3, 3)
    """
    adjacency = adjacency_matrix(adjacency)

    def rule(vectors):
        treated = (vectors > 0).astype(numpy.int64)
        spill = (treated @ adjacency.T) > 0
        return numpy.where(
            treated > 0,
            numpy.where(spill, DIRECT_INDIRECT, ISOLATED_DIRECT),
            numpy.where(spill, INDIRECT, CONTROL),
        ).astype(numpy.int64)

    labels = (
        ExposureLabel(CONTROL, "control"),
        ExposureLabel(ISOLATED_DIRECT, "isolated direct"),
        ExposureLabel(INDIRECT, "indirect"),
        ExposureLabel(DIRECT_INDIRECT, "direct and indirect"),
    )
    return ExposureMapping(
        len(adjacency), "network", labels, rule, params={"adjacency": adjacency.tolist()}
    )


def make_table_mapping(rows, names=None, N=None) -> ExposureMapping:
    """An explicit table from assignments to exposure vectors; undefined elsewhere.

    >>> mapping = make_table_mapping({(0, 1): (1, 0), (1, 0): (0, 1)})
    >>> try:
    ...     apply_exposure(mapping, (1, 1))
    ... except dbinfer.ExposureError as error:
    ...     print(error.message)
    the table mapping is undefined at (1, 1)
    """
    table = {dbinfer.as_assignment(z): dbinfer.as_assignment(d) for z, d in dict(rows).items()}
    if not table:
        raise dbinfer.ExposureError("an exposure table needs at least one row")
    N = N or len(next(iter(table)))
    for z, d in table.items():
        if len(z) != N or len(d) != N:
            raise dbinfer.ExposureError(f"table row {z} -> {d} does not have length {N}")
    names = {int(k): v for k, v in (names or {}).items()}
    codes = sorted({a for d in table.values() for a in d} | set(names))

    def defined(vectors):
        return numpy.array([tuple(map(int, z)) in table for z in vectors], dtype=bool)

    def rule(vectors):
        return numpy.array([table[tuple(map(int, z))] for z in vectors], dtype=numpy.int64).reshape(
            len(vectors), N
        )

    return ExposureMapping(
        N,
        "table",
        tuple(ExposureLabel(a, names.get(a, "")) for a in codes),
        rule,
        defined=defined,
        params={"rows": [{"z": list(z), "d": list(d)} for z, d in table.items()]},
    )


class _Implementation:
    """Built in mapping kinds for the make_mapping hook."""

    @dbinfer.implementation
    def make_mapping(kind, N, document):
        if kind == "individualistic":
            return make_individualistic_mapping(N, document.get("levels", 2))
        if kind == "carryover":
            return make_carryover_mapping(N)
        if kind == "survey":
            return make_survey_indicator_mapping(N)
        if kind == "network":
            return make_network_mapping(document["adjacency"])
        if kind == "peer":
            return make_peer_mapping(document["permutation"], document.get("levels", 2))
        if kind == "table":
            table = document["table"]
            return make_table_mapping(
                {tuple(row["z"]): tuple(row["d"]) for row in table["rows"]},
                table.get("names"),
                N,
            )


dbinfer.manager.register(_Implementation, name=__name__)


def mapping_from_document(document) -> ExposureMapping:
    """Build a mapping from its JSON document through the make_mapping hook.

    >>> mapping_from_document({'kind': 'network', 'adjacency': [[0, 1], [1, 0]]}).kind
    'network'
    """
    dbinfer.manager.hook.validate_document(document=dict(document), schema=dbinfer.schema.MAPPING)
    document = munch.Munch.fromDict(dict(document))
    mapping = dbinfer.manager.hook.make_mapping(kind=document.kind, N=document.get("N"), document=document)
    if mapping is None:
        raise dbinfer.ExposureError(f"no mapping of kind {document.kind!r} is registered")
    return mapping


def mapping_to_document(mapping: ExposureMapping) -> dict:
    document = {"kind": mapping.kind}
    if mapping.N is not None:
        document["N"] = mapping.N
    if mapping.kind == "table":
        document["table"] = {
            "rows": mapping.params["rows"],
            "names": {str(label.code): label.name for label in mapping.labels if label.name},
        }
    elif mapping.kind == "individualistic":
        document["levels"] = mapping.params["levels"]
    else:
        document.update(mapping.params)
    return document
