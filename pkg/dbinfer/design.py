"""Designs: probability distributions over assignment vectors.

A design carries exact rational masses. Structured kinds (``bernoulli``, ``complete``,
``ordered_sample`` and ``cluster``) enumerate their support lazily and sample without
materializing it, so a design larger than the enumeration cap remains usable for sampling
while exact operations refuse it with an ``EnumerationCapError``.

Notes
-----
Unit indices are zero based throughout.

Examples
--------

    >>> household = make_explicit_design([(0, 1), (1, 0)], ['1/2', '1/2'], label='household')
    >>> assert validate_design(household)
    >>> list(enumerate_support(household))
    [((0, 1), Fraction(1, 2)), ((1, 0), Fraction(1, 2))]
    >>> make_ordered_sample_design(10, 3).size
    720
"""
import dataclasses
import functools
import itertools
import logging
import math
import typing

import munch
import numpy

import dbinfer

logger = logging.getLogger(__name__)

Fraction = dbinfer.Fraction

KINDS = ("explicit", "bernoulli", "complete", "ordered_sample", "cluster")

CHUNK = 65536


@dataclasses.dataclass(frozen=True)
class Design:
    """The joint probability mass function of the assignment vector.

Parameters
----------
N : int
    Population size.
kind : str
    One of ``KINDS``.
params : dict
    Parameters of a structured kind, e.g. ``{"p": Fraction(1, 2)}``.
label : str
vectors : tuple
    The support of an explicit design.
masses : tuple
    Exact rational masses parallel to ``vectors``.
    """

    N: int
    kind: str = "explicit"
    params: dict = dataclasses.field(default_factory=dict)
    label: str = ""
    vectors: tuple = ()
    masses: tuple = ()

    @functools.cached_property
    def size(self) -> int:
        """The number of support points, computed without enumeration."""
        if self.kind == "explicit":
            return len(self.vectors)
        if self.kind == "bernoulli":
            return 2 ** self.N
        if self.kind == "complete":
            return math.comb(self.N, self.params["m"])
        if self.kind == "ordered_sample":
            return math.perm(self.N, self.params["n"])
        if self.kind == "cluster":
            return math.comb(len(self.params["blocks"]), self.params["m"])
        raise dbinfer.DesignError(f"Unknown design kind {self.kind!r}.")

    @property
    def enumerable(self) -> bool:
        return self.size <= dbinfer.config.enumeration_cap()

    def require_enumerable(self):
        if not self.enumerable:
            raise dbinfer.EnumerationCapError(
                f"The {self.kind} design {self.label!r} has {self.size} support points, "
                f"more than the enumeration cap of {dbinfer.config.enumeration_cap()}."
            )
        return self

    @functools.cached_property
    def cluster_index(self) -> numpy.ndarray:
        """The position of each unit's cluster among the sorted cluster ids."""
        ids = numpy.asarray(self.params["clusters"])
        return numpy.searchsorted(numpy.asarray(self.params["blocks"]), ids)

    def chunks(self, size=CHUNK):
        """Yield the support as ``(vectors, masses)`` array pairs of at most ``size`` rows."""
        self.require_enumerable()
        pairs = enumerate_support(self)
        while True:
            block = list(itertools.islice(pairs, size))
            if not block:
                return
            vectors = numpy.array([z for z, _ in block], dtype=numpy.int64).reshape(
                len(block), self.N
            )
            masses = numpy.empty(len(block), dtype=object)
            masses[:] = [mass for _, mass in block]
            yield vectors, masses

    @functools.cached_property
    def support(self) -> typing.Tuple[numpy.ndarray, numpy.ndarray]:
        """The whole support as an ``(S, N)`` integer array and an ``(S,)`` mass array."""
        vectors, masses = zip(*self.chunks()) if self.size else ((), ())
        logger.debug("materialized %d support points of %r", self.size, self.label)
        return numpy.concatenate(vectors), numpy.concatenate(masses)

    def to_document(self) -> dict:
        return design_to_document(self)


def _check_count(name, value, low, high):
    if not isinstance(value, (int, numpy.integer)) or not low <= value <= high:
        raise dbinfer.DesignError(f"{name}={value!r} must be an integer in [{low}, {high}].")
    return int(value)


def _announce(design: Design) -> Design:
    if design.enumerable:
        logger.debug("%s design with %d support points", design.kind, design.size)
    else:
        logger.info(
            "%s design with %d support points exceeds the cap; sampling only",
            design.kind,
            design.size,
        )
    return design


def validate_design(design: Design) -> bool:
    """Accept a design iff every invariant holds, raising on the first violation.

Examples
--------

    >>> bad = Design(2, vectors=((0, 1), (1, 0)), masses=(Fraction(1, 2), Fraction(1, 4)))
    >>> try:
    ...     validate_design(bad)
    ... except dbinfer.DesignError as error:
    ...     print(error.message)
    masses sum to 3/4, not 1
    """
    if design.kind not in KINDS:
        raise dbinfer.DesignError(f"unknown design kind {design.kind!r}")
    if design.kind != "explicit":
        return True
    if len(design.vectors) != len(design.masses):
        raise dbinfer.DesignError("support and masses differ in length")
    if not design.vectors:
        raise dbinfer.DesignError("the support is empty")
    seen = set()
    for z in design.vectors:
        if len(z) != design.N:
            raise dbinfer.DesignError(f"support vector {z} does not have length {design.N}")
        if any(x < 0 for x in z):
            raise dbinfer.DesignError(f"support vector {z} has a negative code")
        if z in seen:
            raise dbinfer.DesignError(f"duplicate support vector {z}")
        seen.add(z)
    for z, mass in zip(design.vectors, design.masses):
        if mass <= 0:
            raise dbinfer.DesignError(f"support vector {z} has non-positive mass {mass}")
    total = sum(design.masses, Fraction(0))
    if total != 1:
        raise dbinfer.DesignError(f"masses sum to {total}, not 1")
    return True


def make_explicit_design(support, masses, N=None, label="", validate=True) -> Design:
    """A design from parallel lists of support vectors and masses."""
    vectors = tuple(dbinfer.as_assignment(z) for z in support)
    masses = tuple(dbinfer.as_fraction(mass) for mass in masses)
    if N is None:
        N = len(vectors[0]) if vectors else 0
    design = Design(N=N, vectors=vectors, masses=masses, label=label)
    if validate:
        validate_design(design)
    return design


def make_uniform_design(support, label="") -> Design:
    """Uniform mass over distinct vectors.

    >>> make_uniform_design([(0, 0), (1, 1)]).masses
    (Fraction(1, 2), Fraction(1, 2))
    """
    support = list(support)
    if not support:
        raise dbinfer.DesignError("the support is empty")
    return make_explicit_design(support, [Fraction(1, len(support))] * len(support), label=label)


def make_bernoulli_design(N, p, label="") -> Design:
    """Independent assignment of every unit to treatment with probability ``p``.

    >>> design = make_bernoulli_design(2, '1/4')
    >>> dict(enumerate_support(design))[(1, 1)], dict(enumerate_support(design))[(0, 0)]
    (Fraction(1, 16), Fraction(9, 16))
    """
    N = _check_count("N", N, 1, math.inf)
    p = dbinfer.as_fraction(p)
    if not 0 < p < 1:
        raise dbinfer.DesignError(f"p={p} must lie strictly between 0 and 1.")
    return _announce(
        Design(N=N, kind="bernoulli", params={"p": p}, label=label or f"bernoulli({N}, {p})")
    )


def make_complete_randomization(N, m, label="") -> Design:
    """Exactly ``m`` of ``N`` units treated, every such vector equally likely."""
    N = _check_count("N", N, 1, math.inf)
    m = _check_count("m", m, 0, N)
    return _announce(
        Design(N=N, kind="complete", params={"m": m}, label=label or f"complete({N}, {m})")
    )


def make_ordered_sample_design(N, n, label="") -> Design:
    """An ordered sample of ``n`` distinct units; the ``k``-th sampled unit gets code ``k``."""
    N = _check_count("N", N, 1, math.inf)
    n = _check_count("n", n, 1, N)
    return _announce(
        Design(
            N=N, kind="ordered_sample", params={"n": n}, label=label or f"ordered({N}, {n})"
        )
    )


def make_cluster_randomization(clusters, m, label="") -> Design:
    """Complete randomization of ``m`` whole clusters; units inherit their cluster's code.

Parameters
----------
clusters : sequence
    The cluster id of every unit.
m : int
    The number of treated clusters.

Examples
--------

    >>> design = make_cluster_randomization([0, 0, 1, 1], 1)
    >>> [z for z, _ in enumerate_support(design)]
    [(1, 1, 0, 0), (0, 0, 1, 1)]
    """
    clusters = tuple(int(c) for c in clusters)
    if not clusters:
        raise dbinfer.DesignError("a cluster design needs at least one unit")
    blocks = tuple(sorted(set(clusters)))
    m = _check_count("m", m, 0, len(blocks))
    return _announce(
        Design(
            N=len(clusters),
            kind="cluster",
            params={"clusters": clusters, "blocks": blocks, "m": m},
            label=label or f"cluster({len(blocks)}, {m})",
        )
    )


def enumerate_support(design: Design) -> typing.Iterator[typing.Tuple[tuple, Fraction]]:
    """Yield every ``(assignment, mass)`` pair exactly once."""
    design.require_enumerable()
    N = design.N
    if design.kind == "explicit":
        yield from zip(design.vectors, design.masses)
    elif design.kind == "bernoulli":
        p = design.params["p"]
        powers = [p ** k * (1 - p) ** (N - k) for k in range(N + 1)]
        for z in itertools.product((0, 1), repeat=N):
            yield z, powers[sum(z)]
    elif design.kind == "complete":
        mass = Fraction(1, design.size)
        for treated in itertools.combinations(range(N), design.params["m"]):
            z = [0] * N
            for i in treated:
                z[i] = 1
            yield tuple(z), mass
    elif design.kind == "ordered_sample":
        mass = Fraction(1, design.size)
        for order in itertools.permutations(range(N), design.params["n"]):
            z = [0] * N
            for position, i in enumerate(order, 1):
                z[i] = position
            yield tuple(z), mass
    elif design.kind == "cluster":
        mass = Fraction(1, design.size)
        index = design.cluster_index
        for treated in itertools.combinations(range(len(design.params["blocks"])), design.params["m"]):
            on = numpy.zeros(len(design.params["blocks"]), dtype=numpy.int64)
            on[list(treated)] = 1
            yield dbinfer.as_assignment(on[index]), mass


def sample_assignments(design: Design, seed, size=1) -> numpy.ndarray:
    """Draw ``size`` assignment vectors as a ``(size, N)`` integer array.

Rational masses are sampled with integer arithmetic whenever their common denominator
fits in 63 bits.

Parameters
----------
seed : int or numpy.random.SeedSequence or numpy.random.Generator
    """
    rng = numpy.random.default_rng(seed)
    N = design.N
    if design.kind == "explicit":
        support = numpy.asarray(design.vectors, dtype=numpy.int64).reshape(-1, N)
        common = math.lcm(*(mass.denominator for mass in design.masses))
        if common < 2 ** 63:
            weights = numpy.array(
                [mass.numerator * (common // mass.denominator) for mass in design.masses],
                dtype=numpy.int64,
            )
            draws = rng.integers(0, common, size=size)
            index = numpy.searchsorted(numpy.cumsum(weights), draws, side="right")
        else:
            index = rng.choice(len(support), size=size, p=numpy.array(design.masses, dtype=float))
        return support[index]
    if design.kind == "bernoulli":
        p = design.params["p"]
        if p.denominator < 2 ** 63:
            return (rng.integers(0, p.denominator, size=(size, N)) < p.numerator).astype(numpy.int64)
        return (rng.random((size, N)) < float(p)).astype(numpy.int64)
    if design.kind in ("complete", "ordered_sample"):
        if design.kind == "complete":
            base = numpy.r_[numpy.ones(design.params["m"]), numpy.zeros(N - design.params["m"])]
        else:
            base = numpy.r_[numpy.arange(1, design.params["n"] + 1), numpy.zeros(N - design.params["n"])]
        return rng.permuted(numpy.tile(base.astype(numpy.int64), (size, 1)), axis=1)
    if design.kind == "cluster":
        K, m = len(design.params["blocks"]), design.params["m"]
        base = numpy.r_[numpy.ones(m), numpy.zeros(K - m)].astype(numpy.int64)
        return rng.permuted(numpy.tile(base, (size, 1)), axis=1)[:, design.cluster_index]
    raise dbinfer.DesignError(f"Unknown design kind {design.kind!r}.")


def sample_assignment(design: Design, seed) -> tuple:
    """One draw; identical seeds give identical draws.

    >>> sample_assignment(make_explicit_design([(1, 1)], [1]), 3)
    (1, 1)
    """
    return dbinfer.as_assignment(sample_assignments(design, seed, 1)[0])


@dataclasses.dataclass(frozen=True)
class CodeProbabilities:
    """Closed form probabilities of single and paired assignment codes.

Units sharing a block (a cluster, or just themselves) share their code; units in different
blocks are coded jointly according to ``pair``.
    """

    N: int
    codes: tuple
    marginal: dict
    pair: dict
    blocks: numpy.ndarray

    def marginal_vector(self, codes) -> numpy.ndarray:
        value = sum((self.marginal.get(a, 0) for a in codes), Fraction(0))
        return numpy.full(self.N, value, dtype=object)

    def joint_matrix(self, codes, other) -> numpy.ndarray:
        across = sum((self.pair.get((a, b), 0) for a in codes for b in other), Fraction(0))
        within = sum((self.marginal.get(a, 0) for a in set(codes) & set(other)), Fraction(0))
        same = self.blocks[:, None] == self.blocks[None, :]
        out = numpy.empty((self.N, self.N), dtype=object)
        out[...] = across
        out[same] = within
        return out


def _draw_without_replacement(M, m):
    """Pair probabilities of two distinct slots when ``m`` of ``M`` are treated."""
    if M < 2:
        return {}
    both = Fraction(m * (m - 1), M * (M - 1))
    mixed = Fraction(m * (M - m), M * (M - 1))
    neither = Fraction((M - m) * (M - m - 1), M * (M - 1))
    return {(1, 1): both, (1, 0): mixed, (0, 1): mixed, (0, 0): neither}


def code_probabilities(design: Design) -> CodeProbabilities:
    """Closed form ``P(z_i = a)`` and ``P(z_i = a, z_j = b)`` for a structured design.

Examples
--------

    >>> probabilities = code_probabilities(make_ordered_sample_design(10, 3))
    >>> probabilities.marginal[2], probabilities.pair[1, 2], probabilities.pair[1, 1]
    (Fraction(1, 10), Fraction(1, 90), Fraction(0, 1))
    """
    N = design.N
    units = numpy.arange(N)
    if design.kind == "bernoulli":
        p = design.params["p"]
        marginal = {0: 1 - p, 1: p}
        pair = {(a, b): marginal[a] * marginal[b] for a in (0, 1) for b in (0, 1)}
        return CodeProbabilities(N, (0, 1), marginal, pair, units)
    if design.kind == "complete":
        m = design.params["m"]
        marginal = {0: Fraction(N - m, N), 1: Fraction(m, N)}
        return CodeProbabilities(N, (0, 1), marginal, _draw_without_replacement(N, m), units)
    if design.kind == "cluster":
        K, m = len(design.params["blocks"]), design.params["m"]
        marginal = {0: Fraction(K - m, K), 1: Fraction(m, K)}
        return CodeProbabilities(
            N, (0, 1), marginal, _draw_without_replacement(K, m), design.cluster_index
        )
    if design.kind == "ordered_sample":
        n = design.params["n"]
        codes = tuple(range(n + 1))
        marginal = {0: Fraction(N - n, N), **{k: Fraction(1, N) for k in codes[1:]}}
        pair = {}
        if N > 1:
            for a, b in itertools.product(codes, codes):
                if a and b:
                    pair[a, b] = Fraction(0) if a == b else Fraction(1, N * (N - 1))
                elif a or b:
                    pair[a, b] = Fraction(N - n, N * (N - 1))
                else:
                    pair[a, b] = Fraction((N - n) * (N - n - 1), N * (N - 1))
        return CodeProbabilities(N, codes, marginal, pair, units)
    raise dbinfer.DesignError(f"No closed form code probabilities for {design.kind!r} designs.")


@dataclasses.dataclass(frozen=True)
class DesignSpace:
    """The feasible assignment vectors, a superset of any paired design's support.

Examples
--------

    >>> DesignSpace.ordered(10, 3, upto=True).size
    821
    >>> (2, 0, 1) in DesignSpace.product(3, 3)
    True
    """

    N: int
    rule: str = "product"
    levels: int = 2
    k: int = 0
    upto: bool = False
    explicit_vectors: tuple = ()

    @classmethod
    def product(cls, N, levels=2):
        return cls(N=N, rule="product", levels=levels)

    @classmethod
    def ordered(cls, N, k, upto=False):
        return cls(N=N, rule="ordered", k=k, upto=upto)

    @classmethod
    def explicit(cls, vectors, N=None):
        vectors = tuple(dbinfer.as_assignment(z) for z in vectors)
        return cls(N=N if N is not None else len(vectors[0]), rule="explicit", explicit_vectors=vectors)

    @functools.cached_property
    def size(self) -> int:
        if self.rule == "product":
            return self.levels ** self.N
        if self.rule == "ordered":
            start = 0 if self.upto else self.k
            return sum(math.perm(self.N, j) for j in range(start, self.k + 1))
        return len(self.explicit_vectors)

    def __iter__(self):
        if self.size > dbinfer.config.enumeration_cap():
            raise dbinfer.EnumerationCapError(
                f"The design space has {self.size} vectors, more than the enumeration cap."
            )
        if self.rule == "product":
            yield from itertools.product(range(self.levels), repeat=self.N)
        elif self.rule == "ordered":
            for j in range(0 if self.upto else self.k, self.k + 1):
                for order in itertools.permutations(range(self.N), j):
                    z = [0] * self.N
                    for position, i in enumerate(order, 1):
                        z[i] = position
                    yield tuple(z)
        else:
            yield from self.explicit_vectors

    def __contains__(self, z):
        return bool(self.contains(numpy.asarray(z)[None, :])[0])

    def contains(self, vectors) -> numpy.ndarray:
        """Row-wise membership of an ``(S, N)`` array."""
        vectors = numpy.asarray(vectors, dtype=numpy.int64)
        if vectors.ndim != 2 or vectors.shape[1] != self.N:
            return numpy.zeros(len(vectors), dtype=bool)
        if self.rule == "product":
            return ((vectors >= 0) & (vectors < self.levels)).all(axis=1)
        if self.rule == "ordered":
            picked = (vectors > 0).sum(axis=1)
            ordered = numpy.sort(vectors, axis=1)[:, ::-1]
            ranks = numpy.arange(self.N, 0, -1)[None, :] - (self.N - picked)[:, None]
            valid = numpy.where(numpy.arange(self.N)[None, :] < picked[:, None], ordered == ranks, ordered == 0)
            fits = picked <= self.k if self.upto else picked == self.k
            return valid.all(axis=1) & fits & (vectors >= 0).all(axis=1)
        members = set(self.explicit_vectors)
        return numpy.array([tuple(map(int, z)) in members for z in vectors], dtype=bool)

    def vectors(self) -> numpy.ndarray:
        return numpy.array(list(self), dtype=numpy.int64).reshape(-1, self.N)

    def check_pairing(self, design: Design) -> bool:
        """Raise unless every support vector of ``design`` is feasible."""
        if design.N != self.N:
            raise dbinfer.DesignError(f"the design has N={design.N} but the space has N={self.N}")
        for vectors, _ in design.chunks():
            inside = self.contains(vectors)
            if not inside.all():
                z = dbinfer.as_assignment(vectors[numpy.argmin(inside)])
                raise dbinfer.DesignError(f"support vector {z} lies outside the design space")
        return True

    def to_document(self) -> dict:
        document = {"N": self.N, "rule": self.rule}
        if self.rule == "product":
            document["levels"] = self.levels
        elif self.rule == "ordered":
            document.update(k=self.k, upto=self.upto)
        else:
            document["vectors"] = [list(z) for z in self.explicit_vectors]
        return document


def space_from_document(document) -> DesignSpace:
    dbinfer.manager.hook.validate_document(document=dict(document), schema=dbinfer.schema.SPACE)
    document = munch.Munch.fromDict(dict(document))
    if document.rule == "product":
        return DesignSpace.product(document.N, document.get("levels", 2))
    if document.rule == "ordered":
        return DesignSpace.ordered(document.N, document.get("k", 0), document.get("upto", False))
    return DesignSpace.explicit(document.vectors, N=document.N)


def design_from_document(document) -> Design:
    """Build and validate a design from its JSON document.

    >>> design_from_document({'N': 4, 'kind': 'bernoulli', 'params': {'p': '1/2'}}).size
    16
    """
    dbinfer.manager.hook.validate_document(document=dict(document), schema=dbinfer.schema.DESIGN)
    document = munch.Munch.fromDict(dict(document))
    label, params = document.get("label", ""), document.get("params", {})
    try:
        if document.kind == "explicit":
            if not len(document.support) == len(document.mass_num) == len(document.mass_den):
                raise dbinfer.DesignError("support, mass_num and mass_den differ in length")
            masses = [Fraction(a, b) for a, b in zip(document.mass_num, document.mass_den)]
            return make_explicit_design(document.support, masses, N=document.N, label=label)
        if document.kind == "bernoulli":
            return make_bernoulli_design(document.N, params["p"], label=label)
        if document.kind == "complete":
            return make_complete_randomization(document.N, params["m"], label=label)
        if document.kind == "ordered_sample":
            return make_ordered_sample_design(document.N, params["n"], label=label)
        clusters = params["clusters"]
        if len(clusters) != document.N:
            raise dbinfer.DesignError("clusters must name one cluster per unit")
        return make_cluster_randomization(clusters, params["m"], label=label)
    except KeyError as error:
        raise dbinfer.DesignError(f"the {document.kind} design is missing parameter {error}")


def design_to_document(design: Design) -> dict:
    document = {"N": design.N, "kind": design.kind, "label": design.label}
    if design.kind == "explicit":
        document.update(
            support=[list(z) for z in design.vectors],
            mass_num=[mass.numerator for mass in design.masses],
            mass_den=[mass.denominator for mass in design.masses],
        )
    elif design.kind == "bernoulli":
        document["params"] = {"p": str(design.params["p"])}
    elif design.kind == "cluster":
        document["params"] = {"clusters": list(design.params["clusters"]), "m": design.params["m"]}
    else:
        document["params"] = dict(design.params)
    return document
