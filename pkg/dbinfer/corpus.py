"""The compiled in example corpus.

Every instance is a design, a design space, an exposure mapping and an outcome schedule.

Attributes
----------
DESCRIPTIONS : dict
    A one line description of every built in instance.

Examples
--------

    >>> design, space, mapping, schedule = load_corpus('household')
    >>> design.masses
    (Fraction(1, 2), Fraction(1, 2))
    >>> sorted(names())[:3]
    ['campaign-ad', 'campaign-ad-uniform', 'hidden-variation']
"""
import itertools
import logging
import typing

import networkx

import dbinfer

logger = logging.getLogger(__name__)

Fraction = dbinfer.Fraction
HALF = Fraction(1, 2)

SPLIT = [(0, 1), (1, 0)]
TOGETHER = [(0, 0), (1, 1)]
BINARY_PAIRS = list(itertools.product((0, 1), repeat=2))

HOUSEHOLD = {(0, 0): (0, 0), (0, 1): (1, 0), (1, 0): (0, 1), (1, 1): (1, 1)}
JOB_TRAINING = {(0, 0): (HALF, HALF), (0, 1): (0, 1), (1, 0): (1, 0), (1, 1): (HALF, HALF)}
CAMPAIGN_AD = {(0, 0): (0, 0), (0, 1): (0, 0), (1, 0): (0, 0), (1, 1): (-1, -1)}

REBEL_MEMBERS = (420, 35, 1280, 96, 210, 58, 730, 15, 300, 144)
VOTER_BASELINE = (12, 9, 15, 11)
VOTER_EFFECT = 6
VOLUNTEER_EDGES = [
    (0, 1), (0, 2), (1, 2), (1, 3), (2, 4), (3, 4),
    (3, 5), (4, 6), (5, 6), (5, 7), (6, 8), (7, 9), (8, 9),
]
VOLUNTEER_BASELINE = (0, 0, 1, 0, 0, 0, 0, 1, 0, 0)
VOLUNTEER_SUSCEPTIBLE = (1, 1, 0, 1, 0, 1, 1, 1, 0, 1)
HIDDEN_VALUES = ((0, 1, 3), (2, 3, 6), (1, 2, 5))
SRSWOR_VALUES = (3, 1, 4, 1)

DESCRIPTIONS = {
    "household": "Two person household, one of the pair is encouraged to vote.",
    "household-swapped": "The household with each person's exposure taken from their partner.",
    "household-alt1": "The household under a design treating both or neither.",
    "household-alt2": "The household under a uniform design over all four assignments.",
    "job-training": "Two job seekers, exactly one is trained; jobs go to the trained first.",
    "job-training-uniform": "Job training delivered to both or neither seeker.",
    "campaign-ad": "Two campaigns, exactly one advertises; ads backfire when both do.",
    "campaign-ad-uniform": "Both campaigns advertise or neither does.",
    "rebel-survey": "Ordered survey of three of ten rebel groups; membership is recorded when surveyed.",
    "voter-registration": "Four days of registration drives with one day carryover, individualistic exposure.",
    "voter-carryover": "The registration drives with the carryover exposure mapping.",
    "network-volunteering": "Ten peers on a fixed network, two randomly encouraged to volunteer.",
    "hidden-variation": "Three units, two treatment versions collapsed into one exposure.",
    "srswor": "Simple random sample of two of four units with recorded values.",
}


class Instance(typing.NamedTuple):
    design: "dbinfer.design.Design"
    space: "dbinfer.design.DesignSpace"
    mapping: "dbinfer.exposure.ExposureMapping"
    schedule: "dbinfer.outcomes.OutcomeSchedule"


def _household(support, mapping, label):
    return Instance(
        dbinfer.design.make_explicit_design(support, [Fraction(1, len(support))] * len(support), label=label),
        dbinfer.design.DesignSpace.product(2),
        mapping,
        dbinfer.outcomes.make_table_schedule(HOUSEHOLD),
    )


def _two_person(rows, support, label):
    return Instance(
        dbinfer.design.make_uniform_design(support, label=label),
        dbinfer.design.DesignSpace.product(2),
        dbinfer.exposure.make_individualistic_mapping(2),
        dbinfer.outcomes.make_table_schedule(rows),
    )


def _rebel_survey():
    space = dbinfer.design.DesignSpace.ordered(10, 3, upto=True)
    return Instance(
        dbinfer.design.make_ordered_sample_design(10, 3, label="rebel-survey"),
        space,
        dbinfer.exposure.make_survey_indicator_mapping(10),
        dbinfer.outcomes.make_rule_schedule("survey", {"members": list(REBEL_MEMBERS)}, domain=space),
    )


def _voter(mapping, label):
    space = dbinfer.design.DesignSpace.product(4)
    return Instance(
        dbinfer.design.make_bernoulli_design(4, HALF, label=label),
        space,
        mapping,
        dbinfer.outcomes.make_rule_schedule(
            "carryover", {"baseline": list(VOTER_BASELINE), "effect": VOTER_EFFECT}, domain=space
        ),
    )


def volunteer_network() -> networkx.Graph:
    graph = networkx.Graph()
    graph.add_nodes_from(range(10))
    graph.add_edges_from(VOLUNTEER_EDGES)
    return graph


def _network_volunteering():
    space = dbinfer.design.DesignSpace.product(10)
    adjacency = dbinfer.exposure.adjacency_matrix(volunteer_network())
    return Instance(
        dbinfer.design.make_complete_randomization(10, 2, label="network-volunteering"),
        space,
        dbinfer.exposure.make_network_mapping(adjacency),
        dbinfer.outcomes.make_rule_schedule(
            "network",
            {
                "adjacency": adjacency.tolist(),
                "baseline": list(VOLUNTEER_BASELINE),
                "susceptible": list(VOLUNTEER_SUSCEPTIBLE),
            },
            domain=space,
        ),
    )


def _hidden_variation():
    space = dbinfer.design.DesignSpace.product(3, levels=3)
    return Instance(
        dbinfer.design.make_bernoulli_design(3, HALF, label="hidden-variation"),
        space,
        dbinfer.exposure.make_survey_indicator_mapping(3, names={0: "control", 1: "treated"}),
        dbinfer.outcomes.make_rule_schedule(
            "no-interference", {"values": [list(row) for row in HIDDEN_VALUES]}, domain=space
        ),
    )


def _srswor():
    space = dbinfer.design.DesignSpace.product(4)
    return Instance(
        dbinfer.design.make_complete_randomization(4, 2, label="srswor"),
        space,
        dbinfer.exposure.make_survey_indicator_mapping(4),
        dbinfer.outcomes.make_rule_schedule("survey", {"members": list(SRSWOR_VALUES)}, domain=space),
    )


BUILDERS = {
    "household": lambda: _household(SPLIT, dbinfer.exposure.make_individualistic_mapping(2), "household"),
    "household-swapped": lambda: _household(
        SPLIT, dbinfer.exposure.make_peer_mapping((1, 0)), "household-swapped"
    ),
    "household-alt1": lambda: _household(
        TOGETHER, dbinfer.exposure.make_individualistic_mapping(2), "household-alt1"
    ),
    "household-alt2": lambda: _household(
        BINARY_PAIRS, dbinfer.exposure.make_individualistic_mapping(2), "household-alt2"
    ),
    "job-training": lambda: _two_person(JOB_TRAINING, SPLIT, "job-training"),
    "job-training-uniform": lambda: _two_person(JOB_TRAINING, TOGETHER, "job-training-uniform"),
    "campaign-ad": lambda: _two_person(CAMPAIGN_AD, SPLIT, "campaign-ad"),
    "campaign-ad-uniform": lambda: _two_person(CAMPAIGN_AD, TOGETHER, "campaign-ad-uniform"),
    "rebel-survey": _rebel_survey,
    "voter-registration": lambda: _voter(
        dbinfer.exposure.make_individualistic_mapping(4), "voter-registration"
    ),
    "voter-carryover": lambda: _voter(dbinfer.exposure.make_carryover_mapping(4), "voter-carryover"),
    "network-volunteering": _network_volunteering,
    "hidden-variation": _hidden_variation,
    "srswor": _srswor,
}


class _Implementation:
    """The built in corpus for the load_corpus and corpus_names hooks."""

    @dbinfer.implementation
    def load_corpus(name):
        if name in BUILDERS:
            return BUILDERS[name]()

    @dbinfer.implementation
    def corpus_names():
        return list(BUILDERS)


dbinfer.manager.register(_Implementation, name=__name__)


def names() -> typing.List[str]:
    """Every corpus name known to the plugin manager."""
    return sorted(set(itertools.chain.from_iterable(dbinfer.manager.hook.corpus_names())))


def load_corpus(name) -> Instance:
    """The design, design space, mapping and schedule of a named example."""
    instance = dbinfer.manager.hook.load_corpus(name=name)
    if instance is None:
        raise dbinfer.ValidationError(f"unknown corpus {name!r}; choose from {', '.join(names())}")
    logger.debug("loaded corpus %s", name)
    return Instance(*instance)
