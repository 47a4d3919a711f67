import fractions
import itertools
import math
import subprocess
import sys

import hypothesis
import hypothesis.strategies as st
import numpy
import pytest
import scipy.stats

import dbinfer

Fraction = fractions.Fraction


def load(name):
    return dbinfer.corpus.load_corpus(name)


@pytest.mark.parametrize(
    "name, expected",
    [
        ("household", -1),
        ("household-alt1", 1),
        ("household-alt2", 0),
        ("job-training", 1),
        ("job-training-uniform", 0),
        ("campaign-ad", 0),
        ("campaign-ad-uniform", -1),
    ],
)
def test_aeed_of_the_two_person_tables(name, expected):
    design, space, mapping, schedule = load(name)
    assert dbinfer.estimands.aeed(design, mapping, schedule, 1, 0) == Fraction(expected)


@pytest.mark.parametrize("support", [[(0, 0), (1, 1)], list(itertools.product((0, 1), repeat=2))])
def test_swapped_mapping_under_the_alternate_designs(support):
    design, space, mapping, schedule = load("household-swapped")
    alternate = dbinfer.design.make_uniform_design(support)
    assert dbinfer.estimands.aeed(alternate, mapping, schedule, 1, 0) == 1


def test_household_epos():
    design, space, mapping, schedule = load("household")
    assert dbinfer.estimands.unit_epos(design, mapping, schedule, 1).tolist() == [0, 0]
    assert dbinfer.estimands.unit_epos(design, mapping, schedule, 0).tolist() == [1, 1]
    assert dbinfer.estimands.eed(design, mapping, schedule, 1, 1, 0) == -1


def test_carryover_probabilities():
    design, space, mapping, schedule = load("voter-carryover")
    probs = dbinfer.estimands.exposure_probabilities(design, mapping, 1)
    assert probs.pi(1).tolist() == [Fraction(1, 2), Fraction(3, 4), Fraction(3, 4), Fraction(3, 4)]
    assert probs.provenance.kind == "exact-enumeration"


def test_rebel_survey_probabilities():
    design, space, mapping, schedule = load("rebel-survey")
    vectors, masses = design.support
    assert len(vectors) == 720
    assert set(masses.tolist()) == {Fraction(math.factorial(7), math.factorial(10))}
    probs = dbinfer.estimands.exposure_probabilities(design, mapping, 1)
    assert probs.pi(1).tolist() == [Fraction(3, 10)] * 10


def test_analytic_probabilities_agree_with_enumeration():
    design, space, mapping, schedule = load("rebel-survey")
    enumerated = dbinfer.estimands.exposure_probabilities(design, mapping, (0, 1))
    analytic = dbinfer.estimands.exposure_probabilities(design, mapping, (0, 1), method="analytic")
    assert analytic.provenance.kind == "analytic"
    for d, e in itertools.product((0, 1), repeat=2):
        assert (enumerated.pi_joint(d, e) == analytic.pi_joint(d, e)).all()


def test_monte_carlo_probabilities_carry_their_error():
    design, space, mapping, schedule = load("household")
    probs = dbinfer.estimands.exposure_probabilities(design, mapping, 1, method="monte-carlo", R=4000, seed=0)
    assert probs.provenance.kind == "monte-carlo"
    assert numpy.all(numpy.abs(probs.pi(1).astype(float) - 0.5) <= probs.provenance.half_width)


def test_cap_makes_designs_sampler_only(monkeypatch):
    monkeypatch.setenv(dbinfer.config.CAP_VARIABLE, "10")
    design, space, mapping, schedule = load("rebel-survey")
    fresh = dbinfer.design.make_ordered_sample_design(10, 3)
    assert not fresh.enumerable
    with pytest.raises(dbinfer.EnumerationCapError):
        dbinfer.estimands.aepo(fresh, mapping, schedule, 1)
    probs = dbinfer.estimands.exposure_probabilities(fresh, mapping, 1)
    assert probs.provenance.kind == "analytic"
    assert probs.pi(1).tolist() == [Fraction(3, 10)] * 10


def test_household_assumptions():
    design, space, mapping, schedule = load("household")
    assert dbinfer.assumptions.check_nurva(design, mapping, schedule).holds
    verdict = dbinfer.assumptions.check_sutva(space, mapping, schedule)
    assert not verdict.holds
    found = verdict.counterexample
    assert (found.unit, found.z, found.z_prime) == (0, (1, 0), (1, 1))
    assert (found.y, found.y_prime) == (0, 1)
    assert dbinfer.assumptions.verify_counterexample(mapping, schedule, found)


def test_swapping_restores_sutva():
    design, space, mapping, schedule = load("household-swapped")
    assert dbinfer.assumptions.check_nurva(design, mapping, schedule).holds
    assert dbinfer.assumptions.check_sutva(space, mapping, schedule).holds


def test_hidden_variation():
    design, space, mapping, schedule = load("hidden-variation")
    assert dbinfer.assumptions.check_nurva(design, mapping, schedule).holds
    verdict = dbinfer.assumptions.check_sutva(space, mapping, schedule)
    assert not verdict.holds
    assert dbinfer.assumptions.verify_counterexample(mapping, schedule, verdict.counterexample)
    assert mapping.name(verdict.counterexample.label) == "treated"


def test_nurva_fails_under_the_uniform_household_design():
    design, space, mapping, schedule = load("household-alt2")
    verdict = dbinfer.assumptions.check_nurva(design, mapping, schedule)
    assert not verdict.holds
    with pytest.raises(dbinfer.AssumptionError):
        dbinfer.estimation.ht_variance_true(design, mapping, schedule, 1)


def _positive_labels(design, mapping, schedule):
    for d in mapping.codes:
        try:
            yield d, dbinfer.estimands.aepo(design, mapping, schedule, d)
        except dbinfer.PositivityError:
            continue


@pytest.mark.parametrize("name", dbinfer.corpus.names())
def test_ht_is_unbiased_over_the_corpus(name):
    design, space, mapping, schedule = load(name)
    truths = dict(_positive_labels(design, mapping, schedule))
    assert truths
    for d, truth in truths.items():
        config = dbinfer.montecarlo.EstimatorConfig(labels=(d,))
        assert dbinfer.montecarlo.exact_expectation(design, mapping, schedule, config) == truth
    for d, e in itertools.permutations(truths, 2):
        config = dbinfer.montecarlo.EstimatorConfig(target="aeed", labels=(d, e))
        assert dbinfer.montecarlo.exact_expectation(design, mapping, schedule, config) == truths[d] - truths[e]


@pytest.mark.parametrize("name", dbinfer.corpus.names())
def test_conservative_variance_over_the_corpus(name):
    design, space, mapping, schedule = load(name)
    for d, _ in _positive_labels(design, mapping, schedule):
        if not dbinfer.assumptions.check_nurva(design, mapping, schedule, labels=[d]).holds:
            continue
        config = dbinfer.montecarlo.EstimatorConfig(labels=(d,), statistic="conservative")
        expected = dbinfer.montecarlo.exact_expectation(design, mapping, schedule, config)
        assert expected >= dbinfer.estimation.ht_variance_true(design, mapping, schedule, d)


@hypothesis.settings(max_examples=50, deadline=None)
@hypothesis.given(N=st.sampled_from([4, 6, 8, 10]), seed=st.integers(0, 2 ** 32 - 1))
def test_conservative_variance_under_partial_interference(N, seed):
    population = dbinfer.generators.make_population("partial-interference", N, seed)
    design, mapping, schedule = population.design, population.mapping, population.schedule
    for labels in [(1,), (0,), (1, 0)]:
        target = "aepo" if len(labels) == 1 else "aeed"
        config = dbinfer.montecarlo.EstimatorConfig(target=target, labels=labels, statistic="conservative")
        expected = dbinfer.montecarlo.exact_expectation(design, mapping, schedule, config)
        true = dbinfer.estimation.ht_variance_true(design, mapping, schedule, *labels, epos=population.epos)
        assert expected >= true


def test_partial_interference_truth_matches_enumeration():
    population = dbinfer.generators.make_population("partial-interference", 8, 3)
    for d in (0, 1):
        assert dbinfer.estimands.aepo(population.design, population.mapping, population.schedule, d) == population.truth[d]


def _unbiased_variance(design, mapping, schedule, labels):
    target = "aepo" if len(labels) == 1 else "aeed"
    config = dbinfer.montecarlo.EstimatorConfig(target=target, labels=labels, statistic="ht_variance")
    return dbinfer.montecarlo.exact_expectation(design, mapping, schedule, config)


def test_unbiased_variance_on_the_carryover_drives():
    design, space, mapping, schedule = load("voter-carryover")
    for d in (0, 1):
        assert _unbiased_variance(design, mapping, schedule, (d,)) == dbinfer.estimation.ht_variance_true(
            design, mapping, schedule, d
        )


@hypothesis.settings(max_examples=20, deadline=None)
@hypothesis.given(N=st.integers(2, 8), seed=st.integers(0, 2 ** 32 - 1))
def test_unbiased_variance_under_bernoulli(N, seed):
    population = dbinfer.generators.make_population("no-interference", N, seed)
    design, mapping, schedule = population.design, population.mapping, population.schedule
    for d in (0, 1):
        true = dbinfer.estimation.ht_variance_true(design, mapping, schedule, d)
        assert abs(float(_unbiased_variance(design, mapping, schedule, (d,)) - true)) <= 1e-12


def test_refusal_when_pairs_are_never_jointly_exposed():
    design, space, mapping, schedule = load("household")
    probs = dbinfer.estimands.exposure_probabilities(design, mapping, 1)
    data = dbinfer.outcomes.observe(schedule, mapping, (1, 0))
    with pytest.raises(dbinfer.RefusalError) as error:
        dbinfer.estimation.ht_variance_estimate(data.y, data.d, probs, 1)
    assert error.value.pairs
    assert dbinfer.estimation.conservative_variance_estimate(data.y, data.d, probs, 1) >= 0


@hypothesis.settings(max_examples=100, deadline=None)
@hypothesis.given(
    N=st.integers(2, 20), data=st.data(), seed=st.integers(0, 2 ** 32 - 1)
)
def test_srswor_estimate_is_the_sample_mean(N, data, seed):
    n = data.draw(st.integers(1, N - 1))
    values = data.draw(st.lists(st.integers(-50, 50), min_size=N, max_size=N))
    design = dbinfer.design.make_complete_randomization(N, n)
    mapping = dbinfer.exposure.make_survey_indicator_mapping(N)
    schedule = dbinfer.outcomes.make_rule_schedule("survey", {"members": values}, N=N)
    probs = dbinfer.estimands.exposure_probabilities(design, mapping, 1, method="analytic")
    observed = dbinfer.outcomes.observe(schedule, mapping, dbinfer.design.sample_assignment(design, seed))
    report = dbinfer.estimation.aepo_estimate_with_variance(observed.y, observed.d, probs, 1)
    assert abs(float(report.point - report.sample_mean)) <= 1e-12


def test_srswor_corpus_instance():
    design, space, mapping, schedule = load("srswor")
    probs = dbinfer.estimands.exposure_probabilities(design, mapping, 1)
    observed = dbinfer.outcomes.observe(schedule, mapping, (1, 0, 1, 0))
    report = dbinfer.estimation.aepo_estimate_with_variance(observed.y, observed.d, probs, 1)
    assert report.point == report.sample_mean == Fraction(7, 2)


def test_regression_adjustment_is_unbiased_without_nurva():
    design, space, mapping, schedule = load("household-alt2")
    config = dbinfer.montecarlo.EstimatorConfig(
        labels=(1,),
        statistic="regression",
        X=[[1], [2]],
        f=dbinfer.estimation.PredictionFunction.linear(),
        beta=[Fraction(1, 3)],
    )
    expected = dbinfer.montecarlo.exact_expectation(design, mapping, schedule, config)
    assert expected == dbinfer.estimands.aepo(design, mapping, schedule, 1) == Fraction(1, 2)


@pytest.mark.parametrize("z", [(1, 2, 3, 0, 0, 0, 0, 0, 0, 0), (0, 0, 0, 0, 0, 0, 3, 0, 1, 2)])
def test_placeholders_do_not_change_the_survey_estimate(z):
    design, space, mapping, schedule = load("rebel-survey")
    probs = dbinfer.estimands.exposure_probabilities(design, mapping, 1)
    estimates = []
    for placeholder in (0, -99):
        observed = dbinfer.outcomes.observe(schedule.with_placeholder(placeholder), mapping, z)
        estimates.append(dbinfer.estimation.ht_estimate(observed.y, observed.d, probs, 1))
    assert estimates[0] == estimates[1]
    assert float(estimates[0]).hex() == float(estimates[1]).hex()


def test_placeholder_labels_are_flagged():
    design, space, mapping, schedule = load("rebel-survey")
    report = dbinfer.estimands.estimand_report(design, mapping, schedule)
    assert report.placeholder_labels == [0]


def test_trim_suggestion():
    design = dbinfer.design.make_uniform_design([(1, 0), (1, 1)])
    mapping = dbinfer.exposure.make_individualistic_mapping(2)
    schedule = dbinfer.outcomes.make_rule_schedule("household", N=2)
    report = dbinfer.estimands.estimand_report(design, mapping, schedule, contrasts=[(1, 0)])
    assert not report.positivity[0].holds
    assert report.contrasts[0].aeed is None
    assert report.contrasts[0].trim_suggestion == [1]
    trimmed = dbinfer.estimands.estimand_report(design, mapping, schedule, contrasts=[(1, 0)], trim=True)
    assert trimmed.contrasts[0].units == [1]
    assert trimmed.contrasts[0].aeed == dbinfer.estimands.aeed(design, mapping, schedule, 1, 0, units=[1])


def test_invalid_designs():
    with pytest.raises(dbinfer.DesignError, match="masses sum to 3/4, not 1"):
        dbinfer.design.make_explicit_design([(0, 1), (1, 0)], [Fraction(1, 2), Fraction(1, 4)])
    with pytest.raises(dbinfer.ValidationError):
        dbinfer.design.design_from_document({"N": 2, "kind": "explicit", "support": [[0, 1]]})


@pytest.mark.parametrize("name", dbinfer.corpus.names())
def test_documents_rebuild_the_instance(name):
    design, space, mapping, schedule = load(name)
    assert space.check_pairing(design)
    vectors, _ = design.support
    rebuilt = dbinfer.design.design_from_document(design.to_document())
    assert list(dbinfer.design.enumerate_support(rebuilt)) == list(dbinfer.design.enumerate_support(design))
    mapping_copy = dbinfer.exposure.mapping_from_document(dbinfer.exposure.mapping_to_document(mapping))
    assert (mapping_copy.apply_batch(vectors) == mapping.apply_batch(vectors)).all()
    schedule_copy = dbinfer.outcomes.schedule_from_document(dbinfer.outcomes.schedule_to_document(schedule))
    assert (schedule_copy.evaluate_batch(vectors) == schedule.evaluate_batch(vectors)).all()


@pytest.mark.parametrize(
    "design",
    [
        dbinfer.design.make_bernoulli_design(3, Fraction(1, 3)),
        dbinfer.design.make_complete_randomization(4, 2),
        dbinfer.design.make_ordered_sample_design(4, 2),
        dbinfer.design.make_cluster_randomization([0, 0, 1, 1, 2, 2], 1),
    ],
)
def test_structured_design_documents(design):
    rebuilt = dbinfer.design.design_from_document(design.to_document())
    assert list(dbinfer.design.enumerate_support(rebuilt)) == list(dbinfer.design.enumerate_support(design))


def test_pairing_rejects_infeasible_support():
    space = dbinfer.design.DesignSpace.ordered(3, 1)
    with pytest.raises(dbinfer.DesignError):
        space.check_pairing(dbinfer.design.make_bernoulli_design(3, Fraction(1, 2)))


def test_probabilities_subset_keeps_population_indices():
    probs = dbinfer.estimands.exposure_probabilities(*load("voter-carryover")[::2], 1)
    subset = probs.subset([3, 0])
    assert subset.units == (3, 0)
    assert subset.pi(1).tolist() == [Fraction(3, 4), Fraction(1, 2)]
    assert subset.pi_joint(1)[0, 1] == probs.pi_joint(1)[3, 0]
    with pytest.raises(dbinfer.ValidationError):
        subset.subset([1])


@hypothesis.settings(max_examples=30, deadline=None)
@hypothesis.given(st.lists(st.integers(1, 9), min_size=1, max_size=6))
def test_uniform_and_weighted_designs_sum_to_one(weights):
    support = list(itertools.product((0, 1), repeat=3))[: len(weights)]
    masses = [Fraction(w, sum(weights)) for w in weights]
    design = dbinfer.design.make_explicit_design(support, masses)
    assert sum(design.support[1].tolist()) == 1
    assert dbinfer.design.validate_design(design)


@hypothesis.settings(max_examples=30, deadline=None)
@hypothesis.given(
    values=st.lists(st.tuples(st.integers(-9, 9), st.integers(-9, 9)), min_size=2, max_size=4),
    p=st.sampled_from([Fraction(1, 2), Fraction(1, 3), Fraction(3, 4)]),
)
def test_aeed_is_antisymmetric(values, p):
    N = len(values)
    design = dbinfer.design.make_bernoulli_design(N, p)
    mapping = dbinfer.exposure.make_individualistic_mapping(N)
    schedule = dbinfer.outcomes.make_rule_schedule("no-interference", {"values": [list(v) for v in values]}, N=N)
    forward = dbinfer.estimands.aeed(design, mapping, schedule, 1, 0)
    assert forward == -dbinfer.estimands.aeed(design, mapping, schedule, 0, 1)
    assert dbinfer.estimands.aeed(design, mapping, schedule, 1, 1) == 0


@hypothesis.settings(max_examples=30, deadline=None)
@hypothesis.given(st.lists(st.integers(0, 1), min_size=10, max_size=10))
def test_network_mapping_is_exhaustive(z):
    design, space, mapping, schedule = load("network-volunteering")
    labels = dbinfer.exposure.apply_exposure(mapping, z)
    assert set(labels) <= {0, 1, 2, 3}
    treated = [i for i, x in enumerate(z) if x]
    assert all(labels[i] in (1, 3) for i in treated)


@hypothesis.settings(max_examples=30, deadline=None)
@hypothesis.given(st.lists(st.integers(1, 9), min_size=4, max_size=4))
def test_nurva_depends_on_the_support_not_the_masses(weights):
    design, space, mapping, schedule = load("household-alt2")
    vectors, _ = design.support
    reweighted = dbinfer.design.make_explicit_design(
        [tuple(z) for z in vectors.tolist()], [Fraction(w, sum(weights)) for w in weights]
    )
    first = dbinfer.assumptions.check_nurva(design, mapping, schedule)
    second = dbinfer.assumptions.check_nurva(reweighted, mapping, schedule)
    assert first.holds == second.holds
    assert first.counterexample == second.counterexample


def test_replications_do_not_depend_on_threads():
    design, space, mapping, schedule = load("voter-carryover")
    config = dbinfer.montecarlo.EstimatorConfig(labels=(1,))
    one = dbinfer.montecarlo.replicate(design, mapping, schedule, config, R=600, seed=11, threads=1)
    many = dbinfer.montecarlo.replicate(design, mapping, schedule, config, R=600, seed=11, threads=4)
    assert one == many
    assert abs(one.mean - float(one.expected)) <= 5 * one.standard_error + 1e-12


def test_a_single_replication_has_no_variance():
    design, space, mapping, schedule = load("household")
    summary = dbinfer.montecarlo.replicate(
        design, mapping, schedule, dbinfer.montecarlo.EstimatorConfig(labels=(0,)), R=1, seed=0
    )
    assert summary.variance is None and not summary.variance_defined


def test_household_aeed_always_covers():
    design, space, mapping, schedule = load("household")
    study = dbinfer.montecarlo.coverage_study(design, mapping, schedule, (1, 0), R=1000, seed=2)
    assert study.coverage == 1.0
    assert study.truth == -1.0


def test_consistency_sweep_rmse_decreases():
    sweep = dbinfer.montecarlo.consistency_sweep(
        "partial-interference", (20, 80, 320), dbinfer.montecarlo.EstimatorConfig(labels=(1,)), R=2000, seed=1
    )
    rmse = [row.rmse for row in sweep.rows]
    assert rmse[0] > rmse[1] > rmse[2]
    assert "not proof" in sweep.caveat


def test_coverage_under_bernoulli():
    population = dbinfer.generators.make_population("no-interference", 1000, 7)
    study = dbinfer.montecarlo.coverage_study(
        population.design,
        population.mapping,
        population.schedule,
        1,
        R=2000,
        seed=3,
        truth=population.truth[1],
    )
    assert study.coverage >= 0.93


def test_unknown_population():
    with pytest.raises(dbinfer.ValidationError):
        dbinfer.generators.make_population("nowhere", 10)


def test_package_imports_in_a_fresh_interpreter():
    result = subprocess.run([sys.executable, "-c", "import dbinfer"], capture_output=True, text=True)
    assert result.returncode == 0, result.stderr
    for name in ("dbinfer.schema", "dbinfer.exposure", "dbinfer.outcomes", "dbinfer.corpus", "dbinfer.generators"):
        assert dbinfer.manager.get_plugin(name) is not None


def test_outcome_vectors_must_match_the_population():
    design, space, mapping, schedule = load("household")
    probs = dbinfer.estimands.exposure_probabilities(design, mapping, 0)
    with pytest.raises(dbinfer.ValidationError):
        dbinfer.estimation.ht_estimate((0, 1, 99), (1, 0, 0), probs, 0)
    with pytest.raises(dbinfer.ValidationError):
        dbinfer.estimation.ht_estimate((0,), (1,), probs, 0)
    assert dbinfer.estimation.ht_estimate((0, 1), (1, 0), probs.subset([1]), 0) == 2
    with pytest.raises(dbinfer.ValidationError):
        dbinfer.estimation.ht_estimate((1,), (0,), probs.subset([1]), 0)


def test_units_outside_the_population():
    design, space, mapping, schedule = load("household")
    with pytest.raises(dbinfer.ValidationError):
        dbinfer.estimands.epo(design, mapping, schedule, 2, 1)
    with pytest.raises(dbinfer.ValidationError):
        dbinfer.estimands.eed(design, mapping, schedule, -1, 1, 0)
    with pytest.raises(dbinfer.ValidationError):
        dbinfer.estimands.aepo(design, mapping, schedule, 1, units=[])


def test_repeated_sweep_sizes_give_identical_rows():
    config = dbinfer.montecarlo.EstimatorConfig.parse("aepo:1")
    sweep = dbinfer.montecarlo.consistency_sweep("partial-interference", (8, 4, 8), config, R=50, seed=0)
    assert [row.N for row in sweep.rows] == [4, 8, 8]
    assert sweep.rows[1].rmse == sweep.rows[2].rmse


def test_household_sampler_frequency():
    design = load("household").design
    hits = sum(dbinfer.design.sample_assignment(design, seed) == (0, 1) for seed in range(10000))
    assert abs(hits / 10000 - 0.5) <= 0.02


def test_sampler_frequencies_match_the_masses():
    masses = [Fraction(1, 2), Fraction(1, 4), Fraction(1, 8), Fraction(1, 8)]
    support = [(0, 0), (0, 1), (1, 0), (1, 1)]
    design = dbinfer.design.make_explicit_design(support, masses)
    draws = dbinfer.design.sample_assignments(design, 0, 100_000)
    observed = [int((draws == numpy.array(z)).all(axis=1).sum()) for z in support]
    expected = [float(mass) * 100_000 for mass in masses]
    assert scipy.stats.chisquare(observed, expected).pvalue > 0.001


@pytest.mark.parametrize("N", range(1, 9))
def test_complete_randomization_treats_each_unit_equally_often(N):
    for m in range(1, N + 1):
        vectors, _ = dbinfer.design.make_complete_randomization(N, m).support
        assert vectors.sum(axis=0).tolist() == [math.comb(N - 1, m - 1)] * N


def test_ordered_sample_positions_are_uniform():
    vectors, masses = dbinfer.design.make_ordered_sample_design(5, 3).support
    for i in range(5):
        for k in (1, 2, 3):
            assert sum(masses[vectors[:, i] == k].tolist(), Fraction(0)) == Fraction(1, 5)


@pytest.mark.parametrize("N", (4, 6, 8))
def test_nurva_fails_with_variation_inside_clusters(N):
    population = dbinfer.generators.make_population("partial-interference", N, seed=N)
    assert dbinfer.assumptions.check_nurva(population.design, population.mapping, population.schedule).holds
    scattered = dbinfer.design.make_bernoulli_design(N, Fraction(1, 2))
    verdict = dbinfer.assumptions.check_nurva(scattered, population.mapping, population.schedule)
    assert not verdict.holds
    assert dbinfer.assumptions.verify_counterexample(population.mapping, population.schedule, verdict.counterexample)


@pytest.mark.parametrize("name", dbinfer.corpus.names())
def test_sutva_implies_nurva(name):
    design, space, mapping, schedule = load(name)
    if dbinfer.assumptions.check_sutva(space, mapping, schedule).holds:
        assert dbinfer.assumptions.check_nurva(design, mapping, schedule).holds


@pytest.mark.parametrize(
    "rule, rows",
    [
        ("household", dbinfer.corpus.HOUSEHOLD),
        ("comparative-advantage", dbinfer.corpus.JOB_TRAINING),
        ("backfire", dbinfer.corpus.CAMPAIGN_AD),
    ],
)
def test_rule_schedules_match_their_tables(rule, rows):
    vectors = dbinfer.design.DesignSpace.product(2).vectors()
    table = dbinfer.outcomes.make_table_schedule(rows)
    schedule = dbinfer.outcomes.make_rule_schedule(rule, N=2)
    assert (schedule.evaluate_batch(vectors) == table.evaluate_batch(vectors)).all()


@pytest.mark.parametrize("name, labels", [("household", (0, 1)), ("voter-carryover", (0, 1)), ("rebel-survey", (1,))])
def test_monte_carlo_probabilities_within_four_standard_errors(name, labels):
    design, space, mapping, schedule = load(name)
    R = 100_000
    exact = dbinfer.estimands.exposure_probabilities(design, mapping, labels).to_float()
    sampled = dbinfer.estimands.exposure_probabilities(design, mapping, labels, method="monte-carlo", R=R, seed=0)
    tables = [(exact.pi(d), sampled.pi(d)) for d in labels]
    tables += [(exact.pi_joint(d, e), sampled.pi_joint(d, e)) for d in labels for e in labels]
    for truth, estimate in tables:
        assert (numpy.abs(estimate - truth) <= 4 * numpy.sqrt(truth * (1 - truth) / R)).all()


@pytest.mark.parametrize("N", (8, 16, 32))
def test_dependence_grows_linearly_under_partial_interference(N):
    population = dbinfer.generators.make_population("partial-interference", N, seed=0)
    diagnostics = dbinfer.assumptions.regularity_diagnostics(
        population.design, population.mapping, population.schedule, 1
    )
    assert diagnostics.b_N == N
