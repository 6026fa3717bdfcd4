"""Metrics: rates, auto-rubric, targeting, and K-means clustering."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hpctestgen.metrics import (
    DegenerateInput,
    EmptyInput,
    RubricScore,
    TargetingRate,
    choose_k_elbow,
    cluster_errors,
    compilation_rate,
    kmeans_fit,
    normalize_message,
    round_pct,
    score_rubric,
    silhouette_mean,
    targeting_rate,
    vectorize_messages,
)


class _C:
    def __init__(self, success):
        self.success = success


class _Run:
    def __init__(self, verdict):
        self.verdict = verdict


# --- rates and rounding -------------------------------------------------------


def test_two_of_three_rounds_to_one_decimal():
    assert compilation_rate([_C(True), _C(True), _C(False)]) == 66.7


def test_all_compile_is_hundred():
    assert compilation_rate([_C(True)] * 4) == 100.0


def test_empty_input_raises():
    with pytest.raises(EmptyInput):
        compilation_rate([])


def test_round_half_up():
    assert round_pct(66.65) == 66.7
    assert round_pct(66.64) == 66.6
    assert round_pct(87.5) == 87.5


@given(st.integers(min_value=0, max_value=50), st.integers(min_value=1, max_value=50))
def test_compilation_rate_bounds(successes, failures):
    results = [_C(True)] * successes + [_C(False)] * failures
    rate = compilation_rate(results)
    assert 0.0 <= rate <= 100.0


# --- rubric -------------------------------------------------------------------


def _template_test(unit, seed_kg, index=0):
    from hpctestgen.analyzer import analyze_source
    from hpctestgen.recipes import generate_recipes
    from hpctestgen.synth import synthesize

    metadata = analyze_source(unit, seed_kg)
    recipes, _ = generate_recipes(metadata, seed_kg)
    recipe = recipes[index]
    (test,), _ = synthesize(recipe, unit, "template")
    return test, recipe


def test_race_template_on_pass_is_fully_correct(parallel_sum_unit, seed_kg):
    test, recipe = _template_test(parallel_sum_unit, seed_kg)
    score = score_rubric(test, recipe, _Run("pass"))
    assert (score.parallel_relevance, score.assertion_correctness) == (2, 2)
    assert score.functionally_correct


def test_detector_failure_still_consistent(parallel_sum_unit, seed_kg):
    """An assertion failure on a consistency probe is the probe working."""
    test, recipe = _template_test(parallel_sum_unit, seed_kg)
    score = score_rubric(test, recipe, _Run("assertion_failure"))
    assert score.functionally_correct


def test_single_thread_is_trivial_relevance(parallel_sum_unit, seed_kg):
    test, recipe = _template_test(parallel_sum_unit, seed_kg)
    test.launch_spec.num_threads = 1
    score = score_rubric(test, recipe, _Run("pass"))
    assert score.parallel_relevance == 1


def test_no_parallel_setup_zero_relevance(parallel_sum_unit, seed_kg):
    from hpctestgen.synth import GeneratedTest, LaunchSpec

    _test, recipe = _template_test(parallel_sum_unit, seed_kg)
    plain = GeneratedTest(
        recipe_id=recipe.test_id,
        backend="llm",
        revision=0,
        source_text="int main() { return 0; }",
        launch_spec=LaunchSpec(model="openmp", timeout_seconds=5.0, num_threads=4),
    )
    score = score_rubric(plain, recipe, _Run("pass"))
    assert score.parallel_relevance == 0
    assert score.assertion_correctness == 0


def test_unexpected_verdict_weakens_assertion(parallel_sum_unit, seed_kg):
    test, recipe = _template_test(parallel_sum_unit, seed_kg)
    score = score_rubric(test, recipe, _Run("crash"))
    assert score.assertion_correctness == 1
    assert not score.functionally_correct


def test_rubric_deterministic(parallel_sum_unit, seed_kg):
    test, recipe = _template_test(parallel_sum_unit, seed_kg)
    a = score_rubric(test, recipe, _Run("pass")).to_dict()
    b = score_rubric(test, recipe, _Run("pass")).to_dict()
    assert a == b


# --- targeting ----------------------------------------------------------------


def _recipe_stub(test_id, construct):
    from hpctestgen.recipes import TestRecipe

    return TestRecipe(
        test_id=test_id,
        target_construct=construct,
        test_type="T",
        conditions={},
        expected_behavior_under_test="",
        justification_notes=[],
        suggested_assertion_method="",
        priority="low",
        construct_id=construct,
    )


def test_targeting_four_identified_three_tested():
    recipes = [_recipe_stub(f"R{i}", f"c{i}") for i in range(4)]
    scores = {f"R{i}": RubricScore(2, 2) for i in range(3)}
    scores["R3"] = RubricScore(2, 1)
    rate = targeting_rate(recipes, scores)
    assert rate.identified_constructs == 4
    assert rate.functionally_tested == 3
    assert rate.rate_pct == 75.0


def test_targeting_zero_identified_undefined():
    rate = targeting_rate([], {})
    assert rate.rate_pct is None
    assert rate.to_dict()["rate_pct"] is None


def test_targeting_numerator_never_exceeds_denominator():
    recipes = [_recipe_stub("R0", "c0"), _recipe_stub("R1", "c0")]  # same construct twice
    scores = {"R0": RubricScore(2, 2), "R1": RubricScore(2, 2)}
    rate = targeting_rate(recipes, scores)
    assert rate.functionally_tested <= rate.identified_constructs == 1


# --- message normalization and vectorization -----------------------------------


def test_normalize_masks_paths_numbers_identifiers():
    msg = "/home/u/project/foo.cpp:12:3: error: 'myVar' was not declared in line 99"
    norm = normalize_message(msg)
    assert "<path>" in norm and "<num>" in norm and "<id>" in norm
    assert "myVar" not in norm and "12" not in norm


def test_vectorize_rows_unit_norm():
    mat, vocab = vectorize_messages(["undefined reference to foo", "expected semicolon"])
    norms = np.linalg.norm(mat, axis=1)
    assert np.allclose(norms, 1.0)


# --- K-means core ---------------------------------------------------------------


def _rng_points(n, d, seed):
    return np.random.default_rng(seed).normal(size=(n, d))


def test_kmeans_sse_nonincreasing_trace():
    points = _rng_points(30, 3, 1)
    _labels, _centroids, _sse, trace = kmeans_fit(points, 3, seed=0)
    assert all(trace[i + 1] <= trace[i] + 1e-9 for i in range(len(trace) - 1))


def test_kmeans_assignment_optimality():
    points = _rng_points(25, 2, 2)
    labels, centroids, _sse, _trace = kmeans_fit(points, 4, seed=0)
    dists = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    assert (labels == dists.argmin(axis=1)).all()


def test_kmeans_seed_reproducible():
    points = _rng_points(20, 2, 3)
    a = kmeans_fit(points, 3, seed=7)
    b = kmeans_fit(points, 3, seed=7)
    assert (a[0] == b[0]).all() and a[2] == b[2]


def test_kmeans_k_bounds():
    points = _rng_points(5, 2, 4)
    with pytest.raises(ValueError):
        kmeans_fit(points, 0)
    with pytest.raises(ValueError):
        kmeans_fit(points, 6)


def _brute_force_optimal_sse(points, k):
    """Exhaustive partition into exactly k non-empty groups."""
    n = len(points)
    best = np.inf
    for assignment in itertools.product(range(k), repeat=n):
        if len(set(assignment)) != k:
            continue
        sse = 0.0
        for j in range(k):
            members = points[[i for i in range(n) if assignment[i] == j]]
            centroid = members.mean(axis=0)
            sse += ((members - centroid) ** 2).sum()
        best = min(best, sse)
    return best


@pytest.mark.parametrize("n,d,k,seed", [(6, 2, 2, 0), (7, 3, 3, 1), (8, 2, 2, 2), (8, 3, 4, 3)])
def test_kmeans_within_five_percent_of_bruteforce(n, d, k, seed):
    points = _rng_points(n, d, seed)
    _labels, _centroids, sse, _ = kmeans_fit(points, k, seed=0, restarts=10)
    optimal = _brute_force_optimal_sse(points, k)
    assert sse <= 1.05 * optimal + 1e-12


def test_silhouette_two_tight_clusters():
    points = np.vstack([_rng_points(10, 2, 5) * 0.05, _rng_points(10, 2, 6) * 0.05 + 10.0])
    labels = np.array([0] * 10 + [1] * 10)
    assert silhouette_mean(points, labels) > 0.9


def test_silhouette_single_cluster_none():
    points = _rng_points(5, 2, 7)
    assert silhouette_mean(points, [0] * 5) is None


# --- cluster_errors (end-to-end) -------------------------------------------------

FAMILY_A = [f"undefined reference to symbol vtable entry {i} in object" for i in range(10)]
FAMILY_B = [f"expected semicolon before closing brace near token {i}" for i in range(10)]


def test_two_family_fixture_selects_k2():
    result = cluster_errors(FAMILY_A + FAMILY_B)
    assert result.k == 2
    assert result.silhouette is not None and result.silhouette > 0.5
    sizes = sorted(c.size for c in result.clusters)
    assert sizes == [10, 10]
    # Members stay within their vocabulary family.
    for cluster in result.clusters:
        kinds = {m.startswith("undefined") for m in cluster.member_messages}
        assert len(kinds) == 1


def test_all_identical_messages_single_cluster():
    result = cluster_errors(["same error"] * 6)
    assert result.k == 1
    assert result.silhouette is None
    assert result.clusters[0].size == 6


def test_forced_k1_sse_total_variance():
    msgs = FAMILY_A[:4] + FAMILY_B[:4]
    result = cluster_errors(msgs, k=1)
    points, _ = vectorize_messages(msgs)
    total_variance = ((points - points.mean(axis=0)) ** 2).sum()
    assert result.k == 1
    assert result.silhouette is None
    assert abs(result.sse - total_variance) < 1e-9


def test_cluster_errors_empty_raises():
    with pytest.raises(EmptyInput):
        cluster_errors([])
    with pytest.raises(EmptyInput):
        cluster_errors(["one"])  # k unset needs at least two


def test_clustering_reproducible():
    a = cluster_errors(FAMILY_A + FAMILY_B)
    b = cluster_errors(FAMILY_A + FAMILY_B)
    assert a.to_dict() == b.to_dict()


@settings(deadline=None, max_examples=20)
@given(
    st.lists(
        st.sampled_from(FAMILY_A + FAMILY_B),
        min_size=4,
        max_size=16,
    )
)
def test_cluster_sizes_partition_input(messages):
    result = cluster_errors(messages, k=2) if len(set(messages)) > 1 else None
    if result is None:
        return
    assert sum(c.size for c in result.clusters) == len(messages)


def test_elbow_on_three_separated_families():
    fam_c = [f"no matching function for call overload {i} candidates" for i in range(8)]
    result = cluster_errors(FAMILY_A[:8] + FAMILY_B[:8] + fam_c)
    assert result.k in (2, 3)
    points, _ = vectorize_messages(FAMILY_A[:8] + FAMILY_B[:8] + fam_c)
    k3 = kmeans_fit(points, 3, seed=0)[2]
    k1 = kmeans_fit(points, 1, seed=0)[2]
    assert k3 < k1  # more clusters strictly reduce SSE here
