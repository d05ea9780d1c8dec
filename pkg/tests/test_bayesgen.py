"""Posterior and generalization checks against exact rational arithmetic.

The oracle recomputes every posterior with Fraction, so agreement within
1e-12 is agreement with the mathematically exact value.
"""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from size_lens.adclus import fit
from size_lens.bayesgen import (
    STRONG_SAMPLING,
    WEAK_SAMPLING,
    HypothesisSpace,
    generalization_matrix,
    generalize,
    hypothesis_space_from_features,
    likelihood,
    plant_dataset,
    posterior,
    shepard_similarity,
)
from size_lens.errors import (
    InconsistentExamples,
    InvalidHypothesisSpace,
    NegativeDistance,
    RetryLimitExceeded,
    UnknownObject,
)
from size_lens.matrices import validate_feature_matrix
from size_lens.sizelaw import analyze


def two_hypothesis_space(mode=STRONG_SAMPLING):
    # h1 = {x, z} (size 2), h2 = {x, y, z} (size 3), equal priors
    return HypothesisSpace(
        object_names=("x", "y", "z"),
        hypotheses=(frozenset({"x", "z"}), frozenset({"x", "y", "z"})),
        priors=np.array([0.5, 0.5]),
        likelihood_mode=mode,
    )


def exact_posterior(space, examples, prior_fractions):
    """Fraction-arithmetic Bayes rule; independent of the implementation."""
    likes = []
    for h in space.hypotheses:
        if any(e not in h for e in examples):
            likes.append(Fraction(0))
        elif space.likelihood_mode == WEAK_SAMPLING:
            likes.append(Fraction(1))
        else:
            likes.append(Fraction(1, len(h)) ** len(examples))
    unnormalized = [l * p for l, p in zip(likes, prior_fractions)]
    total = sum(unnormalized)
    assert total > 0
    return [u / total for u in unnormalized]


def exact_generalization(space, examples, target, prior_fractions):
    post = exact_posterior(space, examples, prior_fractions)
    return sum(p for p, h in zip(post, space.hypotheses) if target in h)


def minimal_consistent_mass(space, examples):
    """Posterior mass on the smallest positive-prior hypotheses covering the examples."""
    post = posterior(space, examples)
    consistent = [
        k
        for k, h in enumerate(space.hypotheses)
        if all(e in h for e in examples) and space.priors[k] > 0.0
    ]
    smallest = min(len(space.hypotheses[k]) for k in consistent)
    return float(
        sum(post.probabilities[k] for k in consistent if len(space.hypotheses[k]) == smallest)
    )


def random_space(rng, n_objects=None, n_hypotheses=None):
    """Random space with integer-ratio priors so the oracle stays exact."""
    if n_objects is None:
        n_objects = int(rng.integers(2, 7))
    if n_hypotheses is None:
        n_hypotheses = int(rng.integers(1, 11))
    names = tuple(f"o{i}" for i in range(n_objects))
    hypotheses = []
    for _ in range(n_hypotheses):
        size = int(rng.integers(1, n_objects + 1))
        members = rng.choice(n_objects, size=size, replace=False)
        hypotheses.append(frozenset(names[int(i)] for i in members))
    weights = rng.integers(1, 10, n_hypotheses)
    total = int(weights.sum())
    prior_fractions = [Fraction(int(w), total) for w in weights]
    priors = np.array([float(f) for f in prior_fractions])
    priors = priors / priors.sum()
    mode = STRONG_SAMPLING if rng.random() < 0.5 else WEAK_SAMPLING
    space = HypothesisSpace(names, tuple(hypotheses), priors, mode)
    return space, prior_fractions


class TestShepardSimilarity:
    def test_decay(self):
        assert shepard_similarity(0.0) == 1.0
        assert shepard_similarity(1.0) == pytest.approx(np.exp(-1.0))

    def test_negative_distance_rejected(self):
        with pytest.raises(NegativeDistance):
            shepard_similarity(-0.5)


class TestLikelihood:
    def test_strong_sampling_scales_with_size(self):
        h = {"x", "z"}
        assert likelihood(h, ["x"]) == pytest.approx(0.5)
        assert likelihood(h, ["x", "x"]) == pytest.approx(0.25)
        assert likelihood(h, ["x", "z"]) == pytest.approx(0.25)

    def test_weak_sampling_is_indicator(self):
        h = {"x", "z"}
        assert likelihood(h, ["x", "x", "z"], WEAK_SAMPLING) == 1.0
        assert likelihood(h, ["y"], WEAK_SAMPLING) == 0.0

    def test_inconsistent_example_zeroes_strong_too(self):
        assert likelihood({"x", "z"}, ["x", "y"]) == 0.0


class TestPosterior:
    def test_single_example_favors_small_hypothesis(self):
        space = two_hypothesis_space()
        post = posterior(space, ["x"])
        assert post.probabilities.tolist() == pytest.approx([3 / 5, 2 / 5])
        assert post.normalizer == pytest.approx(0.5 * (1 / 2) + 0.5 * (1 / 3))

    def test_second_example_sharpens(self):
        space = two_hypothesis_space()
        post = posterior(space, ["x", "x"])
        assert post.probabilities.tolist() == pytest.approx([9 / 13, 4 / 13])

    def test_weak_sampling_ignores_repetition(self):
        space = two_hypothesis_space(WEAK_SAMPLING)
        once = posterior(space, ["x"]).probabilities
        thrice = posterior(space, ["x", "x", "x"]).probabilities
        assert once.tolist() == pytest.approx([0.5, 0.5])
        assert thrice.tolist() == pytest.approx(once.tolist())

    def test_inconsistent_examples_rejected(self):
        space = two_hypothesis_space()
        # no hypothesis omits x, so this cannot happen with these objects;
        # zero out the prior mass instead
        zeroed = HypothesisSpace(
            ("x", "y"),
            (frozenset({"x"}), frozenset({"y"})),
            np.array([1.0, 0.0]),
        )
        with pytest.raises(InconsistentExamples):
            posterior(zeroed, ["y"])
        with pytest.raises(InconsistentExamples):
            posterior(space, [])

    def test_unknown_example_rejected(self):
        with pytest.raises(UnknownObject):
            posterior(two_hypothesis_space(), ["q"])


class TestGeneralize:
    def test_single_example_worked_value(self):
        space = two_hypothesis_space()
        assert generalize(space, ["x"], "z") == 1.0  # z is in both hypotheses
        assert generalize(space, ["x"], "y") == pytest.approx(2 / 5)

    def test_two_examples_tighten(self):
        space = two_hypothesis_space()
        assert generalize(space, ["x", "x"], "y") == pytest.approx(4 / 13)

    def test_unknown_target_rejected(self):
        with pytest.raises(UnknownObject):
            generalize(two_hypothesis_space(), ["x"], "nope")

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_matches_exact_fractions(self, seed):
        rng = np.random.default_rng(seed)
        space, prior_fractions = random_space(rng)
        names = space.object_names
        example = names[int(rng.integers(0, len(names)))]
        target = names[int(rng.integers(0, len(names)))]
        covered = any(
            example in h and f > 0 for h, f in zip(space.hypotheses, prior_fractions)
        )
        if not covered:
            with pytest.raises(InconsistentExamples):
                generalize(space, [example], target)
            return
        expected = exact_generalization(space, (example,), target, prior_fractions)
        got = generalize(space, [example], target)
        assert got == pytest.approx(float(expected), abs=1e-12)


class TestGeneralizationMatrix:
    def test_two_hypothesis_grid(self):
        space = two_hypothesis_space()
        grid = generalization_matrix(space)
        names = list(space.object_names)
        x, y = names.index("x"), names.index("y")
        # x -> y is 2/5; y -> x is 1 (y only occurs in h2, which contains x)
        assert grid.cells[x, y] == pytest.approx(0.7)
        assert np.diag(grid.cells).tolist() == pytest.approx([1.0, 1.0, 1.0])

    def test_matches_pairwise_generalize(self):
        rng = np.random.default_rng(17)
        for _ in range(10):
            space, _ = random_space(rng, n_objects=5)
            try:
                grid = generalization_matrix(space, n_examples=2)
            except InconsistentExamples:
                continue  # an object with no covering hypothesis; fine
            names = space.object_names
            for i in range(5):
                for j in range(5):
                    forward = generalize(space, [names[i]] * 2, names[j])
                    backward = generalize(space, [names[j]] * 2, names[i])
                    assert grid.cells[i, j] == pytest.approx(
                        (forward + backward) / 2.0, abs=1e-12
                    )

    def test_minimal_hypothesis_mass_grows_with_examples(self):
        # strong sampling concentrates on the smallest consistent hypotheses
        rng = np.random.default_rng(23)
        checked = 0
        for _ in range(15):
            space, _ = random_space(rng, n_objects=5)
            if space.likelihood_mode != STRONG_SAMPLING:
                space = HypothesisSpace(
                    space.object_names, space.hypotheses, space.priors, STRONG_SAMPLING
                )
            example = space.object_names[0]
            try:
                masses = [
                    minimal_consistent_mass(space, [example] * n) for n in (1, 2, 3, 4)
                ]
            except InconsistentExamples:
                continue
            for earlier, later in zip(masses, masses[1:]):
                assert later >= earlier - 1e-12
            checked += 1
        assert checked >= 5

    def test_weak_sampling_is_example_count_invariant(self):
        space = two_hypothesis_space(WEAK_SAMPLING)
        one = np.asarray(generalization_matrix(space, 1).cells)
        five = np.asarray(generalization_matrix(space, 5).cells)
        assert np.array_equal(one, five)


class TestHypothesisSpaceValidation:
    def test_empty_hypothesis_rejected(self):
        with pytest.raises(InvalidHypothesisSpace):
            HypothesisSpace(("a",), (frozenset(),), np.array([1.0]))

    def test_unknown_member_rejected(self):
        with pytest.raises(InvalidHypothesisSpace):
            HypothesisSpace(("a",), (frozenset({"b"}),), np.array([1.0]))

    def test_priors_must_sum_to_one(self):
        with pytest.raises(InvalidHypothesisSpace):
            HypothesisSpace(
                ("a", "b"),
                (frozenset({"a"}), frozenset({"b"})),
                np.array([0.5, 0.6]),
            )

    def test_negative_prior_rejected(self):
        with pytest.raises(InvalidHypothesisSpace):
            HypothesisSpace(
                ("a", "b"),
                (frozenset({"a"}), frozenset({"b"})),
                np.array([1.5, -0.5]),
            )

    def test_bad_mode_rejected(self):
        with pytest.raises(InvalidHypothesisSpace):
            HypothesisSpace(("a",), (frozenset({"a"}),), np.array([1.0]), "guessing")

    def test_membership_and_sizes(self):
        space = two_hypothesis_space()
        assert space.membership.tolist() == [[1, 1], [0, 1], [1, 1]]
        assert space.sizes.tolist() == [2, 3]


class TestSpaceFromFeatures:
    def test_feature_extensions_become_hypotheses(self):
        features = validate_feature_matrix(
            ["a", "b", "c"], ["f1", "f2"], [[1, 1], [1, 0], [0, 1]]
        )
        space = hypothesis_space_from_features(features)
        assert space.hypotheses == (frozenset({"a", "b"}), frozenset({"a", "c"}))
        assert space.priors.tolist() == pytest.approx([0.5, 0.5])

    def test_empty_feature_rejected(self):
        features = validate_feature_matrix(
            ["a", "b", "c"], ["f1", "f2"], [[1, 0], [1, 0], [0, 0]]
        )
        with pytest.raises(InvalidHypothesisSpace):
            hypothesis_space_from_features(features)


class TestPlantDataset:
    def test_deterministic_given_seed(self):
        first = plant_dataset(8, 5, seed=42)
        second = plant_dataset(8, 5, seed=42)
        assert np.array_equal(first[0].cells, second[0].cells)
        assert np.array_equal(first[1].cells, second[1].cells)
        assert np.array_equal(first[2], second[2])

    def test_columns_never_degenerate(self):
        for seed in range(10):
            features, _, _ = plant_dataset(9, 6, seed=seed)
            sizes = features.feature_sizes
            assert (sizes > 0).all()
            assert (sizes < 9).all()

    def test_weights_follow_requested_law(self):
        features, _, weights = plant_dataset(8, 5, weight_law="inverse_size_squared", seed=3)
        sizes = features.feature_sizes.astype(float)
        assert weights.tolist() == pytest.approx((1.0 / sizes**2).tolist())

    def test_similarity_is_planted_model(self):
        features, similarity, weights = plant_dataset(8, 5, seed=7)
        from size_lens.adclus import predict

        rebuilt = predict(features, weights)
        assert np.allclose(rebuilt.cells, similarity.cells, atol=1e-12)

    def test_noise_is_symmetric(self):
        _, similarity, _ = plant_dataset(8, 5, noise_sd=0.05, seed=11)
        cells = np.asarray(similarity.cells)
        assert np.array_equal(cells, cells.T)

    def test_retry_limit(self):
        # all-one columns are near-certain at p ~ 1, so every draw is rejected
        with pytest.raises(RetryLimitExceeded):
            plant_dataset(5, 3, bernoulli_p=0.999, max_retries=5, seed=0)

    def test_round_trip_recovers_inverse_law(self):
        features, similarity, weights = plant_dataset(10, 6, seed=19)
        solution = fit(features, similarity)
        assert solution.weights.tolist() == pytest.approx(weights.tolist(), abs=1e-8)
        stats = analyze(solution)
        assert stats.pearson == pytest.approx(-1.0, abs=1e-9)
        assert stats.slope == pytest.approx(-1.0, abs=1e-6)
