"""Posteriors, predictions, and scoring fidelity."""

import dataclasses

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from diffnb.boosting import TrainConfig, WeightTable, scores_from_logs, train, winner_of
from diffnb.dataset import Example, SchemaError
from diffnb.density import bin_index, tagged_likelihood
from diffnb.inference import batch_scores, class_scores, posterior, predict, predict_batch

from conftest import query_rows, small_problems, xor_dataset


@pytest.fixture(scope="module")
def xor_model():
    model, trace = train(xor_dataset(), TrainConfig(topology=2))
    assert trace.converged
    return model


class TestXorValues:
    def test_class_scores_are_the_hand_products(self, xor_model):
        scores = class_scores(xor_model, (0.0, 0.0))
        # c0: (1/4)(1/4); c1: both windows violated, (1/16)(1/16); the
        # log-domain round trip may wobble the last bit
        assert scores[0] == pytest.approx(0.0625, rel=1e-14)
        assert scores[1] == pytest.approx(0.00390625, rel=1e-14)

    def test_posterior_normalizes_the_products(self, xor_model):
        post = posterior(xor_model, (0.0, 0.0))
        assert post.probabilities[0] == pytest.approx(16 / 17, abs=1e-12)
        assert post.winner == 0 and not post.tie
        assert sum(post.probabilities) == pytest.approx(1.0, abs=1e-12)

    def test_predict_returns_the_label(self, xor_model):
        assert predict(xor_model, (0.0, 0.0)) == "c0"
        assert predict(xor_model, (0.0, 1.0)) == "c1"
        assert predict(xor_model, Example((1.0, 0.0), 1)) == "c1"

    def test_all_four_rows_learned(self, xor_model):
        winners, ties = predict_batch(xor_model, xor_dataset().value_matrix())
        assert winners.tolist() == [0, 0, 1, 1]
        assert not ties.any()

    def test_without_windows_everything_ties_even(self):
        model, _ = train(xor_dataset(), TrainConfig(topology=2, tag_gain=1.0, max_rounds=3))
        for values, _label in ((0.0, 0.0), 0), ((1.0, 0.0), 1):
            post = posterior(model, values)
            assert post.probabilities == (0.5, 0.5)
            assert post.tie and post.winner == 0

    def test_arity_mismatch_rejected(self, xor_model):
        with pytest.raises(SchemaError, match="expects 2"):
            posterior(xor_model, (0.0, 0.0, 0.0))


def trained_small(problem, max_rounds=4):
    data, topology = problem
    model, _ = train(data, TrainConfig(max_rounds=max_rounds, topology=topology))
    return data, model


class TestFidelity:
    @given(small_problems(max_n=10, max_attrs=4), st.data())
    def test_scores_match_direct_products(self, problem, extra):
        # moderate magnitudes: the log path must agree with plain products
        data, model = trained_small(problem)
        m = data.schema.n_attributes
        row = extra.draw(query_rows(m))
        scores = class_scores(model, row)
        for k in range(data.schema.n_classes):
            direct = 1.0
            for m_i in range(m):
                b = bin_index(model.density.bin_specs[m_i], row[m_i])
                direct *= tagged_likelihood(
                    model.density, row, k, m_i, model.config.tag_gain, model.config.epsilon_floor
                )
                direct *= model.weights.weights[k, m_i, b]
            assert scores[k] == pytest.approx(direct, rel=1e-12)

    @given(small_problems(max_n=10, max_attrs=4), st.data())
    def test_posterior_normalization(self, problem, extra):
        data, model = trained_small(problem)
        row = extra.draw(query_rows(data.schema.n_attributes))
        post = posterior(model, row)
        assert sum(post.probabilities) == pytest.approx(1.0, abs=1e-9)
        assert all(0.0 <= p <= 1.0 for p in post.probabilities)

    def test_extreme_products_agree_with_exact_arithmetic(self):
        # scores far below double range: normalize against an exact product
        from diffnb.dataset import AttributeSpec, Dataset, Schema

        m = 21
        rows = [(tuple(float(v) for v in np.arange(m) * 0.5 + i), i % 3) for i in range(9)]
        schema = Schema(
            tuple(AttributeSpec(f"x{i}", "continuous") for i in range(m)),
            ("c0", "c1", "c2"),
        )
        data = Dataset.build(schema, rows)
        model, _ = train(data, TrainConfig(max_rounds=3, topology=2, epsilon_floor=1e-40))
        query = rows[4][0]
        post = posterior(model, query)
        with mpmath.workdps(80):
            exact = []
            for k in range(3):
                product = mpmath.mpf(1)
                for m_i in range(m):
                    b = bin_index(model.density.bin_specs[m_i], query[m_i])
                    lik = tagged_likelihood(
                        model.density, query, k, m_i, model.config.tag_gain, model.config.epsilon_floor
                    )
                    product *= mpmath.mpf(lik) * mpmath.mpf(model.weights.weights[k, m_i, b])
                exact.append(product)
            total = mpmath.fsum(exact)
            for k in range(3):
                assert post.probabilities[k] == pytest.approx(float(exact[k] / total), abs=1e-9)

    @given(
        st.lists(st.integers(-600, 600).map(float), min_size=2, max_size=5),
        st.integers(-200, 200).map(float),
    )
    def test_argmax_invariant_under_score_scaling(self, logs, shift):
        # adding a constant in logs is scaling every score by a positive
        # factor; integer logs keep the addition exact, so the winner
        # must be identical and the normalized scores nearly so
        logs = np.array(logs)
        base = scores_from_logs(logs)
        scaled = scores_from_logs(logs + shift)
        assert winner_of(logs + shift) == winner_of(logs)
        assert scaled / scaled.sum() == pytest.approx(base / base.sum(), rel=1e-9)

    @given(small_problems(max_n=10, max_attrs=3), st.data())
    def test_monotone_response_to_a_weight_bump(self, problem, extra):
        data, model = trained_small(problem)
        row = extra.draw(query_rows(data.schema.n_attributes))
        k = extra.draw(st.integers(0, data.schema.n_classes - 1))
        m_i = extra.draw(st.integers(0, data.schema.n_attributes - 1))
        before = posterior(model, row)
        assume(before.probabilities[k] < 1.0 - 1e-9)
        bumped = model.weights.weights.copy()
        b = bin_index(model.density.bin_specs[m_i], row[m_i])
        bumped[k, m_i, b] *= 2.0
        after = posterior(dataclasses.replace(model, weights=WeightTable(bumped)), row)
        assert after.probabilities[k] > before.probabilities[k]


class TestBatch:
    @given(small_problems(max_n=8, max_attrs=3), st.data())
    def test_batch_matches_per_row_posteriors(self, problem, extra):
        data, model = trained_small(problem)
        m = data.schema.n_attributes
        queries = np.array(
            [extra.draw(query_rows(m)) for _ in range(extra.draw(st.integers(1, 5)))]
        ).reshape(-1, m)
        winners, ties = predict_batch(model, queries)
        scores = batch_scores(model, queries)
        for i, row in enumerate(queries):
            post = posterior(model, row)
            assert winners[i] == post.winner
            assert ties[i] == post.tie
            assert post.probabilities == pytest.approx(
                tuple(scores[i] / scores[i].sum()), rel=1e-12
            )
