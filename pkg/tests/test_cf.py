import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from socialrec.cf import (
    build_similarities,
    load_similarities,
    pearson,
    predict_all,
    predict_cf,
    save_similarities,
)
from socialrec.errors import ArgumentError, PredictionError
from socialrec.model import RatingScale, RatingsTable

from .conftest import random_table
from .oracles import pearson_oracle, predict_oracle, ratings_dict


def pair_table(x, y, R=5):
    triples = [("u", f"i{k}", a) for k, a in enumerate(x)]
    triples += [("v", f"i{k}", b) for k, b in enumerate(y)]
    return RatingsTable.from_triples(triples, RatingScale(R))


class TestPearson:
    def test_perfect_positive(self):
        assert pearson(pair_table([1, 2, 3], [2, 4, 6], R=6), "u", "v") == pytest.approx(1.0, abs=1e-15)

    def test_perfect_negative(self):
        assert pearson(pair_table([1, 2, 3], [3, 2, 1]), "u", "v") == pytest.approx(-1.0, abs=1e-15)

    def test_zero_variance_absent(self):
        assert pearson(pair_table([3, 3, 3], [1, 4, 2]), "u", "v") is None

    def test_hand_instance(self):
        # Co-ratings (5,3,1,4) vs (4,1,2,4): 21/4 over sqrt(35/4 * 27/4) = sqrt(7/15).
        w = pearson(pair_table([5, 3, 1, 4], [4, 1, 2, 4]), "u", "v")
        assert abs(w - math.sqrt(7 / 15)) <= 1e-12

    def test_overlap_below_minimum(self):
        t = pair_table([1, 5], [2, 4])
        assert pearson(t, "u", "v", min_overlap=3) is None
        assert pearson(t, "u", "v", min_overlap=2) is not None

    def test_same_user(self, toy_table):
        with pytest.raises(ArgumentError):
            pearson(toy_table, "u1", "u1")

    def test_means_over_co_rated_set(self):
        # u's extra rating on i9 must not shift the co-rated means.
        t = RatingsTable.from_triples(
            [("u", "i0", 1), ("u", "i1", 2), ("u", "i9", 5), ("v", "i0", 2), ("v", "i1", 4)],
            RatingScale(5),
        )
        assert pearson(t, "u", "v") == pytest.approx(1.0, abs=1e-15)


ratings_pairs = st.lists(
    st.tuples(st.integers(1, 5), st.integers(1, 5)), min_size=2, max_size=12
)


@given(ratings_pairs)
def test_pearson_symmetric(pairs):
    t = pair_table([a for a, _ in pairs], [b for _, b in pairs])
    assert pearson(t, "u", "v") == pearson(t, "v", "u")


@given(
    st.lists(st.tuples(st.integers(1, 5), st.integers(1, 2)), min_size=2, max_size=12),
    st.sampled_from([(1, 3), (2, 1), (3, -2), (2, 3)]),
)
def test_pearson_shift_scale_invariant(pairs, ab):
    a, b = ab
    x = [p for p, _ in pairs]
    y = [q for _, q in pairs]
    w = pearson(pair_table(x, y), "u", "v")
    w2 = pearson(pair_table(x, [a * q + b for q in y], R=9), "u", "v")
    if w is None:
        assert w2 is None
    else:
        assert abs(w - w2) <= 1e-9


def four_user_table():
    return RatingsTable.from_triples(
        [
            ("u", "a", 5), ("u", "b", 3), ("u", "c", 4),
            ("v1", "a", 4), ("v1", "b", 2), ("v1", "c", 5), ("v1", "d", 4),
            ("v2", "a", 1), ("v2", "b", 5), ("v2", "c", 2), ("v2", "d", 2),
            ("v3", "a", 3), ("v3", "b", 3), ("v3", "d", 5),
        ],
        RatingScale(5),
    )


class TestPredictCF:
    def test_hand_instance(self):
        # w(u,v1) = sqrt(3/7), w(u,v2) = -sqrt(12/13), v3 has zero co-rating variance.
        t = four_user_table()
        w1, w2 = math.sqrt(3 / 7), -math.sqrt(12 / 13)
        expected = 4 + ((4 - 15 / 4) * w1 + (2 - 10 / 4) * w2) / (abs(w1) + abs(w2))
        got = predict_cf(t, build_similarities(t), "u", "d")
        assert abs(got - expected) <= 1e-12

    def test_centered_terms_vanish(self):
        t = RatingsTable.from_triples(
            [("u", "a", 5), ("u", "b", 1), ("v", "a", 4), ("v", "b", 2), ("v", "c", 3)],
            RatingScale(5),
        )
        assert predict_cf(t, build_similarities(t), "u", "c") == 3.0

    def test_fallback_to_mean(self):
        t = RatingsTable.from_triples(
            [("u", "a", 5), ("u", "b", 2), ("v", "c", 3)], RatingScale(5)
        )
        assert predict_cf(t, build_similarities(t), "u", "c") == 3.5

    def test_unknown_user(self, toy_table):
        with pytest.raises(PredictionError):
            predict_cf(toy_table, build_similarities(toy_table), "ghost", "i1")

    def test_neighborhood_restricts(self):
        t = four_user_table()
        sims = build_similarities(t)
        w2 = -math.sqrt(12 / 13)
        # Top-1 by |w| keeps only v2.
        assert predict_cf(t, sims, "u", "d", neighborhood_k=1) == pytest.approx(
            4 + (2 - 2.5) * w2 / abs(w2), abs=1e-12
        )

    def test_clamping(self):
        t = RatingsTable.from_triples(
            [("u", "a", 5), ("u", "b", 4), ("u", "c", 5),
             ("v", "a", 2), ("v", "b", 1), ("v", "c", 2), ("v", "d", 5)],
            RatingScale(5),
        )
        sims = build_similarities(t)
        raw = predict_cf(t, sims, "u", "d", clamp=False)
        assert raw > 5
        assert predict_cf(t, sims, "u", "d") == 5


class TestPredictAll:
    def test_all_rated(self):
        t = RatingsTable.from_triples([("u", "a", 1), ("u", "b", 2)], RatingScale(5))
        assert predict_all(t, build_similarities(t), "u") == {}

    def test_matches_single_calls(self, toy_table):
        sims = build_similarities(toy_table)
        row = predict_all(toy_table, sims, "u1")
        assert list(row) == ["i4"]
        row = predict_all(toy_table, sims, "u3")
        assert list(row) == ["i2"]
        for i, p in row.items():
            assert p == predict_cf(toy_table, sims, "u3", i)

    def test_random_tables_in_bounds(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            t = random_table(rng)
            sims = build_similarities(t)
            R = ratings_dict(t)
            for u in t.users:
                for i, p in predict_all(t, sims, u).items():
                    assert 1 <= p <= 5
                    assert p == predict_cf(t, sims, u, i)
                    assert abs(p - predict_oracle(R, u, i, 1, 5)) <= 1e-12


def test_similarity_cache_round_trip(tmp_path):
    t = random_table(np.random.default_rng(2))
    sims = build_similarities(t)
    save_similarities(sims, tmp_path / "s.csv")
    back = load_similarities(tmp_path / "s.csv")
    assert back.weights == {u: row for u, row in sims.weights.items() if row}
    assert back.min_overlap == sims.min_overlap


def test_similarity_bounds_and_symmetry():
    t = random_table(np.random.default_rng(4), density=0.8)
    sims = build_similarities(t)
    for u, v, w in sims.pairs():
        assert abs(w) <= 1 + 1e-12
        assert sims.get(v, u) == w
