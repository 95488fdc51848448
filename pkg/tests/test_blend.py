import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from socialrec.blend import blend, item_seed, recommend_top_k
from socialrec.cf import build_similarities, predict_cf
from socialrec.contagion import (
    INACTIVE,
    CascadeConfig,
    StateVector,
    ThresholdPolicy,
    map_level,
    run_cascade,
    si_prediction,
)
from socialrec.errors import ArgumentError, DomainError
from socialrec.model import RatingScale, RatingsTable, SocialGraph, SusceptibilityProfile

R5 = RatingScale(5)

TRIPLES = [
    ("ann", "i1", 5), ("ann", "i2", 4), ("ann", "i3", 1),
    ("ben", "i1", 4), ("ben", "i2", 5), ("ben", "i4", 2), ("ben", "i3", 2),
    ("cat", "i1", 1), ("cat", "i3", 5), ("cat", "i4", 4),
    ("dan", "i2", 3), ("dan", "i3", 2), ("dan", "i4", 5), ("dan", "i1", 4),
    ("eve", "i1", 2), ("eve", "i2", 2), ("eve", "i4", 5),
]
EDGES = [("ann", "ben"), ("ann", "cat"), ("ben", "dan"), ("cat", "dan"), ("dan", "eve"), ("ann", "eve")]


@pytest.fixture
def world():
    table = RatingsTable.from_triples(TRIPLES, R5)
    graph = SocialGraph.from_edges(EDGES, weight_mode="random_partition", seed=5)
    return table, build_similarities(table), graph


def test_blend_inactive():
    assert blend(3.7, INACTIVE, 0.8) == 3.7


def test_blend_full_susceptibility():
    assert blend(2.2, 5, 1.0) == 5


def test_blend_midpoint():
    assert blend(2, 4, 0.5) == 3


def test_blend_alpha_domain():
    with pytest.raises(DomainError):
        blend(2, 4, 1.2)


@given(st.floats(1, 5), st.integers(1, 5), st.floats(0, 1))
def test_blend_convex(p_cf, p_si, alpha):
    b = blend(p_cf, p_si, alpha)
    assert min(p_cf, p_si) - 1e-12 <= b <= max(p_cf, p_si) + 1e-12


def cfg(threshold=0.3):
    return CascadeConfig(R5, ThresholdPolicy.constant(threshold))


def test_k_exceeds_candidates(world):
    table, sims, graph = world
    recs = recommend_top_k("eve", 10, table, sims, graph, cfg(), SusceptibilityProfile(), seed=1)
    assert [r.item for r in recs] == sorted([r.item for r in recs], key=lambda i: -next(x.score for x in recs if x.item == i))
    assert {r.item for r in recs} == {"i3"}


def test_alpha_zero_is_pure_cf(world):
    table, sims, graph = world
    table2 = RatingsTable.from_triples([t for t in TRIPLES if t[:2] not in {("ann", "i2"), ("ann", "i3")}], R5)
    sims2 = build_similarities(table2)
    recs = recommend_top_k("ann", 5, table2, sims2, graph, cfg(), SusceptibilityProfile({}, 0.0))
    cf_rank = sorted(
        (i for i in table2.items if i not in table2.ratings_of("ann")),
        key=lambda i: (-predict_cf(table2, sims2, "ann", i), i),
    )
    assert [r.item for r in recs] == cf_rank
    for r in recs:
        assert r.score == r.p_cf


def _independent_scores(table, sims, graph, user, config, alpha, seed):
    out = {}
    for item in table.items:
        if item in table.ratings_of(user):
            continue
        seeds = {u: map_level(r, R5) for u, r in table.raters_of(item).items()}
        trace = run_cascade(graph, StateVector.from_seeds(graph, item, R5, seeds), config,
                            seed=item_seed(seed, item))
        p_si = si_prediction(trace, user, R5)
        out[item] = blend(predict_cf(table, sims, user, item), p_si, alpha)
    return out


def test_fixture_matches_item_by_item(world):
    table = RatingsTable.from_triples([t for t in TRIPLES if t[0] != "eve" or t[1] == "i1"], R5)
    sims = build_similarities(table)
    graph = world[2]
    config = CascadeConfig(R5, ThresholdPolicy.uniform(0.05, 0.8))
    recs = recommend_top_k("eve", 3, table, sims, graph, config, SusceptibilityProfile({}, 0.6), seed=9)
    expected = _independent_scores(table, sims, graph, "eve", config, 0.6, 9)
    assert [r.item for r in recs] == sorted(expected, key=lambda i: (-expected[i], i))
    for r in recs:
        assert r.score == expected[r.item]


def test_friend_opinion_mode(world):
    table = RatingsTable.from_triples([t for t in TRIPLES if t[0] != "eve" or t[1] == "i1"], R5)
    sims = build_similarities(table)
    recs = recommend_top_k("eve", 5, table, sims, world[2], cfg(0.2), SusceptibilityProfile({}, 1.0))
    assert any(r.p_si is not INACTIVE for r in recs)
    for r in recs:
        assert r.score == (r.p_cf if r.p_si is INACTIVE else r.p_si)


def test_ranking_stable_under_insertion_order(world):
    _, _, graph = world
    base = [t for t in TRIPLES if t[0] != "eve" or t[1] == "i1"]
    config = CascadeConfig(R5, ThresholdPolicy.uniform(0.05, 0.8))
    ref = None
    for perm_seed in range(5):
        perm = [base[k] for k in np.random.default_rng(perm_seed).permutation(len(base))]
        table = RatingsTable.from_triples(perm, R5)
        recs = recommend_top_k("eve", 3, table, build_similarities(table), graph, config,
                               SusceptibilityProfile({}, 0.5), seed=4)
        got = [(r.item, r.score) for r in recs]
        ref = ref or got
        assert got == ref


def test_cf_derived_thresholds_run(world):
    table, sims, graph = world
    config = CascadeConfig(R5, ThresholdPolicy.cf_derived())
    recs = recommend_top_k("eve", 2, table, sims, graph, config, SusceptibilityProfile())
    assert len(recs) == 1 and 1 <= recs[0].score <= 5


def test_unknown_user(world):
    table, sims, graph = world
    with pytest.raises(ArgumentError):
        recommend_top_k("zoe", 3, table, sims, graph, cfg(), SusceptibilityProfile())


def test_binary_scale_recommendation():
    b = RatingScale.binary_scale()
    table = RatingsTable.from_triples(
        [("a", "x", 1), ("a", "y", -1), ("b", "x", 1), ("b", "y", -1), ("b", "z", 1),
         ("c", "x", -1), ("c", "y", 1), ("c", "z", 1)], b)
    graph = SocialGraph.from_edges([("a", "b"), ("a", "c")])
    recs = recommend_top_k("a", 1, table, build_similarities(table), graph,
                           CascadeConfig(b, ThresholdPolicy.constant(0.5)), SusceptibilityProfile({}, 1.0))
    assert recs[0].item == "z" and recs[0].p_si == 1 and recs[0].score == 1
