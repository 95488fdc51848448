"""Individual recommendation: blend CF predictions with cascade outcomes."""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np

from .cf import SimilarityMatrix, predict_cf
from .contagion import (
    INACTIVE,
    CascadeConfig,
    StateVector,
    ThresholdPolicy,
    run_cascade,
    seeds_from_ratings,
    si_prediction,
)
from .errors import ArgumentError, DomainError
from .model import RatingsTable, SocialGraph, SusceptibilityProfile


def blend(p_cf: float, p_si, alpha: float) -> float:
    """(1 - alpha) * p_cf + alpha * p_si, or p_cf when the cascade left u inactive."""
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"susceptibility {alpha} outside [0, 1]")
    if p_si is INACTIVE:
        return p_cf
    return (1.0 - alpha) * p_cf + alpha * p_si


@dataclass(frozen=True)
class Recommendation:
    item: str
    score: float
    p_cf: float
    p_si: int | None
    alpha: float


def item_seed(seed: int, item: str) -> np.random.SeedSequence:
    """Sub-seed for one item's cascade, keyed by the item id (not its position)."""
    return np.random.SeedSequence([seed, zlib.crc32(item.encode("utf-8"))])


def _cascade_config_for(config, table, sims, graph, item, neighborhood_k):
    """Fill CF-derived thresholds with normalized predictions for undecided nodes."""
    policy = config.threshold
    if not policy.is_dynamic or policy.predictions:
        return config
    scale = table.scale
    raters = table.raters_of(item)
    preds = {}
    for v in graph.nodes:
        if v in raters or not table.has_mean(v):
            continue
        preds[v] = scale.normalize(predict_cf(table, sims, v, item, neighborhood_k))
    return CascadeConfig(
        config.scale, ThresholdPolicy.cf_derived(preds), config.max_steps,
        config.zero_level_influences,
    )


def social_prediction(
    user: str,
    item: str,
    ratings: RatingsTable,
    sims: SimilarityMatrix,
    graph: SocialGraph,
    config: CascadeConfig,
    seed: int = 0,
    neighborhood_k: int | None = None,
):
    """Run the item's cascade seeded by its existing raters; return u's outcome."""
    if user not in graph.index:
        return INACTIVE
    cfg = _cascade_config_for(config, ratings, sims, graph, item, neighborhood_k)
    initial = StateVector.from_seeds(
        graph, item, ratings.scale, seeds_from_ratings(ratings, graph, item)
    )
    trace = run_cascade(graph, initial, cfg, seed=item_seed(seed, item))
    return si_prediction(trace, user, ratings.scale)


def recommend_top_k(
    user: str,
    k: int,
    ratings: RatingsTable,
    sims: SimilarityMatrix,
    graph: SocialGraph,
    config: CascadeConfig,
    alphas: SusceptibilityProfile,
    seed: int = 0,
    neighborhood_k: int | None = None,
) -> list[Recommendation]:
    """Top-k unrated items for ``user`` by blended score.

    Ties are broken by ascending item id. Items whose cascade leaves the user
    inactive compete on their CF prediction alone.
    """
    if k < 1:
        raise ArgumentError("k must be >= 1")
    if not ratings.has_mean(user):
        raise ArgumentError(f"unknown user {user!r}: no ratings")
    if config.scale != ratings.scale:
        raise DomainError("cascade scale does not match the ratings scale")
    alpha = alphas[user]
    rated = ratings.ratings_of(user)
    recs = []
    for item in ratings.items:
        if item in rated:
            continue
        p_cf = predict_cf(ratings, sims, user, item, neighborhood_k)
        p_si = social_prediction(user, item, ratings, sims, graph, config, seed, neighborhood_k)
        recs.append(Recommendation(item, blend(p_cf, p_si, alpha), p_cf, p_si, alpha))
    recs.sort(key=lambda r: (-r.score, r.item))
    return recs[:k]


def write_recommendations(recs, fh) -> None:
    fh.write("rank,item_id,score,p_cf,p_si,alpha\n")
    for rank, r in enumerate(recs, start=1):
        p_si = "inactive" if r.p_si is INACTIVE else str(r.p_si)
        fh.write(f"{rank},{r.item},{r.score:.2f},{r.p_cf:.2f},{p_si},{r.alpha:g}\n")
