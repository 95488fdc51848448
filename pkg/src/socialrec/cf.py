"""User-based collaborative filtering: Pearson similarity and weighted-sum prediction."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import ArgumentError, ParseError, PredictionError
from .model import RatingsTable

DEFAULT_MIN_OVERLAP = 2


def pearson(table: RatingsTable, u: str, v: str, min_overlap: int = DEFAULT_MIN_OVERLAP):
    """Pearson correlation of two users over their co-rated items.

    Means are taken over the co-rated set only. Returns ``None`` when fewer than
    ``min_overlap`` items are shared or either user's co-ratings are constant.
    """
    if u == v:
        raise ArgumentError("pearson similarity needs two distinct users")
    ru, rv = table.ratings_of(u), table.ratings_of(v)
    if len(rv) < len(ru):
        shared = [i for i in rv if i in ru]
    else:
        shared = [i for i in ru if i in rv]
    if len(shared) < max(min_overlap, 1):
        return None
    # Sorted by id so the sums do not depend on argument or insertion order.
    shared.sort()
    x = np.array([ru[i] for i in shared], dtype=float)
    y = np.array([rv[i] for i in shared], dtype=float)
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        return None
    xc = x - x.mean()
    yc = y - y.mean()
    w = float(np.dot(xc, yc) / (math.sqrt(np.dot(xc, xc)) * math.sqrt(np.dot(yc, yc))))
    return min(1.0, max(-1.0, w))


@dataclass(frozen=True)
class SimilarityMatrix:
    """Sparse symmetric user-user similarities; absent pairs are undefined."""

    weights: Mapping[str, Mapping[str, float]]
    min_overlap: int = DEFAULT_MIN_OVERLAP

    def get(self, u: str, v: str):
        return self.weights.get(u, {}).get(v)

    def neighbors(self, u: str) -> Mapping[str, float]:
        return self.weights.get(u, {})

    def pairs(self):
        """Each defined pair once, as (u, v, w)."""
        seen = set()
        for u, row in self.weights.items():
            for v, w in row.items():
                if (v, u) not in seen:
                    seen.add((u, v))
                    yield u, v, w


def build_similarities(table: RatingsTable, min_overlap: int = DEFAULT_MIN_OVERLAP) -> SimilarityMatrix:
    weights: dict[str, dict[str, float]] = {u: {} for u in table.users}
    users = table.users
    for a in range(len(users)):
        for b in range(a + 1, len(users)):
            w = pearson(table, users[a], users[b], min_overlap)
            if w is not None:
                weights[users[a]][users[b]] = w
                weights[users[b]][users[a]] = w
    return SimilarityMatrix(weights, min_overlap)


def save_similarities(sims: SimilarityMatrix, path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(f"# min_overlap={sims.min_overlap}\n")
        for u, v, w in sims.pairs():
            fh.write(f"{u},{v},{w!r}\n")


def load_similarities(path) -> SimilarityMatrix:
    weights: dict[str, dict[str, float]] = {}
    min_overlap = DEFAULT_MIN_OVERLAP
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if line.startswith("# min_overlap="):
                min_overlap = int(line.split("=", 1)[1])
                continue
            if not line or line.startswith("#"):
                continue
            fields = line.split(",")
            if len(fields) != 3:
                raise ParseError("expected u,v,w", line=lineno, path=path)
            u, v, w = fields[0], fields[1], float(fields[2])
            weights.setdefault(u, {})[v] = w
            weights.setdefault(v, {})[u] = w
    return SimilarityMatrix(weights, min_overlap)


def predict_cf(
    table: RatingsTable,
    sims: SimilarityMatrix,
    u: str,
    i: str,
    neighborhood_k: int | None = None,
    clamp: bool = True,
) -> float:
    """Mean-centered weighted-sum prediction of ``u``'s rating on ``i``.

    The sum runs over users who rated ``i`` and have a defined similarity to
    ``u`` (optionally only the ``neighborhood_k`` largest by |w|). Falls back
    to ``u``'s mean when no such user carries weight.
    """
    if not table.has_mean(u):
        raise PredictionError(f"cannot predict for user {u!r}: no ratings")
    mean_u = table.user_mean(u)
    row = sims.neighbors(u)
    contributors = [
        (v, row[v], r) for v, r in table.raters_of(i).items() if v != u and v in row
    ]
    if neighborhood_k is not None:
        if neighborhood_k < 1:
            raise ArgumentError("neighborhood_k must be >= 1")
        contributors.sort(key=lambda c: (-abs(c[1]), c[0]))
        contributors = contributors[:neighborhood_k]
    num = math.fsum((r - table.user_mean(v)) * w for v, w, r in contributors)
    den = math.fsum(abs(w) for _, w, _ in contributors)
    pred = mean_u if den == 0 else mean_u + num / den
    return table.scale.clamp(pred) if clamp else pred


@dataclass(frozen=True)
class PredictionTable:
    values: Mapping[tuple[str, str], float] = field(default_factory=dict)
    clamped: bool = True


def predict_all(
    table: RatingsTable,
    sims: SimilarityMatrix,
    u: str,
    neighborhood_k: int | None = None,
    clamp: bool = True,
) -> dict[str, float]:
    """Predictions for every item ``u`` has not rated, in table item order."""
    if not table.has_mean(u):
        raise PredictionError(f"cannot predict for user {u!r}: no ratings")
    rated = table.ratings_of(u)
    return {
        i: predict_cf(table, sims, u, i, neighborhood_k, clamp)
        for i in table.items
        if i not in rated
    }


def predict_table(
    table: RatingsTable,
    sims: SimilarityMatrix,
    users=None,
    neighborhood_k: int | None = None,
    clamp: bool = True,
) -> PredictionTable:
    users = table.users if users is None else users
    values = {}
    for u in users:
        for i, p in predict_all(table, sims, u, neighborhood_k, clamp).items():
            values[(u, i)] = p
    return PredictionTable(values, clamp)
