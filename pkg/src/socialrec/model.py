"""Shared domain types: rating scales, ratings tables, social graphs, susceptibilities."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
from scipy import sparse

from .errors import (
    ArgumentError,
    DomainError,
    DuplicateError,
    NormalizationError,
    ParseError,
    UndefinedMeanError,
)

WEIGHT_MODES = ("given", "uniform", "random_partition")

# Row sums of loaded/generated influence weights must hit 1 this closely.
WEIGHT_SUM_TOL = 1e-9
# Tolerance accepted on user-supplied weights before renormalizing.
GIVEN_WEIGHT_TOL = 1e-6


@dataclass(frozen=True)
class RatingScale:
    """A 1..R rating scale, or the binary {-1, +1} scale when ``binary`` is set."""

    R: int = 5
    binary: bool = False

    def __post_init__(self):
        if isinstance(self.R, bool) or not isinstance(self.R, (int, np.integer)):
            raise DomainError(f"R must be an integer, got {self.R!r}")
        if self.R < 2:
            raise DomainError(f"R must be >= 2, got {self.R}")
        if self.binary and self.R != 2:
            raise DomainError("a binary scale has exactly two levels (R=2)")

    @classmethod
    def binary_scale(cls) -> "RatingScale":
        return cls(R=2, binary=True)

    @property
    def min_rating(self) -> int:
        return -1 if self.binary else 1

    @property
    def max_rating(self) -> int:
        return 1 if self.binary else self.R

    @property
    def midpoint(self) -> float:
        return (self.min_rating + self.max_rating) / 2

    @property
    def ratings(self) -> tuple[int, ...]:
        if self.binary:
            return (-1, 1)
        return tuple(range(1, self.R + 1))

    @property
    def max_level(self) -> int:
        return 1 if self.binary else self.R // 2

    @property
    def has_zero_level(self) -> bool:
        return (not self.binary) and self.R % 2 == 1

    @property
    def active_levels(self) -> tuple[int, ...]:
        """Signed active-state levels, ascending."""
        m = self.max_level
        levels = [s for s in range(-m, m + 1) if s != 0]
        if self.has_zero_level:
            levels.append(0)
        return tuple(sorted(levels))

    def is_valid_rating(self, r) -> bool:
        try:
            fr = float(r)
        except (TypeError, ValueError):
            return False
        if not math.isfinite(fr) or fr != int(fr):
            return False
        return int(fr) in self.ratings

    def check_rating(self, r) -> int:
        if not self.is_valid_rating(r):
            raise DomainError(
                f"rating {r!r} is not a level of the scale {list(self.ratings)}"
            )
        return int(float(r))

    def normalize(self, value: float) -> float:
        """Affine map of a numeric rating onto [0, 1]."""
        return (value - self.min_rating) / (self.max_rating - self.min_rating)

    def clamp(self, value: float) -> float:
        return min(max(value, self.min_rating), self.max_rating)


def _read_records(path):
    """Yield (line_number, fields) for each non-blank, non-comment line."""
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            yield lineno, [f.strip() for f in line.split(",")]


def _looks_like_float(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


@dataclass(frozen=True)
class RatingsTable:
    """Sparse user x item ratings.

    ``users`` and ``items`` keep first-appearance order; that order fixes the
    dense indices used everywhere else.
    """

    users: tuple[str, ...]
    items: tuple[str, ...]
    entries: Mapping[tuple[str, str], int]
    scale: RatingScale = field(default_factory=RatingScale)

    def __post_init__(self):
        if len(set(self.users)) != len(self.users):
            raise DuplicateError("duplicate user id in users")
        if len(set(self.items)) != len(self.items):
            raise DuplicateError("duplicate item id in items")
        users, items = set(self.users), set(self.items)
        for (u, i), r in self.entries.items():
            if u not in users or i not in items:
                raise ArgumentError(f"entry ({u!r}, {i!r}) references an undeclared id")
            self.scale.check_rating(r)

    @classmethod
    def from_triples(
        cls, triples: Iterable[tuple[str, str, float]], scale: RatingScale | None = None
    ) -> "RatingsTable":
        scale = scale or RatingScale()
        users: dict[str, None] = {}
        items: dict[str, None] = {}
        entries: dict[tuple[str, str], int] = {}
        for u, i, r in triples:
            u, i = str(u), str(i)
            if (u, i) in entries:
                raise DuplicateError(f"duplicate rating for ({u!r}, {i!r})")
            entries[(u, i)] = scale.check_rating(r)
            users.setdefault(u)
            items.setdefault(i)
        return cls(tuple(users), tuple(items), entries, scale)

    @cached_property
    def user_index(self) -> dict[str, int]:
        return {u: k for k, u in enumerate(self.users)}

    @cached_property
    def item_index(self) -> dict[str, int]:
        return {i: k for k, i in enumerate(self.items)}

    @cached_property
    def _by_user(self) -> dict[str, dict[str, int]]:
        out: dict[str, dict[str, int]] = {u: {} for u in self.users}
        for (u, i), r in self.entries.items():
            out[u][i] = r
        return out

    @cached_property
    def _by_item(self) -> dict[str, dict[str, int]]:
        out: dict[str, dict[str, int]] = {i: {} for i in self.items}
        for (u, i), r in self.entries.items():
            out[i][u] = r
        return out

    def __len__(self):
        return len(self.entries)

    def __contains__(self, key):
        return key in self.entries

    def rating(self, u: str, i: str):
        return self.entries.get((u, i))

    def ratings_of(self, u: str) -> dict[str, int]:
        """Items rated by ``u`` mapped to their ratings (empty for unknown users)."""
        return self._by_user.get(u, {})

    def raters_of(self, i: str) -> dict[str, int]:
        return self._by_item.get(i, {})

    def has_mean(self, u: str) -> bool:
        return bool(self.ratings_of(u))

    @cached_property
    def _means(self) -> dict[str, float]:
        return {
            u: math.fsum(rs.values()) / len(rs)
            for u, rs in self._by_user.items()
            if rs
        }

    def user_mean(self, u: str) -> float:
        try:
            return self._means[u]
        except KeyError:
            raise UndefinedMeanError(f"user {u!r} has no ratings") from None

    def to_dense(self) -> np.ndarray:
        """Users x items array with NaN for missing ratings."""
        out = np.full((len(self.users), len(self.items)), np.nan)
        for (u, i), r in self.entries.items():
            out[self.user_index[u], self.item_index[i]] = r
        return out


def user_mean(table: RatingsTable, u: str) -> float:
    return table.user_mean(u)


def load_ratings(path, scale: RatingScale | None = None) -> RatingsTable:
    """Read ``user_id,item_id,rating`` lines; a leading header line is skipped."""
    scale = scale or RatingScale()
    triples = []
    seen: set[tuple[str, str]] = set()
    first = True
    for lineno, fields in _read_records(path):
        if len(fields) != 3 or not fields[0] or not fields[1]:
            raise ParseError(
                f"expected user_id,item_id,rating, got {len(fields)} field(s)",
                line=lineno, path=path,
            )
        if first and not _looks_like_float(fields[2]):
            first = False
            continue  # header
        first = False
        u, i, raw = fields
        if not _looks_like_float(raw):
            raise ParseError(f"rating {raw!r} is not numeric", line=lineno, path=path)
        if not scale.is_valid_rating(raw):
            raise DomainError(
                f"{path}:{lineno}: rating {raw} outside scale {list(scale.ratings)}"
            )
        if (u, i) in seen:
            raise DuplicateError(f"{path}:{lineno}: duplicate rating for ({u}, {i})")
        seen.add((u, i))
        triples.append((u, i, float(raw)))
    return RatingsTable.from_triples(triples, scale)


def save_ratings(table: RatingsTable, path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write("user_id,item_id,rating\n")
        for (u, i), r in table.entries.items():
            fh.write(f"{u},{i},{r}\n")


@dataclass(frozen=True, eq=False)
class SocialGraph:
    """Undirected friendship graph with row-normalized influence weights.

    ``influence[v][w]`` is b_vw, the share of v's attention given to w. The
    neighbor order of each node is the order of its ``influence`` entries.
    """

    nodes: tuple[str, ...]
    influence: Mapping[str, Mapping[str, float]]

    def __post_init__(self):
        node_set = set(self.nodes)
        if len(node_set) != len(self.nodes):
            raise DuplicateError("duplicate node id")
        for v in self.nodes:
            row = self.influence.get(v, {})
            if v in row:
                raise ParseError(f"self-loop on node {v!r}")
            for w, b in row.items():
                if w not in node_set:
                    raise ArgumentError(f"edge ({v!r}, {w!r}) references unknown node")
                if v not in self.influence.get(w, {}):
                    raise ArgumentError(f"edge ({v!r}, {w!r}) is not symmetric")
                if not 0.0 <= b <= 1.0:
                    raise NormalizationError(f"weight b[{v},{w}]={b} outside [0, 1]")
            if row and abs(math.fsum(row.values()) - 1.0) > WEIGHT_SUM_TOL:
                raise NormalizationError(f"weights of node {v!r} do not sum to 1")

    @classmethod
    def from_edges(
        cls,
        edges: Iterable[tuple[str, str]],
        nodes: Iterable[str] = (),
        weight_mode: str = "uniform",
        seed: int | np.random.SeedSequence | None = 0,
    ) -> "SocialGraph":
        order, adjacency = _build_adjacency(edges, nodes)
        influence = assign_weights(order, adjacency, weight_mode, seed)
        return cls(tuple(order), influence)

    def __len__(self):
        return len(self.nodes)

    def __contains__(self, v):
        return v in self.index

    @cached_property
    def index(self) -> dict[str, int]:
        return {v: k for k, v in enumerate(self.nodes)}

    def neighbors(self, v: str) -> tuple[str, ...]:
        return tuple(self.influence.get(v, {}))

    def degree(self, v: str) -> int:
        return len(self.influence.get(v, {}))

    def weight(self, v: str, w: str) -> float:
        return self.influence[v][w]

    @cached_property
    def edges(self) -> tuple[tuple[str, str], ...]:
        """Each undirected edge once, oriented by node order."""
        out = []
        for v in self.nodes:
            kv = self.index[v]
            for w in self.influence.get(v, {}):
                if self.index[w] > kv:
                    out.append((v, w))
        return tuple(out)

    @cached_property
    def matrix(self) -> sparse.csr_matrix:
        """CSR matrix B with B[v, w] = b_vw."""
        rows, cols, vals = [], [], []
        for v in self.nodes:
            kv = self.index[v]
            for w, b in self.influence.get(v, {}).items():
                rows.append(kv)
                cols.append(self.index[w])
                vals.append(b)
        n = len(self.nodes)
        return sparse.csr_matrix((vals, (rows, cols)), shape=(n, n), dtype=float)

    def with_weights(self, mode: str, seed=0) -> "SocialGraph":
        """Same topology, freshly assigned influence weights."""
        adjacency = {v: list(self.influence.get(v, {})) for v in self.nodes}
        return SocialGraph(self.nodes, assign_weights(list(self.nodes), adjacency, mode, seed))


def _build_adjacency(edges, nodes=()):
    order: dict[str, None] = {}
    adjacency: dict[str, list[str]] = {}
    for v in nodes:
        order.setdefault(str(v))
        adjacency.setdefault(str(v), [])
    for u, v in edges:
        u, v = str(u), str(v)
        if u == v:
            raise ParseError(f"self-loop on node {u!r}")
        order.setdefault(u)
        order.setdefault(v)
        nu = adjacency.setdefault(u, [])
        nv = adjacency.setdefault(v, [])
        if v in nu:
            raise DuplicateError(f"duplicate edge ({u!r}, {v!r})")
        nu.append(v)
        nv.append(u)
    return list(order), adjacency


def assign_weights(
    nodes: list[str],
    adjacency: Mapping[str, list[str]],
    mode: str,
    seed: int | np.random.SeedSequence | None = 0,
) -> dict[str, dict[str, float]]:
    """Influence weights for an unweighted adjacency.

    ``uniform`` splits each node's unit influence equally; ``random_partition``
    draws one Uniform(0, 1] value per neighbor and normalizes per node, visiting
    nodes and neighbors in the given order so a seed fixes the result.
    """
    if mode == "uniform":
        return {
            v: {w: 1.0 / len(adjacency[v]) for w in adjacency[v]} if adjacency[v] else {}
            for v in nodes
        }
    if mode == "random_partition":
        rng = np.random.default_rng(seed)
        out = {}
        for v in nodes:
            nbrs = adjacency[v]
            if not nbrs:
                out[v] = {}
                continue
            draws = 1.0 - rng.random(len(nbrs))  # (0, 1], strictly positive
            draws /= draws.sum()
            out[v] = dict(zip(nbrs, draws.tolist()))
        return out
    if mode == "given":
        raise ArgumentError("weight mode 'given' needs explicit weights")
    raise ArgumentError(f"unknown weight mode {mode!r}; expected one of {WEIGHT_MODES}")


def load_graph(path, weight_mode: str = "uniform", seed=0) -> SocialGraph:
    """Read ``u,v`` or ``u,v,weight_uv,weight_vu`` lines.

    A line holding a single id declares an isolated node.
    """
    if weight_mode not in WEIGHT_MODES:
        raise ArgumentError(f"unknown weight mode {weight_mode!r}; expected one of {WEIGHT_MODES}")
    edges = []
    nodes = []
    given: dict[str, dict[str, float]] = {}
    seen: set[frozenset] = set()
    for lineno, fields in _read_records(path):
        if len(fields) == 1 and fields[0]:
            nodes.append(fields[0])
            continue
        if len(fields) not in (2, 4) or not fields[0] or not fields[1]:
            raise ParseError(
                "expected u,v or u,v,weight_uv,weight_vu", line=lineno, path=path
            )
        u, v = fields[0], fields[1]
        if u == v:
            raise ParseError(f"self-loop on node {u!r}", line=lineno, path=path)
        if frozenset((u, v)) in seen:
            raise DuplicateError(f"{path}:{lineno}: duplicate edge ({u}, {v})")
        seen.add(frozenset((u, v)))
        if weight_mode == "given":
            if len(fields) != 4:
                raise ParseError(
                    "weight mode 'given' needs weight_uv and weight_vu", line=lineno, path=path
                )
            try:
                w_uv, w_vu = float(fields[2]), float(fields[3])
            except ValueError:
                raise ParseError("weights must be numeric", line=lineno, path=path) from None
            for b in (w_uv, w_vu):
                if not 0.0 <= b <= 1.0:
                    raise NormalizationError(f"{path}:{lineno}: weight {b} outside [0, 1]")
            given.setdefault(u, {})[v] = w_uv
            given.setdefault(v, {})[u] = w_vu
        edges.append((u, v))
    order, adjacency = _build_adjacency(edges, nodes)
    if weight_mode != "given":
        return SocialGraph(tuple(order), assign_weights(order, adjacency, weight_mode, seed))
    influence = {}
    for v in order:
        row = {w: given[v][w] for w in adjacency[v]}
        if row:
            total = math.fsum(row.values())
            if abs(total - 1.0) > GIVEN_WEIGHT_TOL:
                raise NormalizationError(
                    f"weights of node {v!r} sum to {total!r}, not 1 (tolerance {GIVEN_WEIGHT_TOL})"
                )
            row = {w: b / total for w, b in row.items()}
        influence[v] = row
    return SocialGraph(tuple(order), influence)


def save_graph(graph: SocialGraph, path, weights: bool = True) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for v in graph.nodes:
            if graph.degree(v) == 0:
                fh.write(f"{v}\n")
        for u, v in graph.edges:
            if weights:
                fh.write(f"{u},{v},{graph.influence[u][v]!r},{graph.influence[v][u]!r}\n")
            else:
                fh.write(f"{u},{v}\n")


@dataclass(frozen=True)
class SusceptibilityProfile:
    """Per-user susceptibility alpha_u in [0, 1], with a fallback default."""

    alphas: Mapping[str, float] = field(default_factory=dict)
    default: float = 0.5

    def __post_init__(self):
        for u, a in [*self.alphas.items(), ("<default>", self.default)]:
            if not 0.0 <= a <= 1.0:
                raise DomainError(f"susceptibility of {u!r} is {a}, outside [0, 1]")

    def __getitem__(self, u: str) -> float:
        return self.alphas.get(u, self.default)


def load_susceptibility(path, default: float = 0.5) -> SusceptibilityProfile:
    alphas = {}
    for lineno, fields in _read_records(path):
        if len(fields) != 2:
            raise ParseError("expected user_id,alpha", line=lineno, path=path)
        if not _looks_like_float(fields[1]):
            if not alphas:
                continue  # header
            raise ParseError(f"alpha {fields[1]!r} is not numeric", line=lineno, path=path)
        alphas[fields[0]] = float(fields[1])
    return SusceptibilityProfile(alphas, default)
