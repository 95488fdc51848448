"""Group recommendation through interpersonal influence.

Member opinions evolve as ``p_t = A W p_{t-1} + (I - A) p_1`` where ``A`` is
the diagonal of member susceptibilities and ``W`` the row-stochastic matrix
of interpersonal influence. The settled opinions ``V p_1`` with
``V = (I - A W)^-1 (I - A)`` are then aggregated into one group score.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .cf import SimilarityMatrix, predict_cf
from .errors import (
    ArgumentError,
    AssemblyError,
    ConvergenceError,
    DomainError,
    NormalizationError,
    ParseError,
    SingularityError,
)
from .model import RatingScale, RatingsTable, SusceptibilityProfile

ROW_SUM_TOL = 1e-6
COND_LIMIT = 1e12
AGGREGATES = ("mean", "min", "least_misery_max")


def _check_influence(W) -> np.ndarray:
    W = np.array(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise ArgumentError(f"W must be square, got shape {W.shape}")
    for r, row in enumerate(W, start=1):
        if not np.isfinite(row).all() or (row < 0).any() or (row > 1).any():
            raise NormalizationError(f"W row {r} has entries outside [0, 1]")
        total = row.sum()
        if abs(total - 1.0) > ROW_SUM_TOL:
            raise NormalizationError(f"W row {r} sums to {total:.9g}, not 1")
    return W / W.sum(axis=1, keepdims=True)


def _check_alpha(alpha, n) -> np.ndarray:
    alpha = np.array(alpha, dtype=float).reshape(-1)
    if alpha.shape != (n,):
        raise ArgumentError(f"expected {n} susceptibilities, got {alpha.size}")
    if not ((alpha >= 0) & (alpha <= 1)).all():
        raise DomainError("susceptibilities must lie in [0, 1]")
    return alpha


@dataclass(frozen=True, eq=False)
class GroupSystem:
    """Members, susceptibilities, influence matrix and initial opinions.

    ``alpha_by_item`` optionally overrides the susceptibility diagonal for a
    given item.
    """

    members: tuple[str, ...]
    alpha: np.ndarray
    W: np.ndarray
    opinions: Mapping[str, np.ndarray] = field(default_factory=dict)
    alpha_by_item: Mapping[str, np.ndarray] = field(default_factory=dict)
    scale: RatingScale | None = None

    def __post_init__(self):
        n = len(self.members)
        if n == 0:
            raise ArgumentError("a group needs at least one member")
        object.__setattr__(self, "members", tuple(self.members))
        object.__setattr__(self, "alpha", _check_alpha(self.alpha, n))
        W = _check_influence(self.W)
        if W.shape[0] != n:
            raise ArgumentError(f"W is {W.shape[0]}x{W.shape[0]} but the group has {n} members")
        object.__setattr__(self, "W", W)
        object.__setattr__(
            self, "alpha_by_item",
            {i: _check_alpha(a, n) for i, a in self.alpha_by_item.items()},
        )
        ops = {}
        for item, p in self.opinions.items():
            p = np.array(p, dtype=float).reshape(-1)
            if p.shape != (n,):
                raise ArgumentError(f"item {item!r}: expected {n} opinions, got {p.size}")
            for u, x in zip(self.members, p):
                if np.isnan(x):
                    raise AssemblyError(u, item)
            if self.scale is not None and (
                (p < self.scale.min_rating).any() or (p > self.scale.max_rating).any()
            ):
                raise DomainError(f"item {item!r}: opinions outside the rating scale")
            ops[item] = p
        object.__setattr__(self, "opinions", ops)

    @classmethod
    def from_profile(cls, members, profile: SusceptibilityProfile, W, **kw) -> "GroupSystem":
        """Susceptibilities taken from the members' individual alpha_u."""
        return cls(tuple(members), [profile[u] for u in members], W, **kw)

    @property
    def size(self) -> int:
        return len(self.members)

    def A(self, item: str | None = None) -> np.ndarray:
        return np.diag(self.alpha_by_item.get(item, self.alpha))

    def initial(self, item: str) -> np.ndarray:
        try:
            return self.opinions[item]
        except KeyError:
            raise AssemblyError(self.members[0], item) from None


@dataclass(frozen=True, eq=False)
class EquilibriumResult:
    p_inf: np.ndarray
    V: np.ndarray
    method: str
    iterations: int | None
    residual: float


def evolve_step(sys: GroupSystem, item: str, p_prev) -> np.ndarray:
    p_prev = np.asarray(p_prev, dtype=float)
    if p_prev.shape != (sys.size,):
        raise ArgumentError(f"expected {sys.size} opinions, got shape {p_prev.shape}")
    alpha = np.diag(sys.A(item))
    return alpha * (sys.W @ p_prev) + (1.0 - alpha) * sys.initial(item)


def residual(sys: GroupSystem, item: str, p) -> float:
    return float(np.max(np.abs(p - evolve_step(sys, item, p))))


def solve_equilibrium(
    sys: GroupSystem,
    item: str,
    method: str = "direct",
    tol: float = 1e-10,
    max_iter: int = 10000,
) -> EquilibriumResult:
    """Settled opinions for ``item``.

    ``direct`` solves ``(I - A W) x = (I - A) p_1``; ``iterative`` repeats the
    update from ``p_1`` until successive iterates differ by less than ``tol``.
    """
    A = sys.A(item)
    p1 = sys.initial(item)
    n = sys.size
    I = np.eye(n)
    if method == "direct":
        M = I - A @ sys.W
        if np.linalg.cond(M) > COND_LIMIT:
            raise SingularityError("I - AW singular (condition number above 1e12)")
        try:
            V = np.linalg.solve(M, I - A)
        except np.linalg.LinAlgError as exc:
            raise SingularityError(f"I - AW singular: {exc}") from None
        p = V @ p1
        return EquilibriumResult(p, V, method, None, residual(sys, item, p))
    if method == "iterative":
        AW = A @ sys.W
        # Iterate opinions and the total-influence map together: X = [p | V].
        base = np.column_stack([(I - A) @ p1, I - A])
        X = np.column_stack([p1, I])
        for it in range(1, max_iter + 1):
            nxt = AW @ X + base
            delta = np.max(np.abs(nxt - X))
            X = nxt
            if delta < tol:
                p = X[:, 0]
                return EquilibriumResult(p, X[:, 1:], method, it, residual(sys, item, p))
        raise ConvergenceError(f"no convergence within {max_iter} iterations")
    raise ArgumentError(f"unknown method {method!r}; expected 'direct' or 'iterative'")


def aggregate(opinions, rule: str = "mean") -> float:
    """Group score: mean, min (least misery) or max (``least_misery_max``)."""
    x = np.asarray(opinions, dtype=float).reshape(-1)
    if x.size == 0:
        raise ArgumentError("cannot aggregate an empty opinion vector")
    if rule == "mean":
        return float(x.mean())
    if rule == "min":
        return float(x.min())
    if rule in ("least_misery_max", "max"):
        return float(x.max())
    raise ArgumentError(f"unknown aggregation rule {rule!r}; expected one of {AGGREGATES}")


@dataclass(frozen=True)
class GroupRecommendation:
    item: str
    score: float
    settled: tuple[float, ...]
    initial: tuple[float, ...]


def group_recommend(
    sys: GroupSystem,
    items: Sequence[str] | None = None,
    k: int | None = None,
    rule: str = "mean",
    method: str = "direct",
) -> list[GroupRecommendation]:
    """Rank candidate items by aggregated settled opinion (ties: item id)."""
    items = list(sys.opinions) if items is None else list(items)
    for item in items:
        if item not in sys.opinions:
            raise AssemblyError(sys.members[0], item)
    out = []
    for item in items:
        res = solve_equilibrium(sys, item, method)
        out.append(GroupRecommendation(
            item, aggregate(res.p_inf, rule),
            tuple(res.p_inf.tolist()), tuple(sys.initial(item).tolist()),
        ))
    out.sort(key=lambda r: (-r.score, r.item))
    return out if k is None else out[:k]


def assemble_opinions(
    members: Sequence[str],
    items: Sequence[str],
    ratings: RatingsTable,
    sims: SimilarityMatrix | None = None,
    rule: str = "mixed",
    alpha: Sequence[float] | None = None,
    predicted_alpha: float | None = None,
    neighborhood_k: int | None = None,
) -> tuple[dict[str, np.ndarray], dict[str, np.ndarray]]:
    """Initial opinions per item, plus per-item susceptibility overrides.

    ``mixed`` uses a member's existing rating when present and a CF prediction
    otherwise; with ``predicted_alpha`` members holding a predicted opinion get
    that susceptibility for the item. ``predicted_only`` predicts every
    opinion, rated or not. ``given`` accepts existing ratings only.
    """
    if rule not in ("mixed", "predicted_only", "given"):
        raise ArgumentError(f"unknown opinion source rule {rule!r}")
    opinions: dict[str, np.ndarray] = {}
    overrides: dict[str, np.ndarray] = {}
    for item in items:
        vals = []
        predicted = []
        for u in members:
            r = ratings.rating(u, item)
            if rule != "predicted_only" and r is not None:
                vals.append(float(r))
                predicted.append(False)
                continue
            if rule == "given" or sims is None or not ratings.has_mean(u):
                raise AssemblyError(u, item)
            vals.append(predict_cf(ratings, sims, u, item, neighborhood_k))
            predicted.append(True)
        opinions[item] = np.array(vals)
        if rule == "mixed" and predicted_alpha is not None and any(predicted):
            if alpha is None:
                raise ArgumentError("predicted_alpha needs the base susceptibilities")
            overrides[item] = np.where(predicted, predicted_alpha, np.asarray(alpha, float))
    return opinions, overrides


# ---------------------------------------------------------------------------
# config file
# ---------------------------------------------------------------------------

@dataclass
class GroupConfig:
    members: list[str]
    alpha: list[float] | None
    W: list[list[float]]
    opinions: dict[str, list[float]]
    source: str = "given"
    aggregate: str = "mean"
    method: str = "direct"
    ratings: str | None = None
    items: list[str] | None = None
    predicted_alpha: float | None = None
    scale: int = 5
    k: int | None = None


_SCALARS = {"source", "aggregate", "method", "ratings"}


def _floats(text, what, lineno, path):
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise ParseError(f"{what}: expected comma-separated numbers", line=lineno, path=path) from None


def load_group_config(path) -> GroupConfig:
    """Parse a group file.

    Lines are ``key = value``; ``W = ...`` repeats once per matrix row in
    member order, and ``opinion <item> = ...`` gives one item's initial
    opinions. ``#`` starts a comment line.
    """
    cfg: dict = {"opinions": {}, "W": []}
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError("expected key = value", line=lineno, path=path)
            key, value = (s.strip() for s in line.split("=", 1))
            if key == "members":
                cfg["members"] = [m.strip() for m in value.split(",") if m.strip()]
            elif key == "alpha":
                cfg["alpha"] = _floats(value, "alpha", lineno, path)
            elif key == "W":
                row = len(cfg["W"]) + 1
                cfg["W"].append(_floats(value, f"W row {row}", lineno, path))
            elif key.startswith("opinion ") or key.startswith("P1 "):
                item = key.split(None, 1)[1].strip()
                cfg["opinions"][item] = _floats(value, f"opinion {item}", lineno, path)
            elif key == "items":
                cfg["items"] = [m.strip() for m in value.split(",") if m.strip()]
            elif key in ("predicted_alpha", "k", "scale"):
                try:
                    cfg[key] = int(value) if key in ("k", "scale") else float(value)
                except ValueError:
                    raise ParseError(f"{key}: bad value {value!r}", line=lineno, path=path) from None
            elif key in _SCALARS:
                cfg[key] = value
            else:
                raise ParseError(f"unknown key {key!r}", line=lineno, path=path)
    if "members" not in cfg:
        raise ParseError("missing 'members'", path=path)
    n = len(cfg["members"])
    if len(cfg["W"]) != n:
        raise ParseError(f"W has {len(cfg['W'])} rows, expected {n}", path=path)
    for r, row in enumerate(cfg["W"], start=1):
        if len(row) != n:
            raise ParseError(f"W row {r} has {len(row)} entries, expected {n}", path=path)
    cfg.setdefault("alpha", None)
    return GroupConfig(**cfg)
