"""Linear-threshold social contagion for a single item.

Two update rules share one state representation:

* binary scale: a node's signal is the influence-weighted sum of its
  neighbors' +1/-1 states; it activates to the sign of that signal once the
  absolute signal reaches its threshold.
* 1..R scale: neighbors are grouped by |level|; the level with the strongest
  signed sum wins and the node activates to that level (with its sign) once
  the absolute sum reaches the threshold.

Updates are synchronous and progressive: every inactive node is evaluated
against the previous step's states, and active nodes never change.

The module also carries the three-strategy coordination game whose
best-response dynamics reproduce the binary rule exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

from .errors import ArgumentError, ConfigurationError, DomainError
from .model import RatingScale, RatingsTable, SocialGraph

# Slack on threshold comparisons so that e.g. a unanimous neighborhood whose
# weights sum to 1 - 1ulp still reaches theta = 1.
EPS = 1e-12

INACTIVE = None


# ---------------------------------------------------------------------------
# rating <-> level mapping
# ---------------------------------------------------------------------------

def map_level(r, scale: RatingScale) -> int:
    """Map a rating to its signed active level (R=5: 1..5 -> -2..2)."""
    r = scale.check_rating(r)
    if scale.binary:
        return r
    R = scale.R
    if R % 2 == 1:
        centre = (R + 1) // 2
    elif r > R // 2:
        centre = R // 2
    else:
        centre = R // 2 + 1
    return r - centre


def map_level_inverse(s, scale: RatingScale) -> int:
    if isinstance(s, bool) or s is None or int(s) != s or int(s) not in scale.active_levels:
        raise DomainError(f"level {s!r} is not an active state of {scale}")
    s = int(s)
    if scale.binary:
        return s
    R = scale.R
    if R % 2 == 1:
        return s + (R + 1) // 2
    return s + R // 2 if s > 0 else s + R // 2 + 1


def state_labels(scale: RatingScale) -> tuple[str, ...]:
    """Column labels for per-state counts: inactive first, then active levels."""
    if scale.binary:
        return ("inactive", "dislike", "like")
    return ("inactive",) + tuple(f"level_{s}" for s in scale.active_levels)


# ---------------------------------------------------------------------------
# state
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class StateVector:
    """Per-node contagion state for one item, indexed by graph node order.

    ``level`` is meaningful only where ``active`` is set; ``activation_step``
    is -1 for inactive nodes and 0 for initial seeds.
    """

    item: str
    nodes: tuple[str, ...]
    scale: RatingScale
    active: np.ndarray
    level: np.ndarray
    activation_step: np.ndarray
    step: int = 0

    def __post_init__(self):
        for arr in (self.active, self.level, self.activation_step):
            arr.setflags(write=False)
        lv = self.level[self.active]
        if lv.size and not np.isin(lv, self.scale.active_levels).all():
            raise DomainError(f"active levels must lie in {self.scale.active_levels}")

    @classmethod
    def from_seeds(
        cls,
        graph: SocialGraph,
        item: str,
        scale: RatingScale,
        seeds: Mapping[str, int],
    ) -> "StateVector":
        """Initial state with ``seeds`` (node -> active level) active at step 0."""
        n = len(graph)
        active = np.zeros(n, dtype=bool)
        level = np.zeros(n, dtype=np.int64)
        for u, s in seeds.items():
            if u not in graph.index:
                raise ArgumentError(f"seed {u!r} is not a node of the graph")
            if s not in scale.active_levels:
                raise DomainError(f"seed level {s!r} of {u!r} not in {scale.active_levels}")
            k = graph.index[u]
            active[k] = True
            level[k] = s
        step = np.where(active, 0, -1)
        return cls(item, graph.nodes, scale, active, level, step)

    @classmethod
    def from_arrays(cls, nodes, item, scale, active, level) -> "StateVector":
        active = np.asarray(active, dtype=bool).copy()
        level = np.where(active, level, 0).astype(np.int64)
        return cls(item, tuple(nodes), scale, active, level, np.where(active, 0, -1))

    def __len__(self):
        return len(self.nodes)

    @property
    def signed(self) -> np.ndarray:
        """Levels with inactive nodes as 0, as floats."""
        return np.where(self.active, self.level, 0).astype(float)

    def state(self, u: str):
        """Active level of ``u``, or INACTIVE."""
        k = self._index(u)
        return int(self.level[k]) if self.active[k] else INACTIVE

    @cached_property
    def _positions(self) -> dict[str, int]:
        return {v: k for k, v in enumerate(self.nodes)}

    def _index(self, u):
        try:
            return self._positions[u]
        except KeyError:
            raise ArgumentError(f"unknown user {u!r}") from None

    @property
    def n_active(self) -> int:
        return int(self.active.sum())

    def counts(self) -> np.ndarray:
        """Counts per state in ``state_labels`` order."""
        out = [int((~self.active).sum())]
        for s in self.scale.active_levels:
            out.append(int((self.active & (self.level == s)).sum()))
        return np.array(out, dtype=np.int64)

    def advance(self, fire: np.ndarray, new_level: np.ndarray) -> "StateVector":
        """Next state with ``fire`` nodes activated at ``new_level``."""
        fire = fire & ~self.active
        step = self.step + 1
        return replace(
            self,
            active=self.active | fire,
            level=np.where(fire, new_level, self.level).astype(np.int64),
            activation_step=np.where(fire, step, self.activation_step),
            step=step,
        )

    def same_states(self, other: "StateVector") -> bool:
        return (
            np.array_equal(self.active, other.active)
            and np.array_equal(self.level, other.level)
            and np.array_equal(self.activation_step, other.activation_step)
        )


def seeds_from_ratings(table: RatingsTable, graph: SocialGraph, item: str) -> dict[str, int]:
    """Existing raters of ``item`` that are graph nodes, as active levels."""
    return {
        u: map_level(r, table.scale)
        for u, r in table.raters_of(item).items()
        if u in graph.index
    }


# ---------------------------------------------------------------------------
# thresholds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThresholdPolicy:
    """How per-node thresholds are chosen.

    ``cf_derived`` carries normalized CF predictions p_v in [0, 1]; the
    threshold is p_v when the live neighbor signal opposes v's leaning
    sign(p_v - 1/2), else min(p_v, 1 - p_v).
    """

    kind: str = "constant"
    value: float = 0.5
    lo: float = 0.0
    hi: float = 1.0
    predictions: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind == "constant":
            if not 0.0 <= self.value <= 1.0:
                raise DomainError(f"constant threshold {self.value} outside [0, 1]")
        elif self.kind == "uniform":
            if not 0.0 <= self.lo <= self.hi <= 1.0:
                raise DomainError(f"uniform thresholds need 0 <= lo <= hi <= 1, got {self.lo}, {self.hi}")
        elif self.kind == "cf_derived":
            for u, p in self.predictions.items():
                if not 0.0 <= p <= 1.0:
                    raise DomainError(f"normalized prediction for {u!r} is {p}, outside [0, 1]")
        else:
            raise DomainError(f"unknown threshold kind {self.kind!r}")

    @classmethod
    def constant(cls, c: float) -> "ThresholdPolicy":
        return cls("constant", value=c)

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "ThresholdPolicy":
        return cls("uniform", lo=lo, hi=hi)

    @classmethod
    def cf_derived(cls, predictions: Mapping[str, float] = None) -> "ThresholdPolicy":
        return cls("cf_derived", predictions=dict(predictions or {}))

    @property
    def is_dynamic(self) -> bool:
        return self.kind == "cf_derived"

    def describe(self) -> str:
        if self.kind == "constant":
            return f"constant:{self.value:g}"
        if self.kind == "uniform":
            return f"uniform:{self.lo:g}:{self.hi:g}"
        return "cf"


def parse_threshold(text: str) -> ThresholdPolicy:
    """Parse ``constant:C``, ``uniform:LO:HI``, a bare number, or ``cf``."""
    parts = text.strip().split(":")
    try:
        if parts[0] in ("constant", "const") and len(parts) == 2:
            return ThresholdPolicy.constant(float(parts[1]))
        if parts[0] == "uniform" and len(parts) == 3:
            return ThresholdPolicy.uniform(float(parts[1]), float(parts[2]))
        if parts[0] in ("cf", "cf_derived") and len(parts) == 1:
            return ThresholdPolicy.cf_derived()
        if len(parts) == 1:
            return ThresholdPolicy.constant(float(parts[0]))
    except ValueError:
        pass
    raise ConfigurationError(
        f"bad threshold policy {text!r}; use constant:C, uniform:LO:HI or cf"
    )


def cf_threshold(p: np.ndarray, signal: np.ndarray) -> np.ndarray:
    """Threshold from normalized predictions and the current neighbor signal."""
    p = np.asarray(p, dtype=float)
    leaning = np.sign(p - 0.5)
    return np.where(leaning * signal < 0, p, np.minimum(p, 1.0 - p))


def realize_thresholds(
    policy: ThresholdPolicy,
    graph: SocialGraph,
    cf_row: Mapping[str, float] | None = None,
    seed=0,
    signal: np.ndarray | None = None,
    undecided: np.ndarray | None = None,
) -> np.ndarray:
    """Per-node thresholds in graph node order.

    For ``cf_derived`` the result depends on ``signal`` (zeros if omitted);
    nodes outside ``undecided`` may lack a prediction and get threshold 1.
    """
    n = len(graph)
    if policy.kind == "constant":
        return np.full(n, float(policy.value))
    if policy.kind == "uniform":
        rng = np.random.default_rng(seed)
        return rng.uniform(policy.lo, policy.hi, n)
    preds = policy.predictions if cf_row is None else cf_row
    p = _prediction_vector(graph, preds, undecided)
    signal = np.zeros(n) if signal is None else np.asarray(signal, dtype=float)
    return cf_threshold(p, signal)


def _prediction_vector(graph, preds, undecided=None) -> np.ndarray:
    p = np.ones(len(graph))
    for k, v in enumerate(graph.nodes):
        if v in preds:
            p[k] = preds[v]
        elif undecided is None or undecided[k]:
            raise ConfigurationError(f"cf-derived threshold needs a prediction for user {v!r}")
    return p


# ---------------------------------------------------------------------------
# steps
# ---------------------------------------------------------------------------

def _theta(theta, signal):
    return np.asarray(theta(signal) if callable(theta) else theta, dtype=float)


def binary_signal(graph: SocialGraph, states: StateVector) -> np.ndarray:
    return graph.matrix @ states.signed


def step_binary(graph: SocialGraph, states: StateVector, theta) -> StateVector:
    """One synchronous update on the binary scale.

    ``theta`` is a per-node array, or a callable mapping the signal vector to
    one (used for CF-derived thresholds).
    """
    if not states.scale.binary:
        raise DomainError("step_binary needs states on the binary scale")
    sigma = binary_signal(graph, states)
    th = _theta(theta, sigma)
    mag = np.abs(sigma)
    fire = ~states.active & (mag > EPS) & (mag >= th - EPS)
    return states.advance(fire, np.sign(sigma).astype(np.int64))


def level_signals(
    graph: SocialGraph, states: StateVector, zero_level_influences: bool = False
) -> tuple[np.ndarray, np.ndarray]:
    """Candidate levels and their per-node signed sums, smallest |level| first.

    Row j of the returned sums is, for every node, the influence-weighted sum
    of sign(level) over active neighbors sitting at candidate level j. With
    ``zero_level_influences`` an extra leading row holds the (unsigned)
    weight of active-0 neighbors.
    """
    B = graph.matrix
    active, level = states.active, states.level
    candidates = []
    rows = []
    if zero_level_influences and states.scale.has_zero_level:
        candidates.append(0)
        rows.append(B @ (active & (level == 0)).astype(float))
    sign = np.sign(level)
    for s in range(1, states.scale.max_level + 1):
        candidates.append(s)
        rows.append(B @ np.where(active & (np.abs(level) == s), sign, 0).astype(float))
    return np.array(candidates), np.vstack(rows)


def step_general(graph: SocialGraph, states: StateVector, theta, config: "CascadeConfig") -> StateVector:
    """One synchronous update on a 1..R scale."""
    if states.scale.binary:
        raise DomainError("step_general needs states on a 1..R scale")
    if config.scale != states.scale:
        raise DomainError("config scale does not match state scale")
    candidates, sums = level_signals(graph, states, config.zero_level_influences)
    best = np.argmax(np.abs(sums), axis=0)  # first max: smallest |level| wins ties
    cols = np.arange(len(states))
    best_sum = sums[best, cols]
    th = _theta(theta, best_sum)
    mag = np.abs(best_sum)
    fire = ~states.active & (mag > EPS) & (mag >= th - EPS)
    new_level = np.where(candidates[best] == 0, 0, candidates[best] * np.sign(best_sum))
    return states.advance(fire, new_level.astype(np.int64))


# ---------------------------------------------------------------------------
# cascades
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CascadeConfig:
    scale: RatingScale
    threshold: ThresholdPolicy = field(default_factory=ThresholdPolicy)
    max_steps: int | None = None  # None: number of nodes
    zero_level_influences: bool = False

    def __post_init__(self):
        if self.max_steps is not None and self.max_steps < 1:
            raise DomainError("max_steps must be >= 1")


@dataclass(frozen=True, eq=False)
class SimulationTrace:
    """Per-step state counts of one cascade plus its final state.

    Row t of ``counts`` holds the counts after step t (row 0 is the initial
    state), in ``labels`` order.
    """

    labels: tuple[str, ...]
    counts: np.ndarray
    newly_activated: np.ndarray
    final: StateVector
    steps_to_convergence: int
    converged: bool
    thresholds: np.ndarray | None = None

    def states_at(self, step: int) -> StateVector:
        """Reconstruct the state after ``step`` from activation steps."""
        f = self.final
        active = f.active & (f.activation_step <= step)
        return StateVector(
            f.item, f.nodes, f.scale, active,
            np.where(active, f.level, 0),
            np.where(active, f.activation_step, -1),
            min(step, f.step),
        )

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["step", *self.labels, "newly_activated"])
            for t, row in enumerate(self.counts):
                w.writerow([t, *row.tolist(), int(self.newly_activated[t])])


export_trace = SimulationTrace.to_csv


class _TraceRecorder:
    def __init__(self, initial: StateVector):
        self.labels = state_labels(initial.scale)
        self.counts = [initial.counts()]
        self.newly = [0]

    def record(self, prev: StateVector, nxt: StateVector) -> int:
        new = nxt.n_active - prev.n_active
        self.counts.append(nxt.counts())
        self.newly.append(new)
        return new

    def finish(self, final, converged, thresholds=None) -> SimulationTrace:
        return SimulationTrace(
            self.labels,
            np.array(self.counts, dtype=np.int64),
            np.array(self.newly, dtype=np.int64),
            final,
            len(self.counts) - 1,
            converged,
            thresholds,
        )


def _max_steps(config_steps, graph) -> int:
    return config_steps if config_steps is not None else max(len(graph), 1)


def run_cascade(
    graph: SocialGraph, initial: StateVector, config: CascadeConfig, seed=0
) -> SimulationTrace:
    """Iterate the step rule until no node activates or ``max_steps`` is hit.

    Only steps with at least one activation are recorded, so
    ``steps_to_convergence`` counts those steps (0 when nothing moves).
    """
    if initial.scale != config.scale:
        raise DomainError("initial state scale does not match the cascade config")
    if len(initial) != len(graph):
        raise ArgumentError("initial state does not match the graph size")
    policy = config.threshold
    if policy.is_dynamic:
        preds = _prediction_vector(graph, policy.predictions, ~initial.active)
        theta = lambda signal: cf_threshold(preds, signal)  # noqa: E731
        fixed = None
    else:
        theta = fixed = realize_thresholds(policy, graph, seed=seed)

    if config.scale.binary:
        step = lambda s: step_binary(graph, s, theta)  # noqa: E731
    else:
        step = lambda s: step_general(graph, s, theta, config)  # noqa: E731

    rec = _TraceRecorder(initial)
    state = initial
    converged = False
    for _ in range(_max_steps(config.max_steps, graph)):
        nxt = step(state)
        if nxt.n_active == state.n_active:
            converged = True
            break
        rec.record(state, nxt)
        state = nxt
    else:
        converged = bool(state.active.all()) or step(state).n_active == state.n_active
    return rec.finish(state, converged, fixed)


def si_prediction(trace: SimulationTrace, u: str, scale: RatingScale | None = None):
    """Social-influence rating for ``u``: its final level as a rating, or INACTIVE."""
    scale = scale or trace.final.scale
    s = trace.final.state(u)
    if s is INACTIVE:
        return INACTIVE
    return map_level_inverse(s, scale)


# ---------------------------------------------------------------------------
# coordination game
# ---------------------------------------------------------------------------

def default_penalty(theta_v: float, n_inactive: int, strategy: int) -> float:
    """Per-inactive-neighbor penalty, inversely proportional to their count."""
    return theta_v / n_inactive


@dataclass(frozen=True)
class GamePayoffParams:
    """Payoff parameters of the like/dislike/inactive coordination game.

    ``a`` defaults to the influence weights. ``penalty(theta_v, n_inactive, s)``
    is the cost of playing s against one inactive neighbor. With
    ``saturated_penalty`` a node whose neighbors are all active pays theta_v
    once for either active strategy; without it such a node pays nothing.
    """

    a: Mapping[str, Mapping[str, float]] | None = None
    penalty: Callable[[float, int, int], float] = default_penalty
    saturated_penalty: bool = True

    def weights(self, graph: SocialGraph, v: str) -> Mapping[str, float]:
        row = graph.influence[v] if self.a is None else self.a[v]
        if any(x < 0 for x in row.values()):
            raise DomainError(f"payoff weights of {v!r} must be nonnegative")
        return row


def payoffs(
    graph: SocialGraph,
    states: StateVector,
    v: str,
    params: GamePayoffParams,
    theta_v: float,
) -> tuple[float, float, float]:
    """Total payoffs of node ``v`` for playing like, dislike and inactive."""
    if not states.scale.binary:
        raise DomainError("the coordination game is defined on the binary scale")
    a = params.weights(graph, v)
    nbrs = graph.neighbors(v)
    current = {w: states.state(w) for w in nbrs}
    n_inactive = sum(1 for w in nbrs if current[w] is INACTIVE)
    totals = []
    for s in (1, -1):
        total = 0.0
        for w in nbrs:
            sw = current[w]
            if sw is INACTIVE:
                total -= params.penalty(theta_v, n_inactive, s)
            else:
                total += s * a[w] * sw
        if n_inactive == 0 and nbrs and params.saturated_penalty:
            total -= theta_v
        totals.append(total)
    return totals[0], totals[1], 0.0


def best_response(pay: tuple[float, float, float]) -> int:
    """Strategy with the highest payoff; ties go to inactive, ties at 0 to active."""
    like, dislike, _ = pay
    if abs(like - dislike) <= 2 * EPS:
        return 0
    s, best = (1, like) if like > dislike else (-1, dislike)
    return s if best >= -EPS else 0


def best_response_dynamics(
    graph: SocialGraph,
    initial: StateVector,
    params: GamePayoffParams,
    theta,
    max_steps: int | None = None,
) -> SimulationTrace:
    """Synchronous best responses of inactive nodes; active nodes stay put."""
    if not initial.scale.binary:
        raise DomainError("the coordination game is defined on the binary scale")
    theta = np.broadcast_to(np.asarray(theta, dtype=float), (len(graph),))
    rec = _TraceRecorder(initial)
    state = initial
    converged = False
    for _ in range(_max_steps(max_steps, graph)):
        fire = np.zeros(len(graph), dtype=bool)
        level = np.zeros(len(graph), dtype=np.int64)
        for k, v in enumerate(graph.nodes):
            if state.active[k]:
                continue
            s = best_response(payoffs(graph, state, v, params, float(theta[k])))
            if s:
                fire[k] = True
                level[k] = s
        if not fire.any():
            converged = True
            break
        nxt = state.advance(fire, level)
        rec.record(state, nxt)
        state = nxt
    return rec.finish(state, converged, np.array(theta))
