"""Replicated binary-cascade experiments on small-world networks."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .contagion import CascadeConfig, StateVector, ThresholdPolicy, parse_threshold, run_cascade
from .errors import ConfigurationError, DomainError, ParseError
from .model import RatingScale
from .netgen import WattsStrogatzParams, watts_strogatz

REGIMES = {
    "const0.1": ThresholdPolicy.constant(0.1),
    "const0.5": ThresholdPolicy.constant(0.5),
    "uniform": ThresholdPolicy.uniform(0.05, 0.8),
}

RESULT_COLUMNS = (
    "regime", "ratio",
    "mean_majority_frac", "mean_minority_frac", "mean_inactive_frac", "mean_iterations",
    "std_majority_frac", "std_minority_frac", "std_inactive_frac", "std_iterations",
    "mean_new_majority_frac", "mean_new_minority_frac", "replicates",
)


def regime_policy(regime: str) -> ThresholdPolicy:
    """Named regime or any threshold policy string accepted by parse_threshold."""
    if regime in REGIMES:
        return REGIMES[regime]
    policy = parse_threshold(regime)
    if policy.is_dynamic:
        raise ConfigurationError("CF-derived thresholds need ratings; not available in experiments")
    return policy


@dataclass(frozen=True)
class ExperimentSpec:
    n: int = 1000
    k: int = 10
    p: float = 0.1
    regime: str = "const0.1"
    ratios: tuple[float, ...] = (0.05, 0.1, 0.2, 0.3, 0.4)
    p_like: float = 0.7
    replicates: int = 500
    seed: int = 0
    fresh_network: bool = True
    weight_mode: str = "random_partition"
    jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "ratios", tuple(float(r) for r in self.ratios))
        if not self.ratios:
            raise DomainError("at least one initial active ratio is required")
        for r in self.ratios:
            if not 0.0 < r <= 1.0:
                raise DomainError(f"initial active ratio {r} outside (0, 1]")
        if not 0.0 <= self.p_like <= 1.0:
            raise DomainError(f"p_like {self.p_like} outside [0, 1]")
        if self.replicates < 1:
            raise DomainError("replicates must be >= 1")
        WattsStrogatzParams(self.n, self.k, self.p, 0)
        regime_policy(self.regime)

    @property
    def policy(self) -> ThresholdPolicy:
        return regime_policy(self.regime)


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    """Per (ratio, replicate) outcomes; every array has shape (ratios, replicates).

    Fractions are of all nodes; ``new_*`` count only initially inactive nodes
    and are fractions of those.
    """

    spec: ExperimentSpec
    majority_frac: np.ndarray
    minority_frac: np.ndarray
    inactive_frac: np.ndarray
    iterations: np.ndarray
    new_majority_frac: np.ndarray
    new_minority_frac: np.ndarray

    @property
    def ratios(self):
        return self.spec.ratios

    def means(self) -> dict[str, np.ndarray]:
        return {
            "majority_frac": self.majority_frac.mean(axis=1),
            "minority_frac": self.minority_frac.mean(axis=1),
            "inactive_frac": self.inactive_frac.mean(axis=1),
            "iterations": self.iterations.mean(axis=1),
            "new_majority_frac": self.new_majority_frac.mean(axis=1),
            "new_minority_frac": self.new_minority_frac.mean(axis=1),
        }

    def rows(self) -> list[dict]:
        out = []
        m = self.means()
        for j, ratio in enumerate(self.ratios):
            out.append({
                "regime": self.spec.regime,
                "ratio": ratio,
                "mean_majority_frac": m["majority_frac"][j],
                "mean_minority_frac": m["minority_frac"][j],
                "mean_inactive_frac": m["inactive_frac"][j],
                "mean_iterations": m["iterations"][j],
                "std_majority_frac": self.majority_frac[j].std(),
                "std_minority_frac": self.minority_frac[j].std(),
                "std_inactive_frac": self.inactive_frac[j].std(),
                "std_iterations": self.iterations[j].std(),
                "mean_new_majority_frac": m["new_majority_frac"][j],
                "mean_new_minority_frac": m["new_minority_frac"][j],
                "replicates": self.spec.replicates,
            })
        return out


def _network(spec: ExperimentSpec, seq: np.random.SeedSequence):
    seed = int(seq.generate_state(1)[0])
    return watts_strogatz(WattsStrogatzParams(spec.n, spec.k, spec.p, seed), spec.weight_mode)


def run_replicate(spec: ExperimentSpec, ratio_index: int, replicate: int, graph=None) -> tuple:
    """One cascade: (majority, minority, inactive, iterations, new_majority, new_minority)."""
    net_seq, init_seq, like_seq, theta_seq = np.random.SeedSequence(
        [spec.seed, ratio_index, replicate]
    ).spawn(4)
    if graph is None:
        graph = _network(spec, net_seq)
    n = len(graph)
    n_init = max(1, int(round(spec.ratios[ratio_index] * n)))
    chosen = np.random.default_rng(init_seq).choice(n, size=n_init, replace=False)
    likes = np.random.default_rng(like_seq).random(n_init) < spec.p_like
    active = np.zeros(n, dtype=bool)
    active[chosen] = True
    level = np.zeros(n, dtype=np.int64)
    level[chosen] = np.where(likes, 1, -1)

    scale = RatingScale.binary_scale()
    initial = StateVector.from_arrays(graph.nodes, "item", scale, active, level)
    trace = run_cascade(graph, initial, CascadeConfig(scale, spec.policy), seed=theta_seq)

    n_like0 = int(likes.sum())
    majority = 1 if n_like0 >= n_init - n_like0 else -1
    final = trace.final
    maj = int((final.active & (final.level == majority)).sum())
    mino = int((final.active & (final.level == -majority)).sum())
    inact = n - maj - mino
    newly = final.active & ~active
    n_free = n - n_init
    new_maj = int((newly & (final.level == majority)).sum())
    new_min = int((newly & (final.level == -majority)).sum())
    return (
        maj / n, mino / n, inact / n, trace.steps_to_convergence,
        new_maj / n_free if n_free else 0.0,
        new_min / n_free if n_free else 0.0,
    )


def _run_chunk(args):
    spec, jobs = args
    graph = _network(spec, np.random.SeedSequence([spec.seed])) if not spec.fresh_network else None
    return [run_replicate(spec, j, r, graph) for j, r in jobs]


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Run every (ratio, replicate) cascade; reduction is by index, not completion order."""
    jobs = [(j, r) for j in range(len(spec.ratios)) for r in range(spec.replicates)]
    if spec.jobs > 1:
        size = math.ceil(len(jobs) / spec.jobs)
        chunks = [(spec, jobs[i:i + size]) for i in range(0, len(jobs), size)]
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            outcomes = [o for part in pool.map(_run_chunk, chunks) for o in part]
    else:
        outcomes = _run_chunk((spec, jobs))
    arr = np.array(outcomes, dtype=float).reshape(len(spec.ratios), spec.replicates, 6)
    return ExperimentResult(
        spec,
        arr[..., 0], arr[..., 1], arr[..., 2], arr[..., 3], arr[..., 4], arr[..., 5],
    )


def export_results(results, path) -> None:
    """Write one CSV row per (regime, ratio); accepts one result or a list."""
    if isinstance(results, ExperimentResult):
        results = [results]
    rows = [row for res in results for row in res.rows()]
    if not rows:
        raise DomainError("nothing to export")
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        for row in rows:
            w.writerow([
                row[c] if c in ("regime", "replicates") else repr(float(row[c]))
                for c in RESULT_COLUMNS
            ])


def load_results(path) -> list[dict]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != RESULT_COLUMNS:
            raise ParseError(f"unexpected columns {reader.fieldnames}", path=path)
        return [
            {c: (v if c == "regime" else int(v) if c == "replicates" else float(v))
             for c, v in row.items()}
            for row in reader
        ]


def load_spec_file(path) -> dict:
    """Read a ``key = value`` experiment spec into ExperimentSpec keyword arguments."""
    conv = {
        "n": int, "k": int, "p": float, "regime": str, "p_like": float,
        "replicates": int, "seed": int, "weight_mode": str, "jobs": int,
        "ratios": lambda s: tuple(float(x) for x in s.split(",")),
        "fresh_network": lambda s: s.strip().lower() in ("1", "true", "yes"),
    }
    out = {}
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError("expected key = value", line=lineno, path=path)
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in conv:
                raise ParseError(f"unknown key {key!r}", line=lineno, path=path)
            try:
                out[key] = conv[key](value)
            except ValueError:
                raise ParseError(f"{key}: bad value {value!r}", line=lineno, path=path) from None
    return out
