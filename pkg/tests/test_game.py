import numpy as np
import pytest
from hypothesis import given

from socialrec.contagion import (
    INACTIVE,
    CascadeConfig,
    GamePayoffParams,
    StateVector,
    ThresholdPolicy,
    best_response,
    best_response_dynamics,
    payoffs,
    run_cascade,
    step_binary,
)
from socialrec.errors import DomainError
from socialrec.model import RatingScale, SocialGraph
from socialrec.netgen import WattsStrogatzParams, watts_strogatz

from .test_contagion import instances, run_fixed, star

BIN = RatingScale.binary_scale()
DEFAULTS = GamePayoffParams()


def test_all_neighbors_inactive():
    g = star([0.2, 0.3, 0.5])
    s = StateVector.from_seeds(g, "i", BIN, {})
    like, dislike, idle = payoffs(g, s, "v", DEFAULTS, 0.4)
    assert like == pytest.approx(-0.4) and dislike == pytest.approx(-0.4)
    assert idle == 0.0
    assert best_response((like, dislike, idle)) == 0


def test_unanimity_literal_payoffs():
    g = star([0.2, 0.3, 0.5])
    s = StateVector.from_seeds(g, "i", BIN, {"x0": 1, "x1": 1, "x2": 1})
    pay = payoffs(g, s, "v", GamePayoffParams(saturated_penalty=False), 0.4)
    assert pay == pytest.approx((1.0, -1.0, 0.0))
    assert best_response(pay) == 1


def test_unanimity_default_payoffs():
    g = star([0.2, 0.3, 0.5])
    s = StateVector.from_seeds(g, "i", BIN, {"x0": 1, "x1": 1, "x2": 1})
    pay = payoffs(g, s, "v", DEFAULTS, 0.4)
    assert pay == pytest.approx((0.6, -1.4, 0.0))
    assert best_response(pay) == 1


def test_mixed_five_nodes_matches_step():
    g = SocialGraph.from_edges(
        [("a", "b"), ("a", "c"), ("b", "c"), ("c", "d"), ("d", "e"), ("b", "e")],
        weight_mode="random_partition", seed=8,
    )
    s = StateVector.from_seeds(g, "i", BIN, {"a": 1, "d": -1})
    theta = np.array([0.3, 0.2, 0.45, 0.6, 0.1])
    nxt = step_binary(g, s, theta)
    for k, v in enumerate(g.nodes):
        if s.active[k]:
            continue
        br = best_response(payoffs(g, s, v, DEFAULTS, theta[k]))
        assert (nxt.state(v) or 0) == br


def test_literal_penalty_breaks_equivalence():
    # All neighbors active but split: sigma = 0.6 - 0.4 = 0.2 < theta = 0.5, so
    # the cascade leaves v inactive; with no penalty the game picks like.
    g = star([0.6, 0.4])
    s = StateVector.from_seeds(g, "i", BIN, {"x0": 1, "x1": -1})
    theta = np.full(3, 0.5)
    assert step_binary(g, s, theta).state("v") is INACTIVE
    assert best_response(payoffs(g, s, "v", GamePayoffParams(saturated_penalty=False), 0.5)) == 1
    assert best_response(payoffs(g, s, "v", DEFAULTS, 0.5)) == 0


def test_non_binary_rejected():
    g = star([1.0])
    s = StateVector.from_seeds(g, "i", RatingScale(5), {"x0": 1})
    with pytest.raises(DomainError):
        payoffs(g, s, "v", DEFAULTS, 0.5)


def test_zero_initial_actives():
    g = watts_strogatz(WattsStrogatzParams(10, 4, 0.2, 3), "random_partition")
    tr = best_response_dynamics(g, StateVector.from_seeds(g, "i", BIN, {}), DEFAULTS, np.full(10, 0.2))
    assert tr.steps_to_convergence == 0 and tr.final.n_active == 0


def test_complete_graph_flood():
    n = 6
    g = SocialGraph.from_edges([(str(a), str(b)) for a in range(n) for b in range(a + 1, n)])
    init = StateVector.from_seeds(g, "i", BIN, {"0": 1})
    theta = np.full(n, 1 / (n - 1))
    game = best_response_dynamics(g, init, DEFAULTS, theta)
    lt = run_cascade(g, init, CascadeConfig(BIN, ThresholdPolicy.constant(1 / (n - 1))))
    assert game.steps_to_convergence == lt.steps_to_convergence == 1
    assert game.final.same_states(lt.final)


@pytest.mark.parametrize("seed", range(10))
def test_seeded_ten_node_instances(seed):
    rng = np.random.default_rng(seed)
    g = watts_strogatz(WattsStrogatzParams(10, 4, 0.3, seed), "random_partition")
    seeds = {v: int(rng.choice([-1, 1])) for v in g.nodes if rng.random() < 0.3}
    init = StateVector.from_seeds(g, "i", BIN, seeds)
    cfg = CascadeConfig(BIN, ThresholdPolicy.uniform(0.05, 0.8))
    lt = run_cascade(g, init, cfg, seed=seed)
    game = best_response_dynamics(g, init, DEFAULTS, lt.thresholds)
    assert np.array_equal(game.counts, lt.counts)
    assert game.final.same_states(lt.final)


@given(instances())
def test_game_equivalence_property(inst):
    g, init, theta = inst
    lt = run_fixed(g, init, theta)
    game = best_response_dynamics(g, init, DEFAULTS, theta)
    assert game.steps_to_convergence == len(lt) - 1
    for t, sv in enumerate(lt):
        assert game.states_at(t).same_states(sv)
