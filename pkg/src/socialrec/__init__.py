"""Social-influence recommendation for individuals and groups."""

from .blend import Recommendation, blend, recommend_top_k
from .cf import SimilarityMatrix, build_similarities, pearson, predict_all, predict_cf
from .contagion import (
    INACTIVE,
    CascadeConfig,
    GamePayoffParams,
    SimulationTrace,
    StateVector,
    ThresholdPolicy,
    best_response_dynamics,
    map_level,
    map_level_inverse,
    payoffs,
    realize_thresholds,
    run_cascade,
    si_prediction,
    step_binary,
    step_general,
)
from .group import (
    EquilibriumResult,
    GroupSystem,
    aggregate,
    evolve_step,
    group_recommend,
    solve_equilibrium,
)
from .model import (
    RatingScale,
    RatingsTable,
    SocialGraph,
    SusceptibilityProfile,
    load_graph,
    load_ratings,
    user_mean,
)
from .netgen import WattsStrogatzParams, assign_influence, watts_strogatz

__version__ = "0.1.0"
