"""Splitting-based spatio-temporal planner for active-sensor search.

Optimizes where and when a limited set of one-shot sensors should ping so
as to maximize the Monte Carlo detection probability of a smart, evading
target, using a population splitting method driven by a problem-specific
Gibbs sampler.
"""

from gsres.analysis import SpiralFit, TrackSpacingInputs, fit_spiral, track_spacing
from gsres.config import PROFILES, ConfigError, Scenario, load_config
from gsres.dynamics import (
    DynamicsParams,
    IntelligenceState,
    Trajectory,
    Waypoint,
    apply_course,
    generate_trajectory,
    next_course_mean,
    sample_truncated_gaussian,
    transition,
)
from gsres.estimator import (
    DetectionCriteria,
    ScoreEstimate,
    detection_attribution,
    estimate_score,
    ping_outcome,
    trajectory_cost,
)
from gsres.moves import MoveKind, MoveSensorParams, MoveStats, MoveWeights, gibbs_sweep, propose
from gsres.optimizer import (
    PopulationState,
    SplittingConfig,
    check_stagnation_and_decrease,
    initialize,
    iterate,
    rare_event_probability,
    repopulate_adam,
    repopulate_bootstrap,
    run,
    select_elites,
)
from gsres.rng import RngStream, mix_seed
from gsres.scenario import (
    ConstraintSet,
    Sensor,
    SensorSpec,
    Solution,
    Theater,
    compute_setup_times,
    contains,
    is_feasible,
)

__version__ = "0.1.0"
