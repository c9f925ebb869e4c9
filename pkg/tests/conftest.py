import copy

import pytest

from gsres.config import PROFILES, _build_scenario, _build_splitting, _deep_merge


def make_setup(overrides: dict | None = None, profile: str = "desk"):
    """(SplittingConfig, Scenario) from a profile plus dict overrides."""
    doc = copy.deepcopy(PROFILES[profile])
    if overrides:
        doc = _deep_merge(doc, overrides)
    return _build_splitting(doc), _build_scenario(doc)


@pytest.fixture
def desk_setup():
    return make_setup()


def tiny_oracle_overrides():
    """1-sensor / 1-activation instance with a frozen myopic trajectory set.

    The carrier is effectively instantaneous, so any activation time in
    [0, horizon] is feasible anywhere in the theater and the exhaustive
    (x, y, t) grid search optimizes exactly the same frozen objective as
    the optimizer's estimator."""
    return {
        "scenario": {
            "theater": {
                "vertices": [[0.0, 0.0], [1000.0, 0.0], [1000.0, 1000.0], [0.0, 1000.0]],
                "horizon": 600.0,
                "hunter_delay": 0.0,
            },
            "sensor": {
                "detection_radius": 120.0,
                "counter_detection_radius": 240.0,
                "max_activations": 1,
                "carrier_speed": 1e9,
            },
            "p_max": 1,
            "carrier_entry": [500.0, 500.0],
        },
        "dynamics": {
            "mean_leg_duration": 150.0,
            "std_leg_duration": 40.0,
            "leg_duration_halfwidth": 100.0,
            "course_std": 0.5,
            "course_halfwidth": 1.5,
            "speed_mean": 1.5,
            "speed_std": 0.3,
            "initial_position_mode": "gaussian",
            "initial_position_center": [500.0, 500.0],
            "initial_position_std": 120.0,
            "initial_course_mode": "uniform",
            "reactive": False,
        },
        "splitting": {
            "population": 50,
            "max_iterations": 15,
            "trajectories_per_score": 64,
            "eval_seed": 99,
            "move_sensor": {"w": [0.5, 0.5], "sigma_small": 40.0, "sigma_large": 200.0},
        },
    }


def crossing_overrides(width, height, radius, speed, horizon, ping_step):
    """Static eastbound target against one always-pinging disk."""
    n_pings = int(horizon / ping_step) + 1
    return {
        "scenario": {
            "theater": {
                "vertices": [[0.0, 0.0], [width, 0.0], [width, height], [0.0, height]],
                "horizon": horizon,
                "hunter_delay": 0.0,
            },
            "sensor": {
                "detection_radius": radius,
                "counter_detection_radius": 2.0 * radius,
                "max_activations": n_pings,
                "carrier_speed": 1e9,
            },
            "p_max": 1,
            "carrier_entry": [width / 2, height / 2],
        },
        "dynamics": {
            "mean_leg_duration": horizon / 6,
            "std_leg_duration": horizon / 30,
            "leg_duration_halfwidth": horizon / 10,
            "course_std": 0.0,
            "course_halfwidth": 1.0,
            "speed_mean": speed,
            "speed_std": 0.0,
            "initial_position_mode": "uniform",
            "initial_position_center": None,
            "initial_position_std": 0.0,
            "initial_course_mode": "fixed",
            "initial_course": 0.0,
            "reactive": False,
        },
    }
