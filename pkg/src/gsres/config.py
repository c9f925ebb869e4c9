"""Configuration loading and the two built-in profiles.

A run is described by one JSON document with four sections:

    scenario   theater polygon, horizon, hunter delay, sensor radii and ping
               budget, carrier speed and entry point, sensor count bound
    dynamics   target motion law (leg durations, course law, speed law,
               initial position/course, reactivity)
    criteria   what counts as a detected trajectory
    splitting  population size, elite fraction, iteration budget, burn-in
               schedule, repopulation mode, move set, scoring sample size,
               stagnation heuristic, seeds and threads

Profiles provide complete documents: ``desk`` is sized for workstation runs
and CI; ``paper`` carries the publication-scale settings (C=800, N=70000,
50 iterations) and is not meant for routine use.  A user file is deep-merged
over the chosen profile, so partial documents are fine.  Every invariant
violation is reported with the offending field's dotted name.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass

from gsres.estimator import DetectionCriteria
from gsres.dynamics import DynamicsParams
from gsres.moves import MoveSensorParams, MoveWeights
from gsres.optimizer import SplittingConfig
from gsres.scenario import ConstraintSet, SensorSpec, Theater, contains


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    """Everything the simulator needs besides the splitting parameters."""

    constraints: ConstraintSet
    dynamics: DynamicsParams
    criteria: DetectionCriteria
    carrier_entry: tuple[float, float]


_DATUM_SCENARIO = {
    "theater": {
        "vertices": [[0.0, 0.0], [6500.0, 0.0], [6500.0, 6500.0], [0.0, 6500.0]],
        "horizon": 1800.0,
        "hunter_delay": 200.0,
    },
    "sensor": {
        "detection_radius": 330.0,
        "counter_detection_radius": 660.0,
        "max_activations": 1,
        "carrier_speed": 15.0,
    },
    "p_max": 10,
    "carrier_entry": None,
}

_DATUM_DYNAMICS = {
    "mean_leg_duration": 550.0,
    "std_leg_duration": 140.0,
    "leg_duration_halfwidth": 380.0,
    "course_std": 0.2,
    "course_halfwidth": 1.0,
    "escape_halfwidth": math.pi / 4,
    "speed_mean": 1.3,
    "speed_std": 0.12,
    "initial_position_mode": "gaussian",
    "initial_position_center": None,
    "initial_position_std": 90.0,
    "initial_course_mode": "uniform",
    "initial_course": 0.0,
    "course_memory": "last",
    "reactive": True,
    "resample_speed_per_leg": False,
}

_COMMON_SPLITTING = {
    "elite_fraction": 0.1,
    "burn_in_b0": 2.0,
    "burn_in_alpha": 0.2,
    "repopulation": "adam_cloning",
    "stagnation_patience": 5,
    "stagnation_decrease": 0.9,
    "stagnation_tolerance": None,
    "max_retries": 10,
    "move_set": "fixed_p",
    "move_weights": [0.1, 0.15, 0.1, 0.15, 0.4, 0.1],
    "move_sensor": {"w": [0.5, 0.5], "sigma_small": 80.0, "sigma_large": 550.0},
    "move_sensor_schedule": "anneal",
    "scan": "random",
    "rescore_full": False,
    "seed": 0,
    "eval_seed": None,
    "threads": 1,
    "wall_clock_budget": None,
    "initial_sensor_count": "p_max",
    "init_attempts": 200,
    "density_grid": 50,
    "density_time_bins": 100,
    "density_snapshots": [0, 5, 10],
}

PROFILES = {
    "desk": {
        "scenario": _DATUM_SCENARIO,
        "dynamics": _DATUM_DYNAMICS,
        "criteria": {"min_detections": 1, "max_avoidances": None},
        "splitting": {
            **_COMMON_SPLITTING,
            "population": 100,
            "max_iterations": 20,
            "trajectories_per_score": 2000,
        },
    },
    "paper": {
        "scenario": _DATUM_SCENARIO,
        "dynamics": _DATUM_DYNAMICS,
        "criteria": {"min_detections": 1, "max_avoidances": None},
        "splitting": {
            **_COMMON_SPLITTING,
            "population": 800,
            "max_iterations": 50,
            "trajectories_per_score": 70000,
        },
    },
}

_SECTIONS = ("scenario", "dynamics", "criteria", "splitting")


def _deep_merge(base: dict, overrides: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in overrides.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _deep_merge(out[k], v)
        else:
            out[k] = v
    return out


def _require_keys(section: str, given: dict, allowed: dict):
    for key in given:
        if key not in allowed:
            raise ConfigError(f"unknown key {section}.{key}")


def _build_scenario(doc: dict) -> Scenario:
    sc = doc["scenario"]
    _require_keys("scenario", sc, _DATUM_SCENARIO)
    th = sc["theater"]
    _require_keys("scenario.theater", th, _DATUM_SCENARIO["theater"])
    sp = sc["sensor"]
    _require_keys("scenario.sensor", sp, _DATUM_SCENARIO["sensor"])
    try:
        theater = Theater(
            tuple((v[0], v[1]) for v in th["vertices"]),
            float(th["horizon"]),
            float(th.get("hunter_delay", 0.0)),
        )
        spec = SensorSpec(
            float(sp["detection_radius"]),
            float(sp["counter_detection_radius"]),
            int(sp["max_activations"]),
            float(sp["carrier_speed"]),
        )
        constraints = ConstraintSet(theater, spec, int(sc["p_max"]))
        dyn_doc = dict(doc["dynamics"])
        _require_keys("dynamics", dyn_doc, _DATUM_DYNAMICS)
        if dyn_doc.get("initial_position_center") is not None:
            dyn_doc["initial_position_center"] = tuple(dyn_doc["initial_position_center"])
        dynamics = DynamicsParams(**dyn_doc)
        cr = doc["criteria"]
        _require_keys("criteria", cr, {"min_detections": 1, "max_avoidances": None})
        criteria = DetectionCriteria(
            int(cr.get("min_detections", 1)),
            None if cr.get("max_avoidances") is None else int(cr["max_avoidances"]),
        )
    except ValueError as e:
        raise ConfigError(str(e)) from e
    entry = sc.get("carrier_entry")
    entry = theater.centroid if entry is None else (float(entry[0]), float(entry[1]))
    if not contains(theater, entry):
        raise ConfigError("scenario.carrier_entry must lie inside the theater")
    center = dynamics.initial_position_center
    if center is not None and not contains(theater, center):
        raise ConfigError("dynamics.initial_position_center must lie inside the theater")
    return Scenario(constraints, dynamics, criteria, entry)


def _build_splitting(doc: dict) -> SplittingConfig:
    sp = dict(doc["splitting"])
    _require_keys("splitting", sp, {**_COMMON_SPLITTING, "population": 1,
                                    "max_iterations": 1, "trajectories_per_score": 1})
    try:
        sp["move_weights"] = MoveWeights(tuple(sp["move_weights"]))
        ms = sp["move_sensor"]
        _require_keys("splitting.move_sensor", ms, {"w": 1, "sigma_small": 1, "sigma_large": 1})
        sp["move_sensor"] = MoveSensorParams(
            tuple(ms["w"]), float(ms["sigma_small"]), float(ms["sigma_large"])
        )
        sp["density_snapshots"] = tuple(int(i) for i in sp["density_snapshots"])
        return SplittingConfig(**sp)
    except ValueError as e:
        raise ConfigError(str(e)) from e


def load_document(path: str | None = None, profile: str = "desk") -> dict:
    """Profile document deep-merged with the optional user file."""
    if profile not in PROFILES:
        raise ConfigError(f"unknown profile {profile!r}; choose from {sorted(PROFILES)}")
    doc = copy.deepcopy(PROFILES[profile])
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                user = json.load(fh)
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e
        if not isinstance(user, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
        for key in user:
            if key not in _SECTIONS:
                raise ConfigError(f"unknown section {key!r} (expected one of {_SECTIONS})")
        doc = _deep_merge(doc, user)
    return doc


def load_config(path: str | None = None, profile: str = "desk"):
    """Validated (SplittingConfig, Scenario) pair for a profile + user file."""
    doc = load_document(path, profile)
    return _build_splitting(doc), _build_scenario(doc)


def resolved_document(config: SplittingConfig, scenario: Scenario) -> dict:
    """Complete JSON-serializable document reproducing (config, scenario)."""
    th = scenario.constraints.theater
    sp = scenario.constraints.spec
    dyn = scenario.dynamics
    cr = scenario.criteria
    return {
        "scenario": {
            "theater": {
                "vertices": [list(v) for v in th.vertices],
                "horizon": th.horizon,
                "hunter_delay": th.hunter_delay,
            },
            "sensor": {
                "detection_radius": sp.detection_radius,
                "counter_detection_radius": sp.counter_detection_radius,
                "max_activations": sp.max_activations,
                "carrier_speed": sp.carrier_speed,
            },
            "p_max": scenario.constraints.p_max,
            "carrier_entry": list(scenario.carrier_entry),
        },
        "dynamics": {
            "mean_leg_duration": dyn.mean_leg_duration,
            "std_leg_duration": dyn.std_leg_duration,
            "leg_duration_halfwidth": dyn.leg_duration_halfwidth,
            "course_std": dyn.course_std,
            "course_halfwidth": dyn.course_halfwidth,
            "escape_halfwidth": dyn.escape_halfwidth,
            "speed_mean": dyn.speed_mean,
            "speed_std": dyn.speed_std,
            "initial_position_mode": dyn.initial_position_mode,
            "initial_position_center": (
                None if dyn.initial_position_center is None
                else list(dyn.initial_position_center)
            ),
            "initial_position_std": dyn.initial_position_std,
            "initial_course_mode": dyn.initial_course_mode,
            "initial_course": dyn.initial_course,
            "course_memory": dyn.course_memory,
            "reactive": dyn.reactive,
            "resample_speed_per_leg": dyn.resample_speed_per_leg,
        },
        "criteria": {
            "min_detections": cr.min_detections,
            "max_avoidances": cr.max_avoidances,
        },
        "splitting": {
            "population": config.population,
            "elite_fraction": config.elite_fraction,
            "max_iterations": config.max_iterations,
            "burn_in_b0": config.burn_in_b0,
            "burn_in_alpha": config.burn_in_alpha,
            "repopulation": config.repopulation,
            "stagnation_patience": config.stagnation_patience,
            "stagnation_decrease": config.stagnation_decrease,
            "stagnation_tolerance": config.stagnation_tolerance,
            "trajectories_per_score": config.trajectories_per_score,
            "max_retries": config.max_retries,
            "move_set": config.move_set,
            "move_weights": list(config.move_weights.lambdas),
            "move_sensor": {
                "w": list(config.move_sensor.w),
                "sigma_small": config.move_sensor.sigma_small,
                "sigma_large": config.move_sensor.sigma_large,
            },
            "move_sensor_schedule": config.move_sensor_schedule,
            "scan": config.scan,
            "rescore_full": config.rescore_full,
            "seed": config.seed,
            "eval_seed": config.eval_seed,
            "threads": config.threads,
            "wall_clock_budget": config.wall_clock_budget,
            "initial_sensor_count": config.initial_sensor_count,
            "init_attempts": config.init_attempts,
            "density_grid": config.density_grid,
            "density_time_bins": config.density_time_bins,
            "density_snapshots": list(config.density_snapshots),
        },
    }
