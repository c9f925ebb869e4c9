"""Detection scoring: cookie-cutter cost and the crude Monte Carlo estimate.

The score of a deployment is the fraction of simulated target trajectories
it detects.  Trajectories are regenerated for every scored solution (a
reactive target's path distribution depends on the deployment), each from
its own substream of the estimate's root seed, so an estimate is a pure
function of (solution, params, N, root) whatever the batching.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from gsres import _core
from gsres.dynamics import DETECTION, DynamicsParams, Trajectory, pack_scenario
from gsres.scenario import ConstraintSet, Sensor, SensorSpec, Solution, is_feasible

PING_NONE = "none"
PING_COUNTER_DETECTION = "counter_detection"
PING_DETECTION = "detection"

_EMPTY_F = np.zeros(0, dtype=float)
_EMPTY_I = np.zeros(0, dtype=np.int64)


@dataclass(frozen=True)
class DetectionCriteria:
    """What a trajectory must satisfy to count as detected."""

    min_detections: int = 1
    max_avoidances: int | None = None

    def __post_init__(self):
        if self.min_detections < 1:
            raise ValueError("criteria.min_detections must be >= 1")
        if self.max_avoidances is not None and self.max_avoidances < 0:
            raise ValueError("criteria.max_avoidances must be >= 0 when set")


@dataclass(frozen=True)
class ScoreEstimate:
    """CMC detection-probability estimate with its relative error."""

    value: float
    n_trajectories: int
    relative_error: float | None

    @classmethod
    def from_counts(cls, detected: int, n: int) -> "ScoreEstimate":
        value = detected / n
        if value > 0.0:
            re = math.sqrt(1.0 - value) / math.sqrt(n * value)
        else:
            re = None  # undefined at zero estimate
        return cls(value, n, re)


def ping_outcome(sensor: Sensor, spec: SensorSpec, target_position) -> str:
    """Classify one ping against the target's position at ping time."""
    dx = target_position[0] - sensor.x
    dy = target_position[1] - sensor.y
    d = math.sqrt(dx * dx + dy * dy)
    if d <= spec.detection_radius:
        return PING_DETECTION
    if d <= spec.counter_detection_radius:
        return PING_COUNTER_DETECTION
    return PING_NONE


def trajectory_cost(
    trajectory: Trajectory,
    solution: Solution,
    criteria: DetectionCriteria,
    constraints: ConstraintSet,
) -> int:
    """Indicator cost of one trajectory; infeasible solutions always cost 0."""
    if not is_feasible(solution, constraints):
        return 0
    n_det = sum(1 for e in trajectory.events if e.kind == DETECTION)
    n_avoid = len(trajectory.events) - n_det
    if n_det < criteria.min_detections:
        return 0
    if criteria.max_avoidances is not None and n_avoid > criteria.max_avoidances:
        return 0
    return 1


def _batch(packed, root, start, n, need=-1, first_counts=None):
    fc = _EMPTY_I if first_counts is None else first_counts
    tout = np.zeros(6, dtype=np.int64)
    detected, ran = _core.simulate_batch(
        *packed.core_args(), root, start, n, need, fc, _EMPTY_F, _EMPTY_I, tout
    )
    return int(detected), int(ran)


def estimate_score(
    solution: Solution,
    constraints: ConstraintSet,
    params: DynamicsParams,
    criteria: DetectionCriteria,
    n: int,
    rng_root: int,
    threads: int = 1,
) -> ScoreEstimate:
    """Average the indicator cost over n independent trajectory rollouts."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not is_feasible(solution, constraints):
        return ScoreEstimate(0.0, n, None)
    packed = pack_scenario(
        solution, constraints, params,
        min_detections=criteria.min_detections,
        max_avoidances=criteria.max_avoidances,
        early_exit=True,
    )
    if threads > 1 and n >= 2 * threads:
        chunk = (n + threads - 1) // threads
        spans = [(s, min(chunk, n - s)) for s in range(0, n, chunk)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda sp: _batch(packed, rng_root, sp[0], sp[1]), spans))
        detected = sum(p[0] for p in parts)
    else:
        detected, _ = _batch(packed, rng_root, 0, n)
    return ScoreEstimate.from_counts(detected, n)


def score_or_reject(
    solution: Solution,
    constraints: ConstraintSet,
    params: DynamicsParams,
    criteria: DetectionCriteria,
    n: int,
    rng_root: int,
    threshold: float,
) -> ScoreEstimate | None:
    """Estimate unless the estimate provably lands below the threshold.

    Returns None as soon as the remaining rollouts cannot lift the detection
    count to the threshold; a non-None result is the exact full-n estimate
    (identical to estimate_score with the same root).
    """
    if not is_feasible(solution, constraints):
        return None if threshold > 0.0 else ScoreEstimate(0.0, n, None)
    packed = pack_scenario(
        solution, constraints, params,
        min_detections=criteria.min_detections,
        max_avoidances=criteria.max_avoidances,
        early_exit=True,
    )
    need = int(math.floor(threshold * n)) if threshold > 0.0 else -1
    detected, ran = _batch(packed, rng_root, 0, n, need=need)
    if ran < n:
        return None
    est = ScoreEstimate.from_counts(detected, n)
    return est if est.value >= threshold else None


def detection_attribution(
    solution: Solution,
    constraints: ConstraintSet,
    params: DynamicsParams,
    criteria: DetectionCriteria,
    n: int,
    rng_root: int,
) -> np.ndarray:
    """First-detecting-sensor counts over n rollouts (deployment order).

    Counts sum to the number of detected trajectories.
    """
    active = solution.active_count
    counts = np.zeros(max(active, 1), dtype=np.int64)
    if active == 0 or not is_feasible(solution, constraints):
        return counts[:active]
    packed = pack_scenario(
        solution, constraints, params,
        min_detections=criteria.min_detections,
        max_avoidances=criteria.max_avoidances,
        early_exit=True,
    )
    _batch(packed, rng_root, 0, n, first_counts=counts)
    return counts
