"""Gibbs sampler moves over deployments and the accept/reject sweep.

Six component moves mutate a solution: add/remove a sensor, add/remove an
activation instant, relocate a sensor by a two-scale Gaussian mixture, and
swap the first activation instants of two sensors.  A proposal is kept only
if it is feasible and its fresh score clears the current threshold; each
update retries a bounded number of times before keeping the incumbent.

Structural changes invalidate the carrier tour, so setup times are always
recomputed downstream of a modification before feasibility is judged.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

from gsres import _core
from gsres.estimator import DetectionCriteria, score_or_reject
from gsres.rng import RngStream
from gsres.scenario import (
    ConstraintSet,
    Sensor,
    Solution,
    compute_setup_times,
    is_feasible,
    uniform_position,
)


class MoveKind(Enum):
    ADD_SENSOR = "add_sensor"
    ADD_ACTIVATION = "add_activation"
    REMOVE_SENSOR = "remove_sensor"
    REMOVE_ACTIVATION = "remove_activation"
    MOVE_SENSOR = "move_sensor"
    SWAP_SENSORS = "swap_sensors"


# composite update used by the fixed-sensor-count experiment: a removal
# immediately followed by an addition, counted as a single proposal
REMOVE_ADD = "remove_add"


@dataclass(frozen=True)
class MoveWeights:
    """Probabilities of drawing each of the six moves (must sum to 1)."""

    lambdas: tuple[float, float, float, float, float, float]

    def __post_init__(self):
        lam = tuple(float(v) for v in self.lambdas)
        object.__setattr__(self, "lambdas", lam)
        if len(lam) != 6:
            raise ValueError("move_weights needs exactly 6 entries")
        if any(v < 0 for v in lam):
            raise ValueError("move_weights must be nonnegative")
        if abs(sum(lam) - 1.0) > 1e-9:
            raise ValueError("move_weights must sum to 1")


@dataclass(frozen=True)
class MoveSensorParams:
    """Two-scale isotropic Gaussian mixture for the relocation move."""

    w: tuple[float, float] = (0.5, 0.5)
    sigma_small: float = 0.0
    sigma_large: float = 0.0

    def __post_init__(self):
        if len(self.w) != 2 or any(v < 0 for v in self.w):
            raise ValueError("move_sensor.w needs two nonnegative weights")
        if abs(self.w[0] + self.w[1] - 1.0) > 1e-9:
            raise ValueError("move_sensor.w must sum to 1")
        if self.sigma_small < 0 or self.sigma_large < self.sigma_small:
            raise ValueError("move_sensor needs 0 <= sigma_small <= sigma_large")


_COUNTERS = ("proposed", "accepted", "rejected_infeasible",
             "rejected_below_threshold", "rejected_retry_exhausted")


@dataclass
class MoveStats:
    """Per-move proposal counters; every proposal lands in exactly one outcome,
    so proposed == accepted + rejected_* holds by construction."""

    counts: dict = field(default_factory=dict)

    def _row(self, label: str) -> dict:
        if label not in self.counts:
            self.counts[label] = {k: 0 for k in _COUNTERS}
        return self.counts[label]

    def record(self, label: str, outcome: str):
        row = self._row(label)
        row["proposed"] += 1
        row[outcome] += 1

    def merge(self, other: "MoveStats"):
        for label, row in other.counts.items():
            mine = self._row(label)
            for k, v in row.items():
                mine[k] += v

    def totals(self) -> dict:
        out = {k: 0 for k in _COUNTERS}
        for row in self.counts.values():
            for k in _COUNTERS:
                out[k] += row[k]
        return out

    def acceptance_rate(self) -> float | None:
        tot = self.totals()
        return tot["accepted"] / tot["proposed"] if tot["proposed"] else None


# ---------------------------------------------------------------------------
# Individual moves.  Each returns a candidate Solution, or None when its
# structural precondition is unmet (the sweep then draws another move).
# ---------------------------------------------------------------------------


def _active_indices(solution: Solution) -> list[int]:
    return [i for i, s in enumerate(solution.sensors) if s.active]


def _pick(solution: Solution, rng: RngStream, forced):
    idx = _active_indices(solution)
    if not idx:
        return None
    if forced is not None:
        return forced if forced in idx else None
    return idx[rng.integer(len(idx))]


def _add_sensor(solution, constraints, carrier_entry, rng, forced=None):
    if solution.active_count >= constraints.p_max:
        return None
    x, y = uniform_position(constraints.theater, rng)
    u = rng.uniform()
    sensors = solution.sensors + (Sensor(x, y, ()),)
    cand = compute_setup_times(Solution(sensors), constraints, carrier_entry)
    new = cand.sensors[-1]
    t1 = new.setup_time + u * (constraints.theater.horizon - new.setup_time)
    sensors = cand.sensors[:-1] + (replace(new, activations=(t1,)),)
    return Solution(sensors)


def _add_activation(solution, constraints, carrier_entry, rng, forced=None):
    j = _pick(solution, rng, forced)
    if j is None:
        return None
    s = solution.sensors[j]
    if len(s.activations) >= constraints.spec.max_activations:
        return None
    t_new = s.activations[0] + rng.uniform() * (constraints.theater.horizon - s.activations[0])
    acts = tuple(sorted(s.activations + (t_new,)))
    sensors = solution.sensors[:j] + (replace(s, activations=acts),) + solution.sensors[j + 1 :]
    return Solution(sensors)


def _remove_sensor(solution, constraints, carrier_entry, rng, forced=None):
    j = _pick(solution, rng, forced)
    if j is None:
        return None
    s = solution.sensors[j]
    sensors = solution.sensors[:j] + (replace(s, active=False),) + solution.sensors[j + 1 :]
    return compute_setup_times(Solution(sensors), constraints, carrier_entry)


def _remove_activation(solution, constraints, carrier_entry, rng, forced=None):
    j = _pick(solution, rng, forced)
    if j is None:
        return None
    s = solution.sensors[j]
    if len(s.activations) <= 1:
        return None
    # the first instant is protected; drop one of the later ones
    k = 1 + rng.integer(len(s.activations) - 1)
    acts = s.activations[:k] + s.activations[k + 1 :]
    sensors = solution.sensors[:j] + (replace(s, activations=acts),) + solution.sensors[j + 1 :]
    return Solution(sensors)


def _move_sensor(solution, constraints, carrier_entry, rng, move_params, forced=None):
    j = _pick(solution, rng, forced)
    if j is None:
        return None
    s = solution.sensors[j]
    sigma = move_params.sigma_small if rng.uniform() < move_params.w[0] else move_params.sigma_large
    x = s.x + sigma * _core.normal_quantile(rng.uniform())
    y = s.y + sigma * _core.normal_quantile(rng.uniform())
    sensors = solution.sensors[:j] + (replace(s, x=x, y=y),) + solution.sensors[j + 1 :]
    return compute_setup_times(Solution(sensors), constraints, carrier_entry)


def _swap_sensors(solution, constraints, carrier_entry, rng, forced=None):
    idx = _active_indices(solution)
    if len(idx) < 2:
        return None
    if forced is not None and forced not in idx:
        return None
    k = forced if forced is not None else idx[rng.integer(len(idx))]
    rest = [i for i in idx if i != k]
    r = rest[rng.integer(len(rest))]
    sk, sr = solution.sensors[k], solution.sensors[r]
    if not sk.activations or not sr.activations:
        return None
    sensors = list(solution.sensors)
    # keep only the first instants, swapped; later instants are deleted
    sensors[k] = replace(sk, activations=(sr.activations[0],))
    sensors[r] = replace(sr, activations=(sk.activations[0],))
    return Solution(tuple(sensors))


def _remove_add(solution, constraints, carrier_entry, rng, forced=None):
    removed = _remove_sensor(solution, constraints, carrier_entry, rng, forced)
    if removed is None:
        return None
    return _add_sensor(removed, constraints, carrier_entry, rng)


def propose(
    kind: MoveKind,
    solution: Solution,
    constraints: ConstraintSet,
    move_params: MoveSensorParams,
    rng: RngStream,
    carrier_entry=None,
    target: int | None = None,
) -> Solution | None:
    """Draw one candidate for the given move (not yet accepted)."""
    entry = _entry_of(constraints, carrier_entry)
    if kind is MoveKind.MOVE_SENSOR:
        return _move_sensor(solution, constraints, entry, rng, move_params, target)
    fn = {
        MoveKind.ADD_SENSOR: _add_sensor,
        MoveKind.ADD_ACTIVATION: _add_activation,
        MoveKind.REMOVE_SENSOR: _remove_sensor,
        MoveKind.REMOVE_ACTIVATION: _remove_activation,
        MoveKind.SWAP_SENSORS: _swap_sensors,
    }[kind]
    return fn(solution, constraints, entry, rng, target)


def _entry_of(constraints: ConstraintSet, carrier_entry):
    if carrier_entry is not None:
        return carrier_entry
    return constraints.theater.centroid


# ---------------------------------------------------------------------------
# Move menus and the sweep.
# ---------------------------------------------------------------------------

FULL_SET = "full"
FIXED_P_SET = "fixed_p"


def move_menu(move_set: str, weights: MoveWeights, move_params: MoveSensorParams):
    """(label, proposer, weight) triples for the chosen move set."""
    if move_set == FIXED_P_SET:
        return [
            (MoveKind.MOVE_SENSOR.value,
             lambda sol, c, e, rng, forced=None: _move_sensor(sol, c, e, rng, move_params, forced),
             0.5),
            (REMOVE_ADD, _remove_add, 0.5),
        ]
    if move_set != FULL_SET:
        raise ValueError("move_set must be 'full' or 'fixed_p'")
    proposers = {
        MoveKind.ADD_SENSOR: _add_sensor,
        MoveKind.ADD_ACTIVATION: _add_activation,
        MoveKind.REMOVE_SENSOR: _remove_sensor,
        MoveKind.REMOVE_ACTIVATION: _remove_activation,
        MoveKind.MOVE_SENSOR:
            lambda sol, c, e, rng, forced=None: _move_sensor(sol, c, e, rng, move_params, forced),
        MoveKind.SWAP_SENSORS: _swap_sensors,
    }
    return [
        (kind.value, proposers[kind], lam)
        for kind, lam in zip(MoveKind, weights.lambdas)
        if lam > 0
    ]


def _draw_label(menu, rng: RngStream):
    u = rng.uniform() * sum(w for _, _, w in menu)
    acc = 0.0
    for label, fn, w in menu:
        acc += w
        if u <= acc:
            return label, fn
    return menu[-1][0], menu[-1][1]


def gibbs_sweep(
    solution: Solution,
    score: float,
    threshold: float,
    b: int,
    menu,
    constraints: ConstraintSet,
    params,
    criteria: DetectionCriteria,
    n_score: int,
    max_retries: int,
    rng: RngStream,
    stats: MoveStats,
    eval_root: int,
    carrier_entry=None,
    scan: str = "random",
) -> tuple[Solution, float]:
    """Apply b component updates, keeping the incumbent on rejection.

    Every generated candidate is scored with the same evaluation root, so
    accept/reject comparisons inside one sweep are against consistent
    estimates.  The returned solution is feasible and scores >= threshold
    (or is the untouched incumbent).  Retries redraw the move's random
    values for the same kind; an unmet precondition redraws the kind.
    """
    entry = _entry_of(constraints, carrier_entry)
    if scan == "systematic":
        targets = _active_indices(solution)
    elif scan == "random":
        targets = [None] * b
    else:
        raise ValueError("scan must be 'random' or 'systematic'")

    for forced in targets:
        label = None
        cand = None
        for _ in range(16):
            label, fn = _draw_label(menu, rng)
            cand = fn(solution, constraints, entry, rng, forced)
            if cand is not None:
                break
        if cand is None:
            continue  # no applicable move for this update
        for attempt in range(1, max_retries + 1):
            if attempt > 1:
                cand = fn(solution, constraints, entry, rng, forced)
                if cand is None:
                    continue  # redrawn values hit a precondition; retry
            last = attempt == max_retries
            if is_feasible(cand, constraints):
                est = score_or_reject(
                    cand, constraints, params, criteria, n_score, eval_root, threshold
                )
                if est is not None:
                    stats.record(label, "accepted")
                    solution, score = cand.compact(), est.value
                    break
                stats.record(label, "rejected_retry_exhausted" if last
                             else "rejected_below_threshold")
            else:
                stats.record(label, "rejected_retry_exhausted" if last
                             else "rejected_infeasible")
    return solution, score
