"""Reactive target motion: leg-by-leg rectilinear trajectories.

A trajectory is a chain of constant-velocity legs.  Leg durations and course
changes are truncated-normal draws; the course law switches with the
target's knowledge of the deployed sensors: unaware targets random-walk
their heading, a counter-detected target steers tangentially around the
threat, a detected target flees radially with a uniform course spread.
Contacts happen only at sensor ping instants and split the current leg.

The rollout itself lives in the compiled core; this module owns the
parameter/trajectory types, the scalar packing and the standalone motion
operations used by tests and analysis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from gsres import _core
from gsres.rng import RngStream
from gsres.scenario import ConstraintSet, SensorSpec, Solution, prepared_geometry

UNAWARE = 0
AVOIDING = 1
ESCAPING = 2

TRUNCATED_GAUSSIAN = "truncated_gaussian"
UNIFORM_RADIAL = "uniform_radial"

COUNTER_DETECTION = "counter_detection"
DETECTION = "detection"

_EVENT_KIND = {_core.EVENT_COUNTER_DETECTION: COUNTER_DETECTION, _core.EVENT_DETECTION: DETECTION}

_SPEED_FLOOR = 1e-6
_DT_FLOOR = 1e-9


@dataclass(frozen=True)
class IntelligenceState:
    """Target knowledge level and the last most threatening sensor index."""

    mu: int = UNAWARE
    threat: int | None = None

    def __post_init__(self):
        if self.mu not in (UNAWARE, AVOIDING, ESCAPING):
            raise ValueError("mu must be 0, 1 or 2")
        if self.mu != UNAWARE and self.threat is None:
            raise ValueError("an aware target must carry a threat index")


@dataclass(frozen=True)
class Waypoint:
    x: float
    y: float
    vx: float
    vy: float
    t: float

    @property
    def speed(self) -> float:
        return math.sqrt(self.vx * self.vx + self.vy * self.vy)

    @property
    def heading(self) -> float:
        return math.atan2(self.vy, self.vx)


@dataclass(frozen=True)
class ContactEvent:
    time: float
    sensor: int
    kind: str


@dataclass(frozen=True)
class Trajectory:
    waypoints: tuple[Waypoint, ...]
    events: tuple[ContactEvent, ...]

    @property
    def K(self) -> int:
        return len(self.waypoints)

    @property
    def duration(self) -> float:
        return self.waypoints[-1].t - self.waypoints[0].t

    def position_at(self, t: float) -> tuple[float, float]:
        """Position at absolute time t (legs are constant-velocity)."""
        wps = self.waypoints
        if t <= wps[0].t:
            return (wps[0].x, wps[0].y)
        for i in range(len(wps) - 1):
            if t <= wps[i + 1].t:
                dt = t - wps[i].t
                return (wps[i].x + wps[i].vx * dt, wps[i].y + wps[i].vy * dt)
        return (wps[-1].x, wps[-1].y)


@dataclass(frozen=True)
class DynamicsParams:
    """Target motion law.

    Zero standard deviations are accepted as the deterministic limit of the
    corresponding truncated law (the draw collapses to its mean).
    """

    mean_leg_duration: float
    std_leg_duration: float
    leg_duration_halfwidth: float
    course_std: float
    course_halfwidth: float
    speed_mean: float
    speed_std: float
    escape_halfwidth: float = math.pi / 4
    initial_position_mode: str = "gaussian"  # "uniform" | "gaussian"
    initial_position_center: tuple[float, float] | None = None  # None: theater centroid
    initial_position_std: float = 0.0
    initial_course_mode: str = "uniform"  # "uniform" | "fixed"
    initial_course: float = 0.0
    course_memory: str = "last"  # "last" | "initial"
    reactive: bool = True
    resample_speed_per_leg: bool = False

    def __post_init__(self):
        if self.mean_leg_duration <= 0:
            raise ValueError("dynamics.mean_leg_duration must be > 0")
        for name in ("std_leg_duration", "course_std", "speed_std", "initial_position_std"):
            if getattr(self, name) < 0:
                raise ValueError(f"dynamics.{name} must be >= 0")
        if self.std_leg_duration > 0 and self.leg_duration_halfwidth <= 0:
            raise ValueError("dynamics.leg_duration_halfwidth must be > 0")
        if self.course_std > 0 and self.course_halfwidth <= 0:
            raise ValueError("dynamics.course_halfwidth must be > 0")
        if self.speed_mean <= 0:
            raise ValueError("dynamics.speed_mean must be > 0")
        if self.escape_halfwidth <= 0:
            raise ValueError("dynamics.escape_halfwidth must be > 0")
        if self.initial_position_mode not in ("uniform", "gaussian"):
            raise ValueError("dynamics.initial_position_mode must be 'uniform' or 'gaussian'")
        if self.initial_position_mode == "gaussian" and self.initial_position_std <= 0:
            raise ValueError("dynamics.initial_position_std must be > 0 for gaussian starts")
        if self.initial_course_mode not in ("uniform", "fixed"):
            raise ValueError("dynamics.initial_course_mode must be 'uniform' or 'fixed'")
        if self.course_memory not in ("last", "initial"):
            raise ValueError("dynamics.course_memory must be 'last' or 'initial'")


# ---------------------------------------------------------------------------
# Elementary motion operations.
# ---------------------------------------------------------------------------


def sample_truncated_gaussian(mean, std, lo, hi, rng: RngStream) -> float:
    """Draw from a Gaussian(mean, std^2) conditioned on [lo, hi] (inverse CDF)."""
    if std <= 0:
        raise ValueError("std must be > 0")
    if not lo < hi:
        raise ValueError("need lo < hi")
    pa = _core.normal_cdf((lo - mean) / std)
    pb = _core.normal_cdf((hi - mean) / std)
    if pb - pa <= 0.0:
        raise ValueError("truncation interval carries no probability mass")
    return _core.truncated_normal(mean, std, lo, hi, rng.uniform())


def transition(wp: Waypoint, dt: float) -> Waypoint:
    """Advance a waypoint by dt of rectilinear motion (velocity unchanged)."""
    if dt < 0:
        raise ValueError("dt must be >= 0")
    return Waypoint(wp.x + wp.vx * dt, wp.y + wp.vy * dt, wp.vx, wp.vy, wp.t + dt)


def apply_course(wp: Waypoint, beta: float) -> Waypoint:
    """Rotate the waypoint velocity by beta; speed, position and time kept."""
    c, s = math.cos(beta), math.sin(beta)
    return Waypoint(wp.x, wp.y, wp.vx * c - wp.vy * s, wp.vx * s + wp.vy * c, wp.t)


def next_course_mean(
    state: IntelligenceState,
    wp: Waypoint,
    solution: Solution,
    params: DynamicsParams,
    spec: SensorSpec,
) -> tuple[float, str]:
    """Mean of the next course law and which law applies.

    The waypoint's own heading stands for the remembered course (callers pick
    the initial or the last waypoint according to the course-memory mode).
    """
    if state.mu == UNAWARE:
        return (wp.heading, TRUNCATED_GAUSSIAN)
    sensors = solution.active_sensors
    threat = sensors[state.threat]
    if state.mu == AVOIDING:
        mean = _core.avoid_course(
            wp.x, wp.y, wp.heading, threat.x, threat.y, spec.counter_detection_radius
        )
        return (float(mean), TRUNCATED_GAUSSIAN)
    return (math.atan2(wp.y - threat.y, wp.x - threat.x), UNIFORM_RADIAL)


# ---------------------------------------------------------------------------
# Packing for the simulation core.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PackedScenario:
    """Flattened arrays consumed by the rollout core."""

    ex: np.ndarray
    ey: np.ndarray
    enx: np.ndarray
    eny: np.ndarray
    tris: np.ndarray
    tcum: np.ndarray
    sx: np.ndarray
    sy: np.ndarray
    pt: np.ndarray
    pown: np.ndarray
    dp: np.ndarray
    ip: np.ndarray

    def core_args(self):
        return (
            self.ex, self.ey, self.enx, self.eny, self.tris, self.tcum,
            self.sx, self.sy, self.pt, self.pown, self.dp, self.ip,
        )


def pack_scenario(
    solution: Solution,
    constraints: ConstraintSet,
    params: DynamicsParams,
    min_detections: int = 1,
    max_avoidances: int | None = None,
    early_exit: bool = False,
) -> PackedScenario:
    geo = prepared_geometry(constraints.theater)
    active = solution.active_sensors
    sx = np.ascontiguousarray([s.x for s in active], dtype=float)
    sy = np.ascontiguousarray([s.y for s in active], dtype=float)
    pings = [(t, i) for i, s in enumerate(active) for t in s.activations]
    pings.sort(key=lambda p: (p[0], p[1]))
    pt = np.ascontiguousarray([p[0] for p in pings], dtype=float)
    pown = np.ascontiguousarray([p[1] for p in pings], dtype=np.int64)

    dp = np.zeros(_core.DP_SIZE, dtype=float)
    ip = np.zeros(_core.IP_SIZE, dtype=np.int64)
    dp[_core.DP_HORIZON] = constraints.theater.horizon
    dp[_core.DP_MU_DT] = params.mean_leg_duration
    dp[_core.DP_SD_DT] = params.std_leg_duration
    dt_lo = max(params.mean_leg_duration - params.leg_duration_halfwidth, _DT_FLOOR)
    dt_hi = params.mean_leg_duration + params.leg_duration_halfwidth
    dp[_core.DP_DT_LO] = dt_lo
    dp[_core.DP_DT_HI] = dt_hi
    if params.std_leg_duration > 0:
        dp[_core.DP_PA_DT] = _core.normal_cdf(
            (dt_lo - params.mean_leg_duration) / params.std_leg_duration
        )
        dp[_core.DP_PB_DT] = _core.normal_cdf(
            (dt_hi - params.mean_leg_duration) / params.std_leg_duration
        )
    dp[_core.DP_SD_BETA] = params.course_std
    dp[_core.DP_A_BETA] = params.course_halfwidth
    if params.course_std > 0:
        dp[_core.DP_PA_BETA] = _core.normal_cdf(-params.course_halfwidth / params.course_std)
        dp[_core.DP_PB_BETA] = _core.normal_cdf(params.course_halfwidth / params.course_std)
    dp[_core.DP_A_ESCAPE] = params.escape_halfwidth
    dp[_core.DP_SP_MEAN] = params.speed_mean
    dp[_core.DP_SP_SD] = params.speed_std
    sp_lo = max(params.speed_mean - 3.0 * params.speed_std, _SPEED_FLOOR)
    sp_hi = params.speed_mean + 3.0 * params.speed_std
    dp[_core.DP_SP_LO] = sp_lo
    dp[_core.DP_SP_HI] = sp_hi
    if params.speed_std > 0:
        dp[_core.DP_PA_SP] = _core.normal_cdf((sp_lo - params.speed_mean) / params.speed_std)
        dp[_core.DP_PB_SP] = _core.normal_cdf((sp_hi - params.speed_mean) / params.speed_std)
    center = params.initial_position_center
    if center is None:
        center = (float(geo.centroid[0]), float(geo.centroid[1]))
    dp[_core.DP_INIT_CX] = center[0]
    dp[_core.DP_INIT_CY] = center[1]
    dp[_core.DP_INIT_SD] = params.initial_position_std
    dp[_core.DP_COURSE0] = params.initial_course
    dp[_core.DP_RADIUS] = constraints.spec.detection_radius
    dp[_core.DP_RADIUS_CD] = constraints.spec.counter_detection_radius

    ip[_core.IP_INIT_GAUSS] = 1 if params.initial_position_mode == "gaussian" else 0
    ip[_core.IP_COURSE_FIXED] = 1 if params.initial_course_mode == "fixed" else 0
    ip[_core.IP_MEMORY_INITIAL] = 1 if params.course_memory == "initial" else 0
    ip[_core.IP_REACTIVE] = 1 if params.reactive else 0
    ip[_core.IP_RESAMPLE_SPEED] = 1 if params.resample_speed_per_leg else 0
    ip[_core.IP_MIN_DET] = min_detections
    ip[_core.IP_MAX_AVOID] = -1 if max_avoidances is None else max_avoidances
    ip[_core.IP_EARLY_EXIT] = 1 if early_exit else 0

    return PackedScenario(
        geo.ex, geo.ey, geo.enx, geo.eny, geo.tris, geo.tcum, sx, sy, pt, pown, dp, ip
    )


def _record_capacity(packed: PackedScenario, constraints: ConstraintSet, params: DynamicsParams):
    horizon = constraints.theater.horizon
    dt_lo = max(packed.dp[_core.DP_DT_LO], _DT_FLOOR)
    legs = int(horizon / dt_lo) + 4
    bbox = prepared_geometry(constraints.theater).bbox
    min_side = max(min(bbox[2] - bbox[0], bbox[3] - bbox[1]), 1e-9)
    reflections = int(packed.dp[_core.DP_SP_HI] * horizon / min_side) + 4
    return 2 * legs + len(packed.pt) + reflections + 16


def generate_trajectory(
    solution: Solution,
    constraints: ConstraintSet,
    params: DynamicsParams,
    rng: RngStream,
) -> Trajectory:
    """Generate one feasible trajectory, recording waypoints and contacts.

    The same stream state always yields the same trajectory, bit for bit.
    """
    root = rng.child_seed()
    packed = pack_scenario(solution, constraints, params)
    return _recorded(packed, constraints, params, root, 0)


def _recorded(packed, constraints, params, root: int, idx: int) -> Trajectory:
    cap = _record_capacity(packed, constraints, params)
    rec = [np.zeros(cap, dtype=float) for _ in range(5)]
    ev_cap = max(len(packed.pt), 1)
    ev_t = np.zeros(ev_cap, dtype=float)
    ev_sn = np.zeros(ev_cap, dtype=np.int64)
    ev_kind = np.zeros(ev_cap, dtype=np.int64)
    tout = np.zeros(6, dtype=np.int64)
    _core.simulate_recorded(
        *packed.core_args(), root, idx, rec[0], rec[1], rec[2], rec[3], rec[4],
        ev_t, ev_sn, ev_kind, tout,
    )
    if tout[5]:
        raise RuntimeError("trajectory rollout overflowed its recording budget")
    n_wp, n_ev = int(tout[3]), int(tout[4])
    wps = tuple(
        Waypoint(rec[1][i], rec[2][i], rec[3][i], rec[4][i], rec[0][i]) for i in range(n_wp)
    )
    events = tuple(
        ContactEvent(float(ev_t[i]), int(ev_sn[i]), _EVENT_KIND[int(ev_kind[i])])
        for i in range(n_ev)
    )
    return Trajectory(wps, events)
