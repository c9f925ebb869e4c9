"""Operational theater, sensor/solution encoding and feasibility checks.

The decision variable is a set of sensors, each with a planar position and
an ordered list of activation instants.  A single carrier deploys the active
sensors in list order, so each sensor also carries the earliest time it can
ping (its setup time).  All types are immutable; feasibility checks are pure
functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from gsres import _core
from gsres.rng import RngStream


@dataclass(frozen=True)
class Theater:
    """Convex polygonal search area with a horizon and a hunter arrival delay."""

    vertices: tuple[tuple[float, float], ...]
    horizon: float
    hunter_delay: float = 0.0

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 3:
            raise ValueError("theater.vertices must have at least 3 points")
        if self.horizon <= 0:
            raise ValueError("theater.horizon must be > 0")
        if not (0 <= self.hunter_delay < self.horizon):
            raise ValueError("theater.hunter_delay must be in [0, horizon)")
        # normalize to counter-clockwise order
        area2 = _signed_area2(verts)
        if area2 == 0:
            raise ValueError("theater.vertices are degenerate (zero area)")
        if area2 < 0:
            object.__setattr__(self, "vertices", verts[::-1])
        n = len(self.vertices)
        for i in range(n):
            ax, ay = self.vertices[i]
            bx, by = self.vertices[(i + 1) % n]
            cx, cy = self.vertices[(i + 2) % n]
            cross = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
            if cross <= 0:
                raise ValueError("theater.vertices must form a convex polygon")

    @property
    def centroid(self) -> tuple[float, float]:
        geo = prepared_geometry(self)
        return (float(geo.centroid[0]), float(geo.centroid[1]))

    @classmethod
    def rectangle(cls, width: float, height: float, horizon: float, hunter_delay: float = 0.0):
        verts = ((0.0, 0.0), (width, 0.0), (width, height), (0.0, height))
        return cls(verts, horizon, hunter_delay)


def _signed_area2(verts) -> float:
    s = 0.0
    n = len(verts)
    for i in range(n):
        x0, y0 = verts[i]
        x1, y1 = verts[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return s


@dataclass(frozen=True)
class TheaterGeometry:
    """Arrays consumed by the simulation core: edges, normals, triangle fan."""

    ex: np.ndarray
    ey: np.ndarray
    enx: np.ndarray
    eny: np.ndarray
    tris: np.ndarray
    tcum: np.ndarray
    centroid: np.ndarray
    bbox: tuple[float, float, float, float]
    area: float


@lru_cache(maxsize=64)
def prepared_geometry(theater: Theater) -> TheaterGeometry:
    verts = np.asarray(theater.vertices, dtype=float)
    n = len(verts)
    nxt = np.roll(verts, -1, axis=0)
    edge = nxt - verts
    # CCW polygon: outward normal is the edge direction rotated clockwise
    lengths = np.hypot(edge[:, 0], edge[:, 1])
    enx = edge[:, 1] / lengths
    eny = -edge[:, 0] / lengths
    tris = np.empty((n - 2, 6), dtype=float)
    areas = np.empty(n - 2, dtype=float)
    for i in range(n - 2):
        a, b, c = verts[0], verts[i + 1], verts[i + 2]
        tris[i] = (a[0], a[1], b[0], b[1], c[0], c[1])
        areas[i] = 0.5 * abs((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
    total = float(areas.sum())
    tcum = np.cumsum(areas) / total
    tcum[-1] = 1.0
    centers = tris.reshape(n - 2, 3, 2).mean(axis=1)
    centroid = (centers * areas[:, None]).sum(axis=0) / total
    bbox = (
        float(verts[:, 0].min()),
        float(verts[:, 1].min()),
        float(verts[:, 0].max()),
        float(verts[:, 1].max()),
    )
    return TheaterGeometry(
        ex=np.ascontiguousarray(verts[:, 0]),
        ey=np.ascontiguousarray(verts[:, 1]),
        enx=np.ascontiguousarray(enx),
        eny=np.ascontiguousarray(eny),
        tris=np.ascontiguousarray(tris),
        tcum=np.ascontiguousarray(tcum),
        centroid=centroid,
        bbox=bbox,
        area=total,
    )


def contains(theater: Theater, p) -> bool:
    """True iff p lies inside or on the boundary of the theater."""
    geo = prepared_geometry(theater)
    return bool(_core.point_inside(float(p[0]), float(p[1]), geo.ex, geo.ey, geo.enx, geo.eny))


def uniform_position(theater: Theater, rng: RngStream) -> tuple[float, float]:
    """Uniform draw over the theater via its triangle fan."""
    geo = prepared_geometry(theater)
    u = rng.uniform()
    k = int(np.searchsorted(geo.tcum, u))
    if k >= len(geo.tcum):
        k = len(geo.tcum) - 1
    s = math.sqrt(rng.uniform())
    w = rng.uniform()
    t = geo.tris[k]
    x = t[0] * (1.0 - s) + t[2] * s * (1.0 - w) + t[4] * s * w
    y = t[1] * (1.0 - s) + t[3] * s * (1.0 - w) + t[5] * s * w
    return (float(x), float(y))


def reflect_into(theater: Theater, p) -> tuple[float, float]:
    """Fold a point back into the theater by mirroring across violated edges."""
    geo = prepared_geometry(theater)
    x, y = float(p[0]), float(p[1])
    for _ in range(32):
        worst = -1
        worst_d = 1e-9
        for k in range(len(geo.ex)):
            d = (x - geo.ex[k]) * geo.enx[k] + (y - geo.ey[k]) * geo.eny[k]
            if d > worst_d:
                worst_d = d
                worst = k
        if worst < 0:
            return (x, y)
        x -= 2.0 * worst_d * geo.enx[worst]
        y -= 2.0 * worst_d * geo.eny[worst]
    # pathological fold (point far outside): clamp to centroid
    return (float(geo.centroid[0]), float(geo.centroid[1]))


@dataclass(frozen=True)
class SensorSpec:
    """Cookie-cutter sensor family shared by every sensor of a solution."""

    detection_radius: float
    counter_detection_radius: float
    max_activations: int
    carrier_speed: float

    def __post_init__(self):
        if self.detection_radius <= 0:
            raise ValueError("sensor.detection_radius must be > 0")
        if self.counter_detection_radius <= self.detection_radius:
            raise ValueError("sensor.counter_detection_radius must exceed detection_radius")
        if self.max_activations < 1:
            raise ValueError("sensor.max_activations must be >= 1")
        if self.carrier_speed <= 0:
            raise ValueError("sensor.carrier_speed must be > 0")


@dataclass(frozen=True)
class Sensor:
    """One deployed sensor: position, ping instants and setup time."""

    x: float
    y: float
    activations: tuple[float, ...]
    setup_time: float = 0.0
    active: bool = True

    def __post_init__(self):
        object.__setattr__(self, "activations", tuple(float(t) for t in self.activations))

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class Solution:
    """A full deployment plan; inactive sensors are kept but ignored."""

    sensors: tuple[Sensor, ...]

    def __post_init__(self):
        object.__setattr__(self, "sensors", tuple(self.sensors))

    @property
    def active_sensors(self) -> tuple[Sensor, ...]:
        return tuple(s for s in self.sensors if s.active)

    @property
    def active_count(self) -> int:
        return sum(1 for s in self.sensors if s.active)

    def compact(self) -> "Solution":
        """Drop disabled sensors (deployment order of the rest is unchanged)."""
        return Solution(self.active_sensors)


@dataclass(frozen=True)
class ConstraintSet:
    theater: Theater
    spec: SensorSpec
    p_max: int

    def __post_init__(self):
        if self.p_max < 1:
            raise ValueError("constraints.p_max must be >= 1")


def compute_setup_times(
    solution: Solution, constraints: ConstraintSet, carrier_entry
) -> Solution:
    """Set each active sensor's setup time from the carrier tour.

    The carrier starts at ``carrier_entry`` after the hunter delay and visits
    active sensors in deployment order at constant speed; setup time is the
    cumulative arrival time.  Positions and activations are unchanged.
    """
    speed = constraints.spec.carrier_speed
    if speed <= 0:
        raise ValueError("sensor.carrier_speed must be > 0")
    t = constraints.theater.hunter_delay
    px, py = float(carrier_entry[0]), float(carrier_entry[1])
    out = []
    for s in solution.sensors:
        if not s.active:
            out.append(s)
            continue
        t += math.sqrt((s.x - px) ** 2 + (s.y - py) ** 2) / speed
        px, py = s.x, s.y
        out.append(replace(s, setup_time=t))
    return Solution(tuple(out))


def is_feasible(solution: Solution, constraints: ConstraintSet) -> bool:
    """Conjunction of all placement and scheduling constraints.

    Inactive sensors are skipped; infeasibility is a False return.
    """
    horizon = constraints.theater.horizon
    np_max = constraints.spec.max_activations
    active = solution.active_sensors
    if len(active) > constraints.p_max:
        return False
    for s in active:
        if not (1 <= len(s.activations) <= np_max):
            return False
        if not contains(constraints.theater, (s.x, s.y)):
            return False
        prev = None
        for t in s.activations:
            if t < s.setup_time or t > horizon:
                return False
            if prev is not None and t <= prev:
                return False
            prev = t
    return True
