"""Brute-force and analytic reference computations.

These routes are deliberately independent of the estimator: the grid search
re-evaluates coverage by direct waypoint interpolation over a frozen
trajectory set, and the crossing probability integrates the favorable
starting area geometrically.  They exist to check the optimizer and the
estimator against something that cannot share their bugs.
"""

from __future__ import annotations

import numpy as np

from gsres.dynamics import DynamicsParams, pack_scenario, _recorded
from gsres.rng import TAG_EVAL, mix_seed
from gsres.scenario import ConstraintSet, Solution


def frozen_trajectories(
    constraints: ConstraintSet,
    params: DynamicsParams,
    n: int,
    eval_seed: int,
):
    """The exact trajectory set a frozen-seed estimate uses, as waypoint arrays.

    Only meaningful for a non-reactive target (paths independent of the
    deployment); returns a list of (times, xs, ys) arrays.
    """
    if params.reactive:
        raise ValueError("frozen trajectory sets require a non-reactive target")
    root = mix_seed(eval_seed, TAG_EVAL)
    empty = Solution(())
    packed = pack_scenario(empty, constraints, params)
    out = []
    for i in range(n):
        traj = _recorded(packed, constraints, params, root, i)
        t = np.array([w.t for w in traj.waypoints])
        x = np.array([w.x for w in traj.waypoints])
        y = np.array([w.y for w in traj.waypoints])
        out.append((t, x, y))
    return out


def positions_at(trajs, t: float) -> np.ndarray:
    """Interpolated (n, 2) positions of all frozen trajectories at time t."""
    pts = np.empty((len(trajs), 2))
    for i, (tt, xx, yy) in enumerate(trajs):
        tc = min(max(t, tt[0]), tt[-1])
        pts[i, 0] = np.interp(tc, tt, xx)
        pts[i, 1] = np.interp(tc, tt, yy)
    return pts


def grid_search(
    constraints: ConstraintSet,
    params: DynamicsParams,
    n_traj: int,
    eval_seed: int,
    grid: int = 50,
):
    """Exhaustive (x, y, t) search for one sensor with one activation.

    Scores every node of a grid x grid x grid lattice over the theater's
    bounding box and [0, horizon] against a frozen myopic trajectory set;
    returns (best_x, best_y, best_t, best_score).
    """
    from gsres.scenario import prepared_geometry

    trajs = frozen_trajectories(constraints, params, n_traj, eval_seed)
    geo = prepared_geometry(constraints.theater)
    xs = np.linspace(geo.bbox[0], geo.bbox[2], grid)
    ys = np.linspace(geo.bbox[1], geo.bbox[3], grid)
    ts = np.linspace(0.0, constraints.theater.horizon, grid)
    r2 = constraints.spec.detection_radius ** 2
    best = (-1.0, 0.0, 0.0, 0.0)
    for t in ts:
        pts = positions_at(trajs, float(t))
        for y in ys:
            dy2 = (pts[:, 1] - y) ** 2
            for x in xs:
                score = float(np.mean((pts[:, 0] - x) ** 2 + dy2 <= r2))
                if score > best[0]:
                    best = (score, float(x), float(y), float(t))
    return best[1], best[2], best[3], best[0]


def crossing_probability(
    width: float,
    height: float,
    sensor_x: float,
    sensor_y: float,
    radius: float,
    speed: float,
    horizon: float,
    n_points: int = 200001,
) -> float:
    """Probability that an eastbound straight run from a uniform start in the
    [0,width]x[0,height] rectangle passes within `radius` of the sensor.

    Pure geometry: for each start ordinate the favorable abscissa interval is
    clipped to the rectangle and integrated numerically.  Keep the travel
    short enough that boundary reflections cannot reach the disk.
    """
    travel = speed * horizon
    ys = np.linspace(0.0, height, n_points)
    dy = ys - sensor_y
    inside = np.abs(dy) <= radius
    w = np.zeros_like(ys)
    w[inside] = np.sqrt(radius**2 - dy[inside] ** 2)
    x_lo = np.maximum(sensor_x - travel - w, 0.0)
    x_hi = np.minimum(sensor_x + w, width)
    span = np.where(inside, np.maximum(x_hi - x_lo, 0.0), 0.0)
    return float(np.trapezoid(span, ys) / (width * height))
