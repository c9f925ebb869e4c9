"""Post-hoc deployment analysis: spiral fits and track spacing.

The best deployments tend to wind outward around the target's last known
position; fitting both an arithmetic (r = a + b*theta) and a logarithmic
(r = a*e^(b*theta)) spiral to the activation-ordered sensor positions makes
that comparison quantitative.  Track spacing for the equivalent single-sensor
sweep follows the bounded formula TS = max(2R, min(alpha*TS_ray, TS* + beta)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

ARCHIMEDEAN = "archimedean"
LOGARITHMIC = "logarithmic"


@dataclass(frozen=True)
class SpiralFit:
    kind: str
    center: tuple[float, float]
    a: float
    b: float
    residual: float  # RMS radial error


@dataclass(frozen=True)
class TrackSpacingInputs:
    detection_radius: float
    ts_ray: float
    ts_star: float
    alpha: float
    beta: float

    def __post_init__(self):
        if self.detection_radius <= 0 or self.ts_ray <= 0 or self.ts_star <= 0:
            raise ValueError("track-spacing lengths must be positive")
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("track-spacing calibration constants must be >= 0")


def track_spacing(inputs: TrackSpacingInputs) -> float:
    return max(
        2.0 * inputs.detection_radius,
        min(inputs.alpha * inputs.ts_ray, inputs.ts_star + inputs.beta),
    )


def _unwrap_angles(points: np.ndarray, center) -> tuple[np.ndarray, np.ndarray]:
    rel = points - np.asarray(center, dtype=float)
    r = np.hypot(rel[:, 0], rel[:, 1])
    if np.any(r <= 0):
        raise ValueError("degenerate geometry: a point coincides with the center")
    raw = np.arctan2(rel[:, 1], rel[:, 0])
    deltas = np.diff(raw)
    deltas = (deltas + math.pi) % (2 * math.pi) - math.pi
    direction = np.sign(deltas.sum())
    if direction == 0 or np.any(deltas == 0):
        raise ValueError("degenerate geometry: no consistent winding direction")
    # force monotone winding in the dominant direction
    if direction > 0:
        deltas = np.where(deltas > 0, deltas, deltas + 2 * math.pi)
    else:
        deltas = np.where(deltas < 0, deltas, deltas - 2 * math.pi)
    theta = np.concatenate(([raw[0]], raw[0] + np.cumsum(deltas)))
    return theta, r


def _fit_at_center(points, center, kind):
    theta, r = _unwrap_angles(points, center)
    if kind == ARCHIMEDEAN:
        design = np.column_stack([np.ones_like(theta), theta])
        (a, b), *_ = np.linalg.lstsq(design, r, rcond=None)
        resid = r - (a + b * theta)
        return float(a), float(b), float(np.sqrt(np.mean(resid**2)))
    if kind != LOGARITHMIC:
        raise ValueError("kind must be 'archimedean' or 'logarithmic'")
    design = np.column_stack([np.ones_like(theta), theta])
    (la, b0), *_ = np.linalg.lstsq(design, np.log(r), rcond=None)
    # refine in radial space (the log fit optimizes the wrong residual)
    sol = least_squares(
        lambda p: p[0] * np.exp(p[1] * theta) - r, x0=[math.exp(la), b0], method="lm"
    )
    a, b = sol.x
    resid = a * np.exp(b * theta) - r
    return float(a), float(b), float(np.sqrt(np.mean(resid**2)))


def fit_spiral(
    points,
    kind: str,
    center_mode: str = "centroid",
    center=None,
) -> SpiralFit:
    """Least-squares spiral through activation-ordered points.

    The spiral parameter is the polar angle unwrapped monotonically in
    activation order.  center_mode is one of 'given' (requires center),
    'centroid', or 'grid' (coarse search around the centroid for the center
    minimizing the residual).
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 4:
        raise ValueError("need at least 4 planar points ordered by activation")
    if center_mode == "given":
        if center is None:
            raise ValueError("center_mode 'given' requires a center")
        centers = [tuple(map(float, center))]
    elif center_mode == "centroid":
        centers = [tuple(pts.mean(axis=0))]
    elif center_mode == "grid":
        c0 = pts.mean(axis=0)
        span = max(float(np.ptp(pts[:, 0])), float(np.ptp(pts[:, 1])), 1e-9) * 0.5
        offsets = np.linspace(-span, span, 9)
        centers = [(c0[0] + dx, c0[1] + dy) for dx in offsets for dy in offsets]
    else:
        raise ValueError("center_mode must be 'given', 'centroid' or 'grid'")

    best = None
    for c in centers:
        try:
            a, b, resid = _fit_at_center(pts, c, kind)
        except ValueError:
            if len(centers) == 1:
                raise
            continue
        if best is None or resid < best.residual:
            best = SpiralFit(kind, (float(c[0]), float(c[1])), a, b, resid)
    if best is None:
        raise ValueError("degenerate geometry: no center admits a monotone winding")
    return best


def activation_ordered_positions(solution) -> np.ndarray:
    """Active sensor positions sorted by first activation (deployment-stable)."""
    active = solution.active_sensors
    order = sorted(range(len(active)), key=lambda i: (active[i].activations[0], i))
    return np.array([[active[i].x, active[i].y] for i in order])
