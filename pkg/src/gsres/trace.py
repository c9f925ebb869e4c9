"""Run artifacts: iteration trace, density summaries, solution files.

Everything is plain delimiter-separated text or JSON so any plotting tool
can consume it.  Float columns use shortest-roundtrip repr and every file
carries the run seed in its metadata header, which makes artifacts byte
comparable across reruns (no timestamps on purpose).

Solution files follow the negative-time convention on the wire: a sensor
whose activation instants are all negative is disabled; its original
instants are recovered as -(t+1).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from gsres.scenario import Sensor, Solution, prepared_geometry


@dataclass
class DensitySummary:
    """Population histograms at one iteration: per deployment slot, a spatial
    grid over the theater bounding box and a first-activation time histogram."""

    iteration: int
    spatial: np.ndarray  # (p_max, grid, grid) counts
    temporal: np.ndarray  # (p_max, bins) counts


@dataclass
class RunTrace:
    run_seed: int
    rows: list[dict] = field(default_factory=list)
    densities: list[DensitySummary] = field(default_factory=list)
    best_solution: Solution | None = None
    best_score: float | None = None
    attribution: np.ndarray | None = None
    attribution_n: int = 0


def build_density(
    solutions, p_max: int, theater, grid: int, time_bins: int, iteration: int
) -> DensitySummary:
    geo = prepared_geometry(theater)
    x0, y0, x1, y1 = geo.bbox
    horizon = theater.horizon
    spatial = np.zeros((p_max, grid, grid), dtype=np.int64)
    temporal = np.zeros((p_max, time_bins), dtype=np.int64)
    for sol in solutions:
        for slot, s in enumerate(sol.active_sensors[:p_max]):
            gx = min(int((s.x - x0) / (x1 - x0) * grid), grid - 1)
            gy = min(int((s.y - y0) / (y1 - y0) * grid), grid - 1)
            spatial[slot, gy, gx] += 1
            tb = min(int(s.activations[0] / horizon * time_bins), time_bins - 1)
            temporal[slot, tb] += 1
    return DensitySummary(iteration, spatial, temporal)


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return str(v)


class TraceWriter:
    """Streams iteration rows to a CSV file, one flush per row.

    The header is fixed by the first row; later rows may only add columns
    that were already present (missing values print empty)."""

    def __init__(self, path: str, run_seed: int):
        self.path = path
        self._fh = open(path, "w", encoding="utf-8")
        self._fh.write(f"# run_seed={run_seed}\n")
        self._columns: list[str] | None = None

    def write_row(self, row: dict):
        if self._columns is None:
            self._columns = list(row.keys())
            self._fh.write(",".join(self._columns) + "\n")
        else:
            for key in row:
                if key not in self._columns:
                    raise ValueError(f"trace column {key!r} appeared after the header")
        self._fh.write(",".join(_fmt(row.get(c)) for c in self._columns) + "\n")
        self._fh.flush()

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_rows(path: str, run_seed: int, rows) -> None:
    # union of keys, first-seen order, so late-appearing columns still land
    columns: list[str] = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# run_seed={run_seed}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row.get(c)) for c in columns) + "\n")


def solution_to_dict(solution: Solution) -> dict:
    sensors = []
    for s in solution.sensors:
        if s.active:
            acts = list(s.activations)
        else:
            acts = [-(t + 1.0) for t in s.activations]
        sensors.append({"x": s.x, "y": s.y, "activations": acts, "setup_time": s.setup_time})
    return {"format": "gsres-solution-v1", "sensors": sensors}


def solution_from_dict(doc: dict) -> Solution:
    if doc.get("format") != "gsres-solution-v1":
        raise ValueError("not a gsres-solution-v1 document")
    sensors = []
    for row in doc["sensors"]:
        acts = [float(t) for t in row["activations"]]
        active = all(t >= 0 for t in acts) and len(acts) > 0
        if not active:
            acts = [-(t) - 1.0 for t in acts]
        sensors.append(
            Sensor(
                float(row["x"]), float(row["y"]), tuple(acts),
                float(row.get("setup_time", 0.0)), active,
            )
        )
    return Solution(tuple(sensors))


def save_solution(path: str, solution: Solution, run_seed: int | None = None) -> None:
    doc = solution_to_dict(solution)
    if run_seed is not None:
        doc["run_seed"] = run_seed
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_solution(path: str) -> Solution:
    with open(path, "r", encoding="utf-8") as fh:
        return solution_from_dict(json.load(fh))


def write_density(out_dir: str, run_seed: int, summary: DensitySummary) -> list[str]:
    paths = []
    spath = os.path.join(out_dir, f"density_spatial_l{summary.iteration:03d}.csv")
    with open(spath, "w", encoding="utf-8") as fh:
        fh.write(f"# run_seed={run_seed}\n")
        fh.write("sensor,row,col,count\n")
        p_max, grid, _ = summary.spatial.shape
        for p in range(p_max):
            for r in range(grid):
                for c in range(grid):
                    v = summary.spatial[p, r, c]
                    if v:
                        fh.write(f"{p + 1},{r},{c},{v}\n")
    paths.append(spath)
    tpath = os.path.join(out_dir, f"density_temporal_l{summary.iteration:03d}.csv")
    with open(tpath, "w", encoding="utf-8") as fh:
        fh.write(f"# run_seed={run_seed}\n")
        fh.write("sensor,bin,count\n")
        p_max, bins = summary.temporal.shape
        for p in range(p_max):
            for b in range(bins):
                v = summary.temporal[p, b]
                if v:
                    fh.write(f"{p + 1},{b},{v}\n")
    paths.append(tpath)
    return paths


def write_attribution(path: str, run_seed: int, counts, n_trajectories: int) -> None:
    total = int(np.sum(counts))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# run_seed={run_seed}\n")
        fh.write(f"# trajectories={n_trajectories} detected={total}\n")
        fh.write("sensor,first_detections,share\n")
        for i, c in enumerate(counts):
            share = (int(c) / total) if total else 0.0
            fh.write(f"{i + 1},{int(c)},{_fmt(share)}\n")


def emit_trace(trace: RunTrace, out_dir: str, config_doc: dict | None = None) -> list[str]:
    """Write every artifact of a finished run; returns the file list."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    tpath = os.path.join(out_dir, "trace.csv")
    write_rows(tpath, trace.run_seed, trace.rows)
    paths.append(tpath)
    if trace.best_solution is not None:
        bpath = os.path.join(out_dir, "best_solution.json")
        save_solution(bpath, trace.best_solution, trace.run_seed)
        paths.append(bpath)
    for summary in trace.densities:
        paths.extend(write_density(out_dir, trace.run_seed, summary))
    if trace.attribution is not None:
        apath = os.path.join(out_dir, "detection_attribution.csv")
        write_attribution(apath, trace.run_seed, trace.attribution, trace.attribution_n)
        paths.append(apath)
    if config_doc is not None:
        cpath = os.path.join(out_dir, "config_resolved.json")
        with open(cpath, "w", encoding="utf-8") as fh:
            json.dump(config_doc, fh, indent=2)
            fh.write("\n")
        paths.append(cpath)
    return paths


def save_trajectories(path: str, trajectories, run_seed: int) -> None:
    doc = {
        "format": "gsres-trajectories-v1",
        "run_seed": run_seed,
        "trajectories": [
            {
                "waypoints": [[w.t, w.x, w.y, w.vx, w.vy] for w in tr.waypoints],
                "events": [[e.time, e.sensor, e.kind] for e in tr.events],
            }
            for tr in trajectories
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")
