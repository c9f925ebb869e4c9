"""Splitting outer loop over deployment populations.

The optimizer keeps C candidate deployments.  Each iteration it keeps the
top floor(rho*C) of them (the elites at the running threshold), refills the
population by bootstrap or exact cloning, decorrelates every member with a
burn of Gibbs updates accepted against the threshold, rescales the threshold
to the new rho-quantile, and tracks the best deployment ever seen.  The
product of per-level elite fractions estimates how rare the current score
level is under the initial sampling law.  A plateau in both the threshold
and the running best triggers a multiplicative threshold decrease that
re-opens the accept test and restores proposal diversity.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

from gsres import _core
from gsres.estimator import estimate_score
from gsres.moves import (
    FIXED_P_SET,
    FULL_SET,
    MoveSensorParams,
    MoveStats,
    MoveWeights,
    gibbs_sweep,
    move_menu,
)
from gsres.rng import TAG_EVAL, TAG_INIT, TAG_REPOP, TAG_SWEEP, RngStream, mix_seed
from gsres.scenario import (
    Sensor,
    Solution,
    compute_setup_times,
    is_feasible,
    prepared_geometry,
    reflect_into,
)


class InitializationError(RuntimeError):
    """Raised when no feasible initial solution can be generated."""


@dataclass(frozen=True)
class SplittingConfig:
    population: int = 100
    elite_fraction: float = 0.1
    max_iterations: int = 20
    burn_in_b0: float = 2.0
    burn_in_alpha: float = 0.2
    repopulation: str = "adam_cloning"  # "adam_cloning" | "bootstrap"
    stagnation_patience: int = 5
    stagnation_decrease: float = 0.9
    stagnation_tolerance: float | None = None  # None: half a binomial std at N
    trajectories_per_score: int = 2000
    max_retries: int = 10
    move_set: str = FIXED_P_SET
    move_weights: MoveWeights = MoveWeights((0.1, 0.15, 0.1, 0.15, 0.4, 0.1))
    move_sensor: MoveSensorParams = MoveSensorParams((0.5, 0.5), 0.0, 0.0)
    move_sensor_schedule: str = "static"  # "static" | "anneal" (w -> (0.9, 0.1))
    scan: str = "random"
    rescore_full: bool = False
    seed: int = 0
    eval_seed: int | None = None  # pin to freeze the evaluation trajectories
    threads: int = 1
    wall_clock_budget: float | None = None
    initial_sensor_count: str = "p_max"  # "p_max" | "uniform"
    init_attempts: int = 200
    density_grid: int = 50
    density_time_bins: int = 100
    density_snapshots: tuple[int, ...] = (0, 5, 10)

    def __post_init__(self):
        if self.population < 1:
            raise ValueError("splitting.population must be >= 1")
        if not 0.0 < self.elite_fraction < 1.0:
            raise ValueError("splitting.elite_fraction must be in (0,1)")
        if int(self.elite_fraction * self.population) < 1:
            raise ValueError("splitting.elite_fraction * population must be >= 1")
        if self.max_iterations < 0:
            raise ValueError("splitting.max_iterations must be >= 0")
        if self.burn_in_alpha < 0:
            raise ValueError("splitting.burn_in_alpha must be >= 0")
        if self.repopulation not in ("adam_cloning", "bootstrap"):
            raise ValueError("splitting.repopulation must be 'adam_cloning' or 'bootstrap'")
        if self.stagnation_patience < 1:
            raise ValueError("splitting.stagnation_patience must be >= 1")
        if not 0.0 < self.stagnation_decrease < 1.0:
            raise ValueError("splitting.stagnation_decrease must be in (0,1)")
        if self.trajectories_per_score < 1:
            raise ValueError("splitting.trajectories_per_score must be >= 1")
        if self.max_retries < 1:
            raise ValueError("splitting.max_retries must be >= 1")
        if self.move_set not in (FULL_SET, FIXED_P_SET):
            raise ValueError("splitting.move_set must be 'full' or 'fixed_p'")
        if self.move_sensor_schedule not in ("static", "anneal"):
            raise ValueError("splitting.move_sensor_schedule must be 'static' or 'anneal'")
        if self.initial_sensor_count not in ("p_max", "uniform"):
            raise ValueError("splitting.initial_sensor_count must be 'p_max' or 'uniform'")
        if self.threads < 1:
            raise ValueError("splitting.threads must be >= 1")

    @property
    def elite_count(self) -> int:
        return int(self.elite_fraction * self.population)

    def burn_in(self, iteration: int) -> int:
        return int(self.burn_in_b0 + self.burn_in_alpha * iteration + 0.5)

    def move_sensor_at(self, iteration: int) -> MoveSensorParams:
        if self.move_sensor_schedule == "static" or self.max_iterations == 0:
            return self.move_sensor
        # favor small relocations as the population concentrates
        frac = min(1.0, iteration / self.max_iterations)
        w1 = self.move_sensor.w[0] + (0.9 - self.move_sensor.w[0]) * frac
        return MoveSensorParams((w1, 1.0 - w1), self.move_sensor.sigma_small,
                                self.move_sensor.sigma_large)


@dataclass
class PopulationState:
    solutions: list[Solution]
    scores: list[float]
    gamma_l: float
    best_iter_score: float
    best_score: float
    best_solution: Solution
    iteration: int = 0
    c_hats: list[float] = field(default_factory=list)
    stagnation_counter: int = 0
    stagnation_events: list[int] = field(default_factory=list)
    last_best_improvement: int = 0
    _prev_gamma: float = 0.0
    _prev_best: float = 0.0


def _eval_root(config: SplittingConfig, iteration: int, slot: int) -> int:
    if config.eval_seed is not None:
        # frozen evaluation set: every score in the run uses the same trajectories
        return mix_seed(config.eval_seed, TAG_EVAL)
    return mix_seed(config.seed, TAG_EVAL, iteration, slot)


def sample_initial_solution(scenario, p_count: int, rng: RngStream) -> Solution:
    """One draw from the initial law: sensors along a bouncing carrier path.

    Successive positions follow Gaussian steps folded back into the theater
    (short tours stay Rayleigh-like around the entry, long tours spread
    toward uniform); activation instants are uniform in each sensor's valid
    window, later instants re-drawn above the first.
    """
    constraints = scenario.constraints
    theater = constraints.theater
    bbox = prepared_geometry(theater).bbox
    step_scale = 0.18 * max(bbox[2] - bbox[0], bbox[3] - bbox[1])
    px, py = scenario.carrier_entry
    sensors = []
    for _ in range(p_count):
        px_new = px + step_scale * _std_normal(rng)
        py_new = py + step_scale * _std_normal(rng)
        px, py = reflect_into(theater, (px_new, py_new))
        sensors.append(Sensor(px, py, ()))
    sol = compute_setup_times(Solution(tuple(sensors)), constraints, scenario.carrier_entry)
    horizon = theater.horizon
    np_max = constraints.spec.max_activations
    out = []
    for s in sol.sensors:
        if s.setup_time >= horizon:
            return sol  # infeasible as-is; caller retries
        n_act = 1 if np_max == 1 else 1 + rng.integer(np_max)
        t1 = s.setup_time + rng.uniform() * (horizon - s.setup_time)
        acts = [t1] + [t1 + rng.uniform() * (horizon - t1) for _ in range(n_act - 1)]
        out.append(replace(s, activations=tuple(sorted(set(acts)))))
    return Solution(tuple(out))


def _std_normal(rng: RngStream) -> float:
    return _core.normal_quantile(rng.uniform())


def initialize(config: SplittingConfig, scenario) -> PopulationState:
    """Sample and score the starting population; set the first threshold."""
    constraints = scenario.constraints
    solutions: list[Solution] = []
    for i in range(config.population):
        sol = None
        for attempt in range(config.init_attempts):
            rng = RngStream(mix_seed(config.seed, TAG_INIT, i, attempt))
            if config.initial_sensor_count == "p_max":
                p_count = constraints.p_max
            else:
                p_count = 1 + rng.integer(constraints.p_max)
            cand = sample_initial_solution(scenario, p_count, rng)
            if is_feasible(cand, constraints):
                sol = cand
                break
        if sol is None:
            raise InitializationError(
                "could not draw a feasible initial solution: the carrier cannot "
                "set up and activate all sensors inside [0, horizon]; check "
                "theater.horizon, theater.hunter_delay and sensor.carrier_speed"
            )
        solutions.append(sol)
    scores = _score_all(solutions, config, scenario, iteration=0)
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    gamma0 = scores[order[config.elite_count - 1]]
    best_idx = order[0]
    state = PopulationState(
        solutions=solutions,
        scores=scores,
        gamma_l=gamma0,
        best_iter_score=scores[best_idx],
        best_score=scores[best_idx],
        best_solution=solutions[best_idx],
        iteration=0,
    )
    state._prev_gamma = gamma0
    state._prev_best = state.best_score
    return state


def _score_all(solutions, config: SplittingConfig, scenario, iteration: int) -> list[float]:
    def one(i: int) -> float:
        est = estimate_score(
            solutions[i], scenario.constraints, scenario.dynamics, scenario.criteria,
            config.trajectories_per_score, _eval_root(config, iteration, i),
        )
        return est.value

    idx = range(len(solutions))
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            return list(pool.map(one, idx))
    return [one(i) for i in idx]


def select_elites(state: PopulationState, config: SplittingConfig):
    """Top elite_count solutions (stable ties) plus the level factor c_hat."""
    order = sorted(range(len(state.scores)), key=lambda i: (-state.scores[i], i))
    count = sum(1 for s in state.scores if s >= state.gamma_l)
    c_hat = count / len(state.scores)
    elites = [(state.solutions[i], state.scores[i]) for i in order[: config.elite_count]]
    state.c_hats.append(c_hat)
    return elites, c_hat


def repopulate_bootstrap(elites, population: int, rng: RngStream):
    """Uniform resampling with replacement up to the population size."""
    return [elites[rng.integer(len(elites))] for _ in range(population)]


def repopulate_adam(elites, population: int, rng: RngStream):
    """Exact cloning: floor(C/C_l) copies each, plus one for a uniformly
    random subset of exactly C mod C_l elites."""
    n = len(elites)
    base = population // n
    r = population - base * n
    extra = [False] * n
    # draw r distinct indices uniformly (partial Fisher-Yates)
    pool = list(range(n))
    for k in range(r):
        j = k + rng.integer(n - k)
        pool[k], pool[j] = pool[j], pool[k]
        extra[pool[k]] = True
    out = []
    for i, pair in enumerate(elites):
        out.extend([pair] * (base + (1 if extra[i] else 0)))
    return out


def iterate(state: PopulationState, config: SplittingConfig, scenario) -> MoveStats:
    """One selection / repopulation / Gibbs-refresh / re-estimation cycle."""
    l = state.iteration + 1
    gamma = state.gamma_l
    elites, _ = select_elites(state, config)

    rng_repop = RngStream(mix_seed(config.seed, TAG_REPOP, l))
    if config.repopulation == "bootstrap":
        population = repopulate_bootstrap(elites, config.population, rng_repop)
    else:
        population = repopulate_adam(elites, config.population, rng_repop)

    b_l = config.burn_in(l)
    menu = move_menu(config.move_set, config.move_weights, config.move_sensor_at(l))
    stats_by_slot: list[MoveStats] = [MoveStats() for _ in population]

    def refresh(i: int):
        sol, score = population[i]
        rng = RngStream(mix_seed(config.seed, TAG_SWEEP, l, i))
        return gibbs_sweep(
            sol, score, gamma, b_l, menu,
            scenario.constraints, scenario.dynamics, scenario.criteria,
            config.trajectories_per_score, config.max_retries,
            rng, stats_by_slot[i], _eval_root(config, l, i),
            carrier_entry=scenario.carrier_entry, scan=config.scan,
        )

    idx = range(len(population))
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            refreshed = list(pool.map(refresh, idx))
    else:
        refreshed = [refresh(i) for i in idx]

    state.solutions = [sol for sol, _ in refreshed]
    if config.rescore_full:
        state.scores = _score_all(state.solutions, config, scenario, iteration=l)
    else:
        state.scores = [score for _, score in refreshed]

    order = sorted(range(len(state.scores)), key=lambda i: (-state.scores[i], i))
    state.gamma_l = state.scores[order[config.elite_count - 1]]
    best_idx = order[0]
    state.best_iter_score = state.scores[best_idx]
    if state.best_iter_score > state.best_score:
        state.best_score = state.best_iter_score
        state.best_solution = state.solutions[best_idx]
        state.last_best_improvement = l
    state.iteration = l

    stats = MoveStats()
    for s in stats_by_slot:
        stats.merge(s)
    return stats


def _stagnation_tolerance(config: SplittingConfig, level: float) -> float:
    if config.stagnation_tolerance is not None:
        return config.stagnation_tolerance
    # half the estimator noise at the current level: smaller gains are jitter
    p = min(max(level, 0.01), 0.99)
    return 0.5 * math.sqrt(p * (1.0 - p) / config.trajectories_per_score)


def check_stagnation_and_decrease(state: PopulationState, config: SplittingConfig) -> bool:
    """Decrease the threshold when neither the best nor the threshold moved
    by more than estimator noise.

    Returns True when a decrease fired (recorded for the trace)."""
    tol = _stagnation_tolerance(config, state.gamma_l)
    improved = (state.best_score > state._prev_best + tol) or (
        state.gamma_l > state._prev_gamma + tol
    )
    if improved:
        state._prev_best = max(state.best_score, state._prev_best)
        state._prev_gamma = max(state.gamma_l, state._prev_gamma)
        state.stagnation_counter = 0
        return False
    state.stagnation_counter += 1
    if state.stagnation_counter >= config.stagnation_patience:
        state.gamma_l = config.stagnation_decrease * state.gamma_l
        state._prev_gamma = state.gamma_l
        state._prev_best = state.best_score
        state.stagnation_counter = 0
        state.stagnation_events.append(state.iteration)
        return True
    return False


def rare_event_probability(state: PopulationState) -> float:
    """Product of the recorded per-level elite fractions."""
    return math.prod(state.c_hats)


def _mean_std(xs):
    n = len(xs)
    m = sum(xs) / n
    var = sum((x - m) ** 2 for x in xs) / n
    return m, math.sqrt(var)


def _trace_row(state: PopulationState, stats: MoveStats | None, c_hat, decreased: bool,
               labels):
    mean, std = _mean_std(state.scores)
    row = {
        "iteration": state.iteration,
        "gamma": state.gamma_l,
        "best_iter": state.best_iter_score,
        "best_ever": state.best_score,
        "score_mean": mean,
        "score_std": std,
        "c_hat": c_hat,
        "stagnation_decrease": int(decreased),
    }
    for label in labels:
        counters = stats.counts.get(label) if stats is not None else None
        for key in ("proposed", "accepted", "rejected_infeasible",
                    "rejected_below_threshold", "rejected_retry_exhausted"):
            row[f"{label}.{key}"] = counters[key] if counters else 0
    return row


def run(config: SplittingConfig, scenario, on_row=None, on_snapshot=None, on_iteration=None):
    """Full optimization; returns (best solution, best score, trace rows, state).

    ``on_row`` receives each iteration's trace row as it completes;
    ``on_snapshot`` receives (iteration, solutions) at density snapshots;
    ``on_iteration`` receives (state, stats) right after each iterate, before
    the stagnation check.
    """
    t_start = time.monotonic()
    labels = [label for label, _, _ in
              move_menu(config.move_set, config.move_weights, config.move_sensor)]
    state = initialize(config, scenario)
    rows = [_trace_row(state, None, c_hat=None, decreased=False, labels=labels)]
    if on_row:
        on_row(rows[-1])
    snapshots = set(config.density_snapshots)
    if on_snapshot and 0 in snapshots:
        on_snapshot(0, state.solutions)

    while state.iteration < config.max_iterations:
        if (
            config.wall_clock_budget is not None
            and time.monotonic() - t_start > config.wall_clock_budget
        ):
            break
        if state.iteration - state.last_best_improvement >= 3 * config.stagnation_patience:
            break
        stats = iterate(state, config, scenario)
        if on_iteration:
            on_iteration(state, stats)
        decreased = check_stagnation_and_decrease(state, config)
        row = _trace_row(state, stats, state.c_hats[-1], decreased, labels)
        rows.append(row)
        if on_row:
            on_row(row)
        if on_snapshot and state.iteration in snapshots:
            on_snapshot(state.iteration, state.solutions)
    if on_snapshot:
        on_snapshot(state.iteration, state.solutions)
    return state.best_solution, state.best_score, rows, state
