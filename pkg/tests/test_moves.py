import math

import pytest
from scipy import stats as sstats

from gsres.estimator import DetectionCriteria
from gsres.moves import (
    FIXED_P_SET,
    FULL_SET,
    MoveKind,
    MoveSensorParams,
    MoveStats,
    MoveWeights,
    gibbs_sweep,
    move_menu,
    propose,
)
from gsres.rng import RngStream
from gsres.scenario import (
    ConstraintSet,
    Sensor,
    SensorSpec,
    Solution,
    Theater,
    compute_setup_times,
    contains,
    is_feasible,
)
from gsres.optimizer import SplittingConfig

SPEC = SensorSpec(50.0, 100.0, 3, 20.0)
TH = Theater.rectangle(1000.0, 1000.0, 500.0)
CS = ConstraintSet(TH, SPEC, 4)
ENTRY = (500.0, 500.0)
MP = MoveSensorParams((0.5, 0.5), 10.0, 80.0)
CRIT = DetectionCriteria()


def base_solution(n=3):
    sensors = tuple(Sensor(300.0 + 100.0 * i, 500.0, (200.0 + 10.0 * i,)) for i in range(n))
    return compute_setup_times(Solution(sensors), CS, ENTRY)


def fast_params():
    from gsres.dynamics import DynamicsParams

    return DynamicsParams(
        mean_leg_duration=120.0, std_leg_duration=30.0, leg_duration_halfwidth=80.0,
        course_std=0.3, course_halfwidth=1.0, speed_mean=2.0, speed_std=0.2,
        initial_position_mode="uniform",
    )


def test_remove_sensor_semantics():
    sol = base_solution(3)
    out = propose(MoveKind.REMOVE_SENSOR, sol, CS, MP, RngStream(1), ENTRY)
    assert out.active_count == 2
    assert len(out.sensors) == 3  # the disabled sensor is kept, flagged off
    assert sum(1 for s in out.sensors if not s.active) == 1


def test_swap_keeps_first_instants_only():
    sensors = (
        Sensor(300.0, 500.0, (100.0, 150.0, 200.0)),
        Sensor(600.0, 500.0, (120.0, 180.0)),
    )
    sol = compute_setup_times(Solution(sensors), CS, ENTRY)
    out = propose(MoveKind.SWAP_SENSORS, sol, CS, MP, RngStream(3), ENTRY)
    acts = [s.activations for s in out.sensors]
    assert acts == [(120.0,), (100.0,)]


def test_move_sensor_degenerate_is_identity():
    sol = base_solution(2)
    mp = MoveSensorParams((1.0, 0.0), 0.0, 50.0)
    out = propose(MoveKind.MOVE_SENSOR, sol, CS, mp, RngStream(5), ENTRY)
    for a, b in zip(sol.sensors, out.sensors):
        assert math.hypot(a.x - b.x, a.y - b.y) < 1e-9
        assert abs(a.setup_time - b.setup_time) < 1e-9


def test_add_sensor_inside_with_valid_activation():
    sol = base_solution(2)
    rng = RngStream(7)
    for _ in range(50):
        out = propose(MoveKind.ADD_SENSOR, sol, CS, MP, rng, ENTRY)
        new = out.sensors[-1]
        assert out.active_count == 3
        assert contains(TH, (new.x, new.y))
        assert new.setup_time <= new.activations[0] <= TH.horizon
        assert len(new.activations) == 1


def test_add_activation_sorted_within_window():
    sol = base_solution(1)
    rng = RngStream(9)
    out = propose(MoveKind.ADD_ACTIVATION, sol, CS, MP, rng, ENTRY)
    acts = out.sensors[0].activations
    assert len(acts) == 2
    assert acts[0] == 200.0  # first instant unchanged
    assert list(acts) == sorted(acts)
    assert acts[1] <= TH.horizon


def test_remove_activation_protects_first():
    sensors = (Sensor(300.0, 500.0, (100.0, 150.0, 200.0)),)
    sol = compute_setup_times(Solution(sensors), CS, ENTRY)
    rng = RngStream(11)
    for _ in range(20):
        out = propose(MoveKind.REMOVE_ACTIVATION, sol, CS, MP, rng, ENTRY)
        assert out.sensors[0].activations[0] == 100.0
        assert len(out.sensors[0].activations) == 2


def test_preconditions_yield_noop():
    rng = RngStream(13)
    full = base_solution(4)
    assert propose(MoveKind.ADD_SENSOR, full, CS, MP, rng, ENTRY) is None
    single_act = base_solution(1)
    assert propose(MoveKind.REMOVE_ACTIVATION, single_act, CS, MP, rng, ENTRY) is None
    assert propose(MoveKind.SWAP_SENSORS, single_act, CS, MP, rng, ENTRY) is None
    empty = Solution(())
    assert propose(MoveKind.REMOVE_SENSOR, empty, CS, MP, rng, ENTRY) is None
    assert propose(MoveKind.MOVE_SENSOR, empty, CS, MP, rng, ENTRY) is None


def test_move_weights_validation():
    with pytest.raises(ValueError):
        MoveWeights((0.5, 0.5, 0.5, 0.0, 0.0, 0.0))
    with pytest.raises(ValueError):
        MoveWeights((1.0, 0.0, 0.0, 0.0, 0.0, -0.0 - 0.1, ))
    MoveWeights((0.0, 0.0, 0.0, 0.0, 1.0, 0.0))  # zeros allowed


def test_sweep_b0_is_identity():
    sol = base_solution(2)
    menu = move_menu(FIXED_P_SET, MoveWeights((0, 0, 0, 0, 1, 0)), MP)
    stats = MoveStats()
    out, score = gibbs_sweep(
        sol, 0.5, 0.1, 0, menu, CS, fast_params(), CRIT, 50, 10,
        RngStream(1), stats, eval_root=1, carrier_entry=ENTRY,
    )
    assert out == sol and score == 0.5
    assert stats.totals()["proposed"] == 0


def test_sweep_all_rejecting_counts():
    # threshold 1.0 on an imperfect solution: every proposal is generated and rejected
    sol = base_solution(2)
    menu = move_menu(FIXED_P_SET, MoveWeights((0, 0, 0, 0, 1, 0)), MP)
    stats = MoveStats()
    b, retries = 3, 4
    out, score = gibbs_sweep(
        sol, 0.2, 1.0, b, menu, CS, fast_params(), CRIT, 30, retries,
        RngStream(2), stats, eval_root=9, carrier_entry=ENTRY,
    )
    assert out == sol and score == 0.2
    tot = stats.totals()
    assert tot["proposed"] == b * retries
    assert tot["accepted"] == 0
    rejected = (tot["rejected_infeasible"] + tot["rejected_below_threshold"]
                + tot["rejected_retry_exhausted"])
    assert rejected == b * retries


def test_burn_in_schedule():
    cfg = SplittingConfig(population=50, burn_in_b0=2.0, burn_in_alpha=0.2)
    assert cfg.burn_in(0) == 2
    assert cfg.burn_in(50) == 12


def test_sweep_structural_bounds_and_stats_identity():
    sol = base_solution(3)
    menu = move_menu(FULL_SET, MoveWeights((0.2, 0.2, 0.1, 0.1, 0.3, 0.1)), MP)
    stats = MoveStats()
    params = fast_params()
    cur, score = sol, 0.0
    rng = RngStream(31)
    for _ in range(15):
        cur, score = gibbs_sweep(
            cur, score, 0.0, 4, menu, CS, params, CRIT, 20, 5,
            rng, stats, eval_root=77, carrier_entry=ENTRY,
        )
        assert is_feasible(cur, CS)
        assert cur.active_count <= CS.p_max
        assert all(len(s.activations) <= SPEC.max_activations for s in cur.active_sensors)
    for label, row in stats.counts.items():
        assert row["proposed"] == (
            row["accepted"] + row["rejected_infeasible"]
            + row["rejected_below_threshold"] + row["rejected_retry_exhausted"]
        ), label


def test_sweep_output_clears_threshold():
    sol = base_solution(3)
    menu = move_menu(FIXED_P_SET, MoveWeights((0, 0, 0, 0, 1, 0)), MP)
    params = fast_params()
    from gsres.estimator import estimate_score

    base = estimate_score(sol, CS, params, CRIT, 200, 55)
    gamma = base.value  # incumbent passes by construction
    stats = MoveStats()
    out, score = gibbs_sweep(
        sol, base.value, gamma, 6, menu, CS, params, CRIT, 200, 6,
        RngStream(8), stats, eval_root=55, carrier_entry=ENTRY,
    )
    assert is_feasible(out, CS)
    assert score >= gamma


def test_stationarity_uniform_under_feasibility_only_rejection():
    """Relocation-only kernel at threshold 0 keeps a uniform start uniform.

    The proposal is symmetric and rejection is feasibility-only, so the
    uniform law over the theater is stationary; check with a chi-square test
    on a 4x4 binning at the 1% level."""
    from gsres.scenario import uniform_position

    th = Theater.rectangle(800.0, 800.0, 500.0)
    cs = ConstraintSet(th, SensorSpec(50.0, 100.0, 3, 1e9), 1)
    mp = MoveSensorParams((0.5, 0.5), 120.0, 420.0)
    menu = move_menu(FIXED_P_SET, MoveWeights((0, 0, 0, 0, 1, 0)), mp)
    params = fast_params()
    rng = RngStream(2024)
    finals = []
    for _ in range(400):
        x, y = uniform_position(th, rng)
        sol = compute_setup_times(Solution((Sensor(x, y, (450.0,)),)), cs, (400.0, 400.0))
        stats = MoveStats()
        sol, _ = gibbs_sweep(
            sol, 1.0, 0.0, 25, menu, cs, params, CRIT, 1, 3,
            rng, stats, eval_root=3, carrier_entry=(400.0, 400.0),
        )
        s = sol.sensors[0]
        finals.append((s.x, s.y))
    counts = [0] * 16
    for x, y in finals:
        counts[min(int(x / 200.0), 3) * 4 + min(int(y / 200.0), 3)] += 1
    chi2 = sum((c - 25.0) ** 2 / 25.0 for c in counts)
    assert chi2 < sstats.chi2.ppf(0.99, 15)
