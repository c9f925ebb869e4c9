import math

import pytest

from gsres.dynamics import (
    AVOIDING,
    DETECTION,
    ESCAPING,
    TRUNCATED_GAUSSIAN,
    UNAWARE,
    UNIFORM_RADIAL,
    DynamicsParams,
    IntelligenceState,
    Waypoint,
    apply_course,
    generate_trajectory,
    next_course_mean,
    transition,
)
from gsres.rng import RngStream
from gsres.scenario import ConstraintSet, Sensor, SensorSpec, Solution, Theater, contains

SPEC = SensorSpec(50.0, 100.0, 4, 1e9)


def straight_params(**kw):
    base = dict(
        mean_leg_duration=25.0,
        std_leg_duration=0.0,
        leg_duration_halfwidth=10.0,
        course_std=0.0,
        course_halfwidth=1.0,
        speed_mean=1.0,
        speed_std=0.0,
        initial_position_mode="uniform",
        initial_course_mode="fixed",
        initial_course=0.0,
    )
    base.update(kw)
    return DynamicsParams(**base)


def test_transition_identity_and_advance():
    wp = Waypoint(0.0, 0.0, 1.0, 1.0, 0.0)
    assert transition(wp, 0.0) == wp
    adv = transition(wp, 2.0)
    assert (adv.x, adv.y, adv.vx, adv.vy, adv.t) == (2.0, 2.0, 1.0, 1.0, 2.0)
    adv2 = transition(Waypoint(5.0, 3.0, -1.0, 0.0, 1.0), 4.0)
    assert (adv2.x, adv2.y, adv2.vx, adv2.vy) == (1.0, 3.0, -1.0, 0.0)
    with pytest.raises(ValueError):
        transition(wp, -1.0)


def test_apply_course():
    wp = Waypoint(0.0, 0.0, 1.0, 0.0, 0.0)
    assert apply_course(wp, 0.0).vx == 1.0
    quarter = apply_course(wp, math.pi / 2)
    assert abs(quarter.vx) < 1e-12 and abs(quarter.vy - 1.0) < 1e-12
    rng = RngStream(9)
    for _ in range(50):
        v = Waypoint(0.0, 0.0, rng.uniform() * 4 - 2, rng.uniform() * 4 - 2, 0.0)
        rot = apply_course(v, rng.uniform() * 8 - 4)
        assert rot.speed == pytest.approx(v.speed, abs=1e-12)


def test_next_course_mean_unaware_keeps_course():
    wp = Waypoint(0.0, 0.0, math.cos(0.3), math.sin(0.3), 0.0)
    sol = Solution((Sensor(10.0, 0.0, (1.0,)),))
    mean, law = next_course_mean(IntelligenceState(), wp, sol, straight_params(), SPEC)
    assert mean == pytest.approx(0.3)
    assert law == TRUNCATED_GAUSSIAN


def test_next_course_mean_escape_is_radial():
    wp = Waypoint(10.0, 0.0, -1.0, 0.0, 0.0)
    sol = Solution((Sensor(0.0, 0.0, (1.0,)),))
    mean, law = next_course_mean(IntelligenceState(ESCAPING, 0), wp, sol, straight_params(), SPEC)
    assert mean == pytest.approx(0.0)  # due east, straight away
    assert law == UNIFORM_RADIAL


def test_next_course_mean_avoidance_tangent():
    # threat dead ahead: deviation is +-asin(Rcd / distance)
    d = 400.0
    wp = Waypoint(0.0, 0.0, 1.0, 0.0, 0.0)
    sol = Solution((Sensor(d, 0.0, (1.0,)),))
    mean, law = next_course_mean(IntelligenceState(AVOIDING, 0), wp, sol, straight_params(), SPEC)
    assert law == TRUNCATED_GAUSSIAN
    assert abs(abs(mean) - math.asin(SPEC.counter_detection_radius / d)) < 1e-12
    # threat behind: keep course
    behind = Solution((Sensor(-d, 0.0, (1.0,)),))
    mean, _ = next_course_mean(IntelligenceState(AVOIDING, 0), wp, behind, straight_params(), SPEC)
    assert mean == pytest.approx(0.0)


def test_intelligence_state_validation():
    with pytest.raises(ValueError):
        IntelligenceState(AVOIDING, None)
    with pytest.raises(ValueError):
        IntelligenceState(7, 0)


def big_box(horizon=100.0):
    return Theater.rectangle(100000.0, 100000.0, horizon)


def test_zero_sensor_trajectory():
    cs = ConstraintSet(big_box(), SPEC, 2)
    params = straight_params(
        std_leg_duration=5.0, course_std=0.3, initial_position_mode="gaussian",
        initial_position_std=10.0, initial_course_mode="uniform",
    )
    tr = generate_trajectory(Solution(()), cs, params, RngStream(5))
    assert tr.events == ()
    assert tr.K >= 2
    assert tr.waypoints[0].t == 0.0
    assert tr.waypoints[-1].t == 100.0


def test_deterministic_four_equal_legs():
    cs = ConstraintSet(big_box(horizon=100.0), SPEC, 2)
    tr = generate_trajectory(Solution(()), cs, straight_params(mean_leg_duration=25.0),
                             RngStream(8))
    times = [w.t for w in tr.waypoints]
    assert times == pytest.approx([0.0, 25.0, 50.0, 75.0, 100.0])


def test_forced_detection_event_and_waypoint():
    # target marches east through the sensor disk; the only ping fires then
    cs = ConstraintSet(Theater.rectangle(1000.0, 1000.0, 200.0), SPEC, 2)
    params = straight_params(
        initial_position_mode="gaussian", initial_position_std=1e-9,
        initial_position_center=(100.0, 500.0),
    )
    sensor = Sensor(200.0, 500.0, (100.0,))  # target reaches x=200 at t=100
    tr = generate_trajectory(Solution((sensor,)), cs, params, RngStream(21))
    assert len(tr.events) == 1
    ev = tr.events[0]
    assert ev.kind == DETECTION and ev.time == pytest.approx(100.0)
    assert any(abs(w.t - ev.time) < 1e-12 for w in tr.waypoints)


def test_counter_detection_changes_course():
    cs = ConstraintSet(Theater.rectangle(1000.0, 1000.0, 200.0), SPEC, 2)
    params = straight_params(
        initial_position_mode="gaussian", initial_position_std=1e-9,
        initial_position_center=(100.0, 500.0), course_std=1e-12, course_halfwidth=0.5,
    )
    # ping at t=100 puts the target 75 m away: inside the counter-detection ring
    sensor = Sensor(275.0, 500.0, (100.0,))
    tr = generate_trajectory(Solution((sensor,)), cs, params, RngStream(4))
    assert [e.kind for e in tr.events] == ["counter_detection"]
    wp = next(w for w in tr.waypoints if abs(w.t - 100.0) < 1e-12)
    assert abs(wp.heading) > 1e-3  # avoidance tangent, no longer due east


def test_escape_course_points_away():
    cs = ConstraintSet(Theater.rectangle(1000.0, 1000.0, 200.0), SPEC, 2)
    params = straight_params(
        initial_position_mode="gaussian", initial_position_std=1e-9,
        initial_position_center=(60.0, 500.0), escape_halfwidth=1e-9,
    )
    sensor = Sensor(150.0, 500.0, (100.0,))  # target 10 m east of it at ping time
    tr = generate_trajectory(Solution((sensor,)), cs, params, RngStream(4))
    assert [e.kind for e in tr.events] == [DETECTION]
    wp = next(w for w in tr.waypoints if abs(w.t - 100.0) < 1e-12)
    assert wp.heading == pytest.approx(0.0, abs=1e-6)  # radially away: due east


def test_duration_conservation_and_event_waypoint_coupling():
    th = Theater.rectangle(400.0, 400.0, 500.0)
    cs = ConstraintSet(th, SPEC, 3)
    params = DynamicsParams(
        mean_leg_duration=60.0, std_leg_duration=20.0, leg_duration_halfwidth=40.0,
        course_std=0.4, course_halfwidth=1.2, speed_mean=2.0, speed_std=0.4,
        initial_position_mode="uniform",
    )
    sol = Solution((Sensor(200.0, 200.0, (50.0, 150.0, 300.0)), Sensor(100.0, 300.0, (220.0,))))
    for seed in range(30):
        tr = generate_trajectory(sol, cs, params, RngStream(seed))
        legs = [b.t - a.t for a, b in zip(tr.waypoints, tr.waypoints[1:])]
        assert abs(sum(legs) - 500.0) < 1e-9
        times = {round(w.t, 12) for w in tr.waypoints}
        for ev in tr.events:
            assert round(ev.time, 12) in times
        for w in tr.waypoints:
            assert contains(th, (w.x, w.y))


def test_reflection_preserves_speed_and_stays_inside():
    th = Theater.rectangle(100.0, 100.0, 300.0)
    cs = ConstraintSet(th, SPEC, 2)
    params = straight_params(
        mean_leg_duration=300.0, initial_position_mode="gaussian",
        initial_position_std=1e-9, initial_position_center=(50.0, 50.0), speed_mean=1.0,
    )
    tr = generate_trajectory(Solution(()), cs, params, RngStream(2))
    # travels 300 m inside a 100 m box: at least two wall bounces
    assert tr.K >= 4
    for w in tr.waypoints:
        assert contains(th, (w.x, w.y))
        assert w.speed == pytest.approx(1.0, abs=1e-9)


def test_trajectory_determinism():
    cs = ConstraintSet(big_box(), SPEC, 2)
    params = straight_params(std_leg_duration=5.0, course_std=0.3,
                             initial_course_mode="uniform")
    a = generate_trajectory(Solution(()), cs, params, RngStream(33))
    b = generate_trajectory(Solution(()), cs, params, RngStream(33))
    assert a == b


def test_params_validation():
    with pytest.raises(ValueError):
        straight_params(mean_leg_duration=0.0)
    with pytest.raises(ValueError):
        straight_params(speed_mean=0.0)
    with pytest.raises(ValueError):
        straight_params(initial_position_mode="gaussian", initial_position_std=0.0)
    with pytest.raises(ValueError):
        straight_params(course_memory="sometimes")
