import math

import pytest

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
    reflect_into,
    uniform_position,
)

SPEC = SensorSpec(
    detection_radius=50.0, counter_detection_radius=100.0, max_activations=3, carrier_speed=10.0
)


def square(side=10.0, horizon=100.0, delay=0.0):
    return Theater.rectangle(side, side, horizon, delay)


def test_contains_rectangle():
    th = square()
    assert contains(th, (5.0, 5.0))
    assert contains(th, (10.0, 10.0))  # boundary counts as inside
    assert not contains(th, (11.0, 5.0))


def test_theater_validation():
    with pytest.raises(ValueError):
        Theater(((0, 0), (1, 0)), 10.0)
    with pytest.raises(ValueError):
        Theater(((0, 0), (1, 0), (1, 1)), 0.0)
    with pytest.raises(ValueError):
        Theater(((0, 0), (1, 0), (1, 1)), 10.0, hunter_delay=10.0)
    with pytest.raises(ValueError):
        # reflex vertex
        Theater(((0, 0), (4, 0), (2, 1), (4, 4), (0, 4)), 10.0)
    # clockwise input is normalized, not rejected
    th = Theater(((0, 0), (0, 4), (4, 4), (4, 0)), 10.0)
    assert contains(th, (2.0, 2.0))


def test_centroid_and_uniform_position():
    th = square()
    cx, cy = th.centroid
    assert cx == pytest.approx(5.0) and cy == pytest.approx(5.0)
    rng = RngStream(3)
    pts = [uniform_position(th, rng) for _ in range(500)]
    assert all(contains(th, p) for p in pts)
    # rough uniformity: quadrant counts balanced
    q = sum(1 for x, y in pts if x < 5 and y < 5)
    assert 80 < q < 170


def test_reflect_into():
    th = square()
    assert reflect_into(th, (5.0, 5.0)) == (5.0, 5.0)
    x, y = reflect_into(th, (12.0, 5.0))
    assert contains(th, (x, y)) and x == pytest.approx(8.0)
    assert contains(th, reflect_into(th, (-37.0, 52.0)))


def test_setup_times_single_sensor():
    th = square(side=1000.0, horizon=1000.0)
    cs = ConstraintSet(th, SPEC, p_max=4)
    sol = Solution((Sensor(100.0, 0.0, (50.0,)),))
    out = compute_setup_times(sol, cs, (0.0, 0.0))
    assert out.sensors[0].setup_time == pytest.approx(10.0)  # 100 m at 10 m/s


def test_setup_times_colocated_is_zero():
    th = square(side=1000.0, horizon=1000.0)
    cs = ConstraintSet(th, SPEC, p_max=4)
    out = compute_setup_times(Solution((Sensor(3.0, 4.0, (9.0,)),)), cs, (3.0, 4.0))
    assert out.sensors[0].setup_time == 0.0


def test_setup_times_cumulative_with_delay():
    th = square(side=1000.0, horizon=1000.0, delay=5.0)
    cs = ConstraintSet(th, SPEC, p_max=4)
    sol = Solution((Sensor(100.0, 0.0, (900.0,)), Sensor(200.0, 0.0, (950.0,))))
    out = compute_setup_times(sol, cs, (0.0, 0.0))
    assert out.sensors[0].setup_time == pytest.approx(15.0)
    assert out.sensors[1].setup_time == pytest.approx(25.0)


def test_setup_times_skip_inactive_and_stay_monotone():
    th = square(side=1000.0, horizon=1000.0)
    cs = ConstraintSet(th, SPEC, p_max=5)
    rng = RngStream(17)
    for _ in range(50):
        sensors = tuple(
            Sensor(rng.uniform() * 1000, rng.uniform() * 1000, (999.0,), active=rng.uniform() < 0.7)
            for _ in range(5)
        )
        out = compute_setup_times(Solution(sensors), cs, (500.0, 500.0))
        setups = [s.setup_time for s in out.sensors if s.active]
        assert setups == sorted(setups)


def test_is_feasible_basic():
    th = square(horizon=100.0)
    cs = ConstraintSet(th, SPEC, p_max=2)
    ok = Solution((Sensor(5.0, 5.0, (20.0, 30.0), setup_time=10.0),))
    assert is_feasible(ok, cs)
    # activation before setup
    assert not is_feasible(Solution((Sensor(5.0, 5.0, (5.0,), setup_time=10.0),)), cs)
    # outside the theater
    assert not is_feasible(Solution((Sensor(15.0, 5.0, (20.0,), setup_time=0.0),)), cs)
    # activation past the horizon
    assert not is_feasible(Solution((Sensor(5.0, 5.0, (150.0,), setup_time=0.0),)), cs)
    # non-increasing instants
    assert not is_feasible(Solution((Sensor(5.0, 5.0, (30.0, 30.0), setup_time=0.0),)), cs)
    # too many activations
    assert not is_feasible(Solution((Sensor(5.0, 5.0, (1.0, 2.0, 3.0, 4.0), setup_time=0.0),)), cs)
    # too many sensors
    three = Solution(tuple(Sensor(5.0, 5.0, (20.0,), setup_time=1.0) for _ in range(3)))
    assert not is_feasible(three, cs)


def test_disabling_never_breaks_remaining():
    th = square(horizon=100.0)
    cs = ConstraintSet(th, SPEC, p_max=3)
    sol = Solution(
        (
            Sensor(1.0, 1.0, (10.0,), setup_time=2.0),
            Sensor(2.0, 2.0, (20.0,), setup_time=3.0),
            Sensor(3.0, 3.0, (30.0,), setup_time=4.0),
        )
    )
    assert is_feasible(sol, cs)
    for i in range(3):
        sensors = list(sol.sensors)
        sensors[i] = Sensor(sensors[i].x, sensors[i].y, sensors[i].activations,
                            sensors[i].setup_time, active=False)
        assert is_feasible(Solution(tuple(sensors)), cs)


def test_compact_and_counts():
    sol = Solution(
        (
            Sensor(1.0, 1.0, (10.0,)),
            Sensor(2.0, 2.0, (20.0,), active=False),
            Sensor(3.0, 3.0, (30.0,)),
        )
    )
    assert sol.active_count == 2
    assert len(sol.compact().sensors) == 2
    assert all(s.active for s in sol.compact().sensors)


def test_sensor_spec_validation():
    with pytest.raises(ValueError):
        SensorSpec(0.0, 100.0, 1, 10.0)
    with pytest.raises(ValueError):
        SensorSpec(50.0, 40.0, 1, 10.0)
    with pytest.raises(ValueError):
        SensorSpec(50.0, 100.0, 0, 10.0)
    with pytest.raises(ValueError):
        SensorSpec(50.0, 100.0, 1, 0.0)
