import numpy as np
import pytest

from enginecal.opfield import (KOperationField, Profile, VehicleParams, assign_stacks, cycle_weights,
                               load_profile, nedc_style_profile, profile_to_trace, random_style_profile,
                               save_profile, trace_to_weights)

G = 9.81


def field(k=4):
    return KOperationField(k, (1000.0, 3000.0), (-50.0, 150.0))


def const_profile(v, gear, n=10):
    return Profile(np.arange(n, dtype=float), np.full(n, gear), np.full(n, float(v)))


def test_center_point_goes_to_upper_cell():
    out = assign_stacks([2000.0], [50.0], field(4))
    assert out.stacks[2][2] == [0]
    assert out.sizes().sum() == 1


def test_empty_dataset():
    out = assign_stacks([], [], field(3))
    assert out.sizes().sum() == 0 and out.excluded == 0


@pytest.mark.parametrize("seed", range(10))
def test_stacks_partition_in_field_points(seed):
    rng = np.random.default_rng(seed)
    f = rng.uniform(800, 3200, 500)
    t = rng.uniform(-80, 180, 500)
    out = assign_stacks(f, t, field(5))
    inside = (f >= 1000) & (f <= 3000) & (t >= -50) & (t <= 150)
    assert out.sizes().sum() == inside.sum() and out.excluded == (~inside).sum()
    seen = sorted(q for row in out.stacks for s in row for q in s)
    assert seen == list(np.flatnonzero(inside))
    assert out.stacks[4][4] == [] or all(f[q] <= 3000 for q in out.stacks[4][4])


def test_upper_boundary_closed():
    out = assign_stacks([3000.0], [150.0], field(4))
    assert out.stacks[3][3] == [0]


def test_trace_at_rest():
    p = VehicleParams()
    freq, torq = profile_to_trace(const_profile(0, 1), p)
    ratio = p.gear_ratios[0] * p.final_drive
    assert np.all(freq == 0)
    assert np.allclose(torq, p.mass * G * p.rolling_coeff * p.wheel_radius / ratio)


def test_trace_constant_speed():
    p = VehicleParams()
    v = 50 / 3.6
    freq, torq = profile_to_trace(const_profile(50, 3), p)
    ratio = p.gear_ratios[2] * p.final_drive
    assert np.allclose(freq, v / (2 * np.pi * p.wheel_radius) * ratio * 60)
    force = p.mass * G * p.rolling_coeff + 0.5 * p.air_density * p.drag_area_coeff * v ** 2
    assert np.allclose(torq, force * p.wheel_radius / ratio)


def test_doubling_gear_ratio_scales_trace():
    p = VehicleParams()
    q = VehicleParams(gear_ratios=tuple(2 * r for r in p.gear_ratios))
    f1, t1 = profile_to_trace(const_profile(40, 2), p)
    f2, t2 = profile_to_trace(const_profile(40, 2), q)
    assert np.allclose(f2, 2 * f1) and np.allclose(t2, t1 / 2)


def test_neutral_and_bad_gear():
    f, t = profile_to_trace(const_profile(30, 0), VehicleParams())
    assert np.all(f == 0) and np.all(t == 0)
    with pytest.raises(ValueError):
        profile_to_trace(const_profile(30, 9), VehicleParams())
    with pytest.raises(ValueError):
        VehicleParams(mass=0)


def test_weights_single_cell():
    w = trace_to_weights(np.full(30, 1100.0), np.full(30, 0.0), field(4), 1.0)
    assert w.omega[0, 1] == 30 and w.omega.sum() == 30 and w.covered.sum() == 1


def test_weights_equal_visits_and_order_independence():
    rng = np.random.default_rng(0)
    fr = np.r_[np.full(10, 1100.0), np.full(10, 2900.0)]
    tq = np.r_[np.full(10, 0.0), np.full(10, 100.0)]
    w = trace_to_weights(fr, tq, field(4), 0.5)
    assert w.omega[0, 1] == w.omega[3, 3] == 5.0
    perm = rng.permutation(20)
    assert np.array_equal(trace_to_weights(fr[perm], tq[perm], field(4), 0.5).omega, w.omega)


@pytest.mark.parametrize("seed", range(5))
def test_weights_conserve_time(seed):
    rng = np.random.default_rng(seed)
    n = 400
    fr, tq = rng.uniform(0, 4000, n), rng.uniform(-100, 200, n)
    w = trace_to_weights(fr, tq, field(6), 0.25)
    assert w.omega.sum() == pytest.approx(n * 0.25) == w.total_time
    assert np.all(w.omega >= 0)


def test_bundled_profile_coverage():
    k = 16
    op = KOperationField(k, (1000.0, 2600.0), (0.0, 250.0))
    nedc = cycle_weights(nedc_style_profile(), op).covered.sum()
    rand = cycle_weights(random_style_profile(), op).covered.sum()
    assert nedc < 0.5 * k * k < rand


def test_profile_file_roundtrip(tmp_path):
    p = nedc_style_profile()
    save_profile(p, tmp_path / "c.csv")
    q = load_profile(tmp_path / "c.csv")
    assert np.array_equal(q.gear, p.gear) and np.allclose(q.velocity, p.velocity, atol=1e-3)
    assert q.distance_km == pytest.approx(p.distance_km, rel=1e-6)
    (tmp_path / "bad.csv").write_text("t,g,v\n0,0,0\n")
    with pytest.raises(ValueError):
        load_profile(tmp_path / "bad.csv")
