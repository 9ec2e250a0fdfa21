import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from drivercost.errors import FitError
from drivercost.quintic import QuinticSegment, fit_slice, from_initial_state


def poly_oracle(coeffs, tau):
    """Independent polynomial arithmetic: powers summed explicitly."""
    c = list(coeffs)
    pos = sum(c[i] * tau ** (5 - i) for i in range(6))
    vel = sum((5 - i) * c[i] * tau ** (4 - i) for i in range(5))
    acc = sum((5 - i) * (4 - i) * c[i] * tau ** (3 - i) for i in range(4))
    return pos, vel, acc


def test_eval_linear():
    seg = QuinticSegment((0, 0, 0, 0, 1, 2), duration=4)
    point = seg.evaluate(3.0)
    assert point.position == pytest.approx(5.0)
    assert point.velocity == pytest.approx(1.0)
    assert point.acceleration == pytest.approx(0.0)


def test_eval_parabola():
    seg = QuinticSegment((0, 0, 0, 0.5, 0, 0), duration=3)
    point = seg.evaluate(2.0)
    assert point.position == pytest.approx(2.0)
    assert point.velocity == pytest.approx(2.0)
    assert point.acceleration == pytest.approx(1.0)


def test_eval_all_ones_matches_oracle():
    coeffs = (1, 1, 1, 1, 1, 1)
    expect = poly_oracle(coeffs, 1.0)
    assert expect == (6.0, 15.0, 40.0)
    point = QuinticSegment(coeffs, duration=2).evaluate(1.0)
    assert point.position == pytest.approx(expect[0])
    assert point.velocity == pytest.approx(expect[1])
    assert point.acceleration == pytest.approx(expect[2])


def test_eval_rejects_out_of_range():
    seg = QuinticSegment((0, 0, 0, 0, 0, 1), duration=1)
    with pytest.raises(ValueError):
        seg.evaluate(1.5)
    with pytest.raises(ValueError):
        seg.evaluate(-0.1)


def test_from_initial_state_boundary_identity():
    seg = from_initial_state(10.0, 5.0, 2.0, free=(0, 0, 0), duration=2)
    assert seg.coeffs == (0, 0, 0, 1.0, 5.0, 10.0)
    point = seg.evaluate(0.0)
    assert (point.position, point.velocity, point.acceleration) == (10.0, 5.0, 2.0)


def test_from_initial_state_pure_quintic_term():
    seg = from_initial_state(0.0, 0.0, 0.0, free=(1, 0, 0), duration=1)
    assert seg.evaluate(1.0).position == pytest.approx(1.0)


def test_from_initial_state_cubic_free_coefficient():
    p0, v0, a0 = 3.0, 1.5, -0.4
    seg = from_initial_state(p0, v0, a0, free=(0, 0, 1), duration=2)
    expect = poly_oracle(seg.coeffs, 2.0)[0]
    assert expect == pytest.approx(p0 + 2 * v0 + 2 * a0 + 8.0)
    assert seg.evaluate(2.0).position == pytest.approx(expect)


def test_fit_slice_exact_cubic():
    t = np.linspace(0, 1, 11)
    seg, rms = fit_slice(t, t**3, duration=1.0)
    assert np.allclose(seg.coeffs, (0, 0, 1, 0, 0, 0), atol=1e-9)
    assert rms == pytest.approx(0.0, abs=1e-10)


def test_fit_slice_constant():
    t = np.linspace(0, 1, 8)
    seg, _ = fit_slice(t, np.full_like(t, 7.0), duration=1.0)
    assert np.allclose(seg.coeffs, (0, 0, 0, 0, 0, 7.0), atol=1e-9)


def test_fit_slice_noisy_cubic_residual():
    rng = np.random.default_rng(3)
    t = np.linspace(0, 1, 50)
    sigma = 0.01
    pos = 2 * t**3 - t + 0.5 + rng.normal(0, sigma, t.size)
    _, rms = fit_slice(t, pos, duration=1.0)
    assert rms <= 3 * sigma


def test_fit_slice_rejects_few_points():
    t = np.linspace(0, 1, 5)
    with pytest.raises(FitError):
        fit_slice(t, t, duration=1.0)


def test_fit_slice_rejects_duplicate_times():
    t = np.array([0.0, 0.1, 0.1, 0.2, 0.2, 0.3, 0.4])  # 5 distinct values
    with pytest.raises(FitError):
        fit_slice(t, t, duration=0.5)


coeff = st.floats(min_value=-10, max_value=10, allow_nan=False)


@settings(max_examples=50, deadline=None)
@given(st.tuples(coeff, coeff, coeff, coeff, coeff, coeff),
       st.floats(min_value=0.05, max_value=0.95))
def test_derivative_consistency(coeffs, frac):
    seg = QuinticSegment(coeffs, duration=1.0)
    tau = frac
    h = 1e-6
    a = seg.evaluate(tau)
    b = seg.evaluate(tau + h)
    fd_vel = (b.position - a.position) / h
    fd_acc = (b.velocity - a.velocity) / h
    scale_v = max(1.0, abs(a.velocity))
    scale_a = max(1.0, abs(a.acceleration))
    assert abs(fd_vel - a.velocity) / scale_v < 1e-4
    assert abs(fd_acc - a.acceleration) / scale_a < 1e-4


@settings(max_examples=30, deadline=None)
@given(st.tuples(coeff, coeff, coeff, coeff, coeff, coeff))
def test_fit_recovers_generated_segment(coeffs):
    seg = QuinticSegment(coeffs, duration=1.0)
    t = np.linspace(0, 1, 20)
    pos = np.array([seg.evaluate(x).position for x in t])
    fitted, _ = fit_slice(t, pos, duration=1.0)
    assert np.allclose(fitted.coeffs, coeffs, atol=1e-8)


def test_sample_matches_evaluate():
    seg = QuinticSegment((0.3, -1.2, 0.7, 2.0, -3.0, 10.0), duration=1.0)
    pos, vel, acc = seg.sample(0.1, 11)
    for i in (0, 5, 10):
        point = seg.evaluate(0.1 * i)
        assert pos[i] == pytest.approx(point.position, rel=1e-14)
        assert vel[i] == pytest.approx(point.velocity, rel=1e-14)
        assert acc[i] == pytest.approx(point.acceleration, rel=1e-14)
