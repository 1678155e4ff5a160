"""Classical guiding-center dynamics: closed form, RK4 cross-check,
conserved quantities and the ballistic transport observable."""

import math

import numpy as np
import pytest

from channel_spectra import (
    ClassicalState,
    GaussianBumpPotential,
    PolynomialProfile,
    TransverseProfilePotential,
    ZeroPotential,
    closed_form_state,
    closed_form_trajectory,
    derive_params,
    integrate,
    mourre_observable,
)
from channel_spectra.classical import energy, guiding_center

_P34 = derive_params(3.0, 4.0)
_INIT = ClassicalState(t=0.0, x=0.0, y=0.0, px=1.0, py=0.0)


def test_reference_orbit_formulas():
    # B = 3, omega = 4, px = 1 from the origin:
    # x = 1.28 t + 0.072 sin 10t, y = 0.12 (cos 10t - 1), py = -0.6 sin 10t
    for t in (0.0, 0.1, 0.37, 1.0, 2.5):
        s = closed_form_state(_P34, _INIT, t)
        assert abs(s.x - (1.28 * t + 0.072 * math.sin(10 * t))) < 1e-12
        assert abs(s.y - 0.12 * (math.cos(10 * t) - 1.0)) < 1e-12
        assert abs(s.py - (-0.6) * math.sin(10 * t)) < 1e-12
        assert s.px == 1.0


def test_trajectory_matches_pointwise_closed_form():
    traj = closed_form_trajectory(_P34, _INIT, t_end=0.5, dt=1e-2)
    assert traj.times.shape == (51,)
    for i in (0, 7, 50):
        s = closed_form_state(_P34, _INIT, float(traj.times[i]))
        got = traj.state(i)
        assert abs(got.x - s.x) < 1e-12
        assert abs(got.y - s.y) < 1e-12
        assert abs(got.py - s.py) < 1e-12


def test_closed_form_satisfies_equations_of_motion():
    rng = np.random.default_rng(7)
    for _ in range(10):
        B, om = rng.uniform(0.0, 4.0), rng.uniform(0.5, 4.0)
        p = derive_params(B, om)
        init = ClassicalState(0.0, *rng.uniform(-2.0, 2.0, size=4))
        t = rng.uniform(0.1, 3.0)
        h = 1e-5
        plus = closed_form_state(p, init, t + h)
        minus = closed_form_state(p, init, t - h)
        here = closed_form_state(p, init, t)
        assert abs((plus.x - minus.x) / (2 * h) - 2 * (here.px + B * here.y)) < 1e-6
        assert abs((plus.y - minus.y) / (2 * h) - 2 * here.py) < 1e-6
        vy = -2 * B * (here.px + B * here.y) - 2 * om**2 * here.y
        assert abs((plus.py - minus.py) / (2 * h) - vy) < 1e-5


def test_closed_form_group_property():
    rng = np.random.default_rng(11)
    for _ in range(5):
        p = derive_params(rng.uniform(0.0, 3.0), rng.uniform(0.5, 3.0))
        init = ClassicalState(0.0, *rng.uniform(-1.0, 1.0, size=4))
        t1, t2 = rng.uniform(0.1, 1.0, size=2)
        mid = closed_form_state(p, init, t1)
        assert abs(mid.t - t1) < 1e-15
        end_two_hops = closed_form_state(p, mid, t1 + t2)
        end_direct = closed_form_state(p, init, t1 + t2)
        assert abs(end_two_hops.x - end_direct.x) < 1e-10
        assert abs(end_two_hops.y - end_direct.y) < 1e-10
        assert abs(end_two_hops.py - end_direct.py) < 1e-10


def test_rk4_matches_closed_form():
    rk = integrate(_P34, None, _INIT, t_end=0.5, dt=5e-4)
    cf = closed_form_trajectory(_P34, _INIT, t_end=0.5, dt=5e-4)
    assert rk.method == "rk4" and cf.method == "closed_form"
    assert np.max(np.hypot(rk.x - cf.x, rk.y - cf.y)) < 1e-9
    assert np.array_equal(rk.times, cf.times)


def test_momentum_and_energy_are_conserved():
    cf = closed_form_trajectory(_P34, _INIT, t_end=1.0, dt=1e-3)
    assert np.all(cf.px == 1.0)  # free motion never touches p_x
    assert cf.energy_drift < 1e-12
    rk = integrate(_P34, None, _INIT, t_end=1.0, dt=1e-3)
    assert np.all(rk.px == 1.0)
    assert rk.energy_drift < 1e-9
    e0 = energy(_P34, _INIT)
    assert abs(e0 - cf.energies[0]) < 1e-14


def test_guiding_center_moves_ballistically():
    cf = closed_form_trajectory(_P34, _INIT, t_end=2.0, dt=1e-3)
    sx = cf.guiding_center_x
    # S_x = x + mu p_y is exactly linear with slope 2 beta p_x
    expected = sx[0] + 2.0 * _P34.beta * 1.0 * cf.times
    assert np.max(np.abs(sx - expected)) < 1e-10
    assert np.max(np.abs(cf.guiding_center_y + _P34.mu * 1.0)) < 1e-15
    sx0, sy0 = guiding_center(_P34, _INIT)
    assert abs(sx0 - sx[0]) < 1e-15 and abs(sy0 + 0.12) < 1e-15


def test_transport_observable_slope():
    cf = closed_form_trajectory(_P34, _INIT, t_end=1.0, dt=1e-3)
    series = mourre_observable(cf)
    assert abs(series.slope - 1.28) < 1e-10  # 2 beta p_x^2
    rng = np.random.default_rng(3)
    for _ in range(5):
        p = derive_params(rng.uniform(0.0, 4.0), rng.uniform(0.5, 4.0))
        init = ClassicalState(0.0, *rng.uniform(-1.5, 1.5, size=4))
        series = mourre_observable(closed_form_trajectory(p, init, 1.0, 1e-3))
        assert abs(series.slope - 2.0 * p.beta * init.px**2) < 1e-9


def test_rk4_conserves_energy_with_bump_potential():
    spec = GaussianBumpPotential(bumps=((0.5, 0.3, 0.0, 0.7),))
    traj = integrate(_P34, spec, _INIT, t_end=1.0, dt=1e-3)
    assert not traj.aborted
    assert traj.energy_drift < 1e-8
    assert traj.source_potential == spec.kind


def test_unbounded_potential_aborts_cleanly():
    # W = -10 y^2 overturns the confinement; the orbit grows like e^{6t}
    spec = TransverseProfilePotential(PolynomialProfile([0.0, 0.0, -10.0]))
    p = derive_params(0.0, 1.0)
    traj = integrate(p, spec, ClassicalState(0.0, 0.0, 0.1, 0.0, 0.0), t_end=10.0, dt=1e-3)
    assert traj.aborted
    assert traj.times[-1] < 5.0
    assert np.all(np.isfinite(traj.states))


def test_zero_potential_object_equals_none():
    a = integrate(_P34, ZeroPotential(), _INIT, t_end=0.2, dt=1e-3)
    b = integrate(_P34, None, _INIT, t_end=0.2, dt=1e-3)
    assert np.array_equal(a.states, b.states)
    assert a.source_potential == "zero"


def test_time_step_validation():
    with pytest.raises(ValueError):
        integrate(_P34, None, _INIT, t_end=1.0, dt=0.0)
    with pytest.raises(ValueError):
        integrate(_P34, None, _INIT, t_end=-1.0)
    with pytest.raises(ValueError):
        closed_form_trajectory(_P34, _INIT, t_end=0.0, dt=1e-3)
