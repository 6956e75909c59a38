import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diabatic.errors import DegenerateTrajectoryError, DomainError
from diabatic.model import DEFAULT_MODEL, coupling_w
from diabatic.trajectory import (
    adiabaticity,
    eta,
    eta_quadrature,
    geometry,
    interaction_length,
    make_trajectory,
    s_of_z,
)


def test_make_trajectory_examples():
    t = make_trajectory(0.2547, 0.0)
    assert (t.z_min, t.z_max) == (-1.0, 1.0)
    assert t.half_time == pytest.approx(3.92619, abs=1e-5)
    assert t.total_time == pytest.approx(2 / 0.2547)
    assert make_trajectory(1.0, 0.6).z_max == pytest.approx(0.8, abs=1e-15)


@pytest.mark.parametrize("v,b,err", [(1.0, 1.0, DegenerateTrajectoryError), (1.0, 1.5, DegenerateTrajectoryError),
                                     (0.0, 0.2, DomainError), (-1.0, 0.0, DomainError), (0.3, -0.1, DomainError),
                                     (math.nan, 0.0, DomainError)])
def test_make_trajectory_errors(v, b, err):
    with pytest.raises(err):
        make_trajectory(v, b)


def test_degenerate_is_a_domain_error():
    assert issubclass(DegenerateTrajectoryError, DomainError)


def test_geometry_examples():
    assert geometry(make_trajectory(1.0, 0.0), -0.5) == (0.5, -1.0)
    s, ds = geometry(make_trajectory(1.0, 0.3), 0.4)
    assert s == pytest.approx(0.5) and ds == pytest.approx(0.8)
    assert geometry(make_trajectory(1.0, 0.0), 0.0) == (0.0, 0.0)
    with pytest.raises(DomainError):
        geometry(make_trajectory(1.0, 0.6), 0.81)


@given(st.floats(0.0, 0.99), st.floats(0.0, 1.0))
def test_geometry_symmetry(b, frac):
    t = make_trajectory(0.3, b)
    z = frac * t.z_max
    s1, d1 = geometry(t, z)
    s2, d2 = geometry(t, -z)
    assert s1 == s2 and d1 == -d2
    assert b - 1e-15 <= s1 <= 1.0


@given(st.floats(0.0, 0.99))
def test_endpoints_map_to_one(b):
    t = make_trajectory(0.3, b)
    for z in (t.z_min, t.z_max):
        assert abs(geometry(t, z)[0] - 1.0) <= 1e-14


def test_s_of_z_vectorised():
    s, ds = s_of_z(0.0, np.array([-1.0, 0.0, 0.25]))
    assert s == pytest.approx([1.0, 0.0, 0.25]) and ds == pytest.approx([-1.0, 0.0, 1.0])


def _eta_riemann(v, b, n=400_001):
    # independent oracle: trapezoid rule on a dense z grid with the phase
    # integral built by cumulative trapezoid
    from scipy.integrate import cumulative_trapezoid, trapezoid

    t = make_trajectory(v, b)
    z = np.linspace(t.z_min, t.z_max, n)
    s, ds = s_of_z(b, z)
    s = np.minimum(s, 1.0)
    gap = 2 * np.sqrt(s**8 + (1 - s) ** 8)
    phase = cumulative_trapezoid(gap / v, z, initial=0.0)
    f = coupling_w(DEFAULT_MODEL, s) * ds * np.exp(1j * phase)
    return abs(trapezoid(f, z)) ** 2


@pytest.mark.parametrize("v,b", [(0.25, 0.0), (0.08, 0.2), (0.6, 0.5)])
def test_eta_against_independent_routes(v, b):
    t = make_trajectory(v, b)
    fast = eta(DEFAULT_MODEL, t)
    assert fast == pytest.approx(eta_quadrature(DEFAULT_MODEL, t), abs=1e-8)
    assert fast == pytest.approx(_eta_riemann(v, b), rel=1e-5, abs=1e-9)


def test_eta_tolerance_refinement_stable():
    t = make_trajectory(0.2, 0.1)
    a = eta(DEFAULT_MODEL, t, rtol=1e-8, atol=1e-10)
    b = eta(DEFAULT_MODEL, t, rtol=1e-11, atol=1e-13)
    assert a == pytest.approx(b, abs=1e-6)


def test_eta_limits():
    assert eta(DEFAULT_MODEL, make_trajectory(1e3, 0.0)) < 1e-5
    assert eta(DEFAULT_MODEL, make_trajectory(0.002, 0.0)) < eta(DEFAULT_MODEL, make_trajectory(0.2, 0.0)) / 10


def test_eta_argmax_near_quarter_speed():
    v = np.linspace(0.15, 0.35, 201)
    vals = [eta(DEFAULT_MODEL, make_trajectory(x, 0.0)) for x in v]
    assert v[int(np.argmax(vals))] == pytest.approx(0.249, abs=0.01)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.02, 2.0), st.floats(0.0, 0.9))
def test_eta_nonnegative(v, b):
    assert eta(DEFAULT_MODEL, make_trajectory(v, b)) >= 0.0


def test_adiabaticity_gap_and_regimes():
    slow = adiabaticity(DEFAULT_MODEL, make_trajectory(0.005, 0.0))
    fast = adiabaticity(DEFAULT_MODEL, make_trajectory(0.2547, 0.0))
    assert slow.delta_e_min == pytest.approx(math.sqrt(2) / 8, abs=1e-12)
    assert slow.regime == "adiabatic" and slow.massey_xi > 10
    assert fast.regime == "non-adiabatic"
    assert 0.1 < fast.massey_xi < 1.0
    assert fast.epsilon_ratio > 1.0
    for f in (slow.delta_e_min, slow.d_max, slow.epsilon_ratio, slow.massey_xi, slow.interaction_length_a):
        assert f >= 0


def test_adiabaticity_d_max_linear_in_v():
    a = adiabaticity(DEFAULT_MODEL, make_trajectory(0.1, 0.2))
    b = adiabaticity(DEFAULT_MODEL, make_trajectory(0.3, 0.2))
    assert b.d_max == pytest.approx(3 * a.d_max, rel=1e-9)


def test_massey_xi_decreasing_in_v():
    xi = [adiabaticity(DEFAULT_MODEL, make_trajectory(v, 0.1), n=801).massey_xi for v in (0.01, 0.05, 0.1, 0.5, 1.0)]
    assert all(x > y for x, y in zip(xi, xi[1:]))


def test_gap_grows_with_impact_parameter():
    # past b = 1/2 the path no longer reaches the crossing
    g = adiabaticity(DEFAULT_MODEL, make_trajectory(0.1, 0.7)).delta_e_min
    assert g == pytest.approx(2 * math.sqrt(0.7**8 + 0.3**8), abs=1e-12)


def test_interaction_length_b0_two_lobes():
    a = interaction_length(DEFAULT_MODEL, 0.0)
    # each lobe is the half-max width of W(s) around s = 1/2
    s = np.linspace(0, 1, 200_001)
    w = np.abs(coupling_w(DEFAULT_MODEL, s))
    width = np.ptp(s[w >= 0.5 * w.max()])
    assert a == pytest.approx(2 * width, abs=1e-4)
