import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diabatic.errors import DomainError
from diabatic.model import (
    DEFAULT_MODEL,
    ModelSpec,
    coupling_surface,
    coupling_surface_closed_form,
    coupling_w,
    eigensystem,
    energies,
    hamiltonian_at,
    hamiltonian_derivative,
    mixing_angle,
)

unit_s = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


def test_hamiltonian_endpoints_and_midpoint():
    assert np.array_equal(hamiltonian_at(DEFAULT_MODEL, 1.0), np.diag([-1.0, 1.0]))
    assert np.array_equal(hamiltonian_at(DEFAULT_MODEL, 0.0), np.array([[0.0, -1.0], [-1.0, 0.0]]))
    h = hamiltonian_at(DEFAULT_MODEL, 0.5)
    assert h == pytest.approx(np.array([[-0.0625, -0.0625], [-0.0625, 0.0625]]), abs=1e-15)


@pytest.mark.parametrize("s", [-1e-9, 1.0 + 1e-9, math.nan])
def test_hamiltonian_rejects_bad_s(s):
    with pytest.raises(DomainError):
        hamiltonian_at(DEFAULT_MODEL, s)


@pytest.mark.parametrize(
    "kw",
    [dict(eps0=1.0, eps1=1.0), dict(eps0=2.0, eps1=1.0), dict(f_exponent=0), dict(g_exponent=-1), dict(coupling_strength=0.0 + math.inf)],
)
def test_model_spec_validation(kw):
    with pytest.raises(DomainError):
        ModelSpec(**kw)


def test_hamiltonian_derivative_matches_finite_difference():
    s, h = 0.37, 1e-6
    fd = (hamiltonian_at(DEFAULT_MODEL, s + h) - hamiltonian_at(DEFAULT_MODEL, s - h)) / (2 * h)
    assert hamiltonian_derivative(DEFAULT_MODEL, s) == pytest.approx(fd, abs=1e-8)


def test_eigensystem_anchor_points():
    f1 = eigensystem(DEFAULT_MODEL, 1.0)
    assert (f1.e_lower, f1.e_upper) == (-1.0, 1.0)
    assert f1.eigvec_lower == pytest.approx([1.0, 0.0])
    assert f1.eigvec_upper == pytest.approx([0.0, 1.0])

    f0 = eigensystem(DEFAULT_MODEL, 0.0)
    r = 1 / math.sqrt(2)
    assert (f0.e_lower, f0.e_upper) == pytest.approx((-1.0, 1.0))
    assert f0.eigvec_lower == pytest.approx([r, r], abs=1e-15)
    assert f0.eigvec_upper == pytest.approx([-r, r], abs=1e-15)

    fh = eigensystem(DEFAULT_MODEL, 0.5)
    assert (fh.e_lower, fh.e_upper) == pytest.approx((-0.08838835, 0.08838835), abs=1e-8)


def test_energies_closed_form_on_dense_grid():
    s = np.linspace(0.0, 1.0, 10_001)
    e0, e1 = energies(DEFAULT_MODEL, s)
    exact = np.sqrt(s**8 + (1 - s) ** 8)
    assert np.max(np.abs(e0 + exact)) <= 1e-12
    assert np.max(np.abs(e1 - exact)) <= 1e-12


def test_energies_against_generic_eigensolver():
    model = ModelSpec(eps0=-0.3, eps1=1.7, coupling_strength=0.6, f_exponent=2, g_exponent=3)
    for s in np.linspace(0, 1, 57):
        ref = np.linalg.eigvalsh(hamiltonian_at(model, s))
        assert energies(model, s) == pytest.approx(tuple(ref), abs=1e-13)


def test_frame_orthonormal_and_continuous():
    grid = np.linspace(0.0, 1.0, 10_001)
    prev = None
    for s in grid[::10]:
        fr = eigensystem(DEFAULT_MODEL, s)
        m = np.column_stack([fr.eigvec_lower, fr.eigvec_upper])
        assert np.max(np.abs(m.T @ m - np.eye(2))) <= 1e-14
        h = hamiltonian_at(DEFAULT_MODEL, s)
        assert h @ fr.eigvec_lower == pytest.approx(fr.e_lower * fr.eigvec_lower, abs=1e-14)
        if prev is not None:
            assert prev @ fr.eigvec_lower > 0
        prev = fr.eigvec_lower


def test_coupling_w_closed_form_and_peak():
    s = np.linspace(0, 1, 1001)
    closed = 2 * s**3 * (1 - s) ** 3 / (s**8 + (1 - s) ** 8)
    assert coupling_w(DEFAULT_MODEL, s) == pytest.approx(closed, abs=1e-12)
    assert abs(coupling_w(DEFAULT_MODEL, 0.5)) == pytest.approx(4.0, abs=1e-10)
    assert coupling_w(DEFAULT_MODEL, 0.0) == 0.0
    assert coupling_w(DEFAULT_MODEL, 1.0) == 0.0


@pytest.mark.parametrize(
    "model",
    [DEFAULT_MODEL, ModelSpec(eps0=-2.0, eps1=0.5, coupling_strength=0.3, f_exponent=2, g_exponent=5)],
)
def test_coupling_w_matches_eigenvector_finite_difference(model):
    h = 1e-6
    for s in np.linspace(0.01, 0.99, 99):
        lo, hi = eigensystem(model, s - h), eigensystem(model, s + h)
        fd = eigensystem(model, s).eigvec_lower @ (hi.eigvec_upper - lo.eigvec_upper) / (2 * h)
        assert coupling_w(model, s) == pytest.approx(fd, abs=1e-6)


def test_coupling_w_one_sided_difference_definition():
    # <phi0(s)|phi1(s+h)>/h with h = 1e-6
    h = 1e-6
    for s in (0.2, 0.45, 0.5, 0.8):
        fd = eigensystem(DEFAULT_MODEL, s).eigvec_lower @ eigensystem(DEFAULT_MODEL, s + h).eigvec_upper / h
        assert coupling_w(DEFAULT_MODEL, s) == pytest.approx(fd, abs=1e-5 * max(1.0, abs(fd)))


@given(unit_s)
def test_coupling_antisymmetry(s):
    # <phi1|d phi0> = +dθ/ds = -W
    h = 1e-7
    lo, hi = max(s - h, 0.0), min(s + h, 1.0)
    if hi - lo < h:
        return
    d_lower = (eigensystem(DEFAULT_MODEL, hi).eigvec_lower - eigensystem(DEFAULT_MODEL, lo).eigvec_lower) / (hi - lo)
    other = eigensystem(DEFAULT_MODEL, 0.5 * (lo + hi)).eigvec_upper @ d_lower
    assert other == pytest.approx(-coupling_w(DEFAULT_MODEL, 0.5 * (lo + hi)), abs=1e-5)


def test_coupling_surface_default():
    assert coupling_surface(DEFAULT_MODEL) == pytest.approx(math.pi / 4, abs=1e-9)
    assert coupling_surface_closed_form(DEFAULT_MODEL) == pytest.approx(math.pi / 4, abs=1e-15)


@pytest.mark.parametrize("c", [1e-3, 0.1, 5.0])
def test_coupling_surface_independent_of_coupling_scale(c):
    model = ModelSpec(coupling_strength=c)
    assert coupling_surface(model) == pytest.approx(math.pi / 4, abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(
    st.floats(-3, -0.1),
    st.floats(0.1, 3),
    st.floats(0.05, 4),
    st.integers(1, 6),
    st.integers(1, 6),
)
def test_surface_quadrature_matches_endpoint_angles(e0, e1, c, k, m):
    model = ModelSpec(eps0=e0, eps1=e1, coupling_strength=c, f_exponent=k, g_exponent=m)
    assert coupling_surface(model) == pytest.approx(coupling_surface_closed_form(model), abs=1e-9)


def test_mixing_angle_endpoints():
    assert mixing_angle(DEFAULT_MODEL, 1.0) == 0.0
    assert mixing_angle(DEFAULT_MODEL, 0.0) == pytest.approx(math.pi / 4)
