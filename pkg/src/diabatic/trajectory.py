"""Straight-line "collision" geometry and first-order transition diagnostics.

The collision parameter follows s(z) = sqrt(z**2 + b**2) for z between
-sqrt(1 - b**2) and +sqrt(1 - b**2), so s runs 1 -> b -> 1. The speed v
converts z into time through z = v t.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from . import _kernels
from . import model as _model
from .errors import DegenerateTrajectoryError, DomainError, NumericalError


@dataclass(frozen=True)
class Trajectory:
    v: float
    b: float

    @property
    def z_max(self) -> float:
        return math.sqrt(1.0 - self.b * self.b)

    @property
    def z_min(self) -> float:
        return -self.z_max

    @property
    def half_time(self) -> float:
        """T such that the passage lasts from -T to T."""
        return self.z_max / self.v

    @property
    def total_time(self) -> float:
        return 2.0 * self.half_time


def make_trajectory(v: float, b: float) -> Trajectory:
    v = float(v)
    b = float(b)
    if not np.isfinite(v) or v <= 0.0:
        raise DomainError(f"speed must be positive, got {v}")
    if not np.isfinite(b) or b < 0.0:
        raise DomainError(f"impact parameter must be >= 0, got {b}")
    if b >= 1.0:
        raise DegenerateTrajectoryError(f"impact parameter b={b} >= 1 gives a zero-length path")
    return Trajectory(v=v, b=b)


def s_of_z(b, z):
    """Vectorised s(z) and ds/dz with ds/dz = 0 at the b = 0 origin."""
    z = np.asarray(z, dtype=float)
    s = np.hypot(z, b)
    with np.errstate(invalid="ignore", divide="ignore"):
        ds = np.where(s > 0.0, z / np.where(s > 0.0, s, 1.0), 0.0)
    return s, ds


def geometry(traj: Trajectory, z: float):
    """Return (s, ds/dz) at position z along the trajectory."""
    z = float(z)
    zm = traj.z_max
    if z < -zm or z > zm:
        raise DomainError(f"z={z} outside [{-zm}, {zm}]")
    s, ds = s_of_z(traj.b, z)
    # rounding in hypot may nudge s a hair above 1 at the endpoints
    return min(float(s), 1.0), float(ds)


def _radial_drive(model, b, z):
    s, ds = s_of_z(b, z)
    return _model.coupling_w(model, np.minimum(s, 1.0)) * ds


def _model_params(model, traj, feedback):
    return np.array(
        [
            model.eps0,
            model.eps1,
            model.coupling_strength,
            float(model.f_exponent),
            float(model.g_exponent),
            traj.v,
            traj.b,
            feedback,
        ]
    )


def eta(model: _model.ModelSpec, traj: Trajectory, rtol: float = 1e-10, atol: float = 1e-12) -> float:
    """First-order estimate of the |0> -> |1> transition probability.

    |∫ W(s) (z/s) exp(i/v ∫_{z_min}^z (E1 - E0) dz') dz|^2

    Evaluated by integrating the amplitude equations with the back-coupling
    onto the lower state switched off: the lower amplitude then carries the
    phase exp(-i/v ∫E0), and the upper one accumulates the integral above
    with an adaptive error-controlled step.
    """
    p = _model_params(model, traj, 0.0)
    y = np.eye(2, dtype=np.complex128)
    for lo, hi in ((traj.z_min, 0.0), (0.0, traj.z_max)):
        if hi <= lo:
            continue
        y, steps, _, _, status, z = _kernels.dp54_segment(p, lo, hi, y, rtol, atol, 10_000_000, min(hi - lo, 0.05 * traj.v))
        if status != _kernels.STATUS_OK:
            raise NumericalError(f"eta integration stopped at z={z:.6g} after {steps} steps", achieved=rtol)
    return float(abs(y[1, 0]) ** 2)


def eta_quadrature(model: _model.ModelSpec, traj: Trajectory, rtol: float = 1e-10, atol: float = 1e-12) -> float:
    """Same quantity as :func:`eta`, carrying (phase, Re I, Im I) through scipy's DOP853."""
    v, b = traj.v, traj.b
    args = (model.eps0, model.eps1, model.coupling_strength, float(model.f_exponent), float(model.g_exponent))

    def rhs(z, y):
        s = min(math.hypot(z, b), 1.0)
        ds = z / s if s > 0.0 else 0.0
        e0, e1, w = _kernels.terms(*args, s)
        amp = w * ds
        return [(e1 - e0) / v, amp * math.cos(y[0]), amp * math.sin(y[0])]

    y = np.zeros(3)
    for lo, hi in ((traj.z_min, 0.0), (0.0, traj.z_max)):
        if hi <= lo:
            continue
        sol = integrate.solve_ivp(rhs, (lo, hi), y, method="DOP853", rtol=rtol, atol=atol)
        if not sol.success:
            raise NumericalError(f"eta quadrature failed: {sol.message}", achieved=rtol)
        y = sol.y[:, -1]
    return float(y[1] ** 2 + y[2] ** 2)


@dataclass(frozen=True)
class AdiabaticityReport:
    delta_e_min: float
    d_max: float
    epsilon_ratio: float
    massey_xi: float
    interaction_length_a: float

    @property
    def regime(self) -> str:
        # xi well above one means the phase winds many times across the
        # interaction region
        return "adiabatic" if self.massey_xi >= ADIABATIC_XI else "non-adiabatic"


ADIABATIC_XI = 1.0


def _gap_minimum(model, b):
    """Minimum of E1 - E0 over s in [b, 1]."""
    grid = np.linspace(b, 1.0, 2001)
    e0, e1 = _model.energies(model, grid)
    gap = e1 - e0
    i = int(np.argmin(gap))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    best = float(gap[i])
    if hi > lo:
        res = optimize.minimize_scalar(
            lambda x: float(np.subtract(*_model.energies(model, x)[::-1])),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-12},
        )
        best = min(best, float(res.fun))
    return best


def _coupling_element(model, s):
    """|<phi0| dH/ds |phi1>| computed from the matrix elements directly."""
    frame = _model.eigensystem(model, s)
    dh = _model.hamiltonian_derivative(model, s)
    return abs(frame.eigvec_lower @ dh @ frame.eigvec_upper)


def interaction_length(model: _model.ModelSpec, b: float, n: int = 20001) -> float:
    """Total z-length where |W(s(z)) ds/dz| is at least half its maximum.

    For b = 0 the drive has two lobes (incoming and outgoing passage) and
    both contribute.
    """
    zm = math.sqrt(1.0 - b * b)
    z = np.linspace(-zm, zm, n)
    drive = np.abs(_radial_drive(model, b, z))
    peak = drive.max()
    if peak == 0.0:
        return 0.0
    above = drive >= 0.5 * peak
    # edges by linear interpolation of the crossings
    length = 0.0
    dz = z[1] - z[0]
    for i in range(n - 1):
        a0, a1 = above[i], above[i + 1]
        if a0 and a1:
            length += dz
        elif a0 != a1:
            d0, d1 = drive[i] - 0.5 * peak, drive[i + 1] - 0.5 * peak
            frac = d0 / (d0 - d1)
            length += dz * (1.0 - frac) if a1 else dz * frac
    return float(length)


def adiabaticity(model: _model.ModelSpec, traj: Trajectory, n: int = 4001) -> AdiabaticityReport:
    v, b = traj.v, traj.b
    gap = _gap_minimum(model, b)
    z = np.linspace(traj.z_min, traj.z_max, n)
    s, ds = s_of_z(b, z)
    s = np.minimum(s, 1.0)
    elements = np.array([_coupling_element(model, x) for x in s]) * np.abs(ds) * v
    i = int(np.argmax(elements))
    d_max = float(elements[i])
    # polish the maximum on the neighbouring interval
    lo, hi = z[max(i - 1, 0)], z[min(i + 1, n - 1)]
    if hi > lo:
        def neg(x):
            sx, dsx = s_of_z(b, x)
            return -_coupling_element(model, min(float(sx), 1.0)) * abs(float(dsx)) * v

        res = optimize.minimize_scalar(neg, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        d_max = max(d_max, -float(res.fun))
    a = interaction_length(model, b)
    return AdiabaticityReport(
        delta_e_min=gap,
        d_max=d_max,
        epsilon_ratio=d_max / gap**2 if gap > 0 else math.inf,
        massey_xi=a * gap / v,
        interaction_length_a=a,
    )
