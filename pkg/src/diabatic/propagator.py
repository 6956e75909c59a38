"""Integration of the two-state coupled amplitude equations.

The amplitudes a0, a1 in the adiabatic basis obey, with z as the evolution
variable,

    da0/dz = -i a0 E0(s)/v - a1 (z/s) W(s)
    da1/dz = -i a1 E1(s)/v + a0 (z/s) W(s)

from z_min to z_max. Both halves of the path are integrated separately so
that z = 0 (where ds/dz jumps when b = 0) is always a mesh point. Because the
adiabatic and computational bases coincide at s = 1, the assembled operator
is directly the gate in the computational basis.
"""

from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import solve_ivp

from . import _kernels
from .errors import AccuracyError, DomainError, IntegrationError
from .model import DEFAULT_MODEL, ModelSpec
from .trajectory import Trajectory, make_trajectory


@dataclass(frozen=True)
class IntegratorSettings:
    """Integrator knobs.

    ``method`` is ``"dp54"`` (adaptive Dormand-Prince 5(4)) or ``"rk4"``
    (classical fixed step, ``fixed_steps`` steps per half passage).
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_steps: int = 10_000_000
    method: str = "dp54"
    fixed_steps: int = 20_000
    check_norm: bool = True

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("integrator tolerances must be positive")
        if self.method not in ("dp54", "rk4"):
            raise DomainError(f"unknown integration method {self.method!r}")
        if self.max_steps < 1 or self.fixed_steps < 1:
            raise DomainError("step budgets must be positive")

    def with_(self, **kw):
        return replace(self, **kw)


DEFAULT_SETTINGS = IntegratorSettings()


@dataclass
class PropagationResult:
    final_amplitudes: np.ndarray
    unitary: np.ndarray
    norm_drift: float
    steps_taken: int
    unitarity_defect: float
    rejected_steps: int = 0


def _params(model: ModelSpec, traj: Trajectory) -> np.ndarray:
    return np.array(
        [
            model.eps0,
            model.eps1,
            model.coupling_strength,
            float(model.f_exponent),
            float(model.g_exponent),
            traj.v,
            traj.b,
            1.0,
        ]
    )


def unitarity_defect(u: np.ndarray) -> float:
    n = u.shape[0]
    return float(np.max(np.abs(u.conj().T @ u - np.eye(n))))


def _integrate(model, traj, settings, y0, z_stop=None):
    """Carry the matrix y0 from z_min to z_stop (default z_max).

    Returns (y, steps, rejected, drift).
    """
    p = _params(model, traj)
    z_stop = traj.z_max if z_stop is None else z_stop
    segments = [(traj.z_min, min(0.0, z_stop))]
    if z_stop > 0.0:
        segments.append((0.0, z_stop))
    y = np.ascontiguousarray(y0, dtype=np.complex128)
    steps = rejected = 0
    drift = 0.0
    for lo, hi in segments:
        if hi <= lo:
            continue
        if settings.method == "rk4":
            y, d = _kernels.rk4_segment(p, lo, hi, y, settings.fixed_steps)
            n, r = settings.fixed_steps, 0
            status = _kernels.STATUS_OK
        else:
            budget = settings.max_steps - steps
            # a step of a fraction of the local oscillation period is a
            # reasonable first guess; the controller fixes the rest
            h0 = min(hi - lo, 0.05 * traj.v)
            y, n, r, d, status, z_reached = _kernels.dp54_segment(
                p, lo, hi, y, settings.rel_tol, settings.abs_tol, budget, h0
            )
        steps += n
        rejected += r
        drift = max(drift, d)
        if status != _kernels.STATUS_OK:
            partial = {"y": y, "z": z_reached, "steps": steps, "norm_drift": drift}
            reason = "step budget exhausted" if status == _kernels.STATUS_MAX_STEPS else "step size underflow"
            raise IntegrationError(f"{reason} at z={z_reached:.6g} after {steps} steps", partial=partial)
    return y, steps, rejected, drift


def _complete_basis(initial):
    a0, a1 = initial
    return np.array([[a0, -np.conj(a1)], [a1, np.conj(a0)]], dtype=np.complex128)


def propagate(
    model: ModelSpec,
    traj: Trajectory,
    settings: IntegratorSettings = DEFAULT_SETTINGS,
    initial=(1.0, 0.0),
) -> PropagationResult:
    """Propagate an initial amplitude pair across the whole passage.

    The initial state is carried together with its orthogonal partner, so
    the full evolution operator comes out of the same pass.
    """
    initial = np.asarray(initial, dtype=np.complex128)
    if initial.shape != (2,):
        raise DomainError("initial state must be an amplitude pair")
    norm = float(np.vdot(initial, initial).real)
    if abs(norm - 1.0) > 1e-12:
        raise DomainError(f"initial state not normalised (|a|^2 = {norm!r})")
    y0 = _complete_basis(initial)
    y, steps, rejected, drift = _integrate(model, traj, settings, y0)
    u = y @ y0.conj().T
    result = PropagationResult(
        final_amplitudes=y[:, 0].copy(),
        unitary=u,
        norm_drift=float(drift),
        steps_taken=int(steps),
        unitarity_defect=unitarity_defect(u),
        rejected_steps=int(rejected),
    )
    if settings.check_norm and settings.method == "dp54" and drift > 100.0 * settings.rel_tol:
        raise AccuracyError(
            f"norm drift {drift:.3g} exceeds 100*rel_tol={100 * settings.rel_tol:.3g}", achieved=drift
        )
    return result


def full_evolution_operator(
    model: ModelSpec, traj: Trajectory, settings: IntegratorSettings = DEFAULT_SETTINGS
) -> np.ndarray:
    return propagate(model, traj, settings).unitary


def evolution_operator(v, b, model: ModelSpec = DEFAULT_MODEL, settings: IntegratorSettings = DEFAULT_SETTINGS):
    """Convenience wrapper: U(T, -T) for speed ``v`` and impact parameter ``b``."""
    return full_evolution_operator(model, make_trajectory(v, b), settings)


def half_passage_p(
    model: ModelSpec, traj: Trajectory, settings: IntegratorSettings = DEFAULT_SETTINGS
) -> float:
    """Population moved to the upper adiabatic state by the incoming half.

    Starts in the lower state at z_min and stops at the turning point z = 0.
    """
    y, _, _, _ = _integrate(model, traj, settings, np.eye(2, dtype=np.complex128), z_stop=0.0)
    return float(abs(y[1, 0]) ** 2)


def direct_evolution_operator(hamiltonian, traj: Trajectory, rtol: float = 1e-11, atol: float = 1e-13) -> np.ndarray:
    """U(T, -T) from i dψ/dz = H(s(z)) ψ / v in the computational basis.

    ``hamiltonian`` maps s to a Hermitian matrix of any size. This route
    never touches the adiabatic frame, so it serves as an independent check
    of :func:`propagate` and handles Hamiltonians outside the monomial
    family (for example ones with crossing diabatic levels).
    """
    n = np.asarray(hamiltonian(1.0)).shape[0]
    v, b = traj.v, traj.b

    def rhs(z, y):
        s = min(float(np.hypot(z, b)), 1.0)
        psi = y.reshape(n, n)
        return (-1j / v * (np.asarray(hamiltonian(s)) @ psi)).ravel()

    y = np.eye(n, dtype=np.complex128).ravel()
    for lo, hi in ((traj.z_min, 0.0), (0.0, traj.z_max)):
        sol = solve_ivp(rhs, (lo, hi), y, method="DOP853", rtol=rtol, atol=atol)
        if not sol.success:
            raise IntegrationError(f"direct propagation failed: {sol.message}")
        y = sol.y[:, -1]
    return y.reshape(n, n)
