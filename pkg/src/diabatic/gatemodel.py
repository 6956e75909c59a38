"""Symmetric-passage evolution operator, gate-error metrics, error scaling.

A symmetric passage through an avoided crossing produces

    U = [[(1-p) e^{2iα00} + p e^{2iα01},   -2i sqrt(p(1-p)) sin(α00-α01)],
         [-2i sqrt(p(1-p)) sin(α00-α01),    conj(U00)                   ]]

with p the single-passage transition probability and α00, α01 the phases
accumulated along the two interfering paths.
"""

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import DomainError, ScalingFitError
from .model import ModelSpec
from .propagator import DEFAULT_SETTINGS, IntegratorSettings, full_evolution_operator, half_passage_p
from .trajectory import make_trajectory

FORM_MISMATCH_RESIDUAL = 0.05
POLISH_P_RESIDUAL = 1e-6


@dataclass(frozen=True)
class ZhuNakamuraForm:
    p: float
    alpha00: float
    alpha01: float
    fit_residual: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise DomainError(f"p must lie in [0, 1], got {self.p}")

    @property
    def phase_difference(self) -> float:
        return self.alpha00 - self.alpha01


def zn_unitary(form: ZhuNakamuraForm) -> np.ndarray:
    p, a0, a1 = form.p, form.alpha00, form.alpha01
    u00 = (1.0 - p) * np.exp(2j * a0) + p * np.exp(2j * a1)
    u01 = -2j * math.sqrt((1.0 - p) * p) * math.sin(a0 - a1)
    return np.array([[u00, u01], [u01, np.conj(u00)]])


def transition_probability(form: ZhuNakamuraForm) -> float:
    """|0> -> |1> probability 4 p (1-p) sin^2(α00 - α01)."""
    return 4.0 * (1.0 - form.p) * form.p * math.sin(form.alpha00 - form.alpha01) ** 2


def wrap_phase(x: float) -> float:
    """Map an angle into (-π, π]."""
    y = math.remainder(x, 2.0 * math.pi)
    return math.pi if y == -math.pi else y


def phase_distance(form: ZhuNakamuraForm, alpha00: float, alpha01: float) -> float:
    """Largest phase error against (alpha00, alpha01), modulo exact symmetries.

    Shifting both phases by π leaves the operator unchanged, so distances
    are taken over that shift as well as over multiples of 2π.
    """
    best = math.inf
    for shift in (0.0, math.pi):
        d0 = abs(wrap_phase(form.alpha00 + shift - alpha00))
        d1 = abs(wrap_phase(form.alpha01 + shift - alpha01))
        best = min(best, max(d0, d1))
    return best


def _canonical(p, a0, a1, residual):
    # fold the joint π shift so that alpha00 lands in (-π/2, π/2]
    a0 = wrap_phase(a0)
    a1 = wrap_phase(a1)
    if a0 <= -math.pi / 2 or a0 > math.pi / 2:
        a0 = wrap_phase(a0 + math.pi)
        a1 = wrap_phase(a1 + math.pi)
    return ZhuNakamuraForm(p=float(p), alpha00=a0, alpha01=a1, fit_residual=float(residual))


def _closed_form_phases(u, p, branch):
    """α00, α01 reproducing U exactly at fixed p, or None if infeasible."""
    k = 2.0 * math.sqrt(p * (1.0 - p))
    # U01 = -i k sin Δ, so sin Δ = Im(i U01)/k... written out:
    off = 0.5 * (u[0, 1] + u[1, 0])
    if k == 0.0:
        return None
    sin_d = -off.imag / k
    if abs(sin_d) > 1.0 + 1e-12:
        return None
    sin_d = max(-1.0, min(1.0, sin_d))
    cos_d = math.sqrt(max(0.0, 1.0 - sin_d * sin_d))
    if branch == "obtuse":
        cos_d = -cos_d
    delta = math.atan2(sin_d, cos_d)
    diag = 0.5 * (u[0, 0] + np.conj(u[1, 1]))
    bracket = complex(cos_d, (1.0 - 2.0 * p) * sin_d)
    sigma = np.angle(diag) - np.angle(bracket)
    return 0.5 * (sigma + delta), 0.5 * (sigma - delta)


def _residual(u, p, a0, a1):
    return float(np.max(np.abs(zn_unitary(ZhuNakamuraForm(min(max(p, 0.0), 1.0), a0, a1)) - u)))


def fit_zn_form(u: np.ndarray, p_init: float, branch: str = "obtuse") -> ZhuNakamuraForm:
    """Recover (p, α00, α01) from a 2x2 unitary.

    A symmetric special-unitary matrix has two real degrees of freedom while
    the form has three, so p is taken from ``p_init`` (projected onto the
    feasible interval p(1-p) >= |U01|^2/4 when needed) and the phases are
    solved in closed form. ``branch`` picks the sign of cos(α00 - α01):
    ``"obtuse"`` (cos <= 0) or ``"acute"``. A least-squares polish of the
    phases follows, and of p as well when the residual stays above 1e-6
    (U not of the symmetric-passage shape); if the final residual exceeds
    0.05 a RuntimeWarning is emitted.
    """
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (2, 2):
        raise DomainError("expected a 2x2 matrix")
    if np.max(np.abs(u.conj().T @ u - np.eye(2))) > 1e-6:
        raise DomainError("matrix is not unitary within 1e-6")
    if branch not in ("obtuse", "acute"):
        raise DomainError(f"unknown branch {branch!r}")

    off = abs(0.5 * (u[0, 1] + u[1, 0]))
    p = min(max(float(p_init), 0.0), 1.0)
    q = min(off * off, 1.0)
    if p * (1.0 - p) < q / 4.0:
        root = 0.5 * math.sqrt(max(0.0, 1.0 - q))
        p = 0.5 - root if p < 0.5 else 0.5 + root
    p = min(max(p, 1e-15), 1.0 - 1e-15) if q > 0.0 else p

    phases = _closed_form_phases(u, p, branch) if 0.0 < p < 1.0 else None
    if phases is None:
        a = 0.5 * float(np.angle(u[0, 0]))
        phases = (a, a - math.asin(min(1.0, off)))
    a0, a1 = phases
    res = _residual(u, p, a0, a1)

    if res > 1e-12:
        # phases first at the pinned p; p is released only if that leaves a
        # visible misfit, since for a symmetric U it is a free direction
        def residuals(x, p_fixed=None):
            pp = p_fixed if p_fixed is not None else min(max(x[0], 0.0), 1.0)
            ph = x if p_fixed is not None else x[1:]
            d = zn_unitary(ZhuNakamuraForm(pp, ph[0], ph[1])) - u
            return np.concatenate([d.real.ravel(), d.imag.ravel()])

        tol = dict(xtol=1e-15, ftol=1e-15, gtol=1e-15)
        sol = optimize.least_squares(residuals, [a0, a1], kwargs={"p_fixed": p}, **tol)
        cand = _residual(u, p, *sol.x)
        if cand < res:
            a0, a1 = sol.x
            res = cand
        if res > POLISH_P_RESIDUAL:
            sol = optimize.least_squares(
                residuals, [p, a0, a1], bounds=([0.0, -np.inf, -np.inf], [1.0, np.inf, np.inf]), **tol
            )
            cand = _residual(u, *sol.x)
            if cand < res:
                p, a0, a1 = sol.x
                res = cand
    if res > FORM_MISMATCH_RESIDUAL:
        warnings.warn(
            f"unitary is not of symmetric-passage shape (fit residual {res:.3g})",
            RuntimeWarning,
            stacklevel=2,
        )
    return _canonical(p, a0, a1, res)


@dataclass(frozen=True)
class GateErrorReport:
    """Distance of an achieved gate U_a from a target U_t.

    With D = U_a - U_t and P = D†D: ``trace_bound`` is tr P, ``d_max`` the
    largest eigenvalue of P (an upper bound on the worst-case error
    probability), ``phase_invariant_infidelity`` is 1 - |tr(U_a† U_t)|/dim.
    """

    trace_bound: float
    d_max: float
    phase_invariant_infidelity: float


def error_operator(u_a, u_t) -> np.ndarray:
    d = np.asarray(u_a) - np.asarray(u_t)
    return d.conj().T @ d


def _largest_eigenvalue(p: np.ndarray) -> float:
    if p.shape == (2, 2):
        a, d = p[0, 0].real, p[1, 1].real
        b = abs(p[0, 1])
        half = 0.5 * (a - d)
        return 0.5 * (a + d) + math.hypot(half, b)
    return float(np.linalg.eigvalsh(p)[-1])


def gate_error(u_a, u_t) -> GateErrorReport:
    u_a = np.asarray(u_a, dtype=np.complex128)
    u_t = np.asarray(u_t, dtype=np.complex128)
    if u_a.shape != u_t.shape or u_a.ndim != 2 or u_a.shape[0] != u_a.shape[1]:
        raise DomainError(f"incompatible gate shapes {u_a.shape} and {u_t.shape}")
    p = error_operator(u_a, u_t)
    dim = u_a.shape[0]
    trace = float(np.trace(p).real)
    dm = max(_largest_eigenvalue(p), 0.0)
    # the eigenvalue formula can overshoot the trace by rounding when P is
    # (nearly) proportional to the identity
    dm = float(min(dm, trace))
    overlap = abs(np.trace(u_a.conj().T @ u_t)) / dim
    return GateErrorReport(trace_bound=trace, d_max=dm, phase_invariant_infidelity=max(float(1.0 - overlap), 0.0))


def state_error_probability(u_a, u_t, psi) -> float:
    """Squared norm of the part of (U_a - U_t)|psi> orthogonal to U_t|psi>."""
    psi = np.asarray(psi, dtype=np.complex128)
    psi = psi / np.linalg.norm(psi)
    target = np.asarray(u_t) @ psi
    xi = np.asarray(u_a) @ psi - target
    perp = xi - np.vdot(target, xi) * target
    return float(np.vdot(perp, perp).real)


@dataclass(frozen=True)
class PerturbationCoefficients:
    """Linear response of (p, α00, α01) to an error ε on one parameter."""

    c_p: float
    c_0: float
    c_1: float
    axis: str
    step: float = 0.0


@dataclass
class ScalingFit:
    """Power-law fit d_max ≈ prefactor * ε**exponent."""

    prefactor: float
    exponent: float
    r_squared: float
    eps: np.ndarray
    d_max: np.ndarray
    baseline: float
    coefficients: PerturbationCoefficients | None = None
    predicted_prefactor: dict = field(default_factory=dict)


def _perturbed(v0, b0, axis, eps):
    if axis == "v":
        return v0 + eps, b0
    if axis == "b":
        return v0, b0 + eps
    raise DomainError(f"axis must be 'v' or 'b', got {axis!r}")


def _map(fn, items, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def zn_at(model, v, b, settings=DEFAULT_SETTINGS, branch="obtuse"):
    """Fit the symmetric-passage form at (v, b), seeding p with the half-passage population."""
    traj = make_trajectory(v, b)
    u = full_evolution_operator(model, traj, settings)
    p = half_passage_p(model, traj, settings)
    return fit_zn_form(u, p, branch=branch)


def _joint_phase_step(d0, d1):
    # canonicalisation may fold both phases by π between neighbouring
    # points; undo that before differencing
    options = [(wrap_phase(d0 + k), wrap_phase(d1 + k)) for k in (0.0, math.pi)]
    return min(options, key=lambda d: max(abs(d[0]), abs(d[1])))


def perturbation_coefficients(
    model: ModelSpec,
    v0: float,
    b0: float,
    axis: str = "v",
    step: float = 1e-4,
    settings: IntegratorSettings = DEFAULT_SETTINGS,
) -> PerturbationCoefficients:
    """Central differences of (p, α00, α01) along ``axis``."""
    lo = zn_at(model, *_perturbed(v0, b0, axis, -step), settings)
    hi = zn_at(model, *_perturbed(v0, b0, axis, step), settings)
    d0, d1 = _joint_phase_step(hi.alpha00 - lo.alpha00, hi.alpha01 - lo.alpha01)
    return PerturbationCoefficients(
        c_p=(hi.p - lo.p) / (2 * step),
        c_0=d0 / (2 * step),
        c_1=d1 / (2 * step),
        axis=axis,
        step=step,
    )


def predicted_prefactors(c: PerturbationCoefficients, p: float) -> dict:
    """ε² coefficients of tr P predicted from the linear-response constants.

    The expressions hold for the NOT, Z and T targets respectively. For a
    pair of special unitaries P is proportional to the identity, so the
    matching d_max coefficient is half of each value.
    """
    return {
        "not": 2.0 * (c.c_0 - c.c_1) ** 2 + 8.0 * c.c_p**2,
        "z": 8.0 * (c.c_p**2 - p * (c.c_0**2 - c.c_1**2) + c.c_0**2),
        "t": 8.0 * c.c_p**2 + 4.0 * c.c_0**2 + 4.0 * c.c_1**2,
    }


def default_eps_window(model, v0, b0, target, axis="v", settings=DEFAULT_SETTINGS, n=7):
    """Log-spaced ε values where the quadratic term dominates the floor.

    The lower end satisfies coefficient * ε² >= 10 * baseline; the window
    spans a factor of four.
    """
    base = gate_error(full_evolution_operator(model, make_trajectory(v0, b0), settings), target).d_max
    ref = v0 if axis == "v" else max(v0, 0.1)
    probe = 2e-3 * ref
    vals = []
    for sign in (1.0, -1.0):
        u = full_evolution_operator(model, make_trajectory(*_perturbed(v0, b0, axis, sign * probe)), settings)
        vals.append(gate_error(u, target).d_max)
    coeff = max((0.5 * sum(vals) - base) / probe**2, 1e-300)
    lo = max(math.sqrt(10.0 * base / coeff), probe)
    return np.geomspace(lo, 4.0 * lo, n)


def error_scaling(
    model: ModelSpec,
    v0: float,
    b0: float,
    target: np.ndarray,
    axis: str = "v",
    eps_list=None,
    settings: IntegratorSettings = DEFAULT_SETTINGS,
    with_coefficients: bool = True,
    workers: int = 1,
    min_r_squared: float = 0.99,
) -> ScalingFit:
    """Fit d_max against parameter error ε on a log-log scale.

    Each ε is applied in both directions and the two d_max values are
    averaged, which cancels the odd-order terms; the unperturbed d_max
    (the gate's error floor) is then subtracted. What remains is the ε²
    behaviour of the expansion about the working point.
    """
    target = np.asarray(target, dtype=np.complex128)
    if eps_list is None:
        eps_list = default_eps_window(model, v0, b0, target, axis, settings)
    eps = np.asarray(eps_list, dtype=float)
    if np.any(eps <= 0):
        raise DomainError("eps values must be positive")
    base = gate_error(full_evolution_operator(model, make_trajectory(v0, b0), settings), target).d_max

    def one(x):
        sign, e = x
        u = full_evolution_operator(model, make_trajectory(*_perturbed(v0, b0, axis, sign * e)), settings)
        return gate_error(u, target).d_max

    jobs = [(s, e) for e in eps for s in (1.0, -1.0)]
    vals = np.array(_map(one, jobs, workers)).reshape(len(eps), 2)
    excess = vals.mean(axis=1) - base
    if np.any(excess <= 0):
        raise ScalingFitError("perturbed error does not exceed the floor; increase eps", achieved=float(excess.min()))
    x, y = np.log(eps), np.log(excess)
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    fit = ScalingFit(
        prefactor=float(math.exp(intercept)),
        exponent=float(slope),
        r_squared=r2,
        eps=eps,
        d_max=vals.mean(axis=1),
        baseline=base,
    )
    if r2 < min_r_squared:
        raise ScalingFitError(f"power-law fit R^2={r2:.4f} below {min_r_squared}", achieved=r2)
    if with_coefficients:
        step = float(eps[0])
        c = perturbation_coefficients(model, v0, b0, axis, step, settings)
        fit.coefficients = c
        p0 = zn_at(model, v0, b0, settings).p
        fit.predicted_prefactor = predicted_prefactors(c, p0)
    return fit

