"""Two-state interpolated Hamiltonian and its adiabatic frame.

The Hamiltonian family is

    H(s) = f(s) * diag(eps0, eps1) + g(s) * coupling_strength * sigma_x

with monomial schedules f(s) = s**k and g(s) = -(1 - s)**m. Units are
hbar = 1 and every quantity is dimensionless.

The instantaneous eigenvectors are real. Their signs are fixed by continuity
from s = 1, where the adiabatic basis coincides with the computational basis
|0>, |1>. With the default model the lower state tends to (|0> + |1>)/sqrt(2)
and the upper one to (-|0> + |1>)/sqrt(2) as s -> 0.
"""

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])


@dataclass(frozen=True)
class ModelSpec:
    """Parameters of the interpolated two-level Hamiltonian.

    Attributes:
        eps0: energy of the diabatic level |0>.
        eps1: energy of the diabatic level |1>, must exceed ``eps0``.
        coupling_strength: magnitude of the off-diagonal coupling operator.
        f_exponent: k in f(s) = s**k.
        g_exponent: m in g(s) = -(1 - s)**m.
    """

    eps0: float = -1.0
    eps1: float = 1.0
    coupling_strength: float = 1.0
    f_exponent: int = 4
    g_exponent: int = 4

    def __post_init__(self):
        if not self.eps0 < self.eps1:
            raise DomainError(f"need eps0 < eps1, got {self.eps0} >= {self.eps1}")
        for name in ("f_exponent", "g_exponent"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise DomainError(f"{name} must be a positive integer, got {value!r}")
        if not np.isfinite(self.coupling_strength):
            raise DomainError("coupling_strength must be finite")

    def f(self, s):
        return np.power(s, self.f_exponent)

    def g(self, s):
        return -np.power(1.0 - s, self.g_exponent)

    def df(self, s):
        k = self.f_exponent
        return k * np.power(s, k - 1)

    def dg(self, s):
        m = self.g_exponent
        return m * np.power(1.0 - s, m - 1)

    @property
    def h0(self):
        return np.diag([self.eps0, self.eps1]).astype(float)

    @property
    def hw(self):
        return self.coupling_strength * SIGMA_X


DEFAULT_MODEL = ModelSpec()


@dataclass(frozen=True)
class AdiabaticFrame:
    """Instantaneous eigensystem of H(s).

    ``eigvec_lower`` = (cos θ, sin θ) and ``eigvec_upper`` = (-sin θ, cos θ)
    with θ = ``mixing_angle``; the components are the expansion coefficients
    of the adiabatic states in the computational basis.
    """

    s: float
    e_lower: float
    e_upper: float
    mixing_angle: float
    eigvec_lower: np.ndarray
    eigvec_upper: np.ndarray


def _check_s(s):
    arr = np.asarray(s, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError(f"s must lie in [0, 1], got {s!r}")
    return arr


def _parts(model, s):
    """Return (mean, half_split, off, d_half_split, d_off) at s.

    H(s) = mean * I + [[-half_split, off], [off, half_split]].
    """
    f = model.f(s)
    half_split = 0.5 * (model.eps1 - model.eps0) * f
    off = model.coupling_strength * model.g(s)
    mean = 0.5 * (model.eps0 + model.eps1) * f
    d_half_split = 0.5 * (model.eps1 - model.eps0) * model.df(s)
    d_off = model.coupling_strength * model.dg(s)
    return mean, half_split, off, d_half_split, d_off


def hamiltonian_at(model: ModelSpec, s: float) -> np.ndarray:
    """Real symmetric 2x2 Hamiltonian f(s) H0 + g(s) HW."""
    s = float(_check_s(s))
    return model.f(s) * model.h0 + model.g(s) * model.hw


def hamiltonian_derivative(model: ModelSpec, s: float) -> np.ndarray:
    """dH/ds = f'(s) H0 + g'(s) HW."""
    s = float(_check_s(s))
    return model.df(s) * model.h0 + model.dg(s) * model.hw


def energies(model: ModelSpec, s):
    """Adiabatic energies (E0, E1) for scalar or array ``s``."""
    s = _check_s(s)
    mean, half_split, off, _, _ = _parts(model, s)
    r = np.hypot(half_split, off)
    return mean - r, mean + r


def mixing_angle(model: ModelSpec, s):
    """Angle θ(s) of the lower eigenvector, θ(1) = 0.

    θ = atan2(-off, half_split) / 2. Since half_split >= 0 on [0, 1] the
    angle stays on one branch and no unwrapping is needed.
    """
    s = _check_s(s)
    _, half_split, off, _, _ = _parts(model, s)
    return 0.5 * np.arctan2(-off, half_split)


def eigensystem(model: ModelSpec, s: float) -> AdiabaticFrame:
    s = float(_check_s(s))
    e0, e1 = energies(model, s)
    theta = float(mixing_angle(model, s))
    c, sn = np.cos(theta), np.sin(theta)
    return AdiabaticFrame(
        s=s,
        e_lower=float(e0),
        e_upper=float(e1),
        mixing_angle=theta,
        eigvec_lower=np.array([c, sn]),
        eigvec_upper=np.array([-sn, c]),
    )


def coupling_w(model: ModelSpec, s):
    """Radial coupling W(s) = <phi0(s)| d/ds |phi1(s)>.

    In terms of the mixing angle W = -dθ/ds. For the default model this is
    2 s^3 (1-s)^3 / (s^8 + (1-s)^8), peaking at 4 for s = 1/2.
    Accepts scalars or arrays.
    """
    s = _check_s(s)
    _, half_split, off, d_half_split, d_off = _parts(model, s)
    denom = half_split**2 + off**2
    num = 0.5 * (half_split * d_off - off * d_half_split)
    with np.errstate(invalid="ignore", divide="ignore"):
        w = np.where(denom > 0.0, num / np.where(denom > 0.0, denom, 1.0), 0.0)
    return w if w.ndim else float(w)


def coupling_surface(model: ModelSpec) -> float:
    """|∫_0^1 W(s) ds| evaluated by adaptive quadrature.

    By construction this equals |θ(1) - θ(0)|, which is π/4 whenever the
    coupling is nonzero.
    """
    # the coupling peaks where |f| and |g| are comparable; tell quad where
    # the peak sits so narrow spikes (weak coupling) are not missed
    c = abs(model.coupling_strength)
    if c == 0.0:
        return 0.0
    split = 0.5 * (model.eps1 - model.eps0)
    peak_guess = _peak_location(model, split, c)
    value, _ = integrate.quad(
        lambda x: coupling_w(model, x),
        0.0,
        1.0,
        points=[peak_guess],
        epsabs=1e-13,
        epsrel=1e-13,
        limit=400,
    )
    return abs(value)


def _peak_location(model, split, c):
    grid = np.linspace(0.0, 1.0, 4001)
    h = split * model.f(grid) - c * (-model.g(grid))
    idx = int(np.argmin(np.abs(h)))
    return float(grid[idx])


def coupling_surface_closed_form(model: ModelSpec) -> float:
    return float(abs(mixing_angle(model, 1.0) - mixing_angle(model, 0.0)))
