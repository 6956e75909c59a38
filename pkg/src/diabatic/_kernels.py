"""Compiled inner loops for the two-state amplitude equations.

The state is the full 2x2 complex matrix Y whose columns are the amplitude
pairs (a0, a1) of the two basis solutions, so one pass yields the whole
evolution operator. The right-hand side is

    dY/dz = M(z) Y,   M = [[-i E0/v, -q], [q, -i E1/v]],   q = (z/s) W(s).
"""

import math

import numpy as np
from numba import njit

# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = 9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
# fifth-order minus embedded fourth-order weights
_E1 = 71.0 / 57600.0
_E3 = -71.0 / 16695.0
_E4 = 71.0 / 1920.0
_E5 = -17253.0 / 339200.0
_E6 = 22.0 / 525.0
_E7 = -1.0 / 40.0

_SAFETY_DIV = 10.0

STATUS_OK = 0
STATUS_MAX_STEPS = 1
STATUS_STEP_UNDERFLOW = 2


@njit(cache=True, nogil=True)
def terms(eps0, eps1, c, k, m, s):
    """(E0, E1, W) of the monomial model at s."""
    f = s**k
    g = -((1.0 - s) ** m)
    df = k * s ** (k - 1)
    dg = m * (1.0 - s) ** (m - 1)
    half = 0.5 * (eps1 - eps0)
    hs = half * f
    off = c * g
    mean = 0.5 * (eps0 + eps1) * f
    r2 = hs * hs + off * off
    r = math.sqrt(r2)
    if r2 > 0.0:
        w = 0.5 * (hs * c * dg - off * half * df) / r2
    else:
        w = 0.0
    return mean - r, mean + r, w


@njit(cache=True, nogil=True)
def _rhs(p, z, y, out):
    # p = (eps0, eps1, c, k, m, v, b, feedback); y, out are 2x2 complex.
    # feedback = 0 drops the a1 -> a0 coupling, leaving the first-order
    # (undepleted lower state) equations
    b = p[6]
    s = math.sqrt(z * z + b * b)
    if s > 1.0:
        s = 1.0
    e0, e1, w = terms(p[0], p[1], p[2], p[3], p[4], s)
    q = z / s * w if s > 0.0 else 0.0
    inv_v = 1.0 / p[5]
    for j in range(2):
        a0 = y[0, j]
        a1 = y[1, j]
        out[0, j] = -1j * e0 * inv_v * a0 - p[7] * q * a1
        out[1, j] = -1j * e1 * inv_v * a1 + q * a0


@njit(cache=True, nogil=True)
def _column_norm_drift(y):
    worst = 0.0
    for j in range(2):
        n = abs(y[0, j]) ** 2 + abs(y[1, j]) ** 2
        d = abs(n - 1.0)
        if d > worst:
            worst = d
    return worst


@njit(cache=True, nogil=True)
def dp54_segment(p, z0, z1, y0, rtol, atol, max_steps, h_init):
    """Adaptive Dormand-Prince 5(4) integration from z0 to z1.

    Returns (y, steps, rejected, norm_drift, status, z_reached). Columns
    of y0 are expected to be normalised for the drift bookkeeping to mean
    anything.
    """
    y = y0.copy()
    k1 = np.empty((2, 2), np.complex128)
    k2 = np.empty_like(k1)
    k3 = np.empty_like(k1)
    k4 = np.empty_like(k1)
    k5 = np.empty_like(k1)
    k6 = np.empty_like(k1)
    k7 = np.empty_like(k1)
    tmp = np.empty_like(k1)
    ynew = np.empty_like(k1)

    length = z1 - z0
    direction = 1.0 if length >= 0.0 else -1.0
    span = abs(length)
    h = min(abs(h_init), span) if h_init != 0.0 else span * 1e-3
    z = z0
    steps = 0
    rejected = 0
    drift = _column_norm_drift(y)
    if span == 0.0:
        return y, 0, 0, drift, STATUS_OK, z

    _rhs(p, z, y, k1)
    while True:
        remaining = abs(z1 - z)
        if remaining <= 1e-15 * span:
            break
        if steps >= max_steps:
            return y, steps, rejected, drift, STATUS_MAX_STEPS, z
        if h > remaining:
            h = remaining
        if h < 1e-14 * span:
            return y, steps, rejected, drift, STATUS_STEP_UNDERFLOW, z
        hd = h * direction

        for i in range(2):
            for j in range(2):
                tmp[i, j] = y[i, j] + hd * _A21 * k1[i, j]
        _rhs(p, z + _C2 * hd, tmp, k2)
        for i in range(2):
            for j in range(2):
                tmp[i, j] = y[i, j] + hd * (_A31 * k1[i, j] + _A32 * k2[i, j])
        _rhs(p, z + _C3 * hd, tmp, k3)
        for i in range(2):
            for j in range(2):
                tmp[i, j] = y[i, j] + hd * (_A41 * k1[i, j] + _A42 * k2[i, j] + _A43 * k3[i, j])
        _rhs(p, z + _C4 * hd, tmp, k4)
        for i in range(2):
            for j in range(2):
                tmp[i, j] = y[i, j] + hd * (
                    _A51 * k1[i, j] + _A52 * k2[i, j] + _A53 * k3[i, j] + _A54 * k4[i, j]
                )
        _rhs(p, z + _C5 * hd, tmp, k5)
        for i in range(2):
            for j in range(2):
                tmp[i, j] = y[i, j] + hd * (
                    _A61 * k1[i, j] + _A62 * k2[i, j] + _A63 * k3[i, j] + _A64 * k4[i, j] + _A65 * k5[i, j]
                )
        z_end = z + hd if h < remaining else z1
        _rhs(p, z_end, tmp, k6)
        for i in range(2):
            for j in range(2):
                ynew[i, j] = y[i, j] + hd * (
                    _B1 * k1[i, j] + _B3 * k3[i, j] + _B4 * k4[i, j] + _B5 * k5[i, j] + _B6 * k6[i, j]
                )
        _rhs(p, z_end, ynew, k7)

        err = 0.0
        for i in range(2):
            for j in range(2):
                e = hd * (
                    _E1 * k1[i, j] + _E3 * k3[i, j] + _E4 * k4[i, j] + _E5 * k5[i, j] + _E6 * k6[i, j] + _E7 * k7[i, j]
                )
                scale = atol + rtol * max(abs(y[i, j]), abs(ynew[i, j]))
                r = abs(e) / scale
                if r > err:
                    err = r
        # max-norm against a tenth of the tolerance keeps the accumulated
        # drift over long (small-v) passages within 100 * rtol
        err *= _SAFETY_DIV

        if err <= 1.0:
            z = z_end
            for i in range(2):
                for j in range(2):
                    y[i, j] = ynew[i, j]
                    k1[i, j] = k7[i, j]
            steps += 1
            d = _column_norm_drift(y)
            if d > drift:
                drift = d
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        else:
            rejected += 1
            fac = max(0.2, 0.9 * err ** -0.2)
        h = h * fac
    return y, steps, rejected, drift, STATUS_OK, z


@njit(cache=True, nogil=True)
def rk4_segment(p, z0, z1, y0, n_steps):
    """Classical fixed-step RK4 with n_steps equal steps from z0 to z1."""
    y = y0.copy()
    k1 = np.empty((2, 2), np.complex128)
    k2 = np.empty_like(k1)
    k3 = np.empty_like(k1)
    k4 = np.empty_like(k1)
    tmp = np.empty_like(k1)
    h = (z1 - z0) / n_steps
    drift = _column_norm_drift(y)
    for n in range(n_steps):
        z = z0 + n * h
        _rhs(p, z, y, k1)
        for i in range(2):
            for j in range(2):
                tmp[i, j] = y[i, j] + 0.5 * h * k1[i, j]
        _rhs(p, z + 0.5 * h, tmp, k2)
        for i in range(2):
            for j in range(2):
                tmp[i, j] = y[i, j] + 0.5 * h * k2[i, j]
        _rhs(p, z + 0.5 * h, tmp, k3)
        z_next = z1 if n == n_steps - 1 else z + h
        for i in range(2):
            for j in range(2):
                tmp[i, j] = y[i, j] + h * k3[i, j]
        _rhs(p, z_next, tmp, k4)
        for i in range(2):
            for j in range(2):
                y[i, j] = y[i, j] + h / 6.0 * (k1[i, j] + 2.0 * k2[i, j] + 2.0 * k3[i, j] + k4[i, j])
        d = _column_norm_drift(y)
        if d > drift:
            drift = d
    return y, drift
