"""Closed-form large-N solution of the Brownian SYK channel.

For ``gamma != 1`` the equal-time Wightman profile is

    G(t) = gamma + (1 - gamma)^2 / (1 - gamma + i g exp((1 - gamma) t))

and at ``gamma = 1`` it degenerates to ``1 - (g^2 t + i g) / (1 + g^2 t^2)``.
Off the diagonal the Wightman function decays as
``exp(-Gamma |t_L - t_R| / 2) G(min(t_L, t_R))`` and the response is its
imaginary part.  Valid for ``|g| << 1``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .model import ModelParams, TimeGrid, derived_rates

CRITICAL_WINDOW = 1e-12
# beyond this exponent the closed form has reached its plateau
_EXP_CUTOFF = 700.0


class Branch(enum.Enum):
    GENERIC = "generic"
    CRITICAL = "critical"


def branch_of(params: ModelParams) -> Branch:
    if abs(params.gamma - 1.0) < CRITICAL_WINDOW:
        return Branch.CRITICAL
    return Branch.GENERIC


@dataclass(frozen=True)
class DiagonalProfile:
    """Equal-time profile ``G(t)`` sampled on a grid."""

    grid: TimeGrid
    t: np.ndarray
    values: np.ndarray
    branch: Branch
    deviation: np.ndarray | None = None

    @property
    def samples(self):
        return list(zip(self.t.tolist(), self.values.tolist()))

    @property
    def response(self) -> np.ndarray:
        return self.values.imag


def _check_times(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(~np.isfinite(t)):
        raise DomainError("times must be finite and non-negative")
    return t


def _scalar_or_array(x, like):
    return x.item() if np.ndim(like) == 0 else x


def cal_g(t, params: ModelParams):
    """Equal-time Wightman profile ``G(t)``; accepts scalars or arrays."""
    t_arr = _check_times(t)
    g, gamma = params.g, params.gamma
    if branch_of(params) is Branch.CRITICAL:
        out = 1.0 - (g * g * t_arr + 1j * g) / (1.0 + g * g * t_arr**2)
        return _scalar_or_array(np.asarray(out, dtype=complex), t)

    a = 1.0 - gamma
    x = a * t_arr
    out = np.empty(np.shape(t_arr), dtype=complex)
    grow = x > 0
    # a > 0: divide through by exp(a t) so nothing overflows
    w = np.exp(-np.minimum(x[grow], _EXP_CUTOFF))
    out[grow] = gamma + a * a * w / (a * w + 1j * g)
    out[grow & (x > _EXP_CUTOFF)] = gamma
    e = np.exp(x[~grow])
    out[~grow] = gamma + a * a / (a + 1j * g * e)
    return _scalar_or_array(out, t)


def deviation(t, params: ModelParams):
    """``1 - G(t)`` in a form free of cancellation near ``G = 1``.

    ``i a g e^{a t} / (a + i g e^{a t})`` with ``a = 1 - gamma``, and
    ``i g / (1 + i g t)`` on the critical branch.
    """
    t_arr = _check_times(t)
    g, gamma = params.g, params.gamma
    if branch_of(params) is Branch.CRITICAL:
        out = 1j * g / (1.0 + 1j * g * t_arr)
        return _scalar_or_array(np.asarray(out, dtype=complex), t)
    a = 1.0 - gamma
    x = a * t_arr
    out = np.empty(np.shape(t_arr), dtype=complex)
    grow = x > 0
    w = np.exp(-np.minimum(x[grow], _EXP_CUTOFF))
    out[grow] = 1j * a * g / (a * w + 1j * g)
    e = np.exp(x[~grow])
    out[~grow] = 1j * a * g * e / (a + 1j * g * e)
    return _scalar_or_array(out, t)


def response_diag(t, params: ModelParams):
    """Equal-time response ``K(t, t) = Im G(t)``.

    Generic branch: ``-g a^2 e^{a t} / (g^2 e^{2 a t} + a^2)`` with
    ``a = 1 - gamma``; critical branch: ``-g / (1 + g^2 t^2)``.
    """
    t_arr = _check_times(t)
    g, gamma = params.g, params.gamma
    if g == 0.0:
        return _scalar_or_array(np.zeros(np.shape(t_arr)), t)
    if branch_of(params) is Branch.CRITICAL:
        out = -g / (1.0 + g * g * t_arr**2)
        return _scalar_or_array(np.asarray(out, dtype=float), t)

    a = 1.0 - gamma
    # y = log(|g| e^{a t}); both forms below are ratios of bounded terms
    y = math.log(abs(g)) + a * t_arr
    out = np.empty(np.shape(t_arr))
    pos = y > 0
    yp = np.minimum(y[pos], _EXP_CUTOFF)
    ep = np.exp(-yp)
    out[pos] = a * a * ep / (1.0 + a * a * ep * ep)
    en = np.exp(np.maximum(y[~pos], -_EXP_CUTOFF))
    out[~pos] = a * a * en / (en * en + a * a)
    out *= -math.copysign(1.0, g)
    return _scalar_or_array(out, t)


def response_offdiag(t_left, t_right, params: ModelParams):
    """Two-time response ``exp(-Gamma |t_L - t_R| / 2) K(min, min)``."""
    tl = _check_times(t_left)
    tr = _check_times(t_right)
    gamma_rate, _ = derived_rates(params)
    decay = np.exp(-0.5 * gamma_rate * np.abs(tl - tr))
    out = decay * response_diag(np.minimum(tl, tr), params)
    if np.ndim(out) == 0:
        return float(out)
    return out


def wightman(t_left, t_right, params: ModelParams):
    tl = _check_times(t_left)
    tr = _check_times(t_right)
    gamma_rate, _ = derived_rates(params)
    out = np.exp(-0.5 * gamma_rate * np.abs(tl - tr)) * cal_g(np.minimum(tl, tr), params)
    if np.ndim(out) == 0:
        return complex(out)
    return out


def kmax_and_tstar(params: ModelParams) -> tuple[float, float]:
    """Peak ``|K|`` along the diagonal and the time at which it occurs.

    Below the scrambling transition the peak ``(1 - gamma)/2`` sits at
    ``t* = ln((1 - gamma)/|g|) / (1 - gamma)``.  Otherwise (``gamma >= 1``
    or ``|g| >= 1 - gamma``) the response decays from ``t = 0``.
    """
    g = params.g
    if g == 0.0:
        raise DomainError("peak response undefined at g = 0")
    a = 1.0 - params.gamma
    if branch_of(params) is Branch.GENERIC and a > 0 and abs(g) < a:
        return 0.5 * a, math.log(a / abs(g)) / a
    return abs(float(response_diag(0.0, params))), 0.0
