"""Long-time finite-N eigenvalues of the partially transposed channel state.

With phase ``theta = (1 - r) g N / 2`` the two eigenvalues that can turn
negative are

    eps_pm = [A + B cos(theta) +- C sin(theta)] / 8,
    A = 1 - (r - 2) r,  B = (1 - r)^2,  C = r^2 - 1.

``r`` is taken as an explicit input; no mapping to ``(gamma, t)`` is assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import BracketError, DomainError, NoRootError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class FiniteSizeParams:
    r: float
    g: float
    n_fermions: int

    def __post_init__(self):
        if int(self.n_fermions) != self.n_fermions or self.n_fermions < 2 or self.n_fermions % 2:
            raise DomainError(f"n_fermions must be even and >= 2, got {self.n_fermions!r}")
        if not -1.0 <= self.r <= 1.0:
            raise DomainError(f"r must lie in [-1, 1], got {self.r!r}")

    @property
    def theta(self) -> float:
        return (1.0 - self.r) * self.g * self.n_fermions / 2.0


def _coefficients(r: float) -> tuple[float, float, float]:
    return 1.0 - (r - 2.0) * r, (1.0 - r) ** 2, r * r - 1.0


def epsilon_at_phase(r: float, theta):
    a, b, c = _coefficients(r)
    base = a + b * np.cos(theta)
    osc = c * np.sin(theta)
    return (base + osc) / 8.0, (base - osc) / 8.0


def epsilon_pm(fsp: FiniteSizeParams) -> tuple[float, float]:
    plus, minus = epsilon_at_phase(fsp.r, fsp.theta)
    return float(plus), float(minus)


def min_epsilon_over_phase(r: float) -> float:
    """``min over theta and both branches = (A - sqrt(B^2 + C^2)) / 8``."""
    a, b, c = _coefficients(r)
    return (a - math.hypot(b, c)) / 8.0


def _gamma_star_condition(gamma: float) -> float:
    return 1.0 + (2.0 - gamma) * gamma - (1.0 - gamma) * math.sqrt(5.0 + 6.0 * gamma + 5.0 * gamma * gamma)


def gamma_star(tol: float = 1e-12) -> float:
    """Root of ``1 + (2-x)x = (1-x) sqrt(5 + 6x + 5x^2)`` on [0, 1)."""
    if tol < 1e-12:
        raise DomainError("tol must be >= 1e-12")
    lo, hi = 0.0, 1.0
    f_lo, f_hi = _gamma_star_condition(lo), _gamma_star_condition(hi)
    if f_lo * f_hi > 0:
        raise BracketError("gamma* condition does not change sign on [0, 1)")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = _gamma_star_condition(mid)
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def first_zero_phase(r: float) -> float:
    """Smallest ``theta > 0`` with ``min(eps+, eps-) = 0``.

    Each branch is ``A + R cos(theta - phi)`` with ``R = hypot(B, C)``, so
    its zeros are ``phi +- arccos(-A / R)`` modulo ``2 pi``.
    """
    a, b, c = _coefficients(r)
    radius = math.hypot(b, c)
    if radius == 0.0 or a > radius:
        raise NoRootError(f"min(eps+, eps-) stays positive for r={r!r}")
    spread = math.acos(max(-1.0, min(1.0, -a / radius)))
    roots = []
    for sign in (1.0, -1.0):
        phi = math.atan2(sign * c, b)
        for theta in (phi + spread, phi - spread):
            theta = math.fmod(theta, TWO_PI)
            if theta <= 1e-15:
                theta += TWO_PI
            roots.append(theta)
    return min(roots)


def boundary_point(r: float, n_fermions: int) -> float:
    if not -1.0 < r < 1.0:
        raise NoRootError(f"r={r!r} outside (-1, 1)")
    if n_fermions < 2 or n_fermions % 2:
        raise DomainError("n_fermions must be even and >= 2")
    return 2.0 * first_zero_phase(r) / ((1.0 - r) * n_fermions)


def boundary_curve(
    r_samples: Iterable[float],
    n_fermions: int,
    skip_missing: bool = False,
) -> list[tuple[float, float]]:
    """Smallest ``g > 0`` on the ``eps = 0`` boundary for each ``r``.

    With ``skip_missing`` values of ``r`` without a root are dropped instead of
    raising :class:`NoRootError`.
    """
    out = []
    for r in r_samples:
        try:
            out.append((float(r), boundary_point(float(r), n_fermions)))
        except NoRootError:
            if not skip_missing:
                raise
    return out
