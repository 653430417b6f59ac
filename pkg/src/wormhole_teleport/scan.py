"""Time traces, regime sweeps and transition-point searches."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from . import analytic, sd_solver
from .channel import LN2, NS_FACTOR, classify, density_from_k, metrics_from_k, mutual_information, negativity
from .errors import BracketError, DomainError
from .model import ModelParams, Regime, TimeGrid

SOURCES = ("analytic", "numeric")
DEFAULT_DT = 1e-3
MIN_TRACE_T = 20.0


@dataclass(frozen=True)
class TimeTrace:
    t: np.ndarray
    k: np.ndarray
    negativity: np.ndarray
    mutual_info_ln2: np.ndarray

    def rows(self):
        return zip(self.t, self.k, self.negativity, self.mutual_info_ln2)


@dataclass(frozen=True)
class SweepRow:
    gamma: float
    g: float
    k_max: float
    t_star: float
    neg_max: float
    mi_max_ln2: float
    regime: Regime

    def as_dict(self):
        d = asdict(self)
        d["regime"] = self.regime.label
        return d


def default_grid(params: ModelParams, dt: float = DEFAULT_DT) -> TimeGrid:
    """``t_max = max(3 t*, 20)`` with step ``dt``."""
    t_star = 0.0
    if params.g != 0.0:
        t_star = analytic.kmax_and_tstar(params)[1]
    return TimeGrid.from_step(max(3.0 * t_star, MIN_TRACE_T), dt)


def _check_source(source: str):
    if source not in SOURCES:
        raise DomainError(f"unknown source {source!r}; expected one of {SOURCES}")


def diagonal_response(params: ModelParams, grid: TimeGrid, source: str = "analytic", kick: str = "small_g"):
    _check_source(source)
    t = grid.points()
    if source == "analytic":
        return t, np.asarray(analytic.response_diag(t, params), dtype=float)
    profile = sd_solver.solve_diagonal(params, grid, kick=kick)
    return t, profile.values.imag.copy()


def time_trace(
    params: ModelParams,
    grid: TimeGrid | None = None,
    source: str = "analytic",
    kick: str = "small_g",
) -> TimeTrace:
    """Response and channel metrics along ``t_L = t_R = t``."""
    if grid is None:
        grid = default_grid(params)
    t, k = diagonal_response(params, grid, source, kick)
    neg, mi = metrics_from_k(np.clip(k, -1.0, 1.0))
    return TimeTrace(t=t, k=k, negativity=neg, mutual_info_ln2=mi / LN2)


def grid_peak(t: np.ndarray, values: np.ndarray) -> tuple[float, float]:
    """Peak of ``|values|`` refined by a three-point parabola."""
    mag = np.abs(values)
    i = int(np.argmax(mag))
    if 0 < i < len(mag) - 1:
        y0, y1, y2 = mag[i - 1], mag[i], mag[i + 1]
        denom = y0 - 2.0 * y1 + y2
        if denom < 0:
            shift = 0.5 * (y0 - y2) / denom
            h = t[i + 1] - t[i]
            return float(y1 - 0.25 * (y0 - y2) * shift), float(t[i] + shift * h)
    return float(mag[i]), float(t[i])


def peak_response(
    params: ModelParams,
    source: str = "analytic",
    grid: TimeGrid | None = None,
    kick: str = "small_g",
    dt: float = DEFAULT_DT,
) -> tuple[float, float]:
    _check_source(source)
    if source == "analytic":
        return analytic.kmax_and_tstar(params)
    if grid is None:
        grid = default_grid(params, dt)
    t, k = diagonal_response(params, grid, "numeric", kick)
    return grid_peak(t, k)


def sweep_row(
    gamma: float,
    g: float,
    grid: TimeGrid | None = None,
    source: str = "analytic",
    ns_factor: float = NS_FACTOR,
    kick: str = "small_g",
    dt: float = DEFAULT_DT,
) -> SweepRow:
    params = ModelParams(gamma=gamma, g=g)
    k_max, t_star = peak_response(params, source, grid, kick, dt)
    # both metrics grow monotonically with |K|, so their peaks sit at k_max
    state = density_from_k(min(k_max, 1.0))
    return SweepRow(
        gamma=float(gamma),
        g=float(g),
        k_max=k_max,
        t_star=t_star,
        neg_max=negativity(state),
        mi_max_ln2=mutual_information(state) / LN2,
        regime=classify(min(k_max, 1.0), params, ns_factor),
    )


def _row_job(args):
    return sweep_row(*args)


def worker_count(requested: int | None = None) -> int:
    cap = os.environ.get("WORMHOLE_THREADS")
    n = requested if requested is not None else (os.cpu_count() or 1)
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def sweep(
    gammas: Sequence[float],
    g: float,
    grid: TimeGrid | None = None,
    source: str = "analytic",
    ns_factor: float = NS_FACTOR,
    kick: str = "small_g",
    workers: int | None = 1,
    dt: float = DEFAULT_DT,
) -> list[SweepRow]:
    """One :class:`SweepRow` per ``gamma``, in input order."""
    gammas = [float(x) for x in gammas]
    if not gammas:
        raise DomainError("gammas must be non-empty")
    if any(x < 0 for x in gammas):
        raise DomainError("gammas must be non-negative")
    _check_source(source)
    jobs = [(x, g, grid, source, ns_factor, kick, dt) for x in gammas]
    n = worker_count(workers)
    if n == 1 or len(jobs) == 1:
        return [_row_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(_row_job, jobs))


def _bisect(pred, lo: float, hi: float, tol: float) -> float:
    """Boundary of a predicate that is False at ``lo`` and True at ``hi``."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


def neg_max(gamma: float, g: float, source: str = "analytic", kick: str = "small_g") -> float:
    params = ModelParams(gamma=gamma, g=g)
    k_max, _ = peak_response(params, source, kick=kick)
    return negativity(density_from_k(min(k_max, 1.0)))


def find_gamma_q(g: float, tol: float = 1e-10, source: str = "analytic", kick: str = "small_g") -> float:
    """Coupling at which the peak negativity vanishes, by bisection on [0, 1]."""
    if not 0 < abs(g) <= 0.05:
        raise DomainError(f"find_gamma_q needs 0 < |g| <= 0.05, got {g!r}")
    if tol < 1e-10:
        raise DomainError("tol must be >= 1e-10")

    def no_entanglement(gamma):
        return neg_max(gamma, g, source, kick) == 0.0

    if no_entanglement(0.0) or not no_entanglement(1.0):
        raise BracketError(f"peak negativity does not change sign on [0, 1) at g={g!r}")
    return _bisect(no_entanglement, 0.0, 1.0, tol)


def find_gamma_c(g: float, ns_factor: float = NS_FACTOR, tol: float = 1e-10, source: str = "analytic") -> float:
    """First ``gamma`` with ``k_max <= ns_factor |g|``.

    This is a finite-g crossover; it tends to the sharp transition at 1 as
    ``g -> 0``.  If the cutoff is never met below 1, exactly ``1.0`` is
    returned.
    """
    if not 0 < abs(g) <= 0.05:
        raise DomainError(f"find_gamma_c needs 0 < |g| <= 0.05, got {g!r}")

    def no_signal(gamma):
        if gamma >= 1.0:
            return True
        k_max, _ = peak_response(ModelParams(gamma=gamma, g=g), source)
        return k_max <= ns_factor * abs(g)

    if no_signal(0.0):
        return 0.0
    return _bisect(no_signal, 0.0, 1.0, tol)


__all__ = [
    "SweepRow",
    "TimeTrace",
    "default_grid",
    "find_gamma_c",
    "find_gamma_q",
    "grid_peak",
    "neg_max",
    "peak_response",
    "sweep",
    "time_trace",
]
