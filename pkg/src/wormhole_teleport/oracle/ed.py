"""Exact state-vector simulation of the teleportation protocol at small N.

Each party holds ``N`` system and ``M`` environment Majoranas.  A disorder
realization is one Brownian coupling path ``J(s), V(s)`` on ``s >= 0``.  The
left party is evolved over ``[-t_L, 0]`` and the right party over
``[0, t_R]``; the coupling active at time ``-s`` on the left equals the one at
``+s`` on the right.  This pairing is what makes the operator-size
representation of the response an identity for every realization.

Paths are drawn on a grid of half the Trotter step; the working path
averages consecutive pairs, so the same path can be replayed at ``dt / 2``
for the convergence guard.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from ..errors import BasisOverflowError, DomainError, ResourceError, TrotterError
from .brownian import PartyHamiltonian, TermLayout, draw_couplings, slice_unitary
from .majorana import MAX_STRING_MODES, MajoranaAlgebra, build_epr

MAX_QUBITS = 20
TROTTER_TOL = 1e-3
_PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True)
class OracleConfig:
    n_sys: int
    m_env: int
    gamma: float
    g: float
    t_l: float = 0.0
    t_r: float = 0.0
    dt_trotter: float = 0.01
    n_samples: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.n_sys < 2 or self.n_sys % 2:
            raise DomainError(f"n_sys must be even and >= 2, got {self.n_sys}")
        if self.m_env < 0 or self.m_env % 2:
            raise DomainError(f"m_env must be even and >= 0, got {self.m_env}")
        if self.gamma < 0:
            raise DomainError("gamma must be >= 0")
        if self.t_l < 0 or self.t_r < 0:
            raise DomainError("protocol times must be >= 0")
        if not self.dt_trotter > 0:
            raise DomainError("dt_trotter must be positive")
        if self.n_samples < 1:
            raise DomainError("n_samples must be >= 1")
        if self.n_sys + self.m_env + 2 > MAX_QUBITS:
            raise ResourceError(
                f"Hilbert dimension 2^{self.n_sys + self.m_env + 2} exceeds the 2^{MAX_QUBITS} cap"
            )

    @property
    def n_party(self) -> int:
        return self.n_sys + self.m_env

    def replace(self, **kw) -> "OracleConfig":
        d = asdict(self)
        d.update(kw)
        return OracleConfig(**d)


@dataclass(frozen=True)
class Estimate:
    """Disorder average with its standard error and the raw samples."""

    mean: float
    stderr: float
    samples: np.ndarray

    @classmethod
    def of(cls, samples) -> "Estimate":
        s = np.asarray(samples, dtype=float)
        err = float(s.std(ddof=1) / math.sqrt(len(s))) if len(s) > 1 else 0.0
        return cls(float(s.mean()), err, s)


@dataclass(frozen=True)
class ProtocolResult:
    rho: np.ndarray
    rho_stderr: np.ndarray
    k: Estimate


def realization_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for realization ``index`` of a run seeded by ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),)))


# -- shared setup ------------------------------------------------------------------


class _Setup:
    def __init__(self, n_sys: int, m_env: int):
        self.n_sys = n_sys
        self.m_env = m_env
        self.algebra = MajoranaAlgebra(n_sys + m_env)
        self.layout = TermLayout(n_sys, m_env)
        self.ham = PartyHamiltonian(self.algebra, self.layout)
        self.gam = self.algebra.matrices
        self.parity = self.algebra.parity
        self.epr = build_epr(self.algebra, self.algebra)
        # chi_{j,L} chi_{j,R} = (gamma_j P) (x) gamma_j
        self.pair_left = [self.gam[j] @ self.parity for j in range(n_sys)]


@lru_cache(maxsize=8)
def _setup(n_sys: int, m_env: int) -> _Setup:
    return _Setup(n_sys, m_env)


def _apply_left(op, psi):
    return np.tensordot(op, psi, axes=(1, 0))


def _apply_right(op, psi):
    return np.moveaxis(np.tensordot(op, psi, axes=(1, 1)), 0, 1)


def apply_coupling(psi, setup: _Setup, g: float, dagger: bool = False):
    """``U = exp(-i g V)`` with ``V = -i/2 sum_j chi_{j,L} chi_{j,R}``.

    The pair terms commute and square to ``-1`` after the ``i``, so
    ``U = prod_j (cos(g/2) - sin(g/2) chi_{j,L} chi_{j,R})``.
    """
    c, s = math.cos(0.5 * g), math.sin(0.5 * g)
    if dagger:
        s = -s
    for j in range(setup.n_sys):
        psi = c * psi - s * _apply_right(setup.gam[j], _apply_left(setup.pair_left[j], psi))
    return psi


# -- Brownian path -----------------------------------------------------------------


@dataclass
class Path:
    """Fine-grid couplings for one realization."""

    j4: np.ndarray
    v2: np.ndarray
    dt_fine: float

    @classmethod
    def draw(cls, setup: _Setup, gamma: float, dt: float, t_needed: float, rng) -> "Path":
        n = max(1, math.ceil(t_needed / dt - 1e-9))
        j4, v2 = draw_couplings(setup.layout, gamma, 0.5 * dt, 2 * n, rng)
        return cls(j4, v2, 0.5 * dt)

    def level(self, fine: bool):
        if fine:
            return self.j4, self.v2, self.dt_fine
        j4 = 0.5 * (self.j4[0::2] + self.j4[1::2])
        v2 = 0.5 * (self.v2[0::2] + self.v2[1::2])
        return j4, v2, 2.0 * self.dt_fine


def evolution(setup: _Setup, path: Path, times, fine: bool = False, side: str = "left"):
    """Unitaries at each time in ``times``.

    ``side="left"``: ``U_b(t)`` evolving the left party from ``-t`` to ``0``,
    so that ``chi(-t) = U_b chi U_b^dagger``.
    ``side="right"``: ``u_R(t)`` evolving the right party from ``0`` to ``t``.
    """
    j4, v2, dt = path.level(fine)
    d = setup.algebra.dim
    wanted = sorted(set(float(t) for t in times))
    # breakpoints: slice edges plus requested times (which may split a slice)
    n_edges = int(math.floor(wanted[-1] / dt + 1e-9))
    points = [k * dt for k in range(n_edges + 1)]
    for t in wanted:
        if min(abs(t - p) for p in points) > 1e-12:
            points.append(t)
    points.sort()
    out = {}
    U = np.eye(d, dtype=complex)
    if wanted[0] <= 1e-12:
        out[wanted[0]] = U.copy()
    for p0, p1 in zip(points[:-1], points[1:]):
        k = int(0.5 * (p0 + p1) // dt)
        if side == "left":
            U = U @ slice_unitary(setup.ham.left(j4[k], v2[k]), p1 - p0)
        else:
            U = slice_unitary(setup.ham.right(j4[k], v2[k]), p1 - p0) @ U
        for t in wanted:
            if abs(t - p1) <= 1e-12:
                out[t] = U.copy()
    return out


# -- single-realization kernels ------------------------------------------------------


def _heisenberg_left(setup: _Setup, U_b: np.ndarray) -> np.ndarray:
    return U_b @ setup.gam[0] @ U_b.conj().T


def _kubo_single(setup: _Setup, cfg: OracleConfig, path: Path, fine: bool = False) -> float:
    U_b = evolution(setup, path, [cfg.t_l], fine, "left")[cfg.t_l]
    u_r = evolution(setup, path, [cfg.t_r], fine, "right")[cfg.t_r]
    a = _heisenberg_left(setup, U_b) @ setup.epr
    chi_r = u_r.conj().T @ setup.gam[0] @ u_r
    b = apply_coupling(setup.epr, setup, cfg.g)
    b = setup.parity @ b @ chi_r.T
    b = apply_coupling(b, setup, cfg.g, dagger=True)
    return float(np.vdot(a, b).real)


def _size_single(setup: _Setup, cfg: OracleConfig, path: Path) -> float:
    Us = evolution(setup, path, [cfg.t_l, cfg.t_r], False, "left")
    c_l = setup.algebra.expand(_heisenberg_left(setup, Us[float(cfg.t_l)])).real
    c_r = setup.algebra.expand(_heisenberg_left(setup, Us[float(cfg.t_r)])).real
    size = setup.algebra.string_size(setup.n_sys)
    keep = size > 0
    total = np.sum(np.exp(-1j * cfg.g * size[keep]) * c_l[keep] * c_r[keep])
    return float(-total.imag)


def _mean_size_single(setup: _Setup, cfg: OracleConfig, path: Path, t: float) -> float:
    U_b = evolution(setup, path, [t], False, "left")[float(t)]
    c = setup.algebra.expand(_heisenberg_left(setup, U_b)).real
    return float(np.sum(setup.algebra.string_size(setup.n_sys) * c * c))


def _protocol_single(setup: _Setup, cfg: OracleConfig, path: Path) -> np.ndarray:
    d = setup.algebra.dim
    U_b = evolution(setup, path, [cfg.t_l], False, "left")[cfg.t_l]
    u_r = evolution(setup, path, [cfg.t_r], False, "right")[cfg.t_r]
    bell = np.eye(2, dtype=complex) / math.sqrt(2.0)
    psi = setup.epr[:, :, None, None] * bell[None, None, :, :]  # axes L, R, A, Q
    # step 1: back to -t_L, swap Q with the qubit of (chi_1, chi_2) on the left
    psi = _apply_left(U_b.conj().T, psi)
    psi = psi.reshape(2, d // 2, d, 2, 2)
    psi = np.swapaxes(psi, 0, 4).reshape(d, d, 2, 2)
    psi = _apply_left(U_b, psi)
    # step 2: couple the two systems at t = 0
    psi = apply_coupling(psi, setup, cfg.g)
    # step 3: right party forward to t_R
    psi = _apply_right(u_r, psi)
    return reduced_a_rs1(setup, psi)


def reduced_a_rs1(setup: _Setup, psi: np.ndarray) -> np.ndarray:
    """Two-qubit state of A and R_S1 from Pauli expectation values.

    R_S1 Paulis are ``chi_{1,R}``, ``chi_{2,R}`` and ``-i chi_{1,R} chi_{2,R}``.
    """
    g0, g1, P = setup.gam[0], setup.gam[1], setup.parity
    taus = [
        psi,
        _apply_right(g0, _apply_left(P, psi)),
        _apply_right(g1, _apply_left(P, psi)),
        _apply_right(-1j * g0 @ g1, psi),
    ]
    rho = np.zeros((4, 4), dtype=complex)
    for mu, sigma in enumerate(_PAULI):
        for nu, tpsi in enumerate(taus):
            spsi = np.tensordot(tpsi, sigma, axes=(2, 1)).transpose(0, 1, 3, 2)
            c = np.vdot(psi, spsi).real
            rho += 0.25 * c * np.kron(sigma, _PAULI[nu])
    return rho


# -- disorder averages ----------------------------------------------------------------


def _path_for(setup: _Setup, cfg: OracleConfig, index: int, t_needed: float) -> Path:
    rng = realization_rng(cfg.seed, index)
    return Path.draw(setup, cfg.gamma, cfg.dt_trotter, max(t_needed, 0.0), rng)


def _trotter_guard(setup, cfg, path, value):
    fine = _kubo_single(setup, cfg, path, fine=True)
    if abs(fine - value) > TROTTER_TOL:
        raise TrotterError(
            f"halving dt_trotter={cfg.dt_trotter:g} moved K by {abs(fine - value):.2e} > {TROTTER_TOL:g}"
        )


def _run(kind: str, cfg: OracleConfig, index: int, t: float | None = None):
    setup = _setup(cfg.n_sys, cfg.m_env)
    t_needed = max(cfg.t_l, cfg.t_r) if t is None else t
    path = _path_for(setup, cfg, index, t_needed)
    if kind == "kubo":
        value = _kubo_single(setup, cfg, path)
        if index == 0:
            _trotter_guard(setup, cfg, path, value)
        return value
    if kind == "size":
        return _size_single(setup, cfg, path)
    if kind == "pair":
        return _kubo_single(setup, cfg, path), _size_single(setup, cfg, path)
    if kind == "meansize":
        return _mean_size_single(setup, cfg, path, t)
    if kind == "protocol":
        value = _kubo_single(setup, cfg, path)
        if index == 0:
            _trotter_guard(setup, cfg, path, value)
        return _protocol_single(setup, cfg, path), value
    raise DomainError(f"unknown kind {kind!r}")


def _job(args):
    return _run(*args)


def _map_realizations(kind, cfg, t=None, workers: int = 1):
    jobs = [(kind, cfg, i, t) for i in range(cfg.n_samples)]
    if workers <= 1 or len(jobs) == 1:
        return [_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_job, jobs))


_SELF_TESTED = False


def self_test() -> None:
    """Fix the sign convention: without dynamics ``K = +sin g``."""
    global _SELF_TESTED
    if _SELF_TESTED:
        return
    g = 0.3
    cfg = OracleConfig(n_sys=2, m_env=0, gamma=0.0, g=g)
    setup = _setup(2, 0)
    k = _kubo_single(setup, cfg, _path_for(setup, cfg, 0, 0.0))
    if abs(k - math.sin(g)) > 1e-12:
        raise AssertionError(f"free response {k!r} != sin(g) = {math.sin(g)!r}")
    _SELF_TESTED = True


def _check_string_cap(config: OracleConfig):
    if config.n_party > MAX_STRING_MODES:
        raise BasisOverflowError(f"n_sys + m_env = {config.n_party} exceeds {MAX_STRING_MODES}")


def kubo_response(config: OracleConfig, workers: int = 1) -> Estimate:
    """Disorder-averaged ``K = 1/2 <{chi_{1,L}(-t_L), U^dag chi_{1,R}(t_R) U}>``.

    Raises :class:`TrotterError` when halving the step on the first
    realization changes its value by more than ``1e-3``.
    """
    self_test()
    return Estimate.of(_map_realizations("kubo", config, workers=workers))


def size_representation_response(config: OracleConfig, workers: int = 1) -> Estimate:
    """Response from the operator-size expansion of ``chi_{1,L}``.

    ``K = -Im sum_{n_S > 0} exp(-i g n_S) c_S(-t_L) c_S(-t_R)`` over Hermitian
    Majorana strings of the left party; ``n_S`` counts system factors.
    """
    _check_string_cap(config)
    return Estimate.of(_map_realizations("size", config, workers=workers))


def size_identity_check(config: OracleConfig, workers: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Per-realization ``(K_kubo, K_size)`` on identical paths."""
    _check_string_cap(config)
    self_test()
    pairs = _map_realizations("pair", config, workers=workers)
    kubo = np.array([p[0] for p in pairs])
    size = np.array([p[1] for p in pairs])
    return kubo, size


def mean_shifted_size(config: OracleConfig, t: float, workers: int = 1) -> Estimate:
    """Disorder-averaged ``sum_S n_S |c_S(t)|^2`` of ``chi_{1,L}``; zero point is 0."""
    if t < 0:
        raise DomainError("t must be >= 0")
    _check_string_cap(config)
    return Estimate.of(_map_realizations("meansize", config, t=float(t), workers=workers))


def run_protocol(config: OracleConfig, workers: int = 1) -> ProtocolResult:
    """Full state-vector protocol; returns the averaged ``rho_{A R_S1}`` and ``K``."""
    self_test()
    out = _map_realizations("protocol", config, workers=workers)
    rhos = np.array([o[0] for o in out])
    ks = [o[1] for o in out]
    n = len(rhos)
    err = rhos.real.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.zeros((4, 4))
    return ProtocolResult(rho=rhos.mean(axis=0), rho_stderr=err, k=Estimate.of(ks))


def protocol_realization(config: OracleConfig, index: int = 0):
    """``(rho_{A R_S1}, K)`` for a single realization."""
    setup = _setup(config.n_sys, config.m_env)
    path = _path_for(setup, config, index, max(config.t_l, config.t_r))
    rho = _protocol_single(setup, config, path)
    return rho, _kubo_single(setup, config, path)


def sample_hamiltonian_step(config: OracleConfig, rng: np.random.Generator):
    """One Trotter slice ``(h_L, h_R)`` as single-party matrices.

    The two-party operators are ``h_L (x) 1`` and ``1 (x) h_R``.
    """
    setup = _setup(config.n_sys, config.m_env)
    j4, v2 = draw_couplings(setup.layout, config.gamma, config.dt_trotter, 1, rng)
    return setup.ham.left(j4[0], v2[0]), setup.ham.right(j4[0], v2[0])
