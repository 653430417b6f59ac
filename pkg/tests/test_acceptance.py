"""Acceptance checks, one test per criterion (numbered 1 to 9).

Each test also enforces its wall-clock budget.  A pass/fail line per
criterion is printed at the end of the run by ``conftest.py``.
"""

import math
import time

import numpy as np
import pytest

from wormhole_teleport import analytic, finite_size, scan, sd_solver
from wormhole_teleport.channel import density_from_k, negativity, partial_transpose, pt_spectrum
from wormhole_teleport.model import ModelParams, TimeGrid
from wormhole_teleport.oracle import ed
from wormhole_teleport.oracle.majorana import annihilation_residual

GAMMA_Q = 3.0 - 2.0 * math.sqrt(2.0)


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        if exc[0] is None:
            assert self.elapsed < self.seconds, f"took {self.elapsed:.1f}s, budget {self.seconds}s"


@pytest.mark.criterion(1, "gamma_q recovery at g = 1e-6")
def test_gamma_q_recovery():
    with Budget(5):
        gq = scan.find_gamma_q(1e-6)
    assert abs(gq - GAMMA_Q) < 1e-4


@pytest.mark.criterion(2, "|K|_max = (1 - gamma)/2 from the numeric solver")
def test_kmax_law():
    with Budget(30):
        for gamma in np.round(np.arange(1, 10) * 0.1, 10):
            k_max, _ = scan.peak_response(ModelParams(gamma, 1e-4), source="numeric")
            assert abs(k_max - (1 - gamma) / 2) < 1e-4, gamma


@pytest.mark.criterion(3, "critical-line response -g/(1 + g^2 t^2)")
def test_critical_line():
    g = 0.01
    with Budget(5):
        prof = sd_solver.solve_diagonal(ModelParams(1.0, g), TimeGrid.from_step(50.0, 1e-3))
    expected = -g / (1.0 + g * g * prof.t**2)
    assert np.max(np.abs(prof.response - expected)) < 1e-6


@pytest.mark.criterion(4, "numeric/analytic equivalence and 4th-order convergence")
@pytest.mark.parametrize("gamma", [0.1, 0.4, 1.1])
@pytest.mark.parametrize("g", [0.001, 0.01])
def test_solver_equivalence(gamma, g):
    p = ModelParams(gamma, g)
    assert sd_solver.validate(p, TimeGrid.from_step(15.0, 1e-3)) < 1e-6
    ratio = sd_solver.convergence_ratio(p, 15.0)
    assert 8.0 <= ratio <= 32.0


@pytest.mark.criterion(5, "time traces at g = 0.01: negativity and mutual information scales")
def test_trace_reproduction():
    with Budget(10):
        traces = {gamma: scan.time_trace(ModelParams(gamma, 0.01)) for gamma in (0.1, 0.4, 1.1)}
    assert traces[0.1].negativity.max() > 0
    assert traces[0.4].negativity.max() == 0.0
    assert traces[1.1].negativity.max() == 0.0
    mi = {gamma: tr.mutual_info_ln2.max() for gamma, tr in traces.items()}
    for gamma in (0.1, 0.4):
        assert 0.1 <= mi[gamma] <= 2.0
    assert mi[1.1] <= 0.05 * min(mi[0.1], mi[0.4])


@pytest.mark.criterion(6, "negativity threshold at sqrt(2) - 1 and closed-form PT spectrum")
def test_negativity_threshold():
    k = np.arange(0, 1001) * 1e-3
    neg = np.array([negativity(density_from_k(x)) for x in k])
    first = int(np.argmax(neg > 0))
    assert neg[first] > 0
    assert k[first - 1] <= math.sqrt(2.0) - 1.0 <= k[first]
    for x in k:
        numeric = np.sort(np.linalg.eigvalsh(partial_transpose(density_from_k(x).rho, 0)))
        assert np.max(np.abs(numeric - pt_spectrum(x))) < 1e-12


@pytest.mark.criterion(7, "gamma* root and finite-size eigenvalue identities")
def test_gamma_star():
    root = finite_size.gamma_star()
    assert 0.42 <= root <= 0.43
    assert round(root, 2) == 0.43
    for g, n in [(0.01, 100), (0.7, 12), (2.0, 1000)]:
        plus, minus = finite_size.epsilon_pm(finite_size.FiniteSizeParams(1.0, g, n))
        assert abs(plus - 0.25) < 1e-12 and abs(minus - 0.25) < 1e-12
    for r in np.linspace(-1, 1, 21):
        for theta in np.linspace(-10, 10, 41):
            a = finite_size.epsilon_at_phase(r, theta)
            b = finite_size.epsilon_at_phase(r, theta + 2 * math.pi)
            assert max(abs(a[0] - b[0]), abs(a[1] - b[1])) < 1e-12


@pytest.mark.criterion(8, "oracle identity suite at n_sys = m_env = 4")
def test_oracle_identities():
    cfg = ed.OracleConfig(n_sys=4, m_env=4, gamma=0.5, g=0.05, t_l=1.0, t_r=1.0, n_samples=50, seed=2024)
    with Budget(120):
        kubo, size = ed.size_identity_check(cfg)
        protocol = ed.run_protocol(cfg.replace(n_samples=5))
        at_zero = ed.mean_shifted_size(cfg.replace(n_samples=5), 0.0)
    assert np.max(np.abs(size - kubo)) < 1e-8
    assert np.all(np.abs(kubo) <= 1.0)
    assert np.all(np.abs(protocol.k.samples) <= 1.0)
    setup = ed._setup(4, 4)
    assert annihilation_residual(setup.epr, setup.algebra, setup.algebra) < 1e-10
    g = 0.3
    free = ed.kubo_response(ed.OracleConfig(n_sys=4, m_env=4, gamma=0.0, g=g, n_samples=3))
    assert np.all(np.abs(np.abs(free.samples) - math.sin(g)) < 1e-10)
    assert np.all(at_zero.samples == 1.0)


@pytest.mark.slow
@pytest.mark.criterion(9, "dissipation suppresses the disorder-averaged response")
def test_dissipation_monotonicity():
    base = ed.OracleConfig(n_sys=6, m_env=6, gamma=0.1, g=0.01, t_l=2.0, t_r=2.0, n_samples=200, seed=17)
    with Budget(15 * 60):
        weak = np.abs(ed.kubo_response(base, workers=scan.worker_count()).samples)
        strong = np.abs(ed.kubo_response(base.replace(gamma=1.5), workers=scan.worker_count()).samples)
    n = len(weak)
    se = math.hypot(weak.std(ddof=1), strong.std(ddof=1)) / math.sqrt(n)
    print(f"|K|(0.1) = {weak.mean():.5f}, |K|(1.5) = {strong.mean():.5f}, combined stderr {se:.2e}")
    assert weak.mean() - strong.mean() >= 3 * se
