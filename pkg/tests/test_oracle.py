import math

import numpy as np
import pytest

from wormhole_teleport.channel import density_from_k
from wormhole_teleport.errors import BasisOverflowError, DomainError, ResourceError, TrotterError
from wormhole_teleport.oracle import ed
from wormhole_teleport.oracle.brownian import TermLayout, draw_couplings

BASE = ed.OracleConfig(n_sys=4, m_env=4, gamma=0.5, g=0.05, t_l=1.0, t_r=1.0, n_samples=4, seed=1)


def test_config_validation():
    bad = [
        dict(n_sys=3), dict(n_sys=0), dict(m_env=3), dict(m_env=-2), dict(gamma=-1.0),
        dict(t_l=-0.1), dict(dt_trotter=0.0), dict(n_samples=0),
    ]
    for kw in bad:
        with pytest.raises(DomainError):
            BASE.replace(**kw)
    with pytest.raises(ResourceError):
        BASE.replace(n_sys=10, m_env=10)
    BASE.replace(n_sys=10, m_env=8)


def test_hamiltonian_slice():
    rng = np.random.default_rng(0)
    h_l, h_r = ed.sample_hamiltonian_step(BASE, rng)
    assert np.max(np.abs(h_l - h_l.conj().T)) < 1e-12
    assert np.max(np.abs(h_r - h_r.conj().T)) < 1e-12
    assert np.max(np.abs(h_l - h_r)) > 0
    h_l0, h_r0 = ed.sample_hamiltonian_step(BASE.replace(gamma=0.0), np.random.default_rng(0))
    # with V = 0 only the quartic terms survive and both sides agree
    assert np.array_equal(h_l0, h_r0)


def test_hamiltonian_quartic_only_at_zero_gamma():
    layout = TermLayout(4, 4)
    j4, v2 = draw_couplings(layout, 0.0, 0.01, 3, np.random.default_rng(2))
    assert np.all(v2 == 0)
    assert np.all(j4 != 0)
    assert j4.shape == (3, 4 * 4) and v2.shape == (3, 16)


def test_coupling_variances():
    layout = TermLayout(4, 4)
    dt = 0.01
    j4, v2 = draw_couplings(layout, 0.8, dt, 100_000, np.random.default_rng(9))
    n = j4.shape[0]
    for column, target in ((j4[:, 0], 2 * 0.25 / (4 * 16 * dt)), (v2[:, 0], 0.8 * 0.25 / (4 * dt))):
        sigma = target * math.sqrt(2.0 / (n - 1))
        assert abs(column.var(ddof=1) - target) < 3 * sigma


def test_realization_streams_are_independent_of_order():
    a = ed.realization_rng(5, 3).normal(size=4)
    ed.realization_rng(5, 0).normal(size=100)
    assert np.array_equal(a, ed.realization_rng(5, 3).normal(size=4))
    assert not np.array_equal(a, ed.realization_rng(5, 2).normal(size=4))


def test_self_test_passes():
    ed.self_test()


@pytest.mark.parametrize("n_sys", [2, 4, 6])
def test_free_response(n_sys):
    g = 0.2
    cfg = ed.OracleConfig(n_sys=n_sys, m_env=0, gamma=0.0, g=g)
    k = ed.kubo_response(cfg)
    assert abs(abs(k.mean) - math.sin(g)) < 1e-10


def test_zero_coupling_response_vanishes_at_equal_time():
    cfg = BASE.replace(g=0.0, t_l=0.0, t_r=0.0)
    assert np.all(np.abs(ed.kubo_response(cfg).samples) < 1e-14)


def test_size_identity_per_realization():
    kubo, size = ed.size_identity_check(BASE)
    assert np.max(np.abs(kubo - size)) < 1e-8
    assert np.all(np.abs(kubo) <= 1)


def test_size_identity_unequal_times():
    kubo, size = ed.size_identity_check(BASE.replace(t_l=0.7, t_r=1.3, n_samples=2))
    assert np.max(np.abs(kubo - size)) < 1e-8


def test_size_response_trivial_cases():
    g = 0.05
    at_zero = ed.size_representation_response(BASE.replace(t_l=0.0, t_r=0.0, n_samples=1))
    assert abs(at_zero.mean) == pytest.approx(math.sin(g), abs=1e-12)
    assert np.all(ed.size_representation_response(BASE.replace(g=0.0)).samples == 0.0)


def test_size_basis_guard():
    with pytest.raises(BasisOverflowError):
        ed.size_representation_response(BASE.replace(n_sys=8, m_env=6))
    with pytest.raises(BasisOverflowError):
        ed.mean_shifted_size(BASE.replace(n_sys=8, m_env=6), 0.0)


def test_mean_shifted_size_at_zero():
    est = ed.mean_shifted_size(BASE, 0.0)
    assert np.all(est.samples == 1.0)
    with pytest.raises(DomainError):
        ed.mean_shifted_size(BASE, -1.0)


@pytest.mark.slow
def test_mean_size_scrambled_plateau():
    # a couple of environment modes are needed: the quartic terms all carry one
    cfg = ed.OracleConfig(n_sys=8, m_env=2, gamma=0.0, g=0.0, n_samples=6, seed=4)
    est = ed.mean_shifted_size(cfg, 40.0)
    assert est.mean == pytest.approx(8 / 2, rel=0.10)


@pytest.mark.slow
def test_mean_size_suppressed_by_dissipation():
    cfg = ed.OracleConfig(n_sys=4, m_env=4, gamma=0.0, g=0.0, n_samples=30, seed=8)
    closed = ed.mean_shifted_size(cfg, 3.0)
    open_ = ed.mean_shifted_size(cfg.replace(gamma=2.0), 3.0)
    spread = math.hypot(closed.stderr, open_.stderr)
    assert closed.mean - open_.mean > 3 * spread


def test_protocol_free_channel_state():
    cfg = ed.OracleConfig(n_sys=6, m_env=0, gamma=0.0, g=0.2)
    rho, k = ed.protocol_realization(cfg)
    assert abs(k) == pytest.approx(math.sin(0.2), abs=1e-12)
    assert np.max(np.abs(rho - density_from_k(k).rho)) < 0.05


def test_protocol_state_is_physical():
    cfg = BASE.replace(n_sys=4, m_env=2, n_samples=3)
    for i in range(cfg.n_samples):
        rho, k = ed.protocol_realization(cfg, i)
        assert np.trace(rho).real == pytest.approx(1.0, abs=1e-10)
        assert np.max(np.abs(rho - rho.conj().T)) < 1e-12
        assert np.linalg.eigvalsh(rho).min() > -1e-10
        rho_a = np.einsum("ijkj->ik", rho.reshape(2, 2, 2, 2))
        assert np.allclose(rho_a, np.eye(2) / 2, atol=1e-10)
        assert abs(k) <= 1


def test_protocol_average():
    res = ed.run_protocol(BASE.replace(n_samples=3))
    assert res.rho.shape == (4, 4)
    assert np.trace(res.rho).real == pytest.approx(1.0, abs=1e-10)
    assert res.rho_stderr.shape == (4, 4)
    assert len(res.k.samples) == 3


def test_unitarity_at_fine_step():
    cfg = ed.OracleConfig(n_sys=4, m_env=2, gamma=0.7, g=0.1, t_l=0.5, t_r=0.5, dt_trotter=1e-3)
    rho, _ = ed.protocol_realization(cfg)
    assert abs(np.trace(rho).real - 1.0) < 1e-8


def test_seed_determinism():
    a = ed.kubo_response(BASE)
    b = ed.kubo_response(BASE)
    assert np.array_equal(a.samples, b.samples)
    c = ed.kubo_response(BASE.replace(seed=2))
    assert not np.array_equal(a.samples, c.samples)
    # each realization depends only on (seed, index)
    more = ed.kubo_response(BASE.replace(n_samples=6))
    assert np.array_equal(more.samples[:4], a.samples)


def test_parallel_realizations_match_serial():
    a = ed.kubo_response(BASE, workers=1)
    b = ed.kubo_response(BASE, workers=2)
    assert np.array_equal(a.samples, b.samples)


def test_trotter_guard():
    cfg = ed.OracleConfig(n_sys=4, m_env=4, gamma=1.0, g=0.5, t_l=2.0, t_r=2.0, dt_trotter=0.5)
    with pytest.raises(TrotterError):
        ed.kubo_response(cfg)


def test_estimate():
    est = ed.Estimate.of([1.0, 2.0, 3.0])
    assert est.mean == 2.0
    assert est.stderr == pytest.approx(1.0 / math.sqrt(3))
    assert ed.Estimate.of([0.5]).stderr == 0.0
