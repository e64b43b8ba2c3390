import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_config, random_controls, random_hermitian_spec
from qcfield import (
    PotentialSpec,
    ValidationError,
    WaveConfig,
    arp_gradient,
    arp_gradient_nd,
    arp_gradient_restricted,
    arp_hessian,
    arp_hessian_nd,
    arp_hessian_restricted,
    arp_nd,
    arp_value,
    check_derivatives,
    dual_basis,
    fan_config,
    fd_gradient,
    fd_hessian,
    kkt_residual,
    lagrange_multipliers,
    level_set_family,
    null_basis,
    phase_sensitivity,
    q_matrix,
    synthesize_min_controls,
)
from qcfield.wavefield import phase_shift


def test_fd_helpers_on_quadratic():
    A = np.array([[2.0, 1.0], [1.0, 3.0]])

    def f(x):
        return 0.5 * x @ A @ x

    x = np.array([0.3, -0.7])
    assert np.allclose(fd_gradient(f, x), A @ x, atol=1e-9)
    assert np.allclose(fd_hessian(f, x), A, atol=1e-6)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_derivatives_match_finite_differences(seed):
    rng = np.random.default_rng(seed)
    cfg = random_config(rng)
    spec = random_hermitian_spec(rng, cfg.d)
    u = random_controls(rng, cfg.N)
    x = rng.uniform(-5, 5, cfg.d)
    r = check_derivatives(x, u, cfg, spec)
    assert r["gradient_error"] < 1e-6
    assert r["hessian_error"] < 1e-4


def test_hessian_symmetric(rng):
    for _ in range(20):
        cfg = random_config(rng)
        spec = random_hermitian_spec(rng, cfg.d)
        u = random_controls(rng, cfg.N)
        x = rng.normal(size=cfg.d)
        H = arp_hessian(x, u, cfg, spec)
        assert np.linalg.norm(H - H.T) <= 1e-10 * np.linalg.norm(H)
        HN = arp_hessian_nd(cfg.phases(x), u, cfg, spec)
        assert np.linalg.norm(HN - HN.T) <= 1e-10 * np.linalg.norm(HN)


def test_nd_gradient_matches_fd_of_nd_potential(rng):
    cfg = random_config(rng, d=2, N=4)
    u = random_controls(rng, 4)
    y = rng.normal(size=4)
    g = arp_gradient_nd(y, u, cfg)
    fd = fd_gradient(lambda z: float(arp_nd(z, u, cfg)), y)
    assert np.allclose(g, fd, atol=1e-6 * np.abs(g).max())


def test_direct_and_chain_rule_routes_agree(rng):
    for _ in range(20):
        cfg = random_config(rng)
        spec = random_hermitian_spec(rng, cfg.d)
        u = random_controls(rng, cfg.N)
        x = rng.normal(size=cfg.d)
        g1, g2 = arp_gradient(x, u, cfg, spec), arp_gradient_restricted(x, u, cfg, spec)
        H1, H2 = arp_hessian(x, u, cfg, spec), arp_hessian_restricted(x, u, cfg, spec)
        assert np.allclose(g1, g2, rtol=1e-11, atol=1e-11 * np.abs(g1).max())
        assert np.allclose(H1, H2, rtol=1e-11, atol=1e-11 * np.abs(H1).max())


def test_gradient_vanishes_at_origin_for_real_symmetric_controls():
    cfg = fan_config(4)
    w, V = np.linalg.eigh(q_matrix(np.zeros(2), cfg))
    for j in range(V.shape[1]):
        assert np.linalg.norm(arp_gradient(np.zeros(2), V[:, j], cfg)) < 1e-10


def test_min_controls_place_a_global_minimum(rng):
    for _ in range(10):
        cfg = random_config(rng, d=2)
        spec = random_hermitian_spec(rng, 2)
        x0 = rng.uniform(-5, 5, 2)
        res = synthesize_min_controls(x0, cfg, spec)
        assert np.linalg.norm(res.u) == pytest.approx(1.0, abs=1e-14)
        assert arp_value(x0, res.u, cfg, spec) == pytest.approx(res.eigenvalue, abs=1e-10)
        assert np.linalg.norm(arp_gradient(x0, res.u, cfg, spec)) < 1e-10
        H = arp_hessian(x0, res.u, cfg, spec)
        assert np.linalg.eigvalsh(H)[0] >= -1e-8 * np.linalg.norm(H)
        pts = rng.uniform(-20, 20, (2000, 2))
        assert arp_value(pts, res.u, cfg, spec).min() >= res.eigenvalue - 1e-9


def test_degenerate_minimum_reports_multiplicity():
    res = synthesize_min_controls(np.zeros(2), fan_config(5))
    assert res.multiplicity == 2
    assert res.eigenspace.shape == (10, 2)
    # the choice does not depend on the basis of the eigenspace
    again = synthesize_min_controls(np.zeros(2), fan_config(5))
    assert np.array_equal(res.u, again.u)


def test_null_basis_orthonormal_and_in_kernel(rng):
    cfg = random_config(rng, d=2, N=5)
    Z = null_basis(cfg).Z
    assert Z.shape == (5, 3)
    assert np.allclose(Z.T @ Z, np.eye(3), atol=1e-12)
    assert np.allclose(cfg.K @ Z, 0, atol=1e-12)


def test_lagrange_multipliers_split_the_nd_gradient(rng):
    cfg = random_config(rng, d=2, N=5)
    u = random_controls(rng, 5)
    x = rng.normal(size=2)
    g = arp_gradient_nd(cfg.phases(x), u, cfg)
    lam = lagrange_multipliers(x, u, cfg)
    r = kkt_residual(x, u, cfg)
    Z = null_basis(cfg).Z
    assert np.allclose(g, r + Z @ lam, atol=1e-12 * np.abs(g).max())
    # the residual carries exactly the restricted gradient
    assert np.allclose(cfg.K @ r, arp_gradient(x, u, cfg), atol=1e-10 * np.abs(g).max())


def test_phase_sensitivity_is_first_order_change(rng):
    cfg = random_config(rng, d=2, N=4)
    u = random_controls(rng, 4)
    x = rng.normal(size=2)
    h = rng.normal(size=4)
    eps = 1e-6
    fd = (arp_value(x, phase_shift(u, eps * h), cfg) - arp_value(x, phase_shift(u, -eps * h), cfg)) / (2 * eps)
    assert phase_sensitivity(x, u, h, cfg) == pytest.approx(fd, rel=1e-6, abs=1e-8)
    xs = rng.normal(size=(3, 4, 2))
    assert phase_sensitivity(xs, u, h, cfg).shape == (3, 4)


def test_dual_basis_needs_square_k():
    cfg = fan_config(2)
    a = dual_basis(cfg)
    assert np.allclose(cfg.K.T @ a, 2 * np.pi * np.eye(2))
    with pytest.raises(ValidationError):
        dual_basis(fan_config(3))


def test_level_set_family_points_sit_on_the_level(rng):
    cfg = WaveConfig(np.eye(2))
    v = np.array([1.0, 0.0])
    u = np.r_[v, -v] / np.sqrt(2)
    fam = level_set_family(u, cfg)
    assert fam.zero_idx == (1,) and fam.support == (0,)
    assert fam.sign_vectors == ((0,), (1,))
    for n in ([0], [1], [4], [-3]):
        X = fam.sample(n, 200, rng)
        assert np.max(np.abs(arp_value(X, fam.u, cfg) - fam.eigenvalue)) < 1e-12


def test_level_set_family_rejects_non_eigenvectors():
    cfg = WaveConfig(np.eye(2))
    with pytest.raises(ValidationError, match="eigenvector"):
        level_set_family(np.r_[1.0, 2.0, 1.0, 2.0] / np.sqrt(10), cfg)
    with pytest.raises(ValidationError, match="form"):
        level_set_family(np.r_[1.0, 0, 0, 1.0] / np.sqrt(2), cfg)


def test_inadmissible_parity_raises():
    cfg = WaveConfig(np.eye(2))
    u = np.r_[1.0, 1.0, 1.0, 1.0] / 2
    fam = level_set_family(u, cfg, PotentialSpec.diagonal(1, 1))
    bad = [p for p in [(0, 1), (1, 0)] if p not in fam.sign_vectors]
    assert bad
    with pytest.raises(ValidationError, match="admissible"):
        fam.sample(bad[0], 3)
