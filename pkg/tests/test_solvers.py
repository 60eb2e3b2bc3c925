import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spectralfs.bss import BssConfig, bss_select, certify_spectral_bound
from spectralfs.linalg import DimensionError, apply_scheme, apply_scheme_to_points, thin_svd
from spectralfs.solvers import (
    RidgeModel,
    SingularKernelError,
    decompose_test_point,
    model_from_dict,
    model_to_json,
    ridge_fitted,
    ridge_predict,
    ridge_primal_closed_form,
    ridge_train_dual,
    rlsc_predict,
    rlsc_train,
)


def labels(n, rng):
    return np.where(rng.random(n) < 0.5, -1.0, 1.0)


# RLSC


def test_rlsc_identity_kernel():
    y = np.array([1.0, -1.0, 1.0])
    m = rlsc_train(np.eye(3), y, 1.0)
    np.testing.assert_allclose(m.coefficients, y / 2)


def test_rlsc_unregularized_inverts_kernel():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((8, 5))
    y = labels(5, rng)
    m = rlsc_train(x, y, 0.0)
    np.testing.assert_allclose(x.T @ x @ m.coefficients, y, atol=1e-8)


def test_rlsc_matches_dense_normal_equations():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((12, 6))
    y = labels(6, rng)
    k = x.T @ x
    expected = np.linalg.solve(k @ k + 0.3 * k, k @ y)
    np.testing.assert_allclose(rlsc_train(x, y, 0.3).coefficients, expected, rtol=1e-8)


def test_rlsc_singular_kernel_at_zero_lambda():
    x = np.ones((4, 3))
    with pytest.raises(SingularKernelError):
        rlsc_train(x, [1, -1, 1], 0.0)


def test_rlsc_rejects_negative_lambda_and_bad_labels():
    with pytest.raises(ValueError):
        rlsc_train(np.eye(2), [1, -1], -0.1)
    with pytest.raises(DimensionError):
        rlsc_train(np.eye(2), [1, -1, 1], 0.1)


def test_rlsc_predict_zero_point():
    m = rlsc_train(np.eye(3), [1, -1, 1], 0.5)
    assert rlsc_predict(m, np.zeros(3)) == 0.0


def test_rlsc_interpolates_training_points():
    rng = np.random.default_rng(2)
    x = rng.standard_normal((10, 4))
    y = labels(4, rng)
    m = rlsc_train(x, y, 0.0)
    for j in range(4):
        assert rlsc_predict(m, x[:, j]) == pytest.approx(y[j], abs=1e-8)


def test_rlsc_predict_matches_dot_products():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((9, 5))
    m = rlsc_train(x, labels(5, rng), 0.2)
    q = rng.standard_normal((9, 3))
    expected = [sum(m.coefficients[i] * np.dot(x[:, i], q[:, j]) for i in range(5)) for j in range(3)]
    np.testing.assert_allclose(rlsc_predict(m, q), expected, rtol=1e-12)
    with pytest.raises(DimensionError):
        rlsc_predict(m, np.ones(8))


# ridge


def test_ridge_orthonormal_columns():
    x = np.eye(3)[:, :2]
    y = np.array([2.0, -4.0])
    m = ridge_train_dual(x, y, 0.5)
    np.testing.assert_allclose(m.dual, y / 2)


def test_ridge_zero_targets():
    m = ridge_train_dual(np.random.default_rng(0).standard_normal((4, 3)), np.zeros(3), 0.1)
    assert not m.dual.any() and not m.primal.any()


def test_ridge_primal_dual_agree():
    rng = np.random.default_rng(4)
    x = rng.standard_normal((15, 5))
    y = rng.standard_normal(5)
    m = ridge_train_dual(x, y, 0.2)
    direct = ridge_primal_closed_form(x, y, 0.2)
    np.testing.assert_allclose(m.primal, direct, rtol=1e-8)


def test_ridge_dual_solves_shifted_system_rank_deficient():
    rng = np.random.default_rng(5)
    x = rng.standard_normal((4, 2)) @ rng.standard_normal((2, 6))
    y = rng.standard_normal(6)
    m = ridge_train_dual(x, y, 0.1)
    k = x.T @ x
    np.testing.assert_allclose((k + 6 * 0.1 * np.eye(6)) @ m.dual, y, atol=1e-10)
    np.testing.assert_allclose(ridge_fitted(m, x), k @ m.dual, atol=1e-10)


def test_ridge_requires_positive_lambda():
    with pytest.raises(ValueError):
        ridge_train_dual(np.eye(2), [1.0, 2.0], 0.0)


def test_ridge_predict():
    m = RidgeModel(np.ones(2), np.array([1.0, -2.0, 3.0]), 0.1)
    assert ridge_predict(m, np.zeros(3)) == 0.0
    assert ridge_predict(m, np.array([0.0, 1.0, 0.0])) == -2.0
    q = np.random.default_rng(0).standard_normal(3)
    assert ridge_predict(m, q) == pytest.approx(q[0] - 2 * q[1] + 3 * q[2])
    with pytest.raises(DimensionError):
        ridge_predict(m, np.ones(2))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.integers(1, 8), st.floats(1e-3, 10), st.integers(0, 10**6))
def test_primal_dual_equivalence_property(d, n, lam, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((d, n))
    y = rng.standard_normal(n)
    m = ridge_train_dual(x, y, lam)
    direct = ridge_primal_closed_form(x, y, lam)
    scale = max(np.linalg.norm(direct), 1e-300)
    assert np.linalg.norm(m.primal - direct) <= 1e-8 * scale


# serialization


def test_model_json_round_trip():
    rng = np.random.default_rng(6)
    x = rng.standard_normal((5, 4))
    ridge = ridge_train_dual(x, rng.standard_normal(4), 0.3)
    back = model_from_dict(json.loads(model_to_json(ridge)))
    np.testing.assert_array_equal(back.primal, ridge.primal)
    rl = rlsc_train(x, labels(4, rng), 0.3)
    obj = json.loads(model_to_json(rl))
    assert set(obj) == {"kind", "lambda", "coefficients"}
    back = model_from_dict(obj, x)
    q = rng.standard_normal(5)
    assert rlsc_predict(back, q) == rlsc_predict(rl, q)
    with pytest.raises(ValueError):
        model_from_dict(obj)


# test-point decomposition


def test_point_in_span_has_no_residual():
    rng = np.random.default_rng(7)
    x = rng.standard_normal((10, 3))
    svd = thin_svd(x)
    a = rng.standard_normal(3)
    tp = decompose_test_point(x @ a, svd)
    assert tp.beta_norm == pytest.approx(0.0, abs=1e-10)
    np.testing.assert_allclose(tp.alpha, a, atol=1e-10)


def test_point_orthogonal_to_range():
    x = np.vstack([np.eye(2), np.zeros((2, 2))])
    tp = decompose_test_point(np.array([0.0, 0.0, 3.0, 4.0]), thin_svd(x))
    np.testing.assert_allclose(tp.alpha, 0.0)
    assert tp.beta_norm == pytest.approx(5.0)


def test_point_pythagoras_and_reconstruction():
    rng = np.random.default_rng(8)
    x = rng.standard_normal((12, 4))
    svd = thin_svd(x)
    q = rng.standard_normal(12)
    tp = decompose_test_point(q, svd)
    assert np.linalg.norm(svd.u.T @ q) ** 2 + tp.beta_norm**2 == pytest.approx(q @ q, rel=1e-10)
    np.testing.assert_allclose(x @ tp.alpha + tp.residual, q, atol=1e-8)


# guarantees of RLSC after BSS


def rlsc_deviation(x, y, scheme, q, lam, svd):
    full = rlsc_predict(rlsc_train(x, y, lam, svd), q)
    small = rlsc_predict(rlsc_train(apply_scheme(scheme, x), y, lam),
                         apply_scheme_to_points(scheme, q))
    return abs(small - full), full


@pytest.mark.parametrize("r", [180, 320])
def test_additive_bound(r):
    d, n = 300, 20
    eps = 3 * math.sqrt(n / r)
    for seed in range(10):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal((d, n))
        y = labels(n, rng)
        svd = thin_svd(x)
        s = bss_select(svd.u.T, BssConfig(r=r, ell=svd.rho))
        assert certify_spectral_bound(svd.u, s) <= eps
        q = rng.standard_normal(d)
        tp = decompose_test_point(q, svd)
        kappa, ny = svd.condition_number, np.linalg.norm(y)
        beta_term = eps * kappa / svd.sigma_max * tp.beta_norm * ny
        dev0, _ = rlsc_deviation(x, y, s, q, 0.0, svd)
        assert dev0 <= beta_term
        dev, _ = rlsc_deviation(x, y, s, q, 0.5, svd)
        assert dev <= 2 * eps * kappa * np.linalg.norm(tp.alpha) * ny + 2 * beta_term


def test_relative_bound_for_points_in_span():
    d, n, r, lam = 300, 20, 180, 0.5
    eps = 3 * math.sqrt(n / r)
    for seed in range(10):
        rng = np.random.default_rng(100 + seed)
        x = rng.standard_normal((d, n))
        y = labels(n, rng)
        svd = thin_svd(x)
        s = bss_select(svd.u.T, BssConfig(r=r, ell=svd.rho))
        a = rng.standard_normal(n)
        dev, full = rlsc_deviation(x, y, s, x @ a, lam, svd)
        # omega from its defining ratio on this instance
        w = (svd.v.T @ a) / (1 + lam / svd.sigma**2)
        vy = svd.v.T @ y
        omega = np.linalg.norm(w) * np.linalg.norm(vy) / abs(w @ vy)
        assert abs(full) == pytest.approx(abs(w @ vy), rel=1e-8)
        assert dev <= 2 * eps * omega * svd.condition_number * abs(full)
