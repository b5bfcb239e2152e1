import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from fdr_lab.numeric import OrthonormalFrame, orthonormal_complement_basis
from fdr_lab.prox import (
    SegmentProductSet,
    make_half_sq,
    make_l1,
    make_lifted_f,
    make_lifted_g,
    make_quadratic,
    make_ridge_ls,
    make_zero,
    project_segment2d,
    project_segment_product,
    prox_l1,
    prox_lifted_f,
    prox_worstcase_g,
)

cvxpy = pytest.importorskip("cvxpy")

floats = st.floats(-50, 50, allow_nan=False)
steps = st.floats(1e-3, 1e3)


@given(st.lists(floats, min_size=1, max_size=8), steps, st.floats(0, 5))
@settings(max_examples=60, deadline=None)
def test_l1_prox_matches_scalar_minimization(z, gamma, lam):
    z = np.array(z)
    out = prox_l1(z, gamma, lam)
    for zi, yi in zip(z, out):
        res = minimize_scalar(lambda x: lam * abs(x) + (x - zi) ** 2 / (2 * gamma),
                              bracket=(zi - 1, zi + 1), tol=1e-12)
        assert yi == pytest.approx(res.x, abs=1e-5 * (1 + abs(zi)))


def test_l1_prox_threshold_values():
    np.testing.assert_array_equal(prox_l1(np.array([3.0, -0.5, -2.0]), 1.0, 1.0), [2.0, 0.0, -1.0])


def test_prox_rejects_nonpositive_step():
    with pytest.raises(ValueError):
        make_l1(1.0)(np.ones(2), 0.0)


def test_zero_and_half_sq(rng):
    z = rng.standard_normal(5)
    np.testing.assert_array_equal(make_zero()(z, 3.0), z)
    np.testing.assert_allclose(make_half_sq(2.0)(z, 0.5), z / 2.0)


def test_quadratic_prox_solves_optimality(rng):
    B = rng.standard_normal((4, 7))
    Q = B.T @ B + 0.3 * np.eye(7)
    q = rng.standard_normal(7)
    g = make_quadratic(Q, q)
    assert g.modulus == pytest.approx(np.linalg.eigvalsh(Q)[0])
    for gamma in (0.01, 1.0, 100.0):
        z = rng.standard_normal(7)
        y = g(z, gamma)
        np.testing.assert_allclose(np.linalg.solve(np.eye(7) + gamma * Q, z + gamma * q), y, rtol=1e-10, atol=1e-12)


def test_quadratic_modulus_claim_checked(rng):
    with pytest.raises(ValueError):
        make_quadratic(np.eye(3), np.zeros(3), modulus=2.0)


def test_ridge_prox_stationarity(rng):
    A = rng.standard_normal((5, 8))
    b = rng.standard_normal(5)
    g = make_ridge_ls(A, b, 0.1)
    assert g.modulus == 0.1
    z = rng.standard_normal(8)
    y = g(z, 0.7)
    grad = 2 * A.T @ (A @ y - b) + 0.1 * y
    np.testing.assert_allclose(grad + (y - z) / 0.7, 0.0, atol=1e-10)
    assert g.value(y) == pytest.approx(np.sum((A @ y - b) ** 2) + 0.05 * y @ y)


@given(st.tuples(floats, floats), st.tuples(st.floats(0, 10), st.floats(0, 10)))
@settings(max_examples=80, deadline=None)
def test_segment_projection_matches_brent(p, e):
    p, e = np.array(p), np.array(e)
    out = project_segment2d(p, e)
    if e @ e == 0:
        assert np.all(out == 0)
        return
    res = minimize_scalar(lambda s: np.sum((s * e - p) ** 2), bounds=(0, 1), method="bounded",
                          options={"xatol": 1e-12})
    assert np.linalg.norm(out - res.x * e) <= 1e-5 * (1 + np.linalg.norm(p))


def test_segment_product_set_validation():
    with pytest.raises(ValueError):
        SegmentProductSet(4, blocks=[((0, 1), (1.0, 1.0))], pinned=[(1, 0.0)])
    with pytest.raises(ValueError):
        SegmentProductSet(4, blocks=[((0, 1), (-1.0, 1.0))])


def test_segment_product_projection_is_idempotent(rng):
    S = SegmentProductSet(6, blocks=[((0, 1), (1.0, 2.0)), ((2, 4), (0.5, 0.0))], pinned=[(3, 7.0)], free=[5])
    y = rng.standard_normal(6) * 3
    p = project_segment_product(y, S)
    assert S.contains(p)
    np.testing.assert_array_equal(project_segment_product(p, S), p)
    assert p[3] == 7.0 and p[5] == y[5]


def test_worstcase_g_prox_matches_cvxpy(rng):
    S = SegmentProductSet(5, blocks=[((1, 2), (0.4, 0.3)), ((3, 4), (0.2, 0.6))], pinned=[(0, 0.0)])
    F = OrthonormalFrame.random(5, 5, rng)
    x0 = rng.standard_normal(5)
    u0 = 0.7 * F[0]
    mu, gamma = 0.8, 1.3
    z = rng.standard_normal(5)
    out = prox_worstcase_g(z, gamma, S, x0, u0, mu, frame=F)
    s = cvxpy.Variable(2)
    c = cvxpy.hstack([0.0, 0.4 * s[0], 0.3 * s[0], 0.2 * s[1], 0.6 * s[1]])
    x = x0 + F.columns @ c
    obj = 0.5 * mu * cvxpy.sum_squares(x - x0) + u0 @ (x - x0) + cvxpy.sum_squares(x - z) / (2 * gamma)
    cvxpy.Problem(cvxpy.Minimize(obj), [s >= 0, s <= 1]).solve(solver="CLARABEL")
    np.testing.assert_allclose(out, x.value, atol=1e-6)


def _lifted_setup(rng, d=6, dp=10):
    U = OrthonormalFrame.random(dp, d, rng)
    comp = orthonormal_complement_basis(U, dp - d)
    u0 = sum(rng.standard_normal() * v for v in comp)
    return U, rng.standard_normal(dp), u0


def test_lifted_l1_prox_matches_cvxpy(rng):
    U, x0, u0 = _lifted_setup(rng)
    base = make_l1(0.6)
    for gamma in (0.3, 2.0):
        z = 2 * rng.standard_normal(10)
        out = prox_lifted_f(z, gamma, base, U, x0, u0)
        x = cvxpy.Variable(10)
        obj = 0.6 * cvxpy.norm1(U.columns.T @ (x - x0)) - u0 @ (x - x0) + cvxpy.sum_squares(x - z) / (2 * gamma)
        cvxpy.Problem(cvxpy.Minimize(obj)).solve(solver="CLARABEL")
        np.testing.assert_allclose(out, x.value, atol=1e-6)


def test_lifted_g_prox_stationarity(rng):
    U, x0, u0 = _lifted_setup(rng)
    A = rng.standard_normal((4, 6))
    gU = make_lifted_g(make_ridge_ls(A, rng.standard_normal(4), 0.5), U, x0, u0, 0.5)
    z = rng.standard_normal(10)
    y = gU(z, 0.9)
    np.testing.assert_allclose(gU.grad(y) + (y - z) / 0.9, 0.0, atol=1e-10)


def test_lifted_requires_orthogonal_u0(rng):
    U, x0, _ = _lifted_setup(rng)
    with pytest.raises(ValueError):
        prox_lifted_f(np.zeros(10), 1.0, make_l1(1.0), U, x0, U[0])


def test_square_frame_reduces_to_conjugated_prox(rng):
    U = OrthonormalFrame.random(6, 6, rng)
    base = make_l1(0.4)
    fU = make_lifted_f(base, U, np.zeros(6), np.zeros(6))
    z = rng.standard_normal(6)
    np.testing.assert_allclose(fU(z, 1.5), U.columns @ base(U.columns.T @ z, 1.5), atol=1e-14)
