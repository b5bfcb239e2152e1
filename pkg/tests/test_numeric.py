import numpy as np
import pytest

from fdr_lab.numeric import (
    DimensionError,
    FrameError,
    NonFiniteError,
    NotSPDError,
    OrthonormalFrame,
    as_vec,
    check_finite,
    dot,
    gram_error,
    orthonormal_complement_basis,
    power_iteration,
    solve_spd,
    sq_norm,
)


def test_as_vec_rejects_matrices_and_nan():
    with pytest.raises(DimensionError):
        as_vec(np.zeros((2, 2)))
    with pytest.raises(NonFiniteError):
        check_finite(np.array([1.0, np.nan]))


def test_dot_dimension_mismatch():
    with pytest.raises(DimensionError):
        dot(np.zeros(3), np.zeros(4))
    assert sq_norm([3.0, 4.0]) == 25.0


def test_solve_spd_matches_numpy(rng):
    B = rng.standard_normal((6, 6))
    M = B @ B.T + np.eye(6)
    b = rng.standard_normal(6)
    np.testing.assert_allclose(solve_spd(M, b), np.linalg.solve(M, b), rtol=1e-12)


def test_solve_spd_rejects_indefinite():
    with pytest.raises(NotSPDError):
        solve_spd(np.diag([1.0, -1.0]), np.ones(2))


def test_random_frame_orthonormal(rng):
    F = OrthonormalFrame.random(10, 6, rng)
    assert gram_error(F.columns) <= 1e-12
    c = rng.standard_normal(6)
    np.testing.assert_allclose(F.coords(F.embed(c)), c, atol=1e-13)


def test_frame_rejects_non_orthonormal():
    with pytest.raises(FrameError):
        OrthonormalFrame(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_complement_is_orthogonal(rng):
    F = OrthonormalFrame.random(10, 6, rng)
    comp = orthonormal_complement_basis(F, 4)
    W = np.column_stack(comp)
    assert np.abs(F.columns.T @ W).max() <= 1e-12
    assert gram_error(W) <= 1e-12
    with pytest.raises(FrameError):
        orthonormal_complement_basis(F, 5)


def test_power_iteration_top_eigenvalue(rng):
    A = rng.standard_normal((40, 100))
    M = A.T @ A
    top = np.linalg.eigvalsh(M)[-1]
    assert power_iteration(M, max_iter=2000, rtol=1e-13) == pytest.approx(top, rel=1e-8)
