import numpy as np
import pytest

from fdr_lab import elasticnet as en


def test_deterministic_from_seed():
    a, b = en.gen_instance(7), en.gen_instance(7)
    assert a.A.tobytes() == b.A.tobytes() and a.b.tobytes() == b.b.tobytes()
    assert not np.array_equal(en.gen_instance(8).A, a.A)


def test_shape_and_sparsity():
    inst = en.gen_instance(0)
    assert inst.A.shape == (40, 100) and inst.b.shape == (40,)
    assert np.count_nonzero(inst.x_true) == 10


def test_noiseless_limit():
    inst = en.gen_instance(3, noise_sd=0.0)
    np.testing.assert_array_equal(inst.b, inst.A @ inst.x_true)


def test_density_validated():
    with pytest.raises(ValueError):
        en.gen_instance(0, density=0.0)


def test_reference_kkt_and_fixed_points():
    inst = en.gen_instance(1)
    x, u = en.compute_reference(inst)
    assert en.kkt_violation(inst, x, u) <= 1e-9
    np.testing.assert_allclose(u, 2 * inst.A.T @ (inst.A @ x - inst.b) + inst.mu * x, atol=1e-12)
    p = inst.problem()
    for gamma in (0.1, 1.0, 10.0):
        assert np.abs(p.g(x + gamma * u, gamma) - x).max() <= 1e-9
        assert np.abs(p.f(x - gamma * u, gamma) - x).max() <= 1e-9


def test_huge_lambda_gives_zero():
    inst = en.gen_instance(2, lam=1e3)
    x, u = en.compute_reference(inst)
    assert np.all(x == 0)
    np.testing.assert_allclose(u, -2 * inst.A.T @ inst.b)
    assert np.abs(u).max() <= inst.lam


def test_zero_matrix_gives_zero():
    inst = en.gen_instance(0)
    inst.A = np.zeros_like(inst.A)
    x, _ = en.compute_reference(inst)
    assert np.all(x == 0)


def test_reference_failure_raises():
    inst = en.gen_instance(4)
    with pytest.raises(en.ReferenceError):
        en.compute_reference(inst, max_iter=3)


def test_lipschitz_matches_svd():
    inst = en.gen_instance(5)
    s = np.linalg.svd(inst.A, compute_uv=False)[0]
    assert inst.lipschitz() == pytest.approx(2 * s**2 + inst.mu, rel=1e-8)
