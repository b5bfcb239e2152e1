import numpy as np
import pytest

from fdr_lab import algorithms as alg
from fdr_lab.numeric import sq_norm
from fdr_lab.problems import quadratic_l1, translated

TWO_CALL = alg.PROX_PROX_METHODS


def test_problem_checks_modulus(toy):
    with pytest.raises(ValueError):
        alg.CompositeProblem(toy.f, toy.g, mu=2.0)
    with pytest.raises(ValueError):
        alg.CompositeProblem(toy.f, toy.g, mu=1.0, x_star=np.zeros(1))


@pytest.mark.parametrize("name", alg.ALGORITHMS)
def test_zero_iterations_rejected(toy, name):
    with pytest.raises(ValueError, match="N >= 1"):
        alg.run(name, toy, np.ones(1), np.zeros(1), 0)


@pytest.mark.parametrize("name", TWO_CALL)
def test_two_prox_calls_per_iteration(qp, name):
    tr = alg.run(name, qp, np.zeros(12), np.zeros(12), 7)
    assert len(tr.calls) == 14
    assert tr.calls.count("f") == tr.calls.count("g") == 7
    assert tr.outputs.shape[0] == 8


@pytest.mark.parametrize("name", TWO_CALL)
def test_solution_is_stationary(qp, name):
    tr = alg.run(name, qp, qp.x_star, qp.u_star, 6)
    assert np.abs(tr.outputs[1:] - qp.x_star).max() <= 1e-10


def test_fista_solution_stationary(qp):
    tr = alg.run("fista", qp, qp.x_star, None, 6)
    assert np.abs(tr.outputs - qp.x_star).max() <= 1e-10


@pytest.mark.parametrize("name", alg.ALGORITHMS)
def test_methods_converge(name):
    p = quadratic_l1(5, dim=12, mu=1.0, lam=0.3)
    tr = alg.run(name, p, np.ones(12), np.zeros(12), 400)
    # accelerated and anchored methods are sublinear; 400 steps buys a few digits
    assert tr.sq_dist[-1] <= 1e-4 * tr.sq_dist[0]


def test_fdr_schedule_formula():
    s = alg.fdr_schedule(3, 0.5)
    np.testing.assert_allclose(s.values["eta"], [3.0, 3.0 / 4, 3.0 / 7, 3.0 / 10])
    s.validate(0.5, 3)
    with pytest.raises(ValueError):
        s.validate(0.6, 3)


def test_other_schedules_validate():
    alg.dys_schedule(1.0, 0.3, 20).validate(0.3)
    alg.cp_schedule(1.0, 1.0, 0.3, 20).validate(0.3)
    alg.fista_schedule(20).validate()
    with pytest.raises(ValueError):
        alg.cp_schedule(2.0, 1.0, 0.3, 5).validate(0.3)


def test_fdr_respects_rate_bound(qp):
    x0 = np.ones(12)
    u0 = -np.ones(12) * 0.1
    R2 = sq_norm(x0 - qp.x_star) + sq_norm(u0 - qp.u_star)
    for N in (1, 3, 10, 40):
        tr = alg.run_fdr(qp, x0, u0, N)
        assert sq_norm(tr.final - qp.x_star) * (1 + 4 * N**2 * qp.mu**2) <= R2 + 1e-10


def test_fdr_translation_equivariant(qp, rng):
    c = rng.standard_normal(12)
    x0 = rng.standard_normal(12)
    a = alg.run_fdr(qp, x0, None, 9)
    b = alg.run_fdr(translated(qp, c), x0 + c, None, 9)
    np.testing.assert_allclose(b["x"], a["x"] + c, atol=1e-12)


def test_fdr_u0_defaults_to_zero(qp):
    tr = alg.run_fdr(qp, np.ones(12), None, 2)
    assert tr.metadata["u0_defaulted"] is True
    np.testing.assert_array_equal(tr["fgrad"][0], 0.0)


def test_fdr_recorded_subgradients(qp, rng):
    tr = alg.run_fdr(qp, rng.standard_normal(12), rng.standard_normal(12), 5)
    g = qp.g.grad
    for j in range(5):
        np.testing.assert_allclose(tr["ggrad"][j], g(tr["y"][j]), atol=1e-10)


def test_constant_fdr_is_prs(qp, rng):
    alpha = 0.7
    z0 = rng.standard_normal(12)
    x0 = qp.f(z0, alpha)
    u0 = (x0 - z0) / alpha
    a = alg.run_fdr(qp, x0, u0, 30, schedule=alg.constant_schedule(alpha, 30))
    b = alg.run_prs(qp, z0, alpha, 30)
    np.testing.assert_allclose(a["w"], b["z"], atol=1e-12)
    np.testing.assert_allclose(a["y"], b["y"], atol=1e-12)


def test_prs_fixed_point(qp):
    z = alg.prs_fixed_point(qp.x_star, qp.u_star, 0.4)
    tr = alg.run_prs(qp, z, 0.4, 3)
    np.testing.assert_allclose(tr["z"][-1], z, atol=1e-12)


def test_ohm_residual_decreases(qp):
    tr = alg.run_ohm(qp, np.ones(12), 1.0, 200)
    r = tr["residual"]
    assert r[-1] <= 1e-3 * r[0]


def test_dys_inequality_every_step(qp, rng):
    tr = alg.run_dys(qp, rng.standard_normal(12), 1.0, 300)
    gap = alg.dys_descent_inequality(tr, qp.x_star, qp.u_star)
    assert gap.size == 299
    assert gap.max() <= 1e-10


def test_dys_index_note_recorded(qp):
    tr = alg.run_dys(qp, np.zeros(12), 1.0, 4)
    assert tr.metadata["index_convention"] == alg.DYS_INDEX_NOTE
    assert tr.outputs.shape[0] == 5


def test_cp_changes_steps(qp):
    tr = alg.run_cp(qp, np.ones(12), np.zeros(12), 1.0, 1.0, 5)
    assert tr.metadata["tau"][1] < tr.metadata["tau"][0]


def test_fista_objective_bound(qp):
    tr = alg.run_fista(qp, np.ones(12), None, 100)
    f_star = qp.objective(qp.x_star)
    assert alg.fista_bound(tr, qp.x_star, f_star).max() <= 1e-10


def test_unknown_algorithm(qp):
    with pytest.raises(ValueError, match="unknown"):
        alg.run("admm", qp, np.zeros(12))


def test_divergence_raises(qp):
    bad = alg.CompositeProblem(
        alg.ProxFunction(prox=lambda z, g: z + np.inf), qp.g, qp.mu)
    with pytest.raises(FloatingPointError):
        alg.run_fdr(bad, np.ones(12), None, 5)
