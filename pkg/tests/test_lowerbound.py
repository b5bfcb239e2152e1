import numpy as np
import pytest

from fdr_lab import algorithms as alg
from fdr_lab import lowerbound as lb
from fdr_lab.algorithms import ProxCall, ProxCallLog
from fdr_lab.numeric import sq_norm
from fdr_lab.prox import make_l1, make_ridge_ls

GRID = [(N, mu) for N in (1, 2, 5, 10, 50) for mu in (0.1, 1.0, 10.0)]


def test_n1_mu1_coefficients():
    t, g = lb.solution_coefficients(1, 1.0)
    np.testing.assert_allclose(t, [np.sqrt(1 / 6), np.sqrt(1 / 18), 1 / 3], rtol=1e-15)
    np.testing.assert_allclose(g, [-np.sqrt(1 / 6), 3 * np.sqrt(1 / 18), 0.0], rtol=1e-15)
    assert t[-1] ** 2 == pytest.approx(1 / 9, rel=1e-15)


@pytest.mark.parametrize("N,mu", GRID)
def test_identities_grid(N, mu):
    rep = lb.coefficient_identities(N, mu)
    assert rep["ok"], rep
    inst = lb.build_worstcase(N, mu)
    assert inst.gstar[-1] == 0.0
    assert inst.t[-1] == 1 / (1 + 2 * N * mu)
    assert inst.R2 == pytest.approx(1.0, abs=1e-12)
    nc = lb.verify_normal_cones(inst)
    assert nc["equalities_hold"] and nc["inclusions_hold"]


def test_normal_cone_blocks_n1():
    nc = lb.verify_normal_cones(lb.build_worstcase(1, 1.0))
    assert abs(nc["d_products"][0]) <= 1e-15
    assert abs(nc["c_products"][0]) <= 1e-15


def test_perturbed_t_is_flagged():
    inst = lb.build_worstcase(2, 1.0)
    t = inst.t.copy()
    t[0] += 1e-3
    assert not lb.verify_normal_cones(inst, t=t)["equalities_hold"]


@pytest.mark.parametrize("frame", ["standard", "random"])
def test_solution_is_prox_fixed_point(frame):
    inst = lb.build_worstcase(4, 0.7, x0=np.arange(10.0), u0_scale=0.4, frame=frame, seed=3)
    for gamma in (0.1, 1.0, 10.0):
        np.testing.assert_allclose(inst.prox_g(inst.x_star + gamma * inst.u_star, gamma), inst.x_star, atol=1e-12)
        np.testing.assert_allclose(inst.prox_f(inst.x_star - gamma * inst.u_star, gamma), inst.x_star, atol=1e-12)


def test_zero_chain_all_k(rng):
    inst = lb.build_worstcase(3, 0.5, x0=rng.standard_normal(8), u0_scale=1.2, frame="random", seed=5)
    r = lb.check_zero_chain(inst, -1, inst.x0, 1.0)
    assert r["ok"]
    for k in range(-1, 2 * 3):
        for _ in range(100):
            c = np.zeros(8)
            c[: k + 2] = rng.standard_normal(k + 2) * 3
            gamma = float(np.exp(rng.uniform(-3, 3)))
            assert lb.check_zero_chain(inst, k, inst.x0 + inst.frame.embed(c), gamma)["ok"]


def test_zero_chain_precondition():
    inst = lb.build_worstcase(2, 1.0)
    z = np.zeros(6)
    z[4] = 1.0
    with pytest.raises(ValueError):
        lb.check_zero_chain(inst, 0, z, 1.0)
    z = inst.x_star + inst.u_star
    assert lb.check_zero_chain(inst, 2 * 2, z, 1.0)["ok"]
    np.testing.assert_allclose(inst.prox_g(z, 1.0), inst.x_star, atol=1e-14)


def test_budget_enforced():
    inst = lb.build_worstcase(2, 1.0)
    p = inst.problem(budget=4)
    with pytest.raises(lb.ProxBudgetExceeded):
        alg.run_fdr(p, inst.x0, inst.u0, 3)


def test_fista_is_not_prox_prox():
    with pytest.raises(ValueError):
        lb.run_budgeted("fista", lb.build_worstcase(1, 1.0))


def test_fdr_sandwich_n1():
    r = lb.lowerbound_experiment("fdr", 1, 1.0)
    assert 1 / 9 - 1e-12 <= r["achieved"] <= 1 / 5 + 1e-12
    assert list(r) == ["N", "mu", "method", "achieved", "floor", "ceiling", "span_ok", "chain_ok"]


@pytest.mark.parametrize("method", alg.PROX_PROX_METHODS)
def test_sweep_n5(method):
    r = lb.lowerbound_experiment(method, 5, 0.1)
    assert r["achieved"] >= r["floor"] - 1e-10
    assert r["span_ok"] and r["chain_ok"]


@pytest.mark.parametrize("method", alg.PROX_PROX_METHODS)
def test_final_iterate_misses_last_coordinate(method):
    inst = lb.build_worstcase(4, 1.0)
    tr = lb.run_budgeted(method, inst)
    assert abs(inst.coords(tr.final)[-1]) <= 1e-12
    assert sq_norm(tr.final - inst.x_star) >= inst.t[-1] ** 2 - 1e-14
    zr = lb.check_zero_respecting(inst, tr.calls, tr.final)
    assert zr["ok"], zr


def test_span_check_catches_fresh_direction(rng):
    inst = lb.build_worstcase(3, 1.0)
    tr = lb.run_budgeted("fdr", inst)
    calls = list(tr.calls)
    c = calls[1]
    calls[1] = ProxCall(c.z + rng.standard_normal(c.z.size), c.which, c.gamma, c.y)
    rep = lb.check_span_condition(ProxCallLog(calls), inst.x0, inst.u0, tr.final)
    assert not rep["ok"]
    assert rep["residuals"][1] > 1e-3


@pytest.mark.parametrize("order", ["l1_f", "ridge_f"])
def test_lifted_suite(rng, order):
    l1 = make_l1(0.5)
    ridge = make_ridge_ls(rng.standard_normal((4, 6)), rng.standard_normal(4), 0.3)
    f, g = (l1, ridge) if order == "l1_f" else (ridge, l1)
    rep = lb.lifted_identity_suite(f, g, 10, d=6, seed=11)
    assert rep["ok"], rep
    with pytest.raises(ValueError):
        lb.lifted_identity_suite(f, g, 7, d=6)
