import numpy as np
import pytest

import orthopt as op
from orthopt.diagnostics import desk_specs
from orthopt.manifolds import riemannian_gradient
from orthopt.penalty import (
    EvalCache,
    PenaltyFunction,
    PostprocessDivergence,
    UnsupportedOperation,
    dA,
    dA_adjoint,
    dC,
    dC_adjoint,
    dCA,
    dissolve,
    penalty_gradient,
    penalty_hessvec,
    penalty_value,
    postprocess,
    stationarity_report,
)
from orthopt.problems import Problem, toy_problem
from orthopt.solvers import SolverConfig, rgd

SPECS = desk_specs()


@pytest.fixture(params=SPECS, ids=[s.name for s in SPECS])
def spec(request):
    return request.param


def _unit(spec, seed):
    rng = np.random.default_rng(seed)
    V = spec.random_ambient(rng)
    return V / np.linalg.norm(V)


def _near_point(spec, seed):
    # generic off-manifold point in the subspace, kept near the feasible set
    return spec.random_feasible(seed).X + 0.1 * _unit(spec, seed + 1)


# ------------------------------------------------------------------- dissolve

def test_dissolve_fixes_feasible_points(spec):
    X = spec.random_feasible(0).X
    assert np.linalg.norm(dissolve(spec, X) - X) <= 1e-12 * np.linalg.norm(X)


def test_dissolve_scalar_case():
    spec = op.stiefel(2, 1)
    out = dissolve(spec, np.array([[2.0], [0.0]]))
    np.testing.assert_allclose(out, [[-1.0], [0.0]])


def test_dissolve_quadratic_contraction_witness():
    spec = op.stiefel(2, 1)
    eps = 1e-3
    x = np.array([[1.0 + eps], [0.0]])
    c0 = np.linalg.norm(x.T @ x - 1.0)
    c1 = np.linalg.norm(dissolve(spec, x).T @ dissolve(spec, x) - 1.0)
    np.testing.assert_allclose(c1 / c0 ** 2, 0.75, atol=5e-3)


def test_dissolve_contraction_slope(spec):
    X = spec.random_feasible(1).X
    Z = _unit(spec, 2)
    logs = []
    for t in (1e-1, 1e-2, 1e-3):
        Y = X + t * Z
        c0 = np.linalg.norm(Y.T @ spec.phi(Y) - np.eye(spec.p))
        AY = dissolve(spec, Y)
        c1 = np.linalg.norm(AY.T @ spec.phi(AY) - np.eye(spec.p))
        logs.append((np.log(c0), np.log(c1)))
    slope = np.polyfit([a for a, _ in logs], [b for _, b in logs], 1)[0]
    assert 1.8 <= slope <= 2.2


# ------------------------------------------------------------ differentials

def test_dC_zero_direction(spec):
    X = _near_point(spec, 3)
    np.testing.assert_allclose(dC(spec, X, np.zeros_like(X)), 0.0)


def test_dC_matches_central_differences(spec):
    X = _near_point(spec, 4)
    Z = _unit(spec, 5)
    t = 1e-5
    fd = ((X + t * Z).T @ spec.phi(X + t * Z) - (X - t * Z).T @ spec.phi(X - t * Z)) / (2 * t)
    an = dC(spec, X, Z)
    assert np.linalg.norm(fd - an) <= 1e-6 * max(1.0, np.linalg.norm(an))


def test_dC_adjoint_pairing(spec):
    rng = np.random.default_rng(6)
    X = _near_point(spec, 6)
    for _ in range(20):
        Z = _unit(spec, rng.integers(1 << 30))
        T = spec.random_gram(rng)
        lhs = np.vdot(dC(spec, X, Z), T)
        rhs = np.vdot(Z, dC_adjoint(spec, X, T))
        assert abs(lhs - rhs) <= 1e-11 * max(1.0, abs(lhs))


def test_dA_zero_direction(spec):
    X = _near_point(spec, 7)
    np.testing.assert_allclose(dA(spec, X, np.zeros_like(X)), 0.0)


def test_dA_matches_central_differences(spec):
    X = _near_point(spec, 8)
    Z = _unit(spec, 9)
    t = 1e-5
    fd = (dissolve(spec, X + t * Z) - dissolve(spec, X - t * Z)) / (2 * t)
    an = dA(spec, X, Z)
    assert np.linalg.norm(fd - an) <= 1e-6 * max(1.0, np.linalg.norm(an))


def test_dA_adjoint_pairing(spec):
    rng = np.random.default_rng(10)
    X = _near_point(spec, 10)
    for _ in range(20):
        Z = _unit(spec, rng.integers(1 << 30))
        T = _unit(spec, rng.integers(1 << 30))
        lhs = np.vdot(dA(spec, X, Z), T)
        rhs = np.vdot(Z, dA_adjoint(spec, X, T))
        assert abs(lhs - rhs) <= 1e-11 * max(1.0, abs(lhs))


def test_dA_idempotent_on_manifold(spec):
    X = spec.random_feasible(11).X
    for s in range(10):
        Z = _unit(spec, 400 + s)
        DZ = dA(spec, X, Z)
        assert np.linalg.norm(dA(spec, X, DZ) - DZ) <= 1e-11
        T = _unit(spec, 500 + s)
        DT = dA_adjoint(spec, X, T)
        assert np.linalg.norm(dA_adjoint(spec, X, DT) - DT) <= 1e-11


def test_dCA_vanishes_on_manifold(spec):
    X = spec.random_feasible(12).X
    pt = spec.random_feasible(12)
    rng = np.random.default_rng(13)
    for s in range(5):
        Z = _unit(spec, 600 + s)
        assert np.linalg.norm(dCA(spec, X, Z)) <= 1e-11
    # tangent and normal directions specifically
    Zt = op.random_tangent(spec, pt, 14)
    T = spec.random_gram(rng)
    Zn = pt.phiX @ spec.gen_sym(T)
    for Z in (Zt, Zn):
        assert np.linalg.norm(dCA(spec, X, Z)) <= 1e-11 * max(1.0, np.linalg.norm(Z))


def test_dCA_matches_central_differences_off_manifold(spec):
    X = _near_point(spec, 15)
    Z = _unit(spec, 16)
    t = 1e-5

    def CA(Y):
        AY = dissolve(spec, Y)
        return AY.T @ spec.phi(AY) - np.eye(spec.p)

    fd = (CA(X + t * Z) - CA(X - t * Z)) / (2 * t)
    an = dCA(spec, X, Z)
    assert np.linalg.norm(fd - an) <= 1e-6 * max(1.0, np.linalg.norm(an))


# ------------------------------------------------------------ penalty value

def test_penalty_value_equals_objective_on_manifold(spec):
    prob = toy_problem(spec, 17)
    pf = PenaltyFunction(spec, prob, 0.7)
    X = spec.random_feasible(17).X
    np.testing.assert_allclose(pf.value(X), prob.f(X), rtol=1e-12)


def test_penalty_value_pure_feasibility_term(spec):
    zero = Problem(spec, lambda X: 0.0, lambda X: np.zeros_like(np.asarray(X)),
                   name="zero", check_gradient=False)
    pf = PenaltyFunction(spec, zero, 2.5)
    X = _near_point(spec, 18)
    C = X.T @ spec.phi(X) - np.eye(spec.p)
    np.testing.assert_allclose(pf.value(X), 1.25 * np.vdot(C, C), rtol=1e-12)


def test_penalty_decreases_under_dissolving_near_manifold(spec):
    prob = toy_problem(spec, 19)
    pf = PenaltyFunction(spec, prob, 50.0)
    Y = spec.random_feasible(19).X + 0.05 * _unit(spec, 20)
    assert pf.value(dissolve(spec, Y)) <= pf.value(Y) + 1e-12


def test_penalty_rejects_nonpositive_weight(spec):
    with pytest.raises(ValueError):
        PenaltyFunction(spec, toy_problem(spec, 0), 0.0)


# --------------------------------------------------------- penalty gradient

def test_penalty_gradient_matches_central_differences(spec):
    prob = toy_problem(spec, 21)
    pf = PenaltyFunction(spec, prob, 0.7)
    X = _near_point(spec, 21)
    g = pf.gradient(X)
    t = 1e-5
    for s in range(5):
        V = _unit(spec, 700 + s)
        fd = (pf.value(X + t * V) - pf.value(X - t * V)) / (2 * t)
        assert abs(fd - np.vdot(g, V)) <= 1e-6 * max(1.0, abs(fd))


def test_penalty_gradient_zero_objective_on_manifold(spec):
    zero = Problem(spec, lambda X: 0.0, lambda X: np.zeros_like(np.asarray(X)),
                   name="zero", check_gradient=False)
    pf = PenaltyFunction(spec, zero, 1.0)
    X = spec.random_feasible(22).X
    assert np.linalg.norm(pf.gradient(X)) <= 1e-10


def test_penalty_gradient_work_counters(spec):
    prob = toy_problem(spec, 23)
    pf = PenaltyFunction(spec, prob, 0.7)
    cache = EvalCache()
    X = _near_point(spec, 23)
    cache.reset_counts()
    penalty_gradient(pf, X, cache)
    assert cache.counts == {"matmul": 8, "phi": 3, "grad_f": 1, "f": 0}
    # value at the same point reuses everything but the objective call
    penalty_value(pf, X, cache)
    assert cache.counts == {"matmul": 8, "phi": 3, "grad_f": 1, "f": 1}
    # a repeat reuses the cached base and oracle calls; only assembly reruns
    penalty_gradient(pf, X, cache)
    assert cache.counts["matmul"] == 14 and cache.counts["grad_f"] == 1


def test_penalty_gradient_vanishes_iff_projected_gradient_does(spec):
    # drive the constrained problem to stationarity, then cross-check
    prob = toy_problem(spec, 24)
    pf = PenaltyFunction(spec, prob, 0.7)
    report = rgd(prob, spec, spec.random_feasible(24),
                 SolverConfig(grad_tol=1e-11, max_iter=20000))
    X = report.point.X
    rg = np.linalg.norm(riemannian_gradient(spec, report.point, prob.grad(X)))
    assert rg <= 1e-9
    assert np.linalg.norm(pf.gradient(X)) <= 1e-9


# ---------------------------------------------------------- penalty Hessian

def test_penalty_hessvec_zero_direction(spec):
    prob = toy_problem(spec, 25)
    pf = PenaltyFunction(spec, prob, 0.7)
    X = _near_point(spec, 25)
    np.testing.assert_allclose(pf.hessvec(X, np.zeros_like(X)), 0.0, atol=1e-14)


def test_penalty_hessvec_matches_fd_of_gradient(spec):
    prob = toy_problem(spec, 26)
    pf = PenaltyFunction(spec, prob, 0.7)
    X = _near_point(spec, 26)
    V = _unit(spec, 27)
    t = 1e-5
    fd = (pf.gradient(X + t * V) - pf.gradient(X - t * V)) / (2 * t)
    hv = pf.hessvec(X, V)
    assert np.linalg.norm(fd - hv) <= 1e-5 * max(1.0, np.linalg.norm(hv))


def test_penalty_hessvec_symmetric_form(spec):
    prob = toy_problem(spec, 28)
    pf = PenaltyFunction(spec, prob, 0.7)
    X = _near_point(spec, 28)
    for s in range(5):
        V1, V2 = _unit(spec, 800 + s), _unit(spec, 900 + s)
        lhs = np.vdot(V1, pf.hessvec(X, V2))
        rhs = np.vdot(V2, pf.hessvec(X, V1))
        assert abs(lhs - rhs) <= 1e-8 * max(1.0, abs(lhs))


def test_penalty_hessvec_zero_objective_reduction(spec):
    zero = Problem(spec, lambda X: 0.0, lambda X: np.zeros_like(np.asarray(X)),
                   hessvec=lambda X, V: np.zeros_like(np.asarray(V)),
                   name="zero", check_gradient=False)
    beta = 1.3
    pf = PenaltyFunction(spec, zero, beta)
    X = spec.random_feasible(29).X
    V = _unit(spec, 30)
    phiX, phiV = spec.phi(X), spec.phi(V)
    expected = beta * (phiX @ spec.gen_sym(V.T @ phiX) + phiX @ spec.gen_sym(X.T @ phiV))
    np.testing.assert_allclose(pf.hessvec(X, V), expected, atol=1e-10)


def test_penalty_hessvec_requires_hessian_oracle(spec):
    prob = Problem(spec, lambda X: 0.0, lambda X: np.zeros_like(np.asarray(X)),
                   name="gradonly", check_gradient=False)
    pf = PenaltyFunction(spec, prob, 1.0)
    with pytest.raises(UnsupportedOperation):
        pf.hessvec(spec.random_feasible(0).X, _unit(spec, 1))


# ------------------------------------------------------------ postprocessing

def test_postprocess_zero_rounds_when_feasible(spec):
    X = spec.random_feasible(31).X
    point, rounds = postprocess(spec, X, eps_f=1e-10)
    assert rounds == 0
    np.testing.assert_array_equal(point.X, X)


def test_postprocess_quadratic_rounds():
    spec = op.stiefel(10, 3)
    rng = np.random.default_rng(32)
    X = spec.random_feasible(32).X + 1e-3 * rng.standard_normal((10, 3))
    point, rounds = postprocess(spec, X, eps_f=1e-12)
    assert rounds <= 3
    assert point.feas < 1e-12


def test_postprocess_divergence_carries_trace(spec):
    X = 3.0 * spec.random_feasible(33).X
    with pytest.raises(PostprocessDivergence) as err:
        postprocess(spec, X, eps_f=1e-12, max_rounds=50)
    assert len(err.value.trace) >= 1


# --------------------------------------------------------- stationarity report

def test_stationarity_report_fields(spec):
    prob = toy_problem(spec, 34)
    pf = PenaltyFunction(spec, prob, 0.7)
    X = spec.random_feasible(34).X + 1e-4 * _unit(spec, 35)
    rep = stationarity_report(pf, X)
    assert rep["feas_post"] < 1e-12
    assert rep["grad_h"] >= 0 and rep["grad_f_post"] >= 0
    np.testing.assert_allclose(
        rep["feas"], np.linalg.norm(X.T @ spec.phi(X) - np.eye(spec.p)), rtol=1e-12)


def test_stationarity_lower_bound_inequality(spec):
    # ||grad h||^2 >= ||grad (f о dissolve)||^2 + (beta/9)||C|| near the manifold
    prob = toy_problem(spec, 36)
    beta = 1e4
    pf = PenaltyFunction(spec, prob, beta)
    rng = np.random.default_rng(36)
    for s in range(20):
        Y = spec.random_feasible(s).X + 1e-3 * _unit(spec, 1000 + s)
        C = Y.T @ spec.phi(Y) - np.eye(spec.p)
        gh = penalty_gradient(pf, Y)
        gg = gh - beta * dC_adjoint(spec, Y, C)
        assert np.vdot(gh, gh) >= np.vdot(gg, gg) + (beta / 9.0) * np.linalg.norm(C)
