import numpy as np
import pytest

import orthopt as op
from orthopt.solvers import (
    STATUS_GRAD_TOL,
    STATUS_LS_FAIL,
    STATUS_TIME_LIMIT,
    FunctionOracle,
    PenaltyOracle,
    SolverConfig,
    cg,
    gd_bb,
    lbfgs,
    rcg,
    rgd,
    run_solver,
    trust_ncg,
)

EUCLIDEAN = [gd_bb, cg, lbfgs, trust_ncg]
RIEMANNIAN = [rgd, rcg]


def quad_oracle(H):
    H = np.asarray(H, dtype=float)
    return FunctionOracle(lambda x: 0.5 * float(x @ H @ x),
                          lambda x: H @ x,
                          lambda x, v: H @ v)


def rosen_oracle():
    def f(x):
        return (1 - x[0]) ** 2 + 100 * (x[1] - x[0] ** 2) ** 2

    def g(x):
        return np.array([-2 * (1 - x[0]) - 400 * x[0] * (x[1] - x[0] ** 2),
                         200 * (x[1] - x[0] ** 2)])

    return FunctionOracle(f, g)


def lsm_desk(beta=0.5, seed=0):
    prob = op.build_lsm(20, 4, seed=seed)
    return op.PenaltyFunction(prob.spec, prob, beta), prob


# ------------------------------------------------------------- basic trios

def test_gd_bb_unit_quadratic_fast():
    r = gd_bb(quad_oracle(np.eye(4)), np.full(4, 2.0), SolverConfig(grad_tol=1e-8))
    assert r.status == STATUS_GRAD_TOL and r.iters <= 5
    np.testing.assert_allclose(r.X, 0.0, atol=1e-7)


def test_gd_bb_ill_conditioned_quadratic():
    H = np.diag([1.0, 100.0])
    r = gd_bb(quad_oracle(H), np.array([1.0, 1.0]),
              SolverConfig(grad_tol=1e-9, max_iter=200))
    assert r.status == STATUS_GRAD_TOL and r.iters <= 200


def test_cg_finite_termination_on_spd_quadratic():
    rng = np.random.default_rng(0)
    M = rng.standard_normal((5, 5))
    H = M @ M.T + 5 * np.eye(5)
    r = cg(quad_oracle(H), rng.standard_normal(5), SolverConfig(grad_tol=1e-8))
    assert r.status == STATUS_GRAD_TOL and r.iters <= 5


def test_cg_rosenbrock():
    r = cg(rosen_oracle(), np.array([-1.2, 1.0]),
           SolverConfig(grad_tol=1e-8, max_iter=5000))
    np.testing.assert_allclose(r.X, [1.0, 1.0], atol=1e-6)


def test_lbfgs_quadratic():
    rng = np.random.default_rng(1)
    M = rng.standard_normal((6, 6))
    H = M @ M.T + 4 * np.eye(6)
    r = lbfgs(quad_oracle(H), rng.standard_normal(6), SolverConfig(grad_tol=1e-8))
    assert r.status == STATUS_GRAD_TOL and r.iters <= 30


def test_lbfgs_rosenbrock():
    r = lbfgs(rosen_oracle(), np.array([-1.2, 1.0]),
              SolverConfig(grad_tol=1e-8, max_iter=5000))
    np.testing.assert_allclose(r.X, [1.0, 1.0], atol=1e-6)


def test_trust_ncg_single_step_inside_radius():
    H = np.diag([1.0, 2.0, 3.0])
    x0 = np.full(3, 0.3)   # minimizer within the initial radius
    r = trust_ncg(quad_oracle(H), x0, SolverConfig(grad_tol=1e-8))
    assert r.status == STATUS_GRAD_TOL and r.iters == 1


def test_trust_ncg_rosenbrock_with_fd_fallback():
    r = trust_ncg(rosen_oracle(), np.array([-1.2, 1.0]),
                  SolverConfig(grad_tol=1e-7, max_iter=500))
    np.testing.assert_allclose(r.X, [1.0, 1.0], atol=1e-5)


@pytest.mark.parametrize("solver_id", ["cdf-gd", "cdf-cg", "cdf-lbfgs", "cdf-tr"])
def test_cdf_solvers_on_desk_instance(solver_id):
    pf, prob = lsm_desk()
    x0 = prob.spec.random_feasible(3)
    r = run_solver(solver_id, pf, x0, SolverConfig(grad_tol=1e-5, max_iter=50000))
    assert r.status == STATUS_GRAD_TOL
    assert r.grad_norm <= 1e-5
    if solver_id == "cdf-tr":
        assert r.iters <= 40   # outer iterations only
    point, _ = op.postprocess(prob.spec, r.X, eps_f=1e-12)
    assert point.feas <= 1e-10


# -------------------------------------------------------- Riemannian solvers

def test_rgd_constant_objective_stops_immediately():
    spec = op.stiefel(6, 2)
    prob = op.Problem(spec, lambda X: 1.0, lambda X: np.zeros_like(np.asarray(X)),
                      name="const", check_gradient=False)
    r = rgd(prob, spec, spec.random_feasible(0), SolverConfig(grad_tol=1e-6))
    assert r.status == STATUS_GRAD_TOL and r.iters == 0


def test_rgd_rayleigh_quotient_reaches_smallest_eigenvalues():
    rng = np.random.default_rng(2)
    spec = op.stiefel(8, 2)
    M = rng.standard_normal((8, 8))
    A = M @ M.T

    prob = op.Problem(spec, lambda X: float(np.vdot(X, A @ X)),
                      lambda X: 2.0 * (A @ X), name="rayleigh")
    r = rgd(prob, spec, spec.random_feasible(4), SolverConfig(grad_tol=1e-9, max_iter=20000))
    target = np.sort(np.linalg.eigvalsh(A))[:2].sum()
    np.testing.assert_allclose(r.fval, target, atol=1e-8)


def test_rcg_rayleigh_quotient_reaches_smallest_eigenvalues():
    rng = np.random.default_rng(3)
    spec = op.stiefel(8, 2)
    M = rng.standard_normal((8, 8))
    A = M @ M.T
    prob = op.Problem(spec, lambda X: float(np.vdot(X, A @ X)),
                      lambda X: 2.0 * (A @ X), name="rayleigh")
    r = rcg(prob, spec, spec.random_feasible(5), SolverConfig(grad_tol=1e-9, max_iter=20000))
    target = np.sort(np.linalg.eigvalsh(A))[:2].sum()
    np.testing.assert_allclose(r.fval, target, atol=1e-8)


def test_riemannian_iterates_stay_feasible():
    pf, prob = lsm_desk()
    x0 = prob.spec.random_feasible(6)
    for fn in RIEMANNIAN:
        r = fn(prob, prob.spec, x0, SolverConfig(grad_tol=1e-5, max_iter=20000))
        assert r.status == STATUS_GRAD_TOL
        assert max(row[3] for row in r.trace) <= 1e-9


def test_cross_solver_objective_agreement_on_extrinsic_mean():
    prob = op.build_extrinsic_mean(20, 3, k=12, p_k=2, n_samples=50, seed=1)
    pf = op.PenaltyFunction(prob.spec, prob, 0.5)
    x0 = prob.spec.random_feasible(7)
    vals = []
    for sid in ("cdf-lbfgs", "rgd", "rcg"):
        r = run_solver(sid, pf, x0, SolverConfig(grad_tol=1e-7, max_iter=50000))
        if sid.startswith("cdf"):
            point, _ = op.postprocess(prob.spec, r.X, eps_f=1e-12)
            vals.append(prob.f(point.X))
        else:
            vals.append(r.fval)
    spread = max(vals) - min(vals)
    assert spread <= 1e-6 * (1.0 + abs(vals[0]))


# ------------------------------------------------------------- housekeeping

def test_deterministic_traces():
    pf, prob = lsm_desk()
    x0 = prob.spec.random_feasible(8)
    cfg = SolverConfig(grad_tol=1e-5, max_iter=20000)
    for sid in ("cdf-gd", "cdf-cg", "cdf-lbfgs", "cdf-tr", "rgd", "rcg"):
        r1 = run_solver(sid, pf, x0, cfg)
        r2 = run_solver(sid, pf, x0, cfg)
        t1 = [row[:4] for row in r1.trace]
        t2 = [row[:4] for row in r2.trace]
        assert t1 == t2, sid
        np.testing.assert_array_equal(r1.X, r2.X)


def test_cdf_solvers_never_touch_retraction_or_transport():
    pf, prob = lsm_desk()
    x0 = prob.spec.random_feasible(9)
    for sid in ("cdf-gd", "cdf-cg", "cdf-lbfgs", "cdf-tr"):
        r = run_solver(sid, pf, x0, SolverConfig(grad_tol=1e-4, max_iter=5000))
        assert r.phase_counts["retraction"] == 0
        assert r.phase_counts["transport"] == 0
        assert r.phase_seconds["retraction"] == 0.0
        assert r.phase_seconds["transport"] == 0.0


def test_riemannian_solvers_do_use_retraction_and_transport():
    pf, prob = lsm_desk()
    x0 = prob.spec.random_feasible(10)
    for fn in RIEMANNIAN:
        r = fn(prob, prob.spec, x0, SolverConfig(grad_tol=1e-4, max_iter=5000))
        assert r.phase_counts["retraction"] > 0
        assert r.phase_counts["transport"] > 0


def test_grad_norm_matches_trace_tail():
    pf, prob = lsm_desk()
    x0 = prob.spec.random_feasible(11)
    for sid in ("cdf-gd", "cdf-cg", "cdf-lbfgs", "cdf-tr", "rgd", "rcg"):
        r = run_solver(sid, pf, x0, SolverConfig(grad_tol=1e-5, max_iter=20000))
        assert abs(r.grad_norm - r.trace[-1][2]) <= 1e-12 * max(1.0, r.grad_norm)


def test_stationarity_report_matches_solver_trace_tail():
    pf, prob = lsm_desk()
    x0 = prob.spec.random_feasible(14)
    r = run_solver("cdf-lbfgs", pf, x0, SolverConfig(grad_tol=1e-6, max_iter=20000))
    rep = op.stationarity_report(pf, r.X)
    np.testing.assert_allclose(rep["grad_h"], r.trace[-1][2], rtol=1e-12)
    np.testing.assert_allclose(rep["feas"], r.trace[-1][3], rtol=1e-9, atol=1e-15)
    assert rep["grad_f_post"] <= 10 * r.grad_norm + 1e-8


def test_merit_sequence_nonincreasing():
    pf, prob = lsm_desk()
    x0 = prob.spec.random_feasible(12)
    r = gd_bb(PenaltyOracle(pf), x0.X, SolverConfig(grad_tol=1e-5, max_iter=20000))
    hs = [row[1] for row in r.trace]
    eta, C, Q = 0.85, hs[0], 1.0
    for h in hs[1:]:
        Qn = eta * Q + 1.0
        Cn = (eta * Q * C + h) / Qn
        assert Cn <= C + 1e-12 * max(1.0, abs(C))
        C, Q = Cn, Qn


def test_phase_seconds_bounded_by_total():
    pf, prob = lsm_desk()
    x0 = prob.spec.random_feasible(13)
    r = run_solver("rgd", pf, x0, SolverConfig(grad_tol=1e-5, max_iter=5000))
    assert sum(r.phase_seconds.values()) <= r.total_time + 1e-6


def test_line_search_failure_is_a_status():
    def f(x):
        return float(x[0]) if x[0] >= 0 else float("nan")

    def g(x):
        return np.ones(1)

    r = gd_bb(FunctionOracle(f, g), np.zeros(1), SolverConfig(grad_tol=1e-10, max_iter=50))
    assert r.status == STATUS_LS_FAIL


def test_time_limit_status():
    orc = quad_oracle(np.eye(3))
    r = gd_bb(orc, np.full(3, 5.0), SolverConfig(grad_tol=1e-16, time_limit=1e-9))
    assert r.status == STATUS_TIME_LIMIT


def test_unknown_solver_id_raises():
    pf, prob = lsm_desk()
    with pytest.raises(KeyError):
        run_solver("newton", pf, prob.spec.random_feasible(0))


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(max_iter=0)
    with pytest.raises(ValueError):
        SolverConfig(bb_min=1.0, bb_max=0.5)
