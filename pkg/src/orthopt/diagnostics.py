"""Invariant battery over all manifold families, shared by the CLI selftest."""

import time

import numpy as np

from . import manifolds as mf
from .penalty import PenaltyFunction, dA, dA_adjoint, dC, dC_adjoint, dCA, dissolve, penalty_gradient
from .problems import toy_problem


def desk_specs(seed=0):
    """One small instance of each manifold family."""
    return [
        mf.stiefel(8, 3),
        mf.generalized_stiefel(8, 3, seed=seed),
        mf.symplectic_stiefel(8, 4),
        mf.indefinite_stiefel(9, 3, k=5, p_k=2),
        mf.hyperbolic(8, 3, neg=3, seed=seed),
        mf.tensor_stiefel(4, 2, 3),
    ]


def _unit(rng, spec):
    V = spec.random_ambient(rng)
    return V / np.linalg.norm(V)


def check_assumptions(spec, trials=50, seed=0, tol=1e-12):
    """Self-adjointness of phi and the two psi compatibility identities."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        X, Y = _unit(rng, spec), _unit(rng, spec)
        T = spec.random_gram(rng)
        T /= np.linalg.norm(T)
        sa = abs(np.vdot(spec.phi(X), Y) - np.vdot(X, spec.phi(Y)))
        compat = np.linalg.norm(spec.phi(X @ T) - spec.phi(X) @ spec.psi(T))
        closure = np.linalg.norm(spec.psi(spec.phi(X).T @ X) - X.T @ spec.phi(X))
        inF = spec.subspace_residual(X @ T)
        worst = max(worst, sa, compat, closure, inF)
    return worst <= tol, worst


def check_constraint_in_s1(spec, trials=20, seed=1, tol=1e-12):
    """The constraint residual always lies in the span of the S1 basis."""
    rng = np.random.default_rng(seed)
    basis = spec.s1_basis()
    worst = 0.0
    for _ in range(trials):
        X = _unit(rng, spec)
        C = X.T @ spec.phi(X) - np.eye(spec.p)
        coords = np.tensordot(basis, C, axes=([1, 2], [0, 1]))
        recon = np.tensordot(coords, basis, axes=(0, 0))
        worst = max(worst, np.linalg.norm(recon - C) / max(np.linalg.norm(C), 1e-30))
    return worst <= tol, worst


def check_dissolving(spec, trials=20, seed=2, tol=1e-11):
    """Fixed point on the manifold and vanishing composite differential."""
    rng = np.random.default_rng(seed)
    point = spec.random_feasible(seed)
    X = point.X
    worst = max(np.linalg.norm(dissolve(spec, X) - X) / np.linalg.norm(X), 0.0)
    for _ in range(trials):
        Z = _unit(rng, spec)
        worst = max(worst, np.linalg.norm(dCA(spec, X, Z)))
    return worst <= tol, worst


def check_idempotence(spec, trials=20, seed=3, tol=1e-11):
    rng = np.random.default_rng(seed)
    X = spec.random_feasible(seed).X
    worst = 0.0
    for _ in range(trials):
        Z = _unit(rng, spec)
        DZ = dA(spec, X, Z)
        worst = max(worst, np.linalg.norm(dA(spec, X, DZ) - DZ))
        T = _unit(rng, spec)
        DT = dA_adjoint(spec, X, T)
        worst = max(worst, np.linalg.norm(dA_adjoint(spec, X, DT) - DT))
    return worst <= tol, worst


def check_adjoint_pairs(spec, trials=20, seed=4, tol=1e-11):
    rng = np.random.default_rng(seed)
    X = _unit(rng, spec) + spec.random_feasible(seed).X
    worst = 0.0
    for _ in range(trials):
        Z = _unit(rng, spec)
        T = spec.random_gram(rng)
        T /= np.linalg.norm(T)
        lhs = np.vdot(dC(spec, X, Z), T)
        rhs = np.vdot(Z, dC_adjoint(spec, X, T))
        worst = max(worst, abs(lhs - rhs))
        W = _unit(rng, spec)
        lhs = np.vdot(dA(spec, X, Z), W)
        rhs = np.vdot(Z, dA_adjoint(spec, X, W))
        worst = max(worst, abs(lhs - rhs))
    return worst <= tol, worst


def check_contraction_slope(spec, seed=5, lo=1.8, hi=2.2):
    """Constraint residual after dissolving shrinks quadratically."""
    rng = np.random.default_rng(seed)
    X = spec.random_feasible(seed).X
    Z = _unit(rng, spec)
    xs, ys = [], []
    for t in (1e-1, 1e-2, 1e-3):
        Y = X + t * Z
        c0 = np.linalg.norm(Y.T @ spec.phi(Y) - np.eye(spec.p))
        c1 = np.linalg.norm(dissolve(spec, Y).T @ spec.phi(dissolve(spec, Y)) - np.eye(spec.p))
        xs.append(np.log(c0))
        ys.append(np.log(c1))
    slope = np.polyfit(xs, ys, 1)[0]
    return lo <= slope <= hi, slope


def check_penalty_gradient_fd(spec, seed=6, beta=0.7, tol=1e-6):
    """Analytic penalty gradient against central differences."""
    problem = toy_problem(spec, seed)
    pf = PenaltyFunction(spec, problem, beta)
    rng = np.random.default_rng(seed)
    X = _unit(rng, spec) + spec.random_feasible(seed).X
    g = penalty_gradient(pf, X)
    worst = 0.0
    for _ in range(5):
        V = _unit(rng, spec)
        fd = (pf.value(X + 1e-5 * V) - pf.value(X - 1e-5 * V)) / 2e-5
        an = float(np.vdot(g, V))
        worst = max(worst, abs(fd - an) / max(1.0, abs(fd)))
    return worst <= tol, worst


CHECKS = [
    ("assumption identities", check_assumptions),
    ("constraint in S1 span", check_constraint_in_s1),
    ("dissolving fixed point", check_dissolving),
    ("differential idempotence", check_idempotence),
    ("adjoint pairings", check_adjoint_pairs),
    ("quadratic contraction", check_contraction_slope),
    ("penalty gradient FD", check_penalty_gradient_fd),
]


def run_selftest(stream=None, seed=0):
    """Run the battery over every desk-scale family; returns overall success."""
    def emit(line):
        if stream is not None:
            stream.write(line + "\n")
    ok_all = True
    t0 = time.perf_counter()
    for name, fn in CHECKS:
        for spec in desk_specs(seed):
            ok, value = fn(spec)
            ok_all &= ok
            emit(f"[{'PASS' if ok else 'FAIL'}] {name:<26} {spec.name:<20} ({value:.3e})")
    emit(f"selftest {'passed' if ok_all else 'FAILED'} in {time.perf_counter() - t0:.2f}s")
    return ok_all
