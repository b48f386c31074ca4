"""Benchmark problem generators with objective / gradient / Hessian oracles.

Three families: a quadratic trace objective on symplectic frames, an
extrinsic-mean (matrix approximation) objective on indefinite frames, and a
joint diagonalization objective for stacks of third-order tensors under a
cosine-transform product.  Every generator is deterministic per seed (PCG64
streams) and checks its own gradient against central differences on
construction.
"""

import numpy as np

from .manifolds import IndefiniteStiefel, SymplecticStiefel, TensorStiefel, spec_from_record
from .tensor import qr_posdiag


class Problem:
    """Smooth objective attached to a manifold.

    f maps an ambient matrix to a scalar, grad returns the Euclidean
    gradient restricted to the structural subspace, hessvec (optional) the
    Euclidean Hessian action.
    """

    def __init__(self, spec, f, grad, hessvec=None, name="problem",
                 metadata=None, check_gradient=True, check_seed=1234):
        self.spec = spec
        self.f = f
        self.grad = grad
        self.hessvec = hessvec
        self.name = name
        self.metadata = dict(metadata or {})
        self.gradient_checked = False
        if check_gradient:
            self._check_gradient(check_seed)
            self.gradient_checked = True

    def _check_gradient(self, seed, points=5, step=1e-5, tol=1e-6):
        rng = np.random.default_rng(seed)
        for _ in range(points):
            X = self.spec.random_ambient(rng)
            X /= np.linalg.norm(X)
            V = self.spec.random_ambient(rng)
            V /= np.linalg.norm(V)
            fd = (self.f(X + step * V) - self.f(X - step * V)) / (2.0 * step)
            an = float(np.vdot(self.grad(X), V))
            if abs(fd - an) > tol * max(1.0, abs(fd)):
                raise ValueError(
                    f"{self.name}: gradient check failed ({an:.9e} vs fd {fd:.9e})")

    def __repr__(self):
        return f"Problem({self.name}, spec={self.spec!r})"


def build_lsm(n2, p2, seed=0, a=None, b=None):
    """Least-squares matching objective tr(X^T A X N) on symplectic frames.

    A = U diag(lambda) U^T with a random orthogonal U and decaying spectrum
    lambda_i = a^(1-i) + b; N is diagonal with mu_j = 0.1 exp(-j / p).  By
    default a > 1 and b in (0, 2) are drawn from the seed; both can be fixed
    explicitly, e.g. to put the instance in a strong-decay regime where the
    small default penalty weight is safely above its exactness threshold.
    """
    spec = SymplecticStiefel(n2, p2)
    rng = np.random.default_rng(seed)
    U, _ = qr_posdiag(rng.standard_normal((n2, n2)))
    a = 1.0 + rng.uniform(0.0, 1.0) if a is None else float(a)
    b = rng.uniform(0.0, 2.0) if b is None else float(b)
    if a <= 1.0 or b <= 0.0:
        raise ValueError("need decay base a > 1 and spectrum shift b > 0")
    lam = a ** (1.0 - np.arange(1.0, n2 + 1.0)) + b
    A = (U * lam) @ U.T
    A = 0.5 * (A + A.T)
    mu = 0.1 * np.exp(-np.arange(1.0, p2 + 1.0) / (p2 / 2.0))

    def f(X):
        return float(np.vdot(X, A @ X * mu))

    def grad(X):
        return 2.0 * (A @ X) * mu

    def hessvec(X, V):
        return 2.0 * (A @ V) * mu

    meta = {"problem": "lsm", "n": n2, "p": p2, "seed": seed, "a": a, "b": b,
            "beta_default": 0.012, "rng": "pcg64"}
    prob = Problem(spec, f, grad, hessvec, name="lsm", metadata=meta)
    prob.A = A
    prob.N_diag = mu
    return prob


def _block_diag2(W1, W2):
    p1, p2 = W1.shape[0], W2.shape[0]
    out = np.zeros((p1 + p2, p1 + p2))
    out[:p1, :p1] = W1
    out[p1:, p1:] = W2
    return out


def build_extrinsic_mean(n, p, k, p_k, n_samples=1000, seed=0):
    """Matrix approximation ||X - A||^2 on indefinite frames.

    The samples X_i orbit a feasible anchor under block-orthogonal right
    actions, so each stays feasible; A is their plain average, which in
    general leaves the feasible set.
    """
    spec = IndefiniteStiefel(n, p, k, p_k)
    p_m = p - p_k
    ss = np.random.SeedSequence(seed)
    seed_y0, seed_w = ss.spawn(2)
    Y0 = spec.random_feasible(seed_y0)
    rng = np.random.default_rng(seed_w)
    samples = np.empty((n_samples, n, p))
    for i in range(n_samples):
        W1 = qr_posdiag(rng.standard_normal((p_k, p_k)))[0] if p_k else np.zeros((0, 0))
        W2 = qr_posdiag(rng.standard_normal((p_m, p_m)))[0] if p_m else np.zeros((0, 0))
        samples[i] = Y0.X @ _block_diag2(W1, W2)
        resid = np.linalg.norm(samples[i].T @ spec.phi(samples[i]) - np.eye(p))
        if resid > 1e-10:
            raise ValueError(f"sample {i} infeasible with residual {resid:.2e}")
    A = samples.mean(axis=0)

    def f(X):
        d = X - A
        return float(np.vdot(d, d))

    def grad(X):
        return 2.0 * (X - A)

    def hessvec(X, V):
        return 2.0 * np.asarray(V, dtype=float)

    meta = {"problem": "extrinsic-mean", "n": n, "p": p, "k": k, "p_k": p_k,
            "samples": n_samples, "seed": seed, "beta_default": 0.5, "rng": "pcg64"}
    prob = Problem(spec, f, grad, hessvec, name="extrinsic-mean", metadata=meta)
    prob.samples = samples
    prob.anchor = Y0
    prob.mean = A
    return prob


def _offdiag(M):
    return M - np.diag(np.diag(M))


def build_tensor_jfd(n, p, l, n_samples=10, gamma=0.5, seed=0, transform=None):
    """Joint diagonalization of tensor stacks under a cosine-transform product.

    Sample tensors are congruences of diagonal-slice cores by a shared
    orthogonal tensor, plus unit-norm noise scaled by gamma.  Everything is
    evaluated on the block-unfolded transform-domain matrices, where the
    objective is the squared off-diagonal mass of X^T D_i X.
    """
    if gamma < 0:
        raise ValueError("noise level must be nonnegative")
    spec = TensorStiefel(n, p, l, transform=transform)
    ss = np.random.SeedSequence(seed)
    seed_u, seed_d = ss.spawn(2)
    U = spec.random_feasible(seed_u)
    rng = np.random.default_rng(seed_d)
    ln = spec.n
    mats = np.zeros((n_samples, ln, ln))
    for i in range(n_samples):
        for kk in range(l):
            Uk = U.X[kk * n:(kk + 1) * n, kk * p:(kk + 1) * p]
            core = rng.standard_normal(p)
            mats[i, kk * n:(kk + 1) * n, kk * n:(kk + 1) * n] = (Uk * core) @ Uk.T
        noise = np.zeros((ln, ln))
        for kk in range(l):
            noise[kk * n:(kk + 1) * n, kk * n:(kk + 1) * n] = rng.standard_normal((n, n))
        if gamma > 0:
            mats[i] += gamma * noise / np.linalg.norm(noise)

    def f(X):
        total = 0.0
        for D in mats:
            O = _offdiag(X.T @ (D @ X))
            total += float(np.vdot(O, O))
        return total

    def grad(X):
        out = np.zeros_like(X)
        for D in mats:
            DX = D @ X
            DtX = D.T @ X
            O = _offdiag(X.T @ DX)
            out += 2.0 * (DtX @ O + DX @ O.T)
        return out

    def hessvec(X, V):
        out = np.zeros_like(np.asarray(V, dtype=float))
        for D in mats:
            DX, DV = D @ X, D @ V
            DtX, DtV = D.T @ X, D.T @ V
            O = _offdiag(X.T @ DX)
            Od = _offdiag(V.T @ DX + X.T @ DV)
            out += 2.0 * (DtV @ O + DtX @ Od + DV @ O.T + DX @ Od.T)
        return out

    meta = {"problem": "tensor-jfd", "n": n, "p": p, "l": l, "samples": n_samples,
            "gamma": gamma, "seed": seed, "beta_default": 0.8, "rng": "pcg64",
            "transform": "dct" if transform is None else "custom"}
    prob = Problem(spec, f, grad, hessvec, name="tensor-jfd", metadata=meta)
    prob.exact_point = U
    prob.sample_mats = mats
    return prob


def toy_problem(spec, seed=0):
    """Smooth nonquadratic objective usable on any manifold (for checks)."""
    rng = np.random.default_rng(seed)
    A0 = spec.random_ambient(rng)
    A0 /= np.linalg.norm(A0)

    def f(X):
        r = X - A0
        return 0.5 * float(np.vdot(r, r)) + 0.25 * float(np.vdot(X, X)) ** 2

    def grad(X):
        return (X - A0) + float(np.vdot(X, X)) * X

    def hessvec(X, V):
        V = np.asarray(V, dtype=float)
        return V + 2.0 * float(np.vdot(X, V)) * X + float(np.vdot(X, X)) * V

    return Problem(spec, f, grad, hessvec, name="toy",
                   metadata={"problem": "toy", "seed": seed})


def build_zero(record):
    """Constant-zero objective on any manifold named by a plain record."""
    rec = {k: v for k, v in record.items() if k not in ("id",)}
    rec.setdefault("name", "stiefel")
    spec = spec_from_record(rec)

    def f(X):
        return 0.0

    def grad(X):
        return np.zeros_like(np.asarray(X, dtype=float))

    def hessvec(X, V):
        return np.zeros_like(np.asarray(V, dtype=float))

    meta = {"problem": "zero", "seed": int(record.get("seed", 0)),
            "n": spec.n, "p": spec.p, "beta_default": 1.0, "rng": "pcg64"}
    return Problem(spec, f, grad, hessvec, name="zero", metadata=meta,
                   check_gradient=False)


PROBLEM_BUILDERS = {
    "lsm": lambda d: build_lsm(d["n"], d["p"], d.get("seed", 0),
                               a=d.get("a"), b=d.get("b")),
    "extrinsic-mean": lambda d: build_extrinsic_mean(
        d["n"], d["p"], d["k"], d["p_k"], d.get("samples", 1000), d.get("seed", 0)),
    "tensor-jfd": lambda d: build_tensor_jfd(
        d["n"], d["p"], d["l"], d.get("samples", 10), d.get("gamma", 0.5), d.get("seed", 0)),
    "zero": build_zero,
}
