"""Joint f-diagonalization of third-order tensor stacks.

Sample tensors are congruences of diagonal-slice cores by one shared
orthogonal tensor (plus optional noise).  The variable lives on the tensor
frame manifold under a cosine-transform product, handled through its
block-unfolded matrix representation so the generic machinery applies.
"""

import numpy as np

import orthopt as op
from orthopt.solvers import SolverConfig, run_solver

n, p, l, N = 20, 3, 4, 5

print("=== noiseless stack: an exact joint diagonalizer exists ===")
prob = op.build_tensor_jfd(n, p, l, n_samples=N, gamma=0.0, seed=1)
print(f"objective at the planted diagonalizer: {prob.f(prob.exact_point.X):.2e}")

pf = op.PenaltyFunction(prob.spec, prob, beta=0.8)
x0 = prob.spec.random_feasible(5)
print(f"objective at a random frame:           {prob.f(x0.X):.4f}")
r = run_solver("cdf-lbfgs", pf, x0, SolverConfig(grad_tol=1e-9))
point, _ = op.postprocess(prob.spec, r.X, eps_f=1e-12)
print(f"cdf-lbfgs: {r.iters} iterations -> off-diagonal mass {prob.f(point.X):.2e}, "
      f"feasibility {point.feas:.2e}")

print("\n=== noisy stack (unit-norm noise scaled by gamma = 0.5) ===")
prob = op.build_tensor_jfd(n, p, l, n_samples=N, gamma=0.5, seed=1)
pf = op.PenaltyFunction(prob.spec, prob, beta=0.8)
x0 = prob.spec.random_feasible(5)
for sid in ("cdf-lbfgs", "cdf-gd", "rgd"):
    r = run_solver(sid, pf, x0, SolverConfig(grad_tol=1e-5))
    if sid.startswith("cdf"):
        pt, _ = op.postprocess(prob.spec, r.X, eps_f=1e-12)
        fval, feas = prob.f(pt.X), pt.feas
    else:
        fval, feas = r.fval, r.feas_norm
    print(f"{sid:<10} iters {r.iters:4d}  off-diagonal mass {fval:.2e}  "
          f"feasibility {feas:.2e}")

print("\nat this size the stack still admits near-exact diagonalization, so")
print("the objective drops to the tolerance floor even with noise present")

# round-trip between the tensor and its block-unfolded representation
spec = prob.spec
X3 = spec.extract_tensor(x0.X)
back = spec.embed_tensor(X3)
print(f"\ntensor <-> unfolded round trip error: {np.linalg.norm(back - x0.X):.2e}")
