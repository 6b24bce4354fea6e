"""Perron pairs of nonnegative matrices and the Collatz-Weilandt sandwich.

The principal eigenvalue of an irreducible nonnegative matrix is bracketed
by the extremes of the componentwise ratios (Qx)_i / x_i for any positive
test vector x, and the bracket collapses at the Perron vector.  The same
mechanism drives everything else in this library, one level up.
"""

import numpy as np

from nisio import cw_lower, cw_upper, perron

rng = np.random.default_rng(0)

q = np.array([[1.0, 2.0, 0.0],
              [0.5, 0.0, 1.0],
              [1.0, 0.3, 0.2]])
lam, x = perron(q, tol=1e-13)
print("matrix:\n", q)
print(f"perron eigenvalue lambda = {lam:.12f}")
print(f"perron vector x          = {np.array2string(x, precision=6)}")
print(f"dense oracle             = {np.max(np.linalg.eigvals(q).real):.12f}")

print("\nsandwich bounds for random positive test vectors:")
for k in range(5):
    v = rng.uniform(0.1, 1.0, 3)
    lo, hi = cw_lower(q, v), cw_upper(q, v)
    print(f"  v{k}: {lo:.4f} <= {lam:.4f} <= {hi:.4f}   (gap {hi - lo:.4f})")

lo, hi = cw_lower(q, x), cw_upper(q, x)
print(f"\nat the Perron vector the bracket closes: gap = {hi - lo:.2e}")

print("\nperiodic matrices stall plain power iteration; shift and retry:")
p = np.array([[0.0, 1.0], [2.0, 0.0]])
lam_shift, _ = perron(p + np.eye(2))
print(f"  perron(P + I) - 1 = {lam_shift - 1:.12f}  (exact sqrt(2) = {np.sqrt(2):.12f})")
