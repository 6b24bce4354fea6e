"""Perron-Frobenius machinery for irreducible nonnegative matrices.

Classical power iteration with sup-norm normalization, plus the two
Collatz-Weilandt functionals

    cw_lower(Q, x) = min_{i: x_i > 0} (Qx)_i / x_i   <=  lambda,
    cw_upper(Q, x) = max_i (Qx)_i / x_i              >=  lambda,

which sandwich the principal eigenvalue for every admissible test vector
and collapse to it at the Perron vector.  This module doubles as the
oracle for the abstract cone iteration and as the inner linear
eigensolver of policy iteration.

Periodic (e.g. bipartite) matrices make plain power iteration oscillate;
:func:`perron` then raises :class:`NoConvergence` and the caller should
retry on ``Q + c*I`` (the shift preserves eigenvectors and adds ``c`` to
the eigenvalue).
"""

from __future__ import annotations

from collections import deque

import numpy as np

from .errors import NoConvergence, NonPositiveInput, NotIrreducible, ValidationError, ZeroVector

__all__ = ["perron", "cw_lower", "cw_upper", "is_irreducible"]


def _check_matrix(m) -> np.ndarray:
    q = np.asarray(m, dtype=float)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise ValidationError(f"matrix must be square, got shape {q.shape}")
    if not np.isfinite(q).all():
        raise ValidationError("matrix contains non-finite entries")
    if np.min(q) < 0:
        raise ValidationError("matrix must be entrywise nonnegative")
    return q


def _reaches_all(adj: np.ndarray) -> bool:
    n = adj.shape[0]
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for j in np.flatnonzero(adj[i] & ~seen):
            seen[j] = True
            queue.append(j)
    return bool(seen.all())


def is_irreducible(m) -> bool:
    """Strong connectivity of the support graph (two breadth-first passes)."""
    q = _check_matrix(m)
    adj = q > 0
    return _reaches_all(adj) and _reaches_all(adj.T)


def perron(m, tol: float = 1e-12, max_iters: int = 200_000):
    """Principal eigenpair of an irreducible nonnegative matrix.

    Power iteration with sup-norm normalization; the eigenvalue estimate
    is the Collatz-Weilandt upper functional ``max_i (Qx)_i/x_i``, so the
    running estimates are upper bounds.  Returns ``(lam, x)`` with
    ``||Q x - lam x||_inf <= tol * lam``, ``x > 0`` and ``||x||_inf = 1``.

    Raises :class:`NotIrreducible` for reducible support, and
    :class:`NoConvergence` when the iteration stalls, which signals a
    periodic matrix: retry on the shifted matrix ``Q + c*I`` and subtract
    ``c`` from the eigenvalue.
    """
    q = _check_matrix(m)
    if not is_irreducible(q):
        raise NotIrreducible("support graph is not strongly connected")
    if tol <= 0:
        raise ValidationError("tol must be positive")
    n = q.shape[0]
    x = np.ones(n)
    lam = float(np.max(q.sum(axis=1)))
    for _ in range(max_iters):
        y = q @ x
        lam = float(np.max(y / x))
        if np.max(np.abs(y - lam * x)) <= tol * lam:
            return lam, x
        x = y / np.max(y)
    raise NoConvergence(
        f"power iteration stalled after {max_iters} iterations; the matrix "
        "is likely periodic, retry on Q + c*I and subtract c",
        best=(lam, x))


def cw_lower(m, x) -> float:
    """Lower Collatz-Weilandt functional ``min_{i: x_i>0} (Qx)_i/x_i``.

    Valid for any nonnegative nonzero ``x``; never exceeds the principal
    eigenvalue.  Exactly invariant under positive scaling of ``x``.
    """
    q = _check_matrix(m)
    x = np.asarray(x, dtype=float)
    if np.min(x) < 0:
        raise NonPositiveInput("x must be nonnegative")
    support = x > 0
    if not support.any():
        raise ZeroVector("x must be nonzero")
    y = q @ x
    return float(np.min(y[support] / x[support]))


def cw_upper(m, x) -> float:
    """Upper Collatz-Weilandt functional ``max_i (Qx)_i/x_i``.

    Requires strictly positive ``x``; never falls below the principal
    eigenvalue.
    """
    q = _check_matrix(m)
    x = np.asarray(x, dtype=float)
    if np.min(x) <= 0:
        raise NonPositiveInput("x must be strictly positive")
    y = q @ x
    return float(np.max(y / x))
