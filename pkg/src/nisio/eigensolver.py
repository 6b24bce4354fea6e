"""Principal eigenpair of the discrete envelope operator.

Two independent routes compute the pair ``(rho, phi)`` with
``G phi = rho phi``, ``phi > 0``, ``||phi||_inf = 1``:

* :func:`solve_evolution` runs the normalized cone iteration with one
  explicit Euler step of the semigroup as the map (the step's principal
  growth factor is ``1 + dt * rho``, and its eigenvector is ``phi``
  itself).  The eigenvalue is read off the converged iterate as the
  midpoint of the Collatz-Weilandt band ``[min Gphi/phi, max Gphi/phi]``,
  which contains the true discrete eigenvalue, so the band width bounds
  the residual.
* :func:`solve_policy_iteration` alternates a Perron solve for the frozen
  policy (on the shifted nonnegative matrix ``c I + A_u``) with a greedy
  policy update, keeping the whole chain monotone-matrix-theoretic.

:func:`solve_max` runs the same algorithms with the pointwise maximum
over controls and returns the companion pair ``(beta, psi)``; for
minimization problems ``beta >= rho`` always.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .cone import OrbitStats, power_iterate
from .errors import CycleDetected, NoConvergence, ValidationError
from .generator import (
    DiscreteGenerator,
    MAXIMIZE,
    MINIMIZE,
    apply_G,
    argmin_policy,
)
from .grid import GridFunction
from .perron import perron
from .semigroup import _step_with

__all__ = ["EigenPair", "SolveOptions", "solve_evolution",
           "solve_policy_iteration", "solve_max"]


@dataclass(frozen=True)
class SolveOptions:
    """Tolerances and budgets for the eigensolvers.

    ``tol`` bounds the sup-norm eigen-residual ``||G phi - rho phi||_inf``
    of the returned pair.  ``dt`` overrides the evolution step (must obey
    the CFL bound); by default ``dt_factor`` of the bound is used.
    """

    tol: float = 1e-9
    max_iters: int = 5_000_000
    dt: float | None = None
    dt_factor: float = 0.9
    f0: np.ndarray | None = None
    max_policy_iters: int = 100
    inner_tol: float = 1e-13
    tie_tol: float = 1e-12
    collect_p1: bool = False

    def __post_init__(self):
        if self.tol <= 0:
            raise ValidationError("tol must be positive")
        if not (0 < self.dt_factor <= 1):
            raise ValidationError("dt_factor must be in (0, 1]")


@dataclass
class EigenPair:
    """Eigenpair ``G phi = rho phi`` with diagnostics.

    ``phi`` is strictly positive with sup norm one; ``residual`` is the
    achieved ``||G phi - rho phi||_inf``; ``policy`` the per-node control
    index attaining the envelope at ``phi``.
    """

    rho: float
    phi: GridFunction
    policy: np.ndarray
    residual: float
    method: str
    sense: str
    stats: OrbitStats | None = None
    policy_iterations: int = 0


def _finish(gen: DiscreteGenerator, rho: float | None, phi: np.ndarray,
            method: str, stats=None, policy_iterations: int = 0) -> EigenPair:
    phi = phi / np.max(phi)
    gphi = apply_G(gen, phi)
    if rho is None:
        # midpoint of the Collatz-Weilandt band at phi; the band contains
        # the true discrete eigenvalue, so this minimizes the residual
        ratios = gphi / phi
        rho = 0.5 * (float(np.min(ratios)) + float(np.max(ratios)))
    policy = argmin_policy(gen, phi)
    residual = float(np.max(np.abs(gphi - rho * phi)))
    return EigenPair(rho=float(rho), phi=phi, policy=policy,
                     residual=residual, method=method, sense=gen.sense,
                     stats=stats, policy_iterations=policy_iterations)


def solve_evolution(gen: DiscreteGenerator,
                    opts: SolveOptions | None = None) -> EigenPair:
    """Eigenpair via normalized power iteration on one semigroup step."""
    opts = opts or SolveOptions()
    dt = opts.dt if opts.dt is not None else gen.dt_max * opts.dt_factor
    if dt > gen.dt_max:
        raise ValidationError(
            f"dt = {dt:.6g} exceeds the CFL bound {gen.dt_max:.6g}")
    mats = gen.step_matrices(dt)
    sense = gen.sense

    def one_step(g):
        return _step_with(mats, g, sense)

    f0 = gen.grid.ones() if opts.f0 is None else np.asarray(opts.f0, float)
    # the oscillation of the step ratios is ~ dt * oscillation of G f / f
    power_tol = 0.5 * opts.tol * dt
    _, phi, stats = power_iterate(
        one_step, f0, tol=power_tol, max_iters=opts.max_iters,
        collect_p1=opts.collect_p1)
    pair = _finish(gen, None, phi, "evolution", stats=stats)
    if pair.residual > opts.tol:
        raise NoConvergence(
            f"eigen-residual {pair.residual:.3g} above tol {opts.tol:.3g}",
            best=pair)
    return pair


def _policy_matrix(gen: DiscreteGenerator, policy: np.ndarray) -> np.ndarray:
    """Dense ``A_u`` with row ``i`` taken from control ``policy[i]``."""
    size = gen.size
    out = np.zeros((size, size))
    for v in range(gen.n_controls):
        rows = np.flatnonzero(policy == v)
        if rows.size:
            out[rows] = gen.mats[v][rows].toarray()
    return out


def _update_policy(gen: DiscreteGenerator, phi: np.ndarray,
                   previous: np.ndarray, tie_tol: float) -> np.ndarray:
    stacked = np.stack([A @ phi for A in gen.mats])
    if gen.sense == MINIMIZE:
        best = np.min(stacked, axis=0)
        greedy = np.argmin(stacked, axis=0)
        keep = stacked[previous, np.arange(gen.size)] <= best + tie_tol
    else:
        best = np.max(stacked, axis=0)
        greedy = np.argmax(stacked, axis=0)
        keep = stacked[previous, np.arange(gen.size)] >= best - tie_tol
    return np.where(keep, previous, greedy)


def solve_policy_iteration(gen: DiscreteGenerator,
                           opts: SolveOptions | None = None) -> EigenPair:
    """Eigenpair via Howard iteration with a Perron inner solve.

    For the frozen policy ``u`` the principal pair of ``A_u`` is found by
    power iteration on the shifted nonnegative matrix ``c I + A_u`` (the
    shift makes the diagonal strictly positive, hence the matrix
    primitive); the policy is then refreshed greedily on the eigenvector,
    keeping the previous control on near-ties to prevent oscillation
    between equivalent policies.  Terminates because the policy set is
    finite; a revisited policy raises :class:`CycleDetected`.
    """
    opts = opts or SolveOptions()
    policy = argmin_policy(gen, gen.grid.ones())
    seen = set()
    rho = np.nan
    phi = gen.grid.ones()
    for it in range(1, opts.max_policy_iters + 1):
        A_u = _policy_matrix(gen, policy)
        diag_min = float(np.min(np.diag(A_u)))
        # +1 on top of the documented shift keeps every diagonal entry
        # strictly positive, so the shifted matrix is primitive
        c = abs(diag_min) + gen.r_max + 1.0
        lam, phi = perron(A_u + c * np.eye(gen.size),
                          tol=opts.inner_tol, max_iters=opts.max_iters)
        rho = lam - c

        new_policy = _update_policy(gen, phi, policy, opts.tie_tol)
        if np.array_equal(new_policy, policy):
            # stable policy: re-solving it would reproduce rho exactly,
            # so the |rho change| < tol stopping condition holds as well
            return _finish(gen, rho, phi, "policy_iteration",
                           policy_iterations=it)
        seen.add(policy.tobytes())
        if new_policy.tobytes() in seen:
            raise CycleDetected(
                f"policy oscillation detected at iteration {it}",
                policies=(policy, new_policy))
        policy = new_policy
    raise NoConvergence(
        f"policy iteration did not stabilize in {opts.max_policy_iters} sweeps",
        best=_finish(gen, rho, phi, "policy_iteration"))


def solve_max(gen: DiscreteGenerator, opts: SolveOptions | None = None,
              method: str = "evolution") -> EigenPair:
    """Companion pair ``(beta, psi)`` for the max-envelope over controls.

    For a minimization generator, ``beta >= rho`` always, with equality
    for a single control.
    """
    flipped = gen.with_sense(MAXIMIZE)
    if method == "evolution":
        return solve_evolution(flipped, opts)
    if method == "policy_iteration":
        return solve_policy_iteration(flipped, opts)
    raise ValidationError(f"unknown method {method!r}")
