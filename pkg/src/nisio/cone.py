"""Normalized power iteration for monotone, positively 1-homogeneous maps.

The iteration ``g <- map(g) / ||map(g)||_inf`` applies to any strongly
positive, order-preserving, 1-homogeneous map over grid functions: one
explicit Euler step of the envelope semigroup, a frozen-control step, or
plain multiplication by a nonnegative matrix.  Convergence is detected
through the oscillation of the pointwise ratios ``map(g)/g``, which also
brackets the map's principal growth factor from below and above.

Along the orbit the precise bracket is measured by the cone functionals

    under_alpha(f) = min_x f(x)/ref(x),   over_alpha(f) = max_x f(x)/ref(x),

evaluated against the converged iterate as reference and rescaled by the
accumulated growth (the raw normalized iterates are not monotone; the
growth-rescaled orbit is).  The bracket width ``eta = over - under``
contracts geometrically for strongly positive maps, and
:func:`fit_exponential_rate` extracts the contraction rate from its log.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    InsufficientData,
    NoConvergence,
    NonPositiveEta,
    NonPositiveInput,
    NonPositiveIterate,
)

__all__ = ["OrbitStats", "RateFit", "alpha_bounds", "power_iterate",
           "fit_exponential_rate"]

_MAX_RECORDS = 4096


def alpha_bounds(f: np.ndarray, reference: np.ndarray) -> tuple[float, float]:
    """Cone bracket ``(min f/ref, max f/ref)`` of ``f`` against ``reference``.

    ``reference`` must be strictly positive and ``f`` nonnegative.  The
    bounds are the largest ``a`` with ``f - a*ref >= 0`` and the smallest
    ``a`` with ``a*ref - f >= 0``; they are exactly invariant under
    positive scaling of ``f`` when the factor is a power of two.
    """
    f = np.asarray(f, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if reference.shape != f.shape:
        raise NonPositiveInput("f and reference must have the same shape")
    if np.min(reference) <= 0:
        raise NonPositiveInput("reference must be strictly positive")
    if np.min(f) < 0:
        raise NonPositiveInput("f must be nonnegative")
    ratios = f / reference
    return float(np.min(ratios)), float(np.max(ratios))


@dataclass
class OrbitStats:
    """Per-iteration diagnostics of a normalized power iteration.

    All arrays are aligned with ``iterations`` (records are thinned to a
    bounded number for long runs).  ``under_alpha``/``over_alpha`` are the
    cone bounds of the growth-rescaled orbit against the final iterate,
    ``eta`` their difference, ``rho_estimate`` the per-application upper
    growth estimate ``max_x map(g)/g`` and ``sup_norm`` the
    pre-normalization sup norm ``||map(g)||_inf``.

    ``zeta1`` (ratio bound of the reference) and ``p1_min`` are surfaced
    as diagnostics for the hypotheses behind exponential convergence;
    they are reported, never asserted.
    """

    iterations: np.ndarray
    under_alpha: np.ndarray
    over_alpha: np.ndarray
    eta: np.ndarray
    rho_estimate: np.ndarray
    sup_norm: np.ndarray
    n_iterations: int
    converged: bool
    zeta1: float
    p1_min: float | None = None


@dataclass(frozen=True)
class RateFit:
    """Least-squares decay rate of ``log eta`` per iteration."""

    theta: float
    r2: float
    n_used: int


def power_iterate(map_fn, f0: np.ndarray, tol: float = 1e-12,
                  max_iters: int = 1_000_000,
                  collect_p1: bool = False):
    """Iterate ``g <- map_fn(g)/||map_fn(g)||_inf`` until the ratio band closes.

    Stops when ``max_x log(map(g)/g) - min_x log(map(g)/g) < tol``.
    Returns ``(growth, fixed_point, stats)`` where ``growth`` is the
    geometric mean of the normalization factors over the last quarter of
    the run (transients discarded) and ``fixed_point`` the final iterate,
    sup-normalized and strictly positive.

    Raises :class:`NonPositiveIterate` if the map fails strong positivity
    at this discretization and :class:`NoConvergence` after ``max_iters``.
    """
    g = np.asarray(f0, dtype=float).copy()
    if np.min(g) <= 0:
        raise NonPositiveInput("starting function must be strictly positive")
    if tol <= 0:
        raise NonPositiveInput("tol must be positive")
    if max_iters < 1:
        raise NonPositiveInput("max_iters must be >= 1")
    g = g / np.max(g)

    rec_k: list[int] = []
    rec_g: list[np.ndarray] = []
    rec_rho: list[float] = []
    rec_norm: list[float] = []
    stride = 1
    log_factors: list[float] = []
    cumlog = [0.0]
    converged = False

    k = 0
    while k < max_iters:
        y = map_fn(g)
        y = np.asarray(y, dtype=float)
        if np.min(y) <= 0:
            raise NonPositiveIterate(
                "map produced a non-positive value from a positive iterate")
        ratios = y / g
        log_r = np.log(ratios)
        osc = float(np.max(log_r) - np.min(log_r))
        s = float(np.max(y))

        if k % stride == 0:
            rec_k.append(k)
            rec_g.append(g.copy())
            rec_rho.append(float(np.max(ratios)))
            rec_norm.append(s)
            if len(rec_k) > _MAX_RECORDS:
                rec_k = rec_k[::2]
                rec_g = rec_g[::2]
                rec_rho = rec_rho[::2]
                rec_norm = rec_norm[::2]
                stride *= 2

        log_factors.append(math.log(s))
        cumlog.append(cumlog[-1] + log_factors[-1])
        g = y / s
        k += 1
        if osc < tol:
            converged = True
            break

    tail = log_factors[-max(1, len(log_factors) // 4):]
    growth = math.exp(sum(tail) / len(tail))

    ref = g
    log_growth = math.log(growth)
    under = np.empty(len(rec_k))
    over = np.empty(len(rec_k))
    for idx, (kk, gk) in enumerate(zip(rec_k, rec_g)):
        lo, hi = alpha_bounds(gk, ref)
        scale = math.exp(cumlog[kk] - kk * log_growth)
        under[idx] = scale * lo
        over[idx] = scale * hi

    p1_min = math.inf
    if collect_p1:
        # hypothesis diagnostic: the map must not annihilate both z and
        # ref - z for any recorded iterate dominated by the reference
        for gk in rec_g:
            z = np.minimum(gk, ref)
            value = float(np.max(np.abs(map_fn(ref - z))) + np.max(map_fn(z)))
            p1_min = min(p1_min, value)
    stats = OrbitStats(
        iterations=np.array(rec_k, dtype=int),
        under_alpha=under,
        over_alpha=over,
        eta=over - under,
        rho_estimate=np.array(rec_rho),
        sup_norm=np.array(rec_norm),
        n_iterations=k,
        converged=converged,
        zeta1=float(np.max(ref) / np.min(ref)),
        p1_min=None if not collect_p1 else p1_min,
    )
    if not converged:
        raise NoConvergence(
            f"power iteration did not close the ratio band within {max_iters} "
            f"iterations (last oscillation {osc:.3g})",
            best=(growth, ref, stats))
    return growth, ref, stats


def fit_exponential_rate(stats: OrbitStats, noise_floor: float = 1e-12) -> RateFit:
    """Fit ``log eta_k ~ -theta * k`` by least squares.

    Bracket widths below ``noise_floor`` times the largest width are
    floating-point noise around the converged orbit and are excluded.
    ``theta > 0`` indicates contraction; a flat ``eta`` sequence yields
    ``theta = 0``.
    """
    eta = np.asarray(stats.eta, dtype=float)
    ks = np.asarray(stats.iterations, dtype=float)
    pos = eta > 0
    if not pos.any():
        raise NonPositiveEta("all bracket widths are zero: orbit already converged")
    floor = float(np.max(eta)) * noise_floor
    mask = eta > floor
    if mask.sum() < 10:
        raise InsufficientData(
            f"need at least 10 usable bracket widths, have {int(mask.sum())}")
    x = ks[mask]
    y = np.log(eta[mask])
    if np.ptp(y) == 0.0:
        # perfectly flat widths: no contraction, and no variance to explain
        return RateFit(theta=0.0, r2=0.0, n_used=int(mask.sum()))
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 0.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return RateFit(theta=float(-slope), r2=r2, n_used=int(mask.sum()))
