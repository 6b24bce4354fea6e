"""Monte Carlo estimation of the exponential-of-integral cost.

Under a fixed Markov policy the risk-sensitive cost

    (1/T) log E[ exp( integral_0^T r(X_s, v(X_s)) ds ) ]

is estimated by Euler-Maruyama simulation of the state equation.  The
reflecting interval folds overshoots back through the boundary (the
standard mirror approximation of the boundary local time; in 1D the
co-normal direction is the outward normal, so mirroring is the correct
reflection), the torus wraps coordinates modulo the period.  The running
cost integral uses left-endpoint quadrature, matching the filtration
convention of the Euler step.

Determinism: paths are simulated in fixed-size chunks with
counter-derived per-chunk generator streams, and the final reduction runs
in chunk order, so results are bit-identical for a given master seed
regardless of the worker count.  ``NISIO_THREADS`` caps the worker pool
(speed only, never results).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import NonFiniteState, ValidationError
from .generator import ProblemSpec
from .grid import INTERVAL

__all__ = ["McConfig", "McEstimate", "cost_samples", "simulate_cost",
           "policy_sweep"]

_CHUNK = 4096   # fixed so that chunk streams do not depend on worker count


@dataclass(frozen=True)
class McConfig:
    """Simulation parameters for one cost estimate.

    ``policy`` assigns a control index to every grid node; states look up
    their control at the nearest node.  ``x0`` is the common start point.
    """

    T: float
    dt_sim: float
    N: int
    seed: int
    x0: tuple
    policy: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x0",
                           tuple(float(c) for c in np.atleast_1d(self.x0)))
        object.__setattr__(self, "policy",
                           np.asarray(self.policy, dtype=np.int64))
        if not self.dt_sim > 0:
            raise ValidationError("dt_sim must be positive")
        if self.N < 100:
            raise ValidationError("at least 100 paths required")
        if not self.T >= 10 * self.dt_sim:
            raise ValidationError("horizon must cover at least 10 steps")


@dataclass(frozen=True)
class McEstimate:
    """Log-mean-exp cost estimate with a delta-method standard error."""

    value: float
    stderr: float
    n_effective: float
    N: int
    T: float
    dt_sim: float


def _nearest_node(spec: ProblemSpec, x: np.ndarray) -> np.ndarray:
    """Flat index of the nearest grid node for each row of ``x``."""
    grid = spec.grid
    idx = np.rint(x / grid.h).astype(np.int64)
    if grid.topology == INTERVAL:
        np.clip(idx, 0, grid.n - 1, out=idx)
    else:
        idx %= grid.n
    if grid.d == 1:
        return idx[:, 0]
    return idx[:, 0] * grid.n + idx[:, 1]


def _reflect_interval(x: np.ndarray, extent: float) -> np.ndarray:
    """Fold positions back into [0, extent] (handles any overshoot)."""
    m = np.mod(x, 2.0 * extent)
    return extent - np.abs(m - extent)


def _simulate_chunk(spec: ProblemSpec, cfg: McConfig, chunk_index: int,
                    n_paths: int, n_steps: int) -> np.ndarray:
    grid = spec.grid
    d = grid.d
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=cfg.seed, spawn_key=(chunk_index,)))
    controls = np.asarray(spec.controls, dtype=float)

    x = np.tile(np.asarray(cfg.x0, dtype=float), (n_paths, 1))
    acc = np.zeros(n_paths)
    sqrt_dt = math.sqrt(cfg.dt_sim)
    for k in range(n_steps):
        nodes = _nearest_node(spec, x)
        v = controls[cfg.policy[nodes]]
        acc += spec.r_at(x, v) * cfg.dt_sim
        drift = spec.b_at(x, v)
        sig = spec.sigma_at(x)
        noise = rng.standard_normal((n_paths, d))
        x = x + drift * cfg.dt_sim + sqrt_dt * np.einsum("pij,pj->pi", sig, noise)
        if not np.isfinite(x).all():
            raise NonFiniteState("simulated state left the finite range", step=k)
        if grid.topology == INTERVAL:
            x = _reflect_interval(x, grid.extent)
            assert x.min() >= 0.0 and x.max() <= grid.extent
        else:
            x = np.mod(x, grid.extent)
    return acc


def _worker_count() -> int:
    raw = os.environ.get("NISIO_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def cost_samples(spec: ProblemSpec, cfg: McConfig) -> np.ndarray:
    """Per-path accumulated cost integrals ``A_p = sum_k r(x_k, v_k) dt``."""
    if cfg.policy.shape != (spec.grid.size,):
        raise ValidationError(
            f"policy must assign a control to each of {spec.grid.size} nodes")
    if np.min(cfg.policy) < 0 or np.max(cfg.policy) >= spec.n_controls:
        raise ValidationError("policy contains out-of-range control indices")
    n_steps = int(round(cfg.T / cfg.dt_sim))
    chunks = [(c, min(_CHUNK, cfg.N - c * _CHUNK))
              for c in range((cfg.N + _CHUNK - 1) // _CHUNK)]

    workers = _worker_count()
    if workers == 1:
        parts = [_simulate_chunk(spec, cfg, c, npaths, n_steps)
                 for c, npaths in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_simulate_chunk, spec, cfg, c, npaths, n_steps)
                       for c, npaths in chunks]
            parts = [f.result() for f in futures]   # fixed chunk order
    return np.concatenate(parts)


def simulate_cost(spec: ProblemSpec, cfg: McConfig) -> McEstimate:
    """Estimate the risk-sensitive cost of ``cfg.policy`` by simulation.

    Returns ``(1/T) * log-mean-exp`` of the accumulated cost integrals
    over ``cfg.N`` paths (max-subtracted, so any ``|A| <= 700`` is safe),
    with the delta-method standard error of the log-mean.
    """
    a = cost_samples(spec, cfg)

    m = float(np.max(a))
    w = np.exp(a - m)
    mean_w = float(np.mean(w))
    value = (m + math.log(mean_w)) / cfg.T
    if cfg.N > 1:
        std_w = float(np.std(w, ddof=1))
        stderr = std_w / (math.sqrt(cfg.N) * mean_w * cfg.T)
    else:
        stderr = 0.0
    sum_w = float(np.sum(w))
    n_eff = sum_w * sum_w / float(np.sum(w * w))
    return McEstimate(value=value, stderr=stderr, n_effective=n_eff,
                      N=cfg.N, T=cfg.T, dt_sim=cfg.dt_sim)


def policy_sweep(spec: ProblemSpec, cfg: McConfig, policies) -> list[McEstimate]:
    """Estimate the cost of several policies with common random numbers.

    Every policy is simulated from the same master seed (identical noise
    per path), which makes ordered comparisons between policies sharp.
    """
    return [simulate_cost(spec, replace(cfg, policy=np.asarray(p, dtype=np.int64)))
            for p in policies]
