"""Canned problem definitions used by the demos and the test corpus.

Six one-dimensional problems exercise every structural branch of the
library (torus/interval, with/without drift, one or two controls,
constant or variable diffusion); the separable two-dimensional torus
problem has a known reduction to twice the one-dimensional cosine
eigenvalue, which serves as an independent oracle.
"""

from __future__ import annotations

from .generator import ProblemSpec
from .grid import Grid

__all__ = [
    "torus_cosine",
    "torus_cosine_drift",
    "torus_two_control",
    "torus_variable_sigma",
    "interval_cosine",
    "interval_two_control",
    "torus2d_separable",
    "constant_cost",
    "corpus_1d",
]


def torus_cosine(n: int = 64) -> ProblemSpec:
    """Uncontrolled cosine potential on the unit torus."""
    return ProblemSpec(
        grid=Grid("torus", n=n, d=1),
        controls=[(0.0,)],
        sigma=("1",),
        b=("0",),
        r="cos(2*pi*x1)")


def torus_cosine_drift(n: int = 64) -> ProblemSpec:
    """Uncontrolled cosine potential with a sinusoidal drift."""
    return ProblemSpec(
        grid=Grid("torus", n=n, d=1),
        controls=[(0.0,)],
        sigma=("1",),
        b=("0.5*sin(2*pi*x1)",),
        r="cos(2*pi*x1)")


def torus_two_control(n: int = 64) -> ProblemSpec:
    """Drift selection v in {-1, +1} against a cosine landscape."""
    return ProblemSpec(
        grid=Grid("torus", n=n, d=1),
        controls=[(-1.0,), (1.0,)],
        sigma=("1",),
        b=("v1",),
        r="cos(2*pi*x1) + 0.05*v1^2 + 0.5")


def torus_variable_sigma(n: int = 64) -> ProblemSpec:
    """Two controls, spatially varying dispersion and control cost."""
    return ProblemSpec(
        grid=Grid("torus", n=n, d=1),
        controls=[(-1.0,), (1.0,)],
        sigma=("0.75 + 0.25*sin(2*pi*x1)",),
        b=("v1*(0.5 + 0.25*cos(2*pi*x1))",),
        r="cos(2*pi*x1) + 0.1*v1^2 + 0.5")


def interval_cosine(n: int = 64) -> ProblemSpec:
    """Uncontrolled cosine cost on the reflecting unit interval."""
    return ProblemSpec(
        grid=Grid("interval", n=n, d=1),
        controls=[(0.0,)],
        sigma=("1",),
        b=("0",),
        r="cos(pi*x1)")


def interval_two_control(n: int = 64) -> ProblemSpec:
    """Drift selection on the interval with a quadratic well cost."""
    return ProblemSpec(
        grid=Grid("interval", n=n, d=1),
        controls=[(-1.0,), (1.0,)],
        sigma=("1",),
        b=("v1",),
        r="4*(x1 - 0.5)^2 + 0.1*v1^2")


def torus2d_separable(n: int = 32) -> ProblemSpec:
    """Separable cosine cost on the 2-torus: rho equals twice the 1D value."""
    return ProblemSpec(
        grid=Grid("torus", n=n, d=2),
        controls=[(0.0,)],
        sigma=("1", "0", "0", "1"),
        b=("0", "0"),
        r="cos(2*pi*x1) + cos(2*pi*x2)")


def constant_cost(c: float = 1.0, n: int = 64, topology: str = "torus",
                  two_controls: bool = False) -> ProblemSpec:
    """Constant running cost: the eigenpair is (c, 1) for any dynamics."""
    controls = [(-1.0,), (1.0,)] if two_controls else [(0.0,)]
    return ProblemSpec(
        grid=Grid(topology, n=n, d=1),
        controls=controls,
        sigma=("1",),
        b=("v1",) if two_controls else ("0",),
        r=repr(float(c)))


def corpus_1d(n: int = 64) -> dict[str, ProblemSpec]:
    """The six-problem one-dimensional verification corpus."""
    return {
        "torus_cosine": torus_cosine(n),
        "torus_cosine_drift": torus_cosine_drift(n),
        "torus_two_control": torus_two_control(n),
        "torus_variable_sigma": torus_variable_sigma(n),
        "interval_cosine": interval_cosine(n),
        "interval_two_control": interval_two_control(n),
    }
