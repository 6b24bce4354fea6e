"""Shared fixtures: the verification corpus and cached eigensolves."""

import numpy as np
import pytest

from nisio import build_generator, solve_evolution, solve_policy_iteration
from nisio import problems


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def corpus():
    """Name -> (spec, generator) for the six 1D verification problems."""
    out = {}
    for name, spec in problems.corpus_1d(64).items():
        out[name] = (spec, build_generator(spec))
    return out


@pytest.fixture(scope="session")
def corpus_pairs(corpus):
    """Evolution-method eigenpairs for the corpus (computed once)."""
    return {name: solve_evolution(gen) for name, (spec, gen) in corpus.items()}


@pytest.fixture(scope="session")
def corpus_policy_pairs(corpus):
    """Policy-iteration eigenpairs for the corpus (computed once)."""
    return {name: solve_policy_iteration(gen)
            for name, (spec, gen) in corpus.items()}


@pytest.fixture(scope="session")
def cosine_gen():
    return build_generator(problems.torus_cosine(64))


@pytest.fixture(scope="session")
def cosine_pair(cosine_gen):
    return solve_evolution(cosine_gen)


def random_irreducible(rng, n):
    """Random irreducible nonnegative matrix with positive diagonal.

    Sparse random entries plus a ring make the support strongly
    connected; the positive diagonal makes it primitive, so power
    iteration is guaranteed to converge.
    """
    q = rng.uniform(0.0, 1.0, (n, n)) * (rng.uniform(0, 1, (n, n)) < 0.5)
    for i in range(n):
        q[i, (i + 1) % n] += rng.uniform(0.1, 1.0)
        q[i, i] += rng.uniform(0.05, 0.5)
    return q
