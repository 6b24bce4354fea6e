"""Sandwich bounds, rate-function duality and the log-transform residual."""

import numpy as np
import pytest
import scipy.sparse as sp

from nisio import (
    SolveOptions,
    build_generator,
    cw_bounds,
    cw_search,
    dv_check,
    dv_rate,
    hji_residual,
    perron,
    solve_evolution,
)
from nisio.errors import NonPositiveInput, ValidationError
from nisio import problems


def test_bounds_at_ones(corpus):
    for name, (spec, gen) in corpus.items():
        rep = cw_bounds(gen, gen.grid.ones())
        rmin_env = np.min(gen.r_tables, axis=0)
        assert rep.lower == pytest.approx(float(np.min(rmin_env)), abs=1e-12)
        assert rep.upper == pytest.approx(float(np.max(rmin_env)), abs=1e-12)


def test_bounds_at_phi(cosine_gen, cosine_pair):
    rep = cw_bounds(cosine_gen, cosine_pair.phi)
    assert rep.gap <= 2e-9          # twice the solve tolerance
    assert rep.lower <= cosine_pair.rho <= rep.upper


def test_bounds_perturbed_phi(cosine_gen, cosine_pair):
    rng = np.random.default_rng(0)
    f = cosine_pair.phi * (1.0 + 0.1 * rng.uniform(-1, 1, cosine_gen.size))
    rep = cw_bounds(cosine_gen, f)
    assert rep.lower < cosine_pair.rho < rep.upper


def test_sandwich_100_random(corpus, corpus_pairs):
    rng = np.random.default_rng(1)
    for name, (spec, gen) in corpus.items():
        rho = corpus_pairs[name].rho
        for _ in range(100):
            f = rng.uniform(0.05, 2.0, gen.size)
            rep = cw_bounds(gen, f)
            assert rep.lower <= rho + 1e-8, name
            assert rep.upper >= rho - 1e-8, name


def test_bounds_scaling_exact(cosine_gen):
    f = np.random.default_rng(2).uniform(0.1, 1.0, cosine_gen.size)
    base = cw_bounds(cosine_gen, f)
    for c in (2.0, 0.5, 64.0):
        rep = cw_bounds(cosine_gen, c * f)
        assert rep.lower == base.lower and rep.upper == base.upper


def test_bounds_rejects_nonpositive(cosine_gen):
    f = cosine_gen.grid.ones()
    f[3] = 0.0
    with pytest.raises(NonPositiveInput):
        cw_bounds(cosine_gen, f)


def test_cw_search_tightens(cosine_gen, cosine_pair):
    reports = cw_search(cosine_gen, "tighten-upper", iters=50,
                        rho=cosine_pair.rho)
    start_gap = reports[0].upper - cosine_pair.rho
    end_gap = reports[-1].upper - cosine_pair.rho
    assert start_gap >= 10 * end_gap
    uppers = np.array([r.upper for r in reports])
    lowers = np.array([r.lower for r in reports])
    assert np.all(np.diff(uppers) <= 1e-10)     # nonincreasing upper
    assert np.all(np.diff(lowers) >= -1e-10)    # nondecreasing lower
    gaps = uppers - lowers
    assert np.all(np.diff(gaps) <= 1e-10)


def test_cw_search_fixed_point_at_phi(cosine_gen, cosine_pair):
    reports = cw_search(cosine_gen, "both", iters=5, f0=cosine_pair.phi)
    for rep in reports:
        assert rep.gap <= 2e-9


def test_cw_search_validation(cosine_gen):
    with pytest.raises(ValidationError):
        cw_search(cosine_gen, "sideways")
    with pytest.raises(ValidationError):
        cw_search(cosine_gen, "both", iters=0)


# ---------------------------------------------------------------------------
# Donsker-Varadhan
# ---------------------------------------------------------------------------

def stationary_distribution(gen):
    """Left null vector of L via the Perron solve on the shifted transpose."""
    L = (gen.mats[0] - sp.diags(gen.r_tables[0])).toarray()
    c = abs(float(np.min(np.diag(L)))) + 1.0
    _, pi = perron(L.T + c * np.eye(gen.size), tol=1e-13)
    return pi / np.sum(pi)


def test_dv_rate_nonnegative_and_zero_at_stationary():
    gen = build_generator(problems.constant_cost(0.0, 64))
    pi = stationary_distribution(gen)
    assert dv_rate(gen, pi) <= 1e-6
    # objective at psi = 0 is sum nu (L 1) = 0, so I >= 0 by definition
    rng = np.random.default_rng(3)
    nu = rng.dirichlet(np.ones(gen.size))
    assert dv_rate(gen, nu) >= 0.0


def test_dv_rate_point_mass_oracle():
    gen = build_generator(problems.torus_cosine(16))
    L = (gen.mats[0] - sp.diags(gen.r_tables[0])).toarray()
    for j in (0, 7):
        nu = np.zeros(gen.size)
        nu[j] = 1.0
        rate = dv_rate(gen, nu, maxiter=20000)
        oracle = -L[j, j]       # exp terms vanish in the limit
        assert rate >= 0.0
        assert rate == pytest.approx(oracle, rel=1e-6)
        assert rate <= oracle * (1 + 1e-12)


def test_dv_rate_nonstationary_strictly_positive(cosine_gen):
    pi = stationary_distribution(cosine_gen)
    x = cosine_gen.grid.nodes()[:, 0]
    rng = np.random.default_rng(4)
    for _ in range(10):
        nu = pi * (1.0 + 0.5 * np.sin(2 * np.pi * x + rng.uniform(0, 2 * np.pi)))
        nu = nu / np.sum(nu)
        assert dv_rate(cosine_gen, nu) >= 1e-4


def test_dv_rate_requires_single_control():
    gen = build_generator(problems.torus_two_control(64))
    with pytest.raises(ValidationError):
        dv_rate(gen, np.full(gen.size, 1.0 / gen.size))


def test_dv_identity(cosine_gen):
    rep = dv_check(cosine_gen)
    assert rep.gap <= 1e-3
    assert rep.rate >= 0.0
    pair = solve_evolution(cosine_gen)
    assert rep.rho == pytest.approx(pair.rho, abs=1e-8)


def test_dv_identity_zero_cost():
    gen = build_generator(problems.constant_cost(0.0, 64))
    rep = dv_check(gen)
    assert abs(rep.rho) <= 1e-9
    assert rep.rate <= 1e-6          # I(stationary) = 0
    assert rep.gap <= 1e-6


def test_dv_certificates_never_exceed_rho(cosine_gen, cosine_pair):
    rng = np.random.default_rng(5)
    r_vec = cosine_gen.r_tables[0]
    for _ in range(20):
        nu = rng.dirichlet(np.ones(cosine_gen.size))
        certificate = float(r_vec @ nu) - dv_rate(cosine_gen, nu)
        assert certificate <= cosine_pair.rho + 1e-6


# ---------------------------------------------------------------------------
# logarithmic transform
# ---------------------------------------------------------------------------

def test_hji_zero_for_constant_cost():
    gen = build_generator(problems.constant_cost(1.0, 64))
    pair = solve_evolution(gen, SolveOptions(dt=2.0 ** -13))
    rep = hji_residual(gen, pair)
    assert rep.residual == 0.0


def test_hji_refinement_decrease():
    res = {}
    for n in (64, 256):
        gen = build_generator(problems.interval_cosine(n))
        res[n] = hji_residual(gen, solve_evolution(gen)).residual
    assert res[256] < res[64]


def test_hji_matches_rayleigh_residual(cosine_gen, cosine_pair):
    # single control: the transform residual equals |L psi + |grad psi|^2 a/2
    # + r - rho|, which differs from |G phi/phi - rho| only by the O(h^2)
    # defect of the discrete chain rule
    rep = hji_residual(cosine_gen, cosine_pair)
    gphi_res = cosine_pair.residual / np.min(cosine_pair.phi)
    h2 = cosine_gen.grid.h ** 2
    assert abs(rep.residual - gphi_res) <= 5.0 * h2
