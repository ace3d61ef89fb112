"""Penalty constants, kernel projections, and the coercivity guarantee."""
from dataclasses import replace

import numpy as np
import pytest

import _oracles as orc
from kinhalf import (build_penalized_operator, build_projections,
                     coercivity_check, penalty_constants,
                     validate_assumptions, weighted_gram)

from conftest import bundle, spectral_bundle


def reference_constants(op, basis, gamma, eps1=0.5, eps2=0.5):
    w = basis.space.weights
    if basis.alpha.size:
        baux = op.b[:, None] * basis.aux
        norms = (w[:, None] * baux ** 2).sum(axis=0)
        aux_term = float(np.sum(norms / basis.alpha ** 2))
        amax = float(np.max(basis.alpha))
    else:
        aux_term, amax = 0.0, 0.0
    return orc.penalty_reference(basis.beta_min, basis.beta_hat_max,
                                 basis.gamma1, basis.signature.n_neg, gamma,
                                 aux_term, amax, eps1, eps2)


@pytest.mark.parametrize("preset,u", [
    ("monatomic-d1", 0.4),
    ("monatomic-d1", 0.0),
    ("monatomic-d3", 0.0),
    ("mixture-d3", 0.3),
    ("poly-levels-d3", 0.0),
])
def test_constants_match_the_independent_recipe(preset, u):
    _, _, _, op, basis, config = spectral_bundle(preset, u=u)
    gamma = validate_assumptions(op).gamma
    sigma, alpha, beta, mu = reference_constants(op, basis, gamma)
    assert abs(config.sigma - sigma) < 1e-12 * sigma
    assert abs(config.alpha - alpha) < 1e-12 * alpha
    assert abs(config.beta - beta) < 1e-12 * beta
    assert abs(config.mu - mu) < 1e-12 * mu
    assert config.alpha == 2.0 * config.sigma


def test_sigma_cap_shrinks_sigma_and_downstream_constants():
    _, _, _, op, basis, config = spectral_bundle("monatomic-d1", u=0.4)
    cap = 0.25 * config.sigma
    capped = penalty_constants(op, basis, gamma=config.gamma, sigma_cap=cap)
    assert capped.sigma == cap
    mix = basis.beta_min + 2.0 * basis.gamma1 * 0.25
    assert abs(capped.beta - cap * mix / 1.5) < 1e-14
    assert abs(capped.mu - 0.5 * min(config.gamma, cap * basis.beta_min)) < 1e-14
    # a cap above the recipe value is inert
    loose = penalty_constants(op, basis, gamma=config.gamma,
                              sigma_cap=10.0 * config.sigma)
    assert loose.sigma == config.sigma


def test_eps_overrides_are_validated_and_take_effect():
    _, _, _, op, basis, config = spectral_bundle("monatomic-d1")
    other = penalty_constants(op, basis, gamma=config.gamma,
                              eps1=0.3, eps2=0.7)
    sigma, _, beta, mu = reference_constants(op, basis, config.gamma,
                                             eps1=0.3, eps2=0.7)
    assert abs(other.sigma - sigma) < 1e-12 * sigma
    assert abs(other.beta - beta) < 1e-12 * beta
    for bad in (0.0, 1.0, -0.2, 1.7):
        with pytest.raises(ValueError, match="eps1 and eps2"):
            penalty_constants(op, basis, eps1=bad)
        with pytest.raises(ValueError, match="eps1 and eps2"):
            penalty_constants(op, basis, eps2=bad)


def test_noncoercive_gamma_is_rejected():
    _, _, _, op, basis, _ = spectral_bundle("monatomic-d1")
    with pytest.raises(ValueError, match="not coercive"):
        penalty_constants(op, basis, gamma=-1.0)


def test_projections_are_weighted_self_adjoint():
    _, sp, _, op, basis, _ = spectral_bundle("monatomic-d3", u=0.0)
    pr = build_projections(basis)
    p_plus, p_zero, p_zero_plain = pr.matrices()
    W = np.diag(sp.weights)
    for P in (p_plus, p_zero, p_zero_plain):
        np.testing.assert_allclose(W @ P, (W @ P).T, atol=1e-12)
    # the plain projections are idempotent; the lifted block is a
    # normalized pairing, not a projection
    np.testing.assert_allclose(p_plus @ p_plus, p_plus, atol=1e-12)
    np.testing.assert_allclose(p_zero_plain @ p_zero_plain, p_zero_plain,
                               atol=1e-12)
    rng = np.random.default_rng(9)
    f = rng.standard_normal(sp.size)
    np.testing.assert_allclose(pr.onto_positive(f), p_plus @ f, atol=1e-12)
    np.testing.assert_allclose(pr.onto_degenerate_lifted(f), p_zero @ f,
                               atol=1e-12)
    np.testing.assert_allclose(pr.onto_degenerate(f), p_zero_plain @ f,
                               atol=1e-12)


def test_projection_ranges_and_moments():
    _, sp, _, op, basis, _ = spectral_bundle("monatomic-d3", u=0.0)
    pr = build_projections(basis)
    k_pos = basis.signature.n_pos
    # onto_positive reproduces phi coefficients
    f = basis.phi[:, 0] * 2.5
    np.testing.assert_allclose(pr.onto_positive(f), f, atol=1e-12)
    # the lifted pairing is dual to b*psi: applying it to B psi_r gives
    # aux_r / alpha_r
    bpsi = basis.b * basis.psi[:, 0]
    got = pr.onto_degenerate_lifted(bpsi)
    np.testing.assert_allclose(got, basis.aux[:, 0] / basis.alpha[0],
                               atol=1e-10)
    assert k_pos == 1


def test_penalized_assembly_matches_apply_forms():
    _, sp, _, op, basis, config = spectral_bundle("monatomic-d3", u=0.0)
    pop = build_penalized_operator(op, basis, config)
    rng = np.random.default_rng(31)
    f = rng.standard_normal(sp.size)
    g = rng.standard_normal(sp.size)
    np.testing.assert_allclose(pop.matrix @ f, pop.apply(f), atol=1e-12)
    np.testing.assert_allclose(pop.adjoint @ g, pop.apply_adjoint(g),
                               atol=1e-12)
    # adjoint really is the weighted adjoint
    lhs = float(np.sum(sp.weights * g * pop.apply(f)))
    rhs = float(np.sum(sp.weights * f * pop.apply_adjoint(g)))
    assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(lhs))


@pytest.mark.parametrize("preset,u", [
    ("monatomic-d1", 0.4),
    ("monatomic-d3", 0.0),
    ("mixture-d3", 0.3),
    ("poly-dof-d3", 0.0),
])
def test_coercivity_bound_holds_with_recipe_constants(preset, u):
    _, _, _, op, basis, config = spectral_bundle(preset, u=u)
    pop = build_penalized_operator(op, basis, config)
    rep = coercivity_check(pop)
    assert rep.passed
    assert rep.min_eigenvalue >= config.mu - 1e-10


def test_inflated_sigma_breaks_the_bound():
    _, _, _, op, basis, config = spectral_bundle("monatomic-d1", u=0.4)
    bad = replace(config, sigma=100.0 * config.sigma,
                  alpha=200.0 * config.sigma)
    pop = build_penalized_operator(op, basis, bad)
    rep = coercivity_check(pop)
    assert not rep.passed
    assert rep.min_eigenvalue < bad.mu - 1e-10
