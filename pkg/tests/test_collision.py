"""BGK operator: kernel exactness, self-adjointness, coercivity constants."""
import numpy as np
import pytest

import _oracles as orc
from kinhalf import (build_bgk_operator, image_complement,
                     validate_assumptions, weighted_gram)

from conftest import bundle

KERNEL_DIMS = {
    "monatomic-d1": 3,
    "monatomic-d3": 5,
    "mixture-d3": 6,
    "fermion-d3": 5,
    "boson-d3": 5,
    "poly-levels-d3": 5,
    "poly-dof-d3": 5,
    "poly-mix-d3": 6,
}


@pytest.mark.parametrize("preset", sorted(KERNEL_DIMS))
def test_hypotheses_hold_on_every_preset(preset):
    _, _, _, op = bundle(preset, u=0.35)
    rep = validate_assumptions(op)
    assert rep.passed, rep.as_dict()
    assert rep.kernel_dim == KERNEL_DIMS[preset]
    assert rep.gamma > 0.0 and rep.nu_coercivity > 0.0
    assert rep.b_min_abs > 0.0


@pytest.mark.parametrize("preset", ["monatomic-d1", "mixture-d3",
                                    "poly-levels-d3"])
def test_apply_matches_the_projection_reference(preset):
    model, sp, eq, op = bundle(preset)
    from kinhalf.models import collision_invariants
    K = collision_invariants(model, sp, eq)
    rng = np.random.default_rng(17)
    for _ in range(5):
        f = rng.standard_normal(sp.size)
        ref = orc.bgk_apply_reference(sp, K, op.nu, f)
        got = op.apply(f)
        assert np.max(np.abs(got - ref)) < 1e-10 * max(1.0, np.abs(ref).max())


def test_kernel_columns_are_annihilated_and_orthonormal():
    _, sp, _, op = bundle("poly-dof-d3")
    np.testing.assert_allclose(weighted_gram(sp, op.kernel),
                               np.eye(op.kernel_dim), atol=1e-12)
    for j in range(op.kernel_dim):
        assert sp.norm(op.apply(op.kernel[:, j])) < 1e-12


def test_dense_matrix_matches_apply():
    _, sp, _, op = bundle("monatomic-d1")
    rng = np.random.default_rng(2)
    f = rng.standard_normal(sp.size)
    np.testing.assert_allclose(op.dense() @ f, op.apply(f), atol=1e-12)


def test_operator_is_weighted_self_adjoint_and_nonnegative():
    _, sp, _, op = bundle("mixture-d3")
    rep = validate_assumptions(op)
    assert rep.symmetry_residual < 1e-13
    assert rep.min_eigenvalue > -1e-12
    # the zero eigenvalue count equals the kernel dimension
    sw = np.sqrt(sp.weights)
    S = (sw[:, None] * op.dense()) / sw[None, :]
    ev = np.linalg.eigvalsh(0.5 * (S + S.T))
    assert int(np.sum(ev < 1e-8 * ev[-1])) == op.kernel_dim


def test_collision_frequency_variants():
    model, sp, eq, _ = bundle("monatomic-d1")
    op_arr = build_bgk_operator(model, sp, eq, nu=2.0 + sp.speed ** 2)
    assert validate_assumptions(op_arr).passed
    op_call = build_bgk_operator(model, sp, eq,
                                 nu=lambda s: 1.0 + 0.5 * s.speed)
    assert validate_assumptions(op_call).passed
    with pytest.raises(ValueError, match="positive"):
        build_bgk_operator(model, sp, eq, nu=np.zeros(sp.size))
    with pytest.raises(ValueError, match="positive"):
        build_bgk_operator(model, sp, eq, nu=np.ones(3))


def test_pseudo_solve_inverts_on_the_kernel_complement():
    _, sp, _, op = bundle("monatomic-d1")
    rng = np.random.default_rng(23)
    rhs = rng.standard_normal(sp.size)
    rhs = rhs - op.kernel_project(rhs)
    x = op.pseudo_solve(rhs)
    assert sp.norm(op.apply(x) - rhs) < 1e-10
    assert np.max(np.abs(weighted_gram(sp, op.kernel, x[:, None]))) < 1e-12
    with pytest.raises(ValueError, match="kernel component"):
        op.pseudo_solve(rhs + 0.1 * op.kernel[:, 0])


def test_image_complement_is_orthonormal_and_annihilates_the_kernel():
    _, sp, _, op = bundle("monatomic-d1")
    X = image_complement(sp, op.kernel)
    assert X.shape == (sp.size, sp.size - op.kernel_dim)
    np.testing.assert_allclose(weighted_gram(sp, X), np.eye(X.shape[1]),
                               atol=1e-12)
    assert np.max(np.abs(weighted_gram(sp, X, op.kernel))) < 1e-12


def test_gamma_is_the_sharp_coercivity_constant():
    # (h|Lh) >= gamma (h|(1+|B|)h) holds on the complement and is tight
    _, sp, _, op = bundle("monatomic-d1", u=0.2)
    rep = validate_assumptions(op)
    rng = np.random.default_rng(41)
    weight = 1.0 + np.abs(op.b)
    worst = np.inf
    for _ in range(200):
        h = rng.standard_normal(sp.size)
        h = h - op.kernel_project(h)
        num = sp.inner(h, op.apply(h))
        den = sp.inner(h, weight * h)
        worst = min(worst, num / den)
        assert num >= rep.gamma * den * (1.0 - 1e-10)
    assert worst < 10.0 * rep.gamma
