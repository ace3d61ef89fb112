"""Grid construction: quadrature exactness, mirror symmetry, sign splits."""
import numpy as np
import pytest

from kinhalf import (GridSpec, build_grid, reflection_operator,
                     split_half_spaces, weighted_gram)
from kinhalf.velocity_space import (apply_reflection, inner_product,
                                    orthonormal_columns)


def tensor_space(d, nodes=12, center=0.0):
    return build_grid(GridSpec(dimension=d, nodes=nodes, center=center))


@pytest.mark.parametrize("d", [1, 2, 3])
def test_maxwellian_class_integrates_exactly(d):
    # the rule is built for p(v) e^{-|v|^2/2}: machine-exact at any order
    sp = tensor_space(d, nodes=12 if d < 3 else 10)
    total = float(np.sum(sp.weights * np.exp(-sp.speed ** 2 / 2.0)))
    assert abs(total - (2.0 * np.pi) ** (d / 2.0)) < 1e-12


def test_off_class_gaussian_converges_spectrally(d=1):
    errs = []
    for nodes in (12, 16, 20):
        sp = tensor_space(d, nodes=nodes)
        total = float(np.sum(sp.weights * np.exp(-sp.speed ** 2)))
        errs.append(abs(total - np.pi ** (d / 2.0)))
    assert errs[2] < errs[1] < errs[0]
    assert errs[2] < 1e-8


def test_polynomial_moments_exact_up_to_rule_order():
    sp = tensor_space(1, nodes=16)
    w = sp.weights * np.exp(-sp.v1 ** 2 / 2.0)
    # odd moments vanish bit-exactly on the symmetrized rule
    for k in (1, 3, 5):
        assert abs(np.sum(w * sp.v1 ** k)) < 1e-13
    # even moments of the unit Gaussian: (2k-1)!! sqrt(2 pi)
    ref = np.sqrt(2.0 * np.pi)
    for k, dfact in ((2, 1.0), (4, 3.0), (6, 15.0)):
        got = float(np.sum(w * sp.v1 ** k))
        assert abs(got - dfact * ref) < 1e-10 * dfact * ref


def test_grid_is_mirror_symmetric_about_center():
    sp = tensor_space(2, nodes=10, center=0.7)
    refl = reflection_operator(sp)
    b = sp.v1 + 0.7
    # the center shift costs one rounding; weights and the involution are exact
    np.testing.assert_allclose(b[refl], -b, atol=1e-13)
    assert np.array_equal(sp.weights[refl], sp.weights)
    assert np.array_equal(refl[refl], np.arange(sp.size))


def test_odd_axis_is_nudged_off_the_sonic_plane():
    # odd Gauss-Hermite rules place a node at v = -center; the builder
    # shifts the axis and gives up the exact mirror map
    sp = build_grid(GridSpec(dimension=1, nodes=9, center=0.0))
    assert np.all(np.abs(sp.v1) > 1e-10)
    assert sp.reflect is None
    with pytest.raises(ValueError, match="not symmetric"):
        reflection_operator(sp)


def test_even_axis_keeps_the_exact_mirror():
    sp = build_grid(GridSpec(dimension=1, nodes=10, center=0.3))
    assert sp.reflect is not None
    assert np.min(np.abs(sp.v1 + 0.3)) > 1e-6


def test_split_partitions_all_nodes_by_sign():
    sp = tensor_space(2, nodes=8)
    split = split_half_spaces(sp, u=0.37)
    assert split.n_plus + split.n_minus == sp.size
    assert np.all(split.b[split.plus] > 0)
    assert np.all(split.b[split.minus] < 0)
    assert np.all(split.b_plus >= 0) and np.all(split.b_minus >= 0)
    np.testing.assert_allclose(split.b_plus - split.b_minus, split.b)


def test_split_rejects_sonic_drift():
    sp = tensor_space(1, nodes=12)
    with pytest.raises(ValueError, match="sonic node"):
        split_half_spaces(sp, u=-float(sp.v1[3]))


def test_reflection_preserves_the_inner_product():
    sp = tensor_space(2, nodes=10, center=0.5)
    rng = np.random.default_rng(11)
    f = rng.standard_normal(sp.size)
    g = rng.standard_normal(sp.size)
    rf, rg = apply_reflection(sp, f), apply_reflection(sp, g)
    assert abs(inner_product(sp, rf, rg) - inner_product(sp, f, g)) < 1e-12


def test_weighted_gram_matches_direct_sums():
    sp = tensor_space(1, nodes=14)
    rng = np.random.default_rng(5)
    X = rng.standard_normal((sp.size, 3))
    Y = rng.standard_normal((sp.size, 2))
    G = weighted_gram(sp, X, Y)
    for i in range(3):
        for j in range(2):
            ref = float(np.sum(sp.weights * X[:, i] * Y[:, j]))
            assert abs(G[i, j] - ref) < 1e-12


def test_orthonormal_columns_whiten_and_keep_the_span():
    sp = tensor_space(1, nodes=16)
    rng = np.random.default_rng(7)
    X = rng.standard_normal((sp.size, 4))
    C = orthonormal_columns(sp, X)
    np.testing.assert_allclose(weighted_gram(sp, C), np.eye(4), atol=1e-12)
    proj = C @ weighted_gram(sp, C, X)
    np.testing.assert_allclose(proj, X, atol=1e-10)


def test_orthonormal_columns_reject_rank_deficiency():
    sp = tensor_space(1, nodes=12)
    rng = np.random.default_rng(3)
    x = rng.standard_normal(sp.size)
    with pytest.raises(ValueError, match="rank-deficient"):
        orthonormal_columns(sp, np.stack([x, 2.0 * x], axis=1))


def test_radial_grid_starts_at_the_cutoff_and_mirrors_exactly():
    spec = GridSpec(dimension=3, nodes=12, cutoff_lambda=0.5, radial=True,
                    angular_nodes=6, quantum_sign=1)
    sp = build_grid(spec)
    assert sp.speed.min() >= 0.5 * np.sqrt(2.0) - 1e-12
    refl = reflection_operator(sp)
    assert np.array_equal(sp.v1[refl], -sp.v1)
    assert np.array_equal(sp.weights[refl], sp.weights)
    # plain volume of the spherical shell covered by the rule
    r0 = 0.5 * np.sqrt(2.0)
    r1 = r0 + 8.0 * np.sqrt(2.0)
    vol = 4.0 * np.pi / 3.0 * (r1 ** 3 - r0 ** 3)
    assert abs(np.sum(sp.weights) - vol) < 1e-8 * vol


def test_energy_axis_reproduces_gamma_moments():
    # one species with two continuous internal degrees: the folded Laguerre
    # weights integrate I^{delta/2-1} e^{-I/T} to Gamma(delta/2) T^{delta/2}
    from kinhalf import MODEL_PRESETS, default_grid
    model = MODEL_PRESETS["poly-dof-d3"]
    sp = default_grid(model, nodes=6, energy_nodes=8)
    val = float(np.sum(sp.weights * np.exp(-sp.speed ** 2 / 2.0 - sp.energy)))
    ref = (2.0 * np.pi) ** 1.5 * 1.0
    assert abs(val - ref) < 1e-8 * ref
