"""Kernel inertia and the diagonalizing basis with its degenerate lift."""
import numpy as np
import pytest

from kinhalf import (closed_form_speeds, degenerate_speeds, kernel_basis,
                     signature, streaming_gram, weighted_gram)

from conftest import bundle

SQRT3 = np.sqrt(3.0)


def sig_at(preset, u):
    _, _, _, op = bundle(preset, u=u)
    return signature(op).as_tuple()


def test_monatomic_d1_signature_walks_the_seven_regimes():
    assert sig_at("monatomic-d1", -2.0) == (0, 3, 0)
    assert sig_at("monatomic-d1", -SQRT3) == (0, 2, 1)
    assert sig_at("monatomic-d1", -0.9) == (1, 2, 0)
    assert sig_at("monatomic-d1", 0.0) == (1, 1, 1)
    assert sig_at("monatomic-d1", 0.9) == (2, 1, 0)
    assert sig_at("monatomic-d1", SQRT3) == (2, 0, 1)
    assert sig_at("monatomic-d1", 2.0) == (3, 0, 0)


def test_degenerate_block_size_counts_conserved_directions():
    # l = d at u = 0 for one species, d + s - 1 for an s-species mixture
    assert sig_at("monatomic-d3", 0.0) == (1, 1, 3)
    assert sig_at("mixture-d3", 0.0) == (1, 1, 4)
    up = closed_form_speeds(bundle("mixture-d3")[0])["u_plus"]
    assert sig_at("mixture-d3", up) == (5, 0, 1)


def test_streaming_gram_is_affine_in_the_drift():
    _, _, _, op = bundle("monatomic-d3")
    G0 = streaming_gram(op, u=0.0)
    G = streaming_gram(op, u=0.7)
    np.testing.assert_allclose(G, G0 + 0.7 * np.eye(G0.shape[0]), atol=1e-12)


@pytest.mark.parametrize("preset,mults", [
    ("monatomic-d3", (1, 3, 1)),
    ("mixture-d3", (1, 4, 1)),
    ("poly-levels-d3", (1, 3, 1)),
    ("poly-dof-d3", (1, 3, 1)),
])
def test_degenerate_speeds_cluster_to_the_closed_forms(preset, mults):
    model, _, _, op = bundle(preset)
    speeds, mult = degenerate_speeds(op, model)
    ref = closed_form_speeds(model)
    np.testing.assert_allclose(
        speeds, [ref["u_minus"], 0.0, ref["u_plus"]], atol=1e-6)
    assert tuple(mult) == mults


def basis_residuals(basis, op):
    sp = basis.space
    res = {}
    G = weighted_gram(sp, basis.phi)
    res["phi_orth"] = np.abs(G - np.eye(G.shape[0])).max()
    BG = weighted_gram(sp, basis.phi, basis.b[:, None] * basis.phi)
    res["phi_diag"] = np.abs(BG - np.diag(basis.beta)).max()
    l = basis.psi.shape[1]
    if l:
        res["psi_orth"] = np.abs(weighted_gram(sp, basis.psi)
                                 - np.eye(l)).max()
        res["cross_orth"] = np.abs(weighted_gram(sp, basis.phi, basis.psi)).max()
        bpsi = basis.b[:, None] * basis.psi
        res["psi_null"] = np.abs(weighted_gram(sp, basis.psi, bpsi)).max()
        res["phi_psi_null"] = np.abs(weighted_gram(sp, basis.phi, bpsi)).max()
        pair = weighted_gram(sp, basis.psi, basis.b[:, None] * basis.aux)
        res["pairing"] = np.abs(pair - np.diag(basis.alpha)).max()
        res["aux_null"] = np.abs(weighted_gram(sp, basis.aux,
                                               basis.b[:, None] * basis.aux)).max()
        res["aux_phi_null"] = np.abs(weighted_gram(
            sp, basis.phi, basis.b[:, None] * basis.aux)).max()
        lift = np.column_stack([op.apply(basis.aux[:, r]) for r in range(l)])
        res["lift"] = np.abs(lift - bpsi).max()
        res["psi_diag_orth"] = np.abs(weighted_gram(sp, basis.psi_diag)
                                      - np.eye(l)).max()
        bpd = basis.b[:, None] * basis.psi_diag
        res["gamma_diag"] = np.abs(weighted_gram(sp, bpd, bpd)
                                   - np.diag(basis.gamma)).max()
    return res


@pytest.mark.parametrize("u_name", ["interior", "origin", "sonic"])
def test_basis_identities_hold_to_tight_tolerance(u_name):
    model, _, _, _ = bundle("monatomic-d3")
    up = closed_form_speeds(model)["u_plus"]
    u = {"interior": 0.5 * up, "origin": 0.0, "sonic": up}[u_name]
    _, _, _, op = bundle("monatomic-d3", u=u)
    basis = kernel_basis(op)
    for name, val in basis_residuals(basis, op).items():
        assert val < 1e-10, (name, val)


def test_beta_ordering_and_derived_constants():
    model, _, _, op = bundle("monatomic-d3", u=0.6)
    basis = kernel_basis(op)
    k_pos = basis.signature.n_pos
    pos, neg = basis.beta[:k_pos], basis.beta[k_pos:]
    assert np.all(pos > 0) and np.all(np.diff(pos) <= 1e-14)
    assert np.all(neg < 0) and np.all(np.diff(neg) <= 1e-14)
    assert basis.beta_min == np.abs(basis.beta).min()
    # any negative-block direction carries at least its full beta as inflow
    assert basis.beta_hat_max >= 1.0
    _, _, _, op_fast = bundle("monatomic-d3", u=2.5)
    assert kernel_basis(op_fast).beta_hat_max == 1.0


def test_degenerate_alpha_and_gamma_are_positive_decreasing():
    _, _, _, op = bundle("mixture-d3", u=0.0)
    basis = kernel_basis(op)
    assert basis.psi.shape[1] == 4
    assert np.all(basis.alpha > 0)
    assert np.all(np.diff(basis.alpha) <= 1e-14)
    assert np.all(basis.gamma > 0)
    assert np.all(np.diff(basis.gamma) <= 1e-14)


def test_signature_margin_flags_a_near_degenerate_drift():
    model, _, _, _ = bundle("monatomic-d3")
    up = closed_form_speeds(model)["u_plus"]
    _, _, _, op_near = bundle("monatomic-d3", u=up - 1e-7)
    near = signature(op_near)
    assert near.is_marginal and near.n_zero == 0
    _, _, _, op_far = bundle("monatomic-d3", u=0.5 * up)
    assert not signature(op_far).is_marginal
