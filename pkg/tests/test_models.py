"""Model catalog: equilibria, closed-form moments, wall data, speeds."""
import numpy as np
import pytest

import _oracles as orc
from kinhalf import (MODEL_PRESETS, ModelSpec, WallState,
                     boundary_maxwellian_data, closed_form_speeds,
                     default_grid, equilibrium, equilibrium_moments,
                     split_half_spaces, wall_parameter_directions)
from kinhalf.models import (FAMILIES, dirichlet_eta, internal_energy_stats,
                            internal_energy_stat_quadrature, quantum_J,
                            quantum_J_boson_split, riemann_zeta)

from conftest import TEST_NODES, bundle


def test_presets_cover_every_family():
    assert {m.family for m in MODEL_PRESETS.values()} == set(FAMILIES)


@pytest.mark.parametrize("kwargs,match", [
    (dict(family="monatomic", temperature=0.0), "temperature"),
    (dict(family="monatomic", masses=(1.0, 2.0), densities=(1.0, 1.0)),
     "single-species"),
    (dict(family="monatomic", masses=(1.0, 2.0), densities=(1.0,)), "equal length"),
    (dict(family="monatomic-mixture"), "at least 2 species"),
    (dict(family="quantum", dimension=1, quantum_sign=-1), "dimension >= 2"),
    (dict(family="quantum", quantum_sign=0), "quantum_sign"),
    (dict(family="quantum", quantum_sign=1, cutoff_lambda=0.0), "cutoff_lambda > 0"),
    (dict(family="polyatomic-discrete"), "energy_levels"),
    (dict(family="polyatomic-discrete", energy_levels=(0.0, 1.0),
          level_weights=(1.0,)), "level_weights"),
    (dict(family="polyatomic-continuous", internal_dof=()), "internal_dof"),
    (dict(family="polyatomic-mixture", masses=(1.0, 2.0), densities=(1.0, 1.0)),
     "not both"),
    (dict(family="no-such-family"), "unknown family"),
])
def test_model_validation_rejects_bad_inputs(kwargs, match):
    with pytest.raises(ValueError, match=match):
        ModelSpec(**kwargs)


@pytest.mark.parametrize("preset", ["monatomic-d3", "mixture-d3",
                                    "poly-levels-d3", "poly-dof-d3"])
def test_equilibrium_mass_density_matches_model(preset):
    model, sp, eq, _ = bundle(preset)
    assert abs(eq.rho - model.rho) < 1e-8 * model.rho
    assert abs(eq.n - model.n_total) < 1e-8 * model.n_total


@pytest.mark.parametrize("preset", ["monatomic-d1", "monatomic-d3",
                                    "poly-levels-d3", "poly-dof-d3"])
def test_equilibrium_moments_match_grid_sums(preset):
    model, sp, eq, _ = bundle(preset)
    M = eq.weights
    e_over_m = (model.mass * sp.speed ** 2 + 2.0 * sp.energy) / model.mass
    got = {
        "mass": np.sum(sp.weights * M),
        "velocity": np.sum(sp.weights * M * sp.v1 ** 2),
        "mass_energy": np.sum(sp.weights * M * e_over_m),
        "velocity_energy": np.sum(sp.weights * M * sp.v1 ** 2 * e_over_m),
        "energy_energy": np.sum(sp.weights * M * e_over_m ** 2),
    }
    ref = equilibrium_moments(model)
    for key, val in ref.items():
        assert abs(got[key] - val) < 1e-8 * max(1.0, abs(val)), key


def test_poly_moment_closed_forms_use_partition_ratios():
    # two-level system: r1, r2 recomputed from exact high-precision sums
    model = MODEL_PRESETS["poly-levels-d3"]
    kappa = internal_energy_stats(model)
    ref = orc.level_stat(model.energy_levels, model.level_weights,
                         model.temperature)
    assert abs(kappa - ref) < 1e-12


def test_wall_datum_lives_on_outgoing_nodes():
    model, sp, eq, _ = bundle("monatomic-d3")
    wall = WallState(densities=(1.2,), velocity=(0.1, 0.0, 0.0),
                     temperature=1.1)
    u = 0.4
    fb = boundary_maxwellian_data(model, eq, wall, u)
    split = split_half_spaces(sp, u)
    assert np.all(fb[split.minus] == 0.0)
    assert np.max(np.abs(fb[split.plus])) > 1e-3


def test_wall_matching_the_bulk_state_gives_zero_datum():
    model, sp, eq, _ = bundle("mixture-d3")
    wall = WallState(densities=model.densities,
                     velocity=(0.0,) * 3, temperature=model.temperature)
    fb = boundary_maxwellian_data(model, eq, wall, 0.0)
    assert np.max(np.abs(fb)) < 1e-12


@pytest.mark.parametrize("preset", ["monatomic-d3", "mixture-d3",
                                    "poly-levels-d3", "poly-dof-d3"])
def test_wall_jacobian_matches_finite_differences(preset):
    model, sp, eq, _ = bundle(preset)
    d = sp.dimension
    wall = WallState(densities=tuple(1.0 + 0.1 * a for a in
                                     range(model.n_species)),
                     velocity=(0.05,) + (0.0,) * (d - 1), temperature=1.08)
    u = 0.3
    J = wall_parameter_directions(model, eq, wall, u)
    J_fd = orc.fd_wall_jacobian(model, eq, wall, u, h=1e-5)
    assert J.shape == (sp.size, model.n_species + d + 1)
    scale = np.abs(J).max()
    np.testing.assert_allclose(J, J_fd, atol=3e-9 * scale)


def test_wall_state_rejects_nonpositive_parameters():
    with pytest.raises(ValueError, match="temperature"):
        WallState(densities=(1.0,), velocity=(0.0,), temperature=0.0)
    with pytest.raises(ValueError, match="densities"):
        WallState(densities=(0.0,), velocity=(0.0,), temperature=1.0)


def test_wall_data_rejects_quantum_families():
    model, sp, eq, _ = bundle("fermion-d3")
    wall = WallState(densities=(1.0,), velocity=(0.0, 0.0, 0.0),
                     temperature=1.0)
    with pytest.raises(ValueError, match="quantum"):
        boundary_maxwellian_data(model, eq, wall, 0.2)
    with pytest.raises(ValueError, match="quantum"):
        wall_parameter_directions(model, eq, wall, 0.2)


def test_quantum_moments_match_series_and_quadrature_references():
    for s in (3.0, 5.0, 1.0):
        assert abs(quantum_J(s, -1, 0.0) - orc.fermion_J(s)) < 1e-10
    for s, lam in ((3.0, 1.0), (5.0, 1.0), (3.0, 0.1), (5.0, 0.1)):
        ref = orc.boson_J(s, lam)
        assert abs(quantum_J(s, 1, lam) - ref) < 1e-10 * ref
        assert abs(quantum_J_boson_split(s, lam) - ref) < 1e-10 * ref
    with pytest.raises(ValueError, match="diverges"):
        quantum_J(2.0, 1, 0.0)
    with pytest.raises(ValueError, match="sign"):
        quantum_J(3.0, 0, 0.0)


def test_eta_and_zeta_series_match_mpmath():
    import mpmath as mp
    for s in (1.5, 2.5, 0.75, 4.0):
        assert abs(dirichlet_eta(s) - float(mp.altzeta(s))) < 1e-13
    for s in (1.5, 2.5, 4.0):
        assert abs(riemann_zeta(s) - float(mp.zeta(s))) < 1e-12


def test_internal_energy_statistics_by_family():
    assert internal_energy_stats(MODEL_PRESETS["poly-dof-d3"]) == 2.0
    disc = MODEL_PRESETS["poly-levels-d3"]
    assert abs(internal_energy_stats(disc)
               - orc.level_stat(disc.energy_levels, disc.level_weights, 1.0)) < 1e-12
    # quadrature of the continuous weight reproduces delta
    for delta in (2.0, 3.0, 5.0):
        assert abs(internal_energy_stat_quadrature(delta, 1.3) - delta) < 1e-10
    mix = MODEL_PRESETS["poly-mix-d3"]
    want = (2.0 * 1.0 + 3.0 * 0.7) / 1.7
    assert abs(internal_energy_stats(mix) - want) < 1e-12
    with pytest.raises(ValueError, match="polyatomic"):
        internal_energy_stats(MODEL_PRESETS["monatomic-d3"])


def test_closed_form_speeds_for_the_classical_presets():
    ref = closed_form_speeds(MODEL_PRESETS["monatomic-d3"])
    assert abs(ref["u_plus"] - np.sqrt(5.0 / 3.0)) < 1e-14
    assert ref["u0"] == 0.0 and ref["u_minus"] == -ref["u_plus"]

    mix = MODEL_PRESETS["mixture-d3"]
    want = np.sqrt(mix.n_total * mix.temperature / mix.rho) * np.sqrt(5.0 / 3.0)
    assert abs(closed_form_speeds(mix)["u_plus"] - want) < 1e-14

    dof = closed_form_speeds(MODEL_PRESETS["poly-dof-d3"])
    assert abs(dof["u_plus"] - np.sqrt(7.0 / 5.0)) < 1e-14


def test_quantum_speeds_match_independent_moments():
    ferm = closed_form_speeds(MODEL_PRESETS["fermion-d3"])
    assert abs(ferm["u_plus"] - orc.quantum_u_plus(3, 1.0, -1, 0.0)) < 1e-10
    bos = closed_form_speeds(MODEL_PRESETS["boson-d3"])
    assert abs(bos["u_plus"] - orc.quantum_u_plus(3, 1.0, 1, 1.0)) < 1e-10


def test_default_grid_centers_tensor_grids_at_the_drift():
    model = MODEL_PRESETS["monatomic-d3"]
    sp = default_grid(model, u=0.8, nodes=6)
    assert sp.spec.center == 0.8
    assert sp.reflect is not None
    b = sp.v1 + 0.8
    np.testing.assert_allclose(b[sp.reflect], -b, atol=1e-13)
