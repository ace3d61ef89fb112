"""Model families: equilibria, conserved quantities, and closed-form values.

Six variants are supported: monatomic single species, monatomic mixtures,
quantum (Bose/Fermi) gases, polyatomic single species with discrete levels or
a continuous internal energy, and polyatomic mixtures (either subvariant).
Every family supplies an equilibrium weight, the spanning set of collision
invariants, and closed-form degenerate speeds used as exact test anchors.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma as _gamma
from scipy.special import roots_genlaguerre

from .velocity_space import (ComponentRule, DiscreteSpace, GridSpec,
                             build_grid, split_half_spaces)

MONATOMIC = "monatomic"
MONATOMIC_MIXTURE = "monatomic-mixture"
QUANTUM = "quantum"
POLY_DISCRETE = "polyatomic-discrete"
POLY_CONTINUOUS = "polyatomic-continuous"
POLY_MIXTURE = "polyatomic-mixture"

FAMILIES = (MONATOMIC, MONATOMIC_MIXTURE, QUANTUM, POLY_DISCRETE,
            POLY_CONTINUOUS, POLY_MIXTURE)

_MIXTURES = (MONATOMIC_MIXTURE, POLY_MIXTURE)


@dataclass(frozen=True)
class ModelSpec:
    """Physical parameters of one gas model.

    ``energy_levels`` is a flat tuple for the single-species discrete family
    and a tuple of per-species tuples for the mixture variant;
    ``internal_dof`` carries one delta per species for continuous energy.
    Quantum models use ``quantum_sign`` +1 (bosons) or -1 (fermions) and the
    momentum cutoff ``cutoff_lambda`` (in units of sqrt(2T), bosons only
    require it positive).
    """

    family: str
    dimension: int = 3
    masses: tuple[float, ...] = (1.0,)
    densities: tuple[float, ...] = (1.0,)
    temperature: float = 1.0
    quantum_sign: int = 0
    cutoff_lambda: float = 0.0
    energy_levels: tuple = ()
    level_weights: tuple = ()
    internal_dof: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "masses", tuple(float(m) for m in self.masses))
        object.__setattr__(self, "densities", tuple(float(x) for x in self.densities))
        object.__setattr__(self, "internal_dof", tuple(float(x) for x in self.internal_dof))
        if self.family not in FAMILIES:
            raise ValueError("unknown family %r" % (self.family,))
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if len(self.masses) != len(self.densities):
            raise ValueError("masses and densities must have equal length")
        if any(m <= 0 for m in self.masses) or any(x <= 0 for x in self.densities):
            raise ValueError("masses and densities must be positive")
        s = len(self.masses)
        if self.family in _MIXTURES and s < 2:
            raise ValueError("mixture families need at least 2 species")
        if self.family not in _MIXTURES and s != 1:
            raise ValueError("single-species family with %d species" % s)
        if self.family == QUANTUM:
            if self.dimension < 2:
                raise ValueError("quantum family needs dimension >= 2")
            if self.quantum_sign not in (-1, 1):
                raise ValueError("quantum_sign must be +1 (boson) or -1 (fermion)")
            if self.cutoff_lambda < 0:
                raise ValueError("cutoff_lambda must be nonnegative")
            if self.quantum_sign == 1 and self.cutoff_lambda <= 0:
                raise ValueError("bosons need cutoff_lambda > 0: "
                                 "nodes are restricted to |p| >= lambda*sqrt(2T)")
        if self.family == POLY_DISCRETE:
            if not self.energy_levels:
                raise ValueError("polyatomic-discrete needs energy_levels")
            lw = self.level_weights or (1.0,) * len(self.energy_levels)
            if len(lw) != len(self.energy_levels) or any(w <= 0 for w in lw):
                raise ValueError("level_weights must be positive, one per level")
            object.__setattr__(self, "energy_levels",
                               tuple(float(e) for e in self.energy_levels))
            object.__setattr__(self, "level_weights", tuple(float(w) for w in lw))
        if self.family == POLY_CONTINUOUS:
            if len(self.internal_dof) != 1 or self.internal_dof[0] <= 0:
                raise ValueError("polyatomic-continuous needs one positive internal_dof")
        if self.family == POLY_MIXTURE:
            has_levels = bool(self.energy_levels)
            has_dof = bool(self.internal_dof)
            if has_levels == has_dof:
                raise ValueError("polyatomic-mixture needs energy_levels per species "
                                 "or internal_dof per species, not both")
            if has_levels:
                if len(self.energy_levels) != s:
                    raise ValueError("need one level tuple per species")
                levels = tuple(tuple(float(e) for e in lv) for lv in self.energy_levels)
                lw = self.level_weights or tuple((1.0,) * len(lv) for lv in levels)
                if len(lw) != s or any(len(a) != len(b) for a, b in zip(lw, levels)):
                    raise ValueError("level_weights shape must match energy_levels")
                if any(w <= 0 for ws in lw for w in ws):
                    raise ValueError("level_weights must be positive")
                object.__setattr__(self, "energy_levels", levels)
                object.__setattr__(self, "level_weights",
                                   tuple(tuple(float(w) for w in ws) for ws in lw))
            else:
                if len(self.internal_dof) != s or any(x <= 0 for x in self.internal_dof):
                    raise ValueError("need one positive internal_dof per species")

    @property
    def n_species(self) -> int:
        return len(self.masses)

    @property
    def mass(self) -> float:
        return self.masses[0]

    @property
    def rho(self) -> float:
        return float(sum(m * x for m, x in zip(self.masses, self.densities)))

    @property
    def n_total(self) -> float:
        return float(sum(self.densities))

    @property
    def is_polyatomic(self) -> bool:
        return self.family in (POLY_DISCRETE, POLY_CONTINUOUS, POLY_MIXTURE)

    @property
    def has_discrete_levels(self) -> bool:
        return self.family == POLY_DISCRETE or (
            self.family == POLY_MIXTURE and bool(self.energy_levels))

    def levels_of(self, i: int) -> tuple[float, ...]:
        if self.family == POLY_DISCRETE:
            return self.energy_levels
        return self.energy_levels[i]

    def level_weights_of(self, i: int) -> tuple[float, ...]:
        if self.family == POLY_DISCRETE:
            return self.level_weights
        return self.level_weights[i]


@dataclass
class EquilibriumState:
    """Equilibrium weights sampled on a grid plus derived scalar statistics.

    ``weights`` is the Maxwellian M (or Planckian P for quantum),
    ``sqrt_weights`` the linearization weight (sqrt M, or sqrt of the
    variance weight R = P(1 +/- P) for quantum).
    """

    model: ModelSpec
    space: DiscreteSpace
    weights: np.ndarray
    sqrt_weights: np.ndarray
    variance_weights: np.ndarray
    rho: float
    n: float
    q_sums: np.ndarray | None = None   # (s, 3) partition sums for discrete levels
    energy_stat: float = 0.0           # kappa, delta, or their mixture averages


def _node_masses(model: ModelSpec, space: DiscreteSpace) -> np.ndarray:
    return np.asarray(model.masses, dtype=float)[space.species]


def _node_level_weights(space: DiscreteSpace) -> np.ndarray:
    lw = np.empty(space.size)
    for ci, sl in enumerate(space.component_slices):
        lw[sl] = space.spec.components[ci].level_weight
    return lw


def _grid_q_sums(model: ModelSpec, space: DiscreteSpace, T: float) -> np.ndarray:
    """Partition sums Q_j, j in {0,1,2}, over the levels the grid represents."""
    out = np.zeros((model.n_species, 3))
    for rule in space.spec.components:
        bw = rule.level_weight * np.exp(-rule.energy / T)
        for j in range(3):
            out[rule.species, j] += bw * rule.energy ** j
    return out


def q_sums(levels, weights, T: float) -> tuple[float, float, float]:
    e = np.asarray(levels, dtype=float)
    w = np.asarray(weights, dtype=float)
    b = w * np.exp(-e / T)
    return float(b.sum()), float((b * e).sum()), float((b * e * e).sum())


def _family_weights(model: ModelSpec, space: DiscreteSpace, densities,
                    T: float, vshift: float = 0.0, drift=None) -> np.ndarray:
    """Maxwellian-type equilibrium values at nodes, drifted and shifted.

    Evaluates the family distribution with number densities ``densities``
    and temperature ``T`` at w = v + vshift*e1 - drift.  Quantum models are
    handled separately (Planckians do not fit the Gaussian template).
    """
    if model.family == QUANTUM:
        raise ValueError("quantum families have no Maxwellian-template weights")
    d = space.dimension
    mk = _node_masses(model, space)
    w1 = space.v1 + vshift
    wp = space.vperp
    if drift is not None:
        drift = np.asarray(drift, dtype=float)
        if drift.shape != (d,):
            raise ValueError("drift must have length d")
        w1 = w1 - drift[0]
        if d > 1:
            wp = wp - drift[1:]
    sq = w1 ** 2 + (wp ** 2).sum(axis=1)
    pref = mk ** (d / 2.0) / (2.0 * np.pi * T) ** (d / 2.0)
    expo = np.exp(-(mk * sq + 2.0 * space.energy) / (2.0 * T))

    dens = np.asarray(densities, dtype=float)
    if model.family == MONATOMIC:
        fac = np.full(space.size, model.mass * dens[0])
    elif model.family == MONATOMIC_MIXTURE:
        fac = dens[space.species]
    elif model.family == POLY_DISCRETE:
        q0 = _grid_q_sums(model, space, T)[0, 0]
        fac = model.mass * dens[0] * _node_level_weights(space) / q0
    elif model.family == POLY_CONTINUOUS:
        delta = model.internal_dof[0]
        q = _gamma(delta / 2.0) * T ** (delta / 2.0)
        fac = model.mass * dens[0] * space.energy ** (delta / 2.0 - 1.0) / q
    else:  # POLY_MIXTURE
        if model.has_discrete_levels:
            q0 = _grid_q_sums(model, space, T)[:, 0]
            fac = dens[space.species] * _node_level_weights(space) / q0[space.species]
        else:
            delta = np.asarray(model.internal_dof)[space.species]
            q = _gamma(delta / 2.0) * T ** (delta / 2.0)
            fac = dens[space.species] * space.energy ** (delta / 2.0 - 1.0) / q
    return fac * pref * expo


def equilibrium(model: ModelSpec, space: DiscreteSpace) -> EquilibriumState:
    """Sample the family equilibrium on the grid.

    For quantum models the Planckian P and the variance weight R = P(1 +/- P)
    are evaluated in the overflow-free form e^{-x}/(1 -/+ e^{-x}); bosons are
    rejected below the cutoff |p| < lambda*sqrt(2T).
    """
    if space.n_species != model.n_species:
        raise ValueError("grid species count does not match the model")
    T = model.temperature
    if model.family == QUANTUM:
        x = space.speed ** 2 / (2.0 * T)
        if model.quantum_sign == 1:
            if np.any(x < model.cutoff_lambda ** 2 * (1.0 - 1e-12)):
                raise ValueError("boson weights need |p| >= lambda*sqrt(2T); "
                                 "grid has nodes below the cutoff")
        e = np.exp(-x)
        den = 1.0 - model.quantum_sign * e
        P = e / den
        R = e / den ** 2
        n = float(np.sum(space.weights * P))
        return EquilibriumState(model=model, space=space, weights=P,
                                sqrt_weights=np.sqrt(R), variance_weights=R,
                                rho=n, n=n)

    M = _family_weights(model, space, model.densities, T)
    if np.any(M <= 0):
        raise ValueError("nonpositive equilibrium weight")
    qs = _grid_q_sums(model, space, T) if model.has_discrete_levels else None
    return EquilibriumState(model=model, space=space, weights=M,
                            sqrt_weights=np.sqrt(M), variance_weights=M,
                            rho=model.rho, n=model.n_total, q_sums=qs,
                            energy_stat=(internal_energy_stats(model)
                                         if model.is_polyatomic else 0.0))


def collision_invariants(model: ModelSpec, space: DiscreteSpace,
                         eq: EquilibriumState) -> np.ndarray:
    """Spanning set of ker L, one column per conserved quantity.

    Order: species masses (s columns), momentum along each axis (d columns),
    total energy (1 column).  Mixtures carry the per-node mass factor on the
    momentum and energy columns; polyatomic energies include the internal
    part, m|v|^2 + 2E.
    """
    d = space.dimension
    sm = eq.sqrt_weights
    mk = _node_masses(model, space)
    cols = []
    for a in range(model.n_species):
        cols.append(np.where(space.species == a, sm, 0.0))
    vfull = np.concatenate([space.v1[:, None], space.vperp], axis=1)
    mixture = model.family in _MIXTURES
    for j in range(d):
        cols.append((mk if mixture else 1.0) * sm * vfull[:, j])
    if model.family in (MONATOMIC, MONATOMIC_MIXTURE):
        cols.append((mk if mixture else 1.0) * sm * space.speed ** 2)
    elif model.family == QUANTUM:
        cols.append(sm * space.speed ** 2)
    else:
        cols.append(sm * (mk * space.speed ** 2 + 2.0 * space.energy))
    return np.stack(cols, axis=1)


def moment_closed_form(a: float, d: int, kind: str) -> float:
    """Exact Gaussian moments of e^{-a|v|^2} in d dimensions."""
    if a <= 0:
        raise ValueError("a must be positive")
    base = (np.pi / a) ** (d / 2.0)
    if kind == "mass":
        return base
    if kind == "velocity":           # (e^{-a|v|^2} v1 | v1)
        return base / (2.0 * a)
    if kind == "speed_squared":      # (e^{-a|v|^2} | |v|^2)
        return base * d / (2.0 * a)
    if kind == "fourth":             # (e^{-a|v|^2} | |v|^4)
        return base * d * (d + 2) / (4.0 * a * a)
    raise ValueError("unknown moment kind %r" % (kind,))


def quantum_moment_closed_form(model: ModelSpec, kind: str) -> float:
    """Moments of the variance weight R against 1, p1^2, |p|^2, |p|^4."""
    if model.family != QUANTUM:
        raise ValueError("quantum moments need the quantum family")
    d, T = model.dimension, model.temperature
    lam, sgn = model.cutoff_lambda, model.quantum_sign
    base = (2.0 * np.pi * T) ** (d / 2.0)
    if kind == "mass":
        return base * quantum_J(d - 2.0, sgn, lam)
    if kind == "velocity":
        return base * T * quantum_J(float(d), sgn, lam)
    if kind == "speed_squared":
        return base * d * T * quantum_J(float(d), sgn, lam)
    if kind == "fourth":
        return base * d * (d + 2) * T * T * quantum_J(d + 2.0, sgn, lam)
    raise ValueError("unknown moment kind %r" % (kind,))


def equilibrium_moments(model: ModelSpec) -> dict[str, float]:
    """Closed-form weighted moments of the single-species equilibrium.

    The energy vector is scaled as sqrt(M)(m|v|^2 + 2E)/m so that the five
    values below hold with partition ratios Q1/Q0 and Q2/Q0 (zero for
    monatomic, exact Gamma-function ratios for continuous energy).
    """
    d, T, m, rho = model.dimension, model.temperature, model.mass, model.rho
    if model.family == MONATOMIC:
        r1, r2 = 0.0, 0.0
    elif model.family == POLY_DISCRETE:
        q0, q1, q2 = q_sums(model.energy_levels, model.level_weights, T)
        r1, r2 = q1 / q0, q2 / q0
    elif model.family == POLY_CONTINUOUS:
        delta = model.internal_dof[0]
        r1 = delta * T / 2.0
        r2 = delta * (delta + 2.0) * T * T / 4.0
    else:
        raise ValueError("closed-form moments cover single-species "
                         "Maxwellian families only")
    return {
        "mass": rho,
        "velocity": rho * T / m,
        "mass_energy": rho / m * (d * T + 2.0 * r1),
        "velocity_energy": rho / m ** 2 * ((d + 2) * T * T + 2.0 * T * r1),
        "energy_energy": rho / m ** 2 * (d * (d + 2) * T * T
                                         + 4.0 * d * T * r1 + 4.0 * r2),
    }


def dirichlet_eta(s: float, terms: int = 60) -> float:
    """Alternating zeta value by the Euler-transformed series."""
    if s <= 0:
        raise ValueError("need s > 0")
    a = (np.arange(terms) + 1.0) ** (-s)
    total = 0.0
    sign = 1.0
    for n in range(terms):
        total += sign * a[0] / 2.0 ** (n + 1)
        a = a[1:] - a[:-1]
        sign = -sign
    return total


def riemann_zeta(s: float) -> float:
    if s <= 1:
        raise ValueError("zeta(s) diverges for s <= 1")
    return dirichlet_eta(s) / (1.0 - 2.0 ** (1.0 - s))


def quantum_J(s: float, sign: int, lam: float = 0.0, rtol: float = 1e-12) -> float:
    """Radial moment J_s of the variance weight, fermion (-) or boson (+).

    The integrand is kept in the decaying form r^{s+1} e^{-r^2}/(1 -/+
    e^{-r^2})^2.  For bosons the integral diverges at lam = 0 unless s > 2.
    """
    if s < 0:
        raise ValueError("need s >= 0")
    if sign not in (-1, 1):
        raise ValueError("sign must be +1 (boson) or -1 (fermion)")
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    if sign == 1 and lam == 0 and s <= 2:
        raise ValueError("boson J_s diverges at lam = 0 for s <= 2")

    def f(r: float) -> float:
        e = np.exp(-r * r)
        return r ** (s + 1.0) * e / (1.0 - sign * e) ** 2

    cut = max(12.0, lam + 1.0)
    val = quad(f, lam, cut, epsabs=1e-15, epsrel=rtol, limit=300)[0]
    val += quad(f, cut, np.inf, epsabs=1e-15, epsrel=rtol)[0]
    return 2.0 / _gamma(s / 2.0 + 1.0) * val


def quantum_J_boson_split(s: float, lam: float, rtol: float = 1e-12) -> float:
    """Boson J_s via the boundary-term plus one-power-lower integral form."""
    if lam < 0 or (lam == 0 and s <= 2):
        raise ValueError("need lam > 0, or s > 2 at lam = 0")
    term1 = 0.0
    if lam > 0:
        term1 = lam ** s / (_gamma(s / 2.0 + 1.0) * np.expm1(lam ** 2))
    if s > 0:
        def f(y: float) -> float:
            e = np.exp(-y)
            return y ** (s / 2.0 - 1.0) * e / (1.0 - e)

        cut = max(30.0, lam ** 2 + 1.0)
        t2 = quad(f, lam ** 2, cut, epsabs=1e-15, epsrel=rtol, limit=300)[0]
        t2 += quad(f, cut, np.inf, epsabs=1e-15, epsrel=rtol)[0]
        term1 += t2 / _gamma(s / 2.0)
    return term1


def internal_energy_stats(model: ModelSpec) -> float:
    """Effective internal-degrees statistic of a polyatomic family.

    Discrete levels give the variance statistic 2(Q0 Q2 - Q1^2)/(T Q0)^2;
    continuous energy gives exactly delta; mixtures give the density-weighted
    averages of the per-species values.
    """
    T = model.temperature
    if model.family == POLY_DISCRETE:
        q0, q1, q2 = q_sums(model.energy_levels, model.level_weights, T)
        return 2.0 * (q0 * q2 - q1 * q1) / (T * T * q0 * q0)
    if model.family == POLY_CONTINUOUS:
        return model.internal_dof[0]
    if model.family == POLY_MIXTURE:
        n = model.n_total
        if model.has_discrete_levels:
            acc = 0.0
            for i, dens in enumerate(model.densities):
                q0, q1, q2 = q_sums(model.levels_of(i), model.level_weights_of(i), T)
                acc += dens * (q0 * q2 - q1 * q1) / (q0 * q0)
            return 2.0 * acc / (n * T * T)
        return float(sum(x * dens for x, dens in
                         zip(model.internal_dof, model.densities)) / n)
    raise ValueError("internal-energy statistics need a polyatomic family")


def internal_energy_stat_quadrature(delta: float, T: float, n: int = 64) -> float:
    """Variance statistic of the weight I^{delta/2-1} e^{-I/T} by quadrature."""
    y, w = roots_genlaguerre(n, delta / 2.0 - 1.0)
    mean = T * float((w * y).sum() / w.sum())
    second = T * T * float((w * y * y).sum() / w.sum())
    return 2.0 * (second - mean * mean) / (T * T)


def closed_form_speeds(model: ModelSpec) -> dict[str, float]:
    """Degenerate drift speeds u0 = 0 and u+- for every family.

    u+- = sqrt(theta (d+2+c)/(d+c)) with theta the family thermal speed
    squared (T/m, or nT/rho for mixtures) and c the internal-energy
    statistic; quantum replaces the ratio by J_{d+2}/J_d.
    """
    d, T = model.dimension, model.temperature
    if model.family == QUANTUM:
        jn = quantum_J(float(d), model.quantum_sign, model.cutoff_lambda)
        jd = quantum_J(d + 2.0, model.quantum_sign, model.cutoff_lambda)
        up = np.sqrt(jd / jn * T * (d + 2.0) / d)
        return {"u0": 0.0, "u_plus": float(up), "u_minus": float(-up)}
    if model.family in (MONATOMIC, POLY_DISCRETE, POLY_CONTINUOUS):
        theta = T / model.mass
    else:
        theta = model.n_total * T / model.rho
    c = internal_energy_stats(model) if model.is_polyatomic else 0.0
    up = np.sqrt(theta * (d + 2.0 + c) / (d + c))
    return {"u0": 0.0, "u_plus": float(up), "u_minus": float(-up)}


def default_grid(model: ModelSpec, u: float = 0.0, nodes: int | None = None,
                 energy_nodes: int | None = None,
                 angular_nodes: int | None = None,
                 extent: float | None = None) -> DiscreteSpace:
    """Build a grid suited to the family at drift u.

    Tensor grids are symmetric about v = -u (exact specular reflection);
    per-species velocity scales are sqrt(2T/m).  Quantum families use the
    radial design starting at the cutoff.
    """
    d, T = model.dimension, model.temperature
    if model.family == QUANTUM:
        spec = GridSpec(dimension=d, nodes=nodes or 48,
                        cutoff_lambda=model.cutoff_lambda, temperature=T,
                        radial=True,
                        angular_nodes=angular_nodes or (8 if d == 3 else 16),
                        quantum_sign=model.quantum_sign)
        return build_grid(spec)

    if nodes is None:
        nodes = 16 if d == 1 else (12 if d == 2 else 10)
    rules = []
    e_nodes = 0
    for a, m in enumerate(model.masses):
        scale = float(np.sqrt(2.0 * T / m))
        if model.family in (MONATOMIC, MONATOMIC_MIXTURE):
            rules.append(ComponentRule(species=a, mass=m, scale=scale))
        elif model.has_discrete_levels:
            for e, w in zip(model.levels_of(a), model.level_weights_of(a)):
                rules.append(ComponentRule(species=a, mass=m, scale=scale,
                                           energy=e, level_weight=w))
        else:
            delta = model.internal_dof[a]
            e_nodes = energy_nodes or 8
            rules.append(ComponentRule(species=a, mass=m, scale=scale,
                                       energy_alpha=delta / 2.0 - 1.0,
                                       energy_scale=T))
    spec = GridSpec(dimension=d, nodes=nodes, extent=extent,
                    energy_nodes=e_nodes, center=u, temperature=T,
                    components=tuple(rules))
    return build_grid(spec)


@dataclass(frozen=True)
class WallState:
    """Interface Maxwellian parameters: densities per species, drift, T0."""

    densities: tuple[float, ...]
    velocity: tuple[float, ...]
    temperature: float

    def __post_init__(self) -> None:
        if self.temperature <= 0:
            raise ValueError("wall temperature must be positive")
        if any(x <= 0 for x in self.densities):
            raise ValueError("wall densities must be positive")


def boundary_maxwellian_data(model: ModelSpec, eq: EquilibriumState,
                             wall: WallState, u: float) -> np.ndarray:
    """Boundary datum (M_B(v+u) - M)/sqrt(M), zero off the outgoing cone.

    M_B is the wall Maxwellian with the wall's densities, drift and
    temperature, evaluated in the shifted velocity; quantum families have
    no Maxwellian wall datum and are rejected.
    """
    if model.family == QUANTUM:
        raise ValueError("wall Maxwellian data is undefined for quantum families")
    space = eq.space
    if len(wall.densities) != model.n_species:
        raise ValueError("wall needs one density per species")
    if len(wall.velocity) != space.dimension:
        raise ValueError("wall velocity must have length d")
    MB = _family_weights(model, space, wall.densities, wall.temperature,
                         vshift=u, drift=wall.velocity)
    split = split_half_spaces(space, u)
    return np.where(split.plus, (MB - eq.weights) / eq.sqrt_weights, 0.0)


def wall_parameter_directions(model: ModelSpec, eq: EquilibriumState,
                              wall: WallState, u: float) -> np.ndarray:
    """Analytic derivatives of the boundary datum in the d+s+1 wall knobs.

    Column order: d/dn0 per species, d/du0_j per axis, d/dT0.
    """
    if model.family == QUANTUM:
        raise ValueError("wall Maxwellian data is undefined for quantum families")
    space = eq.space
    d = space.dimension
    T0 = wall.temperature
    mk = _node_masses(model, space)
    MB = _family_weights(model, space, wall.densities, wall.temperature,
                         vshift=u, drift=wall.velocity)
    split = split_half_spaces(space, u)
    base = np.where(split.plus, MB / eq.sqrt_weights, 0.0)

    drift = np.asarray(wall.velocity, dtype=float)
    w1 = space.v1 + u - drift[0]
    wp = space.vperp - drift[1:] if d > 1 else space.vperp
    sq = w1 ** 2 + (wp ** 2).sum(axis=1)

    cols = []
    for a in range(model.n_species):
        cols.append(np.where(space.species == a, base / wall.densities[a], 0.0))
    wfull = np.concatenate([w1[:, None], wp], axis=1)
    for j in range(d):
        cols.append(base * mk * wfull[:, j] / T0)

    dt = -d / (2.0 * T0) + mk * sq / (2.0 * T0 ** 2)
    if model.has_discrete_levels:
        qs = _grid_q_sums(model, space, T0)
        ratio = (qs[:, 1] / qs[:, 0])[space.species]
        dt = dt + (space.energy - ratio) / T0 ** 2
    elif model.family == POLY_CONTINUOUS or (model.family == POLY_MIXTURE
                                             and model.internal_dof):
        delta = np.asarray(model.internal_dof)[
            space.species if model.family == POLY_MIXTURE else np.zeros(space.size, int)]
        dt = dt + space.energy / T0 ** 2 - delta / (2.0 * T0)
    cols.append(base * dt)
    return np.stack(cols, axis=1)


MODEL_PRESETS: dict[str, ModelSpec] = {
    "monatomic-d1": ModelSpec(MONATOMIC, dimension=1),
    "monatomic-d3": ModelSpec(MONATOMIC, dimension=3),
    "mixture-d3": ModelSpec(MONATOMIC_MIXTURE, dimension=3,
                            masses=(1.0, 2.0), densities=(1.0, 0.7)),
    "fermion-d3": ModelSpec(QUANTUM, dimension=3, quantum_sign=-1),
    "boson-d3": ModelSpec(QUANTUM, dimension=3, quantum_sign=1,
                          cutoff_lambda=1.0),
    "poly-levels-d3": ModelSpec(POLY_DISCRETE, dimension=3,
                                energy_levels=(0.0, 1.0, 2.5)),
    "poly-dof-d3": ModelSpec(POLY_CONTINUOUS, dimension=3, internal_dof=(2.0,)),
    "poly-mix-d3": ModelSpec(POLY_MIXTURE, dimension=3, masses=(1.0, 2.0),
                             densities=(1.0, 0.7), internal_dof=(2.0, 3.0)),
}
