"""Discrete velocity (and internal-energy) spaces with weighted quadrature.

Nodes carry positive quadrature weights; every inner product in the package is
the weighted sum over nodes.  Grids are tensor products of per-axis Gauss rules
per component (species, or species x energy level), except the quantum family
which lives on a radial x angular product grid.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.special import roots_genlaguerre, roots_legendre

# radial extent of the quantum grid past the cutoff, in units of sqrt(2T)
RADIAL_SPAN = 8.0

SONIC_TOL = 1e-10


@dataclass(frozen=True)
class ComponentRule:
    """Build recipe for one grid component (a species or a species/level pair)."""

    species: int = 0
    mass: float = 1.0
    scale: float = np.sqrt(2.0)        # velocity node scale per axis
    energy: float = 0.0                # fixed internal energy (discrete levels)
    energy_alpha: float | None = None  # Laguerre exponent for continuous energy
    energy_scale: float = 1.0          # temperature scale of the energy nodes
    level_weight: float = 1.0          # discrete-level degeneracy factor


@dataclass(frozen=True)
class GridSpec:
    """User-facing grid parameters.

    ``center`` is the axis-1 symmetry speed: nodes are placed symmetrically
    about v = -center so that the specular reflection about that plane is an
    exact node permutation.  ``extent`` overrides the natural per-component
    velocity scale so nodes fill [-extent, extent].
    """

    dimension: int
    nodes: int
    extent: float | None = None
    energy_nodes: int = 0
    cutoff_lambda: float = 0.0
    center: float = 0.0
    temperature: float = 1.0
    radial: bool = False
    angular_nodes: int = 0
    quantum_sign: int = 0
    components: tuple[ComponentRule, ...] = (ComponentRule(),)

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if self.nodes < 2:
            raise ValueError("need at least 2 nodes per axis")
        if self.radial and self.dimension < 2:
            raise ValueError("radial grids need dimension >= 2")
        if self.cutoff_lambda < 0:
            raise ValueError("cutoff_lambda must be nonnegative")


@dataclass
class DiscreteSpace:
    """Concrete node set with quadrature weights.

    ``component`` indexes grid blocks, ``species`` the physical species;
    they differ for discrete internal-energy levels.  ``reflect`` is the
    axis-1 mirror permutation when the grid is symmetric, else None.
    """

    spec: GridSpec
    v1: np.ndarray
    vperp: np.ndarray           # (N, d-1)
    speed: np.ndarray
    energy: np.ndarray
    species: np.ndarray
    component: np.ndarray
    weights: np.ndarray
    reflect: np.ndarray | None
    component_slices: tuple[slice, ...] = field(default_factory=tuple)

    @property
    def size(self) -> int:
        return self.v1.shape[0]

    @property
    def dimension(self) -> int:
        return self.spec.dimension

    @property
    def n_components(self) -> int:
        return len(self.component_slices)

    @property
    def n_species(self) -> int:
        return int(self.species.max()) + 1

    def inner(self, f: np.ndarray, g: np.ndarray) -> float:
        return float(np.sum(self.weights * f * g))

    def norm(self, f: np.ndarray) -> float:
        return float(np.sqrt(max(self.inner(f, f), 0.0)))


@dataclass
class HalfSpaceSplit:
    """Sign split of the transport coefficients b_k = v1_k + u."""

    u: float
    b: np.ndarray
    plus: np.ndarray
    minus: np.ndarray

    @property
    def n_plus(self) -> int:
        return int(np.count_nonzero(self.plus))

    @property
    def n_minus(self) -> int:
        return int(np.count_nonzero(self.minus))

    @property
    def b_plus(self) -> np.ndarray:
        return np.where(self.plus, self.b, 0.0)

    @property
    def b_minus(self) -> np.ndarray:
        return np.where(self.minus, -self.b, 0.0)

    @property
    def b_abs(self) -> np.ndarray:
        return np.abs(self.b)

    def project_plus(self, f: np.ndarray) -> np.ndarray:
        return np.where(self.plus, f, 0.0)

    def project_minus(self, f: np.ndarray) -> np.ndarray:
        return np.where(self.minus, f, 0.0)


def _symmetrize(x: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # force bit-exact mirror symmetry so reflections are exact permutations
    return 0.5 * (x - x[::-1]), 0.5 * (w + w[::-1])


def _hermite_axis(n: int, scale: float) -> tuple[np.ndarray, np.ndarray]:
    x, w = hermgauss(n)
    x, wx = _symmetrize(x, w * np.exp(x * x))
    return scale * x, scale * wx


def _energy_axis(rule: ComponentRule, n: int) -> tuple[np.ndarray, np.ndarray]:
    alpha = rule.energy_alpha
    y, w = roots_genlaguerre(n, alpha)
    nodes = rule.energy_scale * y
    weights = rule.energy_scale * w * np.exp(y) * y ** (-alpha)
    return nodes, weights


def _tensor_component(spec: GridSpec, rule: ComponentRule, comp_idx: int) -> dict:
    d = spec.dimension
    scale = rule.scale
    if spec.extent is not None:
        xmax = float(hermgauss(spec.nodes)[0].max())
        scale = spec.extent / xmax
    ax1_nodes, ax1_w = _hermite_axis(spec.nodes, scale)
    ax1_nodes = ax1_nodes - spec.center
    mirror = np.arange(spec.nodes)[::-1].copy()
    if np.any(np.abs(ax1_nodes + spec.center) < SONIC_TOL * max(1.0, scale)):
        # sonic node on the symmetry plane: shift by half the minimal gap
        gap = np.min(np.diff(np.sort(ax1_nodes)))
        ax1_nodes = ax1_nodes + 0.5 * gap
        mirror = None

    axes_nodes = [ax1_nodes]
    axes_w = [ax1_w]
    for _ in range(d - 1):
        xs, ws = _hermite_axis(spec.nodes, scale)
        axes_nodes.append(xs)
        axes_w.append(ws)

    if rule.energy_alpha is not None and spec.energy_nodes > 0:
        e_nodes, e_w = _energy_axis(rule, spec.energy_nodes)
    else:
        e_nodes, e_w = np.array([rule.energy]), np.array([1.0])

    grids = np.meshgrid(*axes_nodes, e_nodes, indexing="ij")
    wgrids = np.meshgrid(*axes_w, e_w, indexing="ij")
    v1 = grids[0].ravel()
    vperp = np.stack([g.ravel() for g in grids[1:d]], axis=1) if d > 1 else np.zeros((v1.size, 0))
    energy = grids[d].ravel()
    weights = np.ones_like(v1)
    for wg in wgrids:
        weights = weights * wg.ravel()
    speed = np.sqrt(v1 ** 2 + (vperp ** 2).sum(axis=1))

    reflect = None
    if mirror is not None:
        n_rest = v1.size // spec.nodes
        idx = np.arange(v1.size).reshape(spec.nodes, n_rest)
        reflect = idx[::-1, :].ravel()
    return dict(v1=v1, vperp=vperp, speed=speed, energy=energy, weights=weights,
                reflect=reflect, species=np.full(v1.size, rule.species),
                component=np.full(v1.size, comp_idx))


AZIMUTHAL_NODES = 8


def _radial_component(spec: GridSpec, rule: ComponentRule, comp_idx: int) -> dict:
    """Spherical-coordinate grid: Legendre radially, exact low-order angulars.

    d=2: polar (r, theta) with equispaced theta (trig moments exact).
    d=3: (r, t=cos, theta) with Gauss-Legendre in t and equispaced theta.
    """
    d = spec.dimension
    T = spec.temperature
    if spec.center != 0.0:
        raise ValueError("radial grids support center = 0 only")
    if d not in (2, 3):
        raise ValueError("radial grids are implemented for d in {2, 3}")
    r0 = spec.cutoff_lambda * np.sqrt(2.0 * T)
    r1 = r0 + RADIAL_SPAN * np.sqrt(2.0 * T)
    z, wz = roots_legendre(spec.nodes)
    r = 0.5 * (r1 - r0) * (z + 1.0) + r0
    wr = 0.5 * (r1 - r0) * wz

    if d == 2:
        m = spec.angular_nodes if spec.angular_nodes > 0 else 16
        m = 4 * ((m + 3) // 4)  # multiple of 4: mirror-closed, no v1 = 0 node
        theta = 2.0 * np.pi * (np.arange(m) + 0.5) / m
        mirror_theta = (m // 2 - 1 - np.arange(m)) % m  # theta -> pi - theta
        ct, st = np.cos(theta), np.sin(theta)
        ct = 0.5 * (ct - ct[mirror_theta])  # bit-exact mirror antisymmetry
        st = 0.5 * (st + st[mirror_theta])
        R, Ct = np.meshgrid(r, ct, indexing="ij")
        WR, St = np.meshgrid(wr, st, indexing="ij")
        v1 = (R * Ct).ravel()
        vperp = (R * St).ravel()[:, None]
        weights = (WR * R * (2.0 * np.pi / m)).ravel()
        idx = np.arange(v1.size).reshape(spec.nodes, m)
        reflect = idx[:, mirror_theta].ravel()
    else:
        nt = spec.angular_nodes if spec.angular_nodes > 0 else min(spec.nodes, 16)
        if nt % 2:
            nt += 1  # even count keeps t -> -t an exact node map
        t, wt = _symmetrize(*roots_legendre(nt))
        m = AZIMUTHAL_NODES
        theta = 2.0 * np.pi * (np.arange(m) + 0.5) / m
        R, Tt, Th = np.meshgrid(r, t, theta, indexing="ij")
        WR, WT = np.meshgrid(wr, wt, indexing="ij")
        v1 = (R * Tt).ravel()
        sperp = R * np.sqrt(np.clip(1.0 - Tt ** 2, 0.0, None))
        vperp = np.stack([(sperp * np.cos(Th)).ravel(), (sperp * np.sin(Th)).ravel()], axis=1)
        weights = (WR[:, :, None] * R ** 2 * WT[:, :, None] * (2.0 * np.pi / m)).ravel()
        idx = np.arange(v1.size).reshape(spec.nodes, nt, m)
        reflect = idx[:, ::-1, :].ravel()

    speed = np.sqrt(v1 ** 2 + (vperp ** 2).sum(axis=1))
    return dict(v1=v1, vperp=vperp, speed=speed,
                energy=np.zeros_like(v1), weights=weights, reflect=reflect,
                species=np.full(v1.size, rule.species),
                component=np.full(v1.size, comp_idx))


def build_grid(spec: GridSpec) -> DiscreteSpace:
    """Assemble the discrete space described by ``spec``.

    Rejects any grid carrying a node with v + center = 0 exactly (the
    transport coefficient must be invertible).
    """
    parts = []
    for ci, rule in enumerate(spec.components):
        if spec.radial:
            parts.append(_radial_component(spec, rule, ci))
        else:
            parts.append(_tensor_component(spec, rule, ci))

    offsets = np.cumsum([0] + [p["v1"].size for p in parts])
    slices = tuple(slice(offsets[i], offsets[i + 1]) for i in range(len(parts)))
    reflect = None
    if all(p["reflect"] is not None for p in parts):
        reflect = np.concatenate([p["reflect"] + offsets[i] for i, p in enumerate(parts)])

    space = DiscreteSpace(
        spec=spec,
        v1=np.concatenate([p["v1"] for p in parts]),
        vperp=np.concatenate([p["vperp"] for p in parts]),
        speed=np.concatenate([p["speed"] for p in parts]),
        energy=np.concatenate([p["energy"] for p in parts]),
        species=np.concatenate([p["species"] for p in parts]),
        component=np.concatenate([p["component"] for p in parts]),
        weights=np.concatenate([p["weights"] for p in parts]),
        reflect=reflect,
        component_slices=slices,
    )
    if np.any(space.weights <= 0):
        raise ValueError("nonpositive quadrature weight in assembled grid")
    b = space.v1 + spec.center
    if np.any(np.abs(b) < SONIC_TOL * max(1.0, float(np.max(np.abs(b))))):
        raise ValueError("grid still carries a sonic node at v + u = 0")
    return space


def inner_product(space: DiscreteSpace, f: np.ndarray, g: np.ndarray) -> float:
    """Weighted inner product (f|g) = sum_k w_k f_k g_k."""
    return space.inner(f, g)


def split_half_spaces(space: DiscreteSpace, u: float,
                      coefficients: np.ndarray | None = None) -> HalfSpaceSplit:
    """Split nodes by the sign of b = v1 + u (or explicit coefficients).

    Raises when any node sits on the sonic plane: the transport operator
    must have trivial kernel.
    """
    b = space.v1 + u if coefficients is None else np.asarray(coefficients, dtype=float)
    tol = 1e-12 * max(1.0, float(np.max(np.abs(b))) if b.size else 1.0)
    if np.any(np.abs(b) <= tol):
        raise ValueError(
            "sonic node: |v + u| <= %.3e at some node, ker B would be nontrivial" % tol)
    plus = b > 0
    return HalfSpaceSplit(u=u, b=b, plus=plus, minus=~plus)


def reflection_operator(space: DiscreteSpace) -> np.ndarray:
    """Permutation sending each node to its axis-1 mirror about v = -center.

    Exactness of the mirror (equal weights, opposite v + center) is what makes
    the specular boundary identity hold to machine precision.
    """
    if space.reflect is None:
        raise ValueError("grid is not symmetric about its center on axis 1; "
                         "reflection is not an exact node map")
    return space.reflect


def apply_reflection(space: DiscreteSpace, f: np.ndarray) -> np.ndarray:
    return f[reflection_operator(space)]


def weighted_gram(space: DiscreteSpace, X: np.ndarray, Y: np.ndarray | None = None) -> np.ndarray:
    Y = X if Y is None else Y
    return X.T @ (space.weights[:, None] * Y)


def orthonormal_columns(space: DiscreteSpace, X: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    """Orthonormalize columns in the weighted inner product.

    Raises on rank deficiency relative to rtol (singular-value scale).
    """
    G = weighted_gram(space, X)
    ev, U = np.linalg.eigh(G)
    keep = ev > (rtol ** 2) * ev[-1]
    if np.count_nonzero(keep) < X.shape[1]:
        raise ValueError("rank-deficient column set: smallest Gram eigenvalue %.3e" % ev[0])
    return X @ U @ np.diag(ev ** -0.5)
