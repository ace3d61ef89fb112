"""Drift sweeps: signature tables, decay measurement, and uniform decay
across a degenerate value.

The transition study runs two lanes over a window around u0.  The plain
lane rebuilds the whole pipeline at each u; its decay rate collapses as
u approaches u0 from below because a kernel direction of the B-form
crosses zero there.  The uniform lane keeps the penalization frozen at
u0 (projections and constants; only B moves with u) and imposes the
frozen set of removal conditions on both sides, which excludes the slow
mode and keeps the rate bounded below across the window.  Sweep points
are independent solves over immutable inputs; they are evaluated
sequentially to keep outputs byte-stable.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .collision import build_bgk_operator
from .models import (ModelSpec, WallState, closed_form_speeds, default_grid,
                     equilibrium, boundary_maxwellian_data,
                     wall_parameter_directions)
from .penalty import (build_penalized_operator, coercivity_check,
                      penalty_constants)
from .solver import (ExpSum, admissible_boundary, boundary_operator,
                     solve_penalized, transport_modes)
from .spectral import kernel_basis, signature
from .velocity_space import split_half_spaces

SLOW_MODE_FACTOR = 0.25
WINDOW_CAP_FACTOR = 0.2


def model_degenerate_values(model: ModelSpec) -> list[float]:
    sp = closed_form_speeds(model)
    return [sp["u_minus"], 0.0, sp["u_plus"]]


def _sweep_drifts(model: ModelSpec, u_range: tuple[float, float],
                  samples: int) -> np.ndarray:
    a, b = float(u_range[0]), float(u_range[1])
    if not np.isfinite(a) or not np.isfinite(b) or a >= b:
        raise ValueError("u-range must be a finite increasing pair")
    us = list(np.linspace(a, b, samples))
    us += [u for u in model_degenerate_values(model) if a <= u <= b]
    return np.array(sorted(set(us)))


@dataclass
class SweepTable:
    """Signature rows (u, k+, k-, l) with the degenerate values attached."""

    rows: list[tuple[float, int, int, int]]
    degenerate: list[tuple[float, int]]

    def as_dict(self) -> dict:
        return {"rows": [{"u": u, "k_plus": kp, "k_minus": km, "l": l}
                         for (u, kp, km, l) in self.rows],
                "degenerate": [{"u0": u, "l": l} for (u, l) in self.degenerate]}


def sweep_signature(model: ModelSpec, u_range: tuple[float, float] = (-2.0, 2.0),
                    samples: int = 41, nodes: int | None = None) -> SweepTable:
    """Signature table over a drift range, exact transition points included.

    One frozen origin-centered grid serves every u; the drift enters the
    operator only.  A sample whose b would carry a sonic node is nudged
    deterministically and the nudged u is reported.
    """
    space = default_grid(model, u=0.0, nodes=nodes)
    eq = equilibrium(model, space)
    op0 = build_bgk_operator(model, space, eq, u=0.0)
    rows = []
    for u in _sweep_drifts(model, u_range, samples):
        uu = float(u)
        for _ in range(6):
            try:
                split_half_spaces(space, uu)
                break
            except ValueError:
                uu += 3.7e-9 * max(1.0, abs(uu))
        sig = signature(op0.with_drift(uu))
        rows.append((uu, sig.n_pos, sig.n_neg, sig.n_zero))
    degen = []
    for u0 in model_degenerate_values(model):
        sig0 = signature(op0.with_drift(u0))
        degen.append((u0, sig0.n_zero))
    return SweepTable(rows=rows, degenerate=degen)


@dataclass
class DecayEstimate:
    """Tail log-norm slope and the modal floor it is checked against."""

    fitted: float
    modal: float
    window: tuple[float, float]

    def as_dict(self) -> dict:
        return {"fitted": self.fitted, "modal": self.modal,
                "window": list(self.window)}


def measure_decay(sol, n_samples: int = 25,
                  window: tuple[float, float] = (3.0, 8.0)) -> DecayEstimate:
    """Least-squares decay rate of log ||f(x)|| over a tail window.

    Accepts anything carrying ``terms`` (an exponential sum) and ``space``;
    the window is scaled by the slowest active modal rate, which is also
    returned as the cross-check value.
    """
    terms: ExpSum = sol.terms
    w = sol.space.weights
    modal = terms.min_active_rate(w)
    if not np.isfinite(modal):
        raise ValueError("solution is numerically zero; no decay rate to measure")
    x0, x1 = window[0] / modal, window[1] / modal
    xs = np.linspace(x0, x1, n_samples)
    prof = terms.evaluate(xs)
    norms = np.sqrt((w[:, None] * np.abs(prof) ** 2).sum(axis=0).real)
    if norms.min() <= 0.0 or np.ptp(np.log(norms)) < 1e-13:
        raise ValueError("solution is numerically zero; no decay rate to measure")
    fitted = -np.polyfit(xs, np.log(norms), 1)[0]
    return DecayEstimate(fitted=float(fitted), modal=float(modal),
                         window=(float(x0), float(x1)))


def default_window(model: ModelSpec, u0: float) -> float:
    """Half the distance to the nearest other degenerate value, capped at
    a fixed fraction of |u+| (existence of some window is guaranteed, no
    formula is)."""
    values = model_degenerate_values(model)
    others = [v for v in values if abs(v - u0) > 1e-12]
    if not any(abs(v - u0) <= 1e-12 for v in values):
        raise ValueError("u0 = %.6g is not a degenerate value of this model "
                         "(expected one of %s)" % (u0, values))
    gap = min(abs(v - u0) for v in others)
    cap = WINDOW_CAP_FACTOR * abs(closed_form_speeds(model)["u_plus"])
    return min(0.5 * gap, cap)


@dataclass
class RegimeReport:
    """Two-lane decay study across a degenerate drift value."""

    u0: float
    delta: float
    k0_plus: int
    l: int
    extra_conditions: bool
    us: np.ndarray
    signatures: list[tuple[int, int, int]]
    sigma_on: np.ndarray
    sigma_off: np.ndarray
    modal_on: np.ndarray
    modal_off: np.ndarray
    conditions_on: list[int]
    conditions_off: list[int]
    free_on: list[int]
    free_off: list[int]
    slow_mode: list[bool]
    frozen_coercivity: float
    degenerate: list[tuple[float, int]]
    left_exponent: float
    sigma_star: float = field(init=False)
    uniform: bool = field(init=False)

    def __post_init__(self):
        self.sigma_star = float(np.min(self.sigma_on))
        edges = [self.sigma_on[0], self.sigma_on[-1]]
        self.uniform = bool(self.sigma_star > 0.0
                            and self.sigma_star >= 0.5 * min(edges))

    def as_dict(self) -> dict:
        return {
            "u0": self.u0, "delta": self.delta, "k0_plus": self.k0_plus,
            "l": self.l, "extra_conditions": self.extra_conditions,
            "sigma_star": self.sigma_star, "uniform": self.uniform,
            "frozen_coercivity": self.frozen_coercivity,
            "left_exponent": self.left_exponent,
            "degenerate": [{"u0": u, "l": l} for (u, l) in self.degenerate],
            "samples": [
                {"u": float(u), "k_plus": s[0], "k_minus": s[1], "l": s[2],
                 "sigma_u_flag_on": float(a), "sigma_u_flag_off": float(b),
                 "modal_on": float(ma), "modal_off": float(mb),
                 "conditions_on": con, "conditions_off": coff,
                 "free_on": fon, "free_off": foff, "slow_mode": sm}
                for u, s, a, b, ma, mb, con, coff, fon, foff, sm in zip(
                    self.us, self.signatures, self.sigma_on, self.sigma_off,
                    self.modal_on, self.modal_off, self.conditions_on,
                    self.conditions_off, self.free_on, self.free_off,
                    self.slow_mode)],
        }

    def csv_rows(self) -> list[tuple]:
        return [(float(u), s[0], s[1], s[2], float(a), float(b))
                for u, s, a, b in zip(self.us, self.signatures,
                                      self.sigma_on, self.sigma_off)]


def _study_wall(model: ModelSpec) -> WallState:
    d = model.dimension
    dens = tuple(1.0 + 0.05 * (a + 1) for a in range(model.n_species))
    vel = tuple([0.03] + [0.0] * (d - 1))
    return WallState(densities=dens, velocity=vel,
                     temperature=1.05 * model.temperature)


def _solve_lane(op_u, basis, config, boundary, f_b, directions):
    pop = build_penalized_operator(op_u, basis, config)
    modes = transport_modes(pop)
    f_b_use, info = admissible_boundary(pop, boundary, f_b, directions,
                                        None, modes)
    psol = solve_penalized(pop, boundary, f_b_use, None, modes)
    f_terms = psol.terms.shifted(config.sigma)
    return psol, f_terms, info, pop


class _FTerms:
    def __init__(self, terms, space):
        self.terms = terms
        self.space = space


def _gap_ratio(terms: ExpSum, w: np.ndarray) -> float:
    """Leading decay rate over the next distinct one among active terms."""
    norms = np.sqrt((w[:, None] * np.abs(terms.vectors) ** 2).sum(axis=0))
    active = norms > 1e-12 * max(norms.max(), 1e-300)
    rates = np.sort(terms.rates[active].real)
    distinct = [rates[0]]
    for r in rates[1:]:
        if r > distinct[-1] * (1.0 + 1e-9) + 1e-12:
            distinct.append(r)
    if len(distinct) < 2:
        return 1.0
    return float(distinct[0] / distinct[1])


def uniform_decay_study(model: ModelSpec, u0: float,
                        n_side: int = 9, delta: float | None = None,
                        extra_conditions: bool = True,
                        wall: WallState | None = None,
                        nodes: int | None = None) -> RegimeReport:
    """Measure the decay rate on both sides of a degenerate drift u0.

    Both lanes are always computed so the report can show the contrast;
    ``extra_conditions`` selects which lane feeds the uniform verdict
    fields when serialized by the CLI.  The frozen lane solves with the
    u0-penalization (projections and constants fixed, B moving) and
    consumes k0+ + l conditions per Remark-counted bookkeeping; the plain
    lane consumes the native k+ + l.
    """
    delta = default_window(model, u0) if delta is None else float(delta)
    others = [v for v in model_degenerate_values(model) if abs(v - u0) > 1e-12]
    if any(abs(v - u0) <= delta for v in others):
        raise ValueError("window half-width %.4g overlaps the degenerate "
                         "value at %.6g" % (delta, min(others, key=lambda v: abs(v - u0))))
    space = default_grid(model, u=0.0, nodes=nodes)
    eq = equilibrium(model, space)
    op0 = build_bgk_operator(model, space, eq, u=u0)
    basis0 = kernel_basis(op0)
    config0 = penalty_constants(op0, basis0)
    k0p = basis0.signature.n_pos
    l0 = basis0.signature.n_zero
    if l0 == 0:
        raise ValueError("u0 = %.6g is not degenerate on this grid" % u0)
    wall = _study_wall(model) if wall is None else wall

    offsets = np.linspace(delta / n_side, delta, n_side)
    us = np.concatenate([u0 - offsets[::-1], u0 + offsets])
    sigs, s_on, s_off, m_on, m_off = [], [], [], [], []
    cond_on, cond_off, free_on, free_off, slow = [], [], [], [], []
    froz_coerc = np.inf
    for u in us:
        u = float(u)
        op_u = op0.with_drift(u)
        bnd = boundary_operator(space, u)
        f_b = boundary_maxwellian_data(model, eq, wall, u)
        dirs = wall_parameter_directions(model, eq, wall, u)

        basis_u = kernel_basis(op_u)
        sig = basis_u.signature
        sigs.append(sig.as_tuple())
        config_u = penalty_constants(op_u, basis_u)
        _, f_terms, _, _ = _solve_lane(op_u, basis_u, config_u, bnd, f_b, dirs)
        est = measure_decay(_FTerms(f_terms, space))
        s_off.append(est.fitted)
        m_off.append(est.modal)
        cond_off.append(sig.n_pos + sig.n_zero)
        free_off.append(sig.n_neg)
        slow.append(bool(_gap_ratio(f_terms, space.weights)
                         < SLOW_MODE_FACTOR))

        _, f_terms0, _, pop_f = _solve_lane(op_u, basis0, config0,
                                            bnd, f_b, dirs)
        froz_coerc = min(froz_coerc,
                         coercivity_check(pop_f).min_eigenvalue)
        est0 = measure_decay(_FTerms(f_terms0, space))
        s_on.append(est0.fitted)
        m_on.append(est0.modal)
        cond_on.append(k0p + l0)
        free_on.append(sig.n_neg - (l0 if sig.n_zero == 0
                                    and sig.n_pos == k0p else 0))

    # empirical rate law on the left approach, measured, never asserted
    left_u = np.abs(us[:n_side] - u0)
    left_s = np.asarray(s_off[:n_side])
    if np.all(left_s > 0):
        left_exp = float(np.polyfit(np.log(left_u), np.log(left_s), 1)[0])
    else:
        left_exp = float("nan")

    degen = [(v, signature(op0.with_drift(v)).n_zero)
             for v in model_degenerate_values(model)]

    return RegimeReport(
        u0=u0, delta=delta, k0_plus=k0p, l=l0,
        extra_conditions=bool(extra_conditions), us=us, signatures=sigs,
        sigma_on=np.asarray(s_on), sigma_off=np.asarray(s_off),
        modal_on=np.asarray(m_on), modal_off=np.asarray(m_off),
        conditions_on=cond_on, conditions_off=cond_off,
        free_on=free_on, free_off=free_off, slow_mode=slow,
        frozen_coercivity=float(froz_coerc), degenerate=degen,
        left_exponent=left_exp)
