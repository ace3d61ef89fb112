"""Coercive penalization of the damped transport operator.

Augments L - sigma*B with projection terms along the positive and
degenerate kernel directions so the resulting operator has a positive
definite symmetric part.  The constants follow one fixed recipe driven
by the measured coercivity constant of L and the kernel basis data; the
recipe guarantees a lower bound mu = min(gamma, sigma*beta_min)/2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .collision import LinearizedOperator, validate_assumptions
from .spectral import KernelBasis

DEFAULT_EPS1 = 0.5
DEFAULT_EPS2 = 0.5


@dataclass(frozen=True)
class PenaltyConfig:
    """Penalty constants; ``alpha`` is always 2*sigma by construction."""

    sigma: float
    alpha: float
    beta: float
    mu: float
    gamma: float
    eps: float
    eps1: float
    eps2: float

    def as_dict(self) -> dict:
        return {"sigma": self.sigma, "alpha": self.alpha, "beta": self.beta,
                "mu": self.mu, "gamma": self.gamma, "eps": self.eps,
                "eps1": self.eps1, "eps2": self.eps2}


@dataclass
class KernelProjections:
    """Weighted projections onto the positive block, the degenerate block
    through its lift (squared normalization), and the degenerate block
    itself.  All three are self-adjoint in the weighted inner product;
    empty blocks yield exact zero operators, which is valid."""

    basis: KernelBasis

    def onto_positive(self, f: np.ndarray) -> np.ndarray:
        phi = self.basis.phi_pos
        w = self.basis.space.weights
        return phi @ (phi.T @ (w * f))

    def onto_degenerate_lifted(self, f: np.ndarray) -> np.ndarray:
        aux = self.basis.aux
        if aux.shape[1] == 0:
            return np.zeros_like(f)
        w = self.basis.space.weights
        coef = aux.T @ (w * f) / self.basis.alpha ** 2
        return aux @ coef

    def onto_degenerate(self, f: np.ndarray) -> np.ndarray:
        psi = self.basis.psi
        if psi.shape[1] == 0:
            return np.zeros_like(f)
        w = self.basis.space.weights
        return psi @ (psi.T @ (w * f))

    def matrices(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        w = self.basis.space.weights
        phi = self.basis.phi_pos
        n = self.basis.space.size
        p_plus = phi @ (phi.T * w[None, :])
        aux = self.basis.aux
        if aux.shape[1]:
            p_zero = (aux / self.basis.alpha[None, :] ** 2) @ (aux.T * w[None, :])
            psi = self.basis.psi
            p_zero_plain = psi @ (psi.T * w[None, :])
        else:
            p_zero = np.zeros((n, n))
            p_zero_plain = np.zeros((n, n))
        return p_plus, p_zero, p_zero_plain


def build_projections(basis: KernelBasis) -> KernelProjections:
    return KernelProjections(basis=basis)


def penalty_constants(op: LinearizedOperator, basis: KernelBasis,
                      gamma: float | None = None,
                      eps1: float = DEFAULT_EPS1, eps2: float = DEFAULT_EPS2,
                      sigma_cap: float | None = None) -> PenaltyConfig:
    """Compute sigma, alpha, beta, mu from the fixed recipe.

    ``gamma`` is the coercivity constant of L against (1+|B|) on the
    complement of the kernel; measured on demand when not supplied.
    ``sigma_cap`` shrinks sigma (the recipe stays valid for any smaller
    positive sigma), used when sources impose a slower damping scale.
    """
    if not 0.0 < eps1 < 1.0 or not 0.0 < eps2 < 1.0:
        raise ValueError("eps1 and eps2 must lie strictly between 0 and 1")
    if gamma is None:
        gamma = validate_assumptions(op).gamma
    if gamma <= 0:
        raise ValueError("operator is not coercive against 1+|B| (gamma "
                         "%.3e)" % gamma)
    sig = basis.signature
    beta_min = basis.beta_min
    if beta_min <= 0.0:
        raise ValueError("no nondegenerate kernel directions at this drift; "
                         "treat it through the regime-transition tools")

    k_neg = sig.n_neg
    if k_neg > 0:
        eps = 1.0 / (2.0 * np.sqrt(basis.beta_hat_max - 0.5))
    else:
        eps = 1.0

    gamma1 = basis.gamma1
    mix = beta_min + 2.0 * gamma1 * eps1 ** 2
    arg1 = 1.0 + k_neg / eps ** 2
    arg2 = 2.0 / eps1 ** 2
    if basis.alpha.size:
        w = basis.space.weights
        baux = basis.b[:, None] * basis.aux
        norms = (w[:, None] * baux ** 2).sum(axis=0)
        arg2 += (mix / eps2 ** 2) * float(np.sum(norms / basis.alpha ** 2))
        arg3 = 2.0 * gamma * (1.0 - eps2 ** 2) * float(np.max(basis.alpha)) / mix
    else:
        arg3 = 0.0
    sigma = gamma / max(arg1, arg2, arg3)
    if sigma_cap is not None:
        sigma = min(sigma, sigma_cap)
    beta = sigma * mix / (2.0 * (1.0 - eps2 ** 2))
    mu = 0.5 * min(gamma, sigma * beta_min)
    return PenaltyConfig(sigma=float(sigma), alpha=float(2.0 * sigma),
                         beta=float(beta), mu=float(mu), gamma=float(gamma),
                         eps=float(eps), eps1=float(eps1), eps2=float(eps2))


@dataclass
class PenalizedOperator:
    """Dense penalized operator and its weighted adjoint.

    matrix = L - sigma*B + alpha*P+ B + beta*B P0 B acting on nodal
    vectors; ``adjoint`` swaps P+ B for B P+.  Both share the symmetric
    part, which is what carries the coercivity bound.
    """

    op: LinearizedOperator
    basis: KernelBasis
    config: PenaltyConfig
    projections: KernelProjections
    matrix: np.ndarray
    adjoint: np.ndarray

    def apply(self, f: np.ndarray) -> np.ndarray:
        c = self.config
        pr = self.projections
        b = self.op.b
        return (self.op.apply(f) - c.sigma * b * f
                + c.alpha * pr.onto_positive(b * f)
                + c.beta * b * pr.onto_degenerate_lifted(b * f))

    def apply_adjoint(self, f: np.ndarray) -> np.ndarray:
        c = self.config
        pr = self.projections
        b = self.op.b
        return (self.op.apply(f) - c.sigma * b * f
                + c.alpha * b * pr.onto_positive(f)
                + c.beta * b * pr.onto_degenerate_lifted(b * f))

    def min_symmetric_eigenvalue(self) -> float:
        w = self.op.space.weights
        sw = np.sqrt(w)
        S = (sw[:, None] * self.matrix) / sw[None, :]
        S = 0.5 * (S + S.T)
        return float(np.linalg.eigvalsh(S)[0])


def build_penalized_operator(op: LinearizedOperator, basis: KernelBasis,
                             config: PenaltyConfig) -> PenalizedOperator:
    pr = build_projections(basis)
    L = op.dense()
    b = op.b
    p_plus, p_zero, _ = pr.matrices()
    Bm = b[:, None]
    mat = L - config.sigma * np.diag(b) \
        + config.alpha * (p_plus * b[None, :]) \
        + config.beta * (Bm * p_zero * b[None, :])
    adj = L - config.sigma * np.diag(b) \
        + config.alpha * (Bm * p_plus) \
        + config.beta * (Bm * p_zero * b[None, :])
    return PenalizedOperator(op=op, basis=basis, config=config,
                             projections=pr, matrix=mat, adjoint=adj)


@dataclass(frozen=True)
class CoercivityReport:
    sigma: float
    alpha: float
    beta: float
    mu: float
    min_eigenvalue: float
    passed: bool

    def as_dict(self) -> dict:
        return {"sigma": self.sigma, "alpha": self.alpha, "beta": self.beta,
                "mu": self.mu, "min_eig": self.min_eigenvalue,
                "pass": self.passed}


def coercivity_check(pop: PenalizedOperator, tol: float = 1e-10) -> CoercivityReport:
    """Verify min eig of the symmetric part against the guaranteed mu."""
    c = pop.config
    min_eig = pop.min_symmetric_eigenvalue()
    return CoercivityReport(sigma=c.sigma, alpha=c.alpha, beta=c.beta,
                            mu=c.mu, min_eigenvalue=min_eig,
                            passed=bool(min_eig >= c.mu - tol))
