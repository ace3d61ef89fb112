"""BGK-type linearized collision operator on a discrete space.

The operator acts in nodal coordinates; self-adjointness always means the
weighted inner product.  L f = nu (f - sum_i (nu f|phi_i) phi_i) with the
invariants nu-orthonormalized, so ker L is exactly the invariant span and
L restricted to the complement is multiplication by nu after projection.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import eigh, qr

from .velocity_space import DiscreteSpace, orthonormal_columns, weighted_gram


@dataclass
class LinearizedOperator:
    """Collision operator plus the diagonal transport coefficients b = v + u.

    ``kernel`` is weighted-orthonormal (used for projections), ``kernel_nu``
    nu-orthonormal (used inside the BGK formula).  ``matrix`` is the dense
    nodal form; prefer ``apply`` for vectors.
    """

    space: DiscreteSpace
    nu: np.ndarray
    kernel: np.ndarray
    kernel_nu: np.ndarray
    b: np.ndarray
    u: float

    @property
    def size(self) -> int:
        return self.space.size

    @property
    def kernel_dim(self) -> int:
        return self.kernel.shape[1]

    def apply(self, f: np.ndarray) -> np.ndarray:
        w = self.space.weights
        coef = self.kernel_nu.T @ (w * self.nu * f)
        return self.nu * (f - self.kernel_nu @ coef)

    def dense(self) -> np.ndarray:
        w = self.space.weights
        P = self.kernel_nu @ (self.kernel_nu.T * (w * self.nu)[None, :])
        return np.diag(self.nu) - self.nu[:, None] * P

    def kernel_project(self, f: np.ndarray) -> np.ndarray:
        w = self.space.weights
        return self.kernel @ (self.kernel.T @ (w * f))

    def pseudo_solve(self, rhs: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
        """Minimal-norm solution of L x = rhs; rhs must avoid ker L.

        Exact for the BGK form: x = rhs/nu minus its kernel projection.
        """
        w = self.space.weights
        comp = self.kernel.T @ (w * rhs)
        scale = float(np.sqrt(np.sum(w * rhs * rhs)))
        if scale > 0 and float(np.linalg.norm(comp)) > rtol * scale:
            raise ValueError("rhs has a kernel component of relative size %.3e"
                             % (float(np.linalg.norm(comp)) / scale))
        x = rhs / self.nu
        return x - self.kernel_project(x)

    def with_drift(self, u: float) -> "LinearizedOperator":
        return replace(self, b=self.space.v1 + u, u=u)


def build_bgk_operator(model, space: DiscreteSpace, eq, nu=None,
                       u: float = 0.0) -> LinearizedOperator:
    """Assemble the BGK-type operator with collision frequency nu.

    ``nu`` may be None (default 1 + |v|), an array over nodes, or a callable
    on the space (species-dependent frequencies for mixtures).
    """
    from .models import collision_invariants

    if nu is None:
        nu_vec = 1.0 + space.speed
    elif callable(nu):
        nu_vec = np.asarray(nu(space), dtype=float)
    else:
        nu_vec = np.asarray(nu, dtype=float)
    if nu_vec.shape != (space.size,) or np.any(nu_vec <= 0):
        raise ValueError("nu must be positive over all nodes")

    K = collision_invariants(model, space, eq)
    kernel = orthonormal_columns(space, K)
    kernel_nu = _nu_orthonormal(space, K, nu_vec)
    return LinearizedOperator(space=space, nu=nu_vec, kernel=kernel,
                              kernel_nu=kernel_nu, b=space.v1 + u, u=u)


def _nu_orthonormal(space: DiscreteSpace, K: np.ndarray,
                    nu: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    G = K.T @ ((space.weights * nu)[:, None] * K)
    ev, U = np.linalg.eigh(G)
    if ev[0] <= (rtol ** 2) * ev[-1]:
        raise ValueError("invariants are nu-rank-deficient on this grid "
                         "(smallest Gram eigenvalue %.3e)" % ev[0])
    return K @ U @ np.diag(ev ** -0.5)


@dataclass
class AssumptionReport:
    """Measured constants behind the operator hypotheses.

    ``gamma`` is the largest constant with (h|Lh) >= gamma (h|(1+|B|)h) on
    the complement of the kernel; ``nu_coercivity`` the analogue against
    (h|nu h); ``min_modulus`` the smallest nonzero symmetrized eigenvalue.
    """

    symmetry_residual: float
    min_eigenvalue: float
    kernel_residual: float
    b_min_abs: float
    gamma: float
    nu_coercivity: float
    min_modulus: float
    kernel_dim: int
    passed: bool

    def as_dict(self) -> dict:
        return {
            "symmetry_residual": self.symmetry_residual,
            "min_eigenvalue": self.min_eigenvalue,
            "kernel_residual": self.kernel_residual,
            "b_min_abs": self.b_min_abs,
            "gamma": self.gamma,
            "nu_coercivity": self.nu_coercivity,
            "min_modulus": self.min_modulus,
            "kernel_dim": self.kernel_dim,
            "passed": self.passed,
        }


def image_complement(space: DiscreteSpace, kernel: np.ndarray) -> np.ndarray:
    """Weighted-orthonormal basis of the complement of the kernel span.

    Returned in nodal coordinates: columns X with X^T W X = I and
    X^T W kernel = 0.
    """
    sw = np.sqrt(space.weights)
    Q = qr(sw[:, None] * kernel, mode="full")[0][:, kernel.shape[1]:]
    return Q / sw[:, None]


def validate_assumptions(op: LinearizedOperator,
                         tol: float = 1e-10) -> AssumptionReport:
    """Measure self-adjointness, positivity, kernel quality, and coercivity.

    gamma and the nu-coercivity constant come from dense generalized
    eigensolves restricted to the complement of the kernel.
    """
    space = op.space
    w = space.weights
    sw = np.sqrt(w)
    L = op.dense()
    S = (sw[:, None] * L) / sw[None, :]
    sym = float(np.linalg.norm(S - S.T) / max(np.linalg.norm(S), 1e-300))
    S = 0.5 * (S + S.T)
    ev_all = np.linalg.eigvalsh(S)
    min_eig = float(ev_all[0])

    kres = 0.0
    for j in range(op.kernel_dim):
        k = op.kernel[:, j]
        kres = max(kres, space.norm(op.apply(k)) / max(space.norm(k), 1e-300))

    b_min = float(np.min(np.abs(op.b)))

    X = image_complement(space, op.kernel)
    Y = sw[:, None] * X                      # symmetrized coordinates
    A = Y.T @ S @ Y
    gamma = float(eigh(A, Y.T @ ((1.0 + np.abs(op.b))[:, None] * Y),
                       eigvals_only=True)[0])
    lam = float(eigh(A, Y.T @ (op.nu[:, None] * Y), eigvals_only=True)[0])
    c0 = float(np.linalg.eigvalsh(0.5 * (A + A.T))[0])

    passed = (sym <= tol and min_eig >= -tol * max(abs(ev_all[-1]), 1.0)
              and kres <= 1e-12 * max(1.0, float(np.max(op.nu)))
              and b_min > 0 and gamma > tol)
    return AssumptionReport(symmetry_residual=sym, min_eigenvalue=min_eig,
                            kernel_residual=kres, b_min_abs=b_min,
                            gamma=gamma, nu_coercivity=lam, min_modulus=c0,
                            kernel_dim=op.kernel_dim, passed=passed)
