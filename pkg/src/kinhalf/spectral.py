"""Sign structure of the streaming form on the collision kernel.

The weighted form (Bf|g) restricted to ker L has an inertia (counts of
positive, negative, and zero directions) that fixes how many boundary
conditions the half-space problem admits.  This module computes that
inertia, a kernel basis diagonalizing the restriction, and the lift of
the degenerate directions out of the kernel on which the penalization
and the moment identities are built.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .collision import LinearizedOperator
from .velocity_space import DiscreteSpace, weighted_gram

SIGNATURE_RTOL = 1e-8
MARGIN_FLAG = 10.0
LIFT_TOL = 1e-10


@dataclass(frozen=True)
class Signature:
    """Inertia of the streaming form restricted to the kernel.

    ``margin`` is the smallest eigenvalue classified as nonzero, in units
    of the zero threshold; below ``MARGIN_FLAG`` the drift sits close to a
    transition and the split is ambiguous at this resolution.
    """

    n_pos: int
    n_neg: int
    n_zero: int
    margin: float
    threshold: float

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.n_pos, self.n_neg, self.n_zero)

    @property
    def dim(self) -> int:
        return self.n_pos + self.n_neg + self.n_zero

    @property
    def is_marginal(self) -> bool:
        return self.margin < MARGIN_FLAG


def streaming_gram(op: LinearizedOperator, u: float | None = None) -> np.ndarray:
    """Matrix of (b k_i|k_j) over the orthonormalized kernel columns.

    ``u`` overrides the operator's drift.  The kernel does not depend on
    the drift, so the matrix is affine in u with identity slope.
    """
    b = op.b if u is None else op.b - op.u + u
    G = weighted_gram(op.space, op.kernel, b[:, None] * op.kernel)
    return 0.5 * (G + G.T)


def _classify(ev: np.ndarray, u: float, tol: float) -> Signature:
    scale = float(np.max(np.abs(ev))) if ev.size else 0.0
    thr = tol * (1.0 + abs(u)) * max(scale, 1e-300)
    n_pos = int(np.sum(ev > thr))
    n_neg = int(np.sum(ev < -thr))
    n_zero = int(ev.size) - n_pos - n_neg
    nonzero = np.abs(ev) > thr
    margin = float(np.min(np.abs(ev[nonzero])) / thr) if nonzero.any() else float("inf")
    return Signature(n_pos=n_pos, n_neg=n_neg, n_zero=n_zero,
                     margin=margin, threshold=thr)


def signature(op: LinearizedOperator, tol: float = SIGNATURE_RTOL) -> Signature:
    """Inertia of the streaming form on ker L at the operator's drift."""
    ev = np.linalg.eigvalsh(streaming_gram(op))
    return _classify(ev, op.u, tol)


def degenerate_speeds(op: LinearizedOperator, model=None,
                      rtol: float = 1e-6) -> tuple[np.ndarray, np.ndarray]:
    """Drift speeds at which the kernel inertia degenerates (n_zero > 0).

    The streaming matrix is affine in the drift with identity slope, so
    the degenerate drifts are the negated eigenvalues of the zero-drift
    matrix, clustered by multiplicity.  With ``model`` given the clusters
    are checked against the closed-form transition speeds; a mismatch
    raises (a grid too coarse to resolve the kernel is the usual cause).
    """
    ev = np.linalg.eigvalsh(streaming_gram(op, u=0.0))
    cand = np.sort(-ev)
    scale = max(float(np.max(np.abs(ev))), 1e-300) if ev.size else 1.0
    atol = rtol * max(1.0, scale)
    speeds: list[float] = []
    mult: list[int] = []
    for x in cand:
        if speeds and abs(float(x) - speeds[-1]) <= atol:
            mult[-1] += 1
            speeds[-1] += (float(x) - speeds[-1]) / mult[-1]
        else:
            speeds.append(float(x))
            mult.append(1)
    if model is not None:
        from .models import closed_form_speeds

        ref = closed_form_speeds(model)
        want = sorted((ref["u_minus"], ref["u0"], ref["u_plus"]))
        if len(speeds) != len(want) or \
                max(abs(a - b) for a, b in zip(speeds, want)) > atol:
            raise ValueError(
                "clustered degenerate speeds %s do not match the closed forms "
                "%s; refine the grid or the cluster tolerance" % (speeds, want))
    return np.asarray(speeds), np.asarray(mult, dtype=int)


@dataclass
class KernelBasis:
    """Diagonalizing bases of ker L for a fixed drift.

    ``phi``/``beta``: directions with (B phi_i|phi_j) = beta_i delta_ij,
    positives first in decreasing order, then negatives in decreasing
    order (magnitudes increasing).  ``psi`` spans the degenerate block and
    ``aux`` are its lifts, L aux_r = B psi_r, rotated and corrected so
    (B psi_r|aux_s) = alpha_r delta_rs and (B aux_r|aux_s) = 0.
    ``psi_diag``/``gamma`` diagonalize the form (B .|B .) on the same
    block; that rotation is kept separately because the two Grams need
    not commute, so no single basis realizes both normalizations.
    """

    space: DiscreteSpace
    u: float
    b: np.ndarray
    signature: Signature
    kernel: np.ndarray
    phi: np.ndarray
    beta: np.ndarray
    psi: np.ndarray
    aux: np.ndarray
    alpha: np.ndarray
    psi_diag: np.ndarray
    gamma: np.ndarray
    lift_residual: float

    @property
    def dim(self) -> int:
        return self.kernel.shape[1]

    @property
    def phi_pos(self) -> np.ndarray:
        return self.phi[:, :self.signature.n_pos]

    @property
    def phi_neg(self) -> np.ndarray:
        return self.phi[:, self.signature.n_pos:]

    @property
    def beta_min(self) -> float:
        return float(np.min(np.abs(self.beta))) if self.beta.size else 0.0

    @property
    def gamma1(self) -> float:
        return float(self.gamma[0]) if self.gamma.size else 0.0

    @property
    def beta_hat_max(self) -> float:
        """Largest ratio of the incoming part of (|b| phi_i|phi_i) to
        |beta_i| over the negative block; at least 1, and 1.0 by
        convention when the block is empty."""
        k_pos = self.signature.n_pos
        neg = self.phi[:, k_pos:]
        if neg.shape[1] == 0:
            return 1.0
        w = self.space.weights
        m = self.b < 0
        minus_part = ((w[m] * (-self.b[m]))[:, None] * neg[m] ** 2).sum(axis=0)
        return float(np.max(minus_part / np.abs(self.beta[k_pos:])))


def kernel_basis(op: LinearizedOperator, tol: float = SIGNATURE_RTOL) -> KernelBasis:
    """Build the diagonalizing kernel basis and the degenerate-block lift.

    The lift solves L aux_r = B psi_r through the operator's pseudo
    inverse, then fixes the kernel freedom in three steps: remove the
    cross terms (B aux_r|phi_i) against the nondegenerate block, rotate
    psi and aux together so the pairing (B psi_r|aux_s) is diagonal with
    positive decreasing entries, and shift aux along psi to cancel
    (B aux_r|aux_s).  Each step preserves the properties fixed before it.
    """
    space = op.space
    b = op.b
    K = op.kernel
    G = streaming_gram(op)
    ev, U = np.linalg.eigh(G)
    sig = _classify(ev, op.u, tol)
    thr = sig.threshold

    pos = np.where(ev > thr)[0]
    neg = np.where(ev < -thr)[0]
    zer = np.where(np.abs(ev) <= thr)[0]
    pos = pos[np.argsort(-ev[pos])]
    neg = neg[np.argsort(-ev[neg])]
    keep = np.concatenate([pos, neg]).astype(int)
    phi = K @ U[:, keep]
    beta = ev[keep].astype(float)

    n_nodes = space.size
    l = int(zer.size)
    if l == 0:
        empty = np.zeros((n_nodes, 0))
        return KernelBasis(space=space, u=op.u, b=b, signature=sig, kernel=K,
                           phi=phi, beta=beta, psi=empty, aux=empty.copy(),
                           alpha=np.zeros(0), psi_diag=empty.copy(),
                           gamma=np.zeros(0), lift_residual=0.0)

    psi0 = K @ U[:, zer]
    rhs = b[:, None] * psi0
    comp = weighted_gram(space, K, rhs)
    rhs_norm = np.sqrt((space.weights[:, None] * rhs ** 2).sum(axis=0))
    lift_residual = float(np.max(np.linalg.norm(comp, axis=0)
                                 / np.maximum(rhs_norm, 1e-300)))
    if lift_residual > LIFT_TOL:
        raise ValueError(
            "degenerate directions do not lift out of the kernel (relative "
            "residual %.2e); the grid is too coarse or breaks the mirror "
            "symmetry" % lift_residual)
    rhs = rhs - K @ comp
    aux0 = np.column_stack([op.pseudo_solve(rhs[:, r]) for r in range(l)])

    # remove (B aux_r|phi_i) by shifting along the nondegenerate block
    if phi.shape[1]:
        cross = weighted_gram(space, phi, b[:, None] * aux0)
        aux0 = aux0 - phi @ (cross / beta[:, None])

    C = weighted_gram(space, psi0, b[:, None] * aux0)
    C = 0.5 * (C + C.T)
    alpha, V = np.linalg.eigh(C)
    order = np.argsort(-alpha)
    alpha = alpha[order]
    V = V[:, order]
    if alpha[-1] <= 0.0:
        raise ValueError("pairing between the degenerate block and its lift "
                         "is not positive (min %.2e); grid resolution is "
                         "insufficient" % alpha[-1])
    psi = psi0 @ V
    aux = aux0 @ V

    D = weighted_gram(space, aux, b[:, None] * aux)
    D = 0.5 * (D + D.T)
    M = np.tril(D.T, -1) / alpha[:, None] + np.diag(np.diag(D) / (2.0 * alpha))
    aux = aux - psi @ M

    Bpsi = b[:, None] * psi
    Gz = weighted_gram(space, Bpsi, Bpsi)
    gamma, Q = np.linalg.eigh(0.5 * (Gz + Gz.T))
    order = np.argsort(-gamma)
    gamma = gamma[order].astype(float)
    psi_diag = psi @ Q[:, order]

    return KernelBasis(space=space, u=op.u, b=b, signature=sig, kernel=K,
                       phi=phi, beta=beta, psi=psi, aux=aux, alpha=alpha,
                       psi_diag=psi_diag, gamma=gamma,
                       lift_residual=lift_residual)
