"""Null spaces, canonical bases and Gram-Schmidt with a coefficient record."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def null_space(A: np.ndarray, rtol: float = 1e-10, dim: int | None = None) -> np.ndarray:
    """Orthonormal columns spanning ``ker A``.

    Singular values below ``rtol * s_max`` count as zero.  A matrix with no
    rows (or all-zero rows) has the whole space as kernel.
    """
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    n = A.shape[1] if dim is None else dim
    if A.size == 0:
        return np.eye(n, dtype=complex)
    _, s, vh = np.linalg.svd(A)
    if s.size == 0 or s[0] == 0.0:
        return np.eye(n, dtype=complex)
    rank = int(np.sum(s > rtol * s[0]))
    return vh[rank:].conj().T


def canonical_basis(K: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Basis-independent orthonormal basis of ``span(K)``.

    Projects the computational basis vectors onto the subspace in index order
    and orthonormalises the ones that survive; the result depends only on the
    subspace, not on the particular ``K``.
    """
    k = K.shape[1]
    if k == 0:
        return K
    P = K @ K.conj().T
    out = []
    for j in range(P.shape[0]):
        v = P[:, j].copy()
        for b in out:
            v -= np.vdot(b, v) * b
        for b in out:
            v -= np.vdot(b, v) * b
        nrm = np.linalg.norm(v)
        if nrm > tol:
            out.append(v / nrm)
            if len(out) == k:
                break
    return np.column_stack(out)


@dataclass(frozen=True, eq=False)
class GramSchmidtResult:
    """``basis[r] = sum_k coefficients[r, k] * vectors[k]``; ``kept`` indexes inputs
    that contributed a new direction."""

    basis: np.ndarray          # (r, dim) orthonormal rows
    coefficients: np.ndarray   # (r, n_inputs)
    kept: tuple
    dropped: tuple

    def apply(self, vectors) -> np.ndarray:
        """Reuse the recorded elimination on another list of vectors."""
        V = np.asarray(vectors)
        if self.coefficients.shape[0] == 0:
            return np.zeros((0,) + V.shape[1:], dtype=complex)
        return self.coefficients @ V


def gram_schmidt(vectors, tol: float = 1e-8) -> GramSchmidtResult:
    """Modified Gram-Schmidt with one re-orthogonalisation pass.

    A vector whose residual norm falls below ``tol * (largest input norm)``
    is dropped as linearly dependent.
    """
    V = np.asarray(vectors, dtype=complex)
    if V.ndim != 2 or V.shape[0] == 0:
        dim = V.shape[1] if V.ndim == 2 else 0
        return GramSchmidtResult(np.zeros((0, dim), complex), np.zeros((0, V.shape[0] if V.ndim else 0), complex), (), ())
    n, dim = V.shape
    scale = max(np.linalg.norm(V, axis=1).max(), np.finfo(float).tiny)
    basis, coeffs, kept, dropped = [], [], [], []
    for k in range(n):
        w = V[k].copy()
        c = np.zeros(n, dtype=complex)
        c[k] = 1.0
        for _ in range(2):
            for b, cb in zip(basis, coeffs):
                proj = np.vdot(b, w)
                w -= proj * b
                c -= proj * cb
        nrm = np.linalg.norm(w)
        if nrm < tol * scale:
            dropped.append(k)
            continue
        basis.append(w / nrm)
        coeffs.append(c / nrm)
        kept.append(k)
    B = np.array(basis) if basis else np.zeros((0, dim), complex)
    C = np.array(coeffs) if coeffs else np.zeros((0, n), complex)
    return GramSchmidtResult(B, C, tuple(kept), tuple(dropped))


def principal_angles(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Principal angles between column spans of ``A`` and ``B`` (radians)."""
    from scipy.linalg import subspace_angles

    return subspace_angles(np.asarray(A, complex), np.asarray(B, complex))
