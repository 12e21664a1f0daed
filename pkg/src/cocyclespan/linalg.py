"""Dense small-matrix arithmetic: singular data, compound powers, subspace spans.

Everything here is pure and re-entrant; matrices are plain float64 ndarrays.
Dimensions are capped at 8 so compound (wedge) sizes stay at most C(8,4) = 70.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import InputError

TAU_DET = 1e-12     # invertible means |det| > TAU_DET * sigma_1^d
RANK_TOL = 1e-9     # default relative rank cutoff for spans
MAX_DIM = 8
_TIE_REL = 1e-12    # relative tolerance for singular value ties


def as_matrix(A) -> np.ndarray:
    M = np.asarray(A, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InputError(f"expected a square matrix, got shape {M.shape}")
    d = M.shape[0]
    if not 2 <= d <= MAX_DIM:
        raise InputError(f"dimension {d} outside supported range 2..{MAX_DIM}")
    if not np.isfinite(M).all():
        raise InputError("matrix has non-finite entries")
    return M


def operator_norm(A) -> float:
    return float(np.linalg.norm(A, 2))


def singular_values(A) -> np.ndarray:
    """Singular values in descending order."""
    return np.linalg.svd(np.asarray(A, dtype=float), compute_uv=False)


def is_invertible(A) -> bool:
    A = np.asarray(A, dtype=float)
    s = singular_values(A)
    return s[0] > 0 and abs(np.linalg.det(A)) > TAU_DET * s[0] ** A.shape[0]


def require_invertible(A, name: str = "matrix") -> np.ndarray:
    M = as_matrix(A)
    if not is_invertible(M):
        raise InputError(f"{name} not invertible")
    return M


def wedge_index_sets(d: int, m: int) -> list[tuple[int, ...]]:
    """m-element index subsets of range(d) in lexicographic order."""
    return list(combinations(range(d), m))


def wedge_power(A, m: int) -> np.ndarray:
    """m-th compound matrix: minors det A[S, T] over lexicographic index sets.

    Multiplicative by Cauchy-Binet: wedge(AB, m) = wedge(A, m) @ wedge(B, m).
    """
    M = as_matrix(A)
    d = M.shape[0]
    if not 1 <= m <= d - 1:
        raise InputError(f"wedge order m={m} outside 1..{d - 1}")
    if m == 1:
        return M.copy()
    sets = wedge_index_sets(d, m)
    N = len(sets)
    out = np.empty((N, N))
    for i, rows in enumerate(sets):
        sub = M[list(rows), :]
        for j, cols in enumerate(sets):
            out[i, j] = np.linalg.det(sub[:, list(cols)])
    return out


@dataclass(frozen=True)
class PrincipalPair:
    """Top right-singular direction v1, image direction v2 = A v1 / |A v1|."""

    v1: np.ndarray
    v2: np.ndarray
    sigma: np.ndarray


def _sign_fix(v: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    for x in v:
        if abs(x) > tol:
            return v if x > 0 else -v
    return v


def principal_pair(A) -> PrincipalPair:
    """Singular data of an invertible matrix with a deterministic tie-break.

    If sigma_1 is degenerate the representative v1 is the normalized projection
    of the first standard basis vector that meets the top singular subspace;
    signs are fixed so the first non-negligible coordinate is positive.
    """
    M = require_invertible(A)
    _, s, Vt = np.linalg.svd(M)
    q = int(np.sum(s >= s[0] * (1.0 - _TIE_REL)))
    if q <= 1:
        v1 = _sign_fix(Vt[0])
    else:
        top = Vt[:q].T  # columns span the top singular subspace
        v1 = None
        for j in range(M.shape[0]):
            proj = top @ top.T[:, j]
            nrm = np.linalg.norm(proj)
            if nrm > 1e-9:
                v1 = _sign_fix(proj / nrm)
                break
        assert v1 is not None
    img = M @ v1
    v2 = _sign_fix(img / np.linalg.norm(img))
    return PrincipalPair(v1=v1, v2=v2, sigma=s)


@dataclass(frozen=True)
class SubspaceBasis:
    """Orthonormal column basis of a subspace of R^ambient."""

    ambient: int
    dim: int
    basis: np.ndarray  # shape (ambient, dim)

    def __post_init__(self):
        if self.dim:
            g = self.basis.T @ self.basis
            if np.abs(g - np.eye(self.dim)).max() > 1e-10:
                raise InputError("basis columns not orthonormal")

    def projector(self) -> np.ndarray:
        if self.dim == 0:
            return np.zeros((self.ambient, self.ambient))
        return self.basis @ self.basis.T

    def contains(self, v: np.ndarray, tol: float = 1e-8) -> bool:
        v = np.asarray(v, dtype=float)
        nrm = np.linalg.norm(v)
        if nrm == 0:
            return True
        r = v - self.projector() @ v
        return np.linalg.norm(r) <= tol * nrm


def span_basis(vectors, tol: float = RANK_TOL, ambient: int | None = None) -> SubspaceBasis:
    """Orthonormal basis of span(vectors); rank cut at tol * largest singular value."""
    vecs = [np.asarray(v, dtype=float).ravel() for v in vectors]
    if not vecs:
        if ambient is None:
            raise InputError("empty input needs an explicit ambient dimension")
        return SubspaceBasis(ambient=ambient, dim=0, basis=np.zeros((ambient, 0)))
    n = vecs[0].size
    if any(v.size != n for v in vecs):
        raise InputError("vectors have mixed ambient dimensions")
    if ambient is not None and ambient != n:
        raise InputError("ambient mismatch")
    X = np.stack(vecs, axis=1)
    U, s, _ = np.linalg.svd(X, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        rank = 0
    else:
        rank = int(np.sum(s >= tol * s[0]))
    return SubspaceBasis(ambient=n, dim=rank, basis=U[:, :rank].copy())


def subspace_distance(U: SubspaceBasis, V: SubspaceBasis) -> float:
    """Operator-norm distance of orthogonal projectors (sin of largest principal angle)."""
    if U.ambient != V.ambient:
        raise InputError("subspaces live in different ambient spaces")
    return float(np.linalg.norm(U.projector() - V.projector(), 2))


def map_subspace(A, W: SubspaceBasis) -> SubspaceBasis:
    return span_basis([as_matrix(A) @ W.basis[:, j] for j in range(W.dim)], ambient=W.ambient)


def invariance_residual(mats, W: SubspaceBasis) -> float:
    """max over the matrices of dist(A W, W); 0 for the trivial subspace."""
    if W.dim == 0 or W.dim == W.ambient:
        return 0.0
    return max(subspace_distance(map_subspace(A, W), W) for A in mats)


def matrices_span_basis(mats, tol: float = RANK_TOL) -> SubspaceBasis:
    """Span of matrices viewed as d^2-vectors (row-major flattening)."""
    mats = list(mats)
    if not mats:
        raise InputError("empty matrix family")
    d = as_matrix(mats[0]).shape[0]
    return span_basis([np.asarray(M, dtype=float).ravel() for M in mats], tol=tol, ambient=d * d)
