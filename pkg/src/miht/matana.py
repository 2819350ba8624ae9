"""Matrix-analytic core: SVD, rank-k hard thresholding, norms, sign vectors.

All operations are pure functions on immutable inputs and are safe to call
concurrently. Scalars are float64 throughout; rank constraints are enforced
by construction (truncated SVD), never by thresholding small singular values.
"""

from typing import NamedTuple

import numpy as np


class SvdFactors(NamedTuple):
    """Full singular value decomposition Z = U @ diag(s) @ V.T.

    left_vectors: (n1, k) column-orthonormal
    singular_values: (k,) nonincreasing, nonnegative
    right_vectors: (n2, k) column-orthonormal
    with k = min(n1, n2).
    """

    left_vectors: np.ndarray
    singular_values: np.ndarray
    right_vectors: np.ndarray


def as_matrix(Z) -> np.ndarray:
    """Coerce to a validated 2-D float64 array: finite entries, both dims >= 1."""
    A = np.asarray(Z, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"expected a 2-D matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix contains NaN or Inf entries")
    return A


def svd(Z) -> SvdFactors:
    """Full SVD of a dense matrix.

    Ties between equal singular values are resolved by the deterministic
    order the decomposition returns, which is fixed for a given input on a
    given build.
    """
    A = as_matrix(Z)
    try:
        U, s, Vt = np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"SVD failed to converge for shape {A.shape}: {exc}") from exc
    return SvdFactors(U, s, Vt.T)


def hard_threshold(Z, k: int) -> np.ndarray:
    """Best rank-<=k approximation: keep the k largest singular triples.

    k = 0 returns the zero matrix; k >= rank(Z) reproduces Z up to roundoff.
    """
    A = as_matrix(Z)
    n = min(A.shape)
    if not 0 <= k <= n:
        raise ValueError(f"rank bound k={k} outside [0, {n}] for shape {A.shape}")
    if k == 0:
        return np.zeros_like(A)
    if k == n:
        return A.copy()
    U, s, V = svd(A)
    return (U[:, :k] * s[:k]) @ V[:, :k].T


def eta(kappa: float) -> float:
    """Approximation-widening factor 1 + sqrt(8 / (kappa + 1)).

    Strictly decreasing on kappa >= 1, tending to 1 as kappa grows.
    """
    if not np.isfinite(kappa) or kappa < 1:
        raise ValueError(f"kappa must be >= 1, got {kappa}")
    return 1.0 + np.sqrt(8.0 / (kappa + 1.0))


def sign_vector(u) -> np.ndarray:
    """Componentwise sign: +1 for positive, -1 for negative, 0 for zero.

    sgn(0) = 0 keeps the map odd and makes <u, sgn(u)> equal ||u||_1 exactly.
    """
    v = np.asarray(u, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise ValueError("sign_vector input contains NaN or Inf")
    return np.sign(v)


def frobenius(Z) -> float:
    return float(np.linalg.norm(Z, "fro"))


def save_matrix_csv(Z, path) -> None:
    """CSV serialization: one row per matrix row, 17 significant digits, no header."""
    A = as_matrix(Z)
    np.savetxt(path, A, fmt="%.17g", delimiter=",")


def load_matrix_csv(path) -> np.ndarray:
    A = np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
    return as_matrix(A)
