"""Hot inner-loop kernels with a numba fast path and a pure-numpy fallback.

The rank-one measurement operator and its adjoint are evaluated once or
twice per solver iteration and millions of times across a Monte-Carlo
sweep, so they get @njit loop implementations. Set ``MIHT_PURE_NUMPY=1``
in the environment (before import) to force the numpy path; the fallback
also engages automatically when numba is not importable.

Dense-ensemble products are plain BLAS matmuls either way — numba buys
nothing over a GEMM call, so those live in :mod:`miht.measure` directly.

Both paths compute identical quantities; results agree to floating-point
roundoff (summation order differs between a fused loop and BLAS).
"""

import os

import numpy as np

PURE_NUMPY_ENV = "MIHT_PURE_NUMPY"


def _numba_requested() -> bool:
    return os.environ.get(PURE_NUMPY_ENV, "").strip().lower() not in {"1", "true", "yes"}


# ---------------------------------------------------------------------------
# pure-numpy reference implementations
# ---------------------------------------------------------------------------

def rank_one_apply_np(a_vecs, b_vecs, Z):
    """y_i = a_i^T Z b_i for stacked measurement vectors (m,n1), (m,n2)."""
    return ((a_vecs @ Z) * b_vecs).sum(axis=1)


def rank_one_adjoint_np(a_vecs, b_vecs, u):
    """sum_i u_i a_i b_i^T, an (n1, n2) matrix."""
    return (a_vecs * u[:, None]).T @ b_vecs


def rank_one_l1_many_np(a_vecs, b_vecs, stacked):
    """||A(Z_j)||_1 for a stack of matrices, shape (n, n1, n2) -> (n,)."""
    n = stacked.shape[0]
    m, n1 = a_vecs.shape
    out = np.empty(n)
    # chunk so the (chunk, n1, m) temporary stays ~32 MB
    step = max(1, int(2**22 // max(1, n1 * m)))
    at = np.ascontiguousarray(a_vecs.T)
    bt = np.ascontiguousarray(b_vecs.T)
    for lo in range(0, n, step):
        t = stacked[lo:lo + step] @ bt          # (chunk, n1, m)
        y = np.einsum("cim,im->cm", t, at)      # y[c, j] = a_j . Z_c b_j
        out[lo:lo + step] = np.abs(y).sum(axis=1)
    return out


# ---------------------------------------------------------------------------
# numba fast path
# ---------------------------------------------------------------------------

NUMBA_AVAILABLE = False
if _numba_requested():
    try:
        from numba import njit

        NUMBA_AVAILABLE = True
    except ImportError:
        NUMBA_AVAILABLE = False

if NUMBA_AVAILABLE:

    @njit(cache=True)
    def rank_one_apply_nb(a_vecs, b_vecs, Z):
        m, n1 = a_vecs.shape
        n2 = b_vecs.shape[1]
        y = np.empty(m)
        for i in range(m):
            acc = 0.0
            for k in range(n1):
                s = 0.0
                for l in range(n2):
                    s += Z[k, l] * b_vecs[i, l]
                acc += a_vecs[i, k] * s
            y[i] = acc
        return y

    @njit(cache=True)
    def rank_one_adjoint_nb(a_vecs, b_vecs, u):
        m, n1 = a_vecs.shape
        n2 = b_vecs.shape[1]
        G = np.zeros((n1, n2))
        for i in range(m):
            ui = u[i]
            if ui == 0.0:
                continue
            for k in range(n1):
                c = ui * a_vecs[i, k]
                for l in range(n2):
                    G[k, l] += c * b_vecs[i, l]
        return G

    @njit(cache=True)
    def rank_one_l1_many_nb(a_vecs, b_vecs, stacked):
        n = stacked.shape[0]
        m, n1 = a_vecs.shape
        n2 = b_vecs.shape[1]
        out = np.empty(n)
        for j in range(n):
            tot = 0.0
            for i in range(m):
                acc = 0.0
                for k in range(n1):
                    s = 0.0
                    for l in range(n2):
                        s += stacked[j, k, l] * b_vecs[i, l]
                    acc += a_vecs[i, k] * s
                tot += abs(acc)
            out[j] = tot
        return out

    rank_one_apply = rank_one_apply_nb
    rank_one_adjoint = rank_one_adjoint_nb
    rank_one_l1_many = rank_one_l1_many_nb
else:
    rank_one_apply = rank_one_apply_np
    rank_one_adjoint = rank_one_adjoint_np
    rank_one_l1_many = rank_one_l1_many_np


def active_path() -> str:
    """Which implementation is wired in: 'numba' or 'numpy'."""
    return "numba" if NUMBA_AVAILABLE else "numpy"
