"""Measurement ensembles: rank-one projections and dense i.i.d. maps.

A map is immutable after construction; apply/adjoint are pure and safe to
call concurrently. Randomness comes from numpy's PCG64 generator
(``np.random.default_rng``), with normal and Laplace variates drawn by the
generator's own deterministic transforms, so a given (seed, parameters)
pair reproduces the map bit-for-bit within one build.

The rank-one variant stores only the projection vectors a_i, b_i — memory
O(m (n1 + n2)) instead of the O(m n1 n2) a materialized matrix would take.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .matana import as_matrix

RANK_ONE = "rank_one"
DENSE_IID = "dense_iid"

DENSE_DISTRIBUTIONS = ("gaussian", "laplace")


@dataclass(frozen=True, eq=False)
class MeasurementMap:
    """Linear map R^{n1 x n2} -> R^m with adjoint.

    kind = "rank_one": y_i = a_i^T Z b_i, payload ``a_vecs`` (m, n1) and
    ``b_vecs`` (m, n2).
    kind = "dense_iid": y_i = <row_i, vec(Z)>, payload ``coeffs`` (m, n1*n2)
    drawn i.i.d. from ``dist`` with variance 1/m.
    """

    kind: str
    n1: int
    n2: int
    m: int
    seed: int | None = None
    dist: str = "gaussian"
    a_vecs: np.ndarray | None = field(default=None, repr=False)
    b_vecs: np.ndarray | None = field(default=None, repr=False)
    coeffs: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1 or self.m < 1:
            raise ValueError(f"invalid map dimensions n1={self.n1} n2={self.n2} m={self.m}")
        if self.kind == RANK_ONE:
            if self.a_vecs is None or self.b_vecs is None:
                raise ValueError("rank_one map needs a_vecs and b_vecs")
            if self.a_vecs.shape != (self.m, self.n1) or self.b_vecs.shape != (self.m, self.n2):
                raise ValueError("rank_one payload shapes inconsistent with (n1, n2, m)")
            finite = np.all(np.isfinite(self.a_vecs)) and np.all(np.isfinite(self.b_vecs))
        elif self.kind == DENSE_IID:
            if self.coeffs is None:
                raise ValueError("dense_iid map needs a coefficient array")
            if self.coeffs.shape != (self.m, self.n1 * self.n2):
                raise ValueError("dense payload shape inconsistent with (n1, n2, m)")
            if self.dist not in DENSE_DISTRIBUTIONS:
                raise ValueError(f"unknown distribution {self.dist!r}, expected one of {DENSE_DISTRIBUTIONS}")
            finite = np.all(np.isfinite(self.coeffs))
        else:
            raise ValueError(f"unknown map kind {self.kind!r}")
        if not finite:
            raise ValueError("measurement payload contains NaN or Inf")

    @property
    def shape(self):
        return (self.n1, self.n2)

    def _check_domain(self, Z):
        A = as_matrix(Z)
        if A.shape != (self.n1, self.n2):
            raise ValueError(f"matrix shape {A.shape} does not match map domain {(self.n1, self.n2)}")
        return np.ascontiguousarray(A)

    def apply(self, Z) -> np.ndarray:
        """Measure Z: the length-m vector (A Z)_i."""
        A = self._check_domain(Z)
        if self.kind == RANK_ONE:
            return _kernels.rank_one_apply(self.a_vecs, self.b_vecs, A)
        return self.coeffs @ A.ravel()

    def adjoint(self, u) -> np.ndarray:
        """The unique map with <adjoint(u), Z>_F = <u, apply(Z)> for all u, Z."""
        v = np.ascontiguousarray(u, dtype=np.float64)
        if v.shape != (self.m,):
            raise ValueError(f"vector length {v.shape} does not match m={self.m}")
        if not np.all(np.isfinite(v)):
            raise ValueError("adjoint input contains NaN or Inf")
        if self.kind == RANK_ONE:
            return _kernels.rank_one_adjoint(self.a_vecs, self.b_vecs, v)
        return (self.coeffs.T @ v).reshape(self.n1, self.n2)

    def apply_l1_many(self, stacked) -> np.ndarray:
        """||A(Z_j)||_1 for a stack of matrices, shape (n, n1, n2) -> (n,)."""
        S = np.ascontiguousarray(stacked, dtype=np.float64)
        if S.ndim != 3 or S.shape[1:] != (self.n1, self.n2):
            raise ValueError(f"stack shape {S.shape} does not match map domain")
        if self.kind == RANK_ONE:
            return _kernels.rank_one_l1_many(self.a_vecs, self.b_vecs, S)
        return np.abs(S.reshape(S.shape[0], -1) @ self.coeffs.T).sum(axis=1)


def make_rank_one_map(n1: int, n2: int, m: int, seed) -> MeasurementMap:
    """Gaussian rank-one projection ensemble: a_i, b_i i.i.d. standard normal."""
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((m, n1))
    b = rng.standard_normal((m, n2))
    return MeasurementMap(RANK_ONE, n1, n2, m, seed=_seed_scalar(seed), a_vecs=a, b_vecs=b)


def make_dense_map(n1: int, n2: int, m: int, dist: str, seed) -> MeasurementMap:
    """Dense i.i.d. ensemble with entry variance exactly 1/m.

    dist = "gaussian" gives the subgaussian case; "laplace" (density
    proportional to exp(-|x|/b)) realizes a subexponential law.
    """
    if dist not in DENSE_DISTRIBUTIONS:
        raise ValueError(f"unknown distribution {dist!r}, expected one of {DENSE_DISTRIBUTIONS}")
    rng = np.random.default_rng(seed)
    size = (m, n1 * n2)
    if dist == "gaussian":
        coeffs = rng.standard_normal(size) / np.sqrt(m)
    else:
        # Laplace(scale b) has variance 2 b^2; b = 1/sqrt(2m) gives 1/m.
        coeffs = rng.laplace(0.0, 1.0 / np.sqrt(2.0 * m), size)
    return MeasurementMap(DENSE_IID, n1, n2, m, seed=_seed_scalar(seed), dist=dist, coeffs=coeffs)


def _seed_scalar(seed):
    """Keep a plain int seed for provenance; composite seeds are not recorded."""
    return int(seed) if isinstance(seed, (int, np.integer)) else None


# ---------------------------------------------------------------------------
# text serialization: header line `variant n1 n2 m seed dist`, payload CSV
# ---------------------------------------------------------------------------

def save_map(mp: MeasurementMap, path) -> None:
    """Write a map as text: header then one CSV payload row per measurement.

    rank_one rows hold a_i followed by b_i (n1 + n2 values); dense rows hold
    the n1*n2 coefficients. 17 significant digits, so float64 round-trips
    exactly.
    """
    seed_tok = "-" if mp.seed is None else str(mp.seed)
    with open(path, "w") as fh:
        fh.write(f"{mp.kind} {mp.n1} {mp.n2} {mp.m} {seed_tok} {mp.dist}\n")
        if mp.kind == RANK_ONE:
            payload = np.hstack([mp.a_vecs, mp.b_vecs])
        else:
            payload = mp.coeffs
        np.savetxt(fh, payload, fmt="%.17g", delimiter=",")


def load_map(path) -> MeasurementMap:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 6:
            raise ValueError(f"malformed map header in {path}")
        kind, n1, n2, m, seed_tok, dist = header
        n1, n2, m = int(n1), int(n2), int(m)
        seed = None if seed_tok == "-" else int(seed_tok)
        payload = np.loadtxt(fh, delimiter=",", ndmin=2, dtype=np.float64)
    if kind == RANK_ONE:
        return MeasurementMap(kind, n1, n2, m, seed=seed, dist=dist,
                              a_vecs=np.ascontiguousarray(payload[:, :n1]),
                              b_vecs=np.ascontiguousarray(payload[:, n1:]))
    return MeasurementMap(kind, n1, n2, m, seed=seed, dist=dist, coeffs=payload)
