"""Low-rank recovery solvers.

``miht`` iterates X_{n+1} = H_s(X_n + mu_n H_t(A* sgn(y - A X_n))) from
X_0 = 0: a subgradient step on Z -> ||y - A Z||_1 with an inner rank-t
truncation, an adaptive stepsize, and an outer rank-s truncation. It is
built for measurement maps that satisfy an l1-norm rank-restricted
isometry (rank-one projections, subexponential dense ensembles) where the
standard l2 isometry fails.

``iht_classic`` (fixed stepsize, plain residual) and ``niht`` (adaptive
l2 stepsize with a subspace-projected gradient) are the baselines.

A single run is sequential; distinct runs share no mutable state and may
execute in parallel.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional

import numpy as np

from .matana import as_matrix, hard_threshold, sign_vector, svd
from .measure import MeasurementMap

log = logging.getLogger(__name__)

RESIDUAL_CONVERGED = "residual_converged"
ITERATE_CONVERGED = "iterate_converged"
MAX_ITER = "max_iter"
CONDSRI_TRIGGERED = "condsri_triggered"


class StagnantDirectionError(RuntimeError):
    """The thresholded update direction vanished; no step can be taken."""


@dataclass(frozen=True)
class MihtConfig:
    """Solver parameters.

    thresh_s / thresh_t are the outer/inner truncation ranks; None means
    "use the default": s defaults to target_rank, t = None disables the
    inner truncation entirely (equivalent to t = min(n1, n2), saving one
    SVD per iteration). fixed_stepsize None selects the adaptive rule;
    stepsize_scale multiplies whichever stepsize is in force (used to probe
    stepsize leeway). tol_residual None means 1e-10 * ||y||_1 at run time.
    """

    target_rank: int
    thresh_s: Optional[int] = None
    thresh_t: Optional[int] = None
    gamma: float = 3.0
    fixed_stepsize: Optional[float] = None
    stepsize_scale: float = 1.0
    max_iter: int = 500
    tol_residual: Optional[float] = None
    tol_change: float = 1e-8
    enable_condsri_stop: bool = False

    def resolved(self, n1: int, n2: int) -> "MihtConfig":
        """Fill defaults and validate against the problem dimensions."""
        n = min(n1, n2)
        s = self.target_rank if self.thresh_s is None else self.thresh_s
        t = n if self.thresh_t is None else self.thresh_t
        if not 1 <= self.target_rank <= s <= n:
            raise ValueError(f"need 1 <= r <= s <= min(n1,n2): r={self.target_rank} s={s} n={n}")
        if not 1 <= t <= n:
            raise ValueError(f"inner rank t={t} outside [1, {n}]")
        if self.gamma < 1:
            raise ValueError(f"gamma must be >= 1, got {self.gamma}")
        if self.fixed_stepsize is not None and self.fixed_stepsize <= 0:
            raise ValueError("fixed stepsize must be positive")
        if self.max_iter < 1 or self.tol_change <= 0 or self.stepsize_scale <= 0:
            raise ValueError("max_iter >= 1, tol_change > 0, stepsize_scale > 0 required")
        return replace(self, thresh_s=s, thresh_t=t)


def theorem_parameters(r: int, gamma: float, n_min: Optional[int] = None) -> tuple[int, int]:
    """Theory-grade truncation ranks s = 100 gamma^4 r, t = 800 gamma^12 s.

    These are far beyond any desk-scale min(n1, n2); when n_min is given the
    values are clamped to it with a warning. Practical default is s = r with
    the inner truncation disabled.
    """
    s = math.ceil(100.0 * gamma**4 * r)
    t = math.ceil(800.0 * gamma**12 * s)
    if n_min is not None:
        if s > n_min or t > n_min:
            log.warning("theorem ranks s=%d t=%d exceed min(n1,n2)=%d; clamping", s, t, n_min)
        s, t = min(s, n_min), min(t, n_min)
    return s, t


def theorem_config(r: int, gamma: float, n1: int, n2: int, **overrides) -> MihtConfig:
    """A MihtConfig in theorem-faithful mode: truncation ranks from
    theorem_parameters, clamped to the problem dimensions."""
    s, t = theorem_parameters(r, gamma, min(n1, n2))
    return MihtConfig(target_rank=r, thresh_s=s, thresh_t=t, gamma=gamma, **overrides)


class TracePoint(NamedTuple):
    iteration: int
    l1_residual: float
    stepsize: float       # nan on the final row (no step taken from it)
    frob_error: float     # nan when no ground truth was supplied


@dataclass
class RecoveryResult:
    final_iterate: np.ndarray
    iterations_used: int
    stop_reason: str
    trace: list

    def frob_errors(self) -> np.ndarray:
        return np.array([p.frob_error for p in self.trace])

    def l1_residuals(self) -> np.ndarray:
        return np.array([p.l1_residual for p in self.trace])


def write_trace_csv(result: RecoveryResult, path) -> None:
    """Per-iteration trace: iter, l1_residual, stepsize, frob_error.

    stepsize is empty on the final row; frob_error is empty when the run had
    no ground truth.
    """
    with open(path, "w") as fh:
        fh.write("iter,l1_residual,stepsize,frob_error\n")
        for p in result.trace:
            step = "" if math.isnan(p.stepsize) else repr(p.stepsize)
            err = "" if math.isnan(p.frob_error) else repr(p.frob_error)
            fh.write(f"{p.iteration},{p.l1_residual!r},{step},{err}\n")


def _signed_direction(mp: MeasurementMap, residual: np.ndarray, t: int) -> np.ndarray:
    """H_t(A* sgn(residual)); the truncation is skipped when t is full."""
    G = mp.adjoint(sign_vector(residual))
    if t >= min(mp.n1, mp.n2):
        return G
    return hard_threshold(G, t)


def _adaptive_mu(mp, l1_resid, D, gamma):
    """Stepsize l1_resid / max{||D||_F^2, ||A(D)||_1^2 / (4 gamma^2 ||D||_F^2)}.

    Returns (mu, condsri_hit, nu). condsri_hit is the early-stop test
    ||A(D)||_1 >= 2 gamma ||D||_F^2, equivalent to the max being attained
    by its second term.
    """
    dsq = float(np.sum(D * D))
    if dsq == 0.0:
        raise StagnantDirectionError("thresholded direction is identically zero")
    ad_l1 = float(np.abs(mp.apply(D)).sum())
    condsri = ad_l1 >= 2.0 * gamma * dsq
    nu = max(dsq, ad_l1 * ad_l1 / (4.0 * gamma * gamma * dsq))
    return l1_resid / nu, condsri, nu


def stepsize(mp: MeasurementMap, y, Xn, cfg: MihtConfig):
    """One stepsize evaluation at iterate Xn: (mu, condsri_hit, direction).

    Requires a nonzero residual (a zero residual means recovery is already
    exact and no step is defined). Raises StagnantDirectionError when the
    thresholded direction vanishes.
    """
    cfg = cfg.resolved(mp.n1, mp.n2)
    y = np.asarray(y, dtype=np.float64)
    residual = y - mp.apply(Xn)
    l1 = float(np.abs(residual).sum())
    if l1 == 0.0:
        raise ValueError("residual is identically zero; recovery is already exact")
    D = _signed_direction(mp, residual, cfg.thresh_t)
    mu, condsri, _ = _adaptive_mu(mp, l1, D, cfg.gamma)
    if cfg.fixed_stepsize is not None:
        mu = cfg.fixed_stepsize
    return mu * cfg.stepsize_scale, condsri, D


def miht(mp: MeasurementMap, y, cfg: MihtConfig, truth=None) -> RecoveryResult:
    """Run the modified iterative hard thresholding scheme from X_0 = 0.

    Stops when the l1 residual falls below tolerance, the iterate change
    ||X_{n+1} - X_n||_F drops below tol_change * (1 + ||X_n||_F), the
    condsri early-stop test fires (if enabled), or max_iter steps are taken.
    Every iterate has rank <= thresh_s by construction. The trace holds one
    record per iterate, X_0 included.
    """
    cfg = cfg.resolved(mp.n1, mp.n2)
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (mp.m,):
        raise ValueError(f"measurement vector length {y.shape} does not match m={mp.m}")
    truth_m = None if truth is None else as_matrix(truth)

    tol_res = cfg.tol_residual if cfg.tol_residual is not None else 1e-10 * float(np.abs(y).sum())
    X = np.zeros((mp.n1, mp.n2))
    trace = []
    n = 0
    pending = None

    while True:
        residual = y - mp.apply(X)
        l1 = float(np.abs(residual).sum())
        err = math.nan if truth_m is None else float(np.linalg.norm(truth_m - X, "fro"))
        if pending is not None:
            trace.append(TracePoint(n, l1, math.nan, err))
            reason = pending
            break
        if l1 <= tol_res:
            trace.append(TracePoint(n, l1, math.nan, err))
            reason = RESIDUAL_CONVERGED
            break
        if n >= cfg.max_iter:
            trace.append(TracePoint(n, l1, math.nan, err))
            reason = MAX_ITER
            break
        try:
            D = _signed_direction(mp, residual, cfg.thresh_t)
            mu, condsri, _ = _adaptive_mu(mp, l1, D, cfg.gamma)
        except StagnantDirectionError:
            trace.append(TracePoint(n, l1, math.nan, err))
            reason = MAX_ITER
            break
        if condsri and cfg.enable_condsri_stop:
            trace.append(TracePoint(n, l1, math.nan, err))
            reason = CONDSRI_TRIGGERED
            break
        if cfg.fixed_stepsize is not None:
            mu = cfg.fixed_stepsize
        mu *= cfg.stepsize_scale
        trace.append(TracePoint(n, l1, mu, err))

        X_next = hard_threshold(X + mu * D, cfg.thresh_s)
        if not np.all(np.isfinite(X_next)):
            raise RuntimeError(f"non-finite iterate produced at iteration {n}")
        change = float(np.linalg.norm(X_next - X, "fro"))
        if change <= cfg.tol_change * (1.0 + float(np.linalg.norm(X, "fro"))):
            pending = ITERATE_CONVERGED
        X = X_next
        n += 1

    return RecoveryResult(X, n, reason, trace)


def iht_classic(mp: MeasurementMap, y, r: int, mu: float, max_iter: int = 500,
                tol: Optional[float] = None, truth=None, tol_change: float = 1e-8) -> RecoveryResult:
    """Classical iterative hard thresholding: X_{n+1} = H_r(X_n + mu A*(y - A X_n)).

    Fixed stepsize mu > 0; same stopping surface as miht minus the condsri
    test.
    """
    if mu <= 0:
        raise ValueError("stepsize mu must be positive")
    return _l2_style_loop(mp, y, r, max_iter, tol, truth, tol_change, fixed_mu=mu)


def niht(mp: MeasurementMap, y, r: int, max_iter: int = 500,
         tol: Optional[float] = None, truth=None, tol_change: float = 1e-8) -> RecoveryResult:
    """Normalized IHT baseline with the adaptive l2 stepsize.

    mu_n = ||P_n(G)||_F^2 / ||A(P_n(G))||_2^2 where G = A*(y - A X_n) and
    P_n projects onto the row-and-column space of the current iterate
    (identity at X_0 = 0). Assumes the standard (l2) rank-restricted
    isometry; included as a baseline that fails without it.
    """
    return _l2_style_loop(mp, y, r, max_iter, tol, truth, tol_change, fixed_mu=None)


def _subspace_projection(X, r):
    """Projector data (U, V) for the row-and-column space of X, or None at X = 0."""
    f = svd(X)
    cutoff = f.singular_values[0] * max(X.shape) * np.finfo(np.float64).eps if f.singular_values.size else 0.0
    k = min(r, int(np.sum(f.singular_values > cutoff)))
    if k == 0:
        return None
    return f.left_vectors[:, :k], f.right_vectors[:, :k]


def _project_row_col(W, proj):
    if proj is None:
        return W
    U, V = proj
    UtW = U.T @ W
    WV = W @ V
    return U @ UtW + WV @ V.T - U @ (UtW @ V) @ V.T


def _l2_style_loop(mp, y, r, max_iter, tol, truth, tol_change, fixed_mu):
    if not 1 <= r <= min(mp.n1, mp.n2):
        raise ValueError(f"rank r={r} outside [1, {min(mp.n1, mp.n2)}]")
    if max_iter < 1 or tol_change <= 0:
        raise ValueError("max_iter >= 1 and tol_change > 0 required")
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (mp.m,):
        raise ValueError(f"measurement vector length {y.shape} does not match m={mp.m}")
    truth_m = None if truth is None else as_matrix(truth)
    tol_res = tol if tol is not None else 1e-10 * float(np.abs(y).sum())

    X = np.zeros((mp.n1, mp.n2))
    trace = []
    n = 0
    pending = None

    while True:
        residual = y - mp.apply(X)
        l1 = float(np.abs(residual).sum())
        err = math.nan if truth_m is None else float(np.linalg.norm(truth_m - X, "fro"))
        if pending is not None:
            trace.append(TracePoint(n, l1, math.nan, err))
            reason = pending
            break
        if l1 <= tol_res:
            trace.append(TracePoint(n, l1, math.nan, err))
            reason = RESIDUAL_CONVERGED
            break
        if n >= max_iter:
            trace.append(TracePoint(n, l1, math.nan, err))
            reason = MAX_ITER
            break
        G = mp.adjoint(residual)
        if fixed_mu is not None:
            mu = fixed_mu
        else:
            PG = _project_row_col(G, _subspace_projection(X, r))
            num = float(np.sum(PG * PG))
            den = float(np.sum(mp.apply(PG) ** 2))
            if num == 0.0 or den == 0.0:
                trace.append(TracePoint(n, l1, math.nan, err))
                reason = MAX_ITER
                break
            mu = num / den
        trace.append(TracePoint(n, l1, mu, err))

        X_next = hard_threshold(X + mu * G, r)
        if not np.all(np.isfinite(X_next)):
            raise RuntimeError(f"non-finite iterate produced at iteration {n}")
        change = float(np.linalg.norm(X_next - X, "fro"))
        if change <= tol_change * (1.0 + float(np.linalg.norm(X, "fro"))):
            pending = ITERATE_CONVERGED
        X = X_next
        n += 1

    return RecoveryResult(X, n, reason, trace)
