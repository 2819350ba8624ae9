"""Monte-Carlo estimation of the l1 rank-restricted isometry constants.

For a map A the optimal constants alpha_r, beta_r satisfy
alpha_r ||Z||_F <= ||A(Z)||_1 <= beta_r ||Z||_F over all rank-<=r matrices.
Sampling the manifold from the inside can only shrink the observed range,
so alpha_hat >= alpha_r, beta_hat <= beta_r, and the reported ratio
gamma_hat = beta_hat / alpha_hat is a LOWER estimate of the true ratio
gamma_r everywhere it appears.

Samples are drawn in fixed-size chunks whose generators are derived from
(seed, chunk_index), so estimates refine monotonically as n_samples grows
and chunks can be farmed out in parallel without changing the result.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .measure import MeasurementMap, make_dense_map

SAMPLE_CHUNK = 256


@dataclass
class RripEstimate:
    order: int
    n_samples: int
    alpha_hat: float
    beta_hat: float
    gamma_hat: float
    sample_l1_values: Optional[np.ndarray] = None


def _compose_seed(seed, *extra):
    base = list(seed) if isinstance(seed, (list, tuple)) else [seed]
    return [int(x) for x in base + list(extra)]


def sample_rank_r(n1: int, n2: int, r: int, seed) -> np.ndarray:
    """One uniform-ish rank-<=r matrix with unit Frobenius norm.

    Built as G1 @ G2.T from independent standard normal factors, then
    normalized. The all-zero draw has probability zero; it is resampled
    from a derived stream if it ever occurs.
    """
    if not 1 <= r <= min(n1, n2):
        raise ValueError(f"rank r={r} outside [1, {min(n1, n2)}]")
    rng = np.random.default_rng(seed)
    for attempt in range(100):
        G1 = rng.standard_normal((n1, r))
        G2 = rng.standard_normal((n2, r))
        Z = G1 @ G2.T
        nrm = np.linalg.norm(Z, "fro")
        if nrm > 0:
            return Z / nrm
    raise RuntimeError("degenerate rank-r sampling stream")


def _sample_chunk(n1, n2, r, seed, chunk_index, count=SAMPLE_CHUNK):
    """A chunk of unit-norm rank-<=r samples; content depends only on
    (seed, chunk_index), never on how many samples the caller wants."""
    rng = np.random.default_rng(_compose_seed(seed, chunk_index))
    G1 = rng.standard_normal((SAMPLE_CHUNK, n1, r))
    G2 = rng.standard_normal((SAMPLE_CHUNK, n2, r))
    Z = np.einsum("cik,cjk->cij", G1, G2)
    nrm = np.linalg.norm(Z.reshape(SAMPLE_CHUNK, -1), axis=1)
    for i in np.nonzero(nrm == 0)[0]:
        Z[i] = sample_rank_r(n1, n2, r, _compose_seed(seed, chunk_index, int(i), 1))
        nrm[i] = 1.0
    return (Z / nrm[:, None, None])[:count]


def estimate_constants(mp: MeasurementMap, r: int, n_samples: int, seed,
                       keep_samples: bool = False) -> RripEstimate:
    """Inner Monte-Carlo estimate of (alpha, beta, gamma) at order r.

    alpha_hat / beta_hat are the min / max of ||A(Z)||_1 over the unit-norm
    samples. Adding samples can only decrease alpha_hat and increase
    beta_hat.
    """
    if n_samples < 2:
        raise ValueError("need at least 2 samples")
    if not 1 <= r <= min(mp.n1, mp.n2):
        raise ValueError(f"order r={r} outside [1, {min(mp.n1, mp.n2)}]")
    values = []
    for chunk_index in range((n_samples + SAMPLE_CHUNK - 1) // SAMPLE_CHUNK):
        count = min(SAMPLE_CHUNK, n_samples - chunk_index * SAMPLE_CHUNK)
        Z = _sample_chunk(mp.n1, mp.n2, r, seed, chunk_index, count)
        values.append(mp.apply_l1_many(Z))
    values = np.concatenate(values)
    alpha = float(values.min())
    beta = float(values.max())
    if alpha <= 0:
        raise RuntimeError("sampled l1 measurement norm hit zero; map is degenerate on the manifold")
    return RripEstimate(order=r, n_samples=n_samples, alpha_hat=alpha, beta_hat=beta,
                        gamma_hat=beta / alpha,
                        sample_l1_values=values if keep_samples else None)


def concentration_curve(dist: str, n: int, r: int, m_values, trials: int, seed,
                        n_samples: int = 500):
    """Isometry-ratio trend over a measurement-count grid for a dense ensemble.

    For each m and trial a fresh map is drawn and its gamma_hat estimated;
    rows (m, trial, alpha_hat, beta_hat, gamma_hat) come back in grid order.
    Sub-seeds are derived from (seed, m, trial), so adding trials or grid
    points never perturbs existing rows.
    """
    if not m_values:
        raise ValueError("m_values must be nonempty")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rows = []
    for m in m_values:
        for trial in range(trials):
            mp = make_dense_map(n, n, m, dist, _compose_seed(seed, m, trial, 0))
            est = estimate_constants(mp, r, n_samples, _compose_seed(seed, m, trial, 1))
            rows.append({"m": m, "trial": trial, "alpha_hat": est.alpha_hat,
                         "beta_hat": est.beta_hat, "gamma_hat": est.gamma_hat})
    return rows


def summarize_curve(rows):
    """Collapse per-trial curve rows to (m, gamma_hat median, gamma_hat max)."""
    out = []
    for m in sorted({row["m"] for row in rows}):
        g = np.array([row["gamma_hat"] for row in rows if row["m"] == m])
        out.append({"m": m, "gamma_hat_median": float(np.median(g)),
                    "gamma_hat_max": float(g.max())})
    return out
