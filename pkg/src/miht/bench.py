"""Experiment harness: planted-instance recovery sweeps emitted as CSV.

Every experiment is a pure function of (spec, seed): instances are planted
from sub-generators derived by a counter scheme (master seed plus stable
cell coordinates plus trial index), so adding trials never perturbs
earlier trials and all algorithms see identical instances within a cell.
CSV artifacts are replay-deterministic byte for byte, except the
wall-clock column of the timing experiment, which measures the machine.

Timing runs are always serial regardless of the worker count so that the
clocks are clean; the other experiments fan trials out over processes when
``workers > 1`` and merge rows in deterministic grid order.
"""

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from statistics import median
from typing import Optional

import numpy as np

from . import _csvio
from .measure import make_rank_one_map
from .recover import MihtConfig, iht_classic, miht, niht
from .rripcheck import sample_rank_r

ALGORITHMS = ("miht_default", "miht_r_2r", "iht", "niht")
EXPERIMENTS = ("st_grid", "phase", "timing", "robustness", "rrip")

ST_GRID_FIELDS = ("s", "t", "success_count", "trials")
PHASE_FIELDS = ("algorithm", "m", "success_count", "trials")
ROBUSTNESS_FIELDS = ("algorithm", "l1_noise", "frob_error_median", "frob_error_max")
TIMING_FIELDS = ("algorithm", "N", "median_wall_time_seconds", "median_iterations")
RRIP_FIELDS = ("m", "trial", "alpha_hat", "beta_hat", "gamma_hat")


@dataclass
class ExperimentSpec:
    """Knobs for one experiment run; unused fields stay None."""

    experiment: str
    n1: int = 0
    n2: int = 0
    rank: int = 1
    seed: int = 0
    m: Optional[int] = None
    m_values: Optional[tuple] = None
    s_values: Optional[tuple] = None
    t_values: Optional[tuple] = None          # entries are ints or None (= full)
    n_values: Optional[tuple] = None          # timing dimension grid, n1 = n2 = N
    noise_l1_values: Optional[tuple] = None
    trials: int = 1
    success_threshold: float = 1e-4
    algorithms: tuple = ("miht_default",)
    gamma: float = 3.0
    max_iter: int = 500
    m_per_rank_dim: int = 8                   # timing uses m = this * rank * N
    workers: int = 1
    output_path: Optional[str] = None

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.success_threshold <= 0:
            raise ValueError("success_threshold must be positive")
        for alg in self.algorithms:
            if alg not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {alg!r}, expected subset of {ALGORITHMS}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        return self

    def meta(self) -> dict:
        out = {"experiment": self.experiment, "seed": self.seed, "rank": self.rank,
               "trials": self.trials, "gamma": self.gamma, "max_iter": self.max_iter,
               "success_threshold": self.success_threshold,
               "algorithms": ",".join(self.algorithms)}
        if self.n1:
            out["n1"], out["n2"] = self.n1, self.n2
        if self.m is not None:
            out["m"] = self.m
        for name in ("m_values", "n_values", "noise_l1_values"):
            v = getattr(self, name)
            if v is not None:
                out[name] = ",".join(_csvio.format_value(x) for x in v)
        if self.s_values is not None:
            out["s_values"] = ",".join(str(s) for s in self.s_values)
        if self.t_values is not None:
            out["t_values"] = ",".join("ALL" if t is None else str(t) for t in self.t_values)
        if self.experiment == "timing":
            out["m_per_rank_dim"] = self.m_per_rank_dim
        return out


def _sub_seed(master, *coords):
    """Two derived 64-bit seeds (map, instance) for a stable cell coordinate."""
    ss = np.random.SeedSequence([int(master)] + [int(c) for c in coords])
    state = ss.generate_state(3, np.uint64)
    return int(state[0]), int(state[1]), int(state[2])


def run_planted_trial(task: dict) -> dict:
    """Plant a unit-norm rank-r matrix, measure it, recover it, score it.

    task keys: n1 n2 rank m algorithm s t gamma noise_l1 success_threshold
    max_iter map_seed x_seed e_seed enable_condsri_stop(optional).
    """
    n1, n2, r, m = task["n1"], task["n2"], task["rank"], task["m"]
    mp = make_rank_one_map(n1, n2, m, task["map_seed"])
    X = sample_rank_r(n1, n2, r, task["x_seed"])
    y = mp.apply(X)
    noise_l1 = task.get("noise_l1", 0.0)
    if noise_l1:
        rng = np.random.default_rng(task["e_seed"])
        signs = rng.integers(0, 2, m) * 2.0 - 1.0
        y = y + signs * (noise_l1 / m)

    alg = task["algorithm"]
    start = time.perf_counter()
    if alg in ("miht_default", "miht_r_2r"):
        t = task.get("t", "default")
        if t == "default":
            t = min(2 * r, n1, n2) if alg == "miht_r_2r" else None
        cfg = MihtConfig(target_rank=r, thresh_s=task.get("s") or r, thresh_t=t,
                         gamma=task["gamma"], max_iter=task["max_iter"],
                         enable_condsri_stop=task.get("enable_condsri_stop", False))
        res = miht(mp, y, cfg, truth=X)
    elif alg == "iht":
        res = iht_classic(mp, y, r, mu=1.0 / m, max_iter=task["max_iter"], truth=X)
    elif alg == "niht":
        res = niht(mp, y, r, max_iter=task["max_iter"], truth=X)
    else:
        raise ValueError(f"unknown algorithm {alg!r}")
    wall = time.perf_counter() - start

    err = float(np.linalg.norm(X - res.final_iterate, "fro"))
    return {"frob_error": err, "iterations": res.iterations_used,
            "success": err <= task["success_threshold"], "wall_time": wall,
            "stop_reason": res.stop_reason}


def _run_tasks(tasks, workers):
    if workers <= 1:
        return [run_planted_trial(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_planted_trial, tasks, chunksize=4))


def _base_task(spec, m):
    return {"n1": spec.n1, "n2": spec.n2, "rank": spec.rank, "m": m,
            "gamma": spec.gamma, "max_iter": spec.max_iter,
            "success_threshold": spec.success_threshold}


def run_st_grid(spec: ExperimentSpec):
    """Success counts over an (s, t) truncation grid at fixed m.

    t = None rows report the effective full value min(n1, n2). Sub-seeds are
    keyed by (s, t, trial) so every cell sees independent instances, and the
    same (trial) within a cell is reproducible in isolation.
    """
    spec.validate()
    n = min(spec.n1, spec.n2)
    if spec.m is None or not spec.s_values or not spec.t_values:
        raise ValueError("st_grid needs m, s_values and t_values")
    for s in spec.s_values:
        if not spec.rank <= s <= n:
            raise ValueError(f"grid s={s} outside [{spec.rank}, {n}]")
    for t in spec.t_values:
        if t is not None and not 1 <= t <= n:
            raise ValueError(f"grid t={t} outside [1, {n}]")
    rows = []
    for s in spec.s_values:
        for t in spec.t_values:
            t_code = 0 if t is None else t  # seed coordinates must be nonnegative; real t >= 1
            tasks = []
            for trial in range(spec.trials):
                ms, xs, es = _sub_seed(spec.seed, 1, s, t_code, trial)
                task = _base_task(spec, spec.m)
                task.update(algorithm="miht_default", s=s, t=t,
                            map_seed=ms, x_seed=xs, e_seed=es)
                tasks.append(task)
            results = _run_tasks(tasks, spec.workers)
            rows.append({"s": s, "t": n if t is None else t,
                         "success_count": sum(r["success"] for r in results),
                         "trials": spec.trials})
    return rows


def run_phase(spec: ExperimentSpec):
    """Success counts vs measurement count, one row per (algorithm, m).

    All algorithms see identical planted instances within an (m, trial)
    cell, so cross-algorithm comparisons are paired.
    """
    spec.validate()
    if not spec.m_values:
        raise ValueError("phase needs m_values")
    rows = []
    for alg in spec.algorithms:
        for m in spec.m_values:
            tasks = []
            for trial in range(spec.trials):
                ms, xs, es = _sub_seed(spec.seed, 2, m, trial)
                task = _base_task(spec, m)
                task.update(algorithm=alg, map_seed=ms, x_seed=xs, e_seed=es)
                tasks.append(task)
            results = _run_tasks(tasks, spec.workers)
            rows.append({"algorithm": alg, "m": m,
                         "success_count": sum(r["success"] for r in results),
                         "trials": spec.trials})
    return rows


def run_robustness(spec: ExperimentSpec):
    """Recovery error vs measurement-noise level at fixed m.

    Noise has random signs and equal magnitudes summing to the target l1
    norm; the sign pattern and instance are shared across noise levels and
    algorithms (keyed by trial only), isolating the effect of the level.
    """
    spec.validate()
    if spec.m is None or not spec.noise_l1_values:
        raise ValueError("robustness needs m and noise_l1_values")
    if any(eps < 0 for eps in spec.noise_l1_values):
        raise ValueError("noise levels must be nonnegative")
    rows = []
    for alg in spec.algorithms:
        for eps in spec.noise_l1_values:
            tasks = []
            for trial in range(spec.trials):
                ms, xs, es = _sub_seed(spec.seed, 3, trial)
                task = _base_task(spec, spec.m)
                task.update(algorithm=alg, noise_l1=float(eps),
                            map_seed=ms, x_seed=xs, e_seed=es)
                tasks.append(task)
            results = _run_tasks(tasks, spec.workers)
            errs = [r["frob_error"] for r in results]
            rows.append({"algorithm": alg, "l1_noise": float(eps),
                         "frob_error_median": float(median(errs)),
                         "frob_error_max": float(max(errs))})
    return rows


def run_timing(spec: ExperimentSpec):
    """Wall time and iteration medians over a dimension grid, n1 = n2 = N.

    m scales as m_per_rank_dim * rank * N. Only successful recoveries count;
    cells with no success report nan. Always serial: parallel trials would
    contaminate the clocks.
    """
    spec.validate()
    if not spec.n_values:
        raise ValueError("timing needs n_values")
    rows = []
    for alg in spec.algorithms:
        for N in spec.n_values:
            m = spec.m_per_rank_dim * spec.rank * N
            tasks = []
            for trial in range(spec.trials):
                ms, xs, es = _sub_seed(spec.seed, 4, N, trial)
                task = _base_task(spec, m)
                task.update(n1=N, n2=N, algorithm=alg, map_seed=ms, x_seed=xs, e_seed=es)
                tasks.append(task)
            results = [run_planted_trial(t) for t in tasks]
            ok = [r for r in results if r["success"]]
            if len(ok) < min(5, spec.trials):
                logging.getLogger(__name__).warning(
                    "timing cell alg=%s N=%d: only %d/%d successful runs", alg, N, len(ok), spec.trials)
            rows.append({"algorithm": alg, "N": N,
                         "median_wall_time_seconds":
                             float(median(r["wall_time"] for r in ok)) if ok else float("nan"),
                         "median_iterations":
                             float(median(r["iterations"] for r in ok)) if ok else float("nan")})
    return rows


RUNNERS = {"st_grid": (run_st_grid, ST_GRID_FIELDS),
           "phase": (run_phase, PHASE_FIELDS),
           "robustness": (run_robustness, ROBUSTNESS_FIELDS),
           "timing": (run_timing, TIMING_FIELDS)}


def run_and_write(spec: ExperimentSpec) -> list:
    """Run the experiment named by the spec and write its CSV if requested."""
    if spec.experiment not in RUNNERS:
        raise ValueError(f"experiment {spec.experiment!r} is not a planted-recovery sweep; "
                         "use rripcheck.concentration_curve for isometry curves")
    runner, fields = RUNNERS[spec.experiment]
    rows = runner(spec)
    if spec.output_path:
        _csvio.write_rows(spec.output_path, spec.meta(), fields, rows)
    return rows
