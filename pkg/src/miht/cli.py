"""Command-line entry points for recovery runs and experiment sweeps.

Subcommands: recover, st-grid, phase, robustness, timing, rrip-curve.
Experiment commands require --seed and write self-describing CSV via
--out. A flat key=value file can supply any long option through --config;
explicit flags win over config values.
"""

import argparse
import sys

import numpy as np

from . import _csvio, bench, rripcheck
from .measure import make_rank_one_map, load_map, save_map
from .matana import load_matrix_csv, save_matrix_csv
from .recover import (MihtConfig, iht_classic, miht, niht, theorem_config,
                      write_trace_csv)


def _int_list(text):
    return tuple(int(x) for x in text.split(","))


def _float_list(text):
    return tuple(float(x) for x in text.split(","))


def _t_list(text):
    return tuple(None if x.strip().upper() == "ALL" else int(x) for x in text.split(","))


def _t_value(text):
    return None if text.strip().upper() == "ALL" else int(text)


def _alg_list(text):
    return tuple(x.strip() for x in text.split(","))


def _add_common(p, with_dims=True):
    if with_dims:
        p.add_argument("--n1", type=int, help="matrix rows")
        p.add_argument("--n2", type=int, help="matrix columns")
    p.add_argument("--rank", type=int, default=1, help="planted rank r")
    p.add_argument("--seed", type=int, help="master seed (required for experiments)")
    p.add_argument("--gamma", type=float, default=3.0)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--success-threshold", type=float, default=1e-4)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="CSV output path")
    p.add_argument("--config", help="flat key=value file supplying defaults for any option")


def build_parser():
    ap = argparse.ArgumentParser(prog="miht",
                                 description="low-rank recovery from l1-isometry measurements")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("recover", help="single planted or file-driven recovery run")
    _add_common(p)
    p.add_argument("--m", type=int, help="measurement count (when planting)")
    p.add_argument("--algorithm", default="miht_default", choices=bench.ALGORITHMS)
    p.add_argument("--s", type=int, help="outer truncation rank (default: rank)")
    p.add_argument("--t", type=_t_value, help="inner truncation rank or ALL")
    p.add_argument("--noise-l1", type=float, default=0.0)
    p.add_argument("--condsri-stop", action="store_true")
    p.add_argument("--theorem-params", action="store_true",
                   help="use the theory-grade (s, t), clamped to the dimensions")
    p.add_argument("--map-in", help="load a serialized measurement map instead of drawing one")
    p.add_argument("--y-in", help="load measurements (single-row CSV) instead of planting")
    p.add_argument("--map-out", help="serialize the measurement map")
    p.add_argument("--x-out", help="write the recovered matrix as CSV")
    p.add_argument("--trace-out", help="write the per-iteration trace CSV")

    p = sub.add_parser("st-grid", help="success over an (s, t) truncation grid")
    _add_common(p)
    p.add_argument("--m", type=int)
    p.add_argument("--s-values", type=_int_list)
    p.add_argument("--t-values", type=_t_list, help="comma list of ints or ALL")

    p = sub.add_parser("phase", help="success vs measurement count")
    _add_common(p)
    p.add_argument("--m-values", type=_int_list)
    p.add_argument("--algorithms", type=_alg_list, default=("miht_default",))

    p = sub.add_parser("robustness", help="recovery error vs l1 noise level")
    _add_common(p)
    p.add_argument("--m", type=int)
    p.add_argument("--noise-l1-values", type=_float_list)
    p.add_argument("--algorithms", type=_alg_list, default=("miht_default",))

    p = sub.add_parser("timing", help="wall time and iterations vs dimension")
    _add_common(p, with_dims=False)
    p.add_argument("--n-values", type=_int_list)
    p.add_argument("--m-per-rank-dim", type=int, default=8)
    p.add_argument("--algorithms", type=_alg_list, default=("miht_default",))

    p = sub.add_parser("rrip-curve", help="isometry-ratio trend for dense ensembles")
    _add_common(p, with_dims=False)
    p.add_argument("--dist", choices=("gaussian", "laplace"), default="gaussian")
    p.add_argument("--n", type=int, help="square dimension N")
    p.add_argument("--m-values", type=_int_list)
    p.add_argument("--n-samples", type=int, default=500)

    return ap


def _apply_config(argv):
    """Splice key=value pairs from a --config file in front of the explicit
    flags (so the flags win)."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise ValueError("--config needs a file path")
    path = argv[i + 1]
    tokens = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"malformed config line: {line!r}")
            tokens += ["--" + key.strip().replace("_", "-"), value.strip()]
    rest = argv[:i] + argv[i + 2:]
    return rest[:1] + tokens + rest[1:]


def _require(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise ValueError(f"missing required option --{name.replace('_', '-')}")


def _cmd_recover(args):
    if args.map_in:
        mp = load_map(args.map_in)
    else:
        _require(args, "n1", "n2", "m", "seed")
        mp = make_rank_one_map(args.n1, args.n2, args.m, args.seed)
    truth = None
    if args.y_in:
        y = load_matrix_csv(args.y_in).ravel()
        if y.size != mp.m:
            raise ValueError(f"loaded y has {y.size} entries, map expects {mp.m}")
    else:
        _require(args, "seed")
        truth = rripcheck.sample_rank_r(mp.n1, mp.n2, args.rank, [args.seed, 1])
        y = mp.apply(truth)
        if args.noise_l1:
            rng = np.random.default_rng([args.seed, 2])
            y = y + (rng.integers(0, 2, mp.m) * 2.0 - 1.0) * (args.noise_l1 / mp.m)

    if args.algorithm in ("miht_default", "miht_r_2r"):
        if args.theorem_params:
            cfg = theorem_config(args.rank, args.gamma, mp.n1, mp.n2,
                                 max_iter=args.max_iter,
                                 enable_condsri_stop=args.condsri_stop)
        else:
            t = args.t
            if t is None and args.algorithm == "miht_r_2r":
                t = min(2 * args.rank, mp.n1, mp.n2)
            cfg = MihtConfig(target_rank=args.rank, thresh_s=args.s, thresh_t=t,
                             gamma=args.gamma, max_iter=args.max_iter,
                             enable_condsri_stop=args.condsri_stop)
        res = miht(mp, y, cfg, truth=truth)
    elif args.algorithm == "iht":
        res = iht_classic(mp, y, args.rank, mu=1.0 / mp.m, max_iter=args.max_iter, truth=truth)
    else:
        res = niht(mp, y, args.rank, max_iter=args.max_iter, truth=truth)

    print(f"stop_reason: {res.stop_reason}")
    print(f"iterations: {res.iterations_used}")
    print(f"l1_residual: {res.trace[-1].l1_residual:.6e}")
    if truth is not None:
        err = float(np.linalg.norm(truth - res.final_iterate, "fro"))
        rel = err / float(np.linalg.norm(truth, "fro"))
        print(f"frob_error: {err:.6e}")
        print(f"success: {rel <= args.success_threshold}")
    if args.map_out:
        save_map(mp, args.map_out)
    if args.x_out:
        save_matrix_csv(res.final_iterate, args.x_out)
    if args.trace_out:
        write_trace_csv(res, args.trace_out)
    return 0


def _spec_from(args, experiment, **fields):
    _require(args, "seed")
    return bench.ExperimentSpec(experiment=experiment, seed=args.seed, rank=args.rank,
                                trials=args.trials, gamma=args.gamma, max_iter=args.max_iter,
                                success_threshold=args.success_threshold,
                                workers=args.workers, output_path=args.out, **fields)


def _cmd_st_grid(args):
    _require(args, "n1", "n2", "m", "s_values", "t_values")
    spec = _spec_from(args, "st_grid", n1=args.n1, n2=args.n2, m=args.m,
                      s_values=args.s_values, t_values=args.t_values)
    bench.run_and_write(spec)
    return 0


def _cmd_phase(args):
    _require(args, "n1", "n2", "m_values")
    spec = _spec_from(args, "phase", n1=args.n1, n2=args.n2,
                      m_values=args.m_values, algorithms=args.algorithms)
    bench.run_and_write(spec)
    return 0


def _cmd_robustness(args):
    _require(args, "n1", "n2", "m", "noise_l1_values")
    spec = _spec_from(args, "robustness", n1=args.n1, n2=args.n2, m=args.m,
                      noise_l1_values=args.noise_l1_values, algorithms=args.algorithms)
    bench.run_and_write(spec)
    return 0


def _cmd_timing(args):
    _require(args, "n_values")
    spec = _spec_from(args, "timing", n_values=args.n_values, algorithms=args.algorithms,
                      m_per_rank_dim=args.m_per_rank_dim)
    bench.run_and_write(spec)
    return 0


def _cmd_rrip_curve(args):
    _require(args, "n", "m_values", "seed")
    rows = rripcheck.concentration_curve(args.dist, args.n, args.rank, args.m_values,
                                         args.trials, args.seed, n_samples=args.n_samples)
    if args.out:
        meta = {"experiment": "rrip", "dist": args.dist, "n": args.n, "rank": args.rank,
                "seed": args.seed, "trials": args.trials, "n_samples": args.n_samples,
                "m_values": ",".join(str(m) for m in args.m_values)}
        _csvio.write_rows(args.out, meta, bench.RRIP_FIELDS, rows)
    return 0


COMMANDS = {"recover": _cmd_recover, "st-grid": _cmd_st_grid, "phase": _cmd_phase,
            "robustness": _cmd_robustness, "timing": _cmd_timing, "rrip-curve": _cmd_rrip_curve}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _apply_config(argv)
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
