"""Render experiment CSV artifacts as figures.

Input files are the self-describing CSVs the ``miht`` harness writes: a
``# key=value`` comment line, a header row, then data. Four figure kinds
are supported, one per experiment. The plotted series equal the CSV
series exactly (no smoothing); the only derived ink is the least-squares
overlay on the robustness figure.

Output is PNG or SVG by file extension, produced deterministically for a
fixed input and toolchain (fixed svg id salt, no embedded dates).
"""

import math
import os
from dataclasses import dataclass

import matplotlib
import numpy as np

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "mihtplot"

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

FIGURE_KINDS = ("st_heatmap", "phase_curves", "timing_loglog", "robustness_line")

_EXPECTED = {
    "st_heatmap": ("st_grid", ("s", "t", "success_count", "trials")),
    "phase_curves": ("phase", ("algorithm", "m", "success_count", "trials")),
    "timing_loglog": ("timing", ("algorithm", "N", "median_wall_time_seconds",
                                 "median_iterations")),
    "robustness_line": ("robustness", ("algorithm", "l1_noise", "frob_error_median",
                                       "frob_error_max")),
}


class FigureInputError(ValueError):
    """The CSV does not match what the requested figure kind needs."""


@dataclass
class FigureJob:
    csv_path: str
    figure_kind: str
    output_image_path: str
    force: bool = False


def load_table(csv_path, figure_kind):
    """Parse and validate a harness CSV for the given figure kind.

    Returns (meta, rows) with rows as dicts keyed by column name; numeric
    fields are converted to float.
    """
    if figure_kind not in _EXPECTED:
        raise FigureInputError(f"unknown figure kind {figure_kind!r}, expected one of {FIGURE_KINDS}")
    experiment, columns = _EXPECTED[figure_kind]
    with open(csv_path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or not lines[0].startswith("#"):
        raise FigureInputError(f"{csv_path}: missing the leading '#' experiment comment line")
    meta = {}
    for tok in lines[0].lstrip("#").split():
        key, _, value = tok.partition("=")
        meta[key] = value
    if meta.get("experiment") != experiment:
        raise FigureInputError(
            f"{csv_path}: header says experiment={meta.get('experiment')!r}, "
            f"but {figure_kind} needs {experiment!r}")
    if len(lines) < 2:
        raise FigureInputError(f"{csv_path}: missing the column header row")
    header = lines[1].split(",")
    for col in columns:
        if col not in header:
            raise FigureInputError(f"{csv_path}: missing column {col!r}")
    data_lines = [ln for ln in lines[2:] if ln.strip()]
    if not data_lines:
        raise FigureInputError(f"{csv_path}: no data rows")
    rows = []
    for ln in data_lines:
        parts = ln.split(",")
        if len(parts) != len(header):
            raise FigureInputError(f"{csv_path}: row has {len(parts)} fields, header has {len(header)}")
        row = dict(zip(header, parts))
        for col in columns:
            if col != "algorithm":
                row[col] = float(row[col])
        rows.append(row)
    return meta, rows


def plotted_series(rows, figure_kind):
    """The exact series a figure draws, keyed by curve label.

    phase_curves / timing_loglog / robustness_line give one (x, y[, y2])
    tuple per algorithm; st_heatmap gives (s_values, t_values, rate_matrix).
    """
    if figure_kind == "st_heatmap":
        s_vals = sorted({row["s"] for row in rows})
        t_vals = sorted({row["t"] for row in rows})
        grid = np.full((len(s_vals), len(t_vals)), np.nan)
        for row in rows:
            grid[s_vals.index(row["s"]), t_vals.index(row["t"])] = \
                row["success_count"] / row["trials"]
        return {"heatmap": (s_vals, t_vals, grid)}
    series = {}
    if figure_kind == "phase_curves":
        for alg in _algorithms(rows):
            pts = sorted((r["m"], r["success_count"] / r["trials"])
                         for r in rows if r["algorithm"] == alg)
            series[alg] = ([p[0] for p in pts], [p[1] for p in pts])
    elif figure_kind == "timing_loglog":
        for alg in _algorithms(rows):
            pts = sorted((r["N"], r["median_wall_time_seconds"], r["median_iterations"])
                         for r in rows if r["algorithm"] == alg)
            series[alg] = ([p[0] for p in pts], [p[1] for p in pts], [p[2] for p in pts])
    elif figure_kind == "robustness_line":
        for alg in _algorithms(rows):
            pts = sorted((r["l1_noise"], r["frob_error_median"])
                         for r in rows if r["algorithm"] == alg)
            series[alg] = ([p[0] for p in pts], [p[1] for p in pts])
    return series


def _algorithms(rows):
    seen = []
    for row in rows:
        if row["algorithm"] not in seen:
            seen.append(row["algorithm"])
    return seen


def render(job: FigureJob) -> str:
    """Draw the figure and write it to the job's output path.

    Refuses to overwrite an existing file unless job.force is set, and
    only writes .png or .svg. Returns the output path.
    """
    meta, rows = load_table(job.csv_path, job.figure_kind)
    ext = os.path.splitext(job.output_image_path)[1].lower()
    if ext not in (".png", ".svg"):
        raise FigureInputError(f"unsupported image extension {ext!r}; use .png or .svg")
    if os.path.exists(job.output_image_path) and not job.force:
        raise FileExistsError(f"{job.output_image_path} exists; pass force to overwrite")

    series = plotted_series(rows, job.figure_kind)
    if job.figure_kind == "timing_loglog":
        fig, axes = plt.subplots(1, 2, figsize=(9.0, 3.8))
    else:
        fig, ax = plt.subplots(figsize=(5.4, 4.0))

    if job.figure_kind == "st_heatmap":
        s_vals, t_vals, grid = series["heatmap"]
        im = ax.imshow(grid, origin="lower", aspect="auto", vmin=0.0, vmax=1.0,
                       cmap="viridis")
        ax.set_xticks(range(len(t_vals)), [_fmt(v) for v in t_vals])
        ax.set_yticks(range(len(s_vals)), [_fmt(v) for v in s_vals])
        ax.set_xlabel("inner rank t")
        ax.set_ylabel("outer rank s")
        fig.colorbar(im, ax=ax, label="success rate")
        ax.set_title(f"recovery success over (s, t), m={meta.get('m', '?')}")
    elif job.figure_kind == "phase_curves":
        for alg, (xs, ys) in series.items():
            ax.plot(xs, ys, marker="o", label=alg)
        ax.set_xlabel("measurements m")
        ax.set_ylabel("success rate")
        ax.set_ylim(-0.03, 1.03)
        ax.legend()
        ax.set_title("recovery success vs measurement count")
    elif job.figure_kind == "timing_loglog":
        for alg, (xs, times, iters) in series.items():
            axes[0].loglog(xs, times, marker="o", label=alg)
            axes[1].loglog(xs, iters, marker="s", label=alg)
        axes[0].set_xlabel("dimension N")
        axes[0].set_ylabel("median wall time [s]")
        axes[1].set_xlabel("dimension N")
        axes[1].set_ylabel("median iterations")
        axes[0].legend()
        axes[1].legend()
        fig.suptitle("cost vs dimension (successful runs only)")
    else:
        for alg, (xs, ys) in series.items():
            line, = ax.plot(xs, ys, marker="o", linestyle="-", label=alg)
            if len(xs) >= 2:
                slope, intercept = np.polyfit(xs, ys, 1)
                ax.plot(xs, [slope * x + intercept for x in xs], linestyle="--",
                        color=line.get_color(), alpha=0.6,
                        label=f"{alg} fit (slope {slope:.3g})")
        ax.set_xlabel("measurement error l1 norm")
        ax.set_ylabel("median recovery error (Frobenius)")
        ax.legend()
        ax.set_title("recovery error vs measurement noise")

    fig.tight_layout()
    metadata = {"Date": None} if ext == ".svg" else {}
    fig.savefig(job.output_image_path, dpi=120, metadata=metadata)
    plt.close(fig)
    return job.output_image_path


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() and math.isfinite(v) else f"{v:g}"
