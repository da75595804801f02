"""Static SVG plots of harness CSV output.

``cdf-overlay`` draws the empirical CDF of the undershoot ratios against the
Beta(alpha, 1 - alpha) CDF; it reads a samples CSV, or a verify-dl CSV whose
samples were saved alongside it.  ``ratio-vs-s`` draws the ratio column of a
verify-lde CSV on a log level axis with a reference line at 1.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from ..errors import FormatError
from ..limits import beta_cdf
from ..sampler import SAMPLE_CSV_HEADER
from .runner import VERIFIER_HEADER, samples_path

PLOT_KINDS = ("cdf-overlay", "ratio-vs-s")


def _read(path):
    path = Path(path)
    if not path.is_file():
        raise FormatError(f"no such CSV: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise FormatError(f"{path}: empty file")
    header, data = tuple(rows[0]), rows[1:]
    if not data:
        raise FormatError(f"{path}: no data rows")
    return header, data


def _figure():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    return plt, fig, ax


def _save(plt, fig, out):
    # fixed hash salt and no metadata date keep the SVG byte-stable
    import matplotlib

    matplotlib.rcParams["svg.hashsalt"] = "subordinator-lab"
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)
    return Path(out)


def _ratios_from_samples(path):
    header, data = _read(path)
    if header != SAMPLE_CSV_HEADER:
        raise FormatError(f"{path}: expected samples header {','.join(SAMPLE_CSV_HEADER)}")
    lvl = header.index("level")
    und = header.index("undershoot")
    try:
        return np.array([float(r[und]) / float(r[lvl]) for r in data])
    except (ValueError, IndexError, ZeroDivisionError) as exc:
        raise FormatError(f"{path}: malformed sample row ({exc})") from exc


def cdf_overlay(csv_path, out, alpha=None):
    header, data = _read(csv_path)
    if header == VERIFIER_HEADER:
        if alpha is None:
            alpha = float(data[-1][header.index("alpha")])
        ratios = _ratios_from_samples(samples_path(csv_path))
    elif header == SAMPLE_CSV_HEADER:
        if alpha is None:
            raise FormatError("a samples CSV carries no index; pass alpha")
        ratios = _ratios_from_samples(csv_path)
    else:
        raise FormatError(f"{csv_path}: not a samples or verifier CSV")
    x = np.sort(ratios)
    y = np.arange(1, x.size + 1) / x.size
    grid = np.linspace(0.0, 1.0, 401)
    plt, fig, ax = _figure()
    (emp,) = ax.step(x, y, where="post", lw=1.2, label="empirical")
    emp.set_gid("ecdf")
    (ref,) = ax.plot(grid, [beta_cdf(alpha, g) for g in grid], "k--", lw=1.0,
                     label=f"Beta({alpha:g}, {1 - alpha:g})")
    ref.set_gid("beta-cdf")
    ax.set_xlabel("undershoot / level")
    ax.set_ylabel("CDF")
    ax.set_xlim(0.0, 1.0)
    ax.legend(loc="lower right")
    return _save(plt, fig, out)


def ratio_vs_s(csv_path, out):
    header, data = _read(csv_path)
    if header != VERIFIER_HEADER:
        raise FormatError(f"{csv_path}: ratio-vs-s needs a verifier CSV")
    si, ri = header.index("s"), header.index("ratio")
    pts = sorted((float(r[si]), float(r[ri])) for r in data
                 if r[ri] != "" and not r[0].endswith("two-eps"))
    if not pts:
        raise FormatError(f"{csv_path}: no ratio rows")
    s, ratio = np.array(pts).T
    plt, fig, ax = _figure()
    (line,) = ax.plot(s, ratio, "o-", label="estimate / target")
    line.set_gid("ratio")
    ref = ax.axhline(1.0, color="k", ls="--", lw=1.0)
    ref.set_gid("reference")
    ax.set_xscale("log")
    ax.set_xlabel("level s")
    ax.set_ylabel("ratio")
    ax.legend()
    return _save(plt, fig, out)


def emit_plot(csv_path, kind, out=None, alpha=None):
    if kind not in PLOT_KINDS:
        raise FormatError(f"unknown plot kind {kind!r} (valid: {', '.join(PLOT_KINDS)})")
    out = Path(out) if out is not None else Path(csv_path).with_suffix(".svg")
    if kind == "cdf-overlay":
        return cdf_overlay(csv_path, out, alpha)
    return ratio_vs_s(csv_path, out)
