"""Render sweep CSVs as SVG line charts."""
from __future__ import annotations

import csv
import math
from pathlib import Path

YLABELS = {
    "fidelity": "fidelity",
    "entanglement": "entropy (nats)",
    "epr_variance": "variance",
}


def read_sweep_csv(path):
    """Parse a sweep CSV into (axis name, xs, {curve: ys}); NaN marks empty cells.

    Raises ValueError with the offending line number on malformed input.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ValueError(f"{path}: cannot read CSV ({exc})") from None
    rows = list(csv.reader(text.splitlines()))
    if not rows or not rows[0]:
        raise ValueError(f"{path}:1: missing header row")
    header = rows[0]
    if len(header) < 2:
        raise ValueError(f"{path}:1: header needs an axis column and at least one curve")
    if len(set(header)) != len(header):
        raise ValueError(f"{path}:1: duplicate column names")
    if len(rows) < 2:
        raise ValueError(f"{path}: no data rows")
    xs, cols = [], {h: [] for h in header[1:]}
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            x = float(row[0])
        except ValueError:
            raise ValueError(f"{path}:{lineno}: axis value {row[0]!r} is not a number") from None
        if not math.isfinite(x):
            raise ValueError(f"{path}:{lineno}: axis value must be finite")
        xs.append(x)
        for name, cell in zip(header[1:], row[1:]):
            if cell == "":
                cols[name].append(math.nan)
                continue
            try:
                cols[name].append(float(cell))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: column {name!r} value {cell!r} is not a number") from None
    return header[0], xs, cols


def emit_plot(csv_path, out_path=None, title: str | None = None, ylabel: str | None = None) -> Path:
    """Write one SVG line chart with a series per curve column."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    axis, xs, cols = read_sweep_csv(csv_path)
    csv_path = Path(csv_path)
    out_path = Path(out_path) if out_path else csv_path.with_suffix(".svg")
    if ylabel is None:
        ylabel = next((v for k, v in YLABELS.items() if k in csv_path.stem), "value")
    plt.rcParams["svg.hashsalt"] = "cvteleport"
    fig, ax = plt.subplots(figsize=(6, 4))
    for name, ys in cols.items():
        ax.plot(xs, ys, label=name)
    ax.set_xlabel("|alpha|" if axis == "alpha" else axis)
    ax.set_ylabel(ylabel)
    if "fidelity" in csv_path.stem:
        ax.axhline(0.5, color="grey", lw=0.8, ls="--")
        ax.axhline(2 / 3, color="grey", lw=0.8, ls=":")
    ax.set_title(title or csv_path.stem)
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    fig.savefig(out_path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out_path
