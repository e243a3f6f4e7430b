#!/usr/bin/env python3
"""Render figures from lzs-search-sim CSV output.

Pure consumer of the simulator's CSV contract: reads named columns,
draws them, and writes PNG and SVG files.  No numerical work happens
here beyond reshaping grid columns back into their sweep layout.

Three figure kinds are supported:

- ``line``       one observable column against one axis column
- ``dual-line``  two observable columns against one axis column; the
                 first is drawn solid, the second dashed
- ``heatmap``    a row-major sweep grid drawn cell-for-cell with no
                 resampling (one quad per CSV row)

Invoke as a script with ``--in``/``--out``::

    python3 figures/render.py --kind heatmap --in noise.csv \
        --x t --y omega1 --value p_plus --out noise_map

``--out`` without a suffix writes both ``.png`` and ``.svg``; with an
explicit ``.png``/``.svg`` suffix only that format is written.  SVG
output omits the creation date and uses a fixed hash salt so re-running
the same render is byte-identical.  Input CSVs are never modified.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "lzs-search-figures"

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

KINDS = ("line", "dual-line", "heatmap")
PNG_DPI = 150


class FigureError(Exception):
    """Raised for malformed input CSVs or inconsistent figure requests."""


@dataclass(frozen=True)
class FigureSpec:
    """Everything needed to turn one CSV into one figure."""

    kind: str
    src: Path
    out: Path
    x: str
    y: Tuple[str, ...] = ()
    value: Optional[str] = None
    title: Optional[str] = None
    xlabel: Optional[str] = None
    ylabel: Optional[str] = None


def read_table(path: Path) -> Dict[str, np.ndarray]:
    """Read a simulator CSV into named float columns.

    Comment lines starting with ``#`` (version, params, config echoes)
    are skipped.  The first non-comment row is the header.
    """
    header: Optional[Sequence[str]] = None
    rows = []
    try:
        handle = open(path, newline="")
    except OSError as exc:
        raise FigureError(f"cannot read {path}: {exc}") from exc
    with handle:
        for row in csv.reader(handle):
            if not row or row[0].startswith("#"):
                continue
            if header is None:
                header = [name.strip() for name in row]
                continue
            if len(row) != len(header):
                raise FigureError(
                    f"{path}: row with {len(row)} fields, header has {len(header)}"
                )
            try:
                rows.append([float(cell) for cell in row])
            except ValueError as exc:
                raise FigureError(f"{path}: non-numeric cell ({exc})") from exc
    if header is None:
        raise FigureError(f"{path}: empty CSV, no header row")
    if not rows:
        raise FigureError(f"{path}: no data rows")
    data = np.asarray(rows, dtype=float)
    return {name: data[:, j] for j, name in enumerate(header)}


def column(table: Dict[str, np.ndarray], name: str, src: Path) -> np.ndarray:
    if name not in table:
        raise FigureError(
            f"{src}: no column {name!r}; available: {sorted(table)}"
        )
    return table[name]


def grid_from(
    table: Dict[str, np.ndarray], x: str, y: str, value: str, src: Path
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Recover the (x values, y values, Z) layout of a row-major sweep.

    The CSV stores one row per grid cell with the y column varying
    slowest.  The layout is verified exactly; anything else is rejected
    rather than resampled.
    """
    col_x = column(table, x, src)
    col_y = column(table, y, src)
    col_v = column(table, value, src)
    changes = np.nonzero(col_y != col_y[0])[0]
    n_x = int(changes[0]) if len(changes) else len(col_y)
    if len(col_y) % n_x:
        raise FigureError(
            f"{src}: columns {y!r}/{x!r} do not form a row-major grid"
        )
    y_vals = col_y[::n_x]
    x_vals = col_x[:n_x]
    ok = np.array_equal(np.tile(x_vals, len(y_vals)), col_x) and np.array_equal(
        np.repeat(y_vals, n_x), col_y
    )
    if not ok:
        raise FigureError(
            f"{src}: columns {y!r}/{x!r} do not form a row-major grid"
        )
    return x_vals, y_vals, col_v.reshape(len(y_vals), n_x)


def build_figure(spec: FigureSpec) -> "plt.Figure":
    """Create (but do not save) the matplotlib figure for a spec."""
    if spec.kind not in KINDS:
        raise FigureError(f"unknown figure kind {spec.kind!r}; expected {KINDS}")
    table = read_table(spec.src)
    fig, ax = plt.subplots(figsize=(6.0, 4.0), constrained_layout=True)

    if spec.kind == "heatmap":
        if not spec.value:
            raise FigureError("heatmap needs a --value column")
        if len(spec.y) != 1:
            raise FigureError("heatmap needs exactly one --y column")
        x_vals, y_vals, z = grid_from(table, spec.x, spec.y[0], spec.value, spec.src)
        mesh = ax.pcolormesh(x_vals, y_vals, z, shading="nearest")
        fig.colorbar(mesh, ax=ax, label=spec.value)
    else:
        wanted = {"line": 1, "dual-line": 2}[spec.kind]
        if len(spec.y) != wanted:
            raise FigureError(
                f"{spec.kind} needs exactly {wanted} --y column(s), got {len(spec.y)}"
            )
        x_vals = column(table, spec.x, spec.src)
        styles = ("-", "--")
        for name, style in zip(spec.y, styles):
            ax.plot(x_vals, column(table, name, spec.src), style, label=name)
        if spec.kind == "dual-line":
            ax.legend()

    ax.set_xlabel(spec.xlabel or spec.x)
    ax.set_ylabel(spec.ylabel or (spec.y[0] if spec.y else spec.value or ""))
    if spec.title:
        ax.set_title(spec.title)
    return fig


def render(spec: FigureSpec) -> Tuple[Path, ...]:
    """Render a spec and write its image file(s); returns written paths."""
    if spec.out.suffix in (".png", ".svg"):
        targets = (spec.out,)
    elif spec.out.suffix == "":
        targets = (spec.out.with_suffix(".png"), spec.out.with_suffix(".svg"))
    else:
        raise FigureError(
            f"unsupported output format {spec.out.suffix!r}; use .png or .svg"
        )
    fig = build_figure(spec)
    try:
        for target in targets:
            target.parent.mkdir(parents=True, exist_ok=True)
            if target.suffix == ".svg":
                fig.savefig(target, format="svg", metadata={"Date": None})
            else:
                fig.savefig(target, format="png", dpi=PNG_DPI)
    finally:
        plt.close(fig)
    return targets


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--in", dest="src", required=True, metavar="CSV")
    parser.add_argument("--out", required=True, metavar="PATH")
    parser.add_argument("--x", required=True, help="axis column name")
    parser.add_argument(
        "--y", default="", help="comma-separated observable column name(s)"
    )
    parser.add_argument("--value", default=None, help="heatmap observable column")
    parser.add_argument("--title", default=None)
    parser.add_argument("--xlabel", default=None)
    parser.add_argument("--ylabel", default=None)
    args = parser.parse_args(argv)

    spec = FigureSpec(
        kind=args.kind,
        src=Path(args.src),
        out=Path(args.out),
        x=args.x,
        y=tuple(name for name in args.y.split(",") if name),
        value=args.value,
        title=args.title,
        xlabel=args.xlabel,
        ylabel=args.ylabel,
    )
    try:
        for path in render(spec):
            print(f"wrote {path}")
    except FigureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
