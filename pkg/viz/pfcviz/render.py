"""Field heatmaps, level curves, and cost bar charts.

Outputs are deliberately deterministic: fixed dpi, fixed figure geometry,
PNG only (no embedded timestamps), so rerunning on the same inputs produces
byte-identical files.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

MAGIC = b"PFSNAP01"
_HEADER = struct.Struct("<8sdqdd")

COST_COLUMNS = ("Prob", "Scheme", "Step tol.", "Point value", "Obj. err.",
                "FFT", "Clock (sec)", "CPU (sec)")
_COST_PANELS = (("FFT", "FFT count"),
                ("Clock (sec)", "Wall-clock time (sec)"),
                ("CPU (sec)", "CPU time (sec)"))

_SAVE_OPTS = {"dpi": 110, "format": "png"}


class SnapshotFormatError(ValueError):
    """Raised for files that are not valid field snapshots."""


@dataclass
class SnapshotHandle:
    """Lazy view of one snapshot file; the header is validated eagerly."""

    path: Path
    L: float = field(init=False)
    N: int = field(init=False)
    origin: float = field(init=False)
    t: float = field(init=False)
    _values: np.ndarray | None = field(init=False, default=None, repr=False)

    def __post_init__(self) -> None:
        self.path = Path(self.path)
        try:
            with open(self.path, "rb") as fh:
                raw = fh.read(_HEADER.size)
        except OSError as exc:
            raise SnapshotFormatError(f"{self.path}: {exc}") from exc
        if len(raw) < _HEADER.size:
            raise SnapshotFormatError(f"{self.path}: truncated header")
        magic, self.L, n, self.origin, self.t = _HEADER.unpack(raw)
        if magic != MAGIC:
            raise SnapshotFormatError(f"{self.path}: bad magic {magic!r}")
        self.N = int(n)

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            with open(self.path, "rb") as fh:
                fh.seek(_HEADER.size)
                data = np.frombuffer(fh.read(), dtype="<f8")
            if data.size != self.N * self.N:
                raise SnapshotFormatError(
                    f"{self.path}: expected {self.N * self.N} values, got {data.size}")
            self._values = data.reshape(self.N, self.N)
        return self._values

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        x = self.origin + (self.L / self.N) * np.arange(self.N)
        return x, x.copy()


def _finish(fig, out_path) -> Path:
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, **_SAVE_OPTS)
    plt.close(fig)
    return out_path


def render_field(snapshot: SnapshotHandle | str | Path, out_path,
                 style: str = "heatmap", level: float = 0.0) -> Path:
    """Render one snapshot as a heatmap or a single level-curve plot."""
    snap = snapshot if isinstance(snapshot, SnapshotHandle) else SnapshotHandle(snapshot)
    x, y = snap.axes()
    fig, ax = plt.subplots(figsize=(5.0, 4.2))
    if style == "heatmap":
        # values[i, j] = v(x_i, y_j): transpose so x runs horizontally
        im = ax.pcolormesh(x, y, snap.values.T, shading="nearest", cmap="viridis")
        fig.colorbar(im, ax=ax)
    elif style == "contour":
        ax.contour(x, y, snap.values.T, levels=[level], colors="black",
                   linewidths=1.0)
        ax.text(0.02, 0.98, f"level {level:g}", transform=ax.transAxes,
                ha="left", va="top", fontsize=9)
    else:
        raise ValueError(f"style must be 'heatmap' or 'contour', got {style!r}")
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(f"t = {snap.t:g}")
    return _finish(fig, out_path)


def render_contour_overlay(snapshots, out_path, level: float = 0.0,
                           labels=None) -> Path:
    """Overlay one level curve from several snapshots (run comparisons)."""
    handles = [s if isinstance(s, SnapshotHandle) else SnapshotHandle(s)
               for s in snapshots]
    if not handles:
        raise ValueError("need at least one snapshot to overlay")
    colors = ("black", "tab:red", "tab:blue", "tab:green")
    styles = ("solid", "dashed", "dashdot", "dotted")
    fig, ax = plt.subplots(figsize=(5.0, 4.6))
    for i, snap in enumerate(handles):
        x, y = snap.axes()
        ax.contour(x, y, snap.values.T, levels=[level],
                   colors=colors[i % len(colors)],
                   linestyles=styles[i % len(styles)], linewidths=1.2)
    if labels:
        for i, text in enumerate(labels):
            ax.plot([], [], color=colors[i % len(colors)],
                    linestyle=styles[i % len(styles)], label=text)
        ax.legend(loc="upper right", fontsize=8)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(f"level {level:g} at t = {handles[0].t:g}")
    return _finish(fig, out_path)


def read_cost_table(csv_path) -> list[dict]:
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in COST_COLUMNS if c not in (reader.fieldnames or ())]
        if missing:
            raise ValueError(f"{csv_path}: missing columns {missing}")
        return list(reader)


def render_costs(csv_path, out_dir) -> list[Path]:
    """Three grouped bar charts (transforms, wall time, CPU time).

    Groups follow the CSV row order: one bar per (problem, scheme) pair.
    """
    rows = read_cost_table(csv_path)
    if not rows:
        raise ValueError(f"{csv_path}: no data rows")
    labels = [f"{r['Prob']}/{r['Scheme']}" for r in rows]
    out_dir = Path(out_dir)
    out_paths = []
    for column, title in _COST_PANELS:
        values = [float(r[column]) for r in rows]
        fig, ax = plt.subplots(figsize=(max(4.0, 0.9 * len(rows) + 1.5), 3.6))
        ax.bar(range(len(rows)), values, color="tab:blue")
        ax.set_xticks(range(len(rows)))
        ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
        ax.set_ylabel(title)
        fig.tight_layout()
        stem = column.split(" ")[0].strip(".").lower().replace("(", "")
        out_paths.append(_finish(fig, out_dir / f"cost_{stem}.png"))
    return out_paths
