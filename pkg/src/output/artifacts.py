"""Flat-file artifacts: CSV traces, parameter snapshots and SVG figures"""

import csv
import logging
import os
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.cm import ScalarMappable  # noqa: E402
from matplotlib.collections import PolyCollection  # noqa: E402
from matplotlib.colors import Normalize  # noqa: E402

from src.errors import ConfigError, NumericalFailure  # noqa: E402
from src.network.network import Activation, NetworkParams, params_from_rows  # noqa: E402
from src.state.run_state import format_value  # noqa: E402

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
Cell = Union[int, float, str, np.integer, np.floating]

COLORMAP = "viridis"
# SVG group id of the heatmap cells
HEATMAP_GID = "heatmap-cells"
# Fixed salt and no date keep SVG bytes identical across runs
SVG_RC = {"svg.hashsalt": "hermite-nn", "svg.fonttype": "path"}
SVG_METADATA = {"Date": None}


def _cell(value: Cell) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format_value(value)


def _replace_atomically(path: Path, write) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    try:
        write(tmp)
        os.replace(tmp, path)
    finally:
        if tmp.exists():
            tmp.unlink()


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Cell]]) -> Path:
    """Write a CSV with 17-significant-digit floats via temp file + rename"""
    path = Path(path)

    def write(tmp: Path) -> None:
        with open(tmp, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_cell(v) for v in row])

    _replace_atomically(path, write)
    logger.debug("wrote %s", path)
    return path


def read_csv(path: PathLike) -> Tuple[List[str], List[List[str]]]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        rows = list(reader)
    if not rows:
        raise ConfigError(f"{path} is empty")
    return rows[0], rows[1:]


def write_text(path: PathLike, text: str) -> Path:
    path = Path(path)

    def write(tmp: Path) -> None:
        with open(tmp, "w", encoding="utf-8", newline="") as f:
            f.write(text)

    _replace_atomically(path, write)
    return path


def write_history(path: PathLike, history: Sequence[float]) -> Path:
    return write_csv(path, ["iteration", "loss"], enumerate(history))


def write_side_by_side(path: PathLike, histories: Dict[str, Sequence[float]]) -> Path:
    """One iteration column plus one loss column per method; shorter runs leave blanks"""
    names = sorted(histories)
    length = max((len(histories[n]) for n in names), default=0)
    rows = []
    for i in range(length):
        row: List[Cell] = [i]
        for name in names:
            h = histories[name]
            row.append(h[i] if i < len(h) else "")
        rows.append(row)
    return write_csv(path, ["iteration", *names], rows)


def write_wavefunction(
    path: PathLike, X: np.ndarray, Y: np.ndarray, actual: np.ndarray, predicted: np.ndarray
) -> Path:
    """Rows (x, y, actual, predicted) in row-major grid order"""
    stacked = np.column_stack([a.ravel() for a in (X, Y, actual, predicted)])
    if not np.all(np.isfinite(stacked)):
        raise NumericalFailure(f"non-finite wave-function values for {path}")
    return write_csv(path, ["x", "y", "actual", "predicted"], stacked)


def write_indexed(path: PathLike, values: Iterable[float]) -> Path:
    return write_csv(path, ["index", "value"], enumerate(values))


def write_params(path: PathLike, params: NetworkParams) -> Path:
    """Snapshot as (layer, row, col, value); biases use col = -1"""
    return write_csv(path, ["layer", "row", "col", "value"], params.rows())


def load_params_csv(path: PathLike, activation: Activation, seed: int = 0) -> NetworkParams:
    header, rows = read_csv(path)
    if header != ["layer", "row", "col", "value"]:
        raise ConfigError(f"{path}: unexpected parameter header {header}")
    try:
        parsed = [(int(l), int(r), int(c), float(v)) for l, r, c, v in rows]
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return params_from_rows(parsed, activation, seed)


def heatmap_colors(values: np.ndarray, cmap: str = COLORMAP) -> np.ndarray:
    """RGBA per cell on a linear scale from min to max"""
    values = np.asarray(values, dtype=float)
    norm = Normalize(vmin=float(values.min()), vmax=float(values.max()))
    return matplotlib.colormaps[cmap](norm(values))


def _edges(centers: Optional[np.ndarray], count: int) -> np.ndarray:
    if centers is None or len(centers) < 2:
        return np.arange(count + 1, dtype=float)
    centers = np.asarray(centers, dtype=float)
    mids = 0.5 * (centers[1:] + centers[:-1])
    return np.concatenate([[2 * centers[0] - mids[0]], mids, [2 * centers[-1] - mids[-1]]])


def emit_heatmap(
    values: np.ndarray,
    path: PathLike,
    x: Optional[np.ndarray] = None,
    y: Optional[np.ndarray] = None,
    title: str = "",
    label: str = "ψ",
) -> Path:
    """
    Render an R×R grid as an SVG heatmap.

    values[i, j] belongs to (x[i], y[j]); x runs along the horizontal axis.

    Raises:
        NumericalFailure: any cell is NaN or infinite
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        raise ConfigError(f"heatmap needs a 2D grid, got shape {values.shape}")
    if not np.all(np.isfinite(values)):
        raise NumericalFailure(f"non-finite values in heatmap for {path}")

    lo, hi = float(values.min()), float(values.max())
    x_edges = _edges(x, values.shape[0])
    y_edges = _edges(y, values.shape[1])
    # cell (i, j) spans [x_edges[i], x_edges[i+1]] × [y_edges[j], y_edges[j+1]], row-major in (i, j)
    cells = [
        [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
        for x0, x1 in zip(x_edges[:-1], x_edges[1:])
        for y0, y1 in zip(y_edges[:-1], y_edges[1:])
    ]
    colors = heatmap_colors(values).reshape(-1, 4)
    path = Path(path)

    def write(tmp: Path) -> None:
        with plt.rc_context(SVG_RC):
            fig, ax = plt.subplots(figsize=(5.0, 4.2))
            try:
                mesh = PolyCollection(cells, facecolors=colors, edgecolors="none")
                mesh.set_gid(HEATMAP_GID)
                ax.add_collection(mesh)
                ax.set_xlim(x_edges[0], x_edges[-1])
                ax.set_ylim(y_edges[0], y_edges[-1])
                scale = ScalarMappable(norm=Normalize(vmin=lo, vmax=hi), cmap=COLORMAP)
                colorbar = fig.colorbar(scale, ax=ax)
                colorbar.set_label(f"{label}  (min {lo:.4g}, max {hi:.4g})")
                ax.set_xlabel("x")
                ax.set_ylabel("y")
                if title:
                    ax.set_title(title)
                fig.savefig(tmp, format="svg", metadata=SVG_METADATA)
            finally:
                plt.close(fig)

    _replace_atomically(path, write)
    logger.debug("wrote heatmap %s", path)
    return path


def emit_loss_curve(histories: Dict[str, Sequence[float]], path: PathLike) -> Path:
    """Loss against iteration for one or more runs, log scale when every loss is positive"""
    path = Path(path)

    def write(tmp: Path) -> None:
        with plt.rc_context(SVG_RC):
            fig, ax = plt.subplots(figsize=(5.5, 4.0))
            try:
                positive = True
                for name in sorted(histories):
                    history = np.asarray(histories[name], dtype=float)
                    ax.plot(np.arange(len(history)), history, label=name)
                    positive = positive and bool(np.all(history > 0))
                if positive and any(len(h) for h in histories.values()):
                    ax.set_yscale("log")
                ax.set_xlabel("iteration")
                ax.set_ylabel("MSE")
                if histories:
                    ax.legend()
                fig.savefig(tmp, format="svg", metadata=SVG_METADATA)
            finally:
                plt.close(fig)

    _replace_atomically(path, write)
    return path
