"""Text checkpoints for map samples and YAML experiment configs."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigError
from .grid import CylinderGrid, MapSample

MAGIC = "pcrlab-map v1"


def save_map_sample(u: MapSample, path) -> Path:
    """Write ``u`` as a header plus one ``j l chart re im`` line per node."""
    path = Path(path)
    g = u.grid
    j, l = np.meshgrid(np.arange(g.n_s), np.arange(g.n_t), indexing="ij")
    table = np.column_stack([j.ravel(), l.ravel(), u.chart.ravel().astype(int), u.coord.real.ravel(), u.coord.imag.ravel()])
    degree = "none" if u.degree is None else str(int(u.degree))
    header = "\n".join([MAGIC, f"grid {g.s_min!r} {g.s_max!r} {g.n_s} {g.n_t}", f"degree {degree}"])
    np.savetxt(path, table, fmt=["%d", "%d", "%d", "%.17g", "%.17g"], header=header)
    return path


def load_map_sample(path) -> MapSample:
    path = Path(path)
    try:
        with path.open() as fh:
            head = [fh.readline().lstrip("# ").strip() for _ in range(3)]
        if head[0] != MAGIC:
            raise ValueError(f"{path} is not a map checkpoint")
        _, s_min, s_max, n_s, n_t = head[1].split()
        degree_text = head[2].split()[1]
        grid = CylinderGrid(float(s_min), float(s_max), int(n_s), int(n_t))
        table = np.loadtxt(path, ndmin=2)
    except (OSError, IndexError) as exc:
        raise ValueError(f"cannot read checkpoint {path}: {exc}") from exc
    if table.shape != (grid.n_s * grid.n_t, 5):
        raise ValueError(f"checkpoint {path} has {table.shape[0]} nodes, expected {grid.n_s * grid.n_t}")
    order = np.lexsort((table[:, 1], table[:, 0]))
    table = table[order]
    coord = (table[:, 3] + 1j * table[:, 4]).reshape(grid.shape)
    chart = table[:, 2].astype(bool).reshape(grid.shape)
    degree = None if degree_text == "none" else int(degree_text)
    return MapSample(grid, coord, chart, degree)


def read_yaml(path) -> dict:
    try:
        with Path(path).open() as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a mapping at the top level")
    return data
