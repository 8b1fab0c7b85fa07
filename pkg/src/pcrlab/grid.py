"""Cylinder grids, chart-tagged map samples and chart-aware difference stencils.

A map ``u: [s_min, s_max] x S^1 -> S^2`` is stored node by node as a complex
coordinate plus a chart tag.  Chart ``Z`` is the affine coordinate ``z`` and
chart ``W`` is ``w = 1/z``.  Every stencil brings the neighbours of a node into
that node's chart before differencing, so a map may pass through both poles
without overflowing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ChartTearingError, GridTooSmallError

CHART_SWITCH_RADIUS = 2.0
# converted neighbour coordinates beyond this magnitude mean the map tore
TEAR_LIMIT = 1.0e4


@dataclass(frozen=True)
class CylinderGrid:
    """Uniform grid on ``[s_min, s_max] x S^1``; ``t`` has period 1."""

    s_min: float
    s_max: float
    n_s: int
    n_t: int

    def __post_init__(self):
        if self.n_s < 8 or self.n_t < 8:
            raise GridTooSmallError(f"grid {self.n_s}x{self.n_t} is below the 8x8 minimum")
        if not self.s_max > self.s_min:
            raise ValueError("s_max must exceed s_min")

    @classmethod
    def symmetric(cls, half_length: float, n_s: int, n_t: int) -> "CylinderGrid":
        return cls(-float(half_length), float(half_length), int(n_s), int(n_t))

    @property
    def h_s(self) -> float:
        return (self.s_max - self.s_min) / (self.n_s - 1)

    @property
    def h_t(self) -> float:
        return 1.0 / self.n_t

    @property
    def s(self) -> np.ndarray:
        return np.linspace(self.s_min, self.s_max, self.n_s)

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.n_t) / self.n_t

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_s, self.n_t)

    @property
    def measure(self) -> float:
        return self.s_max - self.s_min

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.s, self.t, indexing="ij")

    def refined(self) -> "CylinderGrid":
        """Halve both spacings; the old nodes stay nodes of the new grid."""
        return CylinderGrid(self.s_min, self.s_max, 2 * (self.n_s - 1) + 1, 2 * self.n_t)

    def trapezoid_weights(self) -> np.ndarray:
        """Per-row quadrature weights in ``s`` (trapezoid rule)."""
        w = np.full(self.n_s, self.h_s)
        w[0] = w[-1] = 0.5 * self.h_s
        return w


def normalize_charts(coord: np.ndarray, chart: np.ndarray, radius: float = CHART_SWITCH_RADIUS):
    """Move every node whose coordinate left the disc ``|c| <= radius`` to the other chart."""
    coord = np.array(coord, dtype=complex)
    chart = np.array(chart, dtype=bool)
    flip = np.abs(coord) > radius
    coord[flip] = 1.0 / coord[flip]
    chart[flip] = ~chart[flip]
    return coord, chart


def charts_from_log(log_values: np.ndarray, radius: float = CHART_SWITCH_RADIUS):
    """Chart-tagged coordinates for the points ``exp(log_values)``, without overflow."""
    log_values = np.asarray(log_values, dtype=complex)
    chart = log_values.real > np.log(radius)
    coord = np.where(chart, np.exp(-np.where(chart, log_values, 0.0)), np.exp(np.where(chart, 0.0, log_values)))
    return coord, chart


@dataclass
class MapSample:
    """Chart-tagged samples of a map from the cylinder grid to the sphere.

    ``chart`` is ``True`` where the node is carried in the ``W`` chart.  Rows
    ``0`` and ``n_s - 1`` are the Dirichlet boundary data of the solver.
    """

    grid: CylinderGrid
    coord: np.ndarray
    chart: np.ndarray
    degree: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.coord = np.asarray(self.coord, dtype=complex)
        self.chart = np.asarray(self.chart, dtype=bool)
        if self.coord.shape != self.grid.shape or self.chart.shape != self.grid.shape:
            raise ValueError(f"sample shape {self.coord.shape} does not match grid {self.grid.shape}")

    @classmethod
    def from_complex(cls, grid: CylinderGrid, values, degree: int | None = None) -> "MapSample":
        values = np.broadcast_to(np.asarray(values, dtype=complex), grid.shape)
        chart = ~(np.abs(values) <= CHART_SWITCH_RADIUS)
        with np.errstate(divide="ignore", invalid="ignore"):
            coord = np.where(chart, 1.0 / np.where(chart, values, 1.0), values)
        coord = np.where(np.isinf(values), 0.0, coord)
        return cls(grid, coord, chart, degree)

    @classmethod
    def from_log(cls, grid: CylinderGrid, log_values, degree: int | None = None) -> "MapSample":
        coord, chart = charts_from_log(np.broadcast_to(log_values, grid.shape))
        return cls(grid, coord, chart, degree)

    def copy(self) -> "MapSample":
        return MapSample(self.grid, self.coord.copy(), self.chart.copy(), self.degree, dict(self.meta))

    def normalized(self) -> "MapSample":
        coord, chart = normalize_charts(self.coord, self.chart)
        return MapSample(self.grid, coord, chart, self.degree, dict(self.meta))

    def to_complex(self) -> np.ndarray:
        """Values in the ``Z`` chart; the pole comes back as ``inf``."""
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(self.chart, 1.0 / np.where(self.chart, self.coord, 1.0), self.coord)
        return np.where(self.chart & (self.coord == 0), np.inf, out)

    def with_boundary_from(self, other: "MapSample") -> "MapSample":
        out = self.copy()
        for row in (0, -1):
            out.coord[row] = other.coord[row]
            out.chart[row] = other.chart[row]
        out.degree = other.degree
        return out


def neighbour(coord: np.ndarray, chart: np.ndarray, rows: np.ndarray, ds: int, dt: int,
              check: bool = True) -> np.ndarray:
    """Coordinates of node ``(j + ds, l + dt)`` expressed in the chart of node ``(j, l)``.

    ``rows`` selects the centre rows; ``t`` wraps periodically.
    """
    nb = coord[rows + ds]
    nbc = chart[rows + ds]
    if dt:
        nb = np.roll(nb, -dt, axis=1)
        nbc = np.roll(nbc, -dt, axis=1)
    same = nbc == chart[rows]
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(same, nb, 1.0 / np.where(same, 1.0, nb))
    if check and not same.all():
        bad = ~np.isfinite(out) | (np.abs(out) > TEAR_LIMIT)
        if bad.any():
            j, l = np.argwhere(bad)[0]
            raise ChartTearingError(f"node ({rows[j]}, {l}) cannot reach its neighbour ({ds}, {dt})")
    return out


def transition_factor(coord: np.ndarray, chart: np.ndarray, rows: np.ndarray, ds: int, dt: int) -> np.ndarray:
    """Derivative of :func:`neighbour` with respect to the neighbour's own coordinate."""
    nb = coord[rows + ds]
    nbc = chart[rows + ds]
    if dt:
        nb = np.roll(nb, -dt, axis=1)
        nbc = np.roll(nbc, -dt, axis=1)
    same = nbc == chart[rows]
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(same, 1.0 + 0j, -1.0 / np.where(same, 1.0, nb) ** 2)


def chart_derivatives(sample: MapSample, order: int = 2):
    """``(u_s, u_t)`` at every node, each in the node's own chart.

    ``order=2`` uses central differences with one-sided second-order rows at
    the ``s`` ends; ``order=4`` uses five-point central differences wherever
    the stencil fits and falls back to second order on the outer two rows.
    """
    grid = sample.grid
    n_s, n_t = grid.shape
    if n_s < 3 or n_t < 3:
        raise GridTooSmallError("central differences need three nodes per axis")
    coord, chart = sample.coord, sample.chart
    hs, ht = grid.h_s, grid.h_t
    u_s = np.empty_like(coord)
    u_t = np.empty_like(coord)
    every = np.arange(n_s)

    if order == 2:
        rows = np.arange(1, n_s - 1)
        u_s[rows] = (neighbour(coord, chart, rows, 1, 0) - neighbour(coord, chart, rows, -1, 0)) / (2 * hs)
        u_t[:] = (neighbour(coord, chart, every, 0, 1) - neighbour(coord, chart, every, 0, -1)) / (2 * ht)
    elif order == 4:
        if n_s < 5 or n_t < 5:
            raise GridTooSmallError("five-point stencils need five nodes per axis")
        rows = np.arange(2, n_s - 2)
        u_s[rows] = (
            -neighbour(coord, chart, rows, 2, 0) + 8 * neighbour(coord, chart, rows, 1, 0)
            - 8 * neighbour(coord, chart, rows, -1, 0) + neighbour(coord, chart, rows, -2, 0)
        ) / (12 * hs)
        inner = np.array([1, n_s - 2])
        u_s[inner] = (neighbour(coord, chart, inner, 1, 0) - neighbour(coord, chart, inner, -1, 0)) / (2 * hs)
        u_t[:] = (
            -neighbour(coord, chart, every, 0, 2) + 8 * neighbour(coord, chart, every, 0, 1)
            - 8 * neighbour(coord, chart, every, 0, -1) + neighbour(coord, chart, every, 0, -2)
        ) / (12 * ht)
    else:
        raise ValueError("order must be 2 or 4")

    first = np.array([0])
    last = np.array([n_s - 1])
    u_s[0] = (-3 * coord[0] + 4 * neighbour(coord, chart, first, 1, 0)[0]
              - neighbour(coord, chart, first, 2, 0)[0]) / (2 * hs)
    u_s[-1] = (3 * coord[-1] - 4 * neighbour(coord, chart, last, -1, 0)[0]
               + neighbour(coord, chart, last, -2, 0)[0]) / (2 * hs)
    return u_s, u_t


def winding_number(row: np.ndarray) -> int:
    """Winding of a closed loop of nonzero complex numbers around the origin."""
    phase = np.angle(row)
    steps = np.diff(np.append(phase, phase[0]))
    steps = (steps + np.pi) % (2 * np.pi) - np.pi
    return int(np.rint(steps.sum() / (2 * np.pi)))


def boundary_degree(sample: MapSample) -> int:
    """Degree of the sphere map obtained by collapsing the two boundary circles.

    Valid when each boundary row sits near a pole (``0`` or ``inf``), which is
    the case for every family the package builds.  The winding is read in the
    ``Z`` sense from the outermost row that is not at a pole.
    """
    z = sample.to_complex()
    near_inf = [bool(np.all(np.abs(z[row]) > 1.0)) for row in (0, -1)]
    if near_inf[0] == near_inf[1]:
        return 0
    mid = sample.grid.n_s // 2
    k = 0
    for row in list(range(mid, sample.grid.n_s)) + list(range(mid - 1, -1, -1)):
        vals = z[row]
        if np.all(np.isfinite(vals)) and np.all(vals != 0):
            k = winding_number(vals)
            break
    return k * (int(near_inf[1]) - int(near_inf[0]))
