"""Discrete Cauchy-Riemann calculus on functions over the cylinder times the sphere.

Conventions: ``j d/ds = d/dt`` on the cylinder and ``J = i`` on the sphere.
``dbar_Sigma f = d_Sigma f + i (d_Sigma f) o j`` (no factor one half), so its
``ds`` component is ``f_s + i f_t`` and its ``dt`` component is ``-i`` times that.
A ``(0,1)_Sigma`` form with values in ``TM`` or in forms on ``M`` is stored by
its ``ds`` coefficient; the ``dt`` coefficient is carried alongside.

The diagram checks compare two routes.  One route differences samples on the
grid (second order), the other differentiates the closure with a five-point
stencil at a fine step, so the reported defect is the identity's violation
plus the grid's own ``O(h^2)`` error.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ChartError, GridTooSmallError
from .grid import CHART_SWITCH_RADIUS, CylinderGrid
from .sphere import SpherePoint, TangentVector, phi_coefficient, phi_inverse

# step for M-direction differences, in chart coordinates
M_STEP = 1e-5
# step for the closure route in the Sigma directions (five-point stencil)
SIGMA_STEP = 1e-3

Closure = Callable[[np.ndarray, np.ndarray, SpherePoint], np.ndarray]


def default_points() -> tuple[SpherePoint, ...]:
    """A fixed spread of sample points touching both charts."""
    return (
        SpherePoint(0j),
        SpherePoint(0.5 + 0.25j),
        SpherePoint(-1.0 + 0.8j),
        SpherePoint(1.7j),
        SpherePoint.from_complex(3.0 - 1.0j),
        SpherePoint.from_complex(-6.0 + 2.0j),
    )


@dataclass
class SampledFunction:
    """Complex values on ``grid x points``, optionally backed by a closure ``func(s, t, p)``.

    ``func`` must broadcast over arrays ``s`` and ``t``; ``p`` is a single point.
    M-direction derivatives need the closure.  ``t_periodic=False`` switches the
    ``t`` stencils to one-sided ends, for test data that is not a function on
    the circle.
    """

    grid: CylinderGrid
    points: tuple[SpherePoint, ...]
    func: Closure | None = None
    values: np.ndarray | None = None
    t_periodic: bool = True

    def __post_init__(self):
        self.points = tuple(self.points)
        if self.values is None:
            if self.func is None:
                raise ValueError("need either values or a closure")
            S, T = self.grid.mesh()
            self.values = np.stack([np.broadcast_to(self.func(S, T, p), S.shape) for p in self.points], axis=-1)
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape[:2] != self.grid.shape:
            raise ValueError("values do not match the grid")

    @classmethod
    def from_closure(cls, grid: CylinderGrid, func: Closure, points: Sequence[SpherePoint] | None = None,
                     t_periodic: bool = True) -> "SampledFunction":
        return cls(grid, default_points() if points is None else tuple(points), func, None, t_periodic)

    def require_closure(self) -> Closure:
        if self.func is None:
            raise ValueError("this operation needs a closure-backed sample")
        return self.func


@dataclass
class OneFormSample:
    """Sigma components per node and sample; ``comp_M`` holds optional M-components per sample."""

    comp_ds: np.ndarray
    comp_dt: np.ndarray
    comp_M: np.ndarray | None = None

    def sup(self) -> float:
        return float(max(np.abs(self.comp_ds).max(initial=0.0), np.abs(self.comp_dt).max(initial=0.0)))

    def is_antilinear(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.comp_dt + 1j * self.comp_ds) <= tol))


def _antilinear(comp_ds: np.ndarray) -> OneFormSample:
    return OneFormSample(comp_ds, -1j * comp_ds)


def diff_s(values: np.ndarray, h: float) -> np.ndarray:
    """Second-order ``d/ds`` along axis 0, one-sided at both ends."""
    if values.shape[0] < 3:
        raise GridTooSmallError("need three nodes in s")
    out = np.empty_like(values)
    out[1:-1] = (values[2:] - values[:-2]) / (2 * h)
    out[0] = (-3 * values[0] + 4 * values[1] - values[2]) / (2 * h)
    out[-1] = (3 * values[-1] - 4 * values[-2] + values[-3]) / (2 * h)
    return out


def diff_t(values: np.ndarray, h: float, periodic: bool = True) -> np.ndarray:
    """Second-order ``d/dt`` along axis 1."""
    if values.shape[1] < 3:
        raise GridTooSmallError("need three nodes in t")
    if periodic:
        return (np.roll(values, -1, axis=1) - np.roll(values, 1, axis=1)) / (2 * h)
    return np.swapaxes(diff_s(np.swapaxes(values, 0, 1), h), 0, 1)


def _grid_dbar(values: np.ndarray, grid: CylinderGrid, periodic: bool = True) -> np.ndarray:
    return diff_s(values, grid.h_s) + 1j * diff_t(values, grid.h_t, periodic)


def _five_point(fn: Callable[[float], np.ndarray], h: float) -> np.ndarray:
    return (-fn(2 * h) + 8 * fn(h) - 8 * fn(-h) + fn(-2 * h)) / (12 * h)


def _closure_dbar(func: Closure, S: np.ndarray, T: np.ndarray, p: SpherePoint, h: float = SIGMA_STEP):
    f_s = _five_point(lambda d: func(S + d, T, p), h)
    f_t = _five_point(lambda d: func(S, T + d, p), h)
    return f_s + 1j * f_t


def _shifted(p: SpherePoint, delta: complex) -> SpherePoint:
    return SpherePoint(p.coord + delta, p.chart)


def _check_chart(p: SpherePoint, step: float):
    if abs(p.coord) - step > CHART_SWITCH_RADIUS:
        raise ChartError(f"point {p.coord} lies outside its chart disc; switch charts first")


def _del_M_closure(g: Callable[[SpherePoint], np.ndarray], p: SpherePoint, direction: complex,
                   step: float = M_STEP):
    """``(d g)(v) - i (d g)(J v)`` with central differences in ``p``'s chart."""
    _check_chart(p, step)
    d = lambda v: (g(_shifted(p, step * v)) - g(_shifted(p, -step * v))) / (2 * step)  # noqa: E731
    return d(direction) - 1j * d(1j * direction)


def del_M(f: SampledFunction, p: SpherePoint, direction: TangentVector | complex, step: float = M_STEP) -> np.ndarray:
    """``(d_M f - i (d_M f) o J)(direction)`` at ``p`` for every grid node.

    ``direction`` is a chart vector at ``p`` (a :class:`TangentVector` is moved
    into ``p``'s chart first).
    """
    func = f.require_closure()
    if isinstance(direction, TangentVector):
        if not p.is_close(direction.base, 1e-9):
            raise ValueError("direction is not based at p")
        direction = direction.in_chart(p.chart).value
    S, T = f.grid.mesh()
    return np.broadcast_to(_del_M_closure(lambda q: func(S, T, q), p, complex(direction), step), S.shape)


def dbar_sigma(f: SampledFunction) -> OneFormSample:
    """Grid realisation of ``dbar_Sigma f``; ``comp_dt = -i comp_ds`` holds exactly."""
    return _antilinear(_grid_dbar(f.values, f.grid, f.t_periodic))


def _form_norm(coord, c):
    # norm of the form Y -> c Y against the sphere metric
    return np.abs(c) * (1.0 + np.abs(coord) ** 2)


def _vector_norm(coord, v):
    return np.abs(v) / (1.0 + np.abs(coord) ** 2)


def diagram_defect_0(X: SampledFunction) -> float:
    """Sup over nodes and samples of ``|(id x Phi)(dbar_Sigma X) - dbar_Sigma(Phi(X))|``.

    ``X`` holds tangent vectors, in each sample point's chart.  The left route
    differences the samples of ``X`` on the grid; the right route differences
    the closure of ``Phi(X)``.  Since ``Phi`` is conjugate-linear the two
    routes agree only when ``X`` does not depend on ``t``; otherwise the
    defect tends to ``2 sup |Phi(X_t)|``.
    """
    func = X.require_closure()
    S, T = X.grid.mesh()
    worst = 0.0
    for m, p in enumerate(X.points):
        left = phi_coefficient(p.coord, _grid_dbar(X.values[:, :, m], X.grid, X.t_periodic))
        right = _closure_dbar(lambda s, t, q: phi_coefficient(q.coord, func(s, t, q)), S, T, p)
        worst = max(worst, float(_form_norm(p.coord, left - right).max()))
    return worst


def diagram_defect_1(f: SampledFunction, direction: complex = 1.0) -> float:
    """Sup of ``|del_M(dbar_Sigma f) - dbar_Sigma(del_M f)|`` evaluated on ``direction``.

    The left route differences grid samples taken at the shifted points; the
    right route differences the closure of ``del_M f``.
    """
    func = f.require_closure()
    grid = f.grid
    S, T = grid.mesh()
    worst = 0.0
    for p in f.points:
        left = _del_M_closure(lambda q: _grid_dbar(np.broadcast_to(func(S, T, q), S.shape), grid, f.t_periodic),
                              p, direction)
        right = _closure_dbar(lambda s, t, q: _del_M_closure(lambda r: func(s, t, r), q, direction), S, T, p)
        worst = max(worst, float((np.abs(left - right) * (1.0 + np.abs(p.coord) ** 2)).max()))
    return worst


def exact_perturbation_two_ways(f: SampledFunction):
    """Both constructions of the perturbation generated by ``f``.

    ``P_a = dbar_Sigma(Phi^{-1}(del_M f))`` differences the grid samples of the
    vector field ``Phi^{-1}(del_M f)``.  ``P_b = (id x Phi)^{-1}(del_M(dbar_Sigma f))``
    differences the closure.  Both are ``TM``-valued ``(0,1)`` forms stored with
    an extra trailing sample axis.  Returns ``(P_a, P_b, defect)`` with the
    defect measured in the sphere metric.
    """
    func = f.require_closure()
    grid = f.grid
    S, T = grid.mesh()
    a_cols, b_cols = [], []
    worst = 0.0
    for p in f.points:
        field = phi_inverse(p.coord, np.broadcast_to(_del_M_closure(lambda q: func(S, T, q), p, 1.0), S.shape))
        pa = _grid_dbar(field, grid, f.t_periodic)
        coeff = _del_M_closure(lambda q: _closure_dbar(func, S, T, q), p, 1.0)
        pb = phi_inverse(p.coord, coeff)
        a_cols.append(pa)
        b_cols.append(pb)
        worst = max(worst, float(_vector_norm(p.coord, pa - pb).max()))
    P_a = _antilinear(np.stack(a_cols, axis=-1))
    P_b = _antilinear(np.stack(b_cols, axis=-1))
    return P_a, P_b, worst

