"""Fubini-Study geometry of the Riemann sphere in two stereographic charts.

The symplectic form is ``dx^dy / (1 + |z|^2)^2`` in either chart (total mass
pi) and the complex structure is multiplication by ``i``.  With these
conventions the metric is ``g(X, Y) = omega(X, J Y)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ChartError
from .grid import CHART_SWITCH_RADIUS, MapSample, chart_derivatives


class Chart(enum.Enum):
    Z = "Z"
    W = "W"

    @property
    def other(self) -> "Chart":
        return Chart.W if self is Chart.Z else Chart.Z


@dataclass(frozen=True)
class SpherePoint:
    coord: complex
    chart: Chart = Chart.Z

    @classmethod
    def from_complex(cls, z: complex) -> "SpherePoint":
        """Point ``z`` of the extended plane, carried in its natural chart."""
        z = complex(z)
        if np.isinf(z.real) or np.isinf(z.imag):
            return cls(0j, Chart.W)
        if abs(z) <= CHART_SWITCH_RADIUS:
            return cls(z, Chart.Z)
        return cls(1 / z, Chart.W)

    def to_complex(self) -> complex:
        if self.chart is Chart.Z:
            return complex(self.coord)
        if self.coord == 0:
            return complex(np.inf, 0)
        return 1 / complex(self.coord)

    def in_chart(self, chart: Chart) -> "SpherePoint":
        return self if chart is self.chart else chart_switch(self)

    def is_close(self, other: "SpherePoint", tol: float = 1e-12) -> bool:
        if other.chart is not self.chart:
            if other.coord == 0:
                return False
            other = chart_switch(other)
        return abs(self.coord - other.coord) <= tol * max(1.0, abs(self.coord))


@dataclass(frozen=True)
class TangentVector:
    base: SpherePoint
    value: complex

    def in_chart(self, chart: Chart) -> "TangentVector":
        if chart is self.base.chart:
            return self
        # derivative of the transition c -> 1/c
        return TangentVector(chart_switch(self.base), -self.value / self.base.coord ** 2)


def chart_switch(p: SpherePoint) -> SpherePoint:
    if p.coord == 0:
        raise ChartError(f"the point 0 of chart {p.chart.value} is the pole of the other chart")
    return SpherePoint(1 / complex(p.coord), p.chart.other)


class ComplexStructure:
    """Almost-complex structure on the sphere, applied in a chart.

    Only the integrable structure ``J = i`` is provided; the hook exists so a
    point-dependent structure can be substituted without touching callers.
    """

    def __call__(self, p: SpherePoint, v: complex) -> complex:
        return 1j * v


STANDARD_J = ComplexStructure()


def conformal_factor(coord):
    """``1 / (1 + |c|^2)^2``, the density of the form in either chart."""
    return 1.0 / (1.0 + np.abs(coord) ** 2) ** 2


def omega(coord, a, b):
    """The symplectic form on chart vectors ``a, b`` at chart coordinate ``coord``."""
    return np.imag(np.conj(a) * b) * conformal_factor(coord)


def metric(coord, a, b):
    return np.real(np.conj(a) * b) * conformal_factor(coord)


def vector_norm(coord, a):
    return np.abs(a) / (1.0 + np.abs(coord) ** 2)


def fs_area_density(p: SpherePoint, du_ds: complex, du_dt: complex) -> float:
    """Coefficient of ``u*omega`` against ``ds ^ dt``; the vectors live in ``p``'s chart."""
    return float(omega(p.coord, du_ds, du_dt))


def _in_base_chart(p: SpherePoint, *vectors: TangentVector) -> list[complex]:
    out = []
    for v in vectors:
        if not p.is_close(v.base, 1e-9):
            raise ValueError("tangent vector is not based at the given point")
        out.append(v.in_chart(p.chart).value)
    return out


def fs_inner(p: SpherePoint, v: TangentVector, w: TangentVector) -> float:
    a, b = _in_base_chart(p, v, w)
    return float(metric(p.coord, a, b))


def fs_omega(p: SpherePoint, v: TangentVector, w: TangentVector) -> float:
    a, b = _in_base_chart(p, v, w)
    return float(omega(p.coord, a, b))


def phi_coefficient(coord, x):
    """``Phi(X)`` as a complex-linear form ``Y -> c * Y`` on chart vectors; returns ``c``.

    ``Phi(X)(Y) = omega(X, Y) - i omega(X, JY)`` works out to ``-i conj(X) Y`` times
    the conformal factor.
    """
    return -1j * np.conj(x) * conformal_factor(coord)


def phi_inverse(coord, c):
    """The vector ``X`` with ``Phi(X) = (Y -> c * Y)``."""
    return -1j * np.conj(c) / conformal_factor(coord)


def phi_map(p: SpherePoint, X: TangentVector, Y: TangentVector, J: ComplexStructure = STANDARD_J) -> complex:
    x, y = _in_base_chart(p, X, Y)
    return complex(omega(p.coord, x, y) - 1j * omega(p.coord, x, J(p, y)))


def theta_form(p: SpherePoint, dbar_v: complex, dbar_w: complex, J: ComplexStructure = STANDARD_J) -> complex:
    """``-1/2 <A, J B> - i/2 <A, B>`` for the values ``A, B`` of a Cauchy-Riemann differential."""
    return complex(-0.5 * metric(p.coord, dbar_v, J(p, dbar_w)) - 0.5j * metric(p.coord, dbar_v, dbar_w))


def theta_invariance_defect(p: SpherePoint, du_ds: complex, v: complex) -> float:
    """``|theta(jv, jv) - theta(v, v)|`` for the anti-linear differential with ``du(d/ds) = du_ds``.

    ``v = a + ib`` stands for the domain vector ``a d/ds + b d/dt``; anti-linearity
    gives ``du(v) = conj(v) du_ds`` and the Cauchy-Riemann differential is ``2 du``.
    """
    dbar = lambda vec: 2 * np.conj(vec) * du_ds  # noqa: E731
    return abs(theta_form(p, dbar(1j * v), dbar(1j * v)) - theta_form(p, dbar(v), dbar(v)))


def antilinear_defect(u: MapSample, mode: str = "anti") -> float:
    """Largest pointwise Cauchy-Riemann identity defect over interior nodes, in the sphere metric.

    ``mode="anti"`` measures ``(du + J du j) - 2 du`` for a map supplied as
    anti-holomorphic; ``mode="holo"`` measures ``du + J du j`` itself.
    """
    u_s, u_t = chart_derivatives(u, order=2)
    inner = slice(1, u.grid.n_s - 1)
    u_s, u_t, coord = u_s[inner], u_t[inner], u.coord[inner]
    dbar_s = u_s + 1j * u_t
    dbar_t = u_t - 1j * u_s
    if mode == "anti":
        dbar_s = dbar_s - 2 * u_s
        dbar_t = dbar_t - 2 * u_t
    elif mode != "holo":
        raise ValueError("mode must be 'anti' or 'holo'")
    err = np.maximum(vector_norm(coord, dbar_s), vector_norm(coord, dbar_t))
    return float(err.max())
