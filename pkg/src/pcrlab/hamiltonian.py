"""Height-function Hamiltonian on the sphere, its gradient, perturbation and potential.

``H(s, z) = lam * psi(s) * (|z|^2 - 1) / (|z|^2 + 1)``.  Its metric gradient is
``4 lam psi(s) z`` in the ``Z`` chart and ``-4 lam psi(s) w`` in the ``W`` chart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import integrate, interpolate

from .errors import NotProperlyExactError
from .sphere import STANDARD_J, Chart, SpherePoint, TangentVector


def _mollifier(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1
    out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return out


class PsiProfile:
    """Base class for the ``s``-profile of the Hamiltonian."""

    kind: str = ""

    def __call__(self, s):
        raise NotImplementedError

    @property
    def compact(self) -> bool:
        raise NotImplementedError

    def cumulative(self, s):
        """``int_{-inf}^s psi``."""
        raise NotImplementedError

    def tail_integral(self, s) -> float:
        """``int_s^{+inf} psi`` by adaptive quadrature."""
        raise NotImplementedError

    def sup(self) -> float:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    @staticmethod
    def from_dict(data: dict) -> "PsiProfile":
        kind = str(data.get("kind", "")).lower()
        if kind == "constant":
            return Constant(float(data["tau"]))
        if kind == "bump":
            a, b = data["support"]
            return Bump(float(a), float(b), float(data["mass"]))
        if kind == "tabulated":
            return Tabulated(data["s"], data["values"])
        raise ValueError(f"unknown psi profile kind {data.get('kind')!r}")


@dataclass(frozen=True)
class Constant(PsiProfile):
    tau: float
    kind = "constant"

    def __call__(self, s):
        return np.full(np.shape(s), self.tau, dtype=float) if np.ndim(s) else float(self.tau)

    @property
    def compact(self) -> bool:
        # only the zero profile has (empty) compact support
        return self.tau == 0.0

    def cumulative(self, s):
        if self.tau != 0.0:
            raise NotProperlyExactError("a nonzero constant profile has no finite cumulative integral")
        return np.zeros(np.shape(s)) if np.ndim(s) else 0.0

    def tail_integral(self, s) -> float:
        if self.tau != 0.0:
            raise NotProperlyExactError("a nonzero constant profile is not integrable")
        return 0.0

    def sup(self) -> float:
        return abs(self.tau)

    def to_dict(self) -> dict:
        return {"kind": "constant", "tau": self.tau}


_GL96 = np.polynomial.legendre.leggauss(96)


@dataclass(frozen=True)
class Bump(PsiProfile):
    """Smooth bump ``c * exp(-1/(1-x^2))`` on ``[a, b]`` scaled to the requested mass."""

    a: float
    b: float
    mass: float
    kind = "bump"

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError("bump support must have b > a")

    @cached_property
    def _scale(self) -> float:
        unit, _ = integrate.quad(lambda x: float(_mollifier(x)), -1.0, 1.0, epsabs=1e-14, epsrel=1e-13)
        return self.mass / (0.5 * (self.b - self.a) * unit)

    def _x(self, s):
        return (2.0 * np.asarray(s, dtype=float) - self.a - self.b) / (self.b - self.a)

    def __call__(self, s):
        val = self._scale * _mollifier(self._x(s))
        return val if np.ndim(s) else float(val)

    @property
    def compact(self) -> bool:
        return True

    @cached_property
    def _table(self):
        # Gauss-Legendre panels feed a Hermite spline that reuses the exact derivative psi
        nodes = np.linspace(self.a, self.b, 4001)
        gx, gw = np.polynomial.legendre.leggauss(10)
        half = 0.5 * np.diff(nodes)
        mids = 0.5 * (nodes[1:] + nodes[:-1])
        pts = mids[:, None] + half[:, None] * gx[None, :]
        panels = (self(pts.ravel()).reshape(pts.shape) * gw).sum(axis=1) * half
        cum = np.concatenate([[0.0], np.cumsum(panels)])
        return interpolate.CubicHermiteSpline(nodes, cum, self(nodes))

    def cumulative(self, s):
        s_arr = np.asarray(s, dtype=float)
        out = np.where(s_arr <= self.a, 0.0, np.where(s_arr >= self.b, self.mass, 0.0))
        inside = (s_arr > self.a) & (s_arr < self.b)
        if np.any(inside):
            out = np.array(out, dtype=float)
            out[inside] = self._table(s_arr[inside])
        return out if np.ndim(s) else float(out)

    def tail_integral(self, s):
        # fixed 96-point Gauss-Legendre on [max(s, a), b]; agrees with adaptive quad to ~1e-15
        x, w = _GL96
        lo = np.clip(np.asarray(s, dtype=float), self.a, self.b)
        half = 0.5 * (self.b - lo)
        val = (half[..., None] * w * self(lo[..., None] + half[..., None] * (x + 1.0))).sum(axis=-1)
        return val if np.ndim(s) else float(val)

    def sup(self) -> float:
        return abs(self._scale) * math.exp(-1.0)

    def to_dict(self) -> dict:
        return {"kind": "bump", "support": [self.a, self.b], "mass": self.mass}


class Tabulated(PsiProfile):
    """Shape-preserving interpolant of samples, zero outside the sampled range."""

    kind = "tabulated"

    def __init__(self, s, values):
        self.s_nodes = np.asarray(s, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.s_nodes.ndim != 1 or self.s_nodes.shape != self.values.shape or len(self.s_nodes) < 2:
            raise ValueError("tabulated profile needs matching 1-D arrays of length >= 2")
        if np.any(np.diff(self.s_nodes) <= 0):
            raise ValueError("tabulated s must be strictly increasing")
        self._interp = interpolate.PchipInterpolator(self.s_nodes, self.values, extrapolate=False)
        self._anti = self._interp.antiderivative()

    def __call__(self, s):
        val = np.nan_to_num(self._interp(np.asarray(s, dtype=float)), nan=0.0)
        return val if np.ndim(s) else float(val)

    @property
    def compact(self) -> bool:
        return True

    def cumulative(self, s):
        s_arr = np.clip(np.asarray(s, dtype=float), self.s_nodes[0], self.s_nodes[-1])
        val = self._anti(s_arr)
        return val if np.ndim(s) else float(val)

    def tail_integral(self, s) -> float:
        lo = max(float(s), self.s_nodes[0])
        if lo >= self.s_nodes[-1]:
            return 0.0
        val, _ = integrate.quad(lambda x: float(self(x)), lo, self.s_nodes[-1], epsabs=1e-14,
                                limit=200, points=self.s_nodes[(self.s_nodes > lo)][:-1][:50])
        return val

    def sup(self) -> float:
        fine = np.linspace(self.s_nodes[0], self.s_nodes[-1], 20 * len(self.s_nodes))
        return float(np.max(np.abs(self(fine))))

    def to_dict(self) -> dict:
        return {"kind": "tabulated", "s": self.s_nodes.tolist(), "values": self.values.tolist()}

    def __eq__(self, other):
        return (isinstance(other, Tabulated) and np.array_equal(self.s_nodes, other.s_nodes)
                and np.array_equal(self.values, other.values))

    def __hash__(self):
        return hash((self.s_nodes.tobytes(), self.values.tobytes()))


@dataclass(frozen=True)
class PerturbationSpec:
    psi: PsiProfile
    lam: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda must lie in [0, 1], got {self.lam}")

    @property
    def properly_exact(self) -> bool:
        return self.psi.compact

    def with_lambda(self, lam: float) -> "PerturbationSpec":
        return PerturbationSpec(self.psi, lam)

    def strength(self, s):
        """``4 lam psi(s)``, the coefficient of the zeroth-order term."""
        return 4.0 * self.lam * self.psi(s)


def height(coord, chart_is_w):
    """``(|z|^2 - 1)/(|z|^2 + 1)`` written in either chart."""
    r2 = np.abs(coord) ** 2
    mu = (r2 - 1.0) / (r2 + 1.0)
    return np.where(chart_is_w, -mu, mu)


def hamiltonian(s, p: SpherePoint, spec: PerturbationSpec):
    return spec.lam * spec.psi(s) * height(p.coord, p.chart is Chart.W)


def grad_hamiltonian(s, p: SpherePoint, spec: PerturbationSpec) -> TangentVector:
    sign = -1.0 if p.chart is Chart.W else 1.0
    return TangentVector(p, complex(sign * 4.0 * spec.lam * spec.psi(float(s)) * p.coord))


def perturbation_form(s, t, p: SpherePoint, spec: PerturbationSpec):
    """Values of ``P = grad H ds - J grad H dt`` on ``d/ds`` and ``d/dt``."""
    grad = grad_hamiltonian(s, p, spec)
    return grad, TangentVector(p, -STANDARD_J(p, grad.value))


def exact_potential(s, p: SpherePoint, spec: PerturbationSpec):
    """``g(s, p) = -int_s^inf H(s', p) ds'`` along the constant-``t`` path from ``s = +inf``.

    Only defined when ``psi`` has compact support.
    """
    if not spec.properly_exact:
        raise NotProperlyExactError(f"{spec.psi.kind} profile is not compactly supported")
    mu = float(height(p.coord, p.chart is Chart.W))
    # grids repeat each s across t, so integrate once per distinct value
    flat, inverse = np.unique(np.asarray(s, dtype=float), return_inverse=True)
    if isinstance(spec.psi, Bump):
        tail = spec.psi.tail_integral(flat)
    else:
        tail = np.array([spec.psi.tail_integral(x) for x in flat])
    tail = tail[inverse].reshape(np.shape(s))
    out = -spec.lam * mu * tail
    return out if np.ndim(s) else float(out)


def verify_proper_exactness(spec: PerturbationSpec, grid, points=None) -> float:
    """Sup-norm gap between ``dbar_Sigma(i g)`` on the grid and ``i H ds + H dt``."""
    from .crcalc import SampledFunction, dbar_sigma, default_points

    if not spec.properly_exact:
        raise NotProperlyExactError(f"{spec.psi.kind} profile is not compactly supported")
    points = default_points() if points is None else tuple(points)
    s = grid.s
    values = np.empty(grid.shape + (len(points),), dtype=complex)
    target = np.empty_like(values)
    for m, p in enumerate(points):
        values[:, :, m] = 1j * exact_potential(s, p, spec)[:, None]
        target[:, :, m] = hamiltonian(s, p, spec)[:, None]
    form = dbar_sigma(SampledFunction(grid, points, values=values))
    gap_ds = np.abs(form.comp_ds - 1j * target)
    gap_dt = np.abs(form.comp_dt - target)
    return float(max(gap_ds.max(), gap_dt.max()))
