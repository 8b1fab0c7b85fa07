"""Area, graph energy, the taming quadratic form and a weighted Sobolev-type norm.

The graph ``(z, u(z))`` lives in the cylinder times the sphere, with form
``N omega_0 + omega`` where ``omega_0 = c ds^dt`` and ``c`` is one over the
cylinder length (unit total mass).  The structure on the product is

    ``J~(a, v) = (i a, i conj(a) grad H + i v)``

with ``a`` a cylinder vector written as ``a_s + i a_t``.  Its quadratic form is

    ``Q(a, v) = N c |a|^2 + |v|^2 + g(v, conj(a) grad H)``,

positive once ``N > (f/2)^2`` where ``f`` bounds the mixed term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .crcalc import SampledFunction, diff_s, diff_t
from .errors import GridTooSmallError
from .grid import CylinderGrid, MapSample, chart_derivatives
from .hamiltonian import PerturbationSpec, grad_hamiltonian
from .sphere import Chart, SpherePoint, conformal_factor, metric, omega, vector_norm

TAIL_WARNING_RATIO = 0.1
# densities below this are roundoff and carry no tail
TAIL_FLOOR = 1e-14


@dataclass
class AreaReport:
    area: float
    band_contributions: np.ndarray
    tail_estimate: float
    grid: CylinderGrid
    tail_warning: bool = False

    def band_density(self) -> np.ndarray:
        """Area per unit ``s`` of each row."""
        return self.band_contributions / self.grid.trapezoid_weights()

    def to_dict(self) -> dict:
        return {"area": self.area, "tail_estimate": self.tail_estimate, "tail_warning": self.tail_warning}


def area_density(u: MapSample) -> np.ndarray:
    """``u* omega`` against ``ds ^ dt`` at every node."""
    u_s, u_t = chart_derivatives(u, order=4)
    return omega(u.coord, u_s, u_t)


def _end_tail(density: np.ndarray, s_dist: np.ndarray) -> float:
    """``int_0^inf`` of an exponential fitted to ``|density|`` against distance beyond the end."""
    mag = np.abs(density)
    if not np.any(mag > TAIL_FLOOR):
        return 0.0
    keep = mag > TAIL_FLOOR
    if keep.sum() < 2:
        return float("inf")
    slope, intercept = np.polyfit(s_dist[keep], np.log(mag[keep]), 1)
    # slope is d log|density| / d(distance into the interior); decay outward needs slope > 0
    if slope <= 0:
        return float("inf")
    return float(np.exp(intercept) / slope)


def symplectic_area(u: MapSample) -> AreaReport:
    """Quadrature of ``u* omega`` over the truncated cylinder.

    Rows are weighted by the trapezoid rule in ``s``; ``t`` is summed
    periodically.  ``tail_estimate`` extrapolates the outer tenth of the
    rows at each end exponentially.
    """
    grid = u.grid
    density = area_density(u)
    bands = grid.trapezoid_weights() * density.sum(axis=1) * grid.h_t
    area = float(np.sum(bands))
    row_density = density.sum(axis=1) * grid.h_t
    n_fit = max(3, grid.n_s // 10)
    s = grid.s
    tail = _end_tail(row_density[:n_fit], s[:n_fit] - s[0]) + _end_tail(row_density[-n_fit:][::-1], s[-1] - s[-n_fit:][::-1])
    warn = bool(not math.isfinite(tail) or tail > TAIL_WARNING_RATIO * abs(area))
    return AreaReport(area, bands, tail, grid, warn)


def omega0_density(grid: CylinderGrid) -> float:
    return 1.0 / grid.measure


def graph_energy(u: MapSample, N: float, spec: PerturbationSpec | None = None) -> float:
    """``1/2 int (Q(u~_s) + Q(u~_t))`` for the graph ``u~(z) = (z, u(z))``.

    With ``spec`` omitted (or ``lam = 0``) the structure is a product and the
    energy of a holomorphic ``u`` equals ``N`` plus its area.
    """
    if N <= 0:
        raise ValueError("N must be positive")
    grid = u.grid
    c0 = omega0_density(grid)
    u_s, u_t = chart_derivatives(u, order=4)
    dens = 2 * N * c0 + metric(u.coord, u_s, u_s) + metric(u.coord, u_t, u_t)
    if spec is not None and spec.lam != 0:
        sign = np.where(u.chart, -1.0, 1.0)
        grad = sign * spec.strength(grid.s)[:, None] * u.coord
        # conj(1) = 1 for d/ds and conj(i) = -i for d/dt
        dens = dens + metric(u.coord, u_s, grad) + metric(u.coord, u_t, -1j * grad)
    integrand = 0.5 * dens.sum(axis=1) * grid.h_t
    return float(np.sum(grid.trapezoid_weights() * integrand))


def taming_form(N: float, c0: float, coord, chart_is_w, grad, a, v):
    """``Q(a, v) = omega~((a, v), J~(a, v))`` for chart vectors at chart coordinate ``coord``."""
    return N * c0 * np.abs(a) ** 2 + metric(coord, v, v) + metric(coord, v, np.conj(a) * grad)


@dataclass
class TamingResult:
    min_value: float
    f_bound: float
    n_threshold: float
    omega_norm: float
    samples: int
    extra: dict = field(default_factory=dict)


def _omega_operator_norm(coords) -> float:
    # omega(X, Y) / (|X| |Y|) is largest for Y = J X
    coords = np.asarray(coords)
    x = np.ones_like(coords)
    return float(np.max(np.abs(omega(coords, x, 1j * x)) / (vector_norm(coords, x) * vector_norm(coords, 1j * x))))


def taming_margin(spec: PerturbationSpec, N: float, sample_count: int, seed, domain_length: float = 12.0,
                  s_range: tuple[float, float] | None = None) -> TamingResult:
    """Smallest sampled value of ``Q`` over unit-size random vectors at random points.

    ``f = |omega| * sup |P|``; ``|P|`` is the operator norm from the
    ``omega_0`` metric to the sphere metric, namely ``|grad H| / sqrt(c)``.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be at least 1")
    rng = np.random.default_rng(seed)
    c0 = 1.0 / domain_length
    lo, hi = s_range if s_range is not None else (-0.5 * domain_length, 0.5 * domain_length)
    s = rng.uniform(lo, hi, sample_count)
    coord = 2.0 * np.sqrt(rng.uniform(size=sample_count)) * np.exp(2j * math.pi * rng.uniform(size=sample_count))
    chart_is_w = rng.uniform(size=sample_count) < 0.5
    a = rng.normal(size=sample_count) + 1j * rng.normal(size=sample_count)
    v = rng.normal(size=sample_count) + 1j * rng.normal(size=sample_count)
    # normalise so that N c |a|^2 + |v|^2 = 1
    scale = np.sqrt(N * c0 * np.abs(a) ** 2 + np.abs(v) ** 2 * conformal_factor(coord))
    a, v = a / scale, v / scale
    grad = np.where(chart_is_w, -1.0, 1.0) * spec.strength(s) * coord
    values = taming_form(N, c0, coord, chart_is_w, grad, a, v)
    omega_norm = _omega_operator_norm(coord)
    # sup over the sphere of |grad H| is 2 lam sup|psi|, since |z| / (1 + |z|^2) <= 1/2
    p_norm = 2.0 * spec.lam * spec.psi.sup() / math.sqrt(c0)
    f = omega_norm * p_norm
    return TamingResult(float(values.min()), f, (f / 2) ** 2, omega_norm, sample_count)


def gradient_duality_defect(spec: PerturbationSpec, sample_count: int, seed, step: float = 1e-5,
                            s_range: tuple[float, float] = (-3.0, 3.0)) -> float:
    """Largest ``|g(grad H, v) - dH(v)|`` over random points and unit vectors, ``dH`` by central differences."""
    from .hamiltonian import hamiltonian

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(sample_count):
        s = rng.uniform(*s_range)
        p = SpherePoint(complex(*rng.uniform(-2, 2, 2)) / math.sqrt(2), Chart.W if rng.uniform() < 0.5 else Chart.Z)
        v = np.exp(2j * math.pi * rng.uniform()) * (1.0 + abs(p.coord) ** 2)
        grad = grad_hamiltonian(s, p, spec).value
        fd = (hamiltonian(s, SpherePoint(p.coord + step * v, p.chart), spec)
              - hamiltonian(s, SpherePoint(p.coord - step * v, p.chart), spec)) / (2 * step)
        worst = max(worst, abs(float(metric(p.coord, grad, v)) - float(fd)))
    return worst


@dataclass(frozen=True)
class EpsilonSequence:
    n_max: int = 5
    epsilon: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.n_max < 0:
            raise ValueError("n_max must be non-negative")
        if self.epsilon is None:
            object.__setattr__(self, "epsilon", tuple(1.0 / math.factorial(k) ** 2 for k in range(self.n_max + 1)))
        eps = tuple(float(e) for e in self.epsilon)
        object.__setattr__(self, "epsilon", eps)
        if len(eps) < self.n_max + 1:
            raise ValueError("need one weight per order up to n_max")
        if any(e <= 0 for e in eps):
            raise ValueError("weights must be positive")
        if any(b > a for a, b in zip(eps, eps[1:])):
            raise ValueError("weights must be non-increasing")

    def truncated(self, n: int) -> "EpsilonSequence":
        return EpsilonSequence(n, self.epsilon[: n + 1])


def _l2(values: np.ndarray, grid: CylinderGrid) -> float:
    # trapezoid in s, periodic sum in t, mean over sphere samples
    per_row = (np.abs(values) ** 2).sum(axis=1) * grid.h_t
    weights = grid.trapezoid_weights().reshape((-1,) + (1,) * (per_row.ndim - 1))
    return float(np.mean(np.sum(weights * per_row, axis=0)))


def epsilon_partial_sums(f: SampledFunction, eps: EpsilonSequence) -> list[float]:
    """``sum_{k<=n} eps_k |grad^k f|^2`` for ``n = 0 .. n_max``."""
    grid = f.grid
    if grid.n_s <= 2 * eps.n_max or grid.n_t <= 2 * eps.n_max:
        raise GridTooSmallError(f"grid {grid.shape} cannot carry {eps.n_max} derivatives")
    # derivs[a] holds D_s^a D_t^(k-a) f for the current order k
    derivs = [f.values]
    total = 0.0
    sums = []
    for k in range(eps.n_max + 1):
        if k > 0:
            nxt = [diff_t(derivs[0], grid.h_t, f.t_periodic)]
            nxt += [diff_s(d, grid.h_s) for d in derivs]
            derivs = nxt
        total += eps.epsilon[k] * sum(math.comb(k, a) * _l2(d, grid) for a, d in enumerate(derivs))
        sums.append(total)
    return sums


def epsilon_norm(f: SampledFunction, eps: EpsilonSequence) -> float:
    """The squared norm ``sum_k eps_k |grad^k f|^2`` up to ``eps.n_max``."""
    return epsilon_partial_sums(f, eps)[-1]
