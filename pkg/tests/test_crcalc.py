import math

import numpy as np
import pytest

from pcrlab.crcalc import (
    SampledFunction,
    dbar_sigma,
    default_points,
    del_M,
    diagram_defect_0,
    diagram_defect_1,
    diff_s,
    exact_perturbation_two_ways,
)
from pcrlab.errors import ChartError
from pcrlab.grid import CylinderGrid
from pcrlab.hamiltonian import Bump, PerturbationSpec, exact_potential
from pcrlab.sphere import SpherePoint

GRID = CylinderGrid(-2, 2, 17, 8)


def _levels(base, fn, n=4):
    out, g = [], base
    for _ in range(n):
        out.append(fn(g))
        g = g.refined()
    return out


def _ratios(d):
    return [a / b for a, b in zip(d, d[1:])]


def test_dbar_holomorphic_is_zero():
    f = SampledFunction.from_closure(GRID, lambda s, t, p: s + 1j * t, t_periodic=False)
    assert dbar_sigma(f).sup() < 1e-12


def test_dbar_antiholomorphic():
    f = SampledFunction.from_closure(GRID, lambda s, t, p: s - 1j * t, t_periodic=False)
    form = dbar_sigma(f)
    assert np.allclose(form.comp_ds, 2) and np.allclose(form.comp_dt, -2j)
    assert form.is_antilinear()


def test_dbar_of_square():
    f = SampledFunction.from_closure(GRID, lambda s, t, p: s**2 + 0 * t)
    S, _ = GRID.mesh()
    err = np.abs(dbar_sigma(f).comp_ds[:, :, 0] - 2 * S)
    assert err.max() < 1e-12  # second-order stencils are exact on quadratics


def test_diff_s_second_order():
    d = []
    for n in (41, 81):
        s = np.linspace(0, 1, n)
        d.append(np.abs(diff_s(np.sin(s), s[1] - s[0]) - np.cos(s)).max())
    assert 3.5 < d[0] / d[1] < 4.5


def test_del_M_examples():
    const = SampledFunction.from_closure(GRID, lambda s, t, p: 3.0 + s * 0)
    assert np.all(del_M(const, SpherePoint(0j), 1.0) == 0)
    re = SampledFunction.from_closure(GRID, lambda s, t, p: np.real(p.coord) + 0 * s)
    assert np.allclose(del_M(re, SpherePoint(0j), 1.0), 1.0, atol=1e-9)
    z = SampledFunction.from_closure(GRID, lambda s, t, p: p.coord + 0 * s)
    assert np.allclose(del_M(z, SpherePoint(0j), 1.0), 2.0, atol=1e-9)


def test_del_M_outside_chart():
    f = SampledFunction.from_closure(GRID, lambda s, t, p: p.coord + 0 * s)
    with pytest.raises(ChartError):
        del_M(f, SpherePoint(2.5 + 0j), 1.0)


def test_diagram0_t_independent_field_is_exact():
    X = SampledFunction.from_closure(GRID, lambda s, t, p: np.ones_like(s) * (1 + p.coord))
    assert diagram_defect_0(X) < 1e-12


def test_diagram0_order_two():
    d = _levels(GRID, lambda g: diagram_defect_0(
        SampledFunction.from_closure(g, lambda s, t, p: np.sin(s) * (1 + 0.3 * p.coord))))
    assert all(3.5 <= r <= 4.5 for r in _ratios(d))


def test_diagram0_t_dependent_field_does_not_commute():
    # Phi is conjugate-linear, so the two routes differ by 2 Phi(X_t) in the limit
    fn = lambda g: diagram_defect_0(SampledFunction.from_closure(  # noqa: E731
        g, lambda s, t, p: np.cos(2 * math.pi * t) + 0 * s, points=[SpherePoint(0j)]))
    gaps = [abs(x - 4 * math.pi) for x in _levels(GRID, fn, 4)]
    assert gaps[-1] < 2e-2 and all(3.0 <= r <= 5.0 for r in _ratios(gaps))


def test_diagram1_order_two():
    fn = lambda s, t, p: np.sin(s) * np.cos(2 * math.pi * t) * np.real(p.coord) * abs(p.coord) ** 2  # noqa: E731
    d = _levels(GRID, lambda g: diagram_defect_1(SampledFunction.from_closure(g, fn)))
    assert all(3.5 <= r <= 4.5 for r in _ratios(d))


def test_diagram1_trivial_cases():
    assert diagram_defect_1(SampledFunction.from_closure(GRID, lambda s, t, p: 2.0 + 0 * s)) == 0.0
    holo = SampledFunction.from_closure(GRID, lambda s, t, p: (s + 1j * t) * np.real(p.coord), t_periodic=False)
    assert diagram_defect_1(holo) < 1e-6  # roundoff of the M-direction step


def test_exact_perturbation_zero():
    pa, pb, defect = exact_perturbation_two_ways(SampledFunction.from_closure(GRID, lambda s, t, p: 0 * s))
    assert defect == 0.0 and pa.sup() == 0.0 and pb.sup() == 0.0


def test_exact_perturbation_order_two():
    spec = PerturbationSpec(Bump(-2.0, 2.0, 1.0), 1.0)
    fn = lambda s, t, p: 1j * exact_potential(s, p, spec) + 0 * t  # noqa: E731
    d = _levels(CylinderGrid(-3, 3, 65, 8), lambda g: exact_perturbation_two_ways(SampledFunction.from_closure(g, fn))[2])
    assert all(3.5 <= r <= 4.5 for r in _ratios(d))


def test_default_points_touch_both_charts():
    charts = {p.chart for p in default_points()}
    assert len(charts) == 2
