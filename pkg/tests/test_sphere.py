import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcrlab.errors import ChartError
from pcrlab.grid import CylinderGrid, MapSample
from pcrlab.sphere import (
    Chart,
    SpherePoint,
    TangentVector,
    antilinear_defect,
    chart_switch,
    fs_area_density,
    fs_inner,
    fs_omega,
    phi_coefficient,
    phi_inverse,
    phi_map,
    theta_invariance_defect,
)

finite = st.floats(-3, 3, allow_nan=False)
vectors = st.builds(complex, finite, finite)


@st.composite
def overlap_points(draw):
    r = draw(st.floats(0.5, 2.0))
    theta = draw(st.floats(0, 2 * math.pi))
    return r * cmath.exp(1j * theta)


def test_area_density_examples():
    assert fs_area_density(SpherePoint(0j), 1, 1j) == 1.0
    assert fs_area_density(SpherePoint(1 + 0j), 1, 1j) == 0.25
    z, a, b = 4.0 + 0j, 1.0 + 0.3j, -0.2 + 1j
    w = SpherePoint(0.25 + 0j, Chart.W)
    lhs = fs_area_density(SpherePoint(z), a, b)
    rhs = fs_area_density(w, -a / z**2, -b / z**2)
    assert abs(lhs - rhs) < 1e-12


def test_inner_examples():
    o = SpherePoint(0j)
    one = SpherePoint(1 + 0j)
    assert fs_inner(o, TangentVector(o, 1), TangentVector(o, 1)) == 1.0
    assert fs_inner(o, TangentVector(o, 1), TangentVector(o, 1j)) == 0.0
    assert fs_inner(one, TangentVector(one, 1), TangentVector(one, 1)) == 0.25


def test_phi_examples():
    o, one = SpherePoint(0j), SpherePoint(1 + 0j)
    assert phi_map(o, TangentVector(o, 1), TangentVector(o, 1)) == pytest.approx(-1j, abs=1e-15)
    assert phi_map(o, TangentVector(o, 1j), TangentVector(o, 1)) == pytest.approx(-1, abs=1e-15)
    assert phi_map(one, TangentVector(one, 1), TangentVector(one, 1)) == pytest.approx(-0.25j, abs=1e-15)


def test_chart_switch_examples():
    assert chart_switch(SpherePoint(4 + 0j)) == SpherePoint(0.25 + 0j, Chart.W)
    assert chart_switch(SpherePoint(0.25 + 0j, Chart.W)) == SpherePoint(4 + 0j, Chart.Z)
    with pytest.raises(ChartError):
        chart_switch(SpherePoint(0j))


def test_from_complex_picks_chart():
    assert SpherePoint.from_complex(1.5).chart is Chart.Z
    far = SpherePoint.from_complex(10j)
    assert far.chart is Chart.W and abs(far.coord - 1 / 10j) < 1e-15
    assert SpherePoint.from_complex(complex(np.inf, 0)) == SpherePoint(0j, Chart.W)


@settings(max_examples=300, deadline=None)
@given(overlap_points(), vectors, vectors)
def test_chart_consistency(z, a, b):
    p = SpherePoint(z)
    q = chart_switch(p)
    X, Y = TangentVector(p, a), TangentVector(p, b)
    Xq, Yq = X.in_chart(Chart.W), Y.in_chart(Chart.W)
    scale = max(1.0, abs(a) * abs(b))
    assert abs(fs_area_density(p, a, b) - fs_area_density(q, Xq.value, Yq.value)) <= 1e-10 * scale
    assert abs(fs_inner(p, X, Y) - fs_inner(q, Xq, Yq)) <= 1e-10 * scale
    assert abs(abs(phi_map(p, X, Y)) - abs(phi_map(q, Xq, Yq))) <= 1e-10 * scale


@settings(max_examples=300, deadline=None)
@given(overlap_points(), vectors, vectors, st.booleans())
def test_phi_conjugate_linear(z, a, b, in_w):
    p = SpherePoint(z)
    if in_w:
        p = chart_switch(p)
    X, JX, Y = TangentVector(p, a), TangentVector(p, 1j * a), TangentVector(p, b)
    assert abs(phi_map(p, JX, Y) + 1j * phi_map(p, X, Y)) <= 1e-12 * max(1.0, abs(a) * abs(b))


@settings(max_examples=200, deadline=None)
@given(overlap_points(), vectors, vectors)
def test_metric_is_omega_with_J(z, a, b):
    p = SpherePoint(z)
    assert abs(fs_inner(p, TangentVector(p, a), TangentVector(p, b))
               - fs_omega(p, TangentVector(p, a), TangentVector(p, 1j * b))) <= 1e-12 * max(1.0, abs(a * b))


@settings(max_examples=200, deadline=None)
@given(overlap_points(), vectors, vectors)
def test_phi_coefficient_matches_phi_map(z, a, b):
    p = SpherePoint(z)
    c = phi_coefficient(z, a)
    assert abs(c * b - phi_map(p, TangentVector(p, a), TangentVector(p, b))) <= 1e-12 * max(1.0, abs(a * b))
    assert abs(phi_inverse(z, c) - a) <= 1e-12 * max(1.0, abs(a))


@settings(max_examples=200, deadline=None)
@given(overlap_points(), vectors, vectors)
def test_theta_invariance(z, du, v):
    assert theta_invariance_defect(SpherePoint(z), du, v) <= 1e-12 * max(1.0, abs(du * v) ** 2)


def _antipodal_of_u0(grid):
    S, T = grid.mesh()
    return MapSample.from_log(grid, 1j * math.pi - 2 * math.pi * (S - 1j * T))


def test_antipodal_defect_order_two():
    grid = CylinderGrid(-1, 1, 17, 16)
    defects = []
    for _ in range(4):
        defects.append(antilinear_defect(_antipodal_of_u0(grid)))
        grid = grid.refined()
    ratios = [a / b for a, b in zip(defects, defects[1:])]
    assert all(3.5 <= r <= 4.5 for r in ratios), ratios


def test_holomorphic_map_has_small_dbar():
    coarse, fine = CylinderGrid(-1, 1, 33, 32), CylinderGrid(-1, 1, 65, 64)
    d = []
    for g in (coarse, fine):
        S, T = g.mesh()
        d.append(antilinear_defect(MapSample.from_log(g, 2 * math.pi * (S + 1j * T)), mode="holo"))
    assert d[1] < d[0] / 3.5
