import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcrlab.errors import InvalidFamilyError
from pcrlab.families import FamilyKind, SolutionFamily, evaluate, residual_of_family, validity
from pcrlab.grid import CylinderGrid, MapSample
from pcrlab.hamiltonian import Bump, Constant, PerturbationSpec
from pcrlab.solver import residual_norm
from pcrlab.sphere import Chart

HS = FamilyKind.HOFER_SALAMON


def hs(k, tau):
    return SolutionFamily(k, PerturbationSpec(Constant(tau), 1.0), HS)


def test_evaluate_examples():
    p = evaluate(SolutionFamily(1, PerturbationSpec(Bump(-1, 1, 1.0), 0.0)), 0.0, 0.0)
    assert p.chart is Chart.Z and p.coord == 1
    m, s = 0.7, 1.3
    p = evaluate(SolutionFamily(1, PerturbationSpec(Bump(-1, 1, m), 1.0)), s, 0.0)
    assert p.to_complex() == pytest.approx(math.exp(-4 * m) * math.exp(2 * math.pi * s), rel=1e-10)
    assert evaluate(hs(-1, 2.0), 0.0, 0.0).coord == 1


def test_far_values_use_chart_w():
    p = evaluate(SolutionFamily(3, PerturbationSpec(Bump(-1, 1, 1.0), 1.0)), 40.0, 0.25)
    assert p.chart is Chart.W and abs(p.coord) < 1e-100


def test_validity_examples():
    assert not validity(hs(-1, 1.0))
    assert validity(hs(-1, 2.0))
    assert validity(hs(1, 0.0))
    assert not validity(SolutionFamily(1, PerturbationSpec(Constant(1.0), 1.0)))
    with pytest.raises(InvalidFamilyError):
        hs(-1, 1.0).sample(CylinderGrid(-1, 1, 9, 8))


def test_degree_bookkeeping():
    assert SolutionFamily(-2, PerturbationSpec(Bump(-1, 1, 1.0))).degree == 2
    assert hs(-1, 2.0).degree is None
    assert hs(-1, 2.0).expected_area() == pytest.approx(-math.pi)


def _orders(family, base, n=4):
    d, g = [], base
    for _ in range(n):
        d.append(residual_of_family(family, g))
        g = g.refined()
    return [a / b for a, b in zip(d, d[1:])]


def test_residual_order_two_holomorphic():
    assert all(3.5 <= r <= 4.5 for r in _orders(SolutionFamily(1, PerturbationSpec(Bump(-1, 1, 1.0), 0.0)),
                                                 CylinderGrid.symmetric(3, 101, 16)))


def test_residual_order_two_bump():
    assert all(3.5 <= r <= 4.5 for r in _orders(SolutionFamily(1, PerturbationSpec(Bump(-1, 1, 1.0), 1.0)),
                                                 CylinderGrid.symmetric(3, 101, 16)))


def test_residual_order_two_hofer_salamon():
    assert all(3.5 <= r <= 4.5 for r in _orders(hs(-1, 2.0), CylinderGrid.symmetric(3, 101, 16)))


def test_constant_zero_map_residual():
    g = CylinderGrid(-1, 1, 11, 8)
    assert residual_norm(MapSample.from_complex(g, 0j), PerturbationSpec(Bump(-1, 1, 1.0))) == 0.0


def test_holomorphic_outside_support():
    g = CylinderGrid(1.5, 3.0, 61, 32)
    fam = SolutionFamily(2, PerturbationSpec(Bump(-1, 1, 1.0), 1.0))
    # beyond the bump the family is a constant multiple of the holomorphic map
    z = fam.sample(g).to_complex()
    S, T = g.mesh()
    ratio = z / np.exp(4 * math.pi * (S + 1j * T))
    assert np.allclose(ratio, math.exp(-4.0), rtol=1e-10)
    assert residual_norm(fam.sample(g), PerturbationSpec(Bump(-1, 1, 1.0), 0.0)) < 1e-2


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 0.99), st.floats(-2.5, 2.5), st.floats(0, 1))
def test_lambda_continuity(lam, s, t):
    fam = SolutionFamily(1, PerturbationSpec(Bump(-1, 1, 1.0), lam))
    a = evaluate(fam, s, t).to_complex()
    b = evaluate(fam.with_lambda(lam + 0.01), s, t).to_complex()
    # d/dlam log u = -4 Psi(s), bounded by 4 for unit mass
    assert abs(b / a - 1) <= 0.05
