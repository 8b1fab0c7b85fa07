"""Closed-form solutions of the perturbed equation on the cylinder.

Both families are written as ``u = exp(L(s, t))`` and evaluated from the
exponent, so points far out towards either pole never overflow.

* ``PROPERLY_PERTURBED``: ``L = -4 lam Psi(s) + 2 pi k (s + i t)`` with
  ``Psi(s) = int_{-inf}^s psi``.  It solves ``u_s + i u_t + 4 lam psi u = 0``.
* ``HOFER_SALAMON``: ``L = 4 tau s + 2 pi k (s + i t)`` for a constant profile
  ``tau``.  Its area is ``pi k`` when ``pi k + 2 tau > 0``.  This map solves the
  equation with the constant profile ``-tau``; :func:`residual_of_family`
  measures it against that profile.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidFamilyError
from .grid import CylinderGrid, MapSample, charts_from_log
from .hamiltonian import Constant, PerturbationSpec
from .sphere import Chart, SpherePoint


class FamilyKind(enum.Enum):
    PROPERLY_PERTURBED = "properly-perturbed"
    HOFER_SALAMON = "hofer-salamon"


@dataclass(frozen=True)
class SolutionFamily:
    k: int
    spec: PerturbationSpec
    kind: FamilyKind = FamilyKind.PROPERLY_PERTURBED

    @property
    def tau(self) -> float:
        if not isinstance(self.spec.psi, Constant):
            raise InvalidFamilyError("only a constant profile has a tau")
        return self.spec.lam * self.spec.psi.tau

    def with_lambda(self, lam: float) -> "SolutionFamily":
        return SolutionFamily(self.k, self.spec.with_lambda(lam), self.kind)

    def log_value(self, s, t):
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        winding = 2 * math.pi * self.k * (s + 1j * t)
        if self.kind is FamilyKind.HOFER_SALAMON:
            return 4 * self.tau * s + winding
        return -4 * self.spec.lam * self.spec.psi.cumulative(s) + winding

    @property
    def degree(self) -> int | None:
        """Degree of the map extended over both ends.

        The holomorphic-type family is ``z -> c z^k`` near the ends, which has
        degree ``|k|``.  No degree is assigned to the constant-profile family.
        """
        if self.kind is FamilyKind.HOFER_SALAMON:
            return None
        return abs(self.k)

    def expected_area(self) -> float:
        if self.kind is FamilyKind.HOFER_SALAMON:
            return math.pi * self.k
        return math.pi * abs(self.k)

    def effective_spec(self) -> PerturbationSpec:
        """The profile the family actually solves against."""
        if self.kind is FamilyKind.HOFER_SALAMON:
            return PerturbationSpec(Constant(-self.tau), 1.0)
        return self.spec

    def sample(self, grid: CylinderGrid) -> MapSample:
        require_valid(self)
        S, T = grid.mesh()
        out = MapSample.from_log(grid, self.log_value(S, T), degree=self.degree)
        out.meta["family"] = self.kind.value
        return out


def validity(family: SolutionFamily) -> bool:
    if family.kind is FamilyKind.HOFER_SALAMON:
        if not isinstance(family.spec.psi, Constant):
            return False
        return math.pi * family.k + 2 * family.tau > 0
    return family.spec.properly_exact


def require_valid(family: SolutionFamily):
    if not validity(family):
        raise InvalidFamilyError(f"{family.kind.value} family with k={family.k} is not valid")


def evaluate(family: SolutionFamily, s: float, t: float) -> SpherePoint:
    require_valid(family)
    coord, chart = charts_from_log(np.asarray(family.log_value(s, t)))
    return SpherePoint(complex(coord), Chart.W if bool(chart) else Chart.Z)


def residual_of_family(family: SolutionFamily, grid: CylinderGrid) -> float:
    """Sup over interior nodes of the discrete residual of the sampled family."""
    from .solver import residual_norm

    return residual_norm(family.sample(grid), family.effective_spec())
