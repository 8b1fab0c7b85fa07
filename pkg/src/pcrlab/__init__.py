"""Numerical lab for perturbed Cauchy-Riemann maps from the cylinder to the sphere."""

from .errors import (
    ChartError,
    ChartTearingError,
    ConfigError,
    GridTooSmallError,
    InvalidFamilyError,
    NotProperlyExactError,
    SolverBreakdown,
)
from .grid import CylinderGrid, MapSample, boundary_degree, chart_derivatives, winding_number
from .sphere import (
    Chart,
    SpherePoint,
    TangentVector,
    antilinear_defect,
    chart_switch,
    fs_area_density,
    fs_inner,
    fs_omega,
    phi_map,
    theta_form,
)
from .hamiltonian import (
    Bump,
    Constant,
    PerturbationSpec,
    PsiProfile,
    Tabulated,
    exact_potential,
    grad_hamiltonian,
    hamiltonian,
    perturbation_form,
    verify_proper_exactness,
)
from .crcalc import (
    OneFormSample,
    SampledFunction,
    dbar_sigma,
    del_M,
    diagram_defect_0,
    diagram_defect_1,
    exact_perturbation_two_ways,
)
from .families import FamilyKind, SolutionFamily, evaluate, residual_of_family, validity
from .solver import (
    HomotopyResult,
    SolveReport,
    homotopy_continue,
    jacobian_matrix,
    linearization_apply,
    newton_solve,
    residual,
    residual_norm,
)
from .functionals import (
    AreaReport,
    EpsilonSequence,
    epsilon_norm,
    epsilon_partial_sums,
    gradient_duality_defect,
    graph_energy,
    symplectic_area,
    taming_margin,
)
from .io import load_map_sample, save_map_sample
from .lab import ExperimentConfig, ExperimentReport, emit_plot_data, run

__version__ = "0.1.0"
