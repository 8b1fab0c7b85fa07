"""Discrete perturbed Cauchy-Riemann operator on the cylinder and its Newton solver.

In chart ``Z`` the equation is ``u_s + i u_t + 4 lam psi(s) u = 0``; writing
``w = 1/u`` turns it into ``w_s + i w_t - 4 lam psi(s) w = 0`` in chart ``W``.
Rows ``0`` and ``n_s - 1`` carry Dirichlet data and are never updated.

The operator is discretised with the box scheme: each cell of the grid gets
one residual built from its four corners, written in the chart of the corner
closest to that chart's origin.  Unlike central differences the box scheme
has no odd-even parasitic mode in ``s``.  Such a mode would otherwise soak up
the surplus boundary data and leave near-null vectors wherever the chart
changes.

Residuals are measured with the sphere metric, ``|r| / (1 + |c|^2)`` at the
cell centre.  This is the length of the tangent vector ``r``, whichever chart
the cell is carried in.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ChartTearingError, SolverBreakdown
from .grid import TEAR_LIMIT, MapSample
from .hamiltonian import PerturbationSpec


def _corners(u: MapSample):
    """Chart data of the four corners of every cell, in the order (j,l), (j+1,l), (j,l+1), (j+1,l+1)."""
    c, ch = u.coord, u.chart
    c_r, ch_r = np.roll(c, -1, axis=1), np.roll(ch, -1, axis=1)
    return ((c[:-1], ch[:-1]), (c[1:], ch[1:]), (c_r[:-1], ch_r[:-1]), (c_r[1:], ch_r[1:]))


def cell_charts(u: MapSample) -> np.ndarray:
    """Chart of each cell: that of its corner with the smallest coordinate."""
    corners = _corners(u)
    mags = np.stack([np.abs(c) for c, _ in corners])
    charts = np.stack([ch for _, ch in corners])
    pick = np.argmin(mags, axis=0)
    return np.take_along_axis(charts, pick[None], axis=0)[0]


def _in_cell_chart(u: MapSample, cell_chart: np.ndarray, check: bool = True):
    """Corner values converted into the cell chart, plus their derivatives wrt the corners' own coordinates."""
    values, factors = [], []
    for c, ch in _corners(u):
        same = ch == cell_chart
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.where(same, c, 1.0 / np.where(same, 1.0, c))
            fac = np.where(same, 1.0 + 0j, -1.0 / np.where(same, 1.0, c) ** 2)
        if check and not same.all():
            bad = ~np.isfinite(val) | (np.abs(val) > TEAR_LIMIT)
            if bad.any():
                j, l = np.argwhere(bad)[0]
                raise ChartTearingError(f"cell ({j}, {l}) spans a tear")
        values.append(val)
        factors.append(fac)
    return values, factors


def _cell_potential(u: MapSample, spec: PerturbationSpec, cell_chart: np.ndarray) -> np.ndarray:
    s_mid = 0.5 * (u.grid.s[:-1] + u.grid.s[1:])
    return np.where(cell_chart, -1.0, 1.0) * spec.strength(s_mid)[:, None]


# stencil weights of the corners for d/ds, d/dt and the cell average
_WS = np.array([-0.5, 0.5, -0.5, 0.5])
_WT = np.array([-0.5, -0.5, 0.5, 0.5])


def residual(u: MapSample, spec: PerturbationSpec) -> np.ndarray:
    """Box-scheme residual at every cell centre, shape ``(n_s - 1, n_t)``.

    Cell ``(j, l)`` has corners ``(j, l), (j+1, l), (j, l+1), (j+1, l+1)``
    with ``t`` wrapping.  The residual is written in the cell's chart.
    """
    cell_chart = cell_charts(u)
    vals, _ = _in_cell_chart(u, cell_chart)
    hs, ht = u.grid.h_s, u.grid.h_t
    d_s = sum(w * v for w, v in zip(_WS, vals)) / hs
    d_t = sum(w * v for w, v in zip(_WT, vals)) / ht
    mean = 0.25 * sum(vals)
    return d_s + 1j * d_t + _cell_potential(u, spec, cell_chart) * mean


def cell_weights(u: MapSample) -> np.ndarray:
    """``1 / (1 + |c|^2)`` at each cell centre, which turns chart residuals into sphere lengths."""
    cell_chart = cell_charts(u)
    vals, _ = _in_cell_chart(u, cell_chart, check=False)
    return 1.0 / (1.0 + np.abs(0.25 * sum(vals)) ** 2)


def residual_norm(u: MapSample, spec: PerturbationSpec) -> float:
    return float((np.abs(residual(u, spec)) * cell_weights(u)).max())


def _coefficients(u: MapSample, spec: PerturbationSpec):
    cell_chart = cell_charts(u)
    _, factors = _in_cell_chart(u, cell_chart)
    pot = _cell_potential(u, spec, cell_chart)
    hs, ht = u.grid.h_s, u.grid.h_t
    return [(ws / hs + 1j * wt / ht + 0.25 * pot) * f for ws, wt, f in zip(_WS, _WT, factors)]


def _full_direction(u: MapSample, direction) -> np.ndarray:
    n_s, n_t = u.grid.shape
    direction = np.asarray(direction, dtype=complex)
    v = np.zeros((n_s, n_t), dtype=complex)
    if direction.shape == (n_s - 2, n_t):
        v[1:-1] = direction
    elif direction.shape == (n_s, n_t):
        v[1:-1] = direction[1:-1]
    else:
        raise ValueError(f"direction has shape {direction.shape}")
    return v


def linearization_apply(u: MapSample, spec: PerturbationSpec, direction: np.ndarray) -> np.ndarray:
    """Derivative of :func:`residual` at ``u`` along ``direction``.

    ``direction`` is a per-node chart vector, on interior rows only or on the
    full grid (boundary rows are then ignored, since they are fixed).
    """
    v = _full_direction(u, direction)
    v_r = np.roll(v, -1, axis=1)
    corners = (v[:-1], v[1:], v_r[:-1], v_r[1:])
    return sum(c * d for c, d in zip(_coefficients(u, spec), corners))


def jacobian_matrix(u: MapSample, spec: PerturbationSpec) -> sp.csr_matrix:
    """Sparse matrix of :func:`linearization_apply`: cells (row-major) by interior nodes (row-major)."""
    n_s, n_t = u.grid.shape
    cells = np.arange((n_s - 1) * n_t).reshape(n_s - 1, n_t)
    node = np.full((n_s, n_t), -1)
    node[1:-1] = np.arange((n_s - 2) * n_t).reshape(n_s - 2, n_t)
    node_r = np.roll(node, -1, axis=1)
    targets = (node[:-1], node[1:], node_r[:-1], node_r[1:])
    rows, cols, vals = [], [], []
    for coef, tgt in zip(_coefficients(u, spec), targets):
        keep = tgt >= 0
        rows.append(cells[keep])
        cols.append(tgt[keep])
        vals.append(coef[keep])
    shape = ((n_s - 1) * n_t, (n_s - 2) * n_t)
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=shape)


@dataclass
class SolveReport:
    iterations: int
    residual_history: list[float]
    converged: bool
    final_residual: float
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "residual_history": list(self.residual_history),
            "converged": self.converged,
            "final_residual": self.final_residual,
            "message": self.message,
        }


def least_squares_step(mat: sp.csr_matrix, rhs: np.ndarray, weights: np.ndarray, method: str = "direct",
                       tol: float = 1e-12) -> np.ndarray:
    """Minimiser of ``|W (mat x - rhs)|_2`` with ``W = diag(weights)``.

    ``direct`` factorises the normal equations with a sparse LU; ``lsqr`` runs
    the Krylov least-squares iteration on the weighted system.
    """
    wmat = sp.diags(weights) @ mat
    wrhs = weights * rhs
    if method == "direct":
        normal = (wmat.conj().T @ wmat).tocsc()
        try:
            lu = spla.splu(normal, permc_spec="MMD_AT_PLUS_A")
        except RuntimeError as exc:
            raise SolverBreakdown(f"discrete operator is singular: {exc}") from exc
        x = lu.solve(wmat.conj().T @ wrhs)
    elif method == "lsqr":
        out = spla.lsqr(wmat, wrhs, atol=tol, btol=tol, iter_lim=20 * mat.shape[1])
        if out[1] not in (1, 2, 4, 5):
            raise SolverBreakdown(f"lsqr stopped with code {out[1]}")
        x = out[0]
    else:
        raise ValueError(f"unknown linear solver {method!r}")
    if not np.all(np.isfinite(x)):
        raise SolverBreakdown("linear solve produced non-finite values")
    return x


def _merit(u: MapSample, spec: PerturbationSpec) -> float:
    return float(np.linalg.norm(residual(u, spec) * cell_weights(u)))


def newton_solve(u0: MapSample, spec: PerturbationSpec, tol: float = 1e-8, max_iter: int = 20,
                 linear_solver: str = "direct", max_halvings: int = 8,
                 min_iter: int = 0) -> tuple[MapSample, SolveReport]:
    """Gauss-Newton iteration on the interior nodes of ``u0``, boundary rows held fixed.

    The box scheme has one more row of cells than there are interior rows, so
    each step solves a least-squares problem weighted by the sphere metric.
    A step is accepted once it lowers that weighted 2-norm, halving it
    otherwise; chart tags are renormalised after every step.  Convergence is
    judged on the sup norm (:func:`residual_norm`), which is also what
    ``residual_history`` records.  ``min_iter`` forces steps even when the
    start already meets ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    u = u0.normalized()
    norm = residual_norm(u, spec)
    merit = _merit(u, spec)
    history = [norm]
    iterations = 0
    message = ""
    n_s, n_t = u.grid.shape
    while iterations < max_iter and (norm > tol or iterations < min_iter):
        r = residual(u, spec)
        step = least_squares_step(jacobian_matrix(u, spec), -r.ravel(), cell_weights(u).ravel(), linear_solver)
        step = step.reshape(n_s - 2, n_t)
        scale = 1.0
        for _ in range(max_halvings + 1):
            trial = u.copy()
            trial.coord[1:-1] = u.coord[1:-1] + scale * step
            trial = trial.normalized()
            try:
                trial_merit = _merit(trial, spec)
            except ChartTearingError:
                trial_merit = np.inf
            if trial_merit < merit:
                break
            scale *= 0.5
        else:
            message = "line search failed to reduce the residual"
            break
        u, merit = trial, trial_merit
        norm = residual_norm(u, spec)
        iterations += 1
        history.append(norm)
    converged = norm <= tol
    if not converged and not message:
        message = f"no convergence after {iterations} iterations"
    return u, SolveReport(iterations, history, converged, norm, message)


@dataclass
class HomotopyStage:
    lam: float
    sample: MapSample
    area: float
    report: SolveReport
    tol: float = float("nan")


@dataclass
class HomotopyResult:
    stages: list[HomotopyStage] = field(default_factory=list)
    failed_index: int | None = None

    @property
    def ok(self) -> bool:
        return self.failed_index is None

    def areas(self) -> list[float]:
        return [st.area for st in self.stages]


AUTO_TOL_FACTOR = 10.0


def auto_tolerance(family, grid) -> float:
    """Ten times the discrete residual of the sampled closed-form family on ``grid``."""
    return AUTO_TOL_FACTOR * residual_norm(family.sample(grid), family.effective_spec())


def _continue_stage(current: MapSample, family, lam_from: float, lam_to: float, tol, max_iter: int,
                    linear_solver: str, depth: int):
    """Newton-solve at ``lam_to`` from the solution at ``lam_from``, bisecting the step on failure."""
    stage_family = family.with_lambda(lam_to)
    stage_tol = auto_tolerance(stage_family, current.grid) if tol is None else tol
    guess = current.with_boundary_from(stage_family.sample(current.grid))
    try:
        solved, report = newton_solve(guess, stage_family.spec, stage_tol, max_iter, linear_solver, min_iter=1)
    except (SolverBreakdown, ChartTearingError) as exc:
        solved, report = guess, SolveReport(0, [], False, float("nan"), str(exc))
    if report.converged or depth == 0 or lam_from == lam_to:
        return solved, report, stage_tol
    mid = 0.5 * (lam_from + lam_to)
    half, half_report, _ = _continue_stage(current, family, lam_from, mid, tol, max_iter, linear_solver, depth - 1)
    if not half_report.converged:
        return solved, report, stage_tol
    solved, report, stage_tol = _continue_stage(half, family, mid, lam_to, tol, max_iter, linear_solver, depth - 1)
    report.message = (report.message + " (step bisected)").strip()
    return solved, report, stage_tol


def homotopy_continue(start: MapSample, family, schedule, tol: float | None = None, max_iter: int = 20,
                      linear_solver: str = "direct", max_bisections: int = 4) -> HomotopyResult:
    """Solve along ``schedule``, each stage starting from the previous solution.

    The boundary rows at each ``lam`` are taken from ``family.with_lambda(lam)``
    and every stage takes at least one Newton step.  A stage that fails is
    retried through intermediate values of ``lam`` (up to ``max_bisections``
    halvings), which are not reported.  With ``tol=None`` each stage uses
    :func:`auto_tolerance` of its own family.  Stops at the first stage that
    still fails and records its index.
    """
    from .functionals import symplectic_area

    schedule = [float(x) for x in schedule]
    if not schedule:
        raise ValueError("empty schedule")
    if any(not 0.0 <= x <= 1.0 for x in schedule):
        raise ValueError("schedule values must lie in [0, 1]")
    steps = np.diff(schedule)
    if not (np.all(steps >= 0) or np.all(steps <= 0)):
        raise ValueError("schedule must be monotone")
    result = HomotopyResult()
    current = start
    lam_prev = schedule[0]
    for i, lam in enumerate(schedule):
        solved, report, stage_tol = _continue_stage(current, family, lam_prev, lam, tol, max_iter,
                                                    linear_solver, max_bisections)
        area = symplectic_area(solved).area if report.converged else float("nan")
        result.stages.append(HomotopyStage(lam, solved, area, report, stage_tol))
        if not report.converged:
            result.failed_index = i
            break
        current, lam_prev = solved, lam
    return result
