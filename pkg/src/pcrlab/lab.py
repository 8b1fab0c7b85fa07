"""Named experiments, their configs and reports.

A config is a nested mapping (YAML on disk).  ``run`` turns it into a report
whose rows each carry the tolerance they were judged against; the verdict
passes only if every row does.  Reports carry no timestamps, so a fixed config
and seed give byte-identical output.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .crcalc import SampledFunction, diagram_defect_0, diagram_defect_1, exact_perturbation_two_ways
from .errors import ConfigError, InvalidFamilyError, SolverBreakdown
from .families import FamilyKind, SolutionFamily, residual_of_family, validity
from .functionals import gradient_duality_defect, graph_energy, symplectic_area, taming_margin
from .grid import CylinderGrid, MapSample
from .hamiltonian import Bump, Constant, PerturbationSpec, PsiProfile, exact_potential, verify_proper_exactness
from .io import read_yaml
from .solver import homotopy_continue
from .sphere import antilinear_defect

EXPERIMENTS = (
    "area-constant-psi",
    "positivity-sweep",
    "homotopy-invariance",
    "identity-suite",
    "taming-study",
    "convergence-study",
)
RANDOMIZED = {"taming-study"}
SERIES = ("area-vs-lambda", "density-vs-s", "defect-vs-h", "area-vs-case", "area-vs-h")

DEFAULT_TOLERANCES = {
    "area": 1e-3,
    "drift": 1e-3,
    "ratio_low": 3.5,
    "ratio_high": 4.5,
    "duality": 1e-8,
    "energy": 1e-2,
}


@dataclass
class GridConfig:
    half_length: float = 6.0
    n_s: int = 400
    n_t: int = 64

    def build(self) -> CylinderGrid:
        return CylinderGrid.symmetric(self.half_length, self.n_s, self.n_t)


@dataclass
class FamilyConfig:
    k: int = 1
    kind: str = "properly-perturbed"
    psi: dict = field(default_factory=lambda: {"kind": "bump", "support": [-1.0, 1.0], "mass": 1.0})
    lam: float = 1.0
    schedule: list = field(default_factory=lambda: [0.0, 0.25, 0.5, 0.75, 1.0])

    def profile(self) -> PsiProfile:
        return PsiProfile.from_dict(self.psi)

    def build(self, k: int | None = None, psi: PsiProfile | None = None, lam: float | None = None) -> SolutionFamily:
        spec = PerturbationSpec(self.profile() if psi is None else psi, self.lam if lam is None else lam)
        return SolutionFamily(self.k if k is None else k, spec, FamilyKind(self.kind))


@dataclass
class ExperimentConfig:
    experiment: str
    grid: GridConfig = field(default_factory=GridConfig)
    family: FamilyConfig = field(default_factory=FamilyConfig)
    tolerances: dict = field(default_factory=dict)
    seed: int | None = None
    output_dir: str = "results"
    sweep: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    workers: int = 1

    def tol(self, name: str) -> float:
        return float(self.tolerances.get(name, DEFAULT_TOLERANCES[name]))

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose one of {', '.join(EXPERIMENTS)}")
        for name, value in self.tolerances.items():
            if name not in DEFAULT_TOLERANCES:
                raise ConfigError(f"unknown tolerance {name!r}")
            if not float(value) > 0:
                raise ConfigError(f"tolerance {name} must be positive")
        if self.experiment in RANDOMIZED and self.seed is None:
            raise ConfigError(f"{self.experiment} is randomized and needs a seed")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        try:
            self.grid.build()
            self.family.profile()
            FamilyKind(self.family.kind)
            PerturbationSpec(Constant(0.0), self.family.lam)
        except (ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"invalid grid or family section: {exc}") from exc
        sched = [float(x) for x in self.family.schedule]
        if not sched or any(not 0 <= x <= 1 for x in sched):
            raise ConfigError("schedule values must lie in [0, 1]")
        steps = np.diff(sched)
        if not (np.all(steps >= 0) or np.all(steps <= 0)):
            raise ConfigError("schedule must be monotone")
        return self

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {"experiment", "grid", "family", "tolerances", "seed", "output_dir", "sweep", "params", "workers"}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(extra))}")
        if "experiment" not in data:
            raise ConfigError("config needs an 'experiment' key")
        try:
            cfg = cls(
                experiment=str(data["experiment"]),
                grid=GridConfig(**(data.get("grid") or {})),
                family=FamilyConfig(**(data.get("family") or {})),
                tolerances=dict(data.get("tolerances") or {}),
                seed=None if data.get("seed") is None else int(data["seed"]),
                output_dir=str(data.get("output_dir", "results")),
                sweep=dict(data.get("sweep") or {}),
                params=dict(data.get("params") or {}),
                workers=int(data.get("workers", 1)),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed config: {exc}") from exc
        return cfg.validate()

    def to_dict(self) -> dict:
        return asdict(self)


def load_config(path) -> ExperimentConfig:
    return ExperimentConfig.from_dict(read_yaml(path))


@dataclass
class ExperimentReport:
    config: dict
    rows: list = field(default_factory=list)
    series: dict = field(default_factory=dict)

    @property
    def verdict(self) -> bool:
        return bool(self.rows) and all(bool(r["pass"]) for r in self.rows)

    def to_dict(self) -> dict:
        return {"config": self.config, "rows": self.rows, "series": self.series,
                "verdict": "pass" if self.verdict else "fail"}

    def to_json(self) -> str:
        return json.dumps(_plain(self.to_dict()), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        keys = sorted({k for row in self.rows for k in row})
        buf = _io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({k: _plain(row.get(k, "")) for k in keys})
        return buf.getvalue()

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        data = json.loads(text)
        return cls(data.get("config", {}), data.get("rows", []), data.get("series", {}))

    def write(self, out_dir) -> tuple[Path, Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        js, cs = out_dir / "report.json", out_dir / "report.csv"
        js.write_text(self.to_json())
        cs.write_text(self.to_csv())
        return js, cs


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _ratio_row(name: str, hs, defects, low: float, high: float) -> dict:
    ratios = [a / b if b > 0 else float("inf") for a, b in zip(defects, defects[1:])]
    ok = bool(ratios) and all(low <= r <= high for r in ratios)
    return {"case": name, "h_s": list(hs), "defects": list(defects), "ratios": ratios,
            "tolerance": f"ratio in [{low}, {high}]", "pass": ok}


def _density_series(report) -> list:
    return [[float(s), float(d)] for s, d in zip(report.grid.s, report.band_density())]


# experiments ---------------------------------------------------------------

def _area_constant_psi(cfg: ExperimentConfig) -> ExperimentReport:
    rep = ExperimentReport(cfg.to_dict())
    tau = float(cfg.family.psi.get("tau", 0.0))
    family = SolutionFamily(cfg.family.k, PerturbationSpec(Constant(tau), 1.0), FamilyKind.HOFER_SALAMON)
    tol = cfg.tol("area")
    row = {"case": f"k={family.k},tau={tau}", "k": family.k, "tau": tau, "valid": validity(family),
           "expected": math.pi * family.k, "tolerance": tol}
    if not row["valid"]:
        row.update(area=float("nan"), error=float("nan"), tail_estimate=float("nan"), pass_=False)
        row["pass"] = row.pop("pass_")
        row["note"] = "family violates pi k + 2 tau > 0"
    else:
        area = symplectic_area(family.sample(cfg.grid.build()))
        err = abs(area.area - math.pi * family.k)
        row.update(area=area.area, error=err, tail_estimate=area.tail_estimate, tail_warning=area.tail_warning,
                   **{"pass": err <= tol})
        rep.series["density-vs-s"] = _density_series(area)
    rep.rows.append(row)
    return rep


def _sweep_case(args):
    cfg_dict, k, mass = args
    cfg = ExperimentConfig.from_dict(cfg_dict)
    grid = cfg.grid.build()
    psi = PsiProfile.from_dict({**cfg.family.psi, "mass": mass})
    family = cfg.family.build(k=k, psi=psi)
    schedule = [float(x) for x in cfg.family.schedule]
    try:
        result = homotopy_continue(family.with_lambda(schedule[0]).sample(grid), family, schedule)
    except (SolverBreakdown, InvalidFamilyError, ValueError) as exc:
        return {"k": k, "mass": mass, "area": float("nan"), "converged": False, "note": str(exc)}, []
    last = result.stages[-1]
    row = {"k": k, "mass": mass, "lam": last.lam, "area": last.area, "converged": result.ok,
           "iterations": sum(st.report.iterations for st in result.stages),
           "final_residual": last.report.final_residual, "solver_tol": last.tol}
    return row, [[k, mass, st.lam, st.area] for st in result.stages]


def _positivity_sweep(cfg: ExperimentConfig) -> ExperimentReport:
    rep = ExperimentReport(cfg.to_dict())
    ks = [int(k) for k in cfg.sweep.get("k", [-2, -1, 1, 2, 3])]
    masses = [float(m) for m in cfg.sweep.get("mass", [0.5, 1.0, 2.0])]
    tol = cfg.tol("area")
    jobs = [(cfg.to_dict(), k, m) for k in ks for m in masses]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_sweep_case, jobs))
    else:
        results = [_sweep_case(job) for job in jobs]
    curve = []
    for (row, stages), (_, k, m) in zip(results, jobs):
        row = {"case": f"k={k},mass={m}", **row, "tolerance": f"area >= -{tol}"}
        row["pass"] = bool(row["converged"]) and row["area"] >= -tol
        rep.rows.append(row)
        curve.extend(stages)
    rep.series["area-vs-case"] = [[r["k"], r["mass"], r["area"]] for r in rep.rows]
    rep.series["area-vs-lambda"] = curve
    return rep


def _homotopy_invariance(cfg: ExperimentConfig) -> ExperimentReport:
    rep = ExperimentReport(cfg.to_dict())
    grid = cfg.grid.build()
    family = cfg.family.build()
    schedule = [float(x) for x in cfg.family.schedule]
    result = homotopy_continue(family.with_lambda(schedule[0]).sample(grid), family, schedule)
    for st in result.stages:
        rep.rows.append({"case": f"lam={st.lam}", "lam": st.lam, "area": st.area,
                         "iterations": st.report.iterations, "final_residual": st.report.final_residual,
                         "tolerance": f"residual <= {st.tol}", "pass": st.report.converged})
    areas = result.areas()
    drift = max(areas) - min(areas) if result.ok else float("nan")
    tol = cfg.tol("drift")
    rep.rows.append({"case": "pairwise-drift", "drift": drift, "tolerance": tol,
                     "pass": result.ok and len(result.stages) == len(schedule) and drift <= tol})
    rep.series["area-vs-lambda"] = [[st.lam, st.area] for st in result.stages]
    if result.stages:
        rep.series["density-vs-s"] = _density_series(symplectic_area(result.stages[-1].sample))
    return rep


def identity_cases() -> dict:
    """The refinement studies behind the identity suite, as name -> (base grid, defect function)."""
    bump = PerturbationSpec(Bump(-2.0, 2.0, 1.0), 1.0)

    def vector_field(s, t, p):
        return np.sin(s) * (1.0 + 0.3 * p.coord)

    def scalar(s, t, p):
        return np.sin(s) * np.cos(2 * np.pi * t) * np.real(p.coord) * abs(p.coord) ** 2

    def potential(s, t, p):
        return 1j * exact_potential(s, p, bump) + 0.0 * t

    def antiholo(grid):
        S, T = grid.mesh()
        return MapSample.from_log(grid, math.log(1.0) + 1j * math.pi - 2 * math.pi * (S - 1j * T))

    return {
        "diagram_defect_0": (CylinderGrid(-2, 2, 17, 8),
                             lambda g: diagram_defect_0(SampledFunction.from_closure(g, vector_field))),
        "diagram_defect_1": (CylinderGrid(-2, 2, 17, 8),
                             lambda g: diagram_defect_1(SampledFunction.from_closure(g, scalar))),
        "exact_perturbation_two_ways": (CylinderGrid(-3, 3, 65, 8),
                                        lambda g: exact_perturbation_two_ways(SampledFunction.from_closure(g, potential))[2]),
        "verify_proper_exactness": (CylinderGrid(-3, 3, 65, 8), lambda g: verify_proper_exactness(bump, g)),
        "residual_of_family": (CylinderGrid(-3, 3, 101, 16),
                               lambda g: residual_of_family(SolutionFamily(1, PerturbationSpec(Bump(-1, 1, 1.0), 1.0)), g)),
        "antilinear_defect": (CylinderGrid(-1, 1, 17, 16), lambda g: antilinear_defect(antiholo(g))),
    }


def refinement_study(base: CylinderGrid, fn, levels: int = 4):
    grid, hs, defects = base, [], []
    for _ in range(levels):
        hs.append(grid.h_s)
        defects.append(float(fn(grid)))
        grid = grid.refined()
    return hs, defects


def _identity_suite(cfg: ExperimentConfig) -> ExperimentReport:
    rep = ExperimentReport(cfg.to_dict())
    levels = int(cfg.params.get("levels", 4))
    low, high = cfg.tol("ratio_low"), cfg.tol("ratio_high")
    curve = []
    for name, (base, fn) in identity_cases().items():
        hs, defects = refinement_study(base, fn, levels)
        rep.rows.append(_ratio_row(name, hs, defects, low, high))
        curve.extend([[name, h, d] for h, d in zip(hs, defects)])
    rep.series["defect-vs-h"] = curve
    spec = PerturbationSpec(Bump(-1, 1, 1.0), 1.0)
    dual = gradient_duality_defect(spec, int(cfg.params.get("duality_samples", 1000)), cfg.seed or 0)
    rep.rows.append({"case": "gradient_duality", "defect": dual, "tolerance": cfg.tol("duality"),
                     "pass": dual <= cfg.tol("duality")})
    grid = CylinderGrid.symmetric(8, 800, 64)
    n = float(cfg.params.get("N", 10.0))
    for degree, u in ((0, MapSample.from_complex(grid, 0.5 + 0.5j)),
                      (1, SolutionFamily(1, PerturbationSpec(Constant(0.0), 0.0)).sample(grid))):
        gap = graph_energy(u, n) - n - symplectic_area(u).area
        rep.rows.append({"case": f"energy_identity_degree_{degree}", "gap": gap, "tolerance": cfg.tol("energy"),
                         "pass": abs(gap) <= cfg.tol("energy")})
    return rep


def _taming_study(cfg: ExperimentConfig) -> ExperimentReport:
    rep = ExperimentReport(cfg.to_dict())
    spec = PerturbationSpec(cfg.family.profile(), cfg.family.lam)
    n_seeds = int(cfg.params.get("seeds", 10))
    samples = int(cfg.params.get("samples", 10_000))
    factor = float(cfg.params.get("N_factor", 1.1))
    length = 2 * cfg.grid.half_length
    probe = taming_margin(spec, 1.0, 1, cfg.seed, domain_length=length)
    n_value = factor * probe.n_threshold if probe.n_threshold > 0 else factor
    for i in range(n_seeds):
        seed = cfg.seed + i
        res = taming_margin(spec, n_value, samples, seed, domain_length=length)
        rep.rows.append({"case": f"seed={seed}", "seed": seed, "N": n_value, "f": res.f_bound,
                         "min_value": res.min_value, "tolerance": "min_value > 0", "pass": res.min_value > 0})
    return rep


def _convergence_study(cfg: ExperimentConfig) -> ExperimentReport:
    rep = ExperimentReport(cfg.to_dict())
    family = cfg.family.build()
    levels = int(cfg.params.get("levels", 4))
    hs, defects = refinement_study(cfg.grid.build(), lambda g: residual_of_family(family, g), levels)
    rep.rows.append(_ratio_row("residual_of_family", hs, defects, cfg.tol("ratio_low"), cfg.tol("ratio_high")))
    areas = []
    grid = cfg.grid.build()
    for _ in range(levels):
        areas.append([grid.h_s, symplectic_area(family.sample(grid)).area])
        grid = grid.refined()
    expected = family.expected_area()
    err = abs(areas[-1][1] - expected)
    rep.rows.append({"case": "area_on_finest_grid", "area": areas[-1][1], "expected": expected, "error": err,
                     "tolerance": cfg.tol("area"), "pass": err <= cfg.tol("area")})
    rep.series["defect-vs-h"] = [["residual_of_family", h, d] for h, d in zip(hs, defects)]
    rep.series["area-vs-h"] = areas
    return rep


_RUNNERS = {
    "area-constant-psi": _area_constant_psi,
    "positivity-sweep": _positivity_sweep,
    "homotopy-invariance": _homotopy_invariance,
    "identity-suite": _identity_suite,
    "taming-study": _taming_study,
    "convergence-study": _convergence_study,
}


def run(config: ExperimentConfig) -> ExperimentReport:
    config.validate()
    return _RUNNERS[config.experiment](config)


def emit_plot_data(report: ExperimentReport, what: str, path=None) -> str:
    """Tab-separated rows of the named series; also written to ``path`` when given."""
    if not report.rows and not report.series:
        raise ValueError("report is empty")
    if what not in report.series:
        available = ", ".join(sorted(report.series)) or "none"
        raise ValueError(f"report has no series {what!r} (available: {available})")
    rows = report.series[what]
    if not rows:
        raise ValueError(f"series {what!r} is empty")
    text = "".join("\t".join(_cell(v) for v in row) + "\n" for row in rows)
    if path is not None:
        Path(path).write_text(text)
    return text


def _cell(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)
