"""Named experiments reproducing the study's figures and parameter tables.

Every figure of the study is registered under a stable id (fig2 ... fig9d,
tableV_a ... tableV_c) as either a family of labeled runs or a parameter
sweep.  Measures are evaluated on the two-atom reduced state restricted to
the qubit levels; residual excited-state population and the top-Fock-level
occupation are reported alongside as diagnostics.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import correlations as corr
from . import dynamics, models
from .models import (
    LindbladModel,
    PhaseMismatch,
    PhaseMode,
    QUBIT_PAIR_LAYOUT,
    SchemeConfig,
    TRIPLET_BASIS,
)
from .qlinalg import ComplexOperator, DensityMatrix, partial_trace

THREADS_ENV = "LINDBLADLAB_THREADS"

SCHEMES = ("A_full", "A_effective", "B_full", "B_effective", "combined",
           "mismatch_A", "mismatch_B", "chi", "subspace")

QUBIT_IN_ATOM = np.array([0, 1])  # |0>, |1> are the first two atom levels


class ExperimentError(ValueError):
    """Invalid experiment specification or override."""


# ---------------------------------------------------------------------------
# named initial states

_QUBIT_KETS = {
    "00": models.KET_00,
    "01": models.KET_01,
    "10": models.KET_10,
    "11": models.KET_11,
    "psi_plus": models.PSI_PLUS,
    "psi_minus": models.PSI_MINUS,
    "phi_plus": models.PHI_PLUS,
    "phi_minus": models.PHI_MINUS,
}

_QUBIT_MIXES = {
    # weights on (phi_plus, phi_minus, psi_plus)
    "mix": ((0.1, models.PHI_PLUS), (0.1, models.PHI_MINUS),
            (0.8, models.PSI_PLUS)),
    # weights on (|00>, |11>, psi_plus)
    "mix1": ((0.1, models.KET_00), (0.1, models.KET_11),
             (0.8, models.PSI_PLUS)),
    "mix2": ((0.2, models.KET_00), (0.5, models.KET_11),
             (0.3, models.PSI_PLUS)),
}


def _qubit_pair_state(name: str) -> np.ndarray:
    if name in _QUBIT_KETS:
        v = _QUBIT_KETS[name]
        return np.outer(v, v.conj())
    if name in _QUBIT_MIXES:
        m = np.zeros((4, 4), dtype=complex)
        for w, v in _QUBIT_MIXES[name]:
            m += w * np.outer(v, v.conj())
        return m
    raise ExperimentError(
        f"unknown initial state {name!r}; known: "
        f"{sorted([*_QUBIT_KETS, *_QUBIT_MIXES])}")


def named_initial_state(name: str, layout) -> DensityMatrix:
    """A named two-qubit state lifted onto the given layout.

    Qubit states are embedded into the first two levels of each four-level
    atom and tensored with cavity vacua; on the symmetric 3-level subspace
    they are projected onto the triplet basis.
    """
    qubit = _qubit_pair_state(name)
    labels = layout.labels
    if labels == ("q1", "q2"):
        return DensityMatrix(ComplexOperator(qubit), layout)
    if labels == ("sym",):
        sub = TRIPLET_BASIS.conj().T @ qubit @ TRIPLET_BASIS
        tr = float(np.real(np.trace(sub)))
        if abs(tr - 1.0) > 1e-12:
            raise ExperimentError(
                f"state {name!r} is not supported on the symmetric subspace")
        return DensityMatrix(ComplexOperator(sub), layout)
    # full scheme: atom1 (x) atom2 (x) cavities
    d_atoms = 16
    atoms = np.zeros((d_atoms, d_atoms), dtype=complex)
    pos = np.array([a1 * 4 + a2 for a1 in QUBIT_IN_ATOM for a2 in QUBIT_IN_ATOM])
    atoms[np.ix_(pos, pos)] = qubit
    mat = atoms
    for lbl, dim in layout.factors:
        if lbl in ("atom1", "atom2"):
            continue
        vac = np.zeros((dim, dim), dtype=complex)
        vac[0, 0] = 1.0
        mat = np.kron(mat, vac)
    return DensityMatrix(ComplexOperator(mat), layout)


# ---------------------------------------------------------------------------
# observables

def reduced_qubit_state(state: DensityMatrix):
    """Two-qubit reduced state and the traced-away excited-state weight."""
    labels = state.layout.labels
    if labels == ("q1", "q2"):
        return state, 0.0
    if labels == ("sym",):
        m = TRIPLET_BASIS @ state.mat @ TRIPLET_BASIS.conj().T
        return DensityMatrix(ComplexOperator(m), QUBIT_PAIR_LAYOUT,
                             validate=False), 0.0
    atoms = partial_trace(state, {"atom1", "atom2"})
    pos = np.array([a1 * 4 + a2 for a1 in QUBIT_IN_ATOM for a2 in QUBIT_IN_ATOM])
    block = atoms.mat[np.ix_(pos, pos)]
    weight = float(np.real(np.trace(block)))
    excited = max(0.0, 1.0 - weight)
    if weight <= 0:
        raise dynamics.NumericalFailure("no population left on qubit levels")
    qubit = DensityMatrix(ComplexOperator(block / weight), QUBIT_PAIR_LAYOUT,
                          validate=False)
    return qubit, excited


def top_fock_population(state: DensityMatrix) -> float:
    """Largest top-Fock-level population over all cavity factors."""
    worst = 0.0
    for lbl, dim in state.layout.factors:
        if lbl.startswith("cav"):
            red = partial_trace(state, {lbl})
            worst = max(worst, float(np.real(red.mat[dim - 1, dim - 1])))
    return worst


_TARGET = models.target_state()

_POPULATION_KETS = {
    "pop_00": models.KET_00,
    "pop_01": models.KET_01,
    "pop_10": models.KET_10,
    "pop_11": models.KET_11,
    "pop_psi_plus": models.PSI_PLUS,
    "pop_psi_minus": models.PSI_MINUS,
    "pop_phi_plus": models.PHI_PLUS,
    "pop_phi_minus": models.PHI_MINUS,
}


def evaluate_observable(name: str, state: DensityMatrix) -> float:
    """One named measure of a trajectory sample (any supported layout)."""
    if name == "top_fock":
        return top_fock_population(state)
    qubit, excited = reduced_qubit_state(state)
    if name == "excited_pop":
        return excited
    if name in _POPULATION_KETS:
        return corr.population(qubit, _POPULATION_KETS[name])
    if name == "fidelity":
        return corr.super_fidelity(qubit, _TARGET)
    if name == "purity":
        return float(np.real(np.trace(qubit.mat @ qubit.mat)))
    if name == "mutual_information":
        return corr.mutual_information(qubit)
    if name == "concurrence":
        return corr.concurrence(qubit)
    if name in ("qd", "cc"):
        rep = corr.xstate_discord_cc(_sanitized_x(qubit))
        return rep.qd if name == "qd" else rep.cc
    raise ExperimentError(f"unknown observable {name!r}; known: "
                          f"{sorted(OBSERVABLES)}")


def _sanitized_x(qubit: DensityMatrix) -> DensityMatrix:
    """Zero the exactly-forbidden X-state entries that carry only round-off."""
    m = qubit.mat.copy()
    mask = np.zeros((4, 4), dtype=bool)
    for i, j in ((0, 0), (1, 1), (2, 2), (3, 3), (0, 3), (3, 0), (1, 2), (2, 1)):
        mask[i, j] = True
    off = float(np.max(np.abs(np.where(mask, 0.0, m))))
    if off > corr.X_STATE_TOL:
        raise dynamics.NumericalFailure(
            f"reduced state left the X form (off-element {off:.3e})")
    m[~mask] = 0.0
    m = 0.5 * (m + m.conj().T)
    m /= np.real(np.trace(m))
    return DensityMatrix(ComplexOperator(m), QUBIT_PAIR_LAYOUT, validate=False)


OBSERVABLES = (*_POPULATION_KETS, "fidelity", "purity", "mutual_information",
               "concurrence", "qd", "cc", "excited_pop", "top_fock")


# ---------------------------------------------------------------------------
# experiment specification

@dataclass(frozen=True)
class ExperimentSpec:
    """One reproducible run: a scheme, its parameters, and what to record."""

    id: str
    scheme: str
    config: SchemeConfig = field(default_factory=SchemeConfig)
    pm: Optional[PhaseMismatch] = None
    schedule: Optional[dynamics.SwitchingSchedule] = None
    initial_state: str = "00"
    observables: tuple = ("fidelity",)
    horizon: float = 8000.0
    samples: int = 161
    horizon_in_decay_units: bool = False
    method: str = "auto"

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ExperimentError(f"unknown scheme {self.scheme!r}")
        for name in self.observables:
            if name not in OBSERVABLES:
                raise ExperimentError(f"unknown observable {name!r}")
        _qubit_pair_state(self.initial_state)  # validates the name
        if self.samples < 2:
            raise ExperimentError("samples must be >= 2")
        if self.horizon <= 0:
            raise ExperimentError("horizon must be positive")


@dataclass(frozen=True)
class SweepSpec:
    """A base experiment swept over one or more parameter axes."""

    base: ExperimentSpec
    axes: tuple               # ((path, (values...)), ...)
    metric: str = "fidelity"

    def __post_init__(self):
        if not self.axes:
            raise ExperimentError("sweep needs at least one axis")
        for path, values in self.axes:
            if not len(values):
                raise ExperimentError(f"axis {path!r} has no values")
            apply_override(self.base, path, values[0])  # path must resolve
        if self.metric not in OBSERVABLES:
            raise ExperimentError(f"unknown metric {self.metric!r}")


def _set_config(cfg: SchemeConfig, key: str, value) -> SchemeConfig:
    if key == "omega":
        # shared Rabi magnitude for every drive of the scheme
        return cfg.with_overrides(omega1=value, omega2=value,
                                  omega1p=value, omega2p=value)
    if key == "delta":
        return cfg.with_overrides(delta1=value, delta2=value)
    if not hasattr(cfg, key):
        raise ExperimentError(f"unknown config field {key!r}")
    if key == "n_max":
        value = int(value)
    return cfg.with_overrides(**{key: value})


def _set_pm(pm: Optional[PhaseMismatch], key: str, value) -> PhaseMismatch:
    pm = pm or PhaseMismatch()
    if key == "antisym":
        # dphi1 = -dphi2 = value (the scheme-A mismatch scan)
        return replace(pm, dphi1=value, dphi2=-value)
    if key == "sync":
        # dphi1 = dphi2 = value, the others fixed (the scheme-B scan)
        return replace(pm, dphi1=value, dphi2=value)
    if key not in ("dphi1", "dphi2", "dphi3", "dphi4"):
        raise ExperimentError(f"unknown mismatch field {key!r}")
    return replace(pm, **{key: value})


def apply_override(spec: ExperimentSpec, path: str, value) -> ExperimentSpec:
    """Return a copy of `spec` with one dotted parameter path replaced."""
    head, _, rest = path.partition(".")
    if head == "config":
        if not rest:
            raise ExperimentError("config override needs a field name")
        return replace(spec, config=_set_config(spec.config, rest, float(value)
                                                if rest != "n_max" else value))
    if head == "pm":
        if not rest:
            raise ExperimentError("pm override needs a field name")
        return replace(spec, pm=_set_pm(spec.pm, rest, float(value)))
    if head == "schedule":
        sched = spec.schedule or dynamics.SwitchingSchedule(spec.horizon, 1)
        if rest in ("N", "switch_count"):
            sched = dynamics.SwitchingSchedule(sched.total_time, int(value),
                                               sched.order)
        elif rest == "total_time":
            sched = dynamics.SwitchingSchedule(float(value),
                                               sched.switch_count, sched.order)
        elif rest == "order":
            sched = dynamics.SwitchingSchedule(sched.total_time,
                                               sched.switch_count, str(value))
        else:
            raise ExperimentError(f"unknown schedule field {rest!r}")
        return replace(spec, schedule=sched)
    if head == "initial_state":
        return replace(spec, initial_state=str(value))
    if head == "horizon":
        return replace(spec, horizon=float(value))
    if head == "samples":
        return replace(spec, samples=int(value))
    if head == "observables":
        names = tuple(str(value).split("+")) if isinstance(value, str) else tuple(value)
        return replace(spec, observables=names)
    if head == "method":
        return replace(spec, method=str(value))
    raise ExperimentError(f"unknown parameter path {path!r}")


# ---------------------------------------------------------------------------
# running

def _effective_coupling_a(cfg: SchemeConfig) -> float:
    return cfg.g * cfg.omega1 / cfg.delta1


def build_models(spec: ExperimentSpec):
    """The model (or switched model pair) an experiment integrates."""
    cfg = spec.config
    if spec.scheme == "A_full":
        return (models.build_scheme_a_full(cfg, PhaseMode.SX),
                models.build_scheme_a_full(cfg, PhaseMode.SY, pm=spec.pm))
    if spec.scheme == "A_effective":
        g = _effective_coupling_a(cfg)
        return (models.build_scheme_a_effective(PhaseMode.SX, g, cfg.kappa),
                models.build_scheme_a_effective(PhaseMode.SY, g, cfg.kappa))
    if spec.scheme == "combined":
        return models.build_combined_effective(_effective_coupling_a(cfg),
                                               cfg.kappa)
    if spec.scheme == "B_full":
        return models.build_scheme_b_full(cfg, pm=spec.pm)
    if spec.scheme == "B_effective":
        return models.build_scheme_b_effective(
            models.scheme_b_effective_coupling(cfg), cfg.kappa)
    if spec.scheme == "mismatch_A":
        return models.build_mismatch_a(_effective_coupling_a(cfg), cfg.kappa,
                                       spec.pm or PhaseMismatch())
    if spec.scheme == "mismatch_B":
        return models.build_mismatch_b(
            models.scheme_b_effective_coupling(cfg), cfg.kappa,
            spec.pm or PhaseMismatch())
    if spec.scheme == "chi":
        g = _effective_coupling_a(cfg)
        return models.build_chi_model(4.0 * g**2 / cfg.kappa)
    if spec.scheme == "subspace":
        g = _effective_coupling_a(cfg)
        return models.build_subspace_model(4.0 * g**2 / cfg.kappa,
                                           spec.pm or PhaseMismatch())
    raise ExperimentError(f"unknown scheme {spec.scheme!r}")


def _total_rate(model) -> float:
    if isinstance(model, tuple):
        # switched pair: the Trotter average halves each generator
        return 0.5 * sum(_total_rate(m) for m in model)
    return sum(rate for rate, _ in model.channels)


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    trajectory: dynamics.Trajectory
    observables: dict            # name -> np.ndarray over samples
    reports: Optional[list]     # CorrelationReport series when discord asked

    @property
    def final(self) -> dict:
        return {k: float(v[-1]) for k, v in self.observables.items()}


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Integrate one experiment and evaluate its observables."""
    built = build_models(spec)
    model = built[0] if isinstance(built, tuple) else built
    rho0 = named_initial_state(spec.initial_state, model.layout)

    horizon = spec.horizon
    if spec.horizon_in_decay_units:
        horizon = spec.horizon / _total_rate(built)

    if isinstance(built, tuple):
        if spec.schedule is None:
            raise ExperimentError(
                f"scheme {spec.scheme!r} alternates two generators and needs "
                "a switching schedule")
        sched = spec.schedule
        if abs(sched.total_time - horizon) > 1e-9 * max(horizon, 1.0):
            sched = dynamics.SwitchingSchedule(horizon, sched.switch_count,
                                               sched.order)
        traj = dynamics.trotter_evolve(built[0], built[1], sched, rho0,
                                       method=spec.method)
    else:
        times = np.linspace(0.0, horizon, spec.samples)
        traj = dynamics.evolve(model, rho0, times, method=spec.method)

    obs = {name: np.array([evaluate_observable(name, s) for s in traj.states])
           for name in spec.observables}
    reports = None
    if any(n in ("qd", "cc") for n in spec.observables):
        reports = [corr.xstate_discord_cc(_sanitized_x(reduced_qubit_state(s)[0]))
                   for s in traj.states]
    # cutoff adequacy of full-scheme runs is tracked as a trajectory flag
    if spec.scheme in ("A_full", "B_full"):
        top = max(evaluate_observable("top_fock", s) for s in traj.states)
        if top > 1e-4:
            traj.flags.append(f"top_fock={top:.3e}")
    return ExperimentResult(spec, traj, obs, reports)


def _run_sweep_point(args):
    spec, metric = args
    res = run_experiment(spec)
    return float(res.observables[metric][-1]), float(res.trajectory.times[-1]), \
        list(res.trajectory.flags)


def sweep_points(sweep: SweepSpec):
    """The sweep grid in deterministic row-major axis order."""
    from itertools import product
    names = [path for path, _ in sweep.axes]
    grids = [tuple(vals) for _, vals in sweep.axes]
    points = []
    for combo in product(*grids):
        spec = sweep.base
        for path, value in zip(names, combo):
            spec = apply_override(spec, path, value)
        if sweep.metric not in spec.observables:
            spec = replace(spec, observables=(*spec.observables, sweep.metric))
        points.append((combo, spec))
    return names, points


def max_workers() -> int:
    env = os.environ.get(THREADS_ENV, "")
    if env.strip():
        try:
            return max(1, int(env))
        except ValueError:
            raise ExperimentError(
                f"{THREADS_ENV} must be an integer, got {env!r}")
    return max(1, os.cpu_count() or 1)


def run_sweep(sweep: SweepSpec):
    """Evaluate the metric at the final time of every grid point.

    Returns (axis_names, rows) with rows (coords..., time, metric_value,
    flags) in deterministic grid order; points run in a process pool capped
    by the LINDBLADLAB_THREADS environment variable.
    """
    names, points = sweep_points(sweep)
    tasks = [(spec, sweep.metric) for _, spec in points]
    workers = min(max_workers(), len(tasks))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_sweep_point, tasks))
    else:
        outcomes = [_run_sweep_point(t) for t in tasks]
    rows = []
    for (combo, _), (value, t_end, flags) in zip(points, outcomes):
        rows.append((combo, t_end, value, flags))
    return names, rows
