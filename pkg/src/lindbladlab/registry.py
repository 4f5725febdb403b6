"""The catalog of named figure and table reproductions.

Each entry is either a family of labeled runs (overlaid curves) or a sweep.
Defaults follow the study's captions; every physical quantity is in units
of the atom-cavity coupling g and horizons are in units of 1/g unless the
entry states decay units.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .dynamics import SwitchingSchedule
from .experiments import ExperimentSpec, SweepSpec
from .models import SchemeConfig

# Laboratory parameter sets, converted to units of g.
_MAIN = dict(kappa=0.66 / 14.4, gamma=3.0 / 14.4)
_FABRY_PEROT = dict(kappa=21.7 / 770.0, gamma=2.6 / 770.0)
_MICRORESONATOR = dict(kappa=5.0 / 70.0, gamma=1.0 / 70.0)


@dataclass(frozen=True)
class FigurePlan:
    """A registry entry: id, human description, and its runs or sweep."""

    id: str
    description: str
    runs: tuple = ()              # ((label, ExperimentSpec), ...)
    sweep: Optional[SweepSpec] = None
    slow: bool = False

    @property
    def kind(self) -> str:
        return "sweep" if self.sweep is not None else "runs"

    @property
    def scheme(self) -> str:
        spec = self.sweep.base if self.sweep else self.runs[0][1]
        return spec.scheme

    @property
    def horizon_text(self) -> str:
        spec = self.sweep.base if self.sweep else self.runs[0][1]
        unit = "/rate" if spec.horizon_in_decay_units else ""
        return f"t={spec.horizon:g}{unit}"


def _cfg_a(**kw) -> SchemeConfig:
    base = dict(omega1=0.5, omega2=0.5, delta1=100.0, delta2=100.0,
                kappa=0.1, gamma=0.0, n_max=2)
    base.update(kw)
    return SchemeConfig(**base)


def _cfg_b(omega=0.2, delta=100.0, **kw) -> SchemeConfig:
    base = dict(omega1=omega, omega2=omega, omega1p=omega, omega2p=omega,
                delta1=delta, delta2=delta, hop=delta,
                kappa=0.1, gamma=0.0, n_max=2)
    base.update(kw)
    return SchemeConfig(**base)


def _build_registry():
    plans = []

    # fig2: effective combined channel vs switching on the effective pair
    fig2_eff = ExperimentSpec(
        id="fig2", scheme="combined",
        config=SchemeConfig(omega1=1.0, omega2=1.0, delta1=100.0,
                            delta2=100.0, kappa=0.8),
        observables=("pop_psi_plus", "fidelity"), horizon=8000.0, samples=161)
    fig2_runs = [("effective", fig2_eff)]
    for n in (1, 10, 200):
        fig2_runs.append((f"N={n}", ExperimentSpec(
            id="fig2", scheme="A_effective", config=fig2_eff.config,
            schedule=SwitchingSchedule(8000.0, n),
            observables=("pop_psi_plus", "fidelity"), horizon=8000.0)))
    plans.append(FigurePlan(
        "fig2", "lossy-cavity scheme: |Psi+> population, effective collective "
        "decay (G=0.01g, kappa=80G) vs phase switching at N=1,10,200, gt<=8000",
        runs=tuple(fig2_runs)))

    # fig3: full scheme-A switching robustness families
    a_sched = SwitchingSchedule(8000.0, 200)
    fig3_base = ExperimentSpec(id="fig3a", scheme="A_full", config=_cfg_a(),
                               schedule=a_sched,
                               observables=("fidelity", "excited_pop"),
                               horizon=8000.0)
    plans.append(FigurePlan(
        "fig3a", "lossy-cavity scheme, full model: fidelity vs cavity decay "
        "kappa in {0.01,0.1,1,10}g (Delta=100g, Omega=0.5g, N=200, gt=8000)",
        sweep=SweepSpec(fig3_base, (("config.kappa", (0.01, 0.1, 1.0, 10.0)),)),
        slow=True))
    plans.append(FigurePlan(
        "fig3b", "lossy-cavity scheme, full model: fidelity vs spontaneous "
        "emission gamma in {0.01,0.1,1}g at kappa=0.1g",
        sweep=SweepSpec(replace_id(fig3_base, "fig3b"),
                        (("config.gamma", (0.01, 0.1, 1.0)),)),
        slow=True))
    plans.append(FigurePlan(
        "fig3c", "lossy-cavity scheme, full model: fidelity vs shared Rabi "
        "magnitude Omega in {0.1,0.3,0.5,0.7,1}g at gamma=kappa=0.1g",
        sweep=SweepSpec(
            replace_id(fig3_base, "fig3c", config=_cfg_a(gamma=0.1)),
            (("config.omega", (0.1, 0.3, 0.5, 0.7, 1.0)),)),
        slow=True))
    fig3d_states = ("phi_plus", "phi_minus", "psi_plus", "mix")
    plans.append(FigurePlan(
        "fig3d", "lossy-cavity scheme, full model: fidelity from different "
        "initial states (Bell states and a rank-3 mixture), gt=8000",
        runs=tuple((name, replace_id(fig3_base, "fig3d", initial_state=name))
                   for name in fig3d_states),
        slow=True))

    # fig4: correlation measures along the switching evolution
    plans.append(FigurePlan(
        "fig4", "lossy-cavity scheme, full model from |Psi+>: quantum "
        "discord, classical correlation and concurrence vs gt",
        runs=(("measures", ExperimentSpec(
            id="fig4", scheme="A_full", config=_cfg_a(), schedule=a_sched,
            initial_state="psi_plus",
            observables=("qd", "cc", "concurrence", "fidelity"),
            horizon=8000.0)),),
        slow=True))

    # fig5: effect of the switching number on the full model
    plans.append(FigurePlan(
        "fig5", "lossy-cavity scheme, full model: final fidelity vs "
        "switching number N in {4,10,40,200}, gt=8000",
        sweep=SweepSpec(replace_id(fig3_base, "fig5"),
                        (("schedule.N", (4, 10, 40, 200)),)),
        slow=True))

    # fig7: coupled-cavity scheme, full vs effective
    fig7_full = ExperimentSpec(
        id="fig7", scheme="B_full", config=_cfg_b(),
        observables=("pop_00", "pop_11", "pop_psi_plus", "fidelity"),
        horizon=10000.0, samples=151)
    plans.append(FigurePlan(
        "fig7", "coupled-cavity scheme (kappa=0.1g, Omega=0.2g, Delta=A="
        "100g, gamma=0): populations and fidelity, full vs effective, "
        "gt=10000",
        runs=(("full", fig7_full),
              ("effective", ExperimentSpec(
                  id="fig7", scheme="B_effective", config=_cfg_b(),
                  observables=fig7_full.observables, horizon=10000.0,
                  samples=151))),
        slow=True))

    # fig8: coupled-cavity robustness families
    fig8_base = ExperimentSpec(id="fig8a", scheme="B_full", config=_cfg_b(),
                               observables=("fidelity",), horizon=10000.0)
    plans.append(FigurePlan(
        "fig8a", "coupled-cavity scheme, full model: fidelity vs kappa in "
        "{0.01,0.1,1,10}g (Omega=0.2g, Delta=100g)",
        sweep=SweepSpec(fig8_base, (("config.kappa", (0.01, 0.1, 1.0, 10.0)),)),
        slow=True))
    plans.append(FigurePlan(
        "fig8b", "coupled-cavity scheme, full model: fidelity vs Omega in "
        "{0.1,0.2,0.3}g at kappa=0.1g",
        sweep=SweepSpec(replace_id(fig8_base, "fig8b"),
                        (("config.omega", (0.1, 0.2, 0.3)),)),
        slow=True))
    plans.append(FigurePlan(
        "fig8c", "coupled-cavity scheme, full model: fidelity from initial "
        "states |Psi+> and two rank-3 mixtures",
        runs=tuple((name, replace_id(fig8_base, "fig8c", initial_state=name))
                   for name in ("psi_plus", "mix1", "mix2")),
        slow=True))
    plans.append(FigurePlan(
        "fig8d", "coupled-cavity scheme, full model: fidelity vs gamma in "
        "{0,0.01,0.1}g at kappa=0.1g",
        sweep=SweepSpec(replace_id(fig8_base, "fig8d"),
                        (("config.gamma", (0.0, 0.01, 0.1)),)),
        slow=True))

    # fig9: phase-mismatch sensitivity
    mismatch_a_base = ExperimentSpec(
        id="fig9a", scheme="mismatch_A",
        config=SchemeConfig(omega1=0.5, omega2=0.5, delta1=1.0, delta2=1.0,
                            kappa=1.0),
        observables=("fidelity",), horizon=3.0, samples=61,
        horizon_in_decay_units=True)
    plans.append(FigurePlan(
        "fig9a", "lossy-cavity scheme, effective model with phase error on "
        "the sigma_y channel, dphi1=-dphi2 swept over [-0.5,0.5]pi, "
        "total-decay time 3",
        sweep=SweepSpec(mismatch_a_base,
                        (("pm.antisym", tuple(np.round(
                            np.linspace(-0.5, 0.5, 21) * np.pi, 12))),))))
    plans.append(FigurePlan(
        "fig9b", "lossy-cavity scheme, full model with drive-phase error "
        "dphi1=-dphi2 (Omega=0.2g, Delta=100g, N=40, gt=12000)",
        sweep=SweepSpec(
            ExperimentSpec(id="fig9b", scheme="A_full",
                           config=_cfg_a(omega1=0.2, omega2=0.2),
                           schedule=SwitchingSchedule(12000.0, 40),
                           observables=("fidelity",), horizon=12000.0),
            (("pm.antisym", tuple(np.round(
                np.linspace(-0.5, 0.5, 11) * np.pi, 12))),)),
        slow=True))
    mismatch_b_base = ExperimentSpec(
        id="fig9c", scheme="mismatch_B",
        config=SchemeConfig(omega1=0.5, omega2=0.5, delta1=1.0, delta2=1.0,
                            kappa=1.0),
        observables=("fidelity",), horizon=8.0, samples=61,
        horizon_in_decay_units=True)
    plans.append(FigurePlan(
        "fig9c", "coupled-cavity scheme, effective model with synchronized "
        "phase error dphi1=dphi2 on atom 1, swept over [0,0.2]pi, "
        "total-decay time 8",
        sweep=SweepSpec(mismatch_b_base,
                        (("pm.sync", tuple(np.round(
                            np.linspace(0.0, 0.2, 9) * np.pi, 12))),))))
    plans.append(FigurePlan(
        "fig9d", "coupled-cavity scheme, full model with synchronized "
        "drive-phase error (Omega=0.5g, Delta=100g, gt=8000)",
        sweep=SweepSpec(
            ExperimentSpec(id="fig9d", scheme="B_full",
                           config=_cfg_b(omega=0.5), observables=("fidelity",),
                           horizon=8000.0),
            (("pm.sync", tuple(np.round(
                np.linspace(0.0, 0.2, 5) * np.pi, 12))),)),
        slow=True))

    # Parameter tables: laboratory cavity-QED numbers in units of g
    for tag, lab, a_kw, b_kw in (
            ("tableV_a", _MAIN,
             dict(omega1=0.3, omega2=0.3, delta1=76.0, delta2=76.0),
             dict(omega=0.1, delta=50.0)),
            ("tableV_b", _FABRY_PEROT,
             dict(omega1=0.2, omega2=0.2, delta1=72.0, delta2=72.0),
             dict(omega=0.12, delta=50.0)),
            ("tableV_c", _MICRORESONATOR,
             dict(omega1=0.3, omega2=0.3, delta1=43.0, delta2=43.0),
             dict(omega=0.1, delta=50.0))):
        label = {"tableV_a": "clock-state cavity QED",
                 "tableV_b": "Fabry-Perot cavity",
                 "tableV_c": "microtoroidal resonator"}[tag]
        plans.append(FigurePlan(
            tag, f"laboratory parameter row ({label}): final fidelity of "
            "both schemes at N=200 / gt=8000 (A) and gt=10000 (B)",
            runs=(
                ("scheme_A", ExperimentSpec(
                    id=tag, scheme="A_full", config=_cfg_a(**a_kw, **lab),
                    schedule=a_sched, observables=("fidelity",),
                    horizon=8000.0)),
                ("scheme_B", ExperimentSpec(
                    id=tag, scheme="B_full", config=_cfg_b(**b_kw, **lab),
                    observables=("fidelity",), horizon=10000.0)),
            ),
            slow=True))

    return {p.id: p for p in plans}


def replace_id(spec: ExperimentSpec, new_id: str, **kw) -> ExperimentSpec:
    return replace(spec, id=new_id, **kw)


REGISTRY = _build_registry()


def get_plan(experiment_id: str) -> FigurePlan:
    try:
        return REGISTRY[experiment_id]
    except KeyError:
        raise KeyError(
            f"unknown experiment {experiment_id!r}; known ids: "
            f"{', '.join(sorted(REGISTRY))}") from None


def list_experiments():
    """Rows (id, kind, scheme, horizon, slow, description) for every entry."""
    rows = []
    for pid in sorted(REGISTRY):
        p = REGISTRY[pid]
        rows.append((p.id, p.kind, p.scheme, p.horizon_text,
                     "slow" if p.slow else "fast", p.description))
    return rows
