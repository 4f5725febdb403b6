"""Command-line front end.

Subcommands: simulate, sweep, steady, measures, list.  Datasets are written
as CSV (12 significant digits) or JSON; `--plot` additionally renders PNG
figures next to the output.  All physical quantities are in units of g;
phase-like keys (config.phi*, pm.*) are given in units of pi.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field, replace

import numpy as np

from . import correlations as corr
from . import dynamics, experiments, models, registry

log = logging.getLogger("lindbladlab")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4

# keys whose numeric value is interpreted in units of pi
_PI_KEYS = ("config.phi1", "config.phi2", "pm.dphi1", "pm.dphi2", "pm.dphi3",
            "pm.dphi4", "pm.antisym", "pm.sync")


class ConfigError(ValueError):
    """Bad command line, config file, or override."""


@dataclass
class RunConfig:
    """Fully resolved invocation: command, target, overrides, output."""

    command: str
    experiment: str = ""
    overrides: list = field(default_factory=list)   # [(key, value), ...]
    axes: list = field(default_factory=list)        # [(path, [values]), ...]
    metric: str = ""
    model: str = ""
    sector: str = "triplet"
    state: str = "target"
    eps: float = 1.0 / 3.0
    x: float = 0.5
    output: str = ""
    fmt: str = "csv"
    plot: bool = False
    figdir: str = ""


def _parse_value(key: str, raw: str):
    s = str(raw).strip()
    try:
        value = float(s)
    except ValueError:
        return s
    if key in _PI_KEYS:
        value *= np.pi
    if value == int(value) and ("." not in s and "e" not in s.lower()):
        return int(s)
    return value


def _parse_set(pairs):
    out = []
    for pair in pairs or []:
        key, sep, raw = pair.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        key = key.strip()
        try:
            out.append((key, _parse_value(key, raw)))
        except ValueError:
            raise ConfigError(f"malformed value for key {key!r}: {raw!r}")
    return out


def _read_config_file(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}")
    stripped = text.lstrip()
    pairs = []
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON config {path!r}: {exc}")
        if not isinstance(data, dict):
            raise ConfigError(f"JSON config {path!r} must be an object")
        for key, value in data.items():
            if isinstance(value, (int, float)) and key in _PI_KEYS:
                value = float(value) * np.pi
            pairs.append((str(key), value))
        return pairs
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(
                f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key = key.strip()
        pairs.append((key, _parse_value(key, raw)))
    return pairs


def _apply_overrides(spec, overrides):
    for key, value in overrides:
        try:
            spec = experiments.apply_override(spec, key, value)
        except (experiments.ExperimentError, ValueError, TypeError) as exc:
            raise ConfigError(f"override {key!r}: {exc}")
    return spec


# ---------------------------------------------------------------------------
# dataset assembly and emission

def _fmt_value(v) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def emit_dataset(columns, rows, fmt, path):
    """Write records as CSV (12 significant digits) or JSON."""
    if fmt == "csv":
        lines = [",".join(columns)]
        lines += [",".join(_fmt_value(v) for v in row) for row in rows]
        payload = "\n".join(lines) + "\n"
    elif fmt == "json":
        payload = json.dumps({"columns": list(columns),
                              "rows": [list(r) for r in rows]}, indent=1)
        payload += "\n"
    else:
        raise ConfigError(f"unknown format {fmt!r} (use csv or json)")
    if not path or path == "-":
        sys.stdout.write(payload)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(payload)
    except OSError as exc:
        raise IOError(f"cannot write {path!r}: {exc}") from exc
    log.info("wrote %s (%d rows)", path, len(rows))


def read_dataset(path):
    """Read back an emitted dataset (CSV or JSON) as (columns, rows)."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        data = json.loads(text)
        return list(data["columns"]), [tuple(r) for r in data["rows"]]
    lines = [ln for ln in text.splitlines() if ln.strip()]
    columns = lines[0].split(",")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        row = []
        for p in parts:
            try:
                row.append(float(p))
            except ValueError:
                row.append(p)
        rows.append(tuple(row))
    return columns, rows


def _maybe_plot(cfg: RunConfig, columns, rows, experiment_id):
    if not cfg.plot:
        return
    from . import plotting
    figdir = cfg.figdir or (os.path.dirname(os.path.abspath(cfg.output))
                            if cfg.output and cfg.output != "-" else ".")
    paths = plotting.render_records(columns, rows, figdir, experiment_id)
    for p in paths:
        log.info("rendered %s", p)


# ---------------------------------------------------------------------------
# subcommands

def cmd_simulate(cfg: RunConfig) -> int:
    plan = registry.get_plan(cfg.experiment)
    if plan.kind != "runs":
        raise ConfigError(
            f"experiment {cfg.experiment!r} is a sweep; use the sweep command")
    columns = ["experiment", "variant", "time", "observable", "value"]
    rows = []
    for label, spec in plan.runs:
        spec = _apply_overrides(spec, cfg.overrides)
        log.info("running %s [%s]: %s", plan.id, label, spec)
        result = experiments.run_experiment(spec)
        for flag in result.trajectory.flags:
            log.warning("%s [%s]: %s", plan.id, label, flag)
        for name, series in result.observables.items():
            for t, v in zip(result.trajectory.times, series):
                rows.append((plan.id, label, float(t), name, float(v)))
    emit_dataset(columns, rows, cfg.fmt, cfg.output)
    _maybe_plot(cfg, columns, rows, plan.id)
    return EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    plan = registry.get_plan(cfg.experiment)
    if plan.kind != "sweep":
        raise ConfigError(
            f"experiment {cfg.experiment!r} is not a sweep; use simulate")
    sweep = plan.sweep
    base = _apply_overrides(sweep.base, cfg.overrides)
    axes = list(sweep.axes)
    for path, values in cfg.axes:
        parsed = tuple(_parse_value(path, v) for v in values)
        axes = [(p, vs) for p, vs in axes if p != path] + [(path, parsed)]
    metric = cfg.metric or sweep.metric
    try:
        sweep = experiments.SweepSpec(base, tuple(axes), metric)
    except experiments.ExperimentError as exc:
        raise ConfigError(str(exc))
    log.info("sweeping %s over %s", plan.id, [p for p, _ in sweep.axes])
    names, rows_raw = experiments.run_sweep(sweep)
    columns = ["experiment", *names, "time", "observable", "value"]
    rows = []
    for coords, t_end, value, flags in rows_raw:
        for flag in flags:
            log.warning("%s %s: %s", plan.id, coords, flag)
        rows.append((plan.id, *[float(c) for c in coords], float(t_end),
                     metric, float(value)))
    emit_dataset(columns, rows, cfg.fmt, cfg.output)
    _maybe_plot(cfg, columns, rows, plan.id)
    return EXIT_OK


_STEADY_MODELS = ("combined", "b_effective", "mismatch_a", "mismatch_b",
                  "chi", "subspace")


def _steady_model(cfg: RunConfig):
    params = dict(cfg.overrides)
    rate = float(params.pop("rate", 1.0))
    pm = models.PhaseMismatch(
        dphi1=float(params.pop("pm.dphi1", 0.0)),
        dphi2=float(params.pop("pm.dphi2", 0.0)),
        dphi3=float(params.pop("pm.dphi3", 0.0)),
        dphi4=float(params.pop("pm.dphi4", 0.0)))
    if params:
        raise ConfigError(f"unknown steady-state keys {sorted(params)}; "
                          "use rate and pm.dphi1..4")
    # rate is the collective decay unit 4 G^2 / kappa: realize it with
    # G = sqrt(rate)/2, kappa = 1 where a builder wants (G, kappa).
    g_for = np.sqrt(rate) / 2.0
    if cfg.model == "combined":
        return models.build_combined_effective(g_for, 1.0)
    if cfg.model == "b_effective":
        return models.build_scheme_b_effective(g_for, 1.0)
    if cfg.model == "mismatch_a":
        return models.build_mismatch_a(g_for, 1.0, pm)
    if cfg.model == "mismatch_b":
        return models.build_mismatch_b(g_for, 1.0, pm)
    if cfg.model == "chi":
        return models.build_chi_model(rate)
    if cfg.model == "subspace":
        return models.build_subspace_model(rate, pm)
    raise ConfigError(f"unknown model {cfg.model!r}; choose from "
                      f"{_STEADY_MODELS}")


def cmd_steady(cfg: RunConfig) -> int:
    model = _steady_model(cfg)
    if cfg.sector == "triplet" and model.dim == 4:
        model = models.restrict_model(model, models.TRIPLET_BASIS)
    elif cfg.sector not in ("triplet", "full"):
        raise ConfigError(f"sector must be 'triplet' or 'full', not {cfg.sector!r}")
    result = dynamics.steady_states(model)
    columns = ["experiment", "variant", "time", "observable", "value"]
    rows = [(cfg.model, "-", 0.0, "nullspace_dim", float(result.nullspace_dim))]
    for k, state in enumerate(result.states):
        if state is None:
            rows.append((cfg.model, str(k), 0.0, "physical", 0.0))
            continue
        rows.append((cfg.model, str(k), 0.0, "physical", 1.0))
        d = state.dim
        for i in range(d):
            for j in range(d):
                rows.append((cfg.model, str(k), 0.0, f"rho_{i}{j}_re",
                             float(np.real(state.mat[i, j]))))
                rows.append((cfg.model, str(k), 0.0, f"rho_{i}{j}_im",
                             float(np.imag(state.mat[i, j]))))
    emit_dataset(columns, rows, cfg.fmt, cfg.output)
    return EXIT_OK


def cmd_measures(cfg: RunConfig) -> int:
    if cfg.state == "target":
        dm = models.target_state()
    elif cfg.state == "mdms":
        try:
            dm = models.mdms_family(cfg.eps, cfg.x)
        except ValueError as exc:
            raise ConfigError(str(exc))
    else:
        try:
            dm = experiments.named_initial_state(cfg.state,
                                                 models.QUBIT_PAIR_LAYOUT)
        except experiments.ExperimentError as exc:
            raise ConfigError(str(exc))
    rep = corr.xstate_discord_cc(dm)
    columns = ["experiment", "variant", "time", "observable", "value"]
    values = [
        ("QD", rep.qd), ("CC", rep.cc), ("concurrence", rep.concurrence),
        ("mutual_information", rep.mutual_information),
        ("super_fidelity_to_target", rep.super_fidelity_to_target),
        ("purity", dm.purity()),
        ("Q1", rep.q1), ("Q2", rep.q2), ("CC1", rep.cc1), ("CC2", rep.cc2),
        ("D1", rep.d1), ("D2", rep.d2), ("tau", rep.tau),
    ]
    values += [(f"lambda_{k}", v) for k, v in enumerate(rep.eigenvalues)]
    rows = [(cfg.state, "-", 0.0, name, float(v)) for name, v in values]
    emit_dataset(columns, rows, cfg.fmt, cfg.output)
    return EXIT_OK


def cmd_list(cfg: RunConfig) -> int:
    rows = registry.list_experiments()
    widths = [max(len(str(r[k])) for r in rows + [("id", "kind", "scheme",
                                                   "horizon", "cost", "")])
              for k in range(5)]
    header = ("id", "kind", "scheme", "horizon", "cost", "description")
    fmt = "  ".join(f"{{:<{w}}}" for w in widths) + "  {}"
    print(fmt.format(*header))
    for r in rows:
        print(fmt.format(*r))
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="lindbladlab",
        description="Dissipative preparation of the maximally discordant "
                    "two-qubit mixed state: simulations and measures.")
    ap.add_argument("--log-level", default="INFO",
                    choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = ap.add_subparsers(dest="command", required=True)

    def add_output(p):
        p.add_argument("-o", "--output", default="-",
                       help="output path ('-' for stdout)")
        p.add_argument("--format", default="csv", choices=["csv", "json"])
        p.add_argument("--plot", action="store_true",
                       help="render PNG figures for the dataset")
        p.add_argument("--figdir", default="",
                       help="figure directory (default: beside the output)")

    def add_overrides(p):
        p.add_argument("--config", default="",
                       help="flat key=value (or JSON) parameter file")
        p.add_argument("--set", action="append", default=[], metavar="K=V",
                       help="override one parameter path (repeatable)")

    p = sub.add_parser("simulate", help="run a registered experiment family")
    p.add_argument("--experiment", required=True)
    add_overrides(p)
    add_output(p)

    p = sub.add_parser("sweep", help="run a registered parameter sweep")
    p.add_argument("--experiment", required=True)
    add_overrides(p)
    p.add_argument("--axis", action="append", default=[], metavar="PATH=V1,V2",
                   help="replace or add a sweep axis (repeatable)")
    p.add_argument("--metric", default="")
    add_output(p)

    p = sub.add_parser("steady", help="steady-state analysis of a generator")
    p.add_argument("--model", required=True, choices=_STEADY_MODELS)
    p.add_argument("--sector", default="triplet", choices=["triplet", "full"])
    add_overrides(p)
    add_output(p)

    p = sub.add_parser("measures", help="correlation measures of a state")
    p.add_argument("--state", default="target",
                   help="target, mdms, or a named initial state")
    p.add_argument("--eps", type=float, default=1.0 / 3.0)
    p.add_argument("--x", type=float, default=0.5)
    add_output(p)

    sub.add_parser("list", help="list registered experiments")
    return ap


def _runconfig_from_args(args) -> RunConfig:
    cfg = RunConfig(command=args.command)
    for name in ("experiment", "metric", "model", "sector", "state", "eps",
                 "x", "output", "plot", "figdir"):
        if hasattr(args, name):
            setattr(cfg, name, getattr(args, name))
    if hasattr(args, "format"):
        cfg.fmt = args.format
    overrides = []
    if getattr(args, "config", ""):
        overrides += _read_config_file(args.config)
    overrides += _parse_set(getattr(args, "set", []))
    cfg.overrides = overrides
    for ax in getattr(args, "axis", []):
        path, sep, raw = ax.partition("=")
        if not sep or not path.strip():
            raise ConfigError(f"--axis expects PATH=V1,V2,..., got {ax!r}")
        cfg.axes.append((path.strip(), [v for v in raw.split(",") if v]))
    log.info("resolved configuration: %s", cfg)
    return cfg


_COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "steady": cmd_steady,
    "measures": cmd_measures,
    "list": cmd_list,
}


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level),
                        format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr)
    try:
        cfg = _runconfig_from_args(args)
        return _COMMANDS[args.command](cfg)
    except (ConfigError, experiments.ExperimentError, KeyError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except dynamics.NumericalFailure as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    except (IOError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
