"""Render experiment datasets to PNG figures.

Works directly from the emitted records (same columns as the CSV output),
so a plot can be reproduced from any saved dataset: time-series records
become one figure per observable with a curve per variant; sweep records
become metric-vs-axis figures.
"""

from __future__ import annotations

import os
from collections import OrderedDict

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def _group(rows, key_idx):
    groups = OrderedDict()
    for row in rows:
        groups.setdefault(tuple(row[i] for i in key_idx), []).append(row)
    return groups


def render_records(columns, rows, figdir, experiment_id, dpi=150):
    """Write one PNG per observable; returns the list of file paths."""
    os.makedirs(figdir, exist_ok=True)
    time_idx = columns.index("time")
    obs_idx = columns.index("observable")
    val_idx = columns.index("value")
    axis_idx = [k for k in range(1, time_idx)]
    axis_names = [columns[k] for k in axis_idx]

    written = []
    for (obs,), obs_rows in _group(rows, (obs_idx,)).items():
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        variants = _group(obs_rows, axis_idx)
        sweep_like = all(len(v) == 1 for v in variants.values()) \
            and len(variants) > 1 and axis_idx
        if sweep_like:
            # one record per grid point: plot metric against the last axis
            xs = [float(key[-1]) if _is_number(key[-1]) else k
                  for k, key in enumerate(variants)]
            ys = [float(v[0][val_idx]) for v in variants.values()]
            ax.plot(xs, ys, "o-")
            ax.set_xlabel(axis_names[-1] if axis_names else "point")
        else:
            for key, series in variants.items():
                ts = [float(r[time_idx]) for r in series]
                vs = [float(r[val_idx]) for r in series]
                label = ", ".join(str(k) for k in key) if key else None
                ax.plot(ts, vs, label=label)
            ax.set_xlabel("time [1/g]")
            if len(variants) > 1:
                ax.legend(fontsize=8)
        ax.set_ylabel(obs)
        ax.set_title(f"{experiment_id}: {obs}")
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        path = os.path.join(figdir, f"{experiment_id}_{obs}.png")
        fig.savefig(path, dpi=dpi)
        plt.close(fig)
        written.append(path)
    return written


def _is_number(x) -> bool:
    try:
        float(x)
        return True
    except (TypeError, ValueError):
        return False
