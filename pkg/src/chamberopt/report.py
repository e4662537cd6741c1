"""Result tables and surrogate slice grids for a campaign."""

from __future__ import annotations

import csv
import os

import numpy as np

from .acquisition import incumbent
from .campaign import CampaignState, best_so_far, fit_models
from .errors import InvalidStateError
from .gp import destandardize_arrays, posterior

DEFAULT_SLICE_RESOLUTION = 101


def _trace_rows(state: CampaignState, view: str):
    _, trace = best_so_far(state)
    rows = []
    for entry in trace:
        obs = entry[view]
        if obs is None:
            rows.append([entry["stage"]] + [""] * (2 + state.space.ndim))
        else:
            rows.append([entry["stage"], obs.k, obs.v] + list(obs.x))
    return rows


def emit_table(state: CampaignState, out_dir: str) -> str:
    """Write table.csv (cumulative feasible best, full precision) and
    table_batch.csv (per-batch view); returns an aligned text rendering."""
    header = ["stage", "k", "v_mag"] + state.space.names
    for name, view in (("table.csv", "cumulative"), ("table_batch.csv", "batch")):
        with open(os.path.join(out_dir, name), "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(header)
            for row in _trace_rows(state, view):
                w.writerow([row[0]] + [v if v == "" else f"{v:.17g}"
                                       for v in row[1:]])

    widths = [max(8, len(h) + 2) for h in header]
    lines = ["".join(h.ljust(w) for h, w in zip(header, widths))]
    for row in _trace_rows(state, "cumulative"):
        cells = [row[0]] + [("-" if v == "" else f"{v:.2f}") for v in row[1:]]
        lines.append("".join(c.ljust(w) for c, w in zip(cells, widths)))
    return "\n".join(lines)


def emit_slices(state: CampaignState, out_dir: str,
                resolution: int = DEFAULT_SLICE_RESOLUTION) -> list[str]:
    """1-D posterior sweeps of the objective surrogate through the incumbent.

    For each dimension, two grid CSVs (posterior mean, posterior std, both in
    raw output units against the physical coordinate) plus one markers file
    with the training-point projections and the incumbent.
    """
    if resolution < 2:
        raise ValueError("slice resolution must be >= 2")
    inc = incumbent(state.dataset, state.acq.constraint_threshold)
    if inc is None:
        raise InvalidStateError(
            "no feasible incumbent; run more iterations or inspect "
            "table_batch.csv for infeasible-best diagnostics")
    mk, _ = fit_models(state)
    x_star = np.asarray(state.dataset[inc.index].x, dtype=float)
    u_star = state.space.to_unit(x_star)

    paths = []
    for i, dim in enumerate(state.space.dims):
        coords = np.linspace(dim.lower, dim.upper, resolution)
        U = np.tile(u_star, (resolution, 1))
        U[:, i] = (coords - dim.lower) / (dim.upper - dim.lower)
        mean, std = destandardize_arrays(mk, *posterior(mk, U))
        for col, values in (("mean", mean), ("std", std)):
            path = os.path.join(out_dir, f"slice_{dim.name}_{col}.csv")
            with open(path, "w", newline="") as f:
                w = csv.writer(f)
                w.writerow([dim.name, f"k_{col}"])
                for c, v in zip(coords, values):
                    w.writerow([f"{c:.17g}", f"{v:.17g}"])
            paths.append(path)

    markers = os.path.join(out_dir, "slice_markers.csv")
    with open(markers, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["kind"] + state.space.names + ["k"])
        for j, obs in enumerate(state.dataset):
            kind = "incumbent" if j == inc.index else "train"
            w.writerow([kind] + [f"{v:.17g}" for v in obs.x] + [f"{obs.k:.17g}"])
    paths.append(markers)
    return paths
