"""Black-box evaluation backends and the ask-tell file protocol.

Built-in evaluators (analytic prechamber proxy, quadratic benchmark) run
in-process; the CSV proposal/result protocol replaces them with an external
simulation pipeline that may complete jobs out of order.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BoundsViolationError, DataError, ProtocolError
from .space import PRECHAMBER_SPACE, ParameterSpace

QUADRATIC_SPACE = ParameterSpace.from_bounds(["x1", "x2"], [0.0, 0.0], [1.0, 1.0])


@dataclass(frozen=True)
class Observation:
    x: tuple[float, ...]        # physical units
    k: float                    # objective (maximize)
    v: float                    # constraint magnitude
    tag: str = "manual"         # doe | bo_iter_<n> | manual


@dataclass
class Dataset:
    """Ordered observations with duplicate-input protection in unit space."""

    space: ParameterSpace
    rows: list[Observation] = field(default_factory=list)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def __getitem__(self, i):
        return self.rows[i]

    def unit_inputs(self) -> np.ndarray:
        return self.space.to_unit(np.array([r.x for r in self.rows]))

    def k_values(self) -> np.ndarray:
        return np.array([r.k for r in self.rows])

    def v_values(self) -> np.ndarray:
        return np.array([r.v for r in self.rows])

    def append(self, obs: Observation):
        u_new = self.space.to_unit(np.asarray(obs.x))
        if self.rows:
            d = np.linalg.norm(self.unit_inputs() - u_new, axis=1)
            if np.min(d) < 1e-10:
                raise DataError(
                    f"duplicate design point {obs.x} (matches row {int(np.argmin(d))})"
                )
        if not (math.isfinite(obs.k) and math.isfinite(obs.v)):
            raise DataError(f"non-finite observation at {obs.x}")
        self.rows.append(obs)


def proxy_prechamber(x) -> tuple[float, float]:
    """Analytic stand-in for the prechamber CFD response.

    Turbulent kinetic energy peaks at small-but-not-minimal bore diameter and
    grows with bottle diameter and neck height; overflow velocity rises with
    small bore and large bottle, so the velocity constraint is active in the
    high-k region.
    """
    u = PRECHAMBER_SPACE.to_unit(np.asarray(x, dtype=float))
    u1, u2, u3 = u
    k = 60.0 + 220.0 * np.exp(-((u2 - 0.33) ** 2) / 0.08) * (0.4 + 0.6 * u1 * u3)
    v = 12.0 + 18.0 * np.exp(-((u2 - 0.25) ** 2) / 0.10) * (0.5 + 0.5 * u1)
    return float(k), float(v)


def benchmark_quadratic(x) -> tuple[float, float]:
    """2-D sanity benchmark: k = -(x1-0.7)^2 - (x2-0.7)^2, v = x1 + x2.

    With threshold 1.0 the constrained optimum is at (0.5, 0.5), k = -0.08.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (2,) or np.any(x < 0.0) or np.any(x > 1.0):
        raise BoundsViolationError("quadratic benchmark needs x in the unit square")
    k = -((x[0] - 0.7) ** 2) - (x[1] - 0.7) ** 2
    v = x[0] + x[1]
    return float(k), float(v)


# registry: name -> (callable, space, default constraint threshold)
EVALUATORS = {
    "proxy": (proxy_prechamber, PRECHAMBER_SPACE, 25.0),
    "quadratic": (benchmark_quadratic, QUADRATIC_SPACE, 1.0),
}


def proposal_ids(iteration: int, count: int) -> list[str]:
    return [f"iter{iteration}_{j}" for j in range(count)]


def write_proposals(path, space: ParameterSpace, batch: np.ndarray,
                    iteration: int) -> list[str]:
    """Write a proposals CSV (header id,<dim names>); returns the row ids."""
    batch = np.atleast_2d(np.asarray(batch, dtype=float))
    if batch.shape[0] == 0:
        raise ValueError("empty proposal batch")
    space.to_unit(batch)        # bounds check
    ids = proposal_ids(iteration, batch.shape[0])
    try:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["id"] + space.names)
            for pid, row in zip(ids, batch):
                w.writerow([pid] + [f"{v:.17g}" for v in row])
    except OSError as e:
        raise OSError(f"cannot write proposals file {path}: {e}") from e
    return ids


def read_proposals(path, space: ParameterSpace) -> list[tuple[str, np.ndarray]]:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != ["id"] + space.names:
            raise ProtocolError(f"unexpected proposals header in {path}: {header}")
        return [(row[0], np.array([float(v) for v in row[1:]])) for row in reader]


def read_results(path, expected_ids) -> list[tuple[str, float, float]]:
    """Parse a results CSV (header id,k,v_mag) and match ids exactly."""
    try:
        f = open(path, newline="")
    except OSError as e:
        raise ProtocolError(f"cannot read results file {path}: {e}") from e
    with f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != ["id", "k", "v_mag"]:
            raise ProtocolError(f"expected header id,k,v_mag in {path}, got {header}")
        out = []
        seen = set()
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 3:
                raise DataError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            pid = row[0]
            if pid in seen:
                raise ProtocolError(f"duplicate result id {pid!r}")
            seen.add(pid)
            try:
                k, v = float(row[1]), float(row[2])
            except ValueError as e:
                raise DataError(f"{path}:{lineno}: {e}") from e
            if not (math.isfinite(k) and math.isfinite(v)):
                raise DataError(f"{path}:{lineno}: non-finite value for id {pid!r}")
            out.append((pid, k, v))

    expected = set(expected_ids)
    got = {pid for pid, _, _ in out}
    missing = sorted(expected - got)
    extra = sorted(got - expected)
    if missing or extra:
        raise ProtocolError(
            f"result ids do not match outstanding proposals; "
            f"missing={missing} extra={extra}"
        )
    return out
