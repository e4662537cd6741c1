"""Design space definition, unit-cube scaling, and Latin hypercube sampling.

All optimization-facing code works on the closed unit cube [0, 1]^d; physical
coordinates appear only at the evaluator boundary and in reports.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BoundsViolationError


@dataclass(frozen=True)
class Dimension:
    name: str
    lower: float
    upper: float


@dataclass(frozen=True)
class ParameterSpace:
    """Ordered set of named, bounded real design variables."""

    dims: tuple[Dimension, ...]

    def __post_init__(self):
        if len(self.dims) < 1:
            raise ValueError("parameter space needs at least one dimension")
        names = [d.name for d in self.dims]
        if len(set(names)) != len(names) or any(not n for n in names):
            raise ValueError("dimension names must be unique and non-empty")
        for d in self.dims:
            if not np.isfinite(d.lower) or not np.isfinite(d.upper):
                raise ValueError(f"non-finite bounds for dimension {d.name!r}")
            if d.upper <= d.lower:
                raise ValueError(
                    f"dimension {d.name!r}: upper ({d.upper}) must exceed lower ({d.lower})"
                )

    @classmethod
    def from_bounds(cls, names, lowers, uppers) -> "ParameterSpace":
        return cls(tuple(Dimension(n, float(lo), float(hi))
                         for n, lo, hi in zip(names, lowers, uppers)))

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def names(self) -> list[str]:
        return [d.name for d in self.dims]

    @property
    def lowers(self) -> np.ndarray:
        return np.array([d.lower for d in self.dims])

    @property
    def uppers(self) -> np.ndarray:
        return np.array([d.upper for d in self.dims])

    def to_unit(self, x: np.ndarray) -> np.ndarray:
        """Map physical coordinates to the unit cube. Bounds are closed."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.ndim:
            raise ValueError(f"expected {self.ndim} coordinates, got {x.shape[-1]}")
        lo, hi = self.lowers, self.uppers
        for i, d in enumerate(self.dims):
            xi = x[..., i]
            if np.any(xi < d.lower) or np.any(xi > d.upper):
                raise BoundsViolationError(
                    f"dimension {d.name!r}: value outside [{d.lower}, {d.upper}]"
                )
        return (x - lo) / (hi - lo)

    def from_unit(self, u: np.ndarray) -> np.ndarray:
        """Map unit-cube coordinates back to physical units."""
        u = np.asarray(u, dtype=float)
        if u.shape[-1] != self.ndim:
            raise ValueError(f"expected {self.ndim} coordinates, got {u.shape[-1]}")
        if np.any(u < 0.0) or np.any(u > 1.0):
            raise ValueError("unit coordinates must lie in [0, 1]")
        return self.lowers + u * (self.uppers - self.lowers)

    def to_config(self) -> list[dict]:
        return [{"name": d.name, "lower": d.lower, "upper": d.upper} for d in self.dims]

    @classmethod
    def from_config(cls, records) -> "ParameterSpace":
        return cls(tuple(Dimension(r["name"], float(r["lower"]), float(r["upper"]))
                         for r in records))


def latin_hypercube(space: ParameterSpace, n: int, seed: int,
                    midpoint: bool = False) -> np.ndarray:
    """Stratified space-filling sample of n unit-cube points.

    Each dimension's n coordinates occupy the n equal strata of [0, 1) exactly
    once, with a uniform random offset within the stratum (or the stratum
    midpoint when ``midpoint`` is set). Plain permutation LHS, no maximin
    refinement. Deterministic given the seed.
    """
    if n < 1:
        raise ValueError("latin hypercube sample count must be >= 1")
    rng = np.random.default_rng(seed)
    d = space.ndim
    u = np.empty((n, d))
    for j in range(d):
        perm = rng.permutation(n)
        offset = 0.5 if midpoint else rng.uniform(size=n)
        u[:, j] = (perm + offset) / n
    return u


# design ranges of the built-in prechamber use case
PRECHAMBER_SPACE = ParameterSpace.from_bounds(
    ["d_bottle", "d_bore", "h_neck"], [8.0, 0.75, 15.0], [12.0, 1.15, 20.0]
)
