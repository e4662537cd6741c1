"""Acquisition functions: EI, probability of feasibility, their product
(constrained EI), Monte Carlo batch constrained EI, and UCB.

All closed forms operate on raw-unit posteriors so the constraint threshold
needs no transformation; the objective and constraint GPs are independent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .errors import InvalidStateError
from .gp import GpModel, PosteriorGaussian, joint_posterior_samples
from .kernels import mc_batch_feasibility, mc_batch_improvement


@dataclass(frozen=True)
class AcquisitionConfig:
    kind: str = "cei"                  # "cei" or "ucb"
    constraint_threshold: float = 25.0
    mc_samples: int = 1024
    batch_size: int = 5
    ucb_beta: float = 2.0

    def __post_init__(self):
        if self.kind not in ("cei", "ucb"):
            raise ValueError(f"unknown acquisition kind {self.kind!r}")
        if self.mc_samples < 1 or self.batch_size < 1:
            raise ValueError("mc_samples and batch_size must be >= 1")
        if not np.isfinite(self.constraint_threshold):
            raise ValueError("constraint threshold must be finite")
        if self.ucb_beta < 0:
            raise ValueError("ucb_beta must be >= 0")


@dataclass(frozen=True)
class Incumbent:
    index: int
    k_best: float


def expected_improvement(g: PosteriorGaussian, best: float) -> float:
    """Closed-form EI for maximization; zero-std degenerates to max(0, mu-best)."""
    if g.std == 0.0:
        return max(0.0, g.mean - best)
    z = (g.mean - best) / g.std
    return float((g.mean - best) * norm.cdf(z) + g.std * norm.pdf(z))


def probability_feasible(g: PosteriorGaussian, threshold: float) -> float:
    """P(constraint <= threshold) under the raw-unit constraint posterior."""
    if g.std == 0.0:
        return 1.0 if g.mean <= threshold else 0.0
    return float(norm.cdf((threshold - g.mean) / g.std))


def constrained_ei(gk: PosteriorGaussian, gv: PosteriorGaussian,
                   best: float, threshold: float) -> float:
    return probability_feasible(gv, threshold) * expected_improvement(gk, best)


def ucb(g: PosteriorGaussian, beta: float) -> float:
    if beta < 0:
        raise ValueError("beta must be >= 0")
    return g.mean + beta * g.std


def incumbent(dataset, threshold: float) -> Incumbent | None:
    """Feasible observation with maximal objective, or None if none feasible."""
    if len(dataset) == 0:
        raise InvalidStateError("cannot pick an incumbent from an empty dataset")
    best_i, best_k = -1, -np.inf
    for i, obs in enumerate(dataset):
        if obs.v <= threshold and obs.k > best_k:
            best_i, best_k = i, obs.k
    if best_i < 0:
        return None
    return Incumbent(index=best_i, k_best=best_k)


def _raw_joint_samples(model: GpModel, XS, n_samples, seed=None, base=None):
    s = joint_posterior_samples(model, XS, n_samples, seed=seed, base_normals=base)
    return model.standardize.scale * s + model.standardize.center


def qcei_mc(model_k: GpModel, model_v: GpModel, XS: np.ndarray, best: float,
            threshold: float, n_samples: int, seed: int | None = None,
            base_k: np.ndarray | None = None,
            base_v: np.ndarray | None = None) -> float:
    """MC estimate of E[max_i 1(v_i <= threshold) * max(0, k_i - best)].

    Joint posterior draws per channel (channels independent), raw units.
    Deterministic given the seed, or given fixed base normal draws.
    """
    XS = np.atleast_2d(np.asarray(XS, dtype=float))
    if base_k is None or base_v is None:
        if seed is None:
            raise ValueError("need a seed or base normals")
        rng = np.random.default_rng(seed)
        q = XS.shape[0]
        base_k = rng.standard_normal((n_samples, q))
        base_v = rng.standard_normal((n_samples, q))
    ks = _raw_joint_samples(model_k, XS, n_samples, base=base_k)
    vs = _raw_joint_samples(model_v, XS, n_samples, base=base_v)
    return float(mc_batch_improvement(ks, vs, best, threshold))


def q_feasibility_mc(model_v: GpModel, XS: np.ndarray, threshold: float,
                     n_samples: int, seed: int | None = None,
                     base_v: np.ndarray | None = None) -> float:
    """MC estimate of P(any batch point feasible); fallback acquisition when
    no feasible incumbent exists yet."""
    XS = np.atleast_2d(np.asarray(XS, dtype=float))
    if base_v is None:
        if seed is None:
            raise ValueError("need a seed or base normals")
        base_v = np.random.default_rng(seed).standard_normal((n_samples, XS.shape[0]))
    vs = _raw_joint_samples(model_v, XS, n_samples, base=base_v)
    return float(mc_batch_feasibility(vs, threshold))
