"""Inner-loop maximization of the acquisition surface over the unit cube.

Derivative-free: scrambled-Sobol raw scoring followed by pattern-search
refinement of the best starts, jointly over all q*d batch coordinates. Fixed
Monte Carlo base draws make the surface deterministic within one run.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .acquisition import AcquisitionConfig, q_feasibility_mc, qcei_mc, ucb
from .gp import GpModel, destandardize_arrays, posterior

_STEP_INIT = 0.25
_STEP_MIN = 1e-4


@dataclass(frozen=True)
class OptimizerBudget:
    raw_samples: int = 256
    restarts: int = 10
    max_iters_per_restart: int = 200
    convergence_tol: float = 1e-6

    def __post_init__(self):
        if min(self.raw_samples, self.restarts, self.max_iters_per_restart) < 1:
            raise ValueError("budget counts must be >= 1")
        if self.convergence_tol <= 0:
            raise ValueError("convergence tolerance must be positive")


def _pattern_search(objective, x0, f0, max_iters, tol):
    """Coordinate pattern search with shrinking step, projected to [0, 1]."""
    x, fx = x0.copy(), f0
    step = _STEP_INIT
    for _ in range(max_iters):
        improved = False
        gain = 0.0
        for i in range(x.size):
            for sign in (1.0, -1.0):
                cand = x.copy()
                cand[i] = min(1.0, max(0.0, cand[i] + sign * step))
                if cand[i] == x[i]:
                    continue
                fc = objective(cand)
                if fc > fx:
                    gain += fc - fx
                    x, fx = cand, fc
                    improved = True
                    break
        if not improved:
            step *= 0.5
            if step < _STEP_MIN:
                break
        elif gain < tol:
            break
    return x, fx


def propose_batch(model_k: GpModel, model_v: GpModel, config: AcquisitionConfig,
                  budget: OptimizerBudget, seed: int,
                  incumbent_value: float | None = None) -> np.ndarray:
    """Maximize the batch acquisition; returns a (q, d) unit-cube array.

    With kind "cei" and a feasible incumbent, maximizes the MC batch
    constrained EI; without an incumbent, maximizes the probability that any
    batch point is feasible. With kind "ucb", maximizes the batch sum of
    mean + beta*std of the objective posterior.
    """
    q, d = config.batch_size, model_k.train_inputs.shape[1]
    rng = np.random.default_rng(seed)
    base_k = rng.standard_normal((config.mc_samples, q))
    base_v = rng.standard_normal((config.mc_samples, q))

    if config.kind == "ucb":
        def objective(flat):
            mean, std = posterior(model_k, flat.reshape(q, d))
            mean, std = destandardize_arrays(model_k, mean, std)
            return float(np.sum(mean + config.ucb_beta * std))
    elif incumbent_value is None:
        def objective(flat):
            return q_feasibility_mc(model_v, flat.reshape(q, d),
                                    config.constraint_threshold,
                                    config.mc_samples, base_v=base_v)
    else:
        def objective(flat):
            return qcei_mc(model_k, model_v, flat.reshape(q, d),
                           incumbent_value, config.constraint_threshold,
                           config.mc_samples, base_k=base_k, base_v=base_v)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)   # Sobol balance warning
        sob = qmc.Sobol(d=q * d, scramble=True, seed=rng)
        raw = sob.random(budget.raw_samples)
    scores = np.array([objective(x) for x in raw])
    order = np.argsort(-scores, kind="stable")[:budget.restarts]

    best_x, best_f = raw[order[0]], scores[order[0]]
    for idx in order:
        x, f = _pattern_search(objective, raw[idx], scores[idx],
                               budget.max_iters_per_restart,
                               budget.convergence_tol)
        if f > best_f:
            best_x, best_f = x, f
    return best_x.reshape(q, d)
