"""Annealed importance sampling: weighted sample sets and free energy.

A chain starts from the uniform distribution and is pushed through the
annealing ladder by Gibbs sweeps; the states x^(1)..x^(K) visited along
the way accumulate the log importance weight

    ln w = -beta * sum_{k=1..K} (beta_k - beta_{k-1}) * E(x^(k)),

where x^(1) is the uniform draw and x^(k), k >= 2, is produced by the
kernel at effective temperature beta * beta_{k-1}. The weight index
convention matters: each E(x^(k)) is the energy of the state *before* the
transition toward beta_k, and an off-by-one here silently biases the free
energy. All weight bookkeeping stays in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .model import IsingModel, energies
from .rng import RNG_NAME
from .samplers import (
    AnnealingSchedule,
    _advance_chains,
    _chain_streams,
    _check_kernel,
    _initial_spins,
)


@dataclass
class WeightedSampleSet:
    """Endpoint configurations with per-chain log importance weights."""

    samples: np.ndarray  # (N, n) int8
    log_weights: np.ndarray  # (N,)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.int8)
        self.log_weights = np.asarray(self.log_weights, dtype=np.float64)
        if self.samples.ndim != 2 or self.samples.shape[0] < 1:
            raise ValueError("samples must be a non-empty (N, n) array")
        if self.log_weights.shape != (self.samples.shape[0],):
            raise ValueError("need one log weight per sample")
        if not np.all(np.isfinite(self.log_weights)):
            raise ValueError("log weights must be finite")

    @property
    def num_samples(self) -> int:
        return self.samples.shape[0]


@dataclass
class AisDiagnostics:
    """Weight-degeneracy summary: ln(sum w), effective sample size,
    and the largest normalized weight."""

    log_omega: float
    ess: float
    max_weight_share: float


def run_ais(
    model: IsingModel,
    beta_target: float,
    schedule: AnnealingSchedule,
    kernel: str = "gibbs",
    num_samples: int = 1,
    seed: int = 0,
) -> WeightedSampleSet:
    """Generate N annealed trajectories and their log importance weights."""
    _check_kernel(model, kernel)
    if beta_target < 0:
        raise ValueError(f"beta_target must be >= 0, got {beta_target}")
    if num_samples < 1:
        raise ValueError("need at least one sample")
    gens = _chain_streams(seed, num_samples)
    spins = _initial_spins(gens, model.n)
    e_first = energies(model, spins)
    # sweeps at beta * beta_k for k = 1..K-1 produce x^(2)..x^(K)
    e_later = _advance_chains(
        model, spins, beta_target * schedule.betas[1:-1], gens, record_energy=True
    )
    e_path = np.hstack([e_first[:, None], e_later])  # (N, K), column k-1 = E(x^(k))
    log_w = -beta_target * (e_path @ schedule.deltas)
    meta = {
        "sampler": "ais",
        "kernel": kernel,
        "seed": int(seed),
        "rng": RNG_NAME,
        "beta_target": float(beta_target),
        "schedule": schedule.descriptor(),
        "N": int(num_samples),
        "model_hash": model.hash_hex(),
    }
    return WeightedSampleSet(samples=spins.astype(np.int8), log_weights=log_w, meta=meta)


def log_weight_from_energies(
    beta_target: float, schedule: AnnealingSchedule, path_energies: np.ndarray
) -> float:
    """Reduced log weight for one trajectory; path_energies[k-1] = E(x^(k))."""
    path_energies = np.asarray(path_energies, dtype=np.float64)
    if path_energies.shape != (schedule.num_steps,):
        raise ValueError("need one energy per annealing step")
    return float(-beta_target * (path_energies @ schedule.deltas))


def _log_weight_by_distribution_ratios(
    beta_target: float, schedule: AnnealingSchedule, path_energies: np.ndarray
) -> float:
    """Log weight as sum_k [ln q_k(x^(k)) - ln q_{k-1}(x^(k))].

    q_k is the unnormalized intermediate distribution with uniform base,
    ln q_k(x) = -beta * beta_k * E(x). Kept as an independent path so tests
    can confirm the telescoped form above reproduces it.
    """
    path_energies = np.asarray(path_energies, dtype=np.float64)
    if path_energies.shape != (schedule.num_steps,):
        raise ValueError("need one energy per annealing step")
    total = 0.0
    for k in range(1, schedule.num_steps + 1):
        e_k = path_energies[k - 1]
        total += (-beta_target * schedule.betas[k] * e_k) - (
            -beta_target * schedule.betas[k - 1] * e_k
        )
    return total


def ais_normalizer(weighted: WeightedSampleSet) -> AisDiagnostics:
    """ln(sum of weights), ESS = (sum w)^2 / sum w^2, and max weight share."""
    lw = weighted.log_weights
    log_omega = float(logsumexp(lw))
    ess = float(np.exp(2.0 * log_omega - logsumexp(2.0 * lw)))
    max_share = float(np.exp(lw.max() - log_omega))
    return AisDiagnostics(log_omega=log_omega, ess=ess, max_weight_share=max_share)


def free_energy_estimate(weighted: WeightedSampleSet, beta_target: float, n: int) -> float:
    """-(1/beta) ln Z0 - (1/beta) ln(Omega/N), with Z0 = 2^n (uniform base)."""
    if beta_target <= 0:
        raise ValueError("free energy estimate is undefined at beta_target = 0")
    diag = ais_normalizer(weighted)
    log_n = math.log(weighted.num_samples)
    return -(n * math.log(2.0)) / beta_target - (diag.log_omega - log_n) / beta_target


def save_weighted_samples(weighted: WeightedSampleSet, path) -> None:
    """CSV with spin columns plus log_weight, and a .meta.json sidecar."""
    import json
    from pathlib import Path

    path = Path(path)
    n = weighted.samples.shape[1]
    with open(path, "w") as f:
        f.write(",".join(f"s{i}" for i in range(n)) + ",log_weight\n")
        for row, lw in zip(weighted.samples, weighted.log_weights):
            f.write(",".join(str(int(v)) for v in row) + f",{lw!r}\n")
    with open(path.with_suffix(".meta.json"), "w") as f:
        json.dump(weighted.meta, f, indent=1)
        f.write("\n")


def load_weighted_samples(path) -> WeightedSampleSet:
    import json
    from pathlib import Path

    path = Path(path)
    rows, lws = [], []
    with open(path) as f:
        next(f)
        for line in f:
            *spins, lw = line.strip().split(",")
            rows.append([int(v) for v in spins])
            lws.append(float(lw))
    sidecar = path.with_suffix(".meta.json")
    meta = json.loads(sidecar.read_text()) if sidecar.exists() else {}
    return WeightedSampleSet(
        samples=np.array(rows, dtype=np.int8), log_weights=np.array(lws), meta=meta
    )
