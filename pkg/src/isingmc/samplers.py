"""Transition kernels and sample-set generation.

Single-site Gibbs sweeps (fixed site order 0..n-1), blocked two-layer
sweeps for bipartite models, annealed ancestral sampling, and a parallel
tempering sampler. All samplers split their master seed into one
counter-based stream per chain (see rng.py): chain c consumes n uniforms
for its initial configuration and then n per sweep, so sample c is fully
determined by (seed, c) no matter how many chains run or in what order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .model import IsingModel, energies, validate_spins
from .rng import RNG_NAME, stream_rng

KERNELS = ("gibbs", "blocked")

# uniforms are generated in blocks of sweeps to bound memory
_BLOCK_DOUBLES = 8_000_000

_PT_SWAP_STREAM = 1 << 32  # swap-decision stream id, clear of replica ids


@dataclass
class AnnealingSchedule:
    """Monotone inverse-temperature ladder beta_0 = 0 < ... < beta_K = 1."""

    betas: np.ndarray

    def __post_init__(self):
        self.betas = np.ascontiguousarray(self.betas, dtype=np.float64)
        if self.betas.ndim != 1 or len(self.betas) < 2:
            raise ValueError("schedule needs at least beta_0 and beta_1")
        if self.betas[0] != 0.0 or self.betas[-1] != 1.0:
            raise ValueError("schedule must start at 0 and end at 1")
        if not np.all(np.diff(self.betas) > 0):
            raise ValueError("schedule must be strictly increasing")
        self.betas.setflags(write=False)

    @classmethod
    def uniform(cls, num_steps: int) -> "AnnealingSchedule":
        """The evenly spaced ladder beta_k = k / K."""
        if num_steps < 1:
            raise ValueError("need at least one annealing step")
        return cls(np.arange(num_steps + 1) / num_steps)

    @property
    def num_steps(self) -> int:
        return len(self.betas) - 1

    @property
    def deltas(self) -> np.ndarray:
        """Increments beta_k - beta_{k-1}, k = 1..K."""
        return np.diff(self.betas)

    def descriptor(self) -> dict:
        uniform = bool(
            np.array_equal(self.betas, np.arange(self.num_steps + 1) / self.num_steps)
        )
        return {"K": self.num_steps, "kind": "uniform" if uniform else "custom"}


@dataclass
class SampleSet:
    """N spin configurations plus provenance metadata."""

    samples: np.ndarray  # (N, n) int8, entries +-1
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.int8)
        if self.samples.ndim != 2 or self.samples.shape[0] < 1:
            raise ValueError("samples must be a non-empty (N, n) array")
        if not np.all(np.abs(self.samples) == 1):
            raise ValueError("sample entries must be exactly -1 or +1")

    @property
    def num_samples(self) -> int:
        return self.samples.shape[0]


@dataclass
class PtConfig:
    """Parallel tempering settings.

    The replica ladder is geometric from beta_target down to
    beta_low_fraction * beta_target with num_replicas rungs; one sample is
    recorded from the target replica after every sweeps_between_swaps
    sweeps, after a one-block burn-in.
    """

    total_samples: int
    num_replicas: int = 10
    beta_low_fraction: float = 0.01
    sweeps_between_swaps: int = 100

    def __post_init__(self):
        if self.total_samples < 1 or self.num_replicas < 1 or self.sweeps_between_swaps < 1:
            raise ValueError("counts in PtConfig must be >= 1")
        if not 0.0 < self.beta_low_fraction < 1.0:
            raise ValueError("beta_low_fraction must be in (0, 1)")

    def ladder(self, beta_target: float) -> np.ndarray:
        """Strictly decreasing replica temperatures, ladder[0] = beta_target."""
        if beta_target <= 0:
            raise ValueError("parallel tempering needs beta_target > 0")
        return beta_target * np.geomspace(1.0, self.beta_low_fraction, self.num_replicas)


def _conditional_up_prob(phi: np.ndarray) -> np.ndarray:
    # (1 + tanh(phi))/2 stays accurate for |phi| large, unlike the exp ratio
    return 0.5 * (1.0 + np.tanh(phi))


def gibbs_sweep(model: IsingModel, beta_eff: float, x: np.ndarray, rng) -> np.ndarray:
    """One full single-site Gibbs sweep, sites visited in order 0..n-1.

    Consumes exactly n uniforms from rng. Returns a new configuration;
    the input is not modified. This is the reference implementation of the
    transition kernel applied blockwise by the compiled sampler.
    """
    s = validate_spins(model, x).astype(np.float64)
    u = rng.random(model.n)
    for i in range(model.n):
        nbr, cpl = model.neighbors(i)
        phi = beta_eff * (model.bias[i] + cpl @ s[nbr])
        s[i] = 1.0 if u[i] < _conditional_up_prob(phi) else -1.0
    return s.astype(np.int8)


def blocked_gibbs_sweep_bipartite(
    model: IsingModel, beta_eff: float, x: np.ndarray, rng
) -> np.ndarray:
    """Resample layer 0 given layer 1, then layer 1 given the new layer 0.

    Within a layer the sites are conditionally independent, so each layer
    is drawn in one shot. On a layered model this coincides with a
    sequential site sweep because no edge joins two layer-0 (or two
    layer-1) vertices. Consumes n uniforms in site order.
    """
    if model.layers is None:
        raise ValueError("blocked sweep requires a model with layer metadata")
    n0, _ = model.layers
    s = validate_spins(model, x).astype(np.float64)
    u = rng.random(model.n)
    w01 = model.dense_coupling()[:n0, n0:]
    phi0 = beta_eff * (model.bias[:n0] + w01 @ s[n0:])
    s[:n0] = np.where(u[:n0] < _conditional_up_prob(phi0), 1.0, -1.0)
    phi1 = beta_eff * (model.bias[n0:] + w01.T @ s[:n0])
    s[n0:] = np.where(u[n0:] < _conditional_up_prob(phi1), 1.0, -1.0)
    return s.astype(np.int8)


def _chain_streams(seed: int, num_chains: int) -> list:
    return [stream_rng(seed, c) for c in range(num_chains)]

def _initial_spins(gens: list, n: int) -> np.ndarray:
    """Fair-coin initial configurations, n uniforms per chain."""
    spins = np.empty((len(gens), n))
    for c, g in enumerate(gens):
        spins[c] = np.where(g.random(n) < 0.5, 1.0, -1.0)
    return spins


def _advance_chains(
    model: IsingModel,
    spins: np.ndarray,
    betas_eff: np.ndarray,
    gens: list,
    record_energy: bool = False,
) -> Optional[np.ndarray]:
    """Apply one sweep per entry of betas_eff to every chain, in place.

    Returns the (N, num_sweeps) per-sweep energies when record_energy.
    """
    num_chains, n = spins.shape
    num_sweeps = len(betas_eff)
    out = np.empty((num_chains, num_sweeps)) if record_energy else None
    dummy = np.empty((1, 1))
    block = max(1, min(num_sweeps, _BLOCK_DOUBLES // max(1, num_chains * n)))
    u = np.empty((num_chains, block, n))
    for lo in range(0, num_sweeps, block):
        hi = min(lo + block, num_sweeps)
        ub = u[:, : hi - lo]
        for c, g in enumerate(gens):
            ub[c] = g.random((hi - lo, n))
        betas = np.repeat(betas_eff[None, lo:hi], num_chains, axis=0)
        _kernels.sweep_block(
            spins, betas, ub, model.bias,
            model._nbr_ptr, model._nbr_idx, model._nbr_cpl,
            model._edge_i, model._edge_j, model.coupling,
            out[:, lo:hi] if record_energy else dummy, record_energy,
        )
    return out


def _check_kernel(model: IsingModel, kernel: str) -> None:
    if kernel not in KERNELS:
        raise ValueError(f"unknown kernel {kernel!r}, expected one of {KERNELS}")
    if kernel == "blocked" and model.layers is None:
        raise ValueError("blocked kernel requires a model with layer metadata")


def annealed_sample_set(
    model: IsingModel,
    beta_target: float,
    schedule: AnnealingSchedule,
    kernel: str = "gibbs",
    num_samples: int = 1,
    seed: int = 0,
) -> SampleSet:
    """N independent annealed chains; the final state of each is one sample.

    Each chain starts from a uniform configuration and gets one kernel
    sweep at effective inverse temperature beta_target * beta_k for
    k = 1..K. No importance weights are produced.
    """
    _check_kernel(model, kernel)
    if beta_target < 0:
        raise ValueError(f"beta_target must be >= 0, got {beta_target}")
    if num_samples < 1:
        raise ValueError("need at least one sample")
    gens = _chain_streams(seed, num_samples)
    spins = _initial_spins(gens, model.n)
    _advance_chains(model, spins, beta_target * schedule.betas[1:], gens)
    meta = {
        "sampler": "annealed",
        "kernel": kernel,
        "seed": int(seed),
        "rng": RNG_NAME,
        "beta_target": float(beta_target),
        "schedule": schedule.descriptor(),
        "N": int(num_samples),
        "model_hash": model.hash_hex(),
    }
    return SampleSet(samples=spins.astype(np.int8), meta=meta)


def swap_accept_prob(beta_a: float, beta_b: float, energy_a: float, energy_b: float) -> float:
    """Metropolis replica-exchange acceptance min(1, exp((ba-bb)(Ea-Eb)))."""
    delta = (beta_a - beta_b) * (energy_a - energy_b)
    return 1.0 if delta >= 0 else math.exp(delta)


def parallel_tempering_sample_set(
    model: IsingModel,
    beta_target: float,
    pt: PtConfig,
    seed: int = 0,
) -> SampleSet:
    """Replica-exchange sampler recording the target-temperature replica.

    Replica r runs at ladder[r] and owns stream (seed, r); swap decisions
    draw from a dedicated stream. After each block of sweeps, adjacent
    pairs are proposed for exchange, alternating even pairs (0,1),(2,3),..
    and odd pairs (1,2),(3,4),.. between blocks. The first block is
    burn-in; each later block contributes one sample.
    """
    ladder = pt.ladder(beta_target)
    num_rep = pt.num_replicas
    gens = _chain_streams(seed, num_rep)
    swap_gen = stream_rng(seed, _PT_SWAP_STREAM)
    spins = _initial_spins(gens, model.n)
    betas = np.repeat(ladder[:, None], pt.sweeps_between_swaps, axis=1)
    dummy = np.empty((1, 1))
    samples = np.empty((pt.total_samples, model.n), dtype=np.int8)
    n_sw = pt.sweeps_between_swaps
    for block in range(pt.total_samples + 1):
        u = np.empty((num_rep, n_sw, model.n))
        for r, g in enumerate(gens):
            u[r] = g.random((n_sw, model.n))
        _kernels.sweep_block(
            spins, betas, u, model.bias,
            model._nbr_ptr, model._nbr_idx, model._nbr_cpl,
            model._edge_i, model._edge_j, model.coupling,
            dummy, False,
        )
        pairs = [(r, r + 1) for r in range(block % 2, num_rep - 1, 2)]
        if pairs:
            e = energies(model, spins)
            coins = swap_gen.random(len(pairs))
            for (a, b), coin in zip(pairs, coins):
                if coin < swap_accept_prob(ladder[a], ladder[b], e[a], e[b]):
                    spins[[a, b]] = spins[[b, a]]
                    e[[a, b]] = e[[b, a]]
        if block >= 1:
            samples[block - 1] = spins[0]
    meta = {
        "sampler": "parallel_tempering",
        "seed": int(seed),
        "rng": RNG_NAME,
        "beta_target": float(beta_target),
        "ladder": [float(b) for b in ladder],
        "spacing": "geometric",
        "num_replicas": num_rep,
        "sweeps_between_swaps": n_sw,
        "burn_in_blocks": 1,
        "swap_pattern": "alternating even/odd adjacent pairs",
        "N": int(pt.total_samples),
        "model_hash": model.hash_hex(),
    }
    return SampleSet(samples=samples, meta=meta)


def save_samples(sample_set: SampleSet, path) -> None:
    """CSV with header s0,s1,... plus a .meta.json sidecar."""
    import json
    from pathlib import Path

    path = Path(path)
    n = sample_set.samples.shape[1]
    with open(path, "w") as f:
        f.write(",".join(f"s{i}" for i in range(n)) + "\n")
        for row in sample_set.samples:
            f.write(",".join(str(int(v)) for v in row) + "\n")
    with open(path.with_suffix(".meta.json"), "w") as f:
        json.dump(sample_set.meta, f, indent=1)
        f.write("\n")


def load_samples(path) -> SampleSet:
    import json
    from pathlib import Path

    path = Path(path)
    rows = []
    with open(path) as f:
        next(f)  # header
        for line in f:
            rows.append([int(v) for v in line.strip().split(",")])
    sidecar = path.with_suffix(".meta.json")
    meta = json.loads(sidecar.read_text()) if sidecar.exists() else {}
    return SampleSet(samples=np.array(rows, dtype=np.int8), meta=meta)
