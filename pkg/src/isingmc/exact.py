"""Exact oracles: full enumeration and bipartite analytic marginalization.

Both solvers return log Z, free energy F = -ln(Z)/beta, per-vertex
magnetizations, per-edge pair moments, and per-edge covariances. Full
enumeration costs O(2^n) and is guarded at n <= 25; the bipartite solver
enumerates only layer 0 and treats layer 1 analytically, costing
O(2^|V0| * |E|).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import IsingModel
from .rng import as_rng
from .samplers import SampleSet

ENUMERATION_GUARD = 25

_CHUNK_BITS = 16


@dataclass
class ExactSolution:
    log_partition: float
    free_energy: float  # nan at beta = 0, where -ln(Z)/beta is undefined
    magnetization: np.ndarray  # (n,)
    pair_moment: np.ndarray  # (num_edges,) aligned with model.edges
    covariance: np.ndarray  # (num_edges,)


def _free_energy(log_z: float, beta: float) -> float:
    return -log_z / beta if beta > 0 else math.nan


def _spins_of_indices(idx: np.ndarray, n: int) -> np.ndarray:
    """Decode state indices to (len(idx), n) spin rows; bit b=0 means +1."""
    bits = (idx[:, None] >> np.arange(n, dtype=np.uint64)) & 1
    return 1.0 - 2.0 * bits.astype(np.float64)


def exact_solve(model: IsingModel, beta: float) -> ExactSolution:
    """Exhaustive summation over all 2^n configurations.

    States are processed in vectorized chunks; the partition function and
    the weighted moment sums are accumulated against a running maximum log
    weight, so no intermediate exponential can overflow.
    """
    if beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    n = model.n
    if n > ENUMERATION_GUARD:
        raise ValueError(
            f"exact_solve enumerates 2^n states; n={n} exceeds guard {ENUMERATION_GUARD}"
        )
    ei, ej, cpl = model._edge_i, model._edge_j, model.coupling
    total = 1 << n
    chunk = 1 << min(n, _CHUNK_BITS)

    m = -np.inf  # running max of log weights
    z = 0.0
    mag = np.zeros(n)
    pair = np.zeros(model.num_edges)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.uint64)
        s = _spins_of_indices(idx, n)
        prod = s[:, ei] * s[:, ej]
        log_w = -beta * (-(s @ model.bias) - prod @ cpl)
        cm = float(log_w.max())
        if cm > m:
            scale = np.exp(m - cm)  # exp(-inf - cm) = 0 on the first chunk
            z *= scale
            mag *= scale
            pair *= scale
            m = cm
        w = np.exp(log_w - m)
        z += float(w.sum())
        mag += w @ s
        pair += w @ prod
    log_z = m + math.log(z)
    mag /= z
    pair /= z
    cov = pair - mag[ei] * mag[ej]
    return ExactSolution(log_z, _free_energy(log_z, beta), mag, pair, cov)


def _log_2cosh(x: np.ndarray) -> np.ndarray:
    """ln(2 cosh x), overflow-safe for large |x|."""
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2.0 * ax))


def exact_solve_bipartite(model: IsingModel, beta: float) -> ExactSolution:
    """Exact solution for a layered model by summing out layer 1.

    Marginalizing the layer-1 spins gives an unnormalized layer-0 marginal
    exp(beta*h0.x0) * prod_j 2cosh(f_j) with f_j = beta*(h_j + sum_k J_kj x_k),
    so only 2^|V0| states are enumerated. Layer-1 moments follow from
    <x_j | x0> = tanh(f_j).
    """
    if model.layers is None:
        raise ValueError("exact_solve_bipartite requires a model with layer metadata")
    if beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    n0, n1 = model.layers
    if n0 > ENUMERATION_GUARD:
        raise ValueError(f"layer-0 size {n0} exceeds guard {ENUMERATION_GUARD}")
    w01 = model.dense_coupling()[:n0, n0:]  # (n0, n1)
    h0, h1 = model.bias[:n0], model.bias[n0:]

    states = _spins_of_indices(np.arange(1 << n0, dtype=np.uint64), n0)  # (M, n0)
    fields = beta * (h1 + states @ w01)  # (M, n1)
    log_w = beta * (states @ h0) + _log_2cosh(fields).sum(axis=1)
    shift = float(log_w.max())
    w = np.exp(log_w - shift)
    z = float(w.sum())
    log_z = shift + math.log(z)
    prob = w / z

    cond_mag1 = np.tanh(fields)  # <x_j | x_{V0}>
    mag = np.concatenate([prob @ states, prob @ cond_mag1])
    ei, ej = model._edge_i, model._edge_j  # every edge has i in V0, j in V1
    pair = np.einsum("m,me->e", prob, states[:, ei] * cond_mag1[:, ej - n0])
    cov = pair - mag[ei] * mag[ej]
    return ExactSolution(log_z, _free_energy(log_z, beta), mag, pair, cov)


_SAMPLER_GUARD = 21  # exact sampling materializes all 2^n probabilities


def exact_sample_set(model: IsingModel, beta: float, num_samples: int, seed) -> SampleSet:
    """i.i.d. samples drawn from the exact Boltzmann distribution.

    Enumerates all state probabilities, so only usable at small n; intended
    as a bias-free reference sampler for estimator checks.
    """
    if model.n > _SAMPLER_GUARD:
        raise ValueError(f"exact sampling limited to n <= {_SAMPLER_GUARD}")
    if num_samples < 1:
        raise ValueError("need at least one sample")
    rng = as_rng(seed)
    total = 1 << model.n
    ei, ej = model._edge_i, model._edge_j
    s = _spins_of_indices(np.arange(total, dtype=np.uint64), model.n)
    log_w = beta * (s @ model.bias + (s[:, ei] * s[:, ej]) @ model.coupling)
    log_w -= log_w.max()
    p = np.exp(log_w)
    p /= p.sum()
    picks = rng.choice(total, size=num_samples, p=p)
    samples = s[picks].astype(np.int8)
    meta = {
        "sampler": "exact_enumeration",
        "seed": int(seed) if not isinstance(seed, np.random.Generator) else None,
        "beta": float(beta),
        "N": int(num_samples),
        "model_hash": model.hash_hex(),
    }
    return SampleSet(samples=samples, meta=meta)
