"""Moment estimators over sample sets.

Plain sample averages (MCI), first-order neighborhood-resolved estimates
that sum one or two spins analytically given their sampled surroundings
(referred to as smci1 here), importance-weighted versions of both for
weighted sample sets, the covariance mean-absolute-error metric, and an
empirical across-run variance report.

The two smci1 closed forms are, per sample mu:

    <x_i>     ~ mean_mu tanh(phi_i)
    <x_i x_j> ~ mean_mu tanh( atanh(tanh(psi_ij) * tanh(psi_ji)) + beta*J_ij )

with phi_i = beta*(h_i + sum_{k in nbr(i)} J_ik s_k) and
psi_ij = phi_i - beta*J_ij*s_j (the field on i with j's contribution
removed). The tanh product can round to +-1 when fields saturate, so it is
clamped to 1 - 1e-15 in magnitude before atanh; the statistical effect is
below measurement noise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import IsingModel
from .samplers import SampleSet
from .ais import WeightedSampleSet

_ATANH_EPS = 1e-15


@dataclass
class MomentReport:
    """Estimated first and second moments for one model and method."""

    magnetization: np.ndarray  # (n,)
    pair_moment: np.ndarray  # (num_edges,) aligned with model.edges
    covariance: np.ndarray  # (num_edges,) = pair - mag_i*mag_j by construction
    method: str
    n_samples: int
    ess: Optional[float] = None


@dataclass
class MaeResult:
    mae: float
    per_edge_abs_err: np.ndarray


@dataclass
class EstimatorVariance:
    """Unbiased across-run sample variance, per vertex and per edge."""

    magnetization: np.ndarray
    pair_moment: np.ndarray
    covariance: np.ndarray
    num_runs: int


def _spins_float(model: IsingModel, sample_set: SampleSet) -> np.ndarray:
    s = sample_set.samples
    if s.shape[1] != model.n:
        raise ValueError(f"samples have {s.shape[1]} spins, model has {model.n}")
    return s.astype(np.float64)


def _report(model, mag, pair, method, n_samples, ess=None) -> MomentReport:
    cov = pair - mag[model._edge_i] * mag[model._edge_j]
    return MomentReport(
        magnetization=mag, pair_moment=pair, covariance=cov,
        method=method, n_samples=n_samples, ess=ess,
    )


def mci_moments(model: IsingModel, beta: float, sample_set: SampleSet) -> MomentReport:
    """Plain sample averages of x_i and x_i*x_j."""
    s = _spins_float(model, sample_set)
    mag = s.mean(axis=0)
    pair = (s[:, model._edge_i] * s[:, model._edge_j]).mean(axis=0)
    return _report(model, mag, pair, "mci", s.shape[0])


def _field_matrix(model: IsingModel, beta: float, s: np.ndarray) -> np.ndarray:
    """phi[mu, i] = beta*(h_i + sum_j J_ij s_j^(mu))."""
    return beta * (model.bias + s @ model.dense_coupling())


def _pair_summands(model: IsingModel, beta: float, s: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Per-sample closed-form summands for every edge, shape (N, num_edges)."""
    ei, ej = model._edge_i, model._edge_j
    bj = beta * model.coupling
    psi_ij = phi[:, ei] - bj * s[:, ej]
    psi_ji = phi[:, ej] - bj * s[:, ei]
    t = np.tanh(psi_ij) * np.tanh(psi_ji)
    np.clip(t, -1.0 + _ATANH_EPS, 1.0 - _ATANH_EPS, out=t)
    return np.tanh(np.arctanh(t) + bj)


def smci1_magnetization(model: IsingModel, beta: float, sample_set: SampleSet, i: int) -> float:
    """mean_mu tanh(phi_i^(mu)) for one vertex."""
    if not (0 <= i < model.n):
        raise ValueError(f"vertex {i} out of range for n={model.n}")
    s = _spins_float(model, sample_set)
    nbr, cpl = model.neighbors(i)
    phi = beta * (model.bias[i] + s[:, nbr] @ cpl)
    return float(np.tanh(phi).mean())


def smci1_pair_moment(model: IsingModel, beta: float, sample_set: SampleSet, edge) -> float:
    """Closed-form pair estimate for one edge of the model."""
    i, j = edge
    if (min(i, j), max(i, j)) not in model._edge_index:
        raise ValueError(f"({i},{j}) is not an edge of the model")
    e = model.edge_id(i, j)
    s = _spins_float(model, sample_set)
    phi = _field_matrix(model, beta, s)
    return float(_pair_summands(model, beta, s, phi)[:, e].mean())


def smci1_moments(model: IsingModel, beta: float, sample_set: SampleSet) -> MomentReport:
    """First-order closed forms applied to every vertex and edge, O(N*|E|)."""
    s = _spins_float(model, sample_set)
    phi = _field_matrix(model, beta, s)
    mag = np.tanh(phi).mean(axis=0)
    pair = _pair_summands(model, beta, s, phi).mean(axis=0)
    return _report(model, mag, pair, "smci1", s.shape[0])


def weighted_moments(
    model: IsingModel, beta: float, weighted: WeightedSampleSet, mode: str = "mci"
) -> MomentReport:
    """Importance-weighted moments from a weighted sample set.

    mode "mci" averages the raw spin products; mode "smci1" averages the
    closed-form summands. Weights are normalized by their sum after a
    max-log shift, so large-magnitude log weights cannot overflow.
    """
    if mode not in ("mci", "smci1"):
        raise ValueError(f"unknown mode {mode!r}")
    lw = weighted.log_weights
    shift = lw.max()
    if not np.isfinite(shift):
        raise ValueError("all importance weights are zero; estimator undefined")
    w = np.exp(lw - shift)
    w /= w.sum()
    s = weighted.samples.astype(np.float64)
    if s.shape[1] != model.n:
        raise ValueError(f"samples have {s.shape[1]} spins, model has {model.n}")
    ess = float(1.0 / (w @ w))
    if mode == "mci":
        mag = w @ s
        pair = w @ (s[:, model._edge_i] * s[:, model._edge_j])
    else:
        phi = _field_matrix(model, beta, s)
        mag = w @ np.tanh(phi)
        pair = w @ _pair_summands(model, beta, s, phi)
    return _report(model, mag, pair, f"weighted_{mode}", s.shape[0], ess=ess)


def mae(exact, approx: MomentReport) -> MaeResult:
    """Mean absolute covariance error over the edge set."""
    ce = np.asarray(exact.covariance, dtype=np.float64)
    ca = np.asarray(approx.covariance, dtype=np.float64)
    if ce.shape != ca.shape:
        raise ValueError(f"edge sets differ: {ce.shape} vs {ca.shape}")
    err = np.abs(ce - ca)
    return MaeResult(mae=float(err.mean()) if err.size else 0.0, per_edge_abs_err=err)


def empirical_estimator_variance(runs: list[MomentReport]) -> EstimatorVariance:
    """Sample variance (ddof=1) of each estimated quantity across runs."""
    if len(runs) < 2:
        raise ValueError("need at least two runs to estimate variance")
    method = runs[0].method
    shape = runs[0].magnetization.shape, runs[0].pair_moment.shape
    for r in runs[1:]:
        if r.method != method:
            raise ValueError(f"mixed methods {method!r} and {r.method!r}")
        if (r.magnetization.shape, r.pair_moment.shape) != shape:
            raise ValueError("runs come from different models")
    mags = np.stack([r.magnetization for r in runs])
    pairs = np.stack([r.pair_moment for r in runs])
    covs = np.stack([r.covariance for r in runs])
    return EstimatorVariance(
        magnetization=mags.var(axis=0, ddof=1),
        pair_moment=pairs.var(axis=0, ddof=1),
        covariance=covs.var(axis=0, ddof=1),
        num_runs=len(runs),
    )


def save_report(report: MomentReport, model: IsingModel, prefix) -> None:
    """Write <prefix>_vertices.csv, <prefix>_edges.csv, and <prefix>.json."""
    import json
    from pathlib import Path

    prefix = Path(prefix)
    with open(prefix.parent / (prefix.name + "_vertices.csv"), "w") as f:
        f.write("vertex,magnetization\n")
        for i, m in enumerate(report.magnetization):
            f.write(f"{i},{m!r}\n")
    with open(prefix.parent / (prefix.name + "_edges.csv"), "w") as f:
        f.write("i,j,pair_moment,covariance\n")
        for (i, j), pm, cv in zip(model.edges, report.pair_moment, report.covariance):
            f.write(f"{i},{j},{pm!r},{cv!r}\n")
    summary = {
        "method": report.method,
        "n_samples": report.n_samples,
        "ess": report.ess,
        "magnetization": [float(v) for v in report.magnetization],
        "pair_moment": [float(v) for v in report.pair_moment],
        "covariance": [float(v) for v in report.covariance],
    }
    with open(prefix.parent / (prefix.name + ".json"), "w") as f:
        json.dump(summary, f, indent=1)
        f.write("\n")
