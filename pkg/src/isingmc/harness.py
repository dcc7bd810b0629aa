"""Experiment runner: seeded trial fan-out, paired-method sweeps, timing.

Each trial draws a fresh model from the configured family and evaluates
every requested method against the exact oracle on that same model, so
method comparisons are paired. Within a trial, methods that consume the
same kind of sample set share it: mci/smci share one annealed set, ais and
ais+smci share one weighted set. Base-sampler seeds are drawn per
(trial, grid point) in a fixed order that does not depend on which methods
were requested, so adding a method never changes another method's numbers.

Trials can fan out over a process pool (ISINGMC_WORKERS env var); every
trial is seed-isolated and aggregation is a fixed-order reduce, so results
do not depend on the worker count.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .ais import run_ais, WeightedSampleSet
from .estimators import mae, mci_moments, smci1_moments, weighted_moments
from .exact import ENUMERATION_GUARD, exact_solve, exact_solve_bipartite
from .model import (
    IsingModel,
    generate_bipartite_model,
    generate_hopfield_model,
    generate_random_graph_model,
)
from .rng import RNG_NAME, stream_rng
from .samplers import AnnealingSchedule, PtConfig, annealed_sample_set, parallel_tempering_sample_set

METHODS = ("mci", "smci", "ais", "ais+smci", "pt+smci", "exact")
FAMILIES = ("random", "hopfield", "bipartite")

WORKERS_ENV = "ISINGMC_WORKERS"


@dataclass
class ExperimentSpec:
    """Configuration for one sweep; grids multiply into a cartesian grid."""

    family: str = "random"
    n: int = 20
    p: float = 0.2  # connection probability (random and bipartite families)
    m: int = 4  # pattern count (hopfield family)
    n0: int = 6
    n1: int = 30
    param_lo: float = -1.0
    param_hi: float = 1.0
    betas: tuple = (1.0,)
    Ns: tuple = (1000,)
    Ks: tuple = (1000,)
    methods: tuple = ("mci", "smci", "ais", "ais+smci")
    trials: int = 50
    seed: int = 0
    pt_replicas: int = 10
    pt_beta_low_fraction: float = 0.01
    pt_sweeps: int = 100

    def __post_init__(self):
        self.betas = tuple(float(b) for b in self.betas)
        self.Ns = tuple(int(v) for v in self.Ns)
        self.Ks = tuple(int(v) for v in self.Ks)
        self.methods = tuple(self.methods)

    def validate(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}, expected one of {FAMILIES}")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}, expected one of {METHODS}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.betas or not self.Ns or not self.Ks:
            raise ValueError("beta/N/K grids must be non-empty")
        if any(b < 0 for b in self.betas):
            raise ValueError("betas must be >= 0")
        if any(v < 1 for v in self.Ns) or any(v < 1 for v in self.Ks):
            raise ValueError("N and K must be >= 1")
        # every method is scored against the exact oracle
        enum_size = self.n0 if self.family == "bipartite" else self.n
        if enum_size > ENUMERATION_GUARD:
            raise ValueError(
                f"exact oracle needs enumeration size <= {ENUMERATION_GUARD}, got {enum_size}"
            )

    @property
    def family_param(self) -> float:
        """The one-number family descriptor used in output rows."""
        if self.family == "hopfield":
            return self.m / self.n
        return self.p


@dataclass
class SweepRow:
    family: str
    param: float
    beta: float
    method: str
    N: int
    K: int
    trials: int
    mae_mean: float
    mae_stderr: float


@dataclass
class PhaseTiming:
    method: str
    beta: float
    N: int
    K: int
    sampling_s: float
    weights_s: float
    expectations_s: float


@dataclass
class SweepResult:
    rows: list
    timings: list
    meta: dict
    trial_detail: Optional[dict] = None  # (beta, N, K, method) -> per-trial MAEs


def _make_model(spec: ExperimentSpec, rng) -> IsingModel:
    if spec.family == "random":
        return generate_random_graph_model(spec.n, spec.p, (spec.param_lo, spec.param_hi), rng)
    if spec.family == "hopfield":
        return generate_hopfield_model(spec.n, spec.m, rng)
    return generate_bipartite_model(spec.n0, spec.n1, spec.p, (spec.param_lo, spec.param_hi), rng)


def exact_solution_for(model: IsingModel, beta: float):
    """Dispatch to the cheaper analytic oracle when the model is layered."""
    if model.layers is not None:
        return exact_solve_bipartite(model, beta)
    return exact_solve(model, beta)


def _run_trial(args):
    """All methods on one freshly drawn model; returns per-(grid, method) records."""
    spec, trial_seed, grid = args
    model = _make_model(spec, stream_rng(trial_seed, 0))
    seed_stream = stream_rng(trial_seed, 1)
    kernel = "blocked" if model.layers is not None else "gibbs"
    out = {}
    for g, (beta, num_samples, num_steps) in enumerate(grid):
        # one seed per base sampler, drawn whether or not the base is used
        plain_seed, ais_seed, pt_seed = (int(v) for v in seed_stream.integers(0, 2**63, size=3))
        exact_sol = exact_solution_for(model, beta)
        schedule = AnnealingSchedule.uniform(num_steps)
        plain = weighted = pt_set = None
        t_plain = t_ais = t_pt = 0.0
        if {"mci", "smci"} & set(spec.methods):
            t0 = time.perf_counter()
            plain = annealed_sample_set(model, beta, schedule, kernel, num_samples, plain_seed)
            t_plain = time.perf_counter() - t0
        if {"ais", "ais+smci"} & set(spec.methods):
            t0 = time.perf_counter()
            weighted = run_ais(model, beta, schedule, kernel, num_samples, ais_seed)
            t_ais = time.perf_counter() - t0
        if "pt+smci" in spec.methods:
            pt = PtConfig(
                total_samples=num_samples,
                num_replicas=spec.pt_replicas,
                beta_low_fraction=spec.pt_beta_low_fraction,
                sweeps_between_swaps=spec.pt_sweeps,
            )
            t0 = time.perf_counter()
            pt_set = parallel_tempering_sample_set(model, beta, pt, pt_seed)
            t_pt = time.perf_counter() - t0
        for method in spec.methods:
            t0 = time.perf_counter()
            if method == "mci":
                report, t_samp = mci_moments(model, beta, plain), t_plain
            elif method == "smci":
                report, t_samp = smci1_moments(model, beta, plain), t_plain
            elif method == "ais":
                report, t_samp = weighted_moments(model, beta, weighted, "mci"), t_ais
            elif method == "ais+smci":
                report, t_samp = weighted_moments(model, beta, weighted, "smci1"), t_ais
            elif method == "pt+smci":
                report, t_samp = smci1_moments(model, beta, pt_set), t_pt
            else:  # exact: oracle against itself
                report, t_samp = exact_sol, 0.0
            t_est = time.perf_counter() - t0
            out[(g, method)] = (mae(exact_sol, report).mae, t_samp, t_est)
    return out


def run_sweep(spec: ExperimentSpec, keep_trial_detail: bool = False) -> SweepResult:
    """Run all trials and aggregate mean/stderr MAE per grid point and method."""
    spec.validate()
    grid = [(b, N, K) for b in spec.betas for N in spec.Ns for K in spec.Ks]
    root = stream_rng(spec.seed, 0)
    trial_seeds = [int(v) for v in root.integers(0, 2**63, size=spec.trials)]
    payloads = [(spec, ts, grid) for ts in trial_seeds]

    workers = int(os.environ.get(WORKERS_ENV, "1"))
    if workers > 1 and spec.trials > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_trial, payloads))
    else:
        records = [_run_trial(p) for p in payloads]

    rows, timings = [], []
    detail = {}
    for g, (beta, num_samples, num_steps) in enumerate(grid):
        for method in spec.methods:
            maes = np.array([rec[(g, method)][0] for rec in records])
            stderr = float(maes.std(ddof=1) / np.sqrt(len(maes))) if len(maes) > 1 else 0.0
            rows.append(
                SweepRow(
                    family=spec.family,
                    param=float(spec.family_param),
                    beta=beta,
                    method=method,
                    N=num_samples,
                    K=num_steps,
                    trials=spec.trials,
                    mae_mean=float(maes.mean()),
                    mae_stderr=stderr,
                )
            )
            timings.append(
                PhaseTiming(
                    method=method,
                    beta=beta,
                    N=num_samples,
                    K=num_steps,
                    sampling_s=float(sum(rec[(g, method)][1] for rec in records)),
                    weights_s=0.0,  # fused with sampling here; time_phases splits it
                    expectations_s=float(sum(rec[(g, method)][2] for rec in records)),
                )
            )
            if keep_trial_detail:
                detail[(beta, num_samples, num_steps, method)] = [float(v) for v in maes]
    meta = _canonical_meta(spec, extra={"workers": workers})
    return SweepResult(rows=rows, timings=timings, meta=meta,
                       trial_detail=detail if keep_trial_detail else None)


def _canonical_meta(spec: ExperimentSpec, extra: Optional[dict] = None) -> dict:
    meta = {
        "spec": asdict(spec),
        "seed": spec.seed,
        "rng": RNG_NAME,
        "version": __version__,
    }
    meta.update(extra or {})
    # normalize to JSON-native types so emit/load round-trips compare equal
    return json.loads(json.dumps(meta))


@dataclass
class TimingReport:
    rows: list  # PhaseTiming
    meta: dict


def time_phases(spec: ExperimentSpec, reps: int = 3) -> TimingReport:
    """Median wall-clock of the sampling / weights / expectations phases.

    Sampling and weight evaluation are fused in the compiled sweep (the
    per-step energies come out of the same pass), so the weights phase is
    measured differentially: the same seeded run is repeated with energy
    recording disabled and the difference is attributed to weights.
    """
    spec.validate()
    if reps < 3:
        raise ValueError("need at least 3 repetitions for a median")
    beta, num_samples, num_steps = spec.betas[0], spec.Ns[0], spec.Ks[0]
    model = _make_model(spec, stream_rng(spec.seed, 0))
    kernel = "blocked" if model.layers is not None else "gibbs"
    schedule = AnnealingSchedule.uniform(num_steps)

    from .samplers import _advance_chains, _chain_streams, _initial_spins

    samp, wght, exp_mci, exp_smci = [], [], [], []
    for rep in range(reps):
        seed = spec.seed + rep + 1
        # sampling only: identical sweeps, no energy recording
        gens = _chain_streams(seed, num_samples)
        spins = _initial_spins(gens, model.n)
        t0 = time.perf_counter()
        _advance_chains(model, spins, beta * schedule.betas[1:-1], gens)
        t_sampling = time.perf_counter() - t0
        # full run: sweeps plus per-step energy accumulation into weights
        t0 = time.perf_counter()
        weighted = run_ais(model, beta, schedule, kernel, num_samples, seed)
        t_full = time.perf_counter() - t0
        samp.append(t_sampling)
        wght.append(max(0.0, t_full - t_sampling))
        t0 = time.perf_counter()
        weighted_moments(model, beta, weighted, "mci")
        exp_mci.append(time.perf_counter() - t0)
        t0 = time.perf_counter()
        weighted_moments(model, beta, weighted, "smci1")
        exp_smci.append(time.perf_counter() - t0)

    med = lambda v: float(np.median(v))
    rows = [
        PhaseTiming("ais", beta, num_samples, num_steps, med(samp), med(wght), med(exp_mci)),
        PhaseTiming("ais+smci", beta, num_samples, num_steps, med(samp), med(wght), med(exp_smci)),
    ]
    return TimingReport(rows=rows, meta=_canonical_meta(spec, extra={"reps": reps}))


SWEEP_CSV_HEADER = "family,param,beta,method,N,K,trials,mae_mean,mae_stderr"


def sweep_to_csv(result: SweepResult) -> str:
    lines = [SWEEP_CSV_HEADER]
    for r in result.rows:
        lines.append(
            f"{r.family},{r.param!r},{r.beta!r},{r.method},{r.N},{r.K},"
            f"{r.trials},{r.mae_mean!r},{r.mae_stderr!r}"
        )
    return "\n".join(lines) + "\n"


def sweep_to_json(result: SweepResult) -> str:
    doc = {
        "rows": [asdict(r) for r in result.rows],
        "timings": [asdict(t) for t in result.timings],
        "meta": result.meta,
    }
    if result.trial_detail is not None:
        doc["trial_detail"] = [
            {"beta": b, "N": N, "K": K, "method": m, "maes": v}
            for (b, N, K, m), v in result.trial_detail.items()
        ]
    return json.dumps(doc, indent=1) + "\n"


def sweep_from_json(text: str) -> SweepResult:
    doc = json.loads(text)
    rows = [SweepRow(**r) for r in doc["rows"]]
    timings = [PhaseTiming(**t) for t in doc["timings"]]
    detail = None
    if "trial_detail" in doc:
        detail = {
            (d["beta"], d["N"], d["K"], d["method"]): d["maes"] for d in doc["trial_detail"]
        }
    return SweepResult(rows=rows, timings=timings, meta=doc["meta"], trial_detail=detail)


def timings_to_csv(report: TimingReport) -> str:
    lines = ["method,beta,N,K,sampling_s,weights_s,expectations_s"]
    for t in report.rows:
        lines.append(
            f"{t.method},{t.beta!r},{t.N},{t.K},{t.sampling_s!r},{t.weights_s!r},{t.expectations_s!r}"
        )
    return "\n".join(lines) + "\n"


def emit(result, fmt: str, path) -> list:
    """Write a result to path in the requested format; returns written paths.

    Everything is assembled in memory first, so a failure cannot leave a
    partially written table behind.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    written = []
    if isinstance(result, SweepResult):
        if fmt == "csv":
            text = sweep_to_csv(result)
        elif fmt == "json":
            text = sweep_to_json(result)
        else:
            raise ValueError(f"unknown format {fmt!r}")
    elif isinstance(result, TimingReport):
        if fmt == "csv":
            text = timings_to_csv(result)
        elif fmt == "json":
            text = json.dumps({"rows": [asdict(t) for t in result.rows], "meta": result.meta}, indent=1) + "\n"
        else:
            raise ValueError(f"unknown format {fmt!r}")
    else:
        raise ValueError(f"cannot emit {type(result).__name__}")
    path.write_text(text)
    written.append(path)
    return written
