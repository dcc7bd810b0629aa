"""Monte Carlo estimation of Ising model expectations.

Model generators and exact oracles, Gibbs-based samplers (annealed and
parallel tempering), annealed importance sampling with log-space weights,
plain and neighborhood-resolved moment estimators, and a reproducible
benchmark harness with a CLI.
"""

__version__ = "0.1.0"

from .model import (
    IsingModel,
    energy,
    energies,
    local_field,
    validate_spins,
    generate_random_graph_model,
    generate_hopfield_model,
    generate_bipartite_model,
    save_model,
    load_model,
    model_to_json,
    model_from_json,
)
from .exact import ExactSolution, exact_solve, exact_solve_bipartite, exact_sample_set
from .rng import RNG_NAME, stream_rng, as_rng
from .samplers import (
    AnnealingSchedule,
    SampleSet,
    PtConfig,
    gibbs_sweep,
    blocked_gibbs_sweep_bipartite,
    annealed_sample_set,
    parallel_tempering_sample_set,
    swap_accept_prob,
    save_samples,
    load_samples,
)
from .ais import (
    WeightedSampleSet,
    AisDiagnostics,
    run_ais,
    ais_normalizer,
    free_energy_estimate,
    log_weight_from_energies,
    save_weighted_samples,
    load_weighted_samples,
)
from .estimators import (
    MomentReport,
    MaeResult,
    EstimatorVariance,
    mci_moments,
    smci1_magnetization,
    smci1_pair_moment,
    smci1_moments,
    weighted_moments,
    mae,
    empirical_estimator_variance,
    save_report,
)
from .harness import (
    ExperimentSpec,
    SweepRow,
    SweepResult,
    PhaseTiming,
    TimingReport,
    run_sweep,
    time_phases,
    exact_solution_for,
    emit,
    sweep_to_csv,
    sweep_to_json,
    sweep_from_json,
)

__all__ = [name for name in dir() if not name.startswith("_")]
