"""Budget-limited teacher corrections of a student's dataset.

A teacher who knows the true observation distribution modifies part of a
student's categorical dataset so the student's empirical pmf moves toward
the truth.
"""

from .binomial import (
    BinomialTheory,
    CorrectedPmf,
    corrected_pmf,
    corrected_pmf_oracle,
    delta_reduction,
    estimator_moments,
    variance_corrected,
    variance_ratio,
    variance_uncorrected,
)
from .core import (
    CostModel,
    CountVector,
    Discrepancy,
    ObservationDataset,
    Pmf,
    TransportPlan,
    apply_plan_to_sequence,
    build_min_cost_plan,
    counts_from_dataset,
    discrepancy,
    empirical_pmf,
    transport_cost_count,
    transport_cost_value,
)
from .errors import (
    CorrectionError,
    DimensionMismatchError,
    InputError,
    InstanceTooLargeError,
    IntegralityError,
    PreconditionError,
)
from .experiments import (
    BudgetExperimentConfig,
    ExperimentTable,
    VarianceExperimentConfig,
    run_budget_experiment,
    run_variance_experiment,
    sample_dataset,
)
from .solver import (
    CorrectionProblem,
    CorrectionSolution,
    Direction,
    min_budget,
    min_error,
    predicted_error,
    solve_bruteforce,
    solve_exact,
)

__version__ = "0.1.0"
