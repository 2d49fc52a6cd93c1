"""Build problems and experiment configs from ``key = value`` mappings.

Problem file keys: ``p0``, ``counts`` or ``dataset`` (path, relative to the
file), ``budget``, ``cost_model`` (value|count), ``discrepancy``
(l1|l2|kl), ``direction`` (coop|adv).

Variance config keys: ``theta0``, ``n_values``, ``budgets``, ``replicates``,
``seed``. Budget config keys: ``p0``, ``counts`` or ``dataset``, ``budgets``,
``cost_model``, ``discrepancy``.
"""

from __future__ import annotations

from pathlib import Path

from .core import CostModel, CountVector, Discrepancy, Pmf, counts_from_dataset
from .errors import InputError
from .experiments import BudgetExperimentConfig, VarianceExperimentConfig
from .fileio import parse_list, read_dataset, read_keyvalue
from .solver import CorrectionProblem, Direction

_COST = {"value": CostModel.VALUE_DISTANCE, "count": CostModel.CHANGE_COUNT}
_DISC = {"l1": Discrepancy.L1, "l2": Discrepancy.L2, "kl": Discrepancy.KL}
_DIR = {"coop": Direction.COOPERATIVE, "adv": Direction.ADVERSARIAL}


def _choice(table, key, value):
    try:
        return table[value.strip().lower()]
    except KeyError:
        raise InputError(f"{key} must be one of {sorted(table)}, got {value!r}") from None


def _int(key, value):
    try:
        return int(value)
    except ValueError:
        raise InputError(f"{key} must be an integer, got {value!r}") from None


def _float(key, value):
    try:
        return float(value)
    except ValueError:
        raise InputError(f"{key} must be a real number, got {value!r}") from None


def _p0(values: dict) -> Pmf:
    if "p0" not in values:
        raise InputError("missing required key 'p0'")
    return Pmf.normalized(parse_list(values["p0"]), tol=1e-9)


def _counts(values: dict, base_dir, dataset=None):
    """Counts from ``counts`` or a ``dataset`` path; also returns the dataset if one was read."""
    if dataset is None and "dataset" in values:
        path = Path(values["dataset"])
        dataset = read_dataset(path if path.is_absolute() else Path(base_dir) / path)
    if dataset is not None:
        return counts_from_dataset(dataset), dataset
    if "counts" not in values:
        raise InputError("one of 'counts' or 'dataset' is required")
    return CountVector(tuple(parse_list(values["counts"], int))), None


def problem_from_mapping(values: dict, base_dir=".", dataset=None):
    """Returns ``(CorrectionProblem, dataset or None)``."""
    p0 = _p0(values)
    counts, dataset = _counts(values, base_dir, dataset)
    if dataset is not None and dataset.num_categories != len(p0):
        # a dataset whose header under-reports Y is padded up to p0's dimension
        if dataset.num_categories < len(p0) and max(dataset.values) <= len(p0):
            dataset = type(dataset)(dataset.values, len(p0))
            counts = counts_from_dataset(dataset)
    problem = CorrectionProblem(
        p0=p0,
        counts=counts,
        budget=_int("budget", values.get("budget", "0")),
        cost_model=_choice(_COST, "cost_model", values.get("cost_model", "value")),
        discrepancy=_choice(_DISC, "discrepancy", values.get("discrepancy", "l2")),
        direction=_choice(_DIR, "direction", values.get("direction", "coop")),
    )
    return problem, dataset


def read_problem(path, dataset=None):
    return problem_from_mapping(read_keyvalue(path), Path(path).parent, dataset)


def variance_config_from_mapping(values: dict, **overrides) -> VarianceExperimentConfig:
    kwargs = {}
    if "theta0" in values:
        kwargs["theta0"] = _float("theta0", values["theta0"])
    if "n_values" in values:
        kwargs["n_values"] = tuple(parse_list(values["n_values"], int))
    if "budgets" in values:
        kwargs["budgets"] = tuple(parse_list(values["budgets"], int))
    if "replicates" in values:
        kwargs["replicates"] = _int("replicates", values["replicates"])
    for key in ("seed", "master_seed"):
        if key in values:
            kwargs["master_seed"] = _int(key, values[key])
    kwargs.update({k: v for k, v in overrides.items() if v is not None})
    return VarianceExperimentConfig(**kwargs)


def budget_config_from_mapping(values: dict, base_dir=".") -> BudgetExperimentConfig:
    kwargs = {}
    if "p0" in values:
        kwargs["p0"] = _p0(values)
    if "counts" in values or "dataset" in values:
        kwargs["initial_counts"] = _counts(values, base_dir)[0]
    if "budgets" in values:
        kwargs["budgets"] = tuple(parse_list(values["budgets"], int))
    if "cost_model" in values:
        kwargs["cost_model"] = _choice(_COST, "cost_model", values["cost_model"])
    if "discrepancy" in values:
        kwargs["discrepancy"] = _choice(_DISC, "discrepancy", values["discrepancy"])
    return BudgetExperimentConfig(**kwargs)
