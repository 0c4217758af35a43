"""Derivative-free global optimization by a perturbed martingale-problem ensemble."""

import json

from . import _mreo
from ._mreo import (
    ConfigError,
    InvalidArgument,
    InvalidComparison,
    InvalidParameter,
    MreoError,
    PoisonedCandidate,
    Problem,
    blended_covariance,
    build_innovations,
    corrections,
    full_permutation,
    gain,
    gaussian_increments,
    integrate,
    max_relative_error,
    partner_indices,
    perturbation_index,
    problem,
    problem_names,
    regularized_inverse,
    scramble,
    uniform_box,
)

__all__ = [
    "ConfigError",
    "InvalidArgument",
    "InvalidComparison",
    "InvalidParameter",
    "MreoError",
    "PoisonedCandidate",
    "Problem",
    "blended_covariance",
    "build_innovations",
    "compare",
    "corrections",
    "full_permutation",
    "gain",
    "gaussian_increments",
    "integrate",
    "max_relative_error",
    "minimize",
    "partner_indices",
    "perturbation_index",
    "problem",
    "problem_names",
    "pso",
    "regularized_inverse",
    "run_experiment",
    "scramble",
    "uniform_box",
]


def _options(options):
    # Tuples and numpy arrays are not JSON serializable as is.
    def plain(v):
        if hasattr(v, "tolist"):
            return v.tolist()
        if isinstance(v, tuple):
            return list(v)
        return v

    return json.dumps({k: plain(v) for k, v in options.items()})


def minimize(problem, iterations=500, seed=0, **options):
    """Runs the optimizer on `problem`.

    Keyword options use the names of the config file's algorithm section,
    e.g. ``ensemble_size=40, alpha=0.9, variant="with_prediction"``.
    Returns a dict with best_cost, best_params, found_at, evaluations and a
    per-iteration trace of numpy arrays.
    """
    return _mreo.run(problem, iterations, seed, _options(options))


def pso(problem, iterations=500, seed=0, **options):
    """Runs the particle swarm baseline; options as for the pso algorithm section."""
    return _mreo.pso_run(problem, iterations, seed, _options(options))


def run_experiment(config, base_dir="", write_files=False):
    """Runs a full experiment from a config dict and returns the summary dict."""
    return json.loads(_mreo.run_experiment(json.dumps(config), base_dir, write_files))


def compare(a, b):
    """Compares two experiment summaries (dicts as returned by run_experiment)."""
    return _mreo.compare(json.dumps(a), json.dumps(b))
