"""Python bindings for the evolver library."""

from ._core import (
    EvolutionSystem,
    EvolverError,
    Region,
    brouwer_degree,
    catalog_names,
    chernoff_defect,
    dissipativity_rate,
    eval_expr,
    experiment_names,
    mat_exp,
    monodromy,
    normalize_expr,
    operator_norm,
    resolvent,
    run_experiment,
    winding_number_2d,
)

__all__ = [
    "EvolutionSystem",
    "EvolverError",
    "Region",
    "brouwer_degree",
    "catalog_names",
    "chernoff_defect",
    "dissipativity_rate",
    "eval_expr",
    "experiment_names",
    "mat_exp",
    "monodromy",
    "normalize_expr",
    "operator_norm",
    "resolvent",
    "run_experiment",
    "winding_number_2d",
]
