"""QRNN forecasting with gradient, CMA-ES and hybrid training."""

from ._core import (
    ExperimentConfig,
    cma_ask,
    cma_init,
    cma_init_with_mean,
    cma_tell,
    cma_parameters,
    expected_circuit_evals,
    forecast,
    grad_finite_diff,
    grad_parameter_shift,
    mackey_glass,
    mackey_glass_rhs,
    prob_one,
    rel_rmse,
    run_experiment,
    run_sequence,
    shift_evaluations,
    train_loss,
    zero_state,
)

__all__ = [
    "ExperimentConfig",
    "cma_ask",
    "cma_init",
    "cma_init_with_mean",
    "cma_tell",
    "cma_parameters",
    "expected_circuit_evals",
    "forecast",
    "grad_finite_diff",
    "grad_parameter_shift",
    "mackey_glass",
    "mackey_glass_rhs",
    "prob_one",
    "rel_rmse",
    "run_experiment",
    "run_sequence",
    "shift_evaluations",
    "train_loss",
    "zero_state",
]
