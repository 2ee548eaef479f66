"""Quantum generative kernels for sequence classification."""

from ._qkern import (
    ImpossibleSequenceError,
    Model,
    NumericalError,
    __version__,
    bures,
    distribution,
    evaluate,
    fidelity,
    gram,
    kernel_value,
    label,
    next_symbol_distribution,
    phi_predictive,
    phi_structural,
    run_cli,
    sample_dataset,
    sequence_probability,
    swap_test,
    tomography,
    trace_distance,
)

__all__ = [
    "ImpossibleSequenceError",
    "Model",
    "NumericalError",
    "__version__",
    "bures",
    "distribution",
    "evaluate",
    "fidelity",
    "gram",
    "kernel_value",
    "label",
    "next_symbol_distribution",
    "phi_predictive",
    "phi_structural",
    "run_cli",
    "sample_dataset",
    "sequence_probability",
    "swap_test",
    "tomography",
    "trace_distance",
]
