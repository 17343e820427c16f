from .config import ExperimentConfig
from .data import blr_test_accuracy, load_blr_dataset
from .runner import load_run_record, run_experiment

__all__ = [
    "ExperimentConfig",
    "run_experiment",
    "load_run_record",
    "load_blr_dataset",
    "blr_test_accuracy",
]
