from .censoring import censor_every_second_h, censored_loglik, censored_mle, grid_argmax
from .config import ExperimentConfig
from .datasets import load_csv_dataset, write_csv_dataset
from .report import ExperimentReport, Verdict
from .scenarios import SCENARIOS, default_config, run_scenario

__all__ = [
    "ExperimentConfig",
    "ExperimentReport",
    "SCENARIOS",
    "Verdict",
    "censor_every_second_h",
    "censored_loglik",
    "censored_mle",
    "default_config",
    "grid_argmax",
    "load_csv_dataset",
    "run_scenario",
    "write_csv_dataset",
]
