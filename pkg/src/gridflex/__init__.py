"""Multi-building microgrid simulation for demand-response control research."""

from .dataset import (
    BuildingDataset,
    DatasetError,
    SimulationConfig,
    generate_synthetic_dataset,
    load_dataset,
    save_dataset,
)
from .environment import Environment, StepResult, TrackerSeries

__all__ = [
    "BuildingDataset",
    "DatasetError",
    "SimulationConfig",
    "generate_synthetic_dataset",
    "load_dataset",
    "save_dataset",
    "Environment",
    "StepResult",
    "TrackerSeries",
]

__version__ = "0.1.0"
