"""Progressive-sampling Bayesian optimization for classifier model selection."""

from .config import SearchConfig
from .dataset import Dataset, classify_size, dataset_from_arrays, load_dataset
from .engine import SearchReport, run_search

__version__ = "0.1.0"

__all__ = ["SearchConfig", "Dataset", "classify_size", "dataset_from_arrays", "load_dataset",
           "SearchReport", "run_search", "__version__"]
