"""Semi-supervised classification with cause and effect features."""

from .data import Dataset, PartitionConfig, Split, load_csv, sample_split, swap_roles
from .semigen import SemiGenParams, fit_em, fit_supervised, posterior
from .condself import fit_condself, predict_condself
from .synth import SynthConfig, generate, preset

__version__ = "0.1.0"

__all__ = [
    "Dataset", "PartitionConfig", "Split", "load_csv", "sample_split", "swap_roles",
    "SemiGenParams", "fit_em", "fit_supervised", "posterior",
    "fit_condself", "predict_condself",
    "SynthConfig", "generate", "preset",
]
