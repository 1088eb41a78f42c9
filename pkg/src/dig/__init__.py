"""Embedding multivariate time series with diffusion and information geometry."""

from dig.core_data import HistogramSequence, LocalStats, MultivariateSeries, WindowSpec
from dig.diffusion import DiffusionModel
from dig.distances import DistanceMatrix
from dig.info_distances import FISHER_RAO, InfoDistanceSpec
from dig.mds import Embedding
from dig.metrics import MetricReport
from dig.pipeline import StageError, dig
from dig.synth import SyntheticDataset, SyntheticProcessSpec

__all__ = [
    "DiffusionModel", "DistanceMatrix", "Embedding", "FISHER_RAO", "HistogramSequence", "InfoDistanceSpec",
    "LocalStats", "MetricReport", "MultivariateSeries", "StageError", "SyntheticDataset",
    "SyntheticProcessSpec", "WindowSpec", "dig",
]
