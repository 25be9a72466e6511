"""Extended-object tracking and classification with polygonal (linear-spline) shapes."""

from .geometry import Pose, ShapeVector
from .likelihood import contour_loglik, dataset_loglik, edge_loglik, mc_loglik
from .scattering import CardinalityParams, Dataset, SensorConfig
from .shaper import ClassDistribution, Dictionary, DictionaryEntry, Shaper, load_dictionary, shaper_step
from .tracker import Tracker, TrackerState

__version__ = "0.1.0"

__all__ = [
    "CardinalityParams",
    "ClassDistribution",
    "Dataset",
    "Dictionary",
    "DictionaryEntry",
    "Pose",
    "SensorConfig",
    "ShapeVector",
    "Shaper",
    "Tracker",
    "TrackerState",
    "contour_loglik",
    "dataset_loglik",
    "edge_loglik",
    "load_dictionary",
    "mc_loglik",
    "shaper_step",
]
