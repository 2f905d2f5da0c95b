"""Saliency-guided counterfactual explanations for multivariate time series."""

from .classifier import FcnClassifier
from .data import (Dataset, Normalizer, apply_normalization, fit_normalization,
                   load_dataset, parse_native, parse_uea_ts, serialize_native)
from .errors import (CheckpointError, DataError, McelsError, NoNeighborError,
                     NumericError)
from .explainer import (CounterfactualResult, MCelsExplainer, explain_instance,
                        loss_budget, loss_gradient, loss_max, loss_treg,
                        perturb, threshold_saliency, total_loss)
from .metrics import (AggregateReport, InstanceMetrics, aggregate, l1_distance,
                      sparsity, validity)
from .nun import NunResult, find_nun, target_class

__all__ = [
    "AggregateReport", "CheckpointError", "CounterfactualResult", "DataError",
    "Dataset", "FcnClassifier", "InstanceMetrics", "MCelsExplainer",
    "McelsError", "NoNeighborError", "Normalizer", "NumericError", "NunResult",
    "aggregate", "apply_normalization", "explain_instance", "find_nun",
    "fit_normalization", "l1_distance", "load_dataset", "loss_budget",
    "loss_gradient", "loss_max", "loss_treg", "parse_native", "parse_uea_ts",
    "perturb", "serialize_native", "sparsity", "target_class",
    "threshold_saliency", "total_loss", "validity",
]
