"""Online Aggregated Mondrian Forests.

Each tree grows a Mondrian partition one sample at a time and predicts with
the exponentially weighted average of all its prunings, computed exactly by
a recursion along the path of the query point.
"""

from ._tree import MondrianTree, NodeRecord
from .aggregation import VirtualSplit, predict_aggregated, update_weights_upward, weighted_depth
from .forecasters import ClassificationTask, NodeStats, RegressionTask, kt_predict, mean_predict
from .forest import AMFClassifier, AMFRegressor, OnlineDummyClassifier, OnlineDummyRegressor
from .metrics import LossCurve, auc, progressive_eval, regret_report
from .mondrian import (
    CellBox,
    extend_unrestricted,
    node_update_restricted,
    sample_mondrian_pruned,
    sample_virtual_split,
)

__version__ = "0.1.0"

__all__ = [
    "AMFClassifier",
    "AMFRegressor",
    "CellBox",
    "ClassificationTask",
    "LossCurve",
    "MondrianTree",
    "NodeRecord",
    "NodeStats",
    "OnlineDummyClassifier",
    "OnlineDummyRegressor",
    "RegressionTask",
    "VirtualSplit",
    "auc",
    "extend_unrestricted",
    "kt_predict",
    "mean_predict",
    "node_update_restricted",
    "predict_aggregated",
    "progressive_eval",
    "regret_report",
    "sample_mondrian_pruned",
    "sample_virtual_split",
    "update_weights_upward",
    "weighted_depth",
]
