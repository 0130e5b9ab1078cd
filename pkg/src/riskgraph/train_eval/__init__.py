from riskgraph.train_eval.metrics import (
    ConfusionMatrix,
    MetricsReport,
    confusion_from_pairs,
    metrics_from_confusion,
)
from riskgraph.train_eval.infogain import (
    analysis_features,
    discretize_feature,
    info_gain,
    property_gains,
    rank_categories,
)
from riskgraph.train_eval.pipeline import (
    EpochStats,
    KnockoutMask,
    TrainConfig,
    evaluate,
    feature_knockout,
    predict_proba,
    train,
)

__all__ = [
    "ConfusionMatrix", "MetricsReport", "confusion_from_pairs",
    "metrics_from_confusion", "analysis_features", "discretize_feature",
    "info_gain", "property_gains", "rank_categories", "EpochStats",
    "KnockoutMask", "TrainConfig", "evaluate", "feature_knockout",
    "predict_proba", "train",
]
