"""Binary privacy-review classifiers and the iterative keyword baseline."""

from .bootstrap import (
    BootstrapIteration,
    KeywordSet,
    bootstrap_baseline,
    mine_candidate_keywords,
)
from .features import FeatureMatrix, TfidfFeaturizer, embedding_features, featurize_tfidf
from .metrics import EvalReport, evaluate, report_from_confusion
from .models import (
    ClassifierModel,
    GbdtConfig,
    LogRegConfig,
    load_model,
    predict,
    predict_proba,
    save_model,
    train_gbdt,
    train_logreg,
)

__all__ = [
    "BootstrapIteration",
    "ClassifierModel",
    "EvalReport",
    "FeatureMatrix",
    "GbdtConfig",
    "KeywordSet",
    "LogRegConfig",
    "TfidfFeaturizer",
    "bootstrap_baseline",
    "embedding_features",
    "evaluate",
    "featurize_tfidf",
    "load_model",
    "mine_candidate_keywords",
    "predict",
    "predict_proba",
    "report_from_confusion",
    "save_model",
    "train_gbdt",
    "train_logreg",
]
