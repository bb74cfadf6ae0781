from .evaluation import (
    DEFAULT_ABLATION,
    METRICS,
    FoldError,
    ModelReport,
    evaluate,
    evaluate_config,
    feature_ablation,
    stratified_folds,
)
from .features import (
    FeatureConfig,
    FeatureIndex,
    FeatureMatrix,
    FeatureVector,
    MissingDemographics,
    TrustRequestInstance,
    build_instances,
    extract_features,
    feature_matrix,
    feature_names,
)
from .logistic import Hyperparams, LogisticModel, loss_and_grad, train_logistic
from .metrics import all_metrics, auc, class_weighted_accuracy, macro_scores, per_class
