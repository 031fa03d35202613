"""Self-organizing granulation: SOM-fed fuzzy regression and rough-set rules."""

from .kernels import BACKEND
from .meta import (
    GrowthLawParams,
    MetaConfig,
    RunTrace,
    next_neuron_count,
    run_sonfis,
    run_sorst,
)
from .metrics import PredictionRecord, error_measure, rmse
from .nfis import (
    FuzzyRuleBase,
    evaluate_fis,
    initialize_fis,
    membership_report,
    train_fis,
)
from .rough import (
    DecisionRule,
    DecisionSystem,
    StrengthFactor,
    classify,
    extract_exact_rules,
    indiscernibility_classes,
    lower_approximation,
    update_strength_factor,
    upper_approximation,
)
from .som import (
    DiscretizationScheme,
    SomModel,
    SomTrainingConfig,
    best_matching_unit,
    discretize_attributes,
    factor_neurons,
    quantize_objects,
    train_som,
)
from .tables import (
    InformationTable,
    SplitSpec,
    SyntheticConfig,
    generate_synthetic,
    ingest_csv,
    split,
    write_csv,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DecisionRule",
    "DecisionSystem",
    "DiscretizationScheme",
    "FuzzyRuleBase",
    "GrowthLawParams",
    "InformationTable",
    "MetaConfig",
    "PredictionRecord",
    "RunTrace",
    "SomModel",
    "SomTrainingConfig",
    "SplitSpec",
    "StrengthFactor",
    "SyntheticConfig",
    "best_matching_unit",
    "classify",
    "discretize_attributes",
    "error_measure",
    "evaluate_fis",
    "extract_exact_rules",
    "factor_neurons",
    "generate_synthetic",
    "indiscernibility_classes",
    "ingest_csv",
    "initialize_fis",
    "lower_approximation",
    "membership_report",
    "next_neuron_count",
    "quantize_objects",
    "rmse",
    "run_sonfis",
    "run_sorst",
    "split",
    "train_fis",
    "train_som",
    "update_strength_factor",
    "upper_approximation",
    "write_csv",
]
