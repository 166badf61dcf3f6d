"""Data-quality preprocessing for ML training sets.

Three composable stages over one tabular data model:

* sanitize (S) — clustering-based anomaly removal,
* clean (C) — entity resolution with optional blocking,
* reweigh (M) — example reweighing for demographic parity,

plus a weighted logistic-regression trainer, accuracy/parity metrics, a
pipeline orchestrator (sequential or fused), and a benchmark harness with
duplicate/poison injectors.
"""

from .dataset import (
    Dataset,
    FeatureMatrix,
    Record,
    Schema,
    default_cluster_count,
    featurize,
    load_dataset,
    save_dataset,
)
from .errors import (
    ConfigError,
    DegenerateGroupError,
    InfeasibleStrategyError,
    MLCleanError,
    ParameterError,
    SchemaError,
    StageError,
    ValidationError,
)
from .harness import (
    BenchRow,
    ComparisonTable,
    DuplicateSpec,
    GroundTruth,
    PoisonSpec,
    bench_orderings,
    impact,
    inject_duplicates,
    inject_poison,
    zipf_pmf,
)
from .model import (
    LinearModel,
    MetricsReport,
    TrainConfig,
    accuracy,
    evaluate,
    load_model,
    parity_ratio,
    predict,
    train,
)
from .pipeline import (
    MLCLEAN,
    SEQUENCE,
    PipelineConfig,
    PipelineReport,
    StageReport,
    run_pipeline,
    run_stages,
    split_dataset,
    stage_delta,
)
from .resolve import (
    KEEP_ONE,
    SUM_WEIGHTS,
    MatchRules,
    MergeLog,
    MergePolicy,
    match_pair,
    pair_count,
    resolve,
)
from .reweigh import (
    DOWNWEIGHT_NEGATIVES,
    UPWEIGHT_POSITIVES,
    GroupStats,
    ReweighReport,
    ReweighStrategy,
    group_stats,
    reweigh,
)
from .sanitize import (
    FAR_FROM_CENTROID,
    SMALL_CLUSTER,
    ClusterAssignment,
    SanitizationPolicy,
    SanitizationReport,
    detect_outliers,
    kmeans,
    sanitize,
)
from .synth import make_biased_dataset, make_clustered_dataset, synth_schema

__version__ = "0.1.0"
