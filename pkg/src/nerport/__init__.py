"""Cross-site portability toolkit for clinical phenotype NER.

Corpus handling, averaged TF-IDF corpus similarity, entity coverage ratio,
seeded entity permutation, strict/lenient span evaluation, a from-scratch
linear-chain CRF tagger with warm-start fine-tuning, significance statistics,
a synthetic two-site corpus generator, and the transfer experiment driver
that ties them together.
"""

from .corpus import (
    DOC_TYPES,
    PHENOTYPE_CATEGORIES,
    CategoryStats,
    Corpus,
    CorpusError,
    CorpusStats,
    Document,
    EntityMention,
    LabelSet,
    Token,
    bio_to_mentions,
    build_document,
    compute_stats,
    concat_corpora,
    corpus_to_bytes,
    export_conll,
    import_conll,
    load_corpus,
    mentions_to_bio,
    normalize_surface,
    save_corpus,
    segment_sentences,
    tokenize,
)
from .crf import (
    CrfModel,
    CrfTagger,
    EmbeddingTable,
    FeatureConfig,
    TrainConfig,
    bio_labels,
    extract_features,
    fine_tune,
    forward_backward,
    objective_and_gradient,
    predict,
    sequence_log_potentials,
    token_shape,
    train,
    viterbi,
)
from .ecr import (
    BUCKET_LABELS,
    NUM_BUCKETS,
    BucketScores,
    EcrBucketReport,
    EcrRecord,
    bucket_of,
    ecr,
    ecr_table,
    entity_counts,
    per_bucket_eval,
)
from .evaluation import (
    MATCH_MODES,
    EvalReport,
    Scores,
    compatible,
    evaluate,
    match_mentions,
    prf,
)
from .experiment import (
    STRATEGIES,
    CorrelationResult,
    ExperimentConfig,
    PairwiseResult,
    PermutationReport,
    RunResult,
    TransferReport,
    derive_seed,
    emit_report,
    import_predictions,
    run_permutation_analysis,
    run_transfer_experiment,
    split_corpus,
)
from .perturbation import (
    DonorPool,
    Replacement,
    build_donor_pool,
    permute_test_set,
    write_replacement_log,
)
from .similarity import (
    IDF_VARIANTS,
    SimilarityReport,
    TermWeights,
    category_tfidf,
    corpus_tfidf,
    cosine,
    similarity_report,
)
from .stats import (
    AnovaResult,
    RunAggregate,
    aggregate_runs,
    cohens_kappa,
    f_distribution_sf,
    one_way_anova,
    pearson,
    regularized_incomplete_beta,
)
from .synth import (
    SYNTH_CATEGORIES,
    SynthSpec,
    default_synth_spec,
    generate_synthetic,
    site_pair,
)

__version__ = "0.1.0"

__all__ = [
    "DOC_TYPES",
    "PHENOTYPE_CATEGORIES",
    "CategoryStats",
    "Corpus",
    "CorpusError",
    "CorpusStats",
    "Document",
    "EntityMention",
    "LabelSet",
    "Token",
    "bio_to_mentions",
    "build_document",
    "compute_stats",
    "concat_corpora",
    "corpus_to_bytes",
    "export_conll",
    "import_conll",
    "load_corpus",
    "mentions_to_bio",
    "normalize_surface",
    "save_corpus",
    "segment_sentences",
    "tokenize",
    "CrfModel",
    "CrfTagger",
    "EmbeddingTable",
    "FeatureConfig",
    "TrainConfig",
    "bio_labels",
    "extract_features",
    "fine_tune",
    "forward_backward",
    "objective_and_gradient",
    "predict",
    "sequence_log_potentials",
    "token_shape",
    "train",
    "viterbi",
    "BUCKET_LABELS",
    "NUM_BUCKETS",
    "BucketScores",
    "EcrBucketReport",
    "EcrRecord",
    "bucket_of",
    "ecr",
    "ecr_table",
    "entity_counts",
    "per_bucket_eval",
    "MATCH_MODES",
    "EvalReport",
    "Scores",
    "compatible",
    "evaluate",
    "match_mentions",
    "prf",
    "STRATEGIES",
    "CorrelationResult",
    "ExperimentConfig",
    "PairwiseResult",
    "PermutationReport",
    "RunResult",
    "TransferReport",
    "derive_seed",
    "emit_report",
    "import_predictions",
    "run_permutation_analysis",
    "run_transfer_experiment",
    "split_corpus",
    "DonorPool",
    "Replacement",
    "build_donor_pool",
    "permute_test_set",
    "write_replacement_log",
    "IDF_VARIANTS",
    "SimilarityReport",
    "TermWeights",
    "category_tfidf",
    "corpus_tfidf",
    "cosine",
    "similarity_report",
    "AnovaResult",
    "RunAggregate",
    "aggregate_runs",
    "cohens_kappa",
    "f_distribution_sf",
    "one_way_anova",
    "pearson",
    "regularized_incomplete_beta",
    "SYNTH_CATEGORIES",
    "SynthSpec",
    "default_synth_spec",
    "generate_synthetic",
    "site_pair",
    "__version__",
]
