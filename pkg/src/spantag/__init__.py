"""Span-level sequence tagging toolkit for propaganda technique detection.

The pipeline: repair span annotations against their text, align subword
tokens with words and characters, embed tokens, train a linear tagger
over concatenated sequence and unit vectors (plus an optional genre
one-hot), predict spans with one of four strategies, and score with
proportional-overlap micro-F1.
"""

from .corpus import (
    CorpusError,
    CorpusStats,
    Genre,
    LabelSet,
    Snippet,
    TechniqueSpan,
    corpus_stats,
    gold_by_id,
    load_corpus,
    load_predictions,
    save_corpus,
    save_predictions,
)
from .embed import (
    CombineMode,
    EmbeddedSequence,
    EmbeddingError,
    FeatureMatrix,
    HashEmbeddingProvider,
    build_features,
    feature_width,
    hash_embed,
    load_embeddings,
    write_embeddings_binary,
    write_embeddings_jsonl,
)
from .kernels import BACKEND, HAVE_COMPILED
from .pipeline import (
    build_training_set,
    cross_validate,
    evaluate,
    predict_corpus,
    run_ablation,
    train_strategy,
)
from .repair import (
    OverrideLedger,
    RepairAction,
    RepairReport,
    SurfaceNotFound,
    normalize_mention_surface,
    realign_span,
    repair_corpus,
    scrub_unicode,
)
from .score import ScoreError, ScoreReport, ablation_table, micro_f1, span_overlap
from .segment import (
    SegmentError,
    SubwordTokenizer,
    Token,
    TokenAlignment,
    UnitLevel,
    VocabTokenizer,
    WordSpan,
    align,
    project_gold,
    segment_words,
)
from .tagger import (
    AggregationMode,
    Hyperparams,
    LinearTagger,
    Strategy,
    TaggerError,
    TrainingDiverged,
    aggregate_to_words,
    decode_spans,
    forward,
    grad_check,
    init_tagger,
    load_model,
    predict_spans,
    predict_units,
    save_model,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "AggregationMode",
    "BACKEND",
    "CombineMode",
    "CorpusError",
    "CorpusStats",
    "EmbeddedSequence",
    "EmbeddingError",
    "FeatureMatrix",
    "Genre",
    "HAVE_COMPILED",
    "HashEmbeddingProvider",
    "Hyperparams",
    "LabelSet",
    "LinearTagger",
    "OverrideLedger",
    "RepairAction",
    "RepairReport",
    "ScoreError",
    "ScoreReport",
    "SegmentError",
    "Snippet",
    "Strategy",
    "SubwordTokenizer",
    "SurfaceNotFound",
    "TaggerError",
    "TechniqueSpan",
    "Token",
    "TokenAlignment",
    "TrainingDiverged",
    "UnitLevel",
    "VocabTokenizer",
    "WordSpan",
    "ablation_table",
    "aggregate_to_words",
    "align",
    "build_features",
    "build_training_set",
    "corpus_stats",
    "cross_validate",
    "decode_spans",
    "evaluate",
    "feature_width",
    "forward",
    "gold_by_id",
    "grad_check",
    "hash_embed",
    "init_tagger",
    "load_corpus",
    "load_embeddings",
    "load_model",
    "load_predictions",
    "micro_f1",
    "normalize_mention_surface",
    "predict_corpus",
    "predict_spans",
    "predict_units",
    "project_gold",
    "realign_span",
    "repair_corpus",
    "run_ablation",
    "save_corpus",
    "save_model",
    "save_predictions",
    "scrub_unicode",
    "segment_words",
    "span_overlap",
    "train",
    "train_strategy",
    "write_embeddings_binary",
    "write_embeddings_jsonl",
]
