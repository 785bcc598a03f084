"""Glue from corpora to trained taggers, predictions, and scores.

Everything here is deterministic given the corpus, the configuration,
and one seed; fold assignment and training both derive their own
sub-seeds from it.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .corpus import LabelSet, Snippet, TechniqueSpan, gold_by_id
from .embed import CombineMode, EmbeddingProvider, FeatureMatrix, build_features
from .score import ScoreReport, micro_f1
from .seeding import derive_seed
from .segment import SubwordTokenizer, align, project_gold
from .tagger import Hyperparams, LinearTagger, Strategy, predict_spans, train


def build_training_set(
    snippets: Sequence[Snippet],
    tokenizer: SubwordTokenizer,
    provider: EmbeddingProvider,
    strategy: Strategy,
    use_genre: bool,
    combine: CombineMode = CombineMode.CONCAT,
) -> list[tuple[FeatureMatrix, list[int]]]:
    """Feature matrix and projected gold labels for every snippet."""
    level = strategy.train_level
    data = []
    for snippet in snippets:
        alignment = align(snippet.text, tokenizer)
        seq = provider.embed(snippet, alignment)
        features = build_features(seq, alignment, snippet.genre, level, use_genre, combine)
        labels = project_gold(alignment, snippet.gold_spans, level)
        data.append((features, labels))
    return data


def train_strategy(
    snippets: Sequence[Snippet],
    tokenizer: SubwordTokenizer,
    provider: EmbeddingProvider,
    strategy: Strategy,
    label_set: LabelSet,
    hp: Hyperparams,
    use_genre: bool,
    combine: CombineMode = CombineMode.CONCAT,
    class_weights: Sequence[float] | None = None,
) -> tuple[LinearTagger, list[float]]:
    """Train one tagger at the unit level the strategy requires."""
    data = build_training_set(snippets, tokenizer, provider, strategy, use_genre, combine)
    return train(
        data, label_set, hp, use_genre=use_genre, combine=combine,
        class_weights=class_weights,
    )


def predict_corpus(
    tagger: LinearTagger,
    snippets: Sequence[Snippet],
    tokenizer: SubwordTokenizer,
    provider: EmbeddingProvider,
    strategy: Strategy,
) -> dict[str, tuple[TechniqueSpan, ...]]:
    """Predicted spans per snippet id, in corpus order."""
    predictions = {}
    for snippet in snippets:
        alignment = align(snippet.text, tokenizer)
        seq = provider.embed(snippet, alignment)
        predictions[snippet.id] = tuple(
            predict_spans(tagger, snippet, alignment, seq, strategy)
        )
    return predictions


def evaluate(
    tagger: LinearTagger,
    snippets: Sequence[Snippet],
    tokenizer: SubwordTokenizer,
    provider: EmbeddingProvider,
    strategy: Strategy,
    cap_per_span: bool = False,
) -> ScoreReport:
    """Predict over the corpus and score against its gold spans."""
    predictions = predict_corpus(tagger, snippets, tokenizer, provider, strategy)
    return micro_f1(
        gold_by_id(snippets), predictions, tagger.label_set, cap_per_span=cap_per_span
    )


def fold_assignments(n: int, folds: int, seed: int) -> list[np.ndarray]:
    """Shuffle 0..n-1 with the seed and split into near-equal folds."""
    perm = np.random.default_rng(derive_seed(seed, "folds")).permutation(n)
    return list(np.array_split(perm, folds))


def cross_validate(
    snippets: Sequence[Snippet],
    tokenizer: SubwordTokenizer,
    provider: EmbeddingProvider,
    strategy: Strategy,
    label_set: LabelSet,
    hp: Hyperparams,
    use_genre: bool,
    folds: int,
    combine: CombineMode = CombineMode.CONCAT,
) -> list[float]:
    """Micro-F1 of each fold's held-out evaluation, in fold order."""
    if folds < 2:
        raise ValueError(f"folds must be >= 2, got {folds}")
    if folds > len(snippets):
        raise ValueError(f"{folds} folds for only {len(snippets)} snippets")
    scores = []
    for val_idx in fold_assignments(len(snippets), folds, hp.seed):
        held = set(int(i) for i in val_idx)
        train_part = [s for i, s in enumerate(snippets) if i not in held]
        val_part = [s for i, s in enumerate(snippets) if i in held]
        tagger, _ = train_strategy(
            train_part, tokenizer, provider, strategy, label_set, hp, use_genre
        )
        scores.append(
            evaluate(tagger, val_part, tokenizer, provider, strategy).micro_f1
        )
    return scores


def run_ablation(
    train_snippets: Sequence[Snippet],
    eval_snippets: Sequence[Snippet],
    tokenizer: SubwordTokenizer,
    provider: EmbeddingProvider,
    label_set: LabelSet,
    hp: Hyperparams,
    strategies: Sequence[Strategy] = tuple(Strategy),
    genre_flags: Sequence[bool] = (True, False),
    combine: CombineMode = CombineMode.CONCAT,
) -> dict[tuple[Strategy, bool], tuple[ScoreReport, list[float]]]:
    """Train and evaluate every (strategy, genre) cell.

    Returns each cell's score report and its per-epoch loss history so
    convergence across configurations can be compared.
    """
    results: dict[tuple[Strategy, bool], tuple[ScoreReport, list[float]]] = {}
    for strategy in strategies:
        for use_genre in genre_flags:
            tagger, history = train_strategy(
                train_snippets, tokenizer, provider, strategy, label_set, hp, use_genre
            )
            report = evaluate(tagger, eval_snippets, tokenizer, provider, strategy)
            results[(strategy, use_genre)] = (report, history)
    return results
