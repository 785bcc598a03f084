"""Linear sequence tagger: training loop, prediction strategies, decoding.

The classifier is a single weight matrix of shape (input_width, L) with
no hidden layers and, by default, no bias, so the parameter count is
exactly input_width x L (1536 x 24 = 36,864 for the stock token-level,
genre-off configuration). Training is plain mini-batch gradient descent
on mean cross-entropy; the objective is convex, and with a fixed seed
the whole run is bit-reproducible.

Four strategies turn unit predictions into character spans:

- token:    predict per token, decode token runs (spans may split words);
- majority: predict per token, give each word its most frequent token
            label, decode word runs;
- first:    predict per token, give each word its first token's label;
- word:     train and predict on word features (max-pooled tokens).

Decoding joins maximal runs of consecutive units that share one non-O
label into a single span, interior gaps included.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import kernels
from .corpus import LabelSet, Snippet, TechniqueSpan
from .embed import CombineMode, EmbeddedSequence, FeatureMatrix, build_features
from .ioutil import atomic_write_bytes
from .seeding import derive_seed
from .segment import TokenAlignment, UnitLevel

MODEL_MAGIC = b"SPTGMDL1"
MODEL_FORMAT_VERSION = 1


class TaggerError(ValueError):
    """Configuration or shape problem in the tagger layer."""


class TrainingDiverged(RuntimeError):
    """Loss or weights became non-finite during training."""


class AggregationMode(Enum):
    MAJORITY = "majority"
    FIRST = "first"


class Strategy(Enum):
    """How unit predictions become spans; values double as CLI names."""

    TOKEN_TO_TOKEN = "token"
    TOKEN_TO_WORD_MAJORITY = "majority"
    TOKEN_TO_WORD_FIRST = "first"
    WORD_TO_WORD = "word"

    @classmethod
    def parse(cls, value: str) -> "Strategy":
        for member in cls:
            if member.value == value.strip().lower():
                return member
        raise TaggerError(
            f"unknown strategy {value!r}; expected one of "
            + ", ".join(m.value for m in cls)
        )

    @property
    def train_level(self) -> UnitLevel:
        return UnitLevel.WORD if self is Strategy.WORD_TO_WORD else UnitLevel.TOKEN

    @property
    def aggregation(self) -> AggregationMode | None:
        if self is Strategy.TOKEN_TO_WORD_MAJORITY:
            return AggregationMode.MAJORITY
        if self is Strategy.TOKEN_TO_WORD_FIRST:
            return AggregationMode.FIRST
        return None


@dataclass(frozen=True)
class Hyperparams:
    learning_rate: float = 0.5
    batch_size: int = 32
    epochs: int = 50
    seed: int = 13

    def __post_init__(self) -> None:
        if not (self.learning_rate > 0):
            raise TaggerError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.batch_size < 1:
            raise TaggerError(f"batch_size must be positive, got {self.batch_size}")
        if self.epochs < 1:
            raise TaggerError(f"epochs must be positive, got {self.epochs}")


@dataclass(eq=False)
class LinearTagger:
    """Weight matrix plus the configuration its inputs were built with."""

    weights: np.ndarray
    label_set: LabelSet
    unit_level: UnitLevel
    use_genre: bool
    combine: CombineMode = CombineMode.CONCAT
    bias: np.ndarray | None = None

    @property
    def input_width(self) -> int:
        return int(self.weights.shape[0])

    @property
    def n_labels(self) -> int:
        return int(self.weights.shape[1])

    @property
    def param_count(self) -> int:
        count = self.weights.size
        if self.bias is not None:
            count += self.bias.size
        return int(count)


def init_tagger(
    input_width: int,
    label_set: LabelSet,
    seed: int,
    unit_level: UnitLevel = UnitLevel.TOKEN,
    use_genre: bool = False,
    combine: CombineMode = CombineMode.CONCAT,
    with_bias: bool = False,
) -> LinearTagger:
    """Fresh tagger with weights uniform in [-1/sqrt(width), +1/sqrt(width)]."""
    if input_width < 1:
        raise TaggerError(f"input_width must be >= 1, got {input_width}")
    rng = np.random.default_rng(seed)
    bound = 1.0 / np.sqrt(input_width)
    weights = rng.uniform(-bound, bound, size=(input_width, len(label_set)))
    bias = np.zeros(len(label_set)) if with_bias else None
    return LinearTagger(weights, label_set, unit_level, use_genre, combine, bias)


def _logits(tagger: LinearTagger, rows: np.ndarray) -> np.ndarray:
    if rows.shape[1] != tagger.input_width:
        raise TaggerError(
            f"feature width {rows.shape[1]} does not match model input width "
            f"{tagger.input_width}"
        )
    logits = rows @ tagger.weights
    if tagger.bias is not None:
        logits += tagger.bias
    return logits


def forward(tagger: LinearTagger, features: FeatureMatrix) -> np.ndarray:
    """Per-row class probabilities; each row sums to 1."""
    return kernels.softmax_rows(_logits(tagger, features.rows))


def predict_units(tagger: LinearTagger, features: FeatureMatrix) -> list[int]:
    """Per-row argmax label id; ties go to the smallest index."""
    if len(features) == 0:
        return []
    return [int(i) for i in np.argmax(_logits(tagger, features.rows), axis=1)]


def _flatten_training_set(
    data: Sequence[tuple[FeatureMatrix, Sequence[int]]], n_labels: int
) -> tuple[np.ndarray, np.ndarray, UnitLevel]:
    if not data:
        raise TaggerError("empty training set")
    level = data[0][0].unit_level
    width = data[0][0].width
    blocks = []
    labels: list[int] = []
    for features, unit_labels in data:
        if features.unit_level is not level:
            raise TaggerError("training set mixes token-level and word-level features")
        if features.width != width:
            raise TaggerError(
                f"inconsistent feature widths {width} and {features.width}"
            )
        if len(unit_labels) != len(features):
            raise TaggerError(
                f"{len(unit_labels)} labels for {len(features)} feature rows"
            )
        blocks.append(features.rows)
        labels.extend(unit_labels)
    y = np.asarray(labels, dtype=np.intp)
    if y.size == 0:
        raise TaggerError("training set has no units")
    if y.min() < 0 or y.max() >= n_labels:
        raise TaggerError(f"label id out of range for {n_labels} labels")
    return np.vstack(blocks), y, level


def train(
    data: Sequence[tuple[FeatureMatrix, Sequence[int]]],
    label_set: LabelSet,
    hp: Hyperparams,
    use_genre: bool = False,
    combine: CombineMode = CombineMode.CONCAT,
    with_bias: bool = False,
    class_weights: Sequence[float] | None = None,
) -> tuple[LinearTagger, list[float]]:
    """Mini-batch gradient descent on mean cross-entropy.

    ``data`` pairs each snippet's FeatureMatrix with one label id per
    unit. Initialization and per-epoch shuffling derive from hp.seed.
    Returns the tagger and the mean loss per epoch; raises
    :class:`TrainingDiverged` naming the epoch and batch if the loss
    leaves the finite range.
    """
    x, y, level = _flatten_training_set(data, len(label_set))
    weights_vec = (
        np.asarray(class_weights, dtype=np.float64) if class_weights is not None else None
    )
    tagger = init_tagger(
        x.shape[1],
        label_set,
        derive_seed(hp.seed, "init"),
        unit_level=level,
        use_genre=use_genre,
        combine=combine,
        with_bias=with_bias,
    )
    w = tagger.weights
    rng = np.random.default_rng(derive_seed(hp.seed, "shuffle"))
    n = x.shape[0]
    history: list[float] = []
    for epoch in range(hp.epochs):
        perm = rng.permutation(n)
        loss_total = 0.0
        weight_total = 0.0
        for batch_index, lo in enumerate(range(0, n, hp.batch_size)):
            idx = perm[lo : lo + hp.batch_size]
            xb = x[idx]
            logits = xb @ w
            if tagger.bias is not None:
                logits += tagger.bias
            loss_sum, weight_sum, dlogits = kernels.xent_grad(logits, y[idx], weights_vec)
            mean_loss = loss_sum / weight_sum
            if not np.isfinite(mean_loss):
                raise TrainingDiverged(
                    f"non-finite loss at epoch {epoch + 1}, batch {batch_index + 1}"
                )
            w -= hp.learning_rate * (xb.T @ dlogits) / weight_sum
            if tagger.bias is not None:
                tagger.bias -= hp.learning_rate * dlogits.sum(axis=0) / weight_sum
            loss_total += loss_sum
            weight_total += weight_sum
        history.append(loss_total / weight_total)
    if not np.isfinite(w).all():
        raise TrainingDiverged(
            f"non-finite weights after epoch {hp.epochs}; lower the learning rate"
        )
    return tagger, history


def _mean_loss(
    w: np.ndarray, x: np.ndarray, y: np.ndarray, class_weights: np.ndarray | None
) -> float:
    loss_sum, weight_sum, _ = kernels.xent_grad(x @ w, y, class_weights)
    return loss_sum / weight_sum


def grad_check(
    tagger: LinearTagger,
    features: FeatureMatrix,
    labels: Sequence[int],
    n_samples: int = 100,
    step: float = 1e-4,
    seed: int = 0,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    Feature rows are scaled to unit norm first so the step size is
    meaningful regardless of input scale. Samples at least ``n_samples``
    weight coordinates (all of them if the matrix is smaller).
    """
    if len(features) == 0:
        raise TaggerError("grad_check needs a non-empty batch")
    x = np.asarray(features.rows, dtype=np.float64)
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    x = x / np.maximum(norms, 1e-12)
    y = np.asarray(labels, dtype=np.intp)
    w = tagger.weights
    loss_sum, weight_sum, dlogits = kernels.xent_grad(x @ w, y, None)
    analytic = (x.T @ dlogits) / weight_sum
    rng = np.random.default_rng(seed)
    flat = rng.choice(w.size, size=min(n_samples, w.size), replace=False)
    worst = 0.0
    for index in flat:
        i, j = divmod(int(index), w.shape[1])
        saved = w[i, j]
        w[i, j] = saved + step
        plus = _mean_loss(w, x, y, None)
        w[i, j] = saved - step
        minus = _mean_loss(w, x, y, None)
        w[i, j] = saved
        numeric = (plus - minus) / (2.0 * step)
        a = analytic[i, j]
        rel = abs(a - numeric) / max(1e-12, abs(a) + abs(numeric))
        worst = max(worst, rel)
    return worst


def aggregate_to_words(
    token_labels: Sequence[int], alignment: TokenAlignment, mode: AggregationMode
) -> list[int]:
    """One label per word from its tokens' labels.

    Majority picks the most frequent label; a tie goes to whichever tied
    label occurs earliest among the word's tokens. First takes the first
    token's label.
    """
    if len(token_labels) != len(alignment.tokens):
        raise TaggerError(
            f"{len(token_labels)} token labels for {len(alignment.tokens)} tokens"
        )
    word_labels = []
    for lo, hi in alignment.word_token_ranges():
        window = token_labels[lo:hi]
        if mode is AggregationMode.FIRST:
            word_labels.append(window[0])
            continue
        counts: dict[int, int] = {}
        for lab in window:
            counts[lab] = counts.get(lab, 0) + 1
        best = max(counts.values())
        word_labels.append(next(lab for lab in window if counts[lab] == best))
    return word_labels


def decode_spans(
    unit_labels: Sequence[int],
    unit_spans: Sequence[tuple[int, int]],
    text: str,
    label_set: LabelSet,
) -> list[TechniqueSpan]:
    """Merge maximal runs of equal non-O labels into spans.

    A run stretches from its first unit's start to its last unit's end,
    so any characters between units (whitespace, unlabeled gaps) are
    swallowed into the span. O units produce nothing.
    """
    if len(unit_labels) != len(unit_spans):
        raise TaggerError(
            f"{len(unit_labels)} labels for {len(unit_spans)} unit spans"
        )
    spans = []
    i = 0
    n = len(unit_labels)
    while i < n:
        label = unit_labels[i]
        if not 0 <= label < len(label_set):
            raise TaggerError(f"label id {label} out of range for {len(label_set)} labels")
        j = i + 1
        while j < n and unit_labels[j] == label:
            j += 1
        if label != 0:
            start = unit_spans[i][0]
            end = unit_spans[j - 1][1]
            spans.append(TechniqueSpan(label, start, end, text[start:end]))
        i = j
    return spans


def predict_spans(
    tagger: LinearTagger,
    snippet: Snippet,
    alignment: TokenAlignment,
    seq: EmbeddedSequence,
    strategy: Strategy,
) -> list[TechniqueSpan]:
    """Run one strategy end to end: features, unit labels, spans."""
    if strategy.train_level is not tagger.unit_level:
        raise TaggerError(
            f"strategy {strategy.value!r} needs a {strategy.train_level.value}-level "
            f"model but this one is {tagger.unit_level.value}-level"
        )
    features = build_features(
        seq, alignment, snippet.genre, tagger.unit_level, tagger.use_genre, tagger.combine
    )
    unit_labels = predict_units(tagger, features)
    if strategy is Strategy.TOKEN_TO_TOKEN:
        return decode_spans(
            unit_labels, alignment.unit_spans(UnitLevel.TOKEN), snippet.text, tagger.label_set
        )
    if strategy.aggregation is not None:
        unit_labels = aggregate_to_words(unit_labels, alignment, strategy.aggregation)
    return decode_spans(
        unit_labels, alignment.unit_spans(UnitLevel.WORD), snippet.text, tagger.label_set
    )


_LEVEL_CODES = {UnitLevel.TOKEN: 0, UnitLevel.WORD: 1}
_COMBINE_CODES = {CombineMode.CONCAT: 0, CombineMode.ADD: 1, CombineMode.TOKEN_ONLY: 2}


def save_model(
    tagger: LinearTagger, path: str | Path, config: dict[str, Any] | None = None
) -> None:
    """Write the model file; see the repo docs for the byte layout.

    magic "SPTGMDL1" | u32 version | u32 input_width | u32 n_labels |
    u8 unit_level | u8 use_genre | u8 combine | u8 has_bias |
    u32 label count, then per label u32 byte length + utf-8 name |
    u32 config byte length + config JSON | weights f32 little-endian
    row-major | bias f32[n_labels] when has_bias.
    """
    header = [
        MODEL_MAGIC,
        struct.pack(
            "<IIIBBBB",
            MODEL_FORMAT_VERSION,
            tagger.input_width,
            tagger.n_labels,
            _LEVEL_CODES[tagger.unit_level],
            int(tagger.use_genre),
            _COMBINE_CODES[tagger.combine],
            int(tagger.bias is not None),
        ),
        struct.pack("<I", len(tagger.label_set.names)),
    ]
    for name in tagger.label_set.names:
        raw = name.encode("utf-8")
        header.append(struct.pack("<I", len(raw)))
        header.append(raw)
    config_bytes = json.dumps(config or {}, sort_keys=True).encode("utf-8")
    header.append(struct.pack("<I", len(config_bytes)))
    header.append(config_bytes)
    header.append(np.ascontiguousarray(tagger.weights, dtype="<f4").tobytes())
    if tagger.bias is not None:
        header.append(np.ascontiguousarray(tagger.bias, dtype="<f4").tobytes())
    atomic_write_bytes(path, b"".join(header))


def load_model(
    path: str | Path, label_set: LabelSet | None = None
) -> tuple[LinearTagger, dict[str, Any]]:
    """Read a model file back; returns the tagger and its stored config.

    When ``label_set`` is given, the stored label names must match it
    exactly.
    """
    data = Path(path).read_bytes()
    if data[: len(MODEL_MAGIC)] != MODEL_MAGIC:
        raise TaggerError(f"{path}: not a model file (bad magic bytes)")
    offset = len(MODEL_MAGIC)

    def take(n: int) -> bytes:
        nonlocal offset
        if offset + n > len(data):
            raise TaggerError(f"{path}: truncated at byte {offset}")
        out = data[offset : offset + n]
        offset += n
        return out

    version, width, n_labels, level_code, genre_flag, combine_code, has_bias = (
        struct.unpack("<IIIBBBB", take(16))
    )
    if version != MODEL_FORMAT_VERSION:
        raise TaggerError(f"{path}: unsupported model format version {version}")
    (name_count,) = struct.unpack("<I", take(4))
    names = []
    for _ in range(name_count):
        (name_len,) = struct.unpack("<I", take(4))
        names.append(take(name_len).decode("utf-8"))
    if len(names) != n_labels or not names or names[0] != "O":
        raise TaggerError(f"{path}: label table does not match header")
    stored_labels = LabelSet(names[1:])
    if label_set is not None and stored_labels != label_set:
        raise TaggerError(
            f"{path}: model labels do not match the label file "
            f"({len(stored_labels) - 1} vs {len(label_set) - 1} techniques)"
        )
    (config_len,) = struct.unpack("<I", take(4))
    config = json.loads(take(config_len).decode("utf-8"))
    weights = (
        np.frombuffer(take(4 * width * n_labels), dtype="<f4")
        .reshape(width, n_labels)
        .astype(np.float64)
    )
    bias = None
    if has_bias:
        bias = np.frombuffer(take(4 * n_labels), dtype="<f4").astype(np.float64)
    if offset != len(data):
        raise TaggerError(f"{path}: {len(data) - offset} trailing bytes")
    levels = {code: level for level, code in _LEVEL_CODES.items()}
    combines = {code: mode for mode, code in _COMBINE_CODES.items()}
    if level_code not in levels or combine_code not in combines:
        raise TaggerError(f"{path}: unknown unit level or combine code")
    tagger = LinearTagger(
        weights, stored_labels, levels[level_code], bool(genre_flag),
        combines[combine_code], bias,
    )
    return tagger, config


@dataclass(eq=False)
class MLPTagger:
    """One-hidden-layer variant; kept only to reproduce the finding that
    it does not beat the linear model. Not persistable, not in the CLI."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    label_set: LabelSet
    unit_level: UnitLevel

    def predict_units(self, features: FeatureMatrix) -> list[int]:
        hidden = np.maximum(features.rows @ self.w1 + self.b1, 0.0)
        return [int(i) for i in np.argmax(hidden @ self.w2, axis=1)]


def train_mlp(
    data: Sequence[tuple[FeatureMatrix, Sequence[int]]],
    label_set: LabelSet,
    hp: Hyperparams,
    hidden_size: int,
) -> tuple[MLPTagger, list[float]]:
    """Train the hidden-layer variant with the same loop as ``train``."""
    if hidden_size < 1:
        raise TaggerError(f"hidden_size must be >= 1, got {hidden_size}")
    x, y, level = _flatten_training_set(data, len(label_set))
    width = x.shape[1]
    rng_init = np.random.default_rng(derive_seed(hp.seed, "init"))
    w1 = rng_init.uniform(-1, 1, size=(width, hidden_size)) / np.sqrt(width)
    b1 = np.zeros(hidden_size)
    w2 = rng_init.uniform(-1, 1, size=(hidden_size, len(label_set))) / np.sqrt(hidden_size)
    rng = np.random.default_rng(derive_seed(hp.seed, "shuffle"))
    n = x.shape[0]
    history: list[float] = []
    for epoch in range(hp.epochs):
        perm = rng.permutation(n)
        loss_total = 0.0
        weight_total = 0.0
        for batch_index, lo in enumerate(range(0, n, hp.batch_size)):
            idx = perm[lo : lo + hp.batch_size]
            xb = x[idx]
            pre = xb @ w1 + b1
            hidden = np.maximum(pre, 0.0)
            loss_sum, weight_sum, dlogits = kernels.xent_grad(hidden @ w2, y[idx], None)
            if not np.isfinite(loss_sum / weight_sum):
                raise TrainingDiverged(
                    f"non-finite loss at epoch {epoch + 1}, batch {batch_index + 1}"
                )
            dhidden = (dlogits @ w2.T) * (pre > 0.0)
            w2 -= hp.learning_rate * (hidden.T @ dlogits) / weight_sum
            w1 -= hp.learning_rate * (xb.T @ dhidden) / weight_sum
            b1 -= hp.learning_rate * dhidden.sum(axis=0) / weight_sum
            loss_total += loss_sum
            weight_total += weight_sum
        history.append(loss_total / weight_total)
    return MLPTagger(w1, b1, w2, label_set, level), history
