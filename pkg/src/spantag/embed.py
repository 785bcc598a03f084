"""Per-token vectors, the sequence summary vector, and classifier features.

Vectors come from a provider: either deterministic hash embeddings
computed on the fly, or vectors precomputed elsewhere and loaded from a
file. Features for the classifier are assembled per unit (token or word)
by combining the sequence vector with the unit vector, optionally
followed by a two-dimensional genre one-hot.

The hash embedder gives every distinct token string its own sparse
random ±1 pattern, seeded only by the token text and a global seed. It
has no context sensitivity; it exists so the rest of the system can be
exercised and measured without a neural backbone.
"""

from __future__ import annotations

import hashlib
import json
import math
import struct
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Protocol, Sequence

import numpy as np

from .corpus import Genre, Snippet
from .ioutil import atomic_write_bytes, write_jsonl
from .segment import TokenAlignment, UnitLevel

DEFAULT_DIM = 768
HASH_COORDS = 8

EMBED_MAGIC = b"SPTGEMB1"
EMBED_FORMAT_VERSION = 1

# Genre one-hot ordering is fixed: (tweet, paragraph).
_GENRE_ONE_HOT = {
    Genre.TWEET: (1.0, 0.0),
    Genre.PARAGRAPH: (0.0, 1.0),
}


class EmbeddingError(ValueError):
    """Embedding file is malformed or inconsistent with the corpus."""


class CombineMode(Enum):
    """How the sequence vector joins each unit vector."""

    CONCAT = "concat"
    ADD = "add"
    TOKEN_ONLY = "token-only"


@dataclass(frozen=True)
class EmbeddedSequence:
    """Sequence vector plus one vector per token, all of one dimension."""

    cls: np.ndarray
    token_vectors: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.cls.shape[0])


@dataclass(frozen=True)
class FeatureMatrix:
    """One feature row per unit, ready for the linear classifier."""

    rows: np.ndarray
    unit_level: UnitLevel

    @property
    def width(self) -> int:
        return int(self.rows.shape[1])

    def __len__(self) -> int:
        return int(self.rows.shape[0])


class EmbeddingProvider(Protocol):
    """Maps a snippet and its alignment to vectors; deterministic."""

    def embed(self, snippet: Snippet, alignment: TokenAlignment) -> EmbeddedSequence: ...


def _hash_token_vector(token_text: str, seed: int, d: int) -> np.ndarray:
    """Sparse ±1 vector for one token string; same inputs, same vector."""
    digest = hashlib.blake2b(
        token_text.encode("utf-8"),
        digest_size=16,
        key=f"spantag-hash-{seed}".encode("ascii"),
    ).digest()
    rng = np.random.default_rng(int.from_bytes(digest, "little"))
    k = min(HASH_COORDS, d)
    coords = rng.choice(d, size=k, replace=False)
    signs = rng.integers(0, 2, size=k) * 2 - 1
    vec = np.zeros(d, dtype=np.float32)
    vec[coords] = signs.astype(np.float32) / np.float32(math.sqrt(k))
    return vec


def hash_embed(
    snippet: Snippet, alignment: TokenAlignment, seed: int, d: int = DEFAULT_DIM
) -> EmbeddedSequence:
    """Embed every token by hashing its text; cls is the token mean."""
    if d < 1:
        raise EmbeddingError(f"dimension must be >= 1, got {d}")
    vectors = np.zeros((len(alignment.tokens), d), dtype=np.float32)
    cache: dict[str, np.ndarray] = {}
    for i, token in enumerate(alignment.tokens):
        vec = cache.get(token.text)
        if vec is None:
            vec = _hash_token_vector(token.text, seed, d)
            cache[token.text] = vec
        vectors[i] = vec
    if len(vectors):
        cls = vectors.astype(np.float64).mean(axis=0).astype(np.float32)
    else:
        cls = np.zeros(d, dtype=np.float32)
    return EmbeddedSequence(cls, vectors)


class HashEmbeddingProvider:
    """Provider over hash_embed; caches nothing across snippets beyond tokens."""

    def __init__(self, seed: int, d: int = DEFAULT_DIM):
        if d < 1:
            raise EmbeddingError(f"dimension must be >= 1, got {d}")
        self.seed = seed
        self.d = d
        self._token_cache: dict[str, np.ndarray] = {}

    def embed(self, snippet: Snippet, alignment: TokenAlignment) -> EmbeddedSequence:
        vectors = np.zeros((len(alignment.tokens), self.d), dtype=np.float32)
        for i, token in enumerate(alignment.tokens):
            vec = self._token_cache.get(token.text)
            if vec is None:
                vec = _hash_token_vector(token.text, self.seed, self.d)
                self._token_cache[token.text] = vec
            vectors[i] = vec
        if len(vectors):
            cls = vectors.astype(np.float64).mean(axis=0).astype(np.float32)
        else:
            cls = np.zeros(self.d, dtype=np.float32)
        return EmbeddedSequence(cls, vectors)


class FileEmbeddingProvider:
    """Returns vectors stored per snippet id, validating token counts."""

    def __init__(self, sequences: dict[str, EmbeddedSequence]):
        self._sequences = sequences

    def embed(self, snippet: Snippet, alignment: TokenAlignment) -> EmbeddedSequence:
        seq = self._sequences.get(snippet.id)
        if seq is None:
            raise EmbeddingError(f"no stored embedding for snippet {snippet.id!r}")
        if seq.token_vectors.shape[0] != len(alignment.tokens):
            raise EmbeddingError(
                f"snippet {snippet.id!r}: stored {seq.token_vectors.shape[0]} token "
                f"vectors but alignment has {len(alignment.tokens)} tokens"
            )
        return seq

    def __len__(self) -> int:
        return len(self._sequences)


def write_embeddings_jsonl(
    path: str | Path, records: Iterable[tuple[str, EmbeddedSequence]]
) -> None:
    """One JSON object per snippet: {"id", "cls": [...], "tokens": [[...], ...]}."""
    write_jsonl(
        path,
        (
            {
                "id": snippet_id,
                "cls": [float(x) for x in seq.cls],
                "tokens": [[float(x) for x in row] for row in seq.token_vectors],
            }
            for snippet_id, seq in records
        ),
    )


def write_embeddings_binary(
    path: str | Path, records: Iterable[tuple[str, EmbeddedSequence]]
) -> None:
    """Dense little-endian layout; see the repo docs for the exact bytes.

    magic "SPTGEMB1" | u32 version | u32 dim | u32 record count | records,
    each: u32 id byte length | id utf-8 | u32 token count | cls f32[dim] |
    tokens f32[count * dim].
    """
    items = list(records)
    dim = items[0][1].dim if items else 0
    chunks = [EMBED_MAGIC, struct.pack("<III", EMBED_FORMAT_VERSION, dim, len(items))]
    for snippet_id, seq in items:
        if seq.dim != dim:
            raise EmbeddingError(
                f"snippet {snippet_id!r} has dimension {seq.dim}, expected {dim}"
            )
        id_bytes = snippet_id.encode("utf-8")
        chunks.append(struct.pack("<I", len(id_bytes)))
        chunks.append(id_bytes)
        chunks.append(struct.pack("<I", seq.token_vectors.shape[0]))
        chunks.append(np.ascontiguousarray(seq.cls, dtype="<f4").tobytes())
        chunks.append(np.ascontiguousarray(seq.token_vectors, dtype="<f4").tobytes())
    atomic_write_bytes(path, b"".join(chunks))


def _read_embeddings_binary(path: Path) -> dict[str, EmbeddedSequence]:
    data = path.read_bytes()
    if data[: len(EMBED_MAGIC)] != EMBED_MAGIC:
        raise EmbeddingError(f"{path}: bad magic bytes")
    offset = len(EMBED_MAGIC)

    def take(n: int) -> bytes:
        nonlocal offset
        if offset + n > len(data):
            raise EmbeddingError(f"{path}: truncated at byte {offset}")
        out = data[offset : offset + n]
        offset += n
        return out

    version, dim, count = struct.unpack("<III", take(12))
    if version != EMBED_FORMAT_VERSION:
        raise EmbeddingError(f"{path}: unsupported format version {version}")
    sequences: dict[str, EmbeddedSequence] = {}
    for _ in range(count):
        (id_len,) = struct.unpack("<I", take(4))
        snippet_id = take(id_len).decode("utf-8")
        (n_tokens,) = struct.unpack("<I", take(4))
        cls = np.frombuffer(take(4 * dim), dtype="<f4").copy()
        tokens = (
            np.frombuffer(take(4 * dim * n_tokens), dtype="<f4")
            .reshape(n_tokens, dim)
            .copy()
        )
        sequences[snippet_id] = EmbeddedSequence(cls, tokens)
    if offset != len(data):
        raise EmbeddingError(f"{path}: {len(data) - offset} trailing bytes")
    return sequences


def _read_embeddings_jsonl(path: Path) -> dict[str, EmbeddedSequence]:
    sequences: dict[str, EmbeddedSequence] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                snippet_id = rec["id"]
                cls = np.asarray(rec["cls"], dtype=np.float32)
                tokens = np.asarray(rec["tokens"], dtype=np.float32)
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise EmbeddingError(f"{path}: line {lineno}: {exc}") from None
            if tokens.size == 0:
                tokens = np.zeros((0, cls.shape[0]), dtype=np.float32)
            if tokens.ndim != 2 or tokens.shape[1] != cls.shape[0]:
                raise EmbeddingError(
                    f"{path}: line {lineno}: token vectors do not match cls dimension"
                )
            sequences[snippet_id] = EmbeddedSequence(cls, tokens)
    return sequences


def load_embeddings(
    path: str | Path, corpus: Sequence[Snippet] | None = None
) -> FileEmbeddingProvider:
    """Load stored vectors, sniffing binary vs JSONL by magic bytes.

    When a corpus is given, every snippet id must have a stored record.
    """
    path = Path(path)
    with open(path, "rb") as fh:
        is_binary = fh.read(len(EMBED_MAGIC)) == EMBED_MAGIC
    sequences = _read_embeddings_binary(path) if is_binary else _read_embeddings_jsonl(path)
    dims = {seq.dim for seq in sequences.values()}
    if len(dims) > 1:
        raise EmbeddingError(f"{path}: mixed dimensions {sorted(dims)}")
    if corpus is not None:
        missing = [s.id for s in corpus if s.id not in sequences]
        if missing:
            raise EmbeddingError(
                f"{path}: no embedding for snippet {missing[0]!r}"
                + (f" and {len(missing) - 1} more" if len(missing) > 1 else "")
            )
    return FileEmbeddingProvider(sequences)


def feature_width(d: int, use_genre: bool, combine: CombineMode = CombineMode.CONCAT) -> int:
    """Classifier input width for a given configuration."""
    base = 2 * d if combine is CombineMode.CONCAT else d
    return base + 2 if use_genre else base


def build_features(
    seq: EmbeddedSequence,
    alignment: TokenAlignment,
    genre: Genre,
    unit_level: UnitLevel,
    use_genre: bool,
    combine: CombineMode = CombineMode.CONCAT,
) -> FeatureMatrix:
    """Assemble one feature row per unit.

    Token level uses each token's vector; word level max-pools the word's
    token vectors coordinate-wise. The default combination prepends the
    sequence vector to every row; "add" sums the two instead and
    "token-only" drops the sequence vector, both kept for ablations.
    """
    if seq.token_vectors.shape[0] != len(alignment.tokens):
        raise EmbeddingError(
            f"sequence has {seq.token_vectors.shape[0]} token vectors "
            f"but alignment has {len(alignment.tokens)} tokens"
        )
    vectors = seq.token_vectors.astype(np.float64)
    if unit_level is UnitLevel.WORD:
        pooled = np.zeros((len(alignment.words), seq.dim), dtype=np.float64)
        for j, (lo, hi) in enumerate(alignment.word_token_ranges()):
            pooled[j] = vectors[lo:hi].max(axis=0)
        units = pooled
    else:
        units = vectors

    cls = seq.cls.astype(np.float64)
    if combine is CombineMode.CONCAT:
        base = np.hstack([np.tile(cls, (len(units), 1)), units])
    elif combine is CombineMode.ADD:
        base = units + cls
    else:
        base = units

    if use_genre:
        one_hot = np.tile(np.asarray(_GENRE_ONE_HOT[genre]), (len(base), 1))
        base = np.hstack([base, one_hot])
    return FeatureMatrix(np.ascontiguousarray(base), unit_level)
