"""Words, subword tokens, and the character alignment between them.

Words are maximal runs of non-whitespace characters. A subword tokenizer
splits each word into one or more pieces; continuation pieces carry a
``##`` prefix that is not part of the text. ``align`` glues the two
levels together, giving every token a character span inside its word, so
labels can be projected onto tokens or words and predictions can be
mapped back to character offsets.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Protocol, Sequence

from .corpus import TechniqueSpan

_WORD_RE = re.compile(r"\S+")

CONTINUATION_PREFIX = "##"


class SegmentError(ValueError):
    """A tokenizer violated its contract (pieces do not rebuild the word)."""


class UnitLevel(Enum):
    """Granularity at which labels are assigned: one per token or per word."""

    TOKEN = "token"
    WORD = "word"


@dataclass(frozen=True)
class WordSpan:
    start: int
    end: int
    index: int


@dataclass(frozen=True)
class Token:
    text: str
    start: int
    end: int
    word_index: int


class SubwordTokenizer(Protocol):
    """Splits one word into subword pieces.

    Must be deterministic and total: every word yields at least one piece,
    and the pieces, with any leading ``##`` stripped from non-initial
    pieces, concatenate back to the word.
    """

    def tokenize_word(self, word: str) -> list[str]: ...


@dataclass(frozen=True)
class TokenAlignment:
    """Tokens and words of one text, each token inside exactly one word."""

    tokens: tuple[Token, ...]
    words: tuple[WordSpan, ...]

    def word_token_ranges(self) -> tuple[tuple[int, int], ...]:
        """Half-open token index range [a, b) for each word, in word order."""
        ranges = []
        lo = 0
        for word in self.words:
            hi = lo
            while hi < len(self.tokens) and self.tokens[hi].word_index == word.index:
                hi += 1
            ranges.append((lo, hi))
            lo = hi
        return tuple(ranges)

    def unit_spans(self, level: UnitLevel) -> tuple[tuple[int, int], ...]:
        """Character span of every unit at the given level."""
        if level is UnitLevel.TOKEN:
            return tuple((t.start, t.end) for t in self.tokens)
        return tuple((w.start, w.end) for w in self.words)

    def unit_count(self, level: UnitLevel) -> int:
        return len(self.tokens) if level is UnitLevel.TOKEN else len(self.words)


class VocabTokenizer:
    """Greedy longest-match splitter over a fixed subword vocabulary.

    Vocabulary entries prefixed ``##`` only match after the first piece of
    a word. At each position the longest matching entry wins; at equal
    length the continuation form is preferred. Characters no entry covers
    become single-character pieces, so tokenization never fails.
    """

    def __init__(self, vocab: Iterable[str]):
        entries = [v for v in vocab if v]
        self._initial = frozenset(
            v for v in entries if not v.startswith(CONTINUATION_PREFIX)
        )
        self._continuation = frozenset(
            v[len(CONTINUATION_PREFIX):]
            for v in entries
            if v.startswith(CONTINUATION_PREFIX) and len(v) > len(CONTINUATION_PREFIX)
        )
        lengths = [len(v) for v in self._initial | self._continuation]
        self._max_len = max(lengths, default=1)

    @classmethod
    def load(cls, path: str | Path) -> "VocabTokenizer":
        """Read a vocabulary file: one subword per line, blank lines skipped."""
        with open(path, encoding="utf-8") as fh:
            return cls(line.strip() for line in fh if line.strip())

    def __len__(self) -> int:
        return len(self._initial) + len(self._continuation)

    def tokenize_word(self, word: str) -> list[str]:
        pieces: list[str] = []
        pos = 0
        n = len(word)
        while pos < n:
            piece = None
            length = 1
            for length in range(min(self._max_len, n - pos), 0, -1):
                cand = word[pos : pos + length]
                if pos > 0 and cand in self._continuation:
                    piece = CONTINUATION_PREFIX + cand
                    break
                if cand in self._initial:
                    piece = cand
                    break
            if piece is None:
                length = 1
                ch = word[pos]
                piece = ch if pos == 0 else CONTINUATION_PREFIX + ch
            pieces.append(piece)
            pos += length
        return pieces


def segment_words(text: str) -> tuple[WordSpan, ...]:
    """Maximal non-whitespace runs, in order of appearance."""
    return tuple(
        WordSpan(m.start(), m.end(), i) for i, m in enumerate(_WORD_RE.finditer(text))
    )


def _piece_surface(piece: str, is_initial: bool) -> str:
    if not is_initial and piece.startswith(CONTINUATION_PREFIX):
        return piece[len(CONTINUATION_PREFIX):]
    return piece


def align(text: str, tokenizer: SubwordTokenizer) -> TokenAlignment:
    """Tokenize each word and assign every piece its character span.

    Pieces consume the word greedily left to right; a tokenizer whose
    pieces do not reconstruct the word exactly raises :class:`SegmentError`.
    """
    words = segment_words(text)
    tokens: list[Token] = []
    for word in words:
        word_text = text[word.start : word.end]
        pieces = tokenizer.tokenize_word(word_text)
        if not pieces:
            raise SegmentError(f"tokenizer returned no pieces for word {word_text!r}")
        pos = 0
        for j, piece in enumerate(pieces):
            surface = _piece_surface(piece, j == 0)
            if word_text[pos : pos + len(surface)] != surface:
                raise SegmentError(
                    f"piece {piece!r} does not match word {word_text!r} at offset {pos}"
                )
            tokens.append(
                Token(piece, word.start + pos, word.start + pos + len(surface), word.index)
            )
            pos += len(surface)
        if pos != len(word_text):
            raise SegmentError(
                f"pieces {pieces!r} cover {pos} of {len(word_text)} characters "
                f"of word {word_text!r}"
            )
    return TokenAlignment(tuple(tokens), words)


def project_gold(
    alignment: TokenAlignment, gold: Sequence[TechniqueSpan], level: UnitLevel
) -> list[int]:
    """One label id per unit, assigned by character overlap with gold spans.

    A unit overlapping no gold span gets O (id 0). Among several
    overlapping spans the shortest wins; equal lengths go to the later
    start.
    """
    labels = []
    for ustart, uend in alignment.unit_spans(level):
        best: TechniqueSpan | None = None
        for span in gold:
            if span.start < uend and ustart < span.end:
                if best is None or (span.length, -span.start) < (best.length, -best.start):
                    best = span
        labels.append(best.technique if best is not None else 0)
    return labels
