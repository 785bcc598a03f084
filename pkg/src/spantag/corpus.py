"""Data model and JSONL (de)serialization for annotated snippets.

One corpus line is a standalone JSON object:

    {"id": "p1", "text": "...", "type": "tweet",
     "labels": [{"technique": "...", "start": 4, "end": 17, "text": "..."}]}

Offsets count Unicode code points, never bytes or UTF-16 units. The loader
takes them verbatim even when they disagree with the text; making offsets
consistent is the repair module's job. Prediction files carry the same
``labels`` shape but only ``id`` and ``labels`` per line.

The label inventory is a plain-text file with one technique name per line.
The non-technique label ``O`` is not listed in the file; it is pinned at
index 0 of every :class:`LabelSet` so label ids are stable across runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .ioutil import CONFIG_HEADER_KEY, write_jsonl

O_LABEL = "O"


class CorpusError(ValueError):
    """Malformed corpus data: bad JSON, unknown technique, duplicate id."""


class Genre(Enum):
    TWEET = "tweet"
    PARAGRAPH = "paragraph"

    @classmethod
    def parse(cls, value: str) -> "Genre":
        try:
            return cls(value.strip().lower())
        except (ValueError, AttributeError):
            raise CorpusError(
                f"unknown genre {value!r}; expected 'tweet' or 'paragraph'"
            ) from None


class LabelSet:
    """Ordered technique inventory with ``O`` pinned at index 0."""

    def __init__(self, technique_names: Sequence[str]):
        names = (O_LABEL, *technique_names)
        seen: set[str] = set()
        for name in names:
            if not name:
                raise CorpusError("label names must be non-empty")
            if name in seen:
                raise CorpusError(f"duplicate label name {name!r}")
            seen.add(name)
        self.names: tuple[str, ...] = names
        self._index = {name: i for i, name in enumerate(names)}

    @classmethod
    def load(cls, path: str | Path) -> "LabelSet":
        """Read one technique name per line; blank lines are ignored."""
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return cls([line.strip() for line in lines if line.strip()])

    @property
    def techniques(self) -> tuple[str, ...]:
        return self.names[1:]

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise CorpusError(f"unknown technique name {name!r}") from None

    def name(self, label_id: int) -> str:
        return self.names[label_id]

    def __len__(self) -> int:
        return len(self.names)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, LabelSet) and self.names == other.names

    def __repr__(self) -> str:
        return f"LabelSet({len(self.techniques)} techniques)"


@dataclass(frozen=True)
class TechniqueSpan:
    """A labeled character range [start, end) with its surface string."""

    technique: int  # index into the LabelSet; never 0 (= O)
    start: int
    end: int
    surface: str

    @property
    def length(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class Snippet:
    id: str
    genre: Genre
    text: str
    gold_spans: tuple[TechniqueSpan, ...] = ()


@dataclass(frozen=True)
class CorpusStats:
    tweets: int
    paragraphs: int
    spans: int

    @property
    def total(self) -> int:
        return self.tweets + self.paragraphs


def _parse_spans(
    labels: Any, label_set: LabelSet, where: str
) -> tuple[TechniqueSpan, ...]:
    if not isinstance(labels, list):
        raise CorpusError(f"{where}: 'labels' must be a list")
    spans = []
    for k, lab in enumerate(labels):
        if not isinstance(lab, dict):
            raise CorpusError(f"{where}: label {k} is not an object")
        try:
            technique = lab["technique"]
            start = lab["start"]
            end = lab["end"]
            surface = lab["text"]
        except KeyError as exc:
            raise CorpusError(f"{where}: label {k} missing field {exc}") from None
        if not isinstance(technique, str):
            raise CorpusError(f"{where}: label {k} technique must be a string")
        if not isinstance(start, int) or not isinstance(end, int):
            raise CorpusError(f"{where}: label {k} offsets must be integers")
        if not isinstance(surface, str):
            raise CorpusError(f"{where}: label {k} text must be a string")
        try:
            tech_id = label_set.index(technique)
        except CorpusError as exc:
            raise CorpusError(f"{where}: {exc}") from None
        if tech_id == 0:
            raise CorpusError(f"{where}: label {k} uses the reserved label {O_LABEL!r}")
        spans.append(TechniqueSpan(tech_id, start, end, surface))
    return tuple(spans)


def _iter_records(path: str | Path) -> Iterable[tuple[int, dict[str, Any]]]:
    first = True
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}: line {lineno}: invalid JSON ({exc.msg})") from None
            if first and isinstance(rec, dict) and CONFIG_HEADER_KEY in rec:
                first = False
                continue  # config echo line written by the CLI
            first = False
            if not isinstance(rec, dict):
                raise CorpusError(f"{path}: line {lineno}: expected a JSON object")
            yield lineno, rec


def load_corpus(path: str | Path, label_set: LabelSet) -> list[Snippet]:
    """Load snippets in file order; offsets are taken verbatim.

    Raises :class:`CorpusError` (with the line number) on malformed lines,
    unknown technique names, or duplicate snippet ids.
    """
    snippets: list[Snippet] = []
    seen_ids: set[str] = set()
    for lineno, rec in _iter_records(path):
        where = f"{path}: line {lineno}"
        snippet_id = rec.get("id")
        if not isinstance(snippet_id, str) or not snippet_id:
            raise CorpusError(f"{where}: missing or empty 'id'")
        if snippet_id in seen_ids:
            raise CorpusError(f"{where}: duplicate snippet id {snippet_id!r}")
        seen_ids.add(snippet_id)
        text = rec.get("text")
        if not isinstance(text, str):
            raise CorpusError(f"{where}: missing 'text'")
        if "type" not in rec:
            raise CorpusError(f"{where}: missing 'type'")
        try:
            genre = Genre.parse(rec["type"])
        except CorpusError as exc:
            raise CorpusError(f"{where}: {exc}") from None
        spans = _parse_spans(rec.get("labels", []), label_set, where)
        snippets.append(Snippet(snippet_id, genre, text, spans))
    return snippets


def _span_record(span: TechniqueSpan, label_set: LabelSet) -> dict[str, Any]:
    return {
        "technique": label_set.name(span.technique),
        "start": span.start,
        "end": span.end,
        "text": span.surface,
    }


def save_corpus(
    snippets: Sequence[Snippet],
    path: str | Path,
    label_set: LabelSet,
    header: dict[str, Any] | None = None,
) -> None:
    """Write full snippet records (id, text, type, labels), one per line."""
    write_jsonl(
        path,
        (
            {
                "id": s.id,
                "text": s.text,
                "type": s.genre.value,
                "labels": [_span_record(sp, label_set) for sp in s.gold_spans],
            }
            for s in snippets
        ),
        header=header,
    )


def save_predictions(
    snippets: Sequence[Snippet],
    predictions: Sequence[Sequence[TechniqueSpan]],
    path: str | Path,
    label_set: LabelSet,
    header: dict[str, Any] | None = None,
) -> None:
    """Write one ``{"id", "labels"}`` object per snippet, spans ordered by start."""
    if len(snippets) != len(predictions):
        raise ValueError(
            f"got {len(predictions)} prediction lists for {len(snippets)} snippets"
        )
    write_jsonl(
        path,
        (
            {
                "id": s.id,
                "labels": [
                    _span_record(sp, label_set)
                    for sp in sorted(spans, key=lambda sp: (sp.start, sp.end))
                ],
            }
            for s, spans in zip(snippets, predictions)
        ),
        header=header,
    )


def load_predictions(
    path: str | Path, label_set: LabelSet
) -> dict[str, tuple[TechniqueSpan, ...]]:
    """Load a predictions file as a mapping from snippet id to spans."""
    out: dict[str, tuple[TechniqueSpan, ...]] = {}
    for lineno, rec in _iter_records(path):
        where = f"{path}: line {lineno}"
        snippet_id = rec.get("id")
        if not isinstance(snippet_id, str) or not snippet_id:
            raise CorpusError(f"{where}: missing or empty 'id'")
        if snippet_id in out:
            raise CorpusError(f"{where}: duplicate snippet id {snippet_id!r}")
        out[snippet_id] = _parse_spans(rec.get("labels", []), label_set, where)
    return out


def corpus_stats(snippets: Sequence[Snippet]) -> CorpusStats:
    tweets = sum(1 for s in snippets if s.genre is Genre.TWEET)
    spans = sum(len(s.gold_spans) for s in snippets)
    return CorpusStats(tweets=tweets, paragraphs=len(snippets) - tweets, spans=spans)


def gold_by_id(snippets: Sequence[Snippet]) -> dict[str, tuple[TechniqueSpan, ...]]:
    """Gold spans keyed by snippet id, as the scorer expects."""
    return {s.id: s.gold_spans for s in snippets}
