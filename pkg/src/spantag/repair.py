"""Annotation repair: make every span's offsets agree with its text.

Real span annotations drift from their text in recurring ways: format and
private-use code points that annotation tools count inconsistently,
offsets computed against a different revision of the text, and user
mentions rewritten to a placeholder in the text but not in the annotation.
Repair runs four steps per snippet:

1. scrub the text: every Cf (format) or Co (private use) code point
   becomes one space, so positions are preserved;
2. keep annotations whose offsets already match their surface;
3. otherwise search the text for the surface and realign to the
   occurrence nearest the reported start, retrying with the surface's
   user mentions normalized to ``@USER``;
4. otherwise consult a manual override ledger.

Annotations that fail every step are recorded as unrepairable and their
snippet is dropped from the repaired corpus. After repair,
``text[start:end] == surface`` holds for every retained span, and
repairing a repaired corpus is a no-op.
"""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .corpus import CorpusError, Snippet, TechniqueSpan
from .ioutil import write_jsonl

MENTION_PLACEHOLDER = "@USER"
_MENTION_RE = re.compile(r"@[^\s@]+")

# RepairAction kinds
SCRUBBED_CHARS = "scrubbed_chars"
REALIGNED = "realigned"
MENTION_NORMALIZED = "mention_normalized"
OVERRIDE_APPLIED = "override_applied"
UNREPAIRABLE = "unrepairable"


class SurfaceNotFound(LookupError):
    """The annotated surface does not occur in the snippet text."""


def scrub_unicode(text: str) -> str:
    """Replace every Cf/Co code point with one space, preserving length."""
    return "".join(
        " " if unicodedata.category(ch) in ("Cf", "Co") else ch for ch in text
    )


def normalize_mention_surface(surface: str) -> str:
    """Collapse every ``@handle`` run to the generic ``@USER`` placeholder.

    A run is ``@`` followed by one or more non-space, non-``@`` characters;
    the literal placeholder itself is left alone, so the function is
    idempotent.
    """
    return _MENTION_RE.sub(
        lambda m: m.group(0) if m.group(0) == MENTION_PLACEHOLDER else MENTION_PLACEHOLDER,
        surface,
    )


def find_occurrences(text: str, surface: str) -> list[int]:
    """All (possibly overlapping) start offsets of ``surface`` in ``text``."""
    if not surface:
        return []
    starts = []
    pos = text.find(surface)
    while pos != -1:
        starts.append(pos)
        pos = text.find(surface, pos + 1)
    return starts


def realign_span(text: str, surface: str, reported_start: int) -> tuple[int, int]:
    """Locate ``surface`` in ``text``, ignoring the reported end entirely.

    Among multiple occurrences the one whose start is nearest the reported
    start wins; ties go to the smaller start. Raises
    :class:`SurfaceNotFound` when the surface does not occur.
    """
    starts = find_occurrences(text, surface)
    if not starts:
        raise SurfaceNotFound(f"surface {surface!r} not found in text")
    best = min(starts, key=lambda s: (abs(s - reported_start), s))
    return best, best + len(surface)


class OverrideLedger:
    """Manual span corrections keyed by (snippet id, annotation index).

    Ledger file: JSONL, one object per entry with fields
    ``id``, ``ann_index``, ``start``, ``end``, ``text``.
    """

    def __init__(
        self, entries: Mapping[tuple[str, int], tuple[int, int, str]] | None = None
    ):
        self._entries = dict(entries or {})

    @classmethod
    def load(cls, path: str | Path) -> "OverrideLedger":
        entries: dict[tuple[str, int], tuple[int, int, str]] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                    key = (rec["id"], int(rec["ann_index"]))
                    entries[key] = (int(rec["start"]), int(rec["end"]), rec["text"])
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise CorpusError(f"{path}: line {lineno}: bad ledger entry ({exc})") from None
        return cls(entries)

    def get(self, snippet_id: str, ann_index: int) -> tuple[int, int, str] | None:
        return self._entries.get((snippet_id, ann_index))

    def __len__(self) -> int:
        return len(self._entries)


@dataclass(frozen=True)
class RepairAction:
    kind: str
    ann_index: int | None = None
    count: int | None = None
    old_start: int | None = None
    new_start: int | None = None
    reason: str | None = None

    def as_dict(self) -> dict[str, Any]:
        rec: dict[str, Any] = {"action": self.kind}
        for key in ("ann_index", "count", "old_start", "new_start", "reason"):
            value = getattr(self, key)
            if value is not None:
                rec[key] = value
        return rec


@dataclass
class RepairReport:
    """Per-snippet audit of what repair changed (or could not fix)."""

    actions: dict[str, list[RepairAction]] = field(default_factory=dict)

    def add(self, snippet_id: str, action: RepairAction) -> None:
        self.actions.setdefault(snippet_id, []).append(action)

    @property
    def total_actions(self) -> int:
        return sum(len(a) for a in self.actions.values())

    @property
    def unrepairable_ids(self) -> tuple[str, ...]:
        return tuple(
            sid
            for sid, acts in self.actions.items()
            if any(a.kind == UNREPAIRABLE for a in acts)
        )

    def counts_by_kind(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for acts in self.actions.values():
            for a in acts:
                counts[a.kind] = counts.get(a.kind, 0) + 1
        return counts

    def write_jsonl(self, path: str | Path, header: dict[str, Any] | None = None) -> None:
        write_jsonl(
            path,
            (
                {"id": sid, **action.as_dict()}
                for sid, acts in self.actions.items()
                for action in acts
            ),
            header=header,
        )

    def summary(self) -> str:
        counts = self.counts_by_kind()
        if not counts:
            return "repair: nothing to do"
        parts = [f"{kind}={n}" for kind, n in sorted(counts.items())]
        dropped = len(self.unrepairable_ids)
        parts.append(f"snippets_dropped={dropped}")
        return "repair: " + " ".join(parts)


def _repair_annotation(
    text: str,
    span: TechniqueSpan,
    ann_index: int,
    snippet_id: str,
    ledger: OverrideLedger,
) -> tuple[TechniqueSpan | None, RepairAction | None]:
    """Repair one annotation against scrubbed text.

    Returns (span, action); span is None when unrepairable, action is None
    when the annotation was already consistent.
    """
    surface = scrub_unicode(span.surface)
    start, end = span.start, span.end
    if 0 <= start < end <= len(text) and text[start:end] == surface:
        return TechniqueSpan(span.technique, start, end, surface), None

    try:
        new_start, new_end = realign_span(text, surface, start)
        return (
            TechniqueSpan(span.technique, new_start, new_end, surface),
            RepairAction(REALIGNED, ann_index=ann_index, old_start=start, new_start=new_start),
        )
    except SurfaceNotFound:
        pass

    normalized = normalize_mention_surface(surface)
    if normalized != surface:
        try:
            new_start, new_end = realign_span(text, normalized, start)
            return (
                TechniqueSpan(span.technique, new_start, new_end, normalized),
                RepairAction(MENTION_NORMALIZED, ann_index=ann_index, old_start=start, new_start=new_start),
            )
        except SurfaceNotFound:
            pass

    entry = ledger.get(snippet_id, ann_index)
    if entry is not None:
        fix_start, fix_end, fix_surface = entry
        if 0 <= fix_start < fix_end <= len(text) and text[fix_start:fix_end] == fix_surface:
            return (
                TechniqueSpan(span.technique, fix_start, fix_end, fix_surface),
                RepairAction(OVERRIDE_APPLIED, ann_index=ann_index, old_start=start, new_start=fix_start),
            )
        reason = f"override entry does not match text at [{fix_start}, {fix_end})"
        return None, RepairAction(UNREPAIRABLE, ann_index=ann_index, reason=reason)

    shown = surface if len(surface) <= 40 else surface[:37] + "..."
    return None, RepairAction(
        UNREPAIRABLE, ann_index=ann_index, reason=f"surface not found: {shown!r}"
    )


def repair_corpus(
    snippets: Sequence[Snippet], ledger: OverrideLedger | None = None
) -> tuple[list[Snippet], RepairReport]:
    """Run the full repair pipeline over a corpus.

    Failures never raise; they are recorded in the report, and a snippet
    with any unrepairable annotation is excluded from the returned corpus.
    """
    ledger = ledger or OverrideLedger()
    report = RepairReport()
    repaired: list[Snippet] = []
    for snippet in snippets:
        text = scrub_unicode(snippet.text)
        n_scrubbed = sum(1 for a, b in zip(text, snippet.text) if a != b)
        if n_scrubbed:
            report.add(snippet.id, RepairAction(SCRUBBED_CHARS, count=n_scrubbed))

        spans: list[TechniqueSpan] = []
        dropped = False
        for i, span in enumerate(snippet.gold_spans):
            fixed, action = _repair_annotation(text, span, i, snippet.id, ledger)
            if action is not None:
                report.add(snippet.id, action)
            if fixed is None:
                dropped = True
            else:
                spans.append(fixed)
        if not dropped:
            repaired.append(Snippet(snippet.id, snippet.genre, text, tuple(spans)))
    return repaired, report
