"""Synthetic corpora with known answers, plus a damage injector.

Real annotation data cannot ship with the repo, so tests and the bundled
fixtures use generated snippets whose gold spans are correct by
construction. The generator keeps the tagging task linearly separable:
every technique owns a disjoint inventory of 4-character word stems and
2-character continuation pieces, so a token's text alone determines its
label. Stems draw on letters a-m and continuations on n-z, which keeps
greedy longest-match tokenization unambiguous (no continuation window
can ever spell a stem).

``damage_corpus`` then re-creates the failure modes repair exists for:
inserted format/private-use code points (shifting everything after
them), reported offsets perturbed by up to 20 characters with garbage
ends, user mentions renamed inside surfaces, and a few surfaces
scrambled beyond automatic recovery, half of which get a manual override
entry. It returns the damaged corpus together with the exact spans
repair should produce, so tests can assert recovery rather than just
self-consistency.

Run ``python -m spantag.synth OUTDIR`` to write the fixture bundle.
"""

from __future__ import annotations

import argparse
import itertools
import json
import random
import string
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .corpus import Genre, LabelSet, Snippet, TechniqueSpan, save_corpus
from .ioutil import atomic_write_text, write_jsonl

N_TECHNIQUES = 23
MENTION = "@USER"

_STEM_ALPHABET = "abcdefghijklm"
_FILLER_ALPHABET = "nopqrstuvwxyz"
_STEMS_PER_CLASS = 4
_FILLERS_PER_CLASS = 3

# Cf (format) and Co (private use) code points for the damage injector.
_INVISIBLE = "​‎‬‭﻿"


def default_label_set() -> LabelSet:
    return LabelSet([f"tech{i:02d}" for i in range(1, N_TECHNIQUES + 1)])


@dataclass(frozen=True)
class ClassInventory:
    """Word-building material owned by one label (index 0 = O)."""

    stems: tuple[str, ...]
    fillers: tuple[str, ...]


def build_inventories(label_set: LabelSet, seed: int) -> list[ClassInventory]:
    """Disjoint stem and filler inventories, one per label including O."""
    rng = random.Random(seed)
    n_classes = len(label_set)
    stems = ["".join(p) for p in itertools.product(_STEM_ALPHABET, repeat=4)]
    fillers = ["".join(p) for p in itertools.product(_FILLER_ALPHABET, repeat=2)]
    rng.shuffle(stems)
    rng.shuffle(fillers)
    if n_classes * _STEMS_PER_CLASS > len(stems):
        raise ValueError(f"not enough stems for {n_classes} classes")
    if n_classes * _FILLERS_PER_CLASS > len(fillers):
        raise ValueError(f"not enough fillers for {n_classes} classes")
    inventories = []
    for c in range(n_classes):
        inventories.append(
            ClassInventory(
                tuple(stems[c * _STEMS_PER_CLASS : (c + 1) * _STEMS_PER_CLASS]),
                tuple(fillers[c * _FILLERS_PER_CLASS : (c + 1) * _FILLERS_PER_CLASS]),
            )
        )
    return inventories


def vocab_lines(inventories: Sequence[ClassInventory]) -> list[str]:
    """Tokenizer vocabulary covering every inventory, mention included."""
    lines = [MENTION]
    for inv in inventories:
        lines.extend(inv.stems)
        lines.extend("##" + f for f in inv.fillers)
    return lines


def _make_word(inv: ClassInventory, rng: random.Random) -> str:
    stem = rng.choice(inv.stems)
    n_fillers = rng.choices((0, 1, 2), weights=(45, 35, 20))[0]
    return stem + "".join(rng.choice(inv.fillers) for _ in range(n_fillers))


def generate_corpus(
    n_snippets: int,
    label_set: LabelSet,
    inventories: Sequence[ClassInventory],
    seed: int,
    id_prefix: str = "synth",
    mentions_in_spans: bool = False,
) -> list[Snippet]:
    """Snippets with word-aligned gold spans, consistent by construction.

    Each snippet carries 1-3 gold runs of 1-3 words, separated by at
    least one unlabeled word so decoding cannot merge neighbouring gold
    spans. Tweets occasionally contain the mention placeholder; it stays
    outside spans unless ``mentions_in_spans`` is set.
    """
    rng = random.Random(seed)
    snippets = []
    for i in range(n_snippets):
        genre = Genre.TWEET if rng.random() < 0.5 else Genre.PARAGRAPH
        n_words = rng.randint(6, 14) if genre is Genre.TWEET else rng.randint(10, 22)

        # Pick non-adjacent word runs to label.
        runs: list[tuple[int, int, int]] = []
        cursor = 0
        for _ in range(rng.randint(1, 3)):
            if cursor >= n_words - 1:
                break
            start = rng.randint(cursor, min(cursor + 4, n_words - 1))
            length = rng.randint(1, min(3, n_words - start))
            runs.append((start, start + length, rng.randint(1, len(label_set) - 1)))
            cursor = start + length + 1

        word_class = [0] * n_words
        for w_start, w_end, technique in runs:
            for w in range(w_start, w_end):
                word_class[w] = technique

        words = [_make_word(inventories[c], rng) for c in word_class]
        if genre is Genre.TWEET and rng.random() < 0.5:
            slots = [
                w
                for w in range(n_words)
                if mentions_in_spans or word_class[w] == 0
            ]
            if slots:
                words[rng.choice(slots)] = MENTION

        starts = []
        ends = []
        pieces = []
        offset = 0
        for w, word in enumerate(words):
            if w:
                gap = "  " if rng.random() < 0.1 else " "
                pieces.append(gap)
                offset += len(gap)
            starts.append(offset)
            offset += len(word)
            ends.append(offset)
            pieces.append(word)
        text = "".join(pieces)

        spans = tuple(
            TechniqueSpan(
                technique,
                starts[w_start],
                ends[w_end - 1],
                text[starts[w_start] : ends[w_end - 1]],
            )
            for w_start, w_end, technique in runs
        )
        snippets.append(Snippet(f"{id_prefix}-{i:04d}", genre, text, spans))
    return snippets


@dataclass(frozen=True)
class DamageResult:
    """Damaged corpus plus the ground truth repair should recover."""

    snippets: list[Snippet]
    expected: dict[str, tuple[TechniqueSpan, ...]]
    dropped_ids: frozenset[str]
    ledger_entries: list[dict]


def _random_handle(rng: random.Random) -> str:
    body = "".join(rng.choices(string.ascii_lowercase + string.digits, k=rng.randint(4, 9)))
    return "@" + body


def damage_corpus(snippets: Sequence[Snippet], seed: int) -> DamageResult:
    """Inject the repairable (and a little unrepairable) damage.

    Per snippet, independently: invisible code points inserted outside
    span interiors (every later offset shifts), reported starts moved by
    1-20 with garbage ends, mentions inside surfaces renamed to random
    handles. A few surfaces are scrambled outright; half of those get an
    override ledger entry with the true offsets, the rest become
    unrepairable and their snippets are expected to be dropped.
    """
    rng = random.Random(seed)
    damaged = []
    expected: dict[str, tuple[TechniqueSpan, ...]] = {}
    dropped = set()
    ledger_entries = []
    for snippet in snippets:
        text = snippet.text
        true_spans = list(snippet.gold_spans)

        if rng.random() < 0.4:
            for _ in range(rng.randint(1, 3)):
                legal = [
                    p
                    for p in range(len(text) + 1)
                    if not any(s.start < p < s.end for s in true_spans)
                ]
                pos = rng.choice(legal)
                text = text[:pos] + rng.choice(_INVISIBLE) + text[pos:]
                true_spans = [
                    TechniqueSpan(
                        s.technique,
                        s.start + 1 if s.start >= pos else s.start,
                        s.end + 1 if s.start >= pos else s.end,
                        s.surface,
                    )
                    for s in true_spans
                ]

        scrub_preview = "".join(" " if ch in _INVISIBLE else ch for ch in text)
        reported: list[TechniqueSpan] = []
        snippet_ledger: list[dict] = []
        drop_this = False
        for ann_index, true_span in enumerate(true_spans):
            start, end, surface = true_span.start, true_span.end, true_span.surface
            if rng.random() < 0.5:
                start = max(0, start + rng.choice((-1, 1)) * rng.randint(1, 20))
                end = start + true_span.length + rng.randint(-6, 4)
            if MENTION in surface and rng.random() < 0.7:
                surface = surface.replace(MENTION, _random_handle(rng))
            reported.append(TechniqueSpan(true_span.technique, start, end, surface))
            if rng.random() < 0.02:
                garbage = "".join(rng.choices(string.ascii_uppercase, k=12))
                reported[-1] = TechniqueSpan(true_span.technique, start, end, garbage)
                if rng.random() < 0.5:
                    snippet_ledger.append(
                        {
                            "id": snippet.id,
                            "ann_index": ann_index,
                            "start": true_span.start,
                            "end": true_span.end,
                            "text": scrub_preview[true_span.start : true_span.end],
                        }
                    )
                else:
                    drop_this = True

        damaged.append(Snippet(snippet.id, snippet.genre, text, tuple(reported)))
        if drop_this:
            dropped.add(snippet.id)
        else:
            expected[snippet.id] = tuple(true_spans)
            ledger_entries.extend(snippet_ledger)
    return DamageResult(damaged, expected, frozenset(dropped), ledger_entries)


def write_fixtures(out_dir: str | Path, seed: int = 13) -> None:
    """Write the bundled fixture set: labels, vocab, corpora, ledger, config."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    label_set = default_label_set()
    inventories = build_inventories(label_set, seed)

    atomic_write_text(out / "labels.txt", "\n".join(label_set.techniques) + "\n")
    atomic_write_text(out / "vocab.txt", "\n".join(vocab_lines(inventories)) + "\n")

    clean_train = generate_corpus(200, label_set, inventories, seed, id_prefix="train")
    damage = damage_corpus(clean_train, seed + 1)
    save_corpus(damage.snippets, out / "train_raw.jsonl", label_set)
    write_jsonl(out / "ledger.jsonl", damage.ledger_entries)

    test = generate_corpus(60, label_set, inventories, seed + 2, id_prefix="test")
    save_corpus(test, out / "test.jsonl", label_set)

    config = {
        "labels": "labels.txt",
        "vocab": "vocab.txt",
        "embedding": {"kind": "hash", "dim": 768},
        "seed": seed,
        "strategy": "first",
        "genre": True,
        "hyperparams": {"learning_rate": 0.5, "batch_size": 32, "epochs": 50},
    }
    atomic_write_text(out / "config.json", json.dumps(config, indent=2) + "\n")


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="write the synthetic fixture bundle")
    parser.add_argument("out_dir", help="directory to write fixtures into")
    parser.add_argument("--seed", type=int, default=13)
    args = parser.parse_args(argv)
    write_fixtures(args.out_dir, args.seed)
    print(f"fixtures written to {args.out_dir}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
