"""Synthetic corpus generator and its damage injector."""

from __future__ import annotations

import unicodedata

import numpy as np
import pytest

from spantag.corpus import Genre
from spantag.segment import UnitLevel, align, project_gold, segment_words
from spantag.synth import (
    MENTION,
    build_inventories,
    damage_corpus,
    default_label_set,
    generate_corpus,
    vocab_lines,
)


class TestInventories:
    def test_default_label_set_shape(self):
        ls = default_label_set()
        assert len(ls) == 24
        assert ls.names[0] == "O"
        assert ls.names[1] == "tech01"
        assert ls.names[23] == "tech23"

    def test_classes_own_disjoint_material(self, label_set, inventories):
        assert len(inventories) == len(label_set)
        all_stems = [s for inv in inventories for s in inv.stems]
        all_fillers = [f for inv in inventories for f in inv.fillers]
        assert len(all_stems) == len(set(all_stems))
        assert len(all_fillers) == len(set(all_fillers))
        assert all(len(s) == 4 and s.isalpha() for s in all_stems)
        assert all(len(f) == 2 and f.isalpha() for f in all_fillers)

    def test_stem_and_filler_alphabets_do_not_mix(self, inventories):
        stem_chars = {c for inv in inventories for s in inv.stems for c in s}
        filler_chars = {c for inv in inventories for f in inv.fillers for c in f}
        assert stem_chars <= set("abcdefghijklm")
        assert filler_chars <= set("nopqrstuvwxyz")

    def test_deterministic_by_seed(self, label_set):
        a = build_inventories(label_set, seed=5)
        b = build_inventories(label_set, seed=5)
        c = build_inventories(label_set, seed=6)
        assert a == b
        assert a != c

    def test_vocab_covers_every_piece(self, inventories):
        lines = vocab_lines(inventories)
        assert MENTION in lines
        assert len(lines) == len(set(lines))
        for inv in inventories:
            for stem in inv.stems:
                assert stem in lines
            for filler in inv.fillers:
                assert "##" + filler in lines


class TestGenerateCorpus:
    def test_gold_spans_are_consistent_text_slices(self, label_set, inventories):
        snippets = generate_corpus(50, label_set, inventories, seed=90)
        assert len(snippets) == 50
        assert len({s.id for s in snippets}) == 50
        for snippet in snippets:
            assert snippet.gold_spans, "every snippet carries at least one span"
            for span in snippet.gold_spans:
                assert snippet.text[span.start : span.end] == span.surface
                assert span.technique != 0

    def test_spans_are_word_aligned_and_non_adjacent(self, label_set, inventories):
        for snippet in generate_corpus(50, label_set, inventories, seed=91):
            words = segment_words(snippet.text)
            starts = {w.start for w in words}
            ends = {w.end for w in words}
            spans = sorted(snippet.gold_spans, key=lambda s: s.start)
            for span in spans:
                assert span.start in starts
                assert span.end in ends
            for a, b in zip(spans, spans[1:]):
                # at least one unlabeled word sits between consecutive spans
                between = [w for w in words if a.end < w.start and w.end < b.start]
                assert between

    def test_token_text_determines_label(self, label_set, inventories, tokenizer):
        """The core separability property the tagger relies on."""
        token_owner: dict[str, int] = {}
        for snippet in generate_corpus(80, label_set, inventories, seed=92):
            alignment = align(snippet.text, tokenizer)
            labels = project_gold(alignment, snippet.gold_spans, UnitLevel.TOKEN)
            for token, label in zip(alignment.tokens, labels):
                if token.text == MENTION:
                    continue  # mentions sit outside spans by default
                seen = token_owner.setdefault(token.text, label)
                assert seen == label, f"token {token.text!r} got labels {seen} and {label}"

    def test_generation_is_deterministic(self, label_set, inventories):
        a = generate_corpus(10, label_set, inventories, seed=93)
        b = generate_corpus(10, label_set, inventories, seed=93)
        assert a == b

    def test_genre_mix_and_word_counts(self, label_set, inventories):
        snippets = generate_corpus(200, label_set, inventories, seed=94)
        tweets = [s for s in snippets if s.genre is Genre.TWEET]
        paragraphs = [s for s in snippets if s.genre is Genre.PARAGRAPH]
        assert len(tweets) > 50 and len(paragraphs) > 50
        for s in tweets:
            assert 6 <= len(segment_words(s.text)) <= 14
        for s in paragraphs:
            assert 10 <= len(segment_words(s.text)) <= 22

    def test_mentions_stay_outside_spans_by_default(self, label_set, inventories):
        for snippet in generate_corpus(120, label_set, inventories, seed=95):
            for span in snippet.gold_spans:
                assert MENTION not in span.surface

    def test_mentions_in_spans_flag(self, label_set, inventories):
        snippets = generate_corpus(
            300, label_set, inventories, seed=96, mentions_in_spans=True
        )
        inside = sum(
            MENTION in span.surface for s in snippets for span in s.gold_spans
        )
        assert inside > 0


@pytest.fixture(scope="module")
def damage(label_set, inventories):
    clean = generate_corpus(
        120, label_set, inventories, seed=97, mentions_in_spans=True
    )
    return clean, damage_corpus(clean, seed=98)


class TestDamageCorpus:

    def test_partition_into_expected_and_dropped(self, damage):
        clean, result = damage
        ids = {s.id for s in clean}
        assert set(result.expected) | set(result.dropped_ids) == ids
        assert set(result.expected).isdisjoint(result.dropped_ids)
        assert len(result.snippets) == len(clean)

    def test_expected_spans_match_damaged_text_after_scrub(self, damage):
        """The recorded truth must agree with the damaged text, modulo
        invisible characters becoming spaces."""
        _, result = damage
        for snippet in result.snippets:
            truth = result.expected.get(snippet.id)
            if truth is None:
                continue
            scrubbed = "".join(
                " " if unicodedata.category(ch) in ("Cf", "Co") else ch
                for ch in snippet.text
            )
            for span in truth:
                assert scrubbed[span.start : span.end] == span.surface

    def test_damage_actually_happened(self, damage):
        clean, result = damage
        by_id = {s.id: s for s in clean}
        changed_text = sum(
            1 for s in result.snippets if s.text != by_id[s.id].text
        )
        changed_spans = sum(
            1 for s in result.snippets if s.gold_spans != by_id[s.id].gold_spans
        )
        assert changed_text > 10
        assert changed_spans > 40

    def test_ledger_entries_point_at_expected_snippets(self, damage):
        _, result = damage
        for entry in result.ledger_entries:
            assert entry["id"] in result.expected
            assert {"id", "ann_index", "start", "end", "text"} <= set(entry)

    def test_damage_is_deterministic(self, label_set, inventories):
        clean = generate_corpus(40, label_set, inventories, seed=99)
        a = damage_corpus(clean, seed=100)
        b = damage_corpus(clean, seed=100)
        assert a.snippets == b.snippets
        assert a.expected == b.expected
        assert a.dropped_ids == b.dropped_ids
        assert a.ledger_entries == b.ledger_entries


class TestFixtureBundle:
    def test_bundle_files_exist(self, synth_dir):
        for name in (
            "labels.txt",
            "vocab.txt",
            "train_raw.jsonl",
            "ledger.jsonl",
            "test.jsonl",
            "config.json",
        ):
            assert (synth_dir / name).is_file(), name

    def test_write_fixtures_reproduces_the_bundle(self, tmp_path, synth_dir):
        from spantag.synth import write_fixtures

        write_fixtures(tmp_path, seed=13)
        for name in ("labels.txt", "vocab.txt", "train_raw.jsonl", "ledger.jsonl",
                     "test.jsonl", "config.json"):
            assert (tmp_path / name).read_bytes() == (synth_dir / name).read_bytes(), name
