"""Corpus data model and JSONL round trips."""

from __future__ import annotations

import json

import pytest

from spantag.corpus import (
    CorpusError,
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


class TestLabelSet:
    def test_o_is_always_index_zero(self):
        ls = LabelSet(["a", "b"])
        assert ls.names[0] == "O"
        assert ls.index("O") == 0
        assert ls.index("a") == 1
        assert len(ls) == 3

    def test_twenty_three_techniques_give_24_labels(self, label_set):
        assert len(label_set) == 24
        assert len(label_set.techniques) == 23

    def test_duplicate_and_empty_names_rejected(self):
        with pytest.raises(CorpusError):
            LabelSet(["a", "a"])
        with pytest.raises(CorpusError):
            LabelSet(["a", ""])
        with pytest.raises(CorpusError):
            LabelSet(["O"])  # collides with the reserved outside label

    def test_unknown_name_is_an_error_naming_it(self):
        ls = LabelSet(["a"])
        with pytest.raises(CorpusError, match="nope"):
            ls.index("nope")

    def test_load_skips_blank_lines(self, tmp_path):
        path = tmp_path / "labels.txt"
        path.write_text("alpha\n\nbeta\n  \ngamma\n", encoding="utf-8")
        ls = LabelSet.load(path)
        assert ls.techniques == ("alpha", "beta", "gamma")

    def test_name_round_trip(self):
        ls = LabelSet(["x", "y"])
        for i, name in enumerate(ls.names):
            assert ls.index(name) == i
            assert ls.name(i) == name


class TestCorpusIO:
    def _corpus(self):
        ls = LabelSet(["t1", "t2"])
        snippets = [
            Snippet(
                "s1",
                Genre.TWEET,
                "hello cruel world",
                (TechniqueSpan(1, 6, 11, "cruel"),),
            ),
            Snippet("s2", Genre.PARAGRAPH, "nothing here", ()),
        ]
        return ls, snippets

    def test_save_load_round_trip(self, tmp_path):
        ls, snippets = self._corpus()
        path = tmp_path / "c.jsonl"
        save_corpus(snippets, path, ls)
        assert load_corpus(path, ls) == snippets

    def test_header_line_is_skipped_on_load(self, tmp_path):
        ls, snippets = self._corpus()
        path = tmp_path / "c.jsonl"
        save_corpus(snippets, path, ls, header={"seed": 1})
        first = path.read_text(encoding="utf-8").splitlines()[0]
        assert json.loads(first) == {"_config": {"seed": 1}}
        assert load_corpus(path, ls) == snippets

    def test_offsets_are_code_points_not_bytes(self, tmp_path):
        ls = LabelSet(["t1"])
        text = "\U0001f31f ab"
        snippet = Snippet("s", Genre.TWEET, text, (TechniqueSpan(1, 2, 4, "ab"),))
        path = tmp_path / "c.jsonl"
        save_corpus([snippet], path, ls)
        (loaded,) = load_corpus(path, ls)
        span = loaded.gold_spans[0]
        assert loaded.text[span.start : span.end] == span.surface == "ab"

    def test_duplicate_id_rejected_with_line_number(self, tmp_path):
        ls, snippets = self._corpus()
        path = tmp_path / "c.jsonl"
        save_corpus([snippets[0], snippets[0]], path, ls)
        with pytest.raises(CorpusError, match="line 2"):
            load_corpus(path, ls)

    def test_bad_json_names_the_line(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text('{"id": "a", "text": "x", "type": "tweet", "labels": []}\n{oops\n')
        with pytest.raises(CorpusError, match="line 2"):
            load_corpus(path, LabelSet(["t1"]))

    def test_unknown_genre_rejected(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text('{"id": "a", "text": "x", "type": "poem", "labels": []}\n')
        with pytest.raises(CorpusError, match="poem"):
            load_corpus(path, LabelSet(["t1"]))

    def test_reserved_o_label_rejected(self, tmp_path):
        path = tmp_path / "c.jsonl"
        record = {
            "id": "a",
            "text": "xy",
            "type": "tweet",
            "labels": [{"technique": "O", "start": 0, "end": 2, "text": "xy"}],
        }
        path.write_text(json.dumps(record) + "\n")
        with pytest.raises(CorpusError, match="reserved"):
            load_corpus(path, LabelSet(["t1"]))

    def test_missing_field_rejected(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text('{"id": "a", "type": "tweet", "labels": []}\n')
        with pytest.raises(CorpusError):
            load_corpus(path, LabelSet(["t1"]))

    def test_offsets_kept_verbatim_even_when_wrong(self, tmp_path):
        """Damaged offsets must survive loading so repair can see them."""
        path = tmp_path / "c.jsonl"
        record = {
            "id": "a",
            "text": "short",
            "type": "tweet",
            "labels": [{"technique": "t1", "start": 90, "end": 80, "text": "zz"}],
        }
        path.write_text(json.dumps(record) + "\n")
        (snippet,) = load_corpus(path, LabelSet(["t1"]))
        assert snippet.gold_spans[0].start == 90
        assert snippet.gold_spans[0].end == 80


class TestPredictions:
    def test_round_trip_and_sorting(self, tmp_path):
        ls = LabelSet(["t1", "t2"])
        snippets = [Snippet("s1", Genre.TWEET, "aa bb cc", ())]
        spans = [TechniqueSpan(2, 6, 8, "cc"), TechniqueSpan(1, 0, 2, "aa")]
        path = tmp_path / "p.jsonl"
        save_predictions(snippets, [spans], path, ls)
        loaded = load_predictions(path, ls)
        assert loaded["s1"] == (TechniqueSpan(1, 0, 2, "aa"), TechniqueSpan(2, 6, 8, "cc"))

    def test_parallel_length_mismatch_rejected(self, tmp_path):
        ls = LabelSet(["t1"])
        snippets = [Snippet("s1", Genre.TWEET, "aa", ())]
        with pytest.raises(ValueError, match="1 snippet"):
            save_predictions(snippets, [], tmp_path / "p.jsonl", ls)


class TestStats:
    def test_counts(self, label_set, small_corpus):
        stats = corpus_stats(small_corpus)
        assert stats.total == len(small_corpus) == stats.tweets + stats.paragraphs
        assert stats.spans == sum(len(s.gold_spans) for s in small_corpus)

    def test_gold_by_id_keys(self, small_corpus):
        gold = gold_by_id(small_corpus)
        assert set(gold) == {s.id for s in small_corpus}
