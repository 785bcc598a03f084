"""Command-line interface: exit codes, artifacts, overrides, determinism."""

from __future__ import annotations

import dataclasses
import json

import pytest

from spantag import kernels
from spantag.cli import main
from spantag.corpus import LabelSet, load_corpus, save_corpus
from spantag.synth import build_inventories, generate_corpus, vocab_lines
from spantag.tagger import load_model


@pytest.fixture(scope="module")
def tiny(tmp_path_factory):
    """Self-contained working directory: 4 classes, 24+12 snippets, dim 48."""
    root = tmp_path_factory.mktemp("tiny")
    ls = LabelSet([f"t{i}" for i in range(1, 4)])
    inv = build_inventories(ls, seed=21)
    (root / "labels.txt").write_text("\n".join(ls.techniques) + "\n")
    (root / "vocab.txt").write_text("\n".join(vocab_lines(inv)) + "\n")
    train = generate_corpus(24, ls, inv, seed=22, id_prefix="tr")
    save_corpus(train, root / "train.jsonl", ls)
    save_corpus(train[:12], root / "part1.jsonl", ls)
    save_corpus(train[12:], root / "part2.jsonl", ls)
    save_corpus(generate_corpus(12, ls, inv, seed=23, id_prefix="ev"),
                root / "eval.jsonl", ls)
    (root / "config.json").write_text(json.dumps({
        "labels": "labels.txt",
        "vocab": "vocab.txt",
        "embedding": {"kind": "hash", "dim": 48},
        "strategy": "first",
        "genre": True,
        "hyperparams": {"learning_rate": 1.0, "batch_size": 16, "epochs": 40},
    }))
    (root / "empty.jsonl").write_text("")
    return root


@pytest.fixture(scope="module")
def tiny_model(tiny, tmp_path_factory):
    """One trained model shared by the predict/score tests."""
    out = tmp_path_factory.mktemp("model")
    model = out / "model.bin"
    code = main(["train", str(tiny / "train.jsonl"),
                 "--config", str(tiny / "config.json"), "-o", str(model)])
    assert code == 0
    return model


def base(tiny, *extra):
    return ["--labels", str(tiny / "labels.txt"), "--vocab", str(tiny / "vocab.txt"),
            *extra]


class TestUsageErrors:
    @pytest.mark.parametrize(
        "argv",
        [
            [],
            ["not-a-command"],
            ["train"],  # missing inputs and -o
            ["repair", "in.jsonl"],  # missing -o
            ["stats", "x.jsonl", "--wat"],
            ["train", "x.jsonl", "-o", "m.bin", "--strategy", "sideways"],
        ],
    )
    def test_bad_invocations_exit_1(self, argv, capsys):
        assert main(argv) == 1
        assert "error" in capsys.readouterr().err.lower()

    def test_missing_label_file_exits_1(self, tiny, tmp_path, capsys):
        code = main(["train", str(tiny / "train.jsonl"), "-o", str(tmp_path / "m.bin"),
                     "--labels", str(tiny / "nope.txt"),
                     "--vocab", str(tiny / "vocab.txt")])
        assert code == 1
        assert "not found" in capsys.readouterr().err

    def test_labels_required_somewhere(self, tiny, tmp_path, capsys):
        code = main(["train", str(tiny / "train.jsonl"), "-o", str(tmp_path / "m.bin"),
                     "--vocab", str(tiny / "vocab.txt")])
        assert code == 1
        assert "label file is required" in capsys.readouterr().err

    def test_bad_hyperparameter_exits_1(self, tiny, tmp_path, capsys):
        code = main(["train", str(tiny / "train.jsonl"), "-o", str(tmp_path / "m.bin"),
                     *base(tiny), "--epochs", "0"])
        assert code == 1
        assert "epochs" in capsys.readouterr().err

    def test_dim_with_file_embeddings_exits_1(self, tiny, tmp_path, capsys):
        code = main(["train", str(tiny / "train.jsonl"), "-o", str(tmp_path / "m.bin"),
                     *base(tiny), "--embedding", "vecs.bin", "--dim", "8"])
        assert code == 1
        assert "--dim" in capsys.readouterr().err

    @pytest.mark.parametrize(
        "config",
        [
            '{"surprise": 1}',
            '{"hyperparams": {"seed": 1}}',
            '{"embedding": {"kind": "magic"}}',
            '{"embedding": {"kind": "file"}}',
            '[1, 2]',
            '{oops',
        ],
    )
    def test_bad_config_file_exits_1(self, tiny, tmp_path, config, capsys):
        cfg = tmp_path / "bad.json"
        cfg.write_text(config)
        code = main(["stats", str(tiny / "train.jsonl"), "--config", str(cfg),
                     "--labels", str(tiny / "labels.txt")])
        assert code == 1
        assert "error" in capsys.readouterr().err


class TestDataErrors:
    def test_missing_corpus_exits_2(self, tiny, tmp_path, capsys):
        code = main(["repair", str(tiny / "ghost.jsonl"),
                     "-o", str(tmp_path / "out.jsonl"), *base(tiny)])
        assert code == 2
        capsys.readouterr()

    def test_malformed_corpus_exits_2(self, tiny, tmp_path, capsys):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"id": "a"}\n')
        code = main(["stats", str(bad), "--labels", str(tiny / "labels.txt")])
        assert code == 2
        assert "line 1" in capsys.readouterr().err

    def test_duplicate_ids_across_inputs_exit_2(self, tiny, tmp_path, capsys):
        code = main(["train", str(tiny / "train.jsonl"), str(tiny / "part1.jsonl"),
                     "-o", str(tmp_path / "m.bin"), *base(tiny), "--epochs", "1"])
        assert code == 2
        assert "duplicate" in capsys.readouterr().err

    def test_prediction_for_unknown_id_exits_2(self, tiny, tmp_path, capsys):
        pred = tmp_path / "pred.jsonl"
        pred.write_text('{"id": "nobody", "labels": []}\n')
        code = main(["score", str(tiny / "train.jsonl"), str(pred),
                     "--labels", str(tiny / "labels.txt")])
        assert code == 2
        assert "nobody" in capsys.readouterr().err

    def test_corrupt_model_exits_1(self, tiny, tmp_path, capsys):
        bad = tmp_path / "model.bin"
        bad.write_bytes(b"not a model at all")
        code = main(["predict", str(tiny / "train.jsonl"), "-m", str(bad),
                     "-o", str(tmp_path / "p.jsonl"), *base(tiny)])
        assert code == 1
        assert "magic" in capsys.readouterr().err


class TestRepairCommand:
    def test_repairs_and_reports(self, tiny, tmp_path, capsys):
        # sabotage one snippet: shift a start without touching the surface
        snippets = load_corpus(tiny / "train.jsonl", LabelSet(["t1", "t2", "t3"]))
        damaged = []
        for s in snippets:
            spans = tuple(
                dataclasses.replace(sp, start=sp.start + 3, end=sp.end + 9)
                for sp in s.gold_spans
            )
            damaged.append(dataclasses.replace(s, gold_spans=spans))
        raw = tmp_path / "raw.jsonl"
        save_corpus(damaged, raw, LabelSet(["t1", "t2", "t3"]))

        out = tmp_path / "fixed.jsonl"
        report = tmp_path / "report.jsonl"
        code = main(["repair", str(raw), "-o", str(out), "--report", str(report),
                     *base(tiny)])
        assert code == 0
        stdout = capsys.readouterr().out
        assert "realigned=" in stdout
        fixed = load_corpus(out, LabelSet(["t1", "t2", "t3"]))
        assert len(fixed) == len(snippets)
        for snippet in fixed:
            for span in snippet.gold_spans:
                assert snippet.text[span.start : span.end] == span.surface
        records = [json.loads(line) for line in report.read_text().splitlines()]
        assert "_config" in records[0]
        actions = records[1:]
        assert actions and all(a["action"] == "realigned" for a in actions)

    def test_clean_corpus_is_a_no_op(self, tiny, tmp_path, capsys):
        out = tmp_path / "same.jsonl"
        code = main(["repair", str(tiny / "train.jsonl"), "-o", str(out), *base(tiny),
                     "--strict"])
        assert code == 0
        assert "nothing to do" in capsys.readouterr().out
        assert load_corpus(out, LabelSet(["t1", "t2", "t3"])) == load_corpus(
            tiny / "train.jsonl", LabelSet(["t1", "t2", "t3"])
        )

    def test_strict_exits_2_on_drops(self, tiny, tmp_path, capsys):
        raw = tmp_path / "raw.jsonl"
        raw.write_text(json.dumps({
            "id": "bad", "text": "some words here", "type": "tweet",
            "labels": [{"technique": "t1", "start": 0, "end": 4, "text": "GONE"}],
        }) + "\n")
        out = tmp_path / "out.jsonl"
        assert main(["repair", str(raw), "-o", str(out), *base(tiny)]) == 0
        assert main(["repair", str(raw), "-o", str(out), *base(tiny), "--strict"]) == 2
        assert "unrepairable" in capsys.readouterr().err

    def test_json_output(self, tiny, tmp_path, capsys):
        out = tmp_path / "out.jsonl"
        code = main(["repair", str(tiny / "train.jsonl"), "-o", str(out),
                     *base(tiny), "--json"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["snippets_in"] == payload["snippets_out"] == 24
        assert payload["dropped_ids"] == []


class TestTrainCommand:
    def test_artifacts_and_log(self, tiny, tmp_path, capsys):
        model = tmp_path / "m.bin"
        log = tmp_path / "train.json"
        code = main(["train", str(tiny / "train.jsonl"), "-o", str(model),
                     "--log", str(log), "--config", str(tiny / "config.json"),
                     "--epochs", "5", "--json"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        # width = 2*48 + 2 genre cells; 4 labels
        assert payload["parameters"] == (96 + 2) * 4
        entry = json.loads(log.read_text())
        assert len(entry["epoch_loss"]) == 5  # the flag overrode the config file
        assert entry["final_loss"] == entry["epoch_loss"][-1]
        assert entry["_config"]["embedding"]["dim"] == 48
        tagger, stored = load_model(model)
        assert stored["strategy"] == "first"
        assert tagger.use_genre is True

    def test_model_config_carries_no_paths(self, tiny, tiny_model):
        _, stored = load_model(tiny_model)
        assert set(stored) == {
            "seed", "strategy", "genre", "combine", "embedding", "hyperparams"
        }
        assert set(stored["embedding"]) == {"kind", "dim", "hash_seed"}
        flat = json.dumps(stored)
        assert str(tiny) not in flat
        assert "labels.txt" not in flat

    def test_multiple_inputs_concatenate(self, tiny, tmp_path):
        split = tmp_path / "split.bin"
        joined = tmp_path / "joined.bin"
        args = ["--config", str(tiny / "config.json"), "--epochs", "3"]
        assert main(["train", str(tiny / "part1.jsonl"), str(tiny / "part2.jsonl"),
                     "-o", str(split), *args]) == 0
        assert main(["train", str(tiny / "train.jsonl"),
                     "-o", str(joined), *args]) == 0
        assert split.read_bytes() == joined.read_bytes()

    def test_default_log_path_derived_from_model(self, tiny, tmp_path):
        model = tmp_path / "m.bin"
        assert main(["train", str(tiny / "train.jsonl"), "-o", str(model),
                     "--config", str(tiny / "config.json"), "--epochs", "2"]) == 0
        assert (tmp_path / "m.bin.train.json").is_file()


class TestPredictCommand:
    def test_gold_scored_against_itself_is_perfect(self, tiny, capsys):
        code = main(["score", str(tiny / "train.jsonl"), str(tiny / "train.jsonl"),
                     "--labels", str(tiny / "labels.txt"), "--json"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["micro_f1"] == 1.0

    def test_predict_then_score_fits_the_training_set(self, tiny, tiny_model,
                                                      tmp_path, capsys):
        pred = tmp_path / "pred.jsonl"
        code = main(["predict", str(tiny / "train.jsonl"), "-m", str(tiny_model),
                     "-o", str(pred), "--vocab", str(tiny / "vocab.txt")])
        assert code == 0
        capsys.readouterr()
        code = main(["score", str(tiny / "train.jsonl"), str(pred),
                     "--labels", str(tiny / "labels.txt"), "--json"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["micro_f1"] > 0.9

    def test_strategy_defaults_to_the_models(self, tiny, tiny_model, tmp_path):
        pred = tmp_path / "pred.jsonl"
        assert main(["predict", str(tiny / "eval.jsonl"), "-m", str(tiny_model),
                     "-o", str(pred), "--vocab", str(tiny / "vocab.txt")]) == 0
        header = json.loads(pred.read_text().splitlines()[0])["_config"]
        assert header["strategy"] == "first"  # stored at train time

    def test_explicit_strategy_overrides_the_model(self, tiny, tiny_model, tmp_path):
        pred = tmp_path / "pred.jsonl"
        assert main(["predict", str(tiny / "eval.jsonl"), "-m", str(tiny_model),
                     "-o", str(pred), "--vocab", str(tiny / "vocab.txt"),
                     "--strategy", "token"]) == 0
        header = json.loads(pred.read_text().splitlines()[0])["_config"]
        assert header["strategy"] == "token"

    def test_explicit_genre_mismatch_exits_1(self, tiny, tiny_model, tmp_path, capsys):
        code = main(["predict", str(tiny / "eval.jsonl"), "-m", str(tiny_model),
                     "-o", str(tmp_path / "p.jsonl"), "--vocab", str(tiny / "vocab.txt"),
                     "--no-genre"])
        assert code == 1
        assert "genre" in capsys.readouterr().err

    def test_word_model_rejects_token_strategy(self, tiny, tmp_path, capsys):
        model = tmp_path / "word.bin"
        assert main(["train", str(tiny / "train.jsonl"), "-o", str(model),
                     "--config", str(tiny / "config.json"), "--strategy", "word",
                     "--epochs", "2"]) == 0
        code = main(["predict", str(tiny / "eval.jsonl"), "-m", str(model),
                     "-o", str(tmp_path / "p.jsonl"), "--vocab", str(tiny / "vocab.txt"),
                     "--strategy", "token"])
        assert code == 1
        assert "level" in capsys.readouterr().err

    def test_empty_corpus_is_fine(self, tiny, tiny_model, tmp_path, capsys):
        pred = tmp_path / "pred.jsonl"
        code = main(["predict", str(tiny / "empty.jsonl"), "-m", str(tiny_model),
                     "-o", str(pred), "--vocab", str(tiny / "vocab.txt")])
        assert code == 0
        assert "0 spans over 0 snippets" in capsys.readouterr().out
        lines = pred.read_text().splitlines()
        assert len(lines) == 1 and "_config" in lines[0]

    def test_labels_flag_must_match_model(self, tiny, tiny_model, tmp_path, capsys):
        other = tmp_path / "labels.txt"
        other.write_text("completely\ndifferent\n")
        code = main(["predict", str(tiny / "eval.jsonl"), "-m", str(tiny_model),
                     "-o", str(tmp_path / "p.jsonl"), "--vocab", str(tiny / "vocab.txt"),
                     "--labels", str(other)])
        assert code == 1
        assert "labels do not match" in capsys.readouterr().err


class TestScoreCommand:
    def test_report_file_and_cap_flag(self, tiny, tiny_model, tmp_path, capsys):
        pred = tmp_path / "pred.jsonl"
        main(["predict", str(tiny / "eval.jsonl"), "-m", str(tiny_model),
              "-o", str(pred), "--vocab", str(tiny / "vocab.txt")])
        capsys.readouterr()
        out = tmp_path / "score.json"
        code = main(["score", str(tiny / "eval.jsonl"), str(pred),
                     "--labels", str(tiny / "labels.txt"), "--cap-per-span",
                     "--output", str(out)])
        assert code == 0
        assert "micro F1" in capsys.readouterr().out
        payload = json.loads(out.read_text())
        assert payload["_config"] == {"cap_per_span": True}
        assert 0.0 <= payload["micro_f1"] <= 1.0
        assert payload["spans"]["gold"] > 0


class TestTuneCommand:
    def test_small_grid_reports_every_cell(self, tiny, tmp_path, capsys):
        grid = tmp_path / "grid.json"
        grid.write_text(json.dumps({
            "learning_rate": [1.0], "batch_size": [16], "epochs": [10, 40],
        }))
        out = tmp_path / "tune.json"
        code = main(["tune", str(tiny / "train.jsonl"),
                     "--config", str(tiny / "config.json"),
                     "--grid", str(grid), "--folds", "2", "--output", str(out)])
        assert code == 0
        lines = [line for line in capsys.readouterr().out.splitlines() if line]
        assert len(lines) == 3  # one per cell plus the best line
        assert lines[-1].startswith("best:")
        payload = json.loads(out.read_text())
        assert [c["epochs"] for c in payload["cells"]] == [10, 40]
        assert payload["best"]["mean_f1"] == max(c["mean_f1"] for c in payload["cells"])
        assert payload["folds"] == 2

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_diverging_cell_is_tolerated(self, tiny, tmp_path, capsys):
        grid = tmp_path / "grid.json"
        grid.write_text(json.dumps({
            "learning_rate": [1e308, 1.0], "batch_size": [16], "epochs": [40],
        }))
        out = tmp_path / "tune.json"
        code = main(["tune", str(tiny / "train.jsonl"),
                     "--config", str(tiny / "config.json"),
                     "--grid", str(grid), "--folds", "2", "--output", str(out)])
        assert code == 0
        assert "diverged" in capsys.readouterr().out
        payload = json.loads(out.read_text())
        assert payload["cells"][0]["diverged"] is True
        assert payload["cells"][0]["mean_f1"] is None
        assert payload["best"]["learning_rate"] == 1.0
        assert payload["best"]["mean_f1"] > 0.5

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_every_cell_diverging_exits_3(self, tiny, tmp_path, capsys):
        grid = tmp_path / "grid.json"
        grid.write_text(json.dumps({
            "learning_rate": [1e308], "batch_size": [16], "epochs": [3],
        }))
        code = main(["tune", str(tiny / "train.jsonl"),
                     "--config", str(tiny / "config.json"),
                     "--grid", str(grid), "--folds", "2"])
        assert code == 3
        assert "widen the grid" in capsys.readouterr().err

    def test_tune_is_deterministic(self, tiny, tmp_path, capsys):
        grid = tmp_path / "grid.json"
        grid.write_text(json.dumps({
            "learning_rate": [1.0], "batch_size": [16], "epochs": [10],
        }))
        outs = []
        for name in ("a.json", "b.json"):
            out = tmp_path / name
            assert main(["tune", str(tiny / "train.jsonl"),
                         "--config", str(tiny / "config.json"),
                         "--grid", str(grid), "--folds", "2",
                         "--output", str(out)]) == 0
            outs.append(out.read_bytes())
        capsys.readouterr()
        assert outs[0] == outs[1]

    def test_bad_folds_exit_1(self, tiny, capsys):
        code = main(["tune", str(tiny / "train.jsonl"),
                     "--config", str(tiny / "config.json"), "--folds", "1"])
        assert code == 1
        capsys.readouterr()

    def test_bad_grid_file_exits_1(self, tiny, tmp_path, capsys):
        grid = tmp_path / "grid.json"
        grid.write_text('{"learning_rate": []}')
        code = main(["tune", str(tiny / "train.jsonl"),
                     "--config", str(tiny / "config.json"), "--grid", str(grid)])
        assert code == 1
        capsys.readouterr()


class TestAblateCommand:
    def test_explicit_strategy_runs_two_cells(self, tiny, tmp_path, capsys):
        cfg = tmp_path / "config.json"
        cfg.write_text(json.dumps({
            "labels": str(tiny / "labels.txt"),
            "vocab": str(tiny / "vocab.txt"),
            "embedding": {"kind": "hash", "dim": 48},
            "hyperparams": {"learning_rate": 1.0, "batch_size": 16, "epochs": 25},
        }))
        out = tmp_path / "ablate.json"
        code = main(["ablate", str(tiny / "train.jsonl"), "--config", str(cfg),
                     "--eval", str(tiny / "eval.jsonl"),
                     "--strategy", "first", "--output", str(out)])
        assert code == 0
        table = capsys.readouterr().out
        assert "With genre" in table and "Without genre" in table
        assert "Token-to-Word First" in table
        assert "Token-to-Token" not in table
        payload = json.loads(out.read_text())
        assert len(payload["cells"]) == 2
        assert {c["genre"] for c in payload["cells"]} == {True, False}
        assert set(payload["convergence"]) == {"first/genre", "first/no-genre"}
        assert all(len(v) == 25 for v in payload["convergence"].values())
        assert payload["table"] == table.strip("\n")


class TestStatsCommand:
    def test_counts_match_the_corpus(self, tiny, capsys):
        code = main(["stats", str(tiny / "train.jsonl"), str(tiny / "eval.jsonl"),
                     "--labels", str(tiny / "labels.txt"), "--json"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert len(payload["files"]) == 2
        first = payload["files"][0]
        corpus = load_corpus(tiny / "train.jsonl", LabelSet(["t1", "t2", "t3"]))
        assert first["snippets"] == len(corpus) == first["tweets"] + first["paragraphs"]
        assert first["spans"] == sum(len(s.gold_spans) for s in corpus)

    def test_human_output_lists_files(self, tiny, capsys):
        code = main(["stats", str(tiny / "train.jsonl"),
                     "--labels", str(tiny / "labels.txt")])
        assert code == 0
        out = capsys.readouterr().out
        assert "tweets" in out and "train.jsonl" in out


class TestGoldenPipeline:
    """The bundled fixture chain reproduces the checked-in artifacts."""

    @pytest.mark.skipif(
        kernels.BACKEND != "compiled",
        reason="goldens were produced with the compiled kernels; the numpy "
        "backend matches only to rounding, which drifts over 50 epochs",
    )
    def test_full_chain_matches_goldens(self, synth_dir, golden_dir, tmp_path, capsys):
        cfg = str(synth_dir / "config.json")
        repaired = tmp_path / "train_repaired.jsonl"
        report = tmp_path / "repair_report.jsonl"
        model = tmp_path / "model.bin"
        log = tmp_path / "train_log.json"
        pred = tmp_path / "predictions.jsonl"
        score = tmp_path / "score.json"

        assert main(["repair", str(synth_dir / "train_raw.jsonl"), "-o", str(repaired),
                     "--report", str(report), "--ledger", str(synth_dir / "ledger.jsonl"),
                     "--config", cfg]) == 0
        assert main(["train", str(repaired), "-o", str(model), "--log", str(log),
                     "--config", cfg]) == 0
        assert main(["predict", str(synth_dir / "test.jsonl"), "-m", str(model),
                     "-o", str(pred), "--config", cfg]) == 0
        assert main(["score", str(synth_dir / "test.jsonl"), str(pred),
                     "--config", cfg, "--output", str(score)]) == 0
        capsys.readouterr()

        for fresh, golden in [
            (repaired, golden_dir / "train_repaired.jsonl"),
            (report, golden_dir / "repair_report.jsonl"),
            (model, golden_dir / "model.bin"),
            (pred, golden_dir / "predictions.jsonl"),
            (score, golden_dir / "score.json"),
        ]:
            assert fresh.read_bytes() == golden.read_bytes(), fresh.name

        # the log matches too, once the wall clock is set aside
        fresh_log = json.loads(log.read_text())
        golden_log = json.loads((golden_dir / "train_log.json").read_text())
        fresh_log.pop("wall_time_s")
        golden_log.pop("wall_time_s")
        assert fresh_log == golden_log

    def test_bundled_scores_are_strong(self, golden_dir):
        payload = json.loads((golden_dir / "score.json").read_text())
        assert payload["micro_f1"] > 0.9
