"""Command-line surface: repair, train, predict, score, tune, ablate, stats.

Configuration comes from a JSON file (``--config``) with flag overrides;
flags win. One global seed drives everything downstream: training
derives its init and shuffle streams from it, fold assignment derives a
fold stream, and hash embeddings derive their own sub-seed, so a single
``--seed`` reruns any command bit-identically.

Output artifacts embed the semantic parts of the effective
configuration (seed, strategy, genre, embedding settings,
hyperparameters). File paths are deliberately left out of the echo so
that reruns in different directories still produce byte-identical
artifacts.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 internal error.
"""

from __future__ import annotations

import argparse
import copy
import json
import sys
import time
import traceback
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

from .corpus import (
    CorpusError,
    LabelSet,
    Snippet,
    corpus_stats,
    gold_by_id,
    load_corpus,
    load_predictions,
    save_corpus,
    save_predictions,
)
from .embed import (
    CombineMode,
    EmbeddingError,
    EmbeddingProvider,
    HashEmbeddingProvider,
    load_embeddings,
)
from .ioutil import atomic_write_text
from .pipeline import cross_validate, evaluate, predict_corpus, train_strategy
from .repair import OverrideLedger, repair_corpus
from .score import ScoreError, ablation_table, micro_f1
from .seeding import derive_seed
from .segment import SegmentError, VocabTokenizer
from .tagger import (
    Hyperparams,
    Strategy,
    TaggerError,
    TrainingDiverged,
    load_model,
    save_model,
)

DEFAULT_SEED = 13
DEFAULT_DIM = 768
DEFAULT_GRID = {
    "learning_rate": [1e-3, 1e-2, 1e-1],
    "batch_size": [16, 32],
    "epochs": [3, 10, 30],
}

_CONFIG_KEYS = {
    "labels",
    "vocab",
    "embedding",
    "seed",
    "strategy",
    "genre",
    "combine",
    "hyperparams",
    "class_weights",
    "cap_per_span",
}
_HP_KEYS = {"learning_rate", "batch_size", "epochs"}


class ConfigError(ValueError):
    """Bad flags, bad config file, or an incoherent combination."""


class _Parser(argparse.ArgumentParser):
    """argparse that signals usage problems instead of exiting with 2."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        raise ConfigError(message)


@dataclass
class RunConfig:
    """Effective settings after merging defaults, config file, and flags."""

    labels: str | None
    vocab: str | None
    embedding: dict[str, Any]
    seed: int
    strategy: str
    genre: bool
    combine: str
    hyperparams: Hyperparams
    class_weights: list[float] | None
    cap_per_span: bool
    explicit: frozenset[str]

    def echo(self) -> dict[str, Any]:
        """Semantic configuration recorded in artifact headers (no paths)."""
        embedding = {"kind": self.embedding["kind"], "dim": self.embedding["dim"]}
        if self.embedding["kind"] == "hash":
            embedding["hash_seed"] = derive_seed(self.seed, "hash")
        return {
            "seed": self.seed,
            "strategy": self.strategy,
            "genre": self.genre,
            "combine": self.combine,
            "embedding": embedding,
            "hyperparams": {
                "learning_rate": self.hyperparams.learning_rate,
                "batch_size": self.hyperparams.batch_size,
                "epochs": self.hyperparams.epochs,
            },
        }


def _load_config_file(path: str) -> dict[str, Any]:
    p = Path(path)
    try:
        raw = json.loads(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    unknown = sorted(set(raw) - _CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"{path}: unknown config key {unknown[0]!r}")
    hp = raw.get("hyperparams", {})
    if not isinstance(hp, dict) or set(hp) - _HP_KEYS:
        raise ConfigError(f"{path}: hyperparams may only set {sorted(_HP_KEYS)}")
    # Relative paths in the file are relative to the file itself.
    for key in ("labels", "vocab"):
        if isinstance(raw.get(key), str):
            raw[key] = str((p.parent / raw[key]))
    embedding = raw.get("embedding")
    if embedding is not None:
        if not isinstance(embedding, dict) or embedding.get("kind") not in ("hash", "file"):
            raise ConfigError(f"{path}: embedding.kind must be 'hash' or 'file'")
        if embedding["kind"] == "file":
            if not isinstance(embedding.get("path"), str):
                raise ConfigError(f"{path}: file embeddings need embedding.path")
            embedding["path"] = str(p.parent / embedding["path"])
    return raw


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """defaults <- config file <- flags, tracking which keys were set."""
    file_cfg = _load_config_file(args.config) if args.config else {}
    explicit = set(file_cfg)

    def pick(key: str, flag: Any, default: Any) -> Any:
        if flag is not None:
            explicit.add(key)
            return flag
        return file_cfg.get(key, default)

    embedding = copy.deepcopy(file_cfg.get("embedding")) or {"kind": "hash"}
    if getattr(args, "embedding", None) is not None:
        embedding = {"kind": "file", "path": args.embedding}
        explicit.add("embedding")
    if getattr(args, "dim", None) is not None:
        if embedding["kind"] != "hash":
            raise ConfigError("--dim only applies to hash embeddings")
        embedding["dim"] = args.dim
        explicit.add("embedding")
    embedding.setdefault("dim", DEFAULT_DIM)
    if not isinstance(embedding["dim"], int) or embedding["dim"] < 1:
        raise ConfigError("embedding dim must be a positive integer")

    hp_file = file_cfg.get("hyperparams", {})
    try:
        hyperparams = Hyperparams(
            learning_rate=pick("learning_rate", getattr(args, "lr", None),
                               hp_file.get("learning_rate", 0.5)),
            batch_size=pick("batch_size", getattr(args, "batch_size", None),
                            hp_file.get("batch_size", 32)),
            epochs=pick("epochs", getattr(args, "epochs", None),
                        hp_file.get("epochs", 50)),
            seed=pick("seed", args.seed, DEFAULT_SEED),
        )
    except TaggerError as exc:
        raise ConfigError(str(exc)) from None

    strategy = pick("strategy", args.strategy, "first")
    try:
        Strategy.parse(strategy)
    except TaggerError as exc:
        raise ConfigError(str(exc)) from None
    combine = pick("combine", getattr(args, "combine", None), "concat")
    if combine not in [m.value for m in CombineMode]:
        raise ConfigError(
            f"unknown combine mode {combine!r}; expected one of "
            + ", ".join(m.value for m in CombineMode)
        )
    class_weights = file_cfg.get("class_weights")
    if class_weights is not None and (
        not isinstance(class_weights, list)
        or not all(isinstance(w, (int, float)) for w in class_weights)
    ):
        raise ConfigError("class_weights must be a list of numbers")

    return RunConfig(
        labels=pick("labels", args.labels, None),
        vocab=pick("vocab", args.vocab, None),
        embedding=embedding,
        seed=hyperparams.seed,
        strategy=strategy,
        genre=bool(pick("genre", args.genre, True)),
        combine=combine,
        hyperparams=hyperparams,
        class_weights=class_weights,
        cap_per_span=bool(
            pick("cap_per_span", getattr(args, "cap_per_span", None) or None, False)
        ),
        explicit=frozenset(explicit),
    )


def _require_labels(cfg: RunConfig) -> LabelSet:
    if not cfg.labels:
        raise ConfigError("a label file is required (--labels or config 'labels')")
    if not Path(cfg.labels).exists():
        raise ConfigError(f"label file not found: {cfg.labels}")
    return LabelSet.load(cfg.labels)


def _require_vocab(cfg: RunConfig) -> VocabTokenizer:
    if not cfg.vocab:
        raise ConfigError("a vocab file is required (--vocab or config 'vocab')")
    if not Path(cfg.vocab).exists():
        raise ConfigError(f"vocab file not found: {cfg.vocab}")
    return VocabTokenizer.load(cfg.vocab)


def _load_inputs(paths: Sequence[str], label_set: LabelSet) -> list[Snippet]:
    """Concatenate corpora in argument order; ids must stay unique."""
    snippets: list[Snippet] = []
    seen: set[str] = set()
    for path in paths:
        for snippet in load_corpus(path, label_set):
            if snippet.id in seen:
                raise CorpusError(f"{path}: duplicate snippet id {snippet.id!r} across inputs")
            seen.add(snippet.id)
            snippets.append(snippet)
    return snippets


def _make_provider(
    embedding: dict[str, Any],
    global_seed: int,
    corpus: Sequence[Snippet] | None = None,
) -> EmbeddingProvider:
    if embedding["kind"] == "hash":
        hash_seed = embedding.get("hash_seed", derive_seed(global_seed, "hash"))
        return HashEmbeddingProvider(hash_seed, embedding["dim"])
    path = embedding.get("path")
    if not path:
        raise ConfigError("file embeddings need a path (--embedding or config)")
    return load_embeddings(path, corpus)


def _write_json(path: str, payload: dict[str, Any]) -> None:
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _emit(args: argparse.Namespace, human: str, payload: dict[str, Any]) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True) if args.json else human)


def cmd_repair(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    label_set = _require_labels(cfg)
    snippets = load_corpus(args.input, label_set)
    ledger = OverrideLedger.load(args.ledger) if args.ledger else OverrideLedger()
    repaired, report = repair_corpus(snippets, ledger)
    header = cfg.echo()
    save_corpus(repaired, args.output, label_set, header=header)
    if args.report:
        report.write_jsonl(args.report, header=header)
    dropped = sorted(report.unrepairable_ids)
    _emit(
        args,
        report.summary(),
        {
            "actions": report.counts_by_kind(),
            "snippets_in": len(snippets),
            "snippets_out": len(repaired),
            "dropped_ids": dropped,
        },
    )
    if args.strict and dropped:
        print(
            f"spantag: error: {len(dropped)} snippet(s) unrepairable under --strict",
            file=sys.stderr,
        )
        return 2
    return 0


def _model_config(cfg: RunConfig) -> dict[str, Any]:
    return cfg.echo()


def cmd_train(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    label_set = _require_labels(cfg)
    if cfg.class_weights is not None and len(cfg.class_weights) != len(label_set):
        raise ConfigError(
            f"class_weights has {len(cfg.class_weights)} entries for "
            f"{len(label_set)} labels"
        )
    tokenizer = _require_vocab(cfg)
    snippets = _load_inputs(args.inputs, label_set)
    provider = _make_provider(cfg.embedding, cfg.seed, snippets)
    strategy = Strategy.parse(cfg.strategy)

    started = time.perf_counter()
    tagger, history = train_strategy(
        snippets,
        tokenizer,
        provider,
        strategy,
        label_set,
        cfg.hyperparams,
        cfg.genre,
        CombineMode(cfg.combine),
        cfg.class_weights,
    )
    wall = time.perf_counter() - started
    save_model(tagger, args.output, config=_model_config(cfg))
    log_path = args.log or args.output + ".train.json"
    _write_json(
        log_path,
        {
            "_config": cfg.echo(),
            "snippets": len(snippets),
            "input_width": tagger.input_width,
            "parameters": tagger.param_count,
            "epoch_loss": history,
            "final_loss": history[-1],
            "wall_time_s": round(wall, 3),
        },
    )
    _emit(
        args,
        f"trained {tagger.param_count} parameters over {len(snippets)} snippets "
        f"in {wall:.1f}s; final loss {history[-1]:.4f}; model -> {args.output}",
        {
            "model": args.output,
            "log": log_path,
            "parameters": tagger.param_count,
            "final_loss": history[-1],
        },
    )
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    label_set = _require_labels(cfg) if cfg.labels else None
    tagger, model_cfg = load_model(args.model, label_set)
    label_set = tagger.label_set
    tokenizer = _require_vocab(cfg)

    if "genre" in cfg.explicit and cfg.genre != tagger.use_genre:
        raise TaggerError(
            f"model was trained with genre={'on' if tagger.use_genre else 'off'} "
            f"but the configuration requests genre={'on' if cfg.genre else 'off'}"
        )
    if "strategy" in cfg.explicit:
        strategy = Strategy.parse(cfg.strategy)
    else:
        strategy = Strategy.parse(model_cfg.get("strategy", cfg.strategy))

    snippets = load_corpus(args.input, label_set)
    embedding = model_cfg.get("embedding", cfg.embedding)
    if "embedding" in cfg.explicit:
        embedding = cfg.embedding
    provider = _make_provider(embedding, cfg.seed, snippets)

    predictions = predict_corpus(tagger, snippets, tokenizer, provider, strategy)
    header = {
        "strategy": strategy.value,
        "genre": tagger.use_genre,
        "combine": tagger.combine.value,
        "embedding": {k: v for k, v in embedding.items() if k != "path"},
    }
    save_predictions(snippets, [predictions[s.id] for s in snippets], args.output,
                     label_set, header=header)
    n_spans = sum(len(v) for v in predictions.values())
    _emit(
        args,
        f"predicted {n_spans} spans over {len(snippets)} snippets -> {args.output}",
        {"snippets": len(snippets), "spans": n_spans, "output": args.output},
    )
    return 0


def cmd_score(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    label_set = _require_labels(cfg)
    gold = gold_by_id(load_corpus(args.gold, label_set))
    predictions = load_predictions(args.pred, label_set)
    report = micro_f1(gold, predictions, label_set, cap_per_span=cfg.cap_per_span)
    payload = {"_config": {"cap_per_span": cfg.cap_per_span}, **report.as_dict()}
    if args.output:
        _write_json(args.output, payload)
    _emit(args, report.render(), payload)
    return 0


def _load_grid(path: str | None) -> list[Hyperparams]:
    """Grid cells in cartesian-product order of the file's lists."""
    grid = dict(DEFAULT_GRID)
    if path:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read grid file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None
        if not isinstance(raw, dict) or set(raw) - _HP_KEYS:
            raise ConfigError(f"{path}: grid keys must be among {sorted(_HP_KEYS)}")
        for key, values in raw.items():
            if not isinstance(values, list) or not values:
                raise ConfigError(f"{path}: grid entry {key!r} must be a non-empty list")
            grid[key] = values
    return [
        {"learning_rate": lr, "batch_size": b, "epochs": e}
        for lr in grid["learning_rate"]
        for b in grid["batch_size"]
        for e in grid["epochs"]
    ]


def cmd_tune(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    if args.folds < 2:
        raise ConfigError(f"--folds must be >= 2, got {args.folds}")
    label_set = _require_labels(cfg)
    tokenizer = _require_vocab(cfg)
    snippets = _load_inputs(args.inputs, label_set)
    provider = _make_provider(cfg.embedding, cfg.seed, snippets)
    strategy = Strategy.parse(cfg.strategy)

    cells = []
    best: dict[str, Any] | None = None
    for cell in _load_grid(args.grid):
        try:
            hp = Hyperparams(seed=cfg.seed, **cell)
        except TaggerError as exc:
            raise ConfigError(f"grid cell {cell}: {exc}") from None
        try:
            scores = cross_validate(
                snippets, tokenizer, provider, strategy, label_set, hp, cfg.genre,
                args.folds, CombineMode(cfg.combine),
            )
        except TrainingDiverged:
            cells.append({**cell, "fold_f1": None, "mean_f1": None, "diverged": True})
            continue
        mean = sum(scores) / len(scores)
        record = {**cell, "fold_f1": scores, "mean_f1": mean, "diverged": False}
        cells.append(record)
        if best is None or mean > best["mean_f1"]:
            best = record
    if best is None:
        raise TrainingDiverged("every grid cell diverged; widen the grid")

    lines = [
        f"lr={c['learning_rate']:<8g} batch={c['batch_size']:<4d} "
        f"epochs={c['epochs']:<4d} "
        + ("diverged" if c["diverged"] else f"mean F1 {c['mean_f1'] * 100:6.2f}")
        for c in cells
    ]
    lines.append(
        f"best: lr={best['learning_rate']:g} batch={best['batch_size']} "
        f"epochs={best['epochs']} (mean F1 {best['mean_f1'] * 100:.2f})"
    )
    payload = {"_config": cfg.echo(), "folds": args.folds, "cells": cells, "best": best}
    if args.output:
        _write_json(args.output, payload)
    _emit(args, "\n".join(lines), payload)
    return 0


def cmd_ablate(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    label_set = _require_labels(cfg)
    tokenizer = _require_vocab(cfg)
    train_snippets = _load_inputs(args.inputs, label_set)
    eval_snippets = (
        load_corpus(args.eval, label_set) if args.eval else train_snippets
    )
    provider = _make_provider(
        cfg.embedding, cfg.seed, [*train_snippets, *eval_snippets]
    )
    strategies = (
        [Strategy.parse(cfg.strategy)] if "strategy" in cfg.explicit else list(Strategy)
    )

    reports = {}
    curves = {}
    for strategy in strategies:
        for use_genre in (True, False):
            cell = f"{strategy.value}/{'genre' if use_genre else 'no-genre'}"
            try:
                tagger, history = train_strategy(
                    train_snippets, tokenizer, provider, strategy, label_set,
                    cfg.hyperparams, use_genre, CombineMode(cfg.combine),
                )
                report = evaluate(
                    tagger, eval_snippets, tokenizer, provider, strategy,
                    cap_per_span=cfg.cap_per_span,
                )
            except Exception:
                print(f"spantag: error: ablation cell {cell} failed", file=sys.stderr)
                raise
            reports[(strategy, use_genre)] = report
            curves[cell] = history

    table = ablation_table(reports)
    payload = {
        "_config": cfg.echo(),
        "cells": [
            {
                "strategy": strategy.value,
                "genre": use_genre,
                "micro_f1": report.micro_f1,
                "precision": report.precision,
                "recall": report.recall,
            }
            for (strategy, use_genre), report in reports.items()
        ],
        "convergence": curves,
        "table": table,
    }
    if args.output:
        _write_json(args.output, payload)
    _emit(args, table, payload)
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    label_set = _require_labels(cfg)
    rows = []
    for path in args.inputs:
        stats = corpus_stats(load_corpus(path, label_set))
        rows.append(
            {
                "file": path,
                "tweets": stats.tweets,
                "paragraphs": stats.paragraphs,
                "snippets": stats.total,
                "spans": stats.spans,
            }
        )
    width = max(len(r["file"]) for r in rows)
    lines = [
        f"{'file':<{width}}  tweets  paragraphs  snippets  spans",
    ]
    for r in rows:
        lines.append(
            f"{r['file']:<{width}}  {r['tweets']:>6d}  {r['paragraphs']:>10d}  "
            f"{r['snippets']:>8d}  {r['spans']:>5d}"
        )
    _emit(args, "\n".join(lines), {"files": rows})
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override it")
    common.add_argument("--seed", type=int, help="global seed (default 13)")
    common.add_argument("--labels", help="label file: one technique per line")
    common.add_argument("--vocab", help="tokenizer vocabulary file")
    genre = common.add_mutually_exclusive_group()
    genre.add_argument("--genre", dest="genre", action="store_true", default=None,
                       help="append the genre one-hot to features")
    genre.add_argument("--no-genre", dest="genre", action="store_false",
                       help="disable the genre one-hot")
    common.add_argument("--strategy", choices=[s.value for s in Strategy],
                        help="span prediction strategy")
    common.add_argument("--strict", action="store_true",
                        help="repair: exit 2 if anything was unrepairable")
    common.add_argument("--json", action="store_true",
                        help="print machine-readable JSON instead of text")

    parser = _Parser(prog="spantag",
                     description="span-level propaganda technique tagging toolkit")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("repair", parents=[common],
                       help="fix span offsets against their text")
    p.add_argument("input", help="raw corpus JSONL")
    p.add_argument("-o", "--output", required=True, help="repaired corpus JSONL")
    p.add_argument("--report", help="write repair actions JSONL here")
    p.add_argument("--ledger", help="manual override ledger JSONL")
    p.set_defaults(func=cmd_repair)

    p = sub.add_parser("train", parents=[common], help="train a tagger")
    p.add_argument("inputs", nargs="+",
                   help="repaired corpora, concatenated in order")
    p.add_argument("-o", "--output", required=True, help="model file")
    p.add_argument("--log", help="training log JSON (default MODEL.train.json)")
    p.add_argument("--lr", type=float, help="learning rate")
    p.add_argument("--batch-size", type=int, help="mini-batch size")
    p.add_argument("--epochs", type=int, help="training epochs")
    p.add_argument("--embedding", help="precomputed embedding file")
    p.add_argument("--dim", type=int, help="hash embedding dimension (default 768)")
    p.add_argument("--combine", choices=[m.value for m in CombineMode],
                   help="how the sequence vector joins unit vectors")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", parents=[common], help="predict spans")
    p.add_argument("input", help="corpus JSONL to tag")
    p.add_argument("-m", "--model", required=True, help="model file from train")
    p.add_argument("-o", "--output", required=True, help="predictions JSONL")
    p.add_argument("--embedding", help="precomputed embedding file")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("score", parents=[common],
                       help="score predictions against gold spans")
    p.add_argument("gold", help="gold corpus JSONL")
    p.add_argument("pred", help="predictions JSONL")
    p.add_argument("--cap-per-span", action="store_true", default=None,
                   help="cap each span's overlap credit at 1")
    p.add_argument("--output", help="write the JSON report here")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("tune", parents=[common],
                       help="grid search with k-fold cross-validation")
    p.add_argument("inputs", nargs="+", help="training corpora")
    p.add_argument("--grid", help="JSON grid file (defaults to the built-in grid)")
    p.add_argument("--folds", type=int, default=3, help="cross-validation folds")
    p.add_argument("--output", help="write the grid report JSON here")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("ablate", parents=[common],
                       help="train and score every strategy/genre cell")
    p.add_argument("inputs", nargs="+", help="training corpora")
    p.add_argument("--eval", help="evaluation corpus (default: training corpus)")
    p.add_argument("--output", help="write cells, curves, and table JSON here")
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("stats", parents=[common], help="corpus genre/span counts")
    p.add_argument("inputs", nargs="+", help="corpora to count")
    p.set_defaults(func=cmd_stats)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as exc:
        print(f"spantag: error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except (ConfigError, TaggerError) as exc:
        print(f"spantag: error: {exc}", file=sys.stderr)
        return 1
    except (CorpusError, EmbeddingError, ScoreError, SegmentError) as exc:
        print(f"spantag: error: {exc}", file=sys.stderr)
        return 2
    except TrainingDiverged as exc:
        print(f"spantag: error: {exc}", file=sys.stderr)
        return 3
    except (OSError, ValueError) as exc:
        print(f"spantag: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        traceback.print_exc()
        print(f"spantag: internal error: {exc!r}", file=sys.stderr)
        return 3


def run() -> None:
    raise SystemExit(main(sys.argv[1:]))


if __name__ == "__main__":
    run()
