"""Shared fixtures: label sets, tokenizers, and small synthetic corpora."""

from __future__ import annotations

from pathlib import Path

import pytest

from spantag.corpus import LabelSet
from spantag.embed import HashEmbeddingProvider
from spantag.segment import VocabTokenizer
from spantag.synth import build_inventories, default_label_set, generate_corpus, vocab_lines

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(scope="session")
def label_set() -> LabelSet:
    return default_label_set()


@pytest.fixture(scope="session")
def inventories(label_set):
    return build_inventories(label_set, seed=13)


@pytest.fixture(scope="session")
def tokenizer(inventories) -> VocabTokenizer:
    return VocabTokenizer(vocab_lines(inventories))


@pytest.fixture(scope="session")
def small_corpus(label_set, inventories):
    """Forty clean snippets; enough signal to train quickly at d=64."""
    return generate_corpus(40, label_set, inventories, seed=7)


@pytest.fixture(scope="session")
def provider() -> HashEmbeddingProvider:
    return HashEmbeddingProvider(seed=99, d=64)


@pytest.fixture(scope="session")
def synth_dir() -> Path:
    return DATA_DIR / "synth"


@pytest.fixture(scope="session")
def golden_dir() -> Path:
    return DATA_DIR / "golden"
