"""Rebuild data/golden from data/synth through the real CLI.

The golden files pin the end-to-end pipeline byte for byte; tests compare
fresh runs against them. Rerun this after any deliberate change to the
artifact formats, and commit the diff.

Usage: python3 scripts/regenerate_goldens.py [REPO_ROOT]
"""

from __future__ import annotations

import sys
from pathlib import Path

from spantag.cli import main

ROOT = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent
SYNTH = ROOT / "data" / "synth"
GOLDEN = ROOT / "data" / "golden"

STEPS = [
    [
        "repair",
        str(SYNTH / "train_raw.jsonl"),
        "-o", str(GOLDEN / "train_repaired.jsonl"),
        "--report", str(GOLDEN / "repair_report.jsonl"),
        "--ledger", str(SYNTH / "ledger.jsonl"),
        "--config", str(SYNTH / "config.json"),
    ],
    [
        "train",
        str(GOLDEN / "train_repaired.jsonl"),
        "-o", str(GOLDEN / "model.bin"),
        "--log", str(GOLDEN / "train_log.json"),
        "--config", str(SYNTH / "config.json"),
    ],
    [
        "predict",
        str(SYNTH / "test.jsonl"),
        "-m", str(GOLDEN / "model.bin"),
        "-o", str(GOLDEN / "predictions.jsonl"),
        "--config", str(SYNTH / "config.json"),
    ],
    [
        "score",
        str(SYNTH / "test.jsonl"),
        str(GOLDEN / "predictions.jsonl"),
        "--config", str(SYNTH / "config.json"),
        "--output", str(GOLDEN / "score.json"),
    ],
]


def run() -> int:
    GOLDEN.mkdir(parents=True, exist_ok=True)
    for argv in STEPS:
        print("+ spantag " + " ".join(argv))
        code = main(argv)
        if code != 0:
            print(f"step failed with exit code {code}", file=sys.stderr)
            return code
    return 0


if __name__ == "__main__":
    raise SystemExit(run())
