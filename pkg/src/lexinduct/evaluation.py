"""Dictionary evaluation: precision at one against a gold lexicon.

The gold file uses the common two-column exchange format, one "source
target" pair per line, with repeated source words forming a reference set.
A source word missing from the induced dictionary falls back to predicting
itself (copy back-off), which matters for pairs that are spelled
identically across languages.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .lexicon import InducedDictionary


@dataclass
class GoldDictionary:
    """Reference translations per source word."""

    entries: dict[str, frozenset[str]]

    def __post_init__(self) -> None:
        if not self.entries:
            raise ValueError("empty gold dictionary")
        self.entries = {s: frozenset(t) for s, t in self.entries.items()}

    def __len__(self) -> int:
        return len(self.entries)


def read_gold(path: str | Path) -> GoldDictionary:
    """Parse the "source target" format, grouping by source word."""
    entries: dict[str, set[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}: line {lineno}: expected 'source target'")
            entries.setdefault(parts[0], set()).add(parts[1])
    if not entries:
        raise ValueError(f"{path}: no gold pairs")
    return GoldDictionary({s: frozenset(t) for s, t in entries.items()})


def precision_at_1(induced: InducedDictionary, gold: GoldDictionary) -> tuple[float, float]:
    """(precision@1, out-of-dictionary rate) over the gold source words.

    The top-1 prediction for a covered source word is its best-ranked
    candidate; uncovered words predict themselves. A prediction is correct
    when it appears in the word's reference set. Both returned rates are
    fractions of the gold source vocabulary; the result is independent of
    gold entry order.
    """
    correct = 0
    missing = 0
    for source in gold.entries:
        prediction = induced.top1(source)
        if prediction is None:
            missing += 1
            prediction = source
        if prediction in gold.entries[source]:
            correct += 1
    total = len(gold.entries)
    return correct / total, missing / total
