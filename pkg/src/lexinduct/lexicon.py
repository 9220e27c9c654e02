"""Phrase-pair extraction from aligned sentence pairs and the bilingual
dictionary distilled from the extracted counts.

A phrase pair is extracted from a span pair when both sides are at most
max_len words, at least one alignment link falls inside, and no link crosses
the span boundary (the standard consistency definition). The minimal target
span is additionally extended over adjacent *unaligned target* words;
source spans are enumerated exhaustively, so no source-side extension pass
is needed.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

Phrase = tuple[str, ...]
Link = tuple[int, int]


@dataclass
class InducedDictionary:
    """Ranked translation candidates per source word (best first)."""

    entries: dict[str, tuple[tuple[str, float], ...]]

    def __post_init__(self) -> None:
        self.entries = {s: tuple(c) for s, c in self.entries.items()}

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, source: str) -> bool:
        return source in self.entries

    def top1(self, source: str) -> str | None:
        cands = self.entries.get(source)
        return cands[0][0] if cands else None

    def write(self, path: str | Path, top1_only: bool = False) -> None:
        """Text output, sources sorted, candidates best-first.

        Default: "src<TAB>tgt<TAB>score" lines. top1_only emits the
        two-column "src tgt" exchange format instead (one line per source).
        """
        with open(path, "w", encoding="utf-8") as fh:
            for src in sorted(self.entries):
                cands = self.entries[src]
                if not cands:
                    continue
                if top1_only:
                    fh.write(f"{src} {cands[0][0]}\n")
                else:
                    for tgt, score in cands:
                        fh.write(f"{src}\t{tgt}\t{score:.6g}\n")

    @classmethod
    def read(cls, path: str | Path) -> "InducedDictionary":
        entries: dict[str, list[tuple[str, float]]] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                parts = line.rstrip("\n").split("\t")
                if len(parts) != 3:
                    raise ValueError(f"{path}: line {lineno}: expected src<TAB>tgt<TAB>score")
                entries.setdefault(parts[0], []).append((parts[1], float(parts[2])))
        return cls({s: tuple(c) for s, c in entries.items()})


def extract_phrases(
    src_tokens: Sequence[str],
    tgt_tokens: Sequence[str],
    links: set[Link],
    max_len: int = 3,
) -> list[tuple[Phrase, Phrase]]:
    """All consistent phrase pairs of one aligned sentence pair.

    Returns one entry per extraction occurrence (duplicates preserved so the
    caller can count). Deterministic order: by source span, then target span.
    """
    if max_len < 1:
        raise ValueError(f"max_len must be >= 1, got {max_len}")
    m, n = len(src_tokens), len(tgt_tokens)
    for s, t in links:
        if not (0 <= s < m and 0 <= t < n):
            raise ValueError(f"link {s}-{t} out of range for lengths {m},{n}")
    aligned_tgt = {t for _, t in links}
    pairs: list[tuple[Phrase, Phrase]] = []
    for i1 in range(m):
        for i2 in range(i1, min(i1 + max_len, m)):
            inside = [(s, t) for s, t in links if i1 <= s <= i2]
            if not inside:
                continue
            j1 = min(t for _, t in inside)
            j2 = max(t for _, t in inside)
            if any(not (i1 <= s <= i2) for s, t in links if j1 <= t <= j2):
                continue
            src_phrase = tuple(src_tokens[i1 : i2 + 1])
            # Extend over unaligned boundary words on the target side only.
            jj1 = j1
            while True:
                jj2 = j2
                while True:
                    if jj2 - jj1 + 1 <= max_len:
                        pairs.append((src_phrase, tuple(tgt_tokens[jj1 : jj2 + 1])))
                    jj2 += 1
                    if jj2 >= n or jj2 in aligned_tgt:
                        break
                jj1 -= 1
                if jj1 < 0 or jj1 in aligned_tgt:
                    break
    return pairs


@dataclass
class ExtractedCounts:
    """Occurrence counts of extracted phrase pairs."""

    pairs: Counter = field(default_factory=Counter)

    @property
    def src_marginals(self) -> Counter:
        out: Counter = Counter()
        for (s, _), c in self.pairs.items():
            out[s] += c
        return out

    @property
    def tgt_marginals(self) -> Counter:
        out: Counter = Counter()
        for (_, t), c in self.pairs.items():
            out[t] += c
        return out


def count_extractions(
    bitext: Iterable[tuple[Sequence[str], Sequence[str]]],
    link_sets: Iterable[set[Link]],
    max_len: int = 3,
) -> ExtractedCounts:
    """Run extraction over a parallel corpus and tally pair occurrences."""
    counts = ExtractedCounts()
    n_pairs = 0
    n_links = 0
    for (src, tgt), links in zip(bitext, link_sets, strict=True):
        n_pairs += 1
        n_links += len(links)
        for pair in extract_phrases(src, tgt, links, max_len):
            counts.pairs[pair] += 1
    if n_pairs == 0:
        raise ValueError("empty bitext")
    return counts


def write_extracted_counts(counts: ExtractedCounts, path: str | Path) -> None:
    """One "src ||| tgt ||| count" line per phrase pair, sorted by pair.

    Tokens are whitespace-delimited and single punctuation characters are
    their own tokens, so a space-joined phrase can never contain the
    delimiter.
    """
    with open(path, "w", encoding="utf-8") as fh:
        for (src, tgt), c in sorted(counts.pairs.items()):
            fh.write(f"{' '.join(src)} ||| {' '.join(tgt)} ||| {c}\n")


def read_extracted_counts(path: str | Path) -> ExtractedCounts:
    counts = ExtractedCounts()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split(" ||| ")
            if len(parts) != 3:
                raise ValueError(f"{path}: line {lineno}: expected 3 '|||' fields")
            try:
                c = int(parts[2])
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: non-integer count") from None
            counts.pairs[(tuple(parts[0].split(" ")), tuple(parts[1].split(" ")))] += c
    return counts


def dictionary_from_counts(
    counts: ExtractedCounts,
    denominator: str = "filtered",
) -> InducedDictionary:
    """Single-word dictionary from extraction counts.

    Keeps only pairs where both phrases are one word. p(tgt|src) divides the
    pair count by the source marginal over the kept pairs ("filtered",
    default) or over all extracted pairs ("full"). Candidates are ranked by
    probability, then raw count, then ascending token.
    """
    if denominator not in ("filtered", "full"):
        raise ValueError(f"unknown denominator mode {denominator!r}")
    unigram = {
        (s[0], t[0]): c for (s, t), c in counts.pairs.items() if len(s) == 1 and len(t) == 1
    }
    if denominator == "filtered":
        marginal: Counter = Counter()
        for (s, _), c in unigram.items():
            marginal[s] += c
    else:
        marginal = Counter()
        for (s, _), c in counts.pairs.items():
            if len(s) == 1:
                marginal[s[0]] += c
    by_src: dict[str, list[tuple[str, float, int]]] = {}
    for (s, t), c in unigram.items():
        by_src.setdefault(s, []).append((t, c / marginal[s], c))
    entries = {}
    for s, cands in by_src.items():
        cands.sort(key=lambda x: (-x[1], -x[2], x[0]))
        entries[s] = tuple((t, p) for t, p, _ in cands)
    return InducedDictionary(entries)
