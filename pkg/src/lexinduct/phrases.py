"""Phrase-table induction from cross-lingual phrase embeddings.

The inventory per language is every vocabulary word plus the most frequent
bigrams and trigrams (capped). Each phrase embeds as the renormalized mean
of its unit word vectors. For each source phrase the k nearest target
phrases by cosine form its candidate set, scored with a softmax at a
temperature fitted by maximum likelihood against a top-1 dictionary induced
in the opposite direction. Each table entry carries four probabilities:
softmax scores in both directions plus lexical weights built from a
word-level table the same way (each generated word explained by the
generating-side word most likely to produce it).
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import NGramCounts, build_vocabulary
from .embeddings import EmbeddingStore, ScoredCandidates, k_nearest, unit_normalize

log = logging.getLogger(__name__)

Phrase = tuple[str, ...]

DEFAULT_CANDIDATES = 100
DEFAULT_NGRAM_CAP = 400_000
DEFAULT_VOCAB_SIZE = 200_000
DEFAULT_REVERSE_SAMPLE = 10_000
PROB_FLOOR = 1e-7
TAU_LO = 1e-3
TAU_HI = 10.0
TAU_ITERATIONS = 64
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class TemperatureParam:
    """Fitted softmax temperature."""

    tau: float

    def __post_init__(self) -> None:
        if self.tau <= 0:
            raise ValueError(f"temperature must be positive, got {self.tau}")


@dataclass
class PhraseInventory:
    """Phrases (token tuples) with their corpus frequencies."""

    phrases: dict[Phrase, int]

    def __len__(self) -> int:
        return len(self.phrases)


def build_phrase_inventory(
    counts: dict[int, NGramCounts],
    vocab_size: int = DEFAULT_VOCAB_SIZE,
    ngram_cap: int = DEFAULT_NGRAM_CAP,
) -> PhraseInventory:
    """Select the phrase inventory from n-gram counts of orders 1..3.

    Every word of the truncated vocabulary is a phrase; bigrams and trigrams
    are kept up to `ngram_cap` each, most frequent first, ties broken by
    ascending token tuple.
    """
    for order in (1, 2, 3):
        if order not in counts:
            raise ValueError(f"missing n-gram counts for order {order}")
    phrases: dict[Phrase, int] = {}
    for word in build_vocabulary(counts[1], vocab_size):
        phrases[(word,)] = counts[1].counts[(word,)]
    for order in (2, 3):
        ranked = sorted(counts[order].counts.items(), key=lambda kv: (-kv[1], kv[0]))
        for gram, freq in ranked[:ngram_cap]:
            phrases[gram] = freq
    return PhraseInventory(phrases)


def phrase_key(phrase: Phrase) -> str:
    return " ".join(phrase)


def phrase_embedding(phrase: Phrase, words: EmbeddingStore) -> np.ndarray:
    """Renormalized mean of the phrase's unit word vectors."""
    if not phrase:
        raise ValueError("empty phrase")
    if not words.normalized:
        words = unit_normalize(words)
    missing = [w for w in phrase if w not in words]
    if missing:
        raise ValueError(f"word {missing[0]!r} has no embedding")
    mean = words.vectors[words.indices(phrase)].astype(np.float64).mean(axis=0)
    norm = float(np.sqrt((mean**2).sum()))
    if norm == 0.0:
        raise ValueError(f"zero centroid for phrase {phrase_key(phrase)!r}")
    return (mean / norm).astype(np.float32)


def build_phrase_store(inventory: PhraseInventory, words: EmbeddingStore) -> EmbeddingStore:
    """Embed every inventory phrase whose words all have embeddings.

    Phrases with out-of-vocabulary words (or a zero centroid, which cannot
    be normalized) are dropped with a tally in the log. Store order is the
    sorted space-joined phrase key.
    """
    if not words.normalized:
        words = unit_normalize(words)
    kept: list[Phrase] = []
    skipped = 0
    for phrase in inventory.phrases:
        if all(w in words for w in phrase):
            kept.append(phrase)
        else:
            skipped += 1
    if skipped:
        log.info("dropped %d phrases with out-of-vocabulary words", skipped)
    if not kept:
        raise ValueError("no inventory phrase is covered by the word embeddings")
    kept.sort(key=phrase_key)
    vectors = np.empty((len(kept), words.dim), dtype=np.float64)
    for length in sorted({len(p) for p in kept}):
        rows = [i for i, p in enumerate(kept) if len(p) == length]
        idx = np.array([words.indices(kept[i]) for i in rows], dtype=np.int64)
        vectors[rows] = words.vectors[idx].astype(np.float64).mean(axis=1)
    norms = np.sqrt((vectors**2).sum(axis=1))
    zero = np.nonzero(norms == 0.0)[0]
    if zero.size:
        keep_mask = norms > 0.0
        log.warning("dropped %d phrases with zero centroids", int(zero.size))
        kept = [p for p, ok in zip(kept, keep_mask) if ok]
        vectors = vectors[keep_mask]
        norms = norms[keep_mask]
    vectors = (vectors / norms[:, None]).astype(np.float32)
    return EmbeddingStore(tuple(phrase_key(p) for p in kept), vectors, normalized=True)


def softmax_scores(cosines: np.ndarray, tau: float) -> np.ndarray:
    """Stable softmax of cosines/tau (max subtracted before exponentiation)."""
    if tau <= 0:
        raise ValueError(f"temperature must be positive, got {tau}")
    scaled = np.asarray(cosines, dtype=np.float64) / tau
    scaled = scaled - scaled.max()
    weights = np.exp(scaled)
    return weights / weights.sum()


def floored_probs(probs: np.ndarray, floor: float = PROB_FLOOR) -> np.ndarray:
    """Clamp probabilities to at least `floor`, then renormalize.

    Keeps every stored probability strictly positive even when the fitted
    temperature is small enough for the softmax tail to underflow to 0.0,
    while preserving the sum-to-one invariant.
    """
    clamped = np.maximum(probs, floor)
    return clamped / clamped.sum()


def candidate_sets(
    src: EmbeddingStore, tgt: EmbeddingStore, k: int = DEFAULT_CANDIDATES
) -> dict[str, ScoredCandidates]:
    """k nearest target phrases for every source phrase, keyed by source."""
    ranked = k_nearest(src, tgt, list(src.vocab), k)
    return {r.query: r for r in ranked}


def top1_sample(
    cands: dict[str, ScoredCandidates], sample_size: int = DEFAULT_REVERSE_SAMPLE, seed: int = 13
) -> list[tuple[str, str]]:
    """Seeded sample of (query, nearest neighbor) pairs from candidate sets.

    Used as the induced dictionary that the opposite direction's temperature
    is fitted against.
    """
    keys = list(cands)
    if sample_size < len(keys):
        picked = sorted(random.Random(seed).sample(range(len(keys)), sample_size))
        keys = [keys[i] for i in picked]
    return [(q, cands[q].best()) for q in keys]


def _pair_matrices(
    cands: dict[str, ScoredCandidates], pairs: Sequence[tuple[str, str]]
) -> tuple[np.ndarray, np.ndarray]:
    """Cosine rows (padded with -inf) and gold scores for usable MLE pairs."""
    rows: list[np.ndarray] = []
    gold: list[float] = []
    skipped = 0
    width = 0
    for generated, generator in pairs:
        cand = cands.get(generator)
        if cand is None:
            skipped += 1
            continue
        scores = {t: s for t, s in cand.candidates}
        if generated not in scores:
            skipped += 1
            continue
        row = np.array([s for _, s in cand.candidates], dtype=np.float64)
        rows.append(row)
        gold.append(scores[generated])
        width = max(width, row.shape[0])
    if skipped:
        log.warning("temperature fit: skipped %d pairs outside candidate sets", skipped)
    if not rows:
        raise ValueError("no dictionary pair falls inside the candidate sets")
    padded = np.full((len(rows), width), -np.inf)
    for i, row in enumerate(rows):
        padded[i, : row.shape[0]] = row
    return padded, np.array(gold, dtype=np.float64)


def estimate_temperature(
    cands: dict[str, ScoredCandidates],
    reverse_pairs: Sequence[tuple[str, str]],
    lo: float = TAU_LO,
    hi: float = TAU_HI,
    iterations: int = TAU_ITERATIONS,
) -> TemperatureParam:
    """Maximum-likelihood temperature via golden-section search on log tau.

    reverse_pairs are (generated phrase, generating phrase) pairs induced in
    the opposite direction; pairs whose generated phrase is missing from the
    generating phrase's candidate set are skipped with a warning.
    """
    cos, gold = _pair_matrices(cands, reverse_pairs)

    def nll(log_tau: float) -> float:
        tau = math.exp(log_tau)
        scaled = cos / tau
        top = scaled.max(axis=1)
        lse = top + np.log(np.exp(scaled - top[:, None]).sum(axis=1))
        return float((lse - gold / tau).sum())

    a, b = math.log(lo), math.log(hi)
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = nll(c), nll(d)
    for _ in range(iterations):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = nll(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = nll(d)
    return TemperatureParam(math.exp((a + b) / 2.0))


def word_translation_table(
    cands: dict[str, ScoredCandidates], tau: TemperatureParam, floor: float = PROB_FLOOR
) -> dict[str, dict[str, float]]:
    """Word-level softmax translation probabilities over each word's
    candidate set: w(generated | generating)."""
    table: dict[str, dict[str, float]] = {}
    for word, cand in cands.items():
        probs = floored_probs(
            softmax_scores(np.array([s for _, s in cand.candidates]), tau.tau), floor
        )
        table[word] = {t: float(p) for (t, _), p in zip(cand.candidates, probs)}
    return table


def lexical_weight(
    generating: Phrase,
    generated: Phrase,
    table: dict[str, dict[str, float]],
    floor: float = PROB_FLOOR,
) -> float:
    """Product over generated words of the best word-level probability from
    any generating word; words no generating word covers contribute `floor`."""
    weight = 1.0
    for out_word in generated:
        best = 0.0
        for in_word in generating:
            best = max(best, table.get(in_word, {}).get(out_word, 0.0))
        weight *= best if best > 0.0 else floor
    return weight


@dataclass(frozen=True)
class PhraseTableEntry:
    src: str
    tgt: str
    phi_fwd: float
    phi_bwd: float
    lex_fwd: float
    lex_bwd: float

    def __post_init__(self) -> None:
        for name in ("phi_fwd", "phi_bwd", "lex_fwd", "lex_bwd"):
            value = getattr(self, name)
            if not (0.0 < value <= 1.0):
                raise ValueError(f"{name}={value} outside (0, 1] for {self.src!r}")


@dataclass
class PhraseTable:
    """Candidate target phrases per source phrase, best phi_fwd first."""

    entries: dict[str, tuple[PhraseTableEntry, ...]]
    _max_src: int | None = None

    def __len__(self) -> int:
        return sum(len(v) for v in self.entries.values())

    def options(self, phrase: Sequence[str]) -> tuple[PhraseTableEntry, ...]:
        return self.entries.get(" ".join(phrase), ())

    def max_source_words(self) -> int:
        """Longest source phrase, in words (tables are immutable once built)."""
        if self._max_src is None:
            self._max_src = max((k.count(" ") + 1 for k in self.entries), default=1)
        return self._max_src

    def write(self, path: str | Path) -> None:
        """One "src ||| tgt ||| phi_fwd phi_bwd lex_fwd lex_bwd" line per
        entry, sources sorted, entries by descending phi_fwd; probabilities
        carry 6 significant digits and round-trip bit-exactly."""
        with open(path, "w", encoding="utf-8") as fh:
            for src in sorted(self.entries):
                for e in self.entries[src]:
                    fh.write(
                        f"{e.src} ||| {e.tgt} ||| "
                        f"{e.phi_fwd:.6g} {e.phi_bwd:.6g} {e.lex_fwd:.6g} {e.lex_bwd:.6g}\n"
                    )

    @classmethod
    def read(cls, path: str | Path) -> "PhraseTable":
        entries: dict[str, list[PhraseTableEntry]] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                parts = line.rstrip("\n").split(" ||| ")
                if len(parts) != 3:
                    raise ValueError(f"{path}: line {lineno}: expected 3 '|||' fields")
                values = parts[2].split()
                if len(values) != 4:
                    raise ValueError(f"{path}: line {lineno}: expected 4 probabilities")
                try:
                    phi_f, phi_b, lex_f, lex_b = (float(v) for v in values)
                except ValueError:
                    raise ValueError(f"{path}: line {lineno}: non-numeric probability") from None
                entries.setdefault(parts[0], []).append(
                    PhraseTableEntry(parts[0], parts[1], phi_f, phi_b, lex_f, lex_b)
                )
        return cls({s: tuple(v) for s, v in entries.items()})


def _softmax_map(
    cands: dict[str, ScoredCandidates], tau: TemperatureParam, floor: float
) -> dict[str, dict[str, float]]:
    out: dict[str, dict[str, float]] = {}
    for query, cand in cands.items():
        probs = floored_probs(
            softmax_scores(np.array([s for _, s in cand.candidates]), tau.tau), floor
        )
        out[query] = {t: float(p) for (t, _), p in zip(cand.candidates, probs)}
    return out


def build_phrase_table(
    cands: dict[str, ScoredCandidates],
    opposite_cands: dict[str, ScoredCandidates],
    tau: TemperatureParam,
    opposite_tau: TemperatureParam,
    word_table: dict[str, dict[str, float]],
    opposite_word_table: dict[str, dict[str, float]],
    floor: float = PROB_FLOOR,
) -> PhraseTable:
    """Assemble one direction's phrase table from both directions' candidate
    sets. Backward probabilities are looked up in the opposite direction's
    softmax map and floored when the reversed pair is absent."""
    forward = _softmax_map(cands, tau, floor)
    backward = _softmax_map(opposite_cands, opposite_tau, floor)
    entries: dict[str, tuple[PhraseTableEntry, ...]] = {}
    for src, cand in cands.items():
        src_words = tuple(src.split(" "))
        fwd = forward[src]
        rows = []
        for tgt, _ in cand.candidates:
            tgt_words = tuple(tgt.split(" "))
            rows.append(
                PhraseTableEntry(
                    src,
                    tgt,
                    phi_fwd=fwd[tgt],
                    phi_bwd=backward.get(tgt, {}).get(src, floor),
                    lex_fwd=lexical_weight(src_words, tgt_words, word_table, floor),
                    lex_bwd=lexical_weight(tgt_words, src_words, opposite_word_table, floor),
                )
            )
        rows.sort(key=lambda e: (-e.phi_fwd, e.tgt))
        entries[src] = tuple(rows)
    return PhraseTable(entries)


@dataclass
class TableInduction:
    """Both directions' tables and fitted temperatures."""

    table_fwd: PhraseTable
    table_rev: PhraseTable
    tau_fwd: TemperatureParam
    tau_rev: TemperatureParam


def induce_tables(
    src_phrases: EmbeddingStore,
    tgt_phrases: EmbeddingStore,
    src_words: EmbeddingStore,
    tgt_words: EmbeddingStore,
    k: int = DEFAULT_CANDIDATES,
    reverse_sample: int = DEFAULT_REVERSE_SAMPLE,
    seed: int = 13,
    floor: float = PROB_FLOOR,
) -> TableInduction:
    """Run the full two-direction induction: candidate sets, temperature
    fits, word-level tables, and both phrase tables."""
    fwd_cands = candidate_sets(src_phrases, tgt_phrases, k)
    rev_cands = candidate_sets(tgt_phrases, src_phrases, k)
    tau_fwd = estimate_temperature(fwd_cands, top1_sample(rev_cands, reverse_sample, seed))
    tau_rev = estimate_temperature(rev_cands, top1_sample(fwd_cands, reverse_sample, seed))
    word_k = min(k, len(tgt_words), len(src_words))
    wt_fwd = word_translation_table(candidate_sets(src_words, tgt_words, word_k), tau_fwd, floor)
    wt_rev = word_translation_table(candidate_sets(tgt_words, src_words, word_k), tau_rev, floor)
    table_fwd = build_phrase_table(fwd_cands, rev_cands, tau_fwd, tau_rev, wt_fwd, wt_rev, floor)
    table_rev = build_phrase_table(rev_cands, fwd_cands, tau_rev, tau_fwd, wt_rev, wt_fwd, floor)
    return TableInduction(table_fwd, table_rev, tau_fwd, tau_rev)
