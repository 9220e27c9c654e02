"""Interpolated Kneser-Ney n-gram language model with a fixed discount.

Every order discounts the same absolute amount D from each observed count
and redistributes it through interpolation with the next-lower order. The
top order uses raw counts; lower orders use continuation (distinct
predecessor) counts; the base case interpolates with the uniform
distribution over the prediction vocabulary, which is where the unknown
symbol receives its leftover mass. All log values are natural logs.

Sentences are padded with begin/end symbols; the begin symbol is context
only and is never predicted, so conditional distributions over
vocab + {end, unk} sum to one.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"
RESERVED = (BOS, EOS, UNK)

FORMAT_TAG = "lexinduct-lm"
FORMAT_VERSION = 1

NGram = tuple[str, ...]


@dataclass
class NGramModel:
    """Probability and backoff tables queried ARPA-style.

    logprob maps an observed n-gram to log p(last | rest); backoff maps an
    observed context to its log backoff weight. An n-gram absent at one
    order scores as backoff(context) + score at the next-shorter context,
    bottoming out at log_unseen for unseen unigrams.
    """

    order: int
    discount: float
    logprob: dict[NGram, float]
    backoff: dict[NGram, float]
    log_unseen: float
    vocab: tuple[str, ...] = field(default=())
    _cache: dict[NGram, float] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if not self.vocab:
            words = sorted({g[0] for g in self.logprob if len(g) == 1})
            if UNK not in words:
                words.append(UNK)
            self.vocab = tuple(sorted(words))

    def normalize_token(self, token: str) -> str:
        """Map out-of-vocabulary tokens to the unknown symbol."""
        return token if (token,) in self.logprob else UNK

    def _cond(self, word: str, context: NGram) -> float:
        key = context + (word,)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        if key in self.logprob:
            value = self.logprob[key]
        elif not context:
            value = self.log_unseen
        else:
            value = self.backoff.get(context, 0.0) + self._cond(word, context[1:])
        self._cache[key] = value
        return value

    def log_cond(self, word: str, context: Sequence[str]) -> float:
        """log p(word | context); context is the preceding tokens, already
        begin-padded by the caller (log_prob does this for you)."""
        ctx = tuple(context)[max(0, len(context) - (self.order - 1)) :] if self.order > 1 else ()
        return self._cond(self.normalize_token(word), ctx)

    def initial_context(self) -> NGram:
        """The begin-of-sentence context for incremental scoring."""
        return (BOS,) * (self.order - 1)

    def extend_context(self, context: NGram, word: str) -> NGram:
        """Shift `word` (vocabulary-normalized) into an incremental context."""
        if self.order == 1:
            return ()
        return (context + (self.normalize_token(word),))[1:]

    def _context_of(self, prefix: Sequence[str]) -> NGram:
        if self.order == 1:
            return ()
        padded = (BOS,) * (self.order - 1) + tuple(self.normalize_token(t) for t in prefix)
        return padded[len(padded) - (self.order - 1) :]

    def log_prob(self, sentence: Sequence[str]) -> float:
        """Natural-log probability of the sentence including the end symbol."""
        total = 0.0
        ctx = self._context_of(())
        for token in sentence:
            w = self.normalize_token(token)
            total += self._cond(w, ctx)
            if self.order > 1:
                ctx = (ctx + (w,))[1:]
        return total + self._cond(EOS, ctx)

    def next_word_distribution(self, prefix: Sequence[str]) -> dict[str, float]:
        """p(word | sentence prefix) for every vocabulary word (unk and the
        end symbol included). Sums to one up to float rounding."""
        ctx = self._context_of(prefix)
        return {w: math.exp(self._cond(w, ctx)) for w in self.vocab}


def train_lm(corpus: Iterable[Sequence[str]], order: int = 5, discount: float = 0.75) -> NGramModel:
    """Estimate the model from a tokenized corpus.

    Raises on an empty corpus, a non-positive order, a discount outside
    (0, 1), or training tokens that collide with the reserved symbols.
    """
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    if not (0.0 < discount < 1.0):
        raise ValueError(f"discount must lie in (0, 1), got {discount}")
    sentences = [tuple(s) for s in corpus]
    if not sentences:
        raise ValueError("empty training corpus")

    raw: dict[int, Counter] = {n: Counter() for n in range(1, order + 1)}
    for toks in sentences:
        for t in toks:
            if t in RESERVED:
                raise ValueError(f"training token collides with reserved symbol {t!r}")
        padded = [BOS] * (order - 1) + list(toks) + [EOS]
        for p in range(order - 1, len(padded)):
            for n in range(1, order + 1):
                if p - n + 1 >= 0:
                    raw[n][tuple(padded[p - n + 1 : p + 1])] += 1

    # Adjusted counts: raw at the top order, continuation (distinct
    # predecessor) counts below it.
    adjusted: dict[int, Counter] = {order: raw[order]}
    for k in range(order - 1, 0, -1):
        cont: Counter = Counter()
        for gram in raw[k + 1]:
            cont[gram[1:]] += 1
        adjusted[k] = cont

    vocab_set = {g[0] for g in raw[1]}
    vocab_set.add(UNK)
    v_size = len(vocab_set)

    base = adjusted[1]
    cc_total = sum(base.values())
    types = len(base)
    uniform = 1.0 / v_size
    base_bow = discount * types / cc_total
    log_unseen = math.log(base_bow * uniform)

    logprob: dict[NGram, float] = {}
    backoff: dict[NGram, float] = {}
    for (w,), c in base.items():
        logprob[(w,)] = math.log((c - discount) / cc_total + base_bow * uniform)

    def lower_prob(word: str, context: NGram) -> float:
        key = context + (word,)
        if key in logprob:
            return math.exp(logprob[key])
        if not context:
            return math.exp(log_unseen)
        return math.exp(backoff.get(context, 0.0)) * lower_prob(word, context[1:])

    for k in range(2, order + 1):
        counts = adjusted[k]
        totals: Counter = Counter()
        successors: Counter = Counter()
        for gram, c in counts.items():
            totals[gram[:-1]] += c
            successors[gram[:-1]] += 1
        bows = {
            h: discount * successors[h] / totals[h] for h in totals
        }
        for gram, c in counts.items():
            h = gram[:-1]
            p = (c - discount) / totals[h] + bows[h] * lower_prob(gram[-1], h[1:])
            logprob[gram] = math.log(p)
        for h, b in bows.items():
            backoff[h] = math.log(b)

    return NGramModel(
        order=order,
        discount=discount,
        logprob=logprob,
        backoff=backoff,
        log_unseen=log_unseen,
        vocab=tuple(sorted(vocab_set)),
    )


def perplexity(model: NGramModel, corpus: Iterable[Sequence[str]]) -> float:
    """exp of the mean per-token negative log probability (end symbols count
    as tokens)."""
    total = 0.0
    tokens = 0
    for sent in corpus:
        total += model.log_prob(sent)
        tokens += len(sent) + 1
    if tokens == 0:
        raise ValueError("empty corpus")
    return math.exp(-total / tokens)


def save_lm(model: NGramModel, path: str | Path) -> None:
    """Versioned text serialization.

    Header: format tag + version, order, discount, and the unseen-unigram
    log probability. Then one line per table entry, orders ascending and
    n-grams sorted: "logp<TAB>ngram<TAB>backoff", with "-" where an entry
    has no probability (context-only rows) or no backoff weight. Values
    round-trip to 9 decimal places.
    """
    keys = sorted(set(model.logprob) | set(model.backoff), key=lambda g: (len(g), g))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{FORMAT_TAG} {FORMAT_VERSION}\n")
        fh.write(f"order {model.order}\n")
        fh.write(f"discount {model.discount!r}\n")
        fh.write(f"unseen {model.log_unseen:.9f}\n")
        for gram in keys:
            lp = f"{model.logprob[gram]:.9f}" if gram in model.logprob else "-"
            bo = f"{model.backoff[gram]:.9f}" if gram in model.backoff else "-"
            fh.write(f"{lp}\t{' '.join(gram)}\t{bo}\n")


def load_lm(path: str | Path) -> NGramModel:
    with open(path, encoding="utf-8") as fh:
        head = fh.readline().split()
        if len(head) != 2 or head[0] != FORMAT_TAG:
            raise ValueError(f"{path}: not a {FORMAT_TAG} file")
        if int(head[1]) != FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported version {head[1]}")
        order_line = fh.readline().split()
        discount_line = fh.readline().split()
        unseen_line = fh.readline().split()
        if order_line[:1] != ["order"] or discount_line[:1] != ["discount"] or unseen_line[:1] != ["unseen"]:
            raise ValueError(f"{path}: malformed header")
        order = int(order_line[1])
        discount = float(discount_line[1])
        log_unseen = float(unseen_line[1])
        logprob: dict[NGram, float] = {}
        backoff: dict[NGram, float] = {}
        for lineno, line in enumerate(fh, 5):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 3:
                raise ValueError(f"{path}: line {lineno}: expected 3 tab fields")
            gram = tuple(parts[1].split(" "))
            if parts[0] != "-":
                logprob[gram] = float(parts[0])
            if parts[2] != "-":
                backoff[gram] = float(parts[2])
    return NGramModel(
        order=order,
        discount=discount,
        logprob=logprob,
        backoff=backoff,
        log_unseen=log_unseen,
    )
