"""Phrase-based beam-search decoder.

Hypotheses live in coverage-cardinality stacks with histogram pruning and
recombination on (coverage, language-model context, last covered position).
Eight features score a derivation: summed log forward/backward phrase and
lexical probabilities, the language-model log probability of the output
(end symbol included), minus the output length, minus the phrase count, and
minus the total distortion, where each phrase's distortion is
|start - previous_end - 1| with the initial previous_end at -1.

Source tokens without any single-word table entry translate as themselves
(copy-through) with zero translation-model feature contributions. If the
distortion guards prune every complete path, the sentence is deterministically
re-decoded monotone, which always completes.
"""

from __future__ import annotations

import math
import multiprocessing
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .lm import EOS, NGramModel
from .phrases import PhraseTable

FEATURE_NAMES = (
    "phi_fwd",
    "phi_bwd",
    "lex_fwd",
    "lex_bwd",
    "lm",
    "word_penalty",
    "phrase_penalty",
    "distortion",
)

DEFAULT_BEAM = 50
DEFAULT_DISTORTION_LIMIT = 6
DEFAULT_CORPUS_CAP = 10_000_000


@dataclass(frozen=True)
class FeatureWeights:
    """Log-linear weights, one per feature, in FEATURE_NAMES order."""

    phi_fwd: float = 1.0
    phi_bwd: float = 1.0
    lex_fwd: float = 1.0
    lex_bwd: float = 1.0
    lm: float = 1.0
    word_penalty: float = 0.0
    phrase_penalty: float = 0.0
    distortion: float = 1.0

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in FEATURE_NAMES], dtype=np.float64)

    def replace(self, name: str, value: float) -> "FeatureWeights":
        if name not in FEATURE_NAMES:
            raise ValueError(f"unknown feature {name!r}")
        return replace(self, **{name: value})

    def write(self, path: str | Path) -> None:
        """One "name = value" line per feature."""
        with open(path, "w", encoding="utf-8") as fh:
            for name in FEATURE_NAMES:
                fh.write(f"{name} = {getattr(self, name)!r}\n")

    @classmethod
    def read(cls, path: str | Path) -> "FeatureWeights":
        values: dict[str, float] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}: line {lineno}: expected 'name = value'")
                name, _, raw = line.partition("=")
                name = name.strip()
                if name not in FEATURE_NAMES:
                    raise ValueError(f"{path}: line {lineno}: unknown feature {name!r}")
                values[name] = float(raw.strip())
        missing = [n for n in FEATURE_NAMES if n not in values]
        if missing:
            raise ValueError(f"{path}: missing weight for {missing[0]!r}")
        return cls(**values)


@dataclass(frozen=True)
class DerivationStep:
    """One phrase application: source span start, both phrase sides, and the
    four log probabilities (zeros for a copied-through token)."""

    start: int
    src: tuple[str, ...]
    tgt: tuple[str, ...]
    log_phi: tuple[float, float, float, float]
    copied: bool = False

    @property
    def end(self) -> int:
        return self.start + len(self.src) - 1


@dataclass
class DecodeResult:
    steps: tuple[DerivationStep, ...]
    output: tuple[str, ...]
    features: np.ndarray
    score: float


def feature_score(
    steps: Sequence[DerivationStep],
    weights: FeatureWeights,
    lm: NGramModel,
    source_length: int | None = None,
) -> tuple[np.ndarray, float]:
    """Recompute the feature vector and model score of a derivation from
    scratch. With source_length given, verifies the steps cover the source
    exactly once."""
    if source_length is not None:
        covered: set[int] = set()
        for step in steps:
            span = set(range(step.start, step.end + 1))
            if covered & span:
                raise ValueError(f"derivation covers position {min(covered & span)} twice")
            covered |= span
        if covered != set(range(source_length)):
            raise ValueError("derivation does not cover the source exactly once")
    feats = np.zeros(len(FEATURE_NAMES), dtype=np.float64)
    output: list[str] = []
    prev_end = -1
    for step in steps:
        for i in range(4):
            feats[i] += step.log_phi[i]
        output.extend(step.tgt)
        feats[7] -= abs(step.start - prev_end - 1)
        prev_end = step.end
    feats[4] = lm.log_prob(output)
    feats[5] = -float(len(output))
    feats[6] = -float(len(steps))
    return feats, float(feats @ weights.as_array())


class _Hyp:
    __slots__ = ("score", "feats", "cov", "ctx", "last_end", "parent", "step")

    def __init__(self, score, feats, cov, ctx, last_end, parent, step):
        self.score = score
        self.feats = feats
        self.cov = cov
        self.ctx = ctx
        self.last_end = last_end
        self.parent = parent
        self.step = step


def _sort_key(h: _Hyp):
    # Total, deterministic: no two distinct recombined states share all four.
    return (-h.score, h.cov, h.last_end, h.ctx)


def _span_options(
    sentence: Sequence[str],
    table: PhraseTable,
    weights: FeatureWeights,
    options_limit: int | None,
):
    """Translation options per source span, ranked by weighted
    translation-model score (ties by target phrase), plus copy-through
    options wherever a token has no single-word entry."""
    n = len(sentence)
    max_len = table.max_source_words()
    w4 = (weights.phi_fwd, weights.phi_bwd, weights.lex_fwd, weights.lex_bwd)
    spans = []
    for i in range(n):
        for j in range(i + 1, min(i + max_len, n) + 1):
            entries = table.options(sentence[i:j])
            if not entries:
                continue
            ranked = []
            for e in entries:
                lp = (
                    math.log(e.phi_fwd),
                    math.log(e.phi_bwd),
                    math.log(e.lex_fwd),
                    math.log(e.lex_bwd),
                )
                tm = w4[0] * lp[0] + w4[1] * lp[1] + w4[2] * lp[2] + w4[3] * lp[3]
                ranked.append((tm, e.tgt, lp))
            ranked.sort(key=lambda c: (-c[0], c[1]))
            if options_limit is not None and options_limit > 0:
                ranked = ranked[:options_limit]
            spans.append(((i, j), [(tuple(t.split(" ")), lp) for _, t, lp in ranked]))
    have_single = {i for (i, j), _ in spans if j == i + 1}
    for i in range(n):
        if i not in have_single:
            spans.append(((i, i + 1), [((sentence[i],), None)]))
    spans.sort(key=lambda s: s[0])
    return spans


def decode(
    sentence: Sequence[str],
    table: PhraseTable,
    lm: NGramModel,
    weights: FeatureWeights = FeatureWeights(),
    beam: int = DEFAULT_BEAM,
    distortion_limit: int = DEFAULT_DISTORTION_LIMIT,
    options_limit: int | None = None,
) -> DecodeResult:
    """Best derivation for one sentence. Deterministic for fixed inputs."""
    if beam < 1:
        raise ValueError(f"beam must be >= 1, got {beam}")
    sentence = tuple(sentence)
    n = len(sentence)
    w = weights
    w_lm, w_word, w_phrase, w_dist = w.lm, w.word_penalty, w.phrase_penalty, w.distortion
    spans = _span_options(sentence, table, weights, options_limit)
    full = (1 << n) - 1

    init = _Hyp(0.0, (0.0,) * 8, 0, lm.initial_context(), -1, None, None)
    if n == 0:
        lg = lm.log_cond(EOS, init.ctx)
        feats = np.zeros(8)
        feats[4] = lg
        return DecodeResult((), (), feats, lg * w_lm)

    stacks: list[dict] = [dict() for _ in range(n + 1)]
    stacks[0][(0, init.ctx, -1)] = init

    for level in range(n):
        if not stacks[level]:
            continue
        parents = sorted(stacks[level].values(), key=_sort_key)[:beam]
        for hyp in parents:
            cov = hyp.cov
            free = ~cov
            leftmost = (free & -free).bit_length() - 1
            for (i, j), options in spans:
                mask = ((1 << (j - i)) - 1) << i
                if cov & mask:
                    continue
                jump = abs(i - hyp.last_end - 1)
                if distortion_limit >= 0 and (
                    jump > distortion_limit or i > leftmost + distortion_limit
                ):
                    continue
                for tgt, lp in options:
                    f = hyp.feats
                    ctx = hyp.ctx
                    lm_add = 0.0
                    for word in tgt:
                        lm_add += lm.log_cond(word, ctx)
                        ctx = lm.extend_context(ctx, word)
                    if lp is None:
                        tm_add = 0.0
                        f0, f1, f2, f3 = f[0], f[1], f[2], f[3]
                    else:
                        tm_add = (
                            w.phi_fwd * lp[0]
                            + w.phi_bwd * lp[1]
                            + w.lex_fwd * lp[2]
                            + w.lex_bwd * lp[3]
                        )
                        f0, f1, f2, f3 = f[0] + lp[0], f[1] + lp[1], f[2] + lp[2], f[3] + lp[3]
                    new_cov = cov | mask
                    lm_total = lm_add
                    if new_cov == full:
                        lm_total += lm.log_cond(EOS, ctx)
                    score = (
                        hyp.score
                        + tm_add
                        + w_lm * lm_total
                        - w_word * len(tgt)
                        - w_phrase
                        - w_dist * jump
                    )
                    feats = (
                        f0,
                        f1,
                        f2,
                        f3,
                        f[4] + lm_total,
                        f[5] - len(tgt),
                        f[6] - 1.0,
                        f[7] - jump,
                    )
                    child = _Hyp(
                        score,
                        feats,
                        new_cov,
                        ctx,
                        j - 1,
                        hyp,
                        DerivationStep(i, sentence[i:j], tgt, lp or (0.0,) * 4, lp is None),
                    )
                    key = (new_cov, ctx, j - 1)
                    bucket = stacks[level + (j - i)]
                    old = bucket.get(key)
                    if old is None or child.score > old.score:
                        bucket[key] = child
    if not stacks[n]:
        if distortion_limit != 0:
            return decode(sentence, table, lm, weights, beam, 0, options_limit)
        raise RuntimeError("monotone decoding failed to complete (unreachable)")
    best = min(stacks[n].values(), key=_sort_key)
    steps: list[DerivationStep] = []
    node = best
    while node.parent is not None:
        steps.append(node.step)
        node = node.parent
    steps.reverse()
    output = tuple(t for s in steps for t in s.tgt)
    return DecodeResult(tuple(steps), output, np.array(best.feats), best.score)


def translate(
    sentence: Sequence[str],
    table: PhraseTable,
    lm: NGramModel,
    weights: FeatureWeights = FeatureWeights(),
    beam: int = DEFAULT_BEAM,
    distortion_limit: int = DEFAULT_DISTORTION_LIMIT,
    options_limit: int | None = None,
) -> list[str]:
    return list(decode(sentence, table, lm, weights, beam, distortion_limit, options_limit).output)


@dataclass
class TranslationSystem:
    """A decoder configuration bound to one direction's models.

    Caches whole-sentence translations (safe: decoding is pure), which pays
    off when tuning repeatedly re-translates similar inputs.
    """

    table: PhraseTable
    lm: NGramModel
    weights: FeatureWeights = FeatureWeights()
    beam: int = DEFAULT_BEAM
    distortion_limit: int = DEFAULT_DISTORTION_LIMIT
    options_limit: int | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def with_weights(self, weights: FeatureWeights) -> "TranslationSystem":
        return TranslationSystem(
            self.table, self.lm, weights, self.beam, self.distortion_limit, self.options_limit
        )

    def translate(self, sentence: Sequence[str]) -> tuple[str, ...]:
        key = tuple(sentence)
        hit = self._cache.get(key)
        if hit is None:
            hit = decode(
                key, self.table, self.lm, self.weights, self.beam,
                self.distortion_limit, self.options_limit,
            ).output
            self._cache[key] = hit
        return hit


_POOL_SYSTEM: TranslationSystem | None = None


def _pool_init(system: TranslationSystem) -> None:
    global _POOL_SYSTEM
    _POOL_SYSTEM = system


def _pool_translate(sentence: tuple[str, ...]) -> tuple[str, ...]:
    assert _POOL_SYSTEM is not None
    return _POOL_SYSTEM.translate(sentence)


def translate_corpus(
    sentences: Iterable[Sequence[str]],
    system: TranslationSystem,
    cap: int = DEFAULT_CORPUS_CAP,
    workers: int = 1,
) -> list[tuple[tuple[str, ...], tuple[str, ...]]]:
    """Translate the first `cap` sentences into (source, output) pairs.

    workers > 1 fans sentences out over processes; outputs are reassembled
    in order, so results are identical for every worker count.
    """
    if cap < 0:
        raise ValueError(f"cap must be >= 0, got {cap}")
    todo: list[tuple[str, ...]] = []
    for sent in sentences:
        if len(todo) >= cap:
            break
        todo.append(tuple(sent))
    if workers <= 1 or len(todo) < 2:
        return [(s, system.translate(s)) for s in todo]
    ctx = multiprocessing.get_context("fork")
    chunk = max(1, len(todo) // (workers * 4))
    with ctx.Pool(workers, initializer=_pool_init, initargs=(system,)) as pool:
        outputs = pool.map(_pool_translate, todo, chunksize=chunk)
    return list(zip(todo, outputs))
