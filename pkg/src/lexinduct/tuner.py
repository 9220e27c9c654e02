"""Unsupervised weight tuning for the decoder.

No references exist, so the objective combines three proxies over a dev
sample: a cyclic consistency loss (one minus the smoothed sentence BLEU of
the round-trip translation against the original), a fluency loss (mean
per-token negative log probability of the forward output under the target
language model, end symbol counted), and a length loss (mean absolute log
ratio of output to input length, lengths floored at 0.5 so empty outputs
stay finite). Weights are tuned coordinate-wise by golden-section search,
keeping a new value only when it strictly improves the combined objective.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .decoder import FEATURE_NAMES, FeatureWeights, TranslationSystem

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class TunerConfig:
    cyclic_weight: float = 1.0
    lm_weight: float = 0.1
    length_weight: float = 0.5
    sweeps: int = 3
    golden_iterations: int = 6
    weight_lo: float = 0.0
    weight_hi: float = 2.0

    def __post_init__(self) -> None:
        if self.sweeps < 0:
            raise ValueError("sweeps must be >= 0")
        if not self.weight_lo < self.weight_hi:
            raise ValueError("weight range is empty")


@dataclass(frozen=True)
class TuningObjective:
    cyclic: float
    lm: float
    length: float
    combined: float


def sentence_bleu(hypothesis: Sequence[str], reference: Sequence[str], max_order: int = 4) -> float:
    """Smoothed sentence BLEU: every n-gram precision gets +1 on both sides,
    with the usual brevity penalty. Returns a value in [0, 1]."""
    hyp = tuple(hypothesis)
    ref = tuple(reference)
    if not hyp:
        return 0.0
    log_precision = 0.0
    for n in range(1, max_order + 1):
        hyp_grams = Counter(hyp[i : i + n] for i in range(len(hyp) - n + 1))
        ref_grams = Counter(ref[i : i + n] for i in range(len(ref) - n + 1))
        match = sum(min(c, ref_grams[g]) for g, c in hyp_grams.items())
        total = max(0, len(hyp) - n + 1)
        log_precision += math.log((match + 1.0) / (total + 1.0))
    bleu = math.exp(log_precision / max_order)
    if len(hyp) < len(ref):
        bleu *= math.exp(1.0 - len(ref) / len(hyp))
    return bleu


def objective(
    weights: FeatureWeights,
    dev: Sequence[Sequence[str]],
    forward: TranslationSystem,
    backward: TranslationSystem,
    config: TunerConfig = TunerConfig(),
) -> TuningObjective:
    """Evaluate the candidate weights on the dev sample.

    `forward` is re-bound to `weights`; `backward` keeps its own fixed
    weights (its translation cache persists across calls by design).
    """
    if not dev:
        raise ValueError("empty dev sample")
    fwd = forward.with_weights(weights)
    cyclic = lm_loss = length = 0.0
    for sent in dev:
        out = fwd.translate(sent)
        back = backward.translate(out)
        cyclic += 1.0 - sentence_bleu(back, sent)
        lm_loss += -forward.lm.log_prob(out) / (len(out) + 1)
        length += abs(math.log(max(len(out), 0.5) / max(len(sent), 0.5)))
    n = len(dev)
    cyclic /= n
    lm_loss /= n
    length /= n
    combined = (
        config.cyclic_weight * cyclic
        + config.lm_weight * lm_loss
        + config.length_weight * length
    )
    return TuningObjective(cyclic, lm_loss, length, combined)


def _golden_min(fn, lo: float, hi: float, iterations: int) -> tuple[float, float]:
    """Golden-section minimization returning the best *evaluated* point."""
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    best_x, best_f = (c, fc) if fc <= fd else (d, fd)
    for _ in range(iterations):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = fn(c)
            if fc < best_f:
                best_x, best_f = c, fc
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = fn(d)
            if fd < best_f:
                best_x, best_f = d, fd
    return best_x, best_f


def tune(
    initial: FeatureWeights,
    dev: Sequence[Sequence[str]],
    forward: TranslationSystem,
    backward: TranslationSystem,
    config: TunerConfig = TunerConfig(),
) -> FeatureWeights:
    """Coordinate-wise golden-section tuning over [weight_lo, weight_hi].

    Each weight is searched in turn for `sweeps` full passes; a candidate
    value is accepted only when it strictly lowers the combined objective,
    so the result is never worse than `initial` on the dev sample.
    """
    dev = [tuple(s) for s in dev]
    cache: dict[tuple, float] = {}

    def combined(weights: FeatureWeights) -> float:
        key = tuple(weights.as_array())
        if key not in cache:
            cache[key] = objective(weights, dev, forward, backward, config).combined
        return cache[key]

    current = initial
    best = combined(current)
    for _ in range(config.sweeps):
        for name in FEATURE_NAMES:
            x, fx = _golden_min(
                lambda v: combined(current.replace(name, v)),
                config.weight_lo,
                config.weight_hi,
                config.golden_iterations,
            )
            if fx < best:
                current = current.replace(name, x)
                best = fx
    return current
