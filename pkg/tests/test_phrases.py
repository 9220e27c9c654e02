"""Phrase inventories, embeddings, softmax scoring, temperature fitting,
and phrase-table assembly."""

import math

import numpy as np
import pytest

from lexinduct import (
    EmbeddingStore,
    PhraseInventory,
    PhraseTable,
    PhraseTableEntry,
    ScoredCandidates,
    TemperatureParam,
    build_phrase_inventory,
    build_phrase_store,
    build_phrase_table,
    candidate_sets,
    count_ngrams,
    estimate_temperature,
    floored_probs,
    induce_tables,
    lexical_weight,
    phrase_embedding,
    softmax_scores,
    top1_sample,
    unit_normalize,
    word_translation_table,
)
from lexinduct.phrases import PROB_FLOOR, word_translation_table as _wtt


def unit_store(n, dim, seed, prefix="w"):
    rng = np.random.default_rng(seed)
    vocab = tuple(f"{prefix}{i:03d}" for i in range(n))
    return unit_normalize(EmbeddingStore(vocab, rng.normal(size=(n, dim)).astype(np.float32)))


class TestInventory:
    def test_words_plus_capped_ngrams(self):
        sents = [["a", "b", "a", "b"], ["a", "b", "c"]]
        counts = count_ngrams(sents, 3)
        inv = build_phrase_inventory(counts, vocab_size=10, ngram_cap=1)
        assert ("a",) in inv.phrases and ("c",) in inv.phrases
        bigrams = [p for p in inv.phrases if len(p) == 2]
        trigrams = [p for p in inv.phrases if len(p) == 3]
        assert bigrams == [("a", "b")]
        assert trigrams == [("a", "b", "a")]
        assert inv.phrases[("a", "b")] == 3

    def test_ngram_tie_breaks_ascending(self):
        counts = count_ngrams([["b", "z"], ["a", "z"]], 3)
        inv = build_phrase_inventory(counts, vocab_size=10, ngram_cap=1)
        assert [p for p in inv.phrases if len(p) == 2] == [("a", "z")]

    def test_missing_order_fatal(self):
        counts = count_ngrams([["a", "b"]], 2)
        with pytest.raises(ValueError):
            build_phrase_inventory(counts)

    def test_vocab_truncation_applies(self):
        counts = count_ngrams([["a", "a", "b", "c"]], 3)
        inv = build_phrase_inventory(counts, vocab_size=2, ngram_cap=0)
        assert set(inv.phrases) == {("a",), ("b",)}


class TestPhraseEmbedding:
    def test_single_word_is_its_unit_vector(self):
        words = unit_store(5, 8, 31)
        got = phrase_embedding(("w002",), words)
        np.testing.assert_allclose(got, words.row("w002"), atol=2e-7)

    def test_mean_is_renormalized(self):
        words = unit_store(5, 8, 32)
        got = phrase_embedding(("w000", "w003", "w004"), words)
        mean = words.vectors[words.indices(["w000", "w003", "w004"])].astype(np.float64).mean(0)
        np.testing.assert_allclose(got, mean / np.linalg.norm(mean), atol=2e-7)
        np.testing.assert_allclose(np.linalg.norm(got.astype(np.float64)), 1.0, atol=1e-6)

    def test_errors(self):
        words = unit_store(3, 4, 33)
        with pytest.raises(ValueError):
            phrase_embedding((), words)
        with pytest.raises(ValueError):
            phrase_embedding(("nope",), words)


class TestPhraseStore:
    def test_matches_per_phrase_embedding(self):
        words = unit_store(6, 5, 34)
        inv = PhraseInventory({
            ("w000",): 4,
            ("w001",): 3,
            ("w002", "w001"): 2,
            ("w000", "w003", "w005"): 1,
        })
        store = build_phrase_store(inv, words)
        assert store.vocab == tuple(sorted(" ".join(p) for p in inv.phrases))
        for phrase in inv.phrases:
            np.testing.assert_allclose(
                store.row(" ".join(phrase)), phrase_embedding(phrase, words), atol=2e-7
            )

    def test_oov_phrases_dropped(self):
        words = unit_store(3, 4, 35)
        inv = PhraseInventory({("w000",): 2, ("w000", "zzz"): 1})
        store = build_phrase_store(inv, words)
        assert store.vocab == ("w000",)

    def test_nothing_covered_fatal(self):
        words = unit_store(2, 4, 36)
        with pytest.raises(ValueError):
            build_phrase_store(PhraseInventory({("zzz",): 1}), words)


class TestSoftmaxScores:
    def test_pinned_two_candidate_value(self):
        probs = softmax_scores(np.array([0.8, 0.4]), 0.2)
        np.testing.assert_allclose(probs[0], 0.8808, atol=1e-4)
        np.testing.assert_allclose(probs.sum(), 1.0, atol=1e-9)

    def test_sums_to_one_across_shapes_and_temperatures(self):
        rng = np.random.default_rng(37)
        for _ in range(40):
            n = int(rng.integers(1, 30))
            cos = rng.uniform(-1.0, 1.0, size=n)
            tau = float(rng.uniform(0.01, 5.0))
            probs = softmax_scores(cos, tau)
            np.testing.assert_allclose(probs.sum(), 1.0, atol=1e-9)
            assert (probs >= 0.0).all()

    def test_shift_invariance(self):
        cos = np.array([0.3, -0.2, 0.9])
        np.testing.assert_allclose(
            softmax_scores(cos, 0.5), softmax_scores(cos + 123.0, 0.5), atol=1e-12
        )

    def test_extreme_temperature_is_stable(self):
        probs = softmax_scores(np.array([1.0, 0.999, -1.0]), 1e-4)
        assert np.isfinite(probs).all()
        np.testing.assert_allclose(probs.sum(), 1.0, atol=1e-9)

    def test_temperature_must_be_positive(self):
        with pytest.raises(ValueError):
            softmax_scores(np.array([1.0]), 0.0)
        with pytest.raises(ValueError):
            TemperatureParam(-1.0)


class TestFlooredProbs:
    def test_floor_applied_and_renormalized(self):
        probs = floored_probs(np.array([1.0, 0.0, 0.0]), floor=0.1)
        np.testing.assert_allclose(probs.sum(), 1.0, atol=1e-12)
        assert (probs >= 0.1 / 1.2 - 1e-12).all()

    def test_noop_above_floor(self):
        probs = np.array([0.6, 0.4])
        np.testing.assert_allclose(floored_probs(probs), probs, atol=1e-12)


def make_candidates(entries):
    """entries: {query: [(target, cosine), ...]} -> candidate-set dict."""
    return {
        q: ScoredCandidates(q, tuple((t, float(s)) for t, s in cands))
        for q, cands in entries.items()
    }


def reference_nll(cands, pairs, tau):
    total = 0.0
    for generated, generator in pairs:
        cand = cands[generator]
        scores = {t: s for t, s in cand.candidates}
        row = np.array([s for _, s in cand.candidates]) / tau
        top = row.max()
        lse = top + math.log(np.exp(row - top).sum())
        total += lse - scores[generated] / tau
    return total


class TestEstimateTemperature:
    def pairs_and_cands(self, seed, n_queries=12, n_cands=8):
        rng = np.random.default_rng(seed)
        entries = {}
        pairs = []
        for i in range(n_queries):
            q = f"q{i:02d}"
            cos = np.sort(rng.uniform(-1.0, 1.0, size=n_cands))[::-1]
            cands = [(f"c{i:02d}_{j}", cos[j]) for j in range(n_cands)]
            entries[q] = cands
            pairs.append((cands[int(rng.integers(0, 3))][0], q))
        return make_candidates(entries), pairs

    def test_nll_matches_dense_grid_minimum(self):
        for seed in (40, 41, 42):
            cands, pairs = self.pairs_and_cands(seed)
            fitted = estimate_temperature(cands, pairs)
            grid = np.exp(np.linspace(math.log(1e-3), math.log(10.0), 2001))
            grid_best = min(reference_nll(cands, pairs, t) for t in grid)
            assert reference_nll(cands, pairs, fitted.tau) <= grid_best + 1e-3

    def test_pairs_outside_candidate_sets_skipped(self, caplog):
        cands, pairs = self.pairs_and_cands(43)
        with caplog.at_level("WARNING"):
            with_junk = estimate_temperature(cands, pairs + [("zz", "q00"), ("c", "nope")])
        clean = estimate_temperature(cands, pairs)
        np.testing.assert_allclose(with_junk.tau, clean.tau, rtol=1e-12)
        assert any("skipped 2 pairs" in rec.message for rec in caplog.records)

    def test_no_usable_pairs_fatal(self):
        cands, _ = self.pairs_and_cands(44)
        with pytest.raises(ValueError):
            estimate_temperature(cands, [("zz", "nope")])


class TestWordTableAndLexicalWeight:
    def test_hand_lexical_weight(self):
        table = {"a": {"x": 0.9, "y": 0.1}, "b": {"x": 0.2, "y": 0.7}}
        got = lexical_weight(("a", "b"), ("x", "y"), table)
        np.testing.assert_allclose(got, 0.63, atol=1e-12)

    def test_uncovered_word_contributes_floor(self):
        table = {"a": {"x": 0.5}}
        got = lexical_weight(("a",), ("x", "unseen"), table, floor=1e-7)
        np.testing.assert_allclose(got, 0.5 * 1e-7, atol=1e-20)

    def test_word_table_rows_are_floored_softmaxes(self):
        cands = make_candidates({"a": [("x", 0.9), ("y", 0.1)]})
        table = word_translation_table(cands, TemperatureParam(0.5))
        want = floored_probs(softmax_scores(np.array([0.9, 0.1]), 0.5))
        np.testing.assert_allclose([table["a"]["x"], table["a"]["y"]], want, atol=1e-12)
        assert _wtt is word_translation_table


class TestTop1Sample:
    def test_full_when_sample_large(self):
        cands = make_candidates({"a": [("x", 0.9)], "b": [("y", 0.8)]})
        assert top1_sample(cands, sample_size=10) == [("a", "x"), ("b", "y")]

    def test_seeded_subsample_is_deterministic(self):
        cands = make_candidates({f"q{i}": [(f"t{i}", 0.5)] for i in range(50)})
        a = top1_sample(cands, sample_size=10, seed=3)
        b = top1_sample(cands, sample_size=10, seed=3)
        assert a == b and len(a) == 10
        assert top1_sample(cands, sample_size=10, seed=4) != a


class TestPhraseTable:
    def entry(self, src="a", tgt="x", **kw):
        values = dict(phi_fwd=0.5, phi_bwd=0.5, lex_fwd=0.5, lex_bwd=0.5)
        values.update(kw)
        return PhraseTableEntry(src, tgt, **values)

    def test_probability_range_enforced(self):
        with pytest.raises(ValueError):
            self.entry(phi_fwd=0.0)
        with pytest.raises(ValueError):
            self.entry(lex_bwd=1.5)
        self.entry(phi_fwd=1.0)

    def test_options_and_max_source_words(self):
        table = PhraseTable({
            "a": (self.entry(),),
            "b c d": (self.entry(src="b c d", tgt="y z"),),
        })
        assert table.options(["a"]) == table.entries["a"]
        assert table.options(["b", "c", "d"])[0].tgt == "y z"
        assert table.options(["nope"]) == ()
        assert table.max_source_words() == 3
        assert len(table) == 2

    def test_write_read_rewrite_is_byte_stable(self, tmp_path):
        rng = np.random.default_rng(45)
        entries = {}
        for i in range(20):
            src = f"s{i:02d}"
            rows = []
            for j in range(4):
                probs = rng.uniform(1e-7, 1.0, size=4)
                rows.append(PhraseTableEntry(src, f"t{j}", *probs))
            rows.sort(key=lambda e: (-e.phi_fwd, e.tgt))
            entries[src] = tuple(rows)
        table = PhraseTable(entries)
        p1, p2 = tmp_path / "a.txt", tmp_path / "b.txt"
        table.write(p1)
        PhraseTable.read(p1).write(p2)
        assert p1.read_bytes() == p2.read_bytes()


class TestBuildPhraseTable:
    def test_probabilities_and_fallbacks(self):
        tau = TemperatureParam(0.5)
        fwd = make_candidates({"a": [("x", 0.9), ("y", 0.3)]})
        rev = make_candidates({"x": [("a", 0.9)], "y": [("b", 0.4)]})
        wt_fwd = word_translation_table(fwd, tau)
        wt_rev = word_translation_table(rev, tau)
        table = build_phrase_table(fwd, rev, tau, tau, wt_fwd, wt_rev)
        opts = table.options(["a"])
        assert [e.tgt for e in opts] == ["x", "y"]
        want = floored_probs(softmax_scores(np.array([0.9, 0.3]), 0.5))
        np.testing.assert_allclose([e.phi_fwd for e in opts], want, atol=1e-12)
        # x's reverse candidates include a; y's do not, so it falls to the floor.
        assert opts[0].phi_bwd > PROB_FLOOR
        np.testing.assert_allclose(opts[1].phi_bwd, PROB_FLOOR, atol=1e-15)

    def test_forward_probs_sum_to_one_per_source(self):
        tau = TemperatureParam(1.0)
        fwd = make_candidates({"a": [("x", 0.8), ("y", 0.2), ("z", -0.5)]})
        rev = make_candidates({"x": [("a", 0.8)]})
        wt = word_translation_table(fwd, tau)
        table = build_phrase_table(fwd, rev, tau, tau, wt, word_translation_table(rev, tau))
        np.testing.assert_allclose(
            sum(e.phi_fwd for e in table.options(["a"])), 1.0, atol=1e-9
        )


class TestInduceTables:
    def test_end_to_end_shapes_and_normalization(self):
        src = unit_store(12, 6, 46, "s")
        tgt = unit_store(12, 6, 47, "t")
        result = induce_tables(src, tgt, src, tgt, k=5, reverse_sample=8, seed=2)
        assert result.tau_fwd.tau > 0 and result.tau_rev.tau > 0
        assert set(result.table_fwd.entries) == set(src.vocab)
        assert set(result.table_rev.entries) == set(tgt.vocab)
        for phrase in src.vocab:
            opts = result.table_fwd.options([phrase])
            assert len(opts) == 5
            np.testing.assert_allclose(sum(e.phi_fwd for e in opts), 1.0, atol=1e-9)

    def test_deterministic(self):
        src = unit_store(10, 5, 48, "s")
        tgt = unit_store(10, 5, 49, "t")
        a = induce_tables(src, tgt, src, tgt, k=4, reverse_sample=6, seed=3)
        b = induce_tables(src, tgt, src, tgt, k=4, reverse_sample=6, seed=3)
        assert a.tau_fwd.tau == b.tau_fwd.tau
        assert a.table_fwd.entries == b.table_fwd.entries
