"""Command-line interface: argument handling, exit codes, output formats."""

import subprocess
import sys

import pytest

from conftest import make_micro_cipher, micro_config
from lexinduct import InducedDictionary, load_lm, read_links, write_config
from lexinduct.cli import main


def run_cli(argv):
    return main(list(argv))


class TestParser:
    def test_no_subcommand_exits_2(self):
        with pytest.raises(SystemExit) as info:
            run_cli([])
        assert info.value.code == 2

    def test_pipeline_requires_config(self):
        with pytest.raises(SystemExit) as info:
            run_cli(["pipeline"])
        assert info.value.code == 2

    def test_unknown_method_rejected_by_parser(self, tmp_path):
        with pytest.raises(SystemExit) as info:
            run_cli(["induce", "--method", "psychic", "--src-emb", "a", "--tgt-emb", "b",
                     "--queries", "q", "--out", str(tmp_path / "o")])
        assert info.value.code == 2

    def test_console_script_help(self):
        proc = subprocess.run(["lexinduct", "--help"], capture_output=True)
        assert proc.returncode == 0
        assert b"usage" in proc.stdout

    def test_module_invocation(self, tmp_path):
        pred = tmp_path / "pred.tsv"
        pred.write_text("a\tx\t0.9\n", encoding="utf-8")
        gold = tmp_path / "gold.txt"
        gold.write_text("a x\n", encoding="utf-8")
        proc = subprocess.run(
            [sys.executable, "-m", "lexinduct.cli", "evaluate",
             "--pred", str(pred), "--gold", str(gold)],
            capture_output=True,
        )
        assert proc.returncode == 0
        assert proc.stdout == b"P@1 1.000000 OOV 0.000000\n"


def write_embeddings(path, rows):
    dim = len(next(iter(rows.values())))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(rows)} {dim}\n")
        for token, vector in rows.items():
            fh.write(token + " " + " ".join(repr(v) for v in vector) + "\n")


class TestInduce:
    @pytest.fixture()
    def hub_files(self, tmp_path):
        write_embeddings(tmp_path / "src.vec", {"x000": [1.0, 0.0], "x001": [0.95, 0.31225]})
        write_embeddings(tmp_path / "tgt.vec", {"hub": [0.99, 0.14], "tail": [0.31, 0.95]})
        (tmp_path / "queries.txt").write_text("x000\nx001\n", encoding="utf-8")
        return tmp_path

    def run_method(self, root, method, *extra):
        out = root / f"{method}.tsv"
        code = run_cli(["induce", "--method", method,
                        "--src-emb", str(root / "src.vec"),
                        "--tgt-emb", str(root / "tgt.vec"),
                        "--queries", str(root / "queries.txt"),
                        "--out", str(out), *extra])
        assert code == 0
        return InducedDictionary.read(out)

    def test_inverted_nn_splits_the_hub(self, hub_files):
        induced = self.run_method(hub_files, "inv-nn", "--top", "1")
        assert induced.top1("x000") == "hub"
        assert induced.top1("x001") == "tail"
        assert all(len(cands) == 1 for cands in induced.entries.values())

    def test_csls_small_k_keeps_the_hub(self, hub_files):
        induced = self.run_method(hub_files, "csls", "--csls-k", "1")
        assert induced.top1("x000") == "hub"
        assert induced.top1("x001") == "hub"

    def test_top_zero_keeps_all_candidates(self, hub_files):
        induced = self.run_method(hub_files, "nn", "--top", "0")
        assert all(len(cands) == 2 for cands in induced.entries.values())

    def test_missing_embedding_file_exits_1(self, hub_files, capsys):
        code = run_cli(["induce", "--method", "nn",
                        "--src-emb", str(hub_files / "absent.vec"),
                        "--tgt-emb", str(hub_files / "tgt.vec"),
                        "--queries", str(hub_files / "queries.txt"),
                        "--out", str(hub_files / "o.tsv")])
        assert code == 1
        assert capsys.readouterr().err.startswith("error:")


class TestTrainLm:
    def test_order_flag_overrides_default(self, tmp_path):
        corpus = tmp_path / "c.txt"
        corpus.write_text("a b a b\nb a b a\n", encoding="utf-8")
        out = tmp_path / "lm.txt"
        assert run_cli(["train-lm", "--input", str(corpus), "--out", str(out),
                        "--order", "2"]) == 0
        model = load_lm(out)
        assert model.order == 2
        assert "a" in model.vocab

    def test_config_supplies_order(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("[lm]\norder = 3\n", encoding="utf-8")
        corpus = tmp_path / "c.txt"
        corpus.write_text("a b c a b c\n", encoding="utf-8")
        out = tmp_path / "lm.txt"
        assert run_cli(["train-lm", "--config", str(cfg),
                        "--input", str(corpus), "--out", str(out)]) == 0
        assert load_lm(out).order == 3

    def test_empty_corpus_exits_1(self, tmp_path, capsys):
        corpus = tmp_path / "c.txt"
        corpus.write_text("", encoding="utf-8")
        code = run_cli(["train-lm", "--input", str(corpus), "--out", str(tmp_path / "lm.txt")])
        assert code == 1
        assert "error:" in capsys.readouterr().err


class TestEvaluate:
    def test_report_format_is_exact(self, tmp_path, capsys):
        (tmp_path / "pred.tsv").write_text("a\tx\t0.9\nb\tz\t0.8\n", encoding="utf-8")
        (tmp_path / "gold.txt").write_text("a x\nb y\n", encoding="utf-8")
        assert run_cli(["evaluate", "--pred", str(tmp_path / "pred.tsv"),
                        "--gold", str(tmp_path / "gold.txt")]) == 0
        assert capsys.readouterr().out == "P@1 0.500000 OOV 0.000000\n"

    def test_missing_pred_exits_1(self, tmp_path, capsys):
        (tmp_path / "gold.txt").write_text("a x\n", encoding="utf-8")
        code = run_cli(["evaluate", "--pred", str(tmp_path / "absent.tsv"),
                        "--gold", str(tmp_path / "gold.txt")])
        assert code == 1
        assert capsys.readouterr().err.startswith("error:")


class TestAlign:
    def copy_corpus(self, tmp_path, lines=30):
        text = "\n".join("w%d w%d w%d" % (i % 7, (i + 2) % 7, (i + 5) % 7)
                         for i in range(lines)) + "\n"
        src = tmp_path / "src.txt"
        tgt = tmp_path / "tgt.txt"
        src.write_text(text, encoding="utf-8")
        tgt.write_text(text, encoding="utf-8")
        return src, tgt

    def test_all_three_outputs(self, tmp_path):
        src, tgt = self.copy_corpus(tmp_path)
        fwd, rev, sym = (tmp_path / n for n in ("f.txt", "r.txt", "s.txt"))
        assert run_cli(["align", "--src", str(src), "--tgt", str(tgt),
                        "--out-fwd", str(fwd), "--out-rev", str(rev),
                        "--out-sym", str(sym)]) == 0
        links = read_links(sym)
        assert len(links) == 30
        # Copying a corpus onto itself aligns on the diagonal.
        assert links[0] == {(0, 0), (1, 1), (2, 2)}

    def test_no_output_flags_exits_1(self, tmp_path, capsys):
        src, tgt = self.copy_corpus(tmp_path)
        assert run_cli(["align", "--src", str(src), "--tgt", str(tgt)]) == 1
        assert "at least one" in capsys.readouterr().err

    def test_sym_output_needs_symmetrization(self, tmp_path, capsys):
        src, tgt = self.copy_corpus(tmp_path)
        code = run_cli(["align", "--src", str(src), "--tgt", str(tgt),
                        "--out-sym", str(tmp_path / "s.txt"), "--symmetrize", "none"])
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_length_mismatch_exits_1(self, tmp_path, capsys):
        src, tgt = self.copy_corpus(tmp_path)
        with open(tgt, "a", encoding="utf-8") as fh:
            fh.write("w0 w1\n")
        code = run_cli(["align", "--src", str(src), "--tgt", str(tgt),
                        "--out-fwd", str(tmp_path / "f.txt")])
        assert code == 1
        assert "lines" in capsys.readouterr().err


class TestStageChain:
    """Drive every stage subcommand over the micro cipher benchmark."""

    def test_end_to_end(self, tmp_path, capsys):
        fx = make_micro_cipher(tmp_path / "data")
        fwd, rev = tmp_path / "fwd.txt", tmp_path / "rev.txt"
        tau = tmp_path / "tau.txt"
        assert run_cli(["phrase-table",
                        "--src-corpus", str(fx.src_corpus),
                        "--tgt-corpus", str(fx.tgt_corpus),
                        "--src-emb", str(fx.src_embeddings),
                        "--tgt-emb", str(fx.tgt_embeddings),
                        "--out-fwd", str(fwd), "--out-rev", str(rev),
                        "--out-tau", str(tau),
                        "--vocab-size", "25", "--ngram-cap", "300",
                        "--candidates", "10"]) == 0
        assert fwd.exists() and rev.exists()
        assert tau.read_text(encoding="utf-8").startswith("src2tgt ")

        lm_tgt, lm_src = tmp_path / "lm_tgt.txt", tmp_path / "lm_src.txt"
        assert run_cli(["train-lm", "--input", str(fx.tgt_corpus), "--out", str(lm_tgt)]) == 0
        assert run_cli(["train-lm", "--input", str(fx.src_corpus), "--out", str(lm_src)]) == 0

        weights = tmp_path / "weights.txt"
        assert run_cli(["tune", "--table", str(fwd), "--rev-table", str(rev),
                        "--lm", str(lm_tgt), "--rev-lm", str(lm_src),
                        "--input", str(fx.src_corpus), "--out", str(weights),
                        "--dev-size", "10", "--sweeps", "0",
                        "--beam", "4", "--options-limit", "4"]) == 0
        assert weights.exists()

        synthetic = tmp_path / "synthetic.txt"
        assert run_cli(["translate", "--table", str(fwd), "--lm", str(lm_tgt),
                        "--weights", str(weights),
                        "--input", str(fx.src_corpus), "--out", str(synthetic),
                        "--beam", "4", "--options-limit", "4", "--workers", "1"]) == 0
        produced = synthetic.read_text(encoding="utf-8").splitlines()
        assert len(produced) == 80

        links = tmp_path / "links.txt"
        assert run_cli(["align", "--src", str(fx.src_corpus), "--tgt", str(synthetic),
                        "--out-sym", str(links)]) == 0

        dictionary = tmp_path / "dict.tsv"
        counts = tmp_path / "counts.txt"
        assert run_cli(["extract", "--src", str(fx.src_corpus), "--tgt", str(synthetic),
                        "--links", str(links), "--out", str(dictionary),
                        "--counts", str(counts)]) == 0
        assert counts.exists()

        assert run_cli(["evaluate", "--pred", str(dictionary), "--gold", str(fx.gold)]) == 0
        report = capsys.readouterr().out.strip().split()
        assert report[0] == "P@1" and float(report[1]) >= 0.9

    def test_translate_cap_limits_output(self, tmp_path):
        fx = make_micro_cipher(tmp_path / "data")
        fwd, rev = tmp_path / "fwd.txt", tmp_path / "rev.txt"
        assert run_cli(["phrase-table",
                        "--src-corpus", str(fx.src_corpus),
                        "--tgt-corpus", str(fx.tgt_corpus),
                        "--src-emb", str(fx.src_embeddings),
                        "--tgt-emb", str(fx.tgt_embeddings),
                        "--out-fwd", str(fwd), "--out-rev", str(rev),
                        "--vocab-size", "25", "--ngram-cap", "300",
                        "--candidates", "10"]) == 0
        lm = tmp_path / "lm.txt"
        assert run_cli(["train-lm", "--input", str(fx.tgt_corpus), "--out", str(lm)]) == 0
        out = tmp_path / "capped.txt"
        assert run_cli(["translate", "--table", str(fwd), "--lm", str(lm),
                        "--input", str(fx.src_corpus), "--out", str(out),
                        "--cap", "3", "--beam", "4", "--workers", "1"]) == 0
        assert len(out.read_text(encoding="utf-8").splitlines()) == 3


class TestPipelineCommand:
    def test_success_prints_one_line_per_direction(self, tmp_path, capsys):
        fx = make_micro_cipher(tmp_path / "data")
        config_path = tmp_path / "run.cfg"
        write_config(micro_config(fx, tmp_path / "work"), config_path)
        assert run_cli(["pipeline", "--config", str(config_path)]) == 0
        out = capsys.readouterr().out
        assert out.startswith("src2tgt P@1 ")
        assert float(out.split()[2]) >= 0.9

    def test_without_gold_prints_dictionary_path(self, tmp_path, capsys):
        fx = make_micro_cipher(tmp_path / "data")
        config_path = tmp_path / "run.cfg"
        write_config(micro_config(fx, tmp_path / "work", gold_src2tgt=""), config_path)
        assert run_cli(["pipeline", "--config", str(config_path)]) == 0
        out = capsys.readouterr().out
        assert out.startswith("src2tgt dictionary ")
        assert "dictionary.tsv" in out

    def test_stage_failure_exits_1_and_names_the_stage(self, tmp_path, capsys):
        fx = make_micro_cipher(tmp_path / "data")
        config_path = tmp_path / "run.cfg"
        write_config(
            micro_config(fx, tmp_path / "work", src_corpus=str(tmp_path / "absent.txt")),
            config_path,
        )
        assert run_cli(["pipeline", "--config", str(config_path)]) == 1
        err = capsys.readouterr().err
        assert err.startswith("error:")
        assert "corpus:src" in err

    def test_missing_config_file_exits_1(self, tmp_path, capsys):
        assert run_cli(["pipeline", "--config", str(tmp_path / "absent.cfg")]) == 1
        assert capsys.readouterr().err.startswith("error:")
