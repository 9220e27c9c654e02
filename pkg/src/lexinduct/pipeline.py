"""End-to-end dictionary induction pipeline with cached stages.

Stage graph (language stages run for both languages, direction stages per
requested direction):

    corpus -> inventory -> phrase embeddings -\\
    corpus -> language model                   > tables -> tune -> translate
                                                     -> align -> symmetrize
                                                     -> extract -> dictionary
                                                     -> evaluate

Every stage's inputs are content-addressed: the stage digest is a sha256
over the stage name, its parameters, and the digests of its input files.
A stage whose manifest matches the current digest (and whose outputs are
still intact) is skipped, so a re-run with unchanged inputs recomputes
nothing and a change anywhere upstream invalidates exactly the stages that
depend on it. A lock file keeps two pipeline runs out of one work dir.

Outputs are deterministic for fixed config, inputs, and seeds; the worker
count only affects wall-clock time, never bytes.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .aligner import align_corpus, grow_diag_final_and, read_links, train_ibm2, write_links
from .corpus import Corpus, count_ngrams, load_corpus, sample_sentences, write_corpus
from .decoder import FeatureWeights, TranslationSystem, translate_corpus
from .embeddings import EmbeddingStore, load_cache, load_embeddings, save_cache, unit_normalize
from .evaluation import read_gold, precision_at_1
from .lexicon import (
    InducedDictionary,
    count_extractions,
    dictionary_from_counts,
    read_extracted_counts,
    write_extracted_counts,
)
from .lm import load_lm, save_lm, train_lm
from .phrases import PhraseInventory, PhraseTable, build_phrase_inventory, build_phrase_store, induce_tables
from .tuner import TunerConfig, tune

log = logging.getLogger(__name__)

MANIFEST_VERSION = 1
WORK_DIR_ENV = "LEXINDUCT_WORK_DIR"
LOCK_NAME = ".lock"

DIRECTIONS = ("src2tgt", "tgt2src")


@dataclass(frozen=True)
class PipelineConfig:
    """Everything a pipeline run needs, round-trippable through a flat
    "key = value" config file with one section per module."""

    src_corpus: str = ""
    tgt_corpus: str = ""
    src_embeddings: str = ""
    tgt_embeddings: str = ""
    work_dir: str = ""
    gold_src2tgt: str = ""
    gold_tgt2src: str = ""
    direction: str = "src2tgt"
    workers: int = 1
    lowercase: bool = True
    aggressive_hyphens: bool = True
    vocab_size: int = 200_000
    ngram_cap: int = 400_000
    candidates: int = 100
    reverse_sample: int = 10_000
    phrase_seed: int = 13
    lm_order: int = 5
    lm_discount: float = 0.75
    beam: int = 50
    distortion_limit: int = 6
    options_limit: int = 0
    corpus_cap: int = 10_000_000
    dev_size: int = 2000
    dev_seed: int = 42
    sweeps: int = 3
    golden_iterations: int = 6
    cyclic_weight: float = 1.0
    lm_weight: float = 0.1
    length_weight: float = 0.5
    weight_lo: float = 0.0
    weight_hi: float = 2.0
    align_iterations: int = 5
    align_tension: float = 4.0
    align_null_prob: float = 0.08
    align_grad_steps: int = 8
    max_phrase_len: int = 3
    denominator: str = "filtered"

    def __post_init__(self) -> None:
        if self.direction not in DIRECTIONS + ("both",):
            raise ValueError(f"direction must be src2tgt, tgt2src, or both, got {self.direction!r}")
        for name in (
            "workers", "vocab_size", "ngram_cap", "candidates", "reverse_sample",
            "lm_order", "beam", "corpus_cap", "dev_size", "golden_iterations",
            "align_iterations", "max_phrase_len",
        ):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.sweeps < 0:
            raise ValueError(f"sweeps must be >= 0, got {self.sweeps}")
        if self.options_limit < 0:
            raise ValueError(f"options_limit must be >= 0 (0 = unlimited), got {self.options_limit}")
        if self.distortion_limit < -1:
            raise ValueError(f"distortion_limit must be >= -1 (-1 = unlimited), got {self.distortion_limit}")
        if not (0.0 < self.lm_discount < 1.0):
            raise ValueError(f"lm_discount must lie in (0, 1), got {self.lm_discount}")
        if not (0.0 < self.align_null_prob < 1.0):
            raise ValueError(f"align_null_prob must lie in (0, 1), got {self.align_null_prob}")
        if not self.weight_lo < self.weight_hi:
            raise ValueError("weight range is empty")
        if self.denominator not in ("filtered", "full"):
            raise ValueError(f"denominator must be 'filtered' or 'full', got {self.denominator!r}")

    def directions(self) -> tuple[str, ...]:
        return DIRECTIONS if self.direction == "both" else (self.direction,)


# (section, option, dataclass field, value kind): the single source of
# truth for the config file layout.
_CONFIG_LAYOUT: tuple[tuple[str, str, str, str], ...] = (
    ("paths", "src_corpus", "src_corpus", "str"),
    ("paths", "tgt_corpus", "tgt_corpus", "str"),
    ("paths", "src_embeddings", "src_embeddings", "str"),
    ("paths", "tgt_embeddings", "tgt_embeddings", "str"),
    ("paths", "work_dir", "work_dir", "str"),
    ("paths", "gold_src2tgt", "gold_src2tgt", "str"),
    ("paths", "gold_tgt2src", "gold_tgt2src", "str"),
    ("pipeline", "direction", "direction", "str"),
    ("pipeline", "workers", "workers", "int"),
    ("corpus", "lowercase", "lowercase", "bool"),
    ("corpus", "aggressive_hyphens", "aggressive_hyphens", "bool"),
    ("corpus", "vocab_size", "vocab_size", "int"),
    ("phrases", "ngram_cap", "ngram_cap", "int"),
    ("phrases", "candidates", "candidates", "int"),
    ("phrases", "reverse_sample", "reverse_sample", "int"),
    ("phrases", "seed", "phrase_seed", "int"),
    ("lm", "order", "lm_order", "int"),
    ("lm", "discount", "lm_discount", "float"),
    ("decoder", "beam", "beam", "int"),
    ("decoder", "distortion_limit", "distortion_limit", "int"),
    ("decoder", "options_limit", "options_limit", "int"),
    ("decoder", "corpus_cap", "corpus_cap", "int"),
    ("tuner", "dev_size", "dev_size", "int"),
    ("tuner", "dev_seed", "dev_seed", "int"),
    ("tuner", "sweeps", "sweeps", "int"),
    ("tuner", "golden_iterations", "golden_iterations", "int"),
    ("tuner", "cyclic_weight", "cyclic_weight", "float"),
    ("tuner", "lm_weight", "lm_weight", "float"),
    ("tuner", "length_weight", "length_weight", "float"),
    ("tuner", "weight_lo", "weight_lo", "float"),
    ("tuner", "weight_hi", "weight_hi", "float"),
    ("aligner", "iterations", "align_iterations", "int"),
    ("aligner", "tension", "align_tension", "float"),
    ("aligner", "null_prob", "align_null_prob", "float"),
    ("aligner", "grad_steps", "align_grad_steps", "int"),
    ("lexicon", "max_phrase_len", "max_phrase_len", "int"),
    ("lexicon", "denominator", "denominator", "str"),
)

_SECTION_ORDER = ("paths", "pipeline", "corpus", "phrases", "lm", "decoder", "tuner", "aligner", "lexicon")


def _format_value(value, kind: str) -> str:
    if kind == "bool":
        return "true" if value else "false"
    if kind == "float":
        return repr(value)
    return str(value)


def _parse_value(text: str, kind: str, where: str):
    if kind == "str":
        return text
    if kind == "int":
        try:
            return int(text)
        except ValueError:
            raise ValueError(f"{where}: expected an integer, got {text!r}") from None
    if kind == "float":
        try:
            return float(text)
        except ValueError:
            raise ValueError(f"{where}: expected a number, got {text!r}") from None
    if text not in ("true", "false"):
        raise ValueError(f"{where}: expected true or false, got {text!r}")
    return text == "true"


def write_config(config: PipelineConfig, path: str | Path) -> None:
    """Canonical config file: every key explicit, floats printed via repr so
    read_config(write_config(c)) == c exactly."""
    lines: list[str] = []
    for section in _SECTION_ORDER:
        lines.append(f"[{section}]")
        for sec, opt, field, kind in _CONFIG_LAYOUT:
            if sec == section:
                lines.append(f"{opt} = {_format_value(getattr(config, field), kind)}")
        lines.append("")
    Path(path).write_text("\n".join(lines), encoding="utf-8")


def read_config(path: str | Path) -> PipelineConfig:
    """Parse a config file; unknown sections or keys are fatal, missing keys
    fall back to the defaults."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    with open(path, encoding="utf-8") as fh:
        parser.read_file(fh, source=str(path))
    known = {(sec, opt): (field, kind) for sec, opt, field, kind in _CONFIG_LAYOUT}
    kwargs = {}
    for section in parser.sections():
        if section not in _SECTION_ORDER:
            raise ValueError(f"{path}: unknown section [{section}]")
        for opt, text in parser.items(section):
            if (section, opt) not in known:
                raise ValueError(f"{path}: unknown key {opt!r} in section [{section}]")
            field, kind = known[(section, opt)]
            kwargs[field] = _parse_value(text, kind, f"{path}: [{section}] {opt}")
    return PipelineConfig(**kwargs)


class PipelineStageError(RuntimeError):
    """A stage failed; carries the stage name and its input digests."""

    def __init__(self, stage: str, input_digests: dict[str, str], message: str):
        self.stage = stage
        self.input_digests = dict(input_digests)
        noted = ", ".join(f"{k}={v[:12]}" for k, v in sorted(input_digests.items())) or "none"
        super().__init__(f"stage {stage!r} failed: {message} [input digests: {noted}]")


@dataclass(frozen=True)
class StageRecord:
    name: str
    digest: str
    cached: bool


def _sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


class _Runner:
    """Executes stages, skipping any whose manifest already matches the
    digest of its inputs and parameters."""

    def __init__(self, work_dir: Path):
        self.work_dir = work_dir
        self.manifest_dir = work_dir / "manifests"
        self.manifest_dir.mkdir(parents=True, exist_ok=True)
        self.records: list[StageRecord] = []

    def _manifest_path(self, name: str) -> Path:
        return self.manifest_dir / (name.replace(":", ".") + ".json")

    def run(
        self,
        name: str,
        inputs: Sequence[Path],
        params: dict,
        outputs: Sequence[Path],
        fn: Callable[[], None],
    ) -> bool:
        """Run (or skip) one stage; returns True when it actually ran."""
        digests: dict[str, str] = {}
        ordered: list[str] = []
        for p in inputs:
            if not p.exists():
                digests[str(p)] = "missing"
                raise PipelineStageError(name, digests, f"input file not found: {p}")
            d = _sha256_file(p)
            digests[str(p)] = d
            ordered.append(d)
        payload = json.dumps(
            {"stage": name, "format": MANIFEST_VERSION, "params": params, "inputs": ordered},
            sort_keys=True,
        )
        digest = hashlib.sha256(payload.encode("utf-8")).hexdigest()

        manifest_path = self._manifest_path(name)
        if manifest_path.exists():
            try:
                manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
            except json.JSONDecodeError:
                manifest = {}
            if manifest.get("digest") == digest and self._outputs_intact(manifest, outputs):
                log.info("stage %s: cached", name)
                self.records.append(StageRecord(name, digest, cached=True))
                return False

        log.info("stage %s: running", name)
        for out in outputs:
            out.parent.mkdir(parents=True, exist_ok=True)
        try:
            fn()
        except PipelineStageError:
            raise
        except Exception as exc:
            raise PipelineStageError(name, digests, str(exc)) from exc
        missing = [str(o) for o in outputs if not o.exists()]
        if missing:
            raise PipelineStageError(name, digests, f"stage did not produce {missing[0]}")
        manifest = {
            "stage": name,
            "digest": digest,
            "outputs": {str(o): _sha256_file(o) for o in outputs},
        }
        manifest_path.write_text(json.dumps(manifest, sort_keys=True, indent=1), encoding="utf-8")
        self.records.append(StageRecord(name, digest, cached=False))
        return True

    @staticmethod
    def _outputs_intact(manifest: dict, outputs: Sequence[Path]) -> bool:
        recorded = manifest.get("outputs", {})
        for out in outputs:
            want = recorded.get(str(out))
            if want is None or not out.exists() or _sha256_file(out) != want:
                return False
        return True


class _WorkDirLock:
    """One pipeline instance per work dir, enforced with an exclusive-create
    lock file holding the owner's pid."""

    def __init__(self, work_dir: Path):
        self.path = work_dir / LOCK_NAME

    def __enter__(self) -> "_WorkDirLock":
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise RuntimeError(
                f"work dir {self.path.parent} is locked by another pipeline run"
                f" (remove {self.path} if that run is gone)"
            ) from None
        os.write(fd, f"{os.getpid()}\n".encode("ascii"))
        os.close(fd)
        return self

    def __exit__(self, *exc_info) -> None:
        self.path.unlink(missing_ok=True)


@dataclass
class DirectionResult:
    direction: str
    dictionary_path: Path
    dictionary: InducedDictionary
    p_at_1: float | None = None
    oov_rate: float | None = None
    report_path: Path | None = None


@dataclass
class PipelineResult:
    directions: dict[str, DirectionResult]
    stages: tuple[StageRecord, ...]

    def ran(self) -> list[str]:
        return [r.name for r in self.stages if not r.cached]

    def cached(self) -> list[str]:
        return [r.name for r in self.stages if r.cached]


def _read_tokenized(path: Path) -> Corpus:
    with open(path, encoding="utf-8") as fh:
        sentences = tuple(tuple(line.split()) for line in fh)
    return Corpus(sentences, str(path))


def _write_inventory(inventory: PhraseInventory, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for phrase in sorted(inventory.phrases):
            fh.write(" ".join(phrase) + "\t" + str(inventory.phrases[phrase]) + "\n")


def _read_inventory(path: Path) -> PhraseInventory:
    phrases: dict[tuple[str, ...], int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            key, sep, count = line.rstrip("\n").partition("\t")
            if not sep:
                raise ValueError(f"{path}: line {lineno}: expected phrase<TAB>count")
            phrases[tuple(key.split(" "))] = int(count)
    return PhraseInventory(phrases)


def _word_store(phrases: EmbeddingStore) -> EmbeddingStore:
    """The single-word slice of a phrase store (their vectors are exactly
    the unit word vectors)."""
    keep = [i for i, key in enumerate(phrases.vocab) if " " not in key]
    if not keep:
        raise ValueError("phrase store contains no single-word phrases")
    rows = phrases.vectors[np.array(keep, dtype=np.int64)]
    return EmbeddingStore(tuple(phrases.vocab[i] for i in keep), rows, normalized=True)


def run_pipeline(config: PipelineConfig) -> PipelineResult:
    """Execute every stage the configured direction needs, reusing cached
    stage outputs, and return the induced dictionaries plus evaluation."""
    work_dir_text = os.environ.get(WORK_DIR_ENV) or config.work_dir
    if not work_dir_text:
        raise ValueError(f"config: work_dir is required (or set {WORK_DIR_ENV})")
    for field in ("src_corpus", "tgt_corpus", "src_embeddings", "tgt_embeddings"):
        if not getattr(config, field):
            raise ValueError(f"config: {field} is required")
    work_dir = Path(work_dir_text)
    work_dir.mkdir(parents=True, exist_ok=True)

    options_limit = config.options_limit or None

    with _WorkDirLock(work_dir):
        runner = _Runner(work_dir)
        langs = {
            "src": (Path(config.src_corpus), Path(config.src_embeddings)),
            "tgt": (Path(config.tgt_corpus), Path(config.tgt_embeddings)),
        }
        tokenized: dict[str, Path] = {}
        phrase_npz: dict[str, Path] = {}
        lm_paths: dict[str, Path] = {}

        for lang, (raw_corpus, raw_embeddings) in langs.items():
            ldir = work_dir / lang
            tok = ldir / "corpus.txt"
            tokenized[lang] = tok

            def corpus_stage(raw=raw_corpus, out=tok):
                write_corpus(load_corpus(raw, config.aggressive_hyphens, config.lowercase), out)

            runner.run(
                f"corpus:{lang}",
                [raw_corpus],
                {"lowercase": config.lowercase, "aggressive_hyphens": config.aggressive_hyphens},
                [tok],
                corpus_stage,
            )

            inv = ldir / "inventory.txt"

            def inventory_stage(tok=tok, out=inv):
                counts = count_ngrams(_read_tokenized(tok), 3)
                _write_inventory(
                    build_phrase_inventory(counts, config.vocab_size, config.ngram_cap), out
                )

            runner.run(
                f"inventory:{lang}",
                [tok],
                {"vocab_size": config.vocab_size, "ngram_cap": config.ngram_cap},
                [inv],
                inventory_stage,
            )

            npz = ldir / "phrases.npz"
            phrase_npz[lang] = npz

            def phrases_stage(inv=inv, raw=raw_embeddings, out=npz):
                words = unit_normalize(load_embeddings(raw))
                save_cache(build_phrase_store(_read_inventory(inv), words), out)

            runner.run(f"phrases:{lang}", [inv, raw_embeddings], {}, [npz], phrases_stage)

            lm_out = ldir / "lm.txt"
            lm_paths[lang] = lm_out

            def lm_stage(tok=tok, out=lm_out):
                save_lm(train_lm(_read_tokenized(tok), config.lm_order, config.lm_discount), out)

            runner.run(
                f"lm:{lang}",
                [tok],
                {"order": config.lm_order, "discount": config.lm_discount},
                [lm_out],
                lm_stage,
            )

        table_paths = {d: work_dir / d / "phrase_table.txt" for d in DIRECTIONS}
        tau_path = work_dir / "temperatures.txt"

        def tables_stage():
            induced = induce_tables(
                load_cache(phrase_npz["src"]),
                load_cache(phrase_npz["tgt"]),
                _word_store(load_cache(phrase_npz["src"])),
                _word_store(load_cache(phrase_npz["tgt"])),
                k=config.candidates,
                reverse_sample=config.reverse_sample,
                seed=config.phrase_seed,
            )
            induced.table_fwd.write(table_paths["src2tgt"])
            induced.table_rev.write(table_paths["tgt2src"])
            tau_path.write_text(
                f"src2tgt {induced.tau_fwd.tau!r}\ntgt2src {induced.tau_rev.tau!r}\n",
                encoding="utf-8",
            )

        runner.run(
            "tables",
            [phrase_npz["src"], phrase_npz["tgt"]],
            {
                "candidates": config.candidates,
                "reverse_sample": config.reverse_sample,
                "seed": config.phrase_seed,
            },
            [table_paths["src2tgt"], table_paths["tgt2src"], tau_path],
            tables_stage,
        )

        results: dict[str, DirectionResult] = {}
        for direction in config.directions():
            source_lang, target_lang = ("src", "tgt") if direction == "src2tgt" else ("tgt", "src")
            opposite = "tgt2src" if direction == "src2tgt" else "src2tgt"
            ddir = work_dir / direction
            table_path = table_paths[direction]
            weights_path = ddir / "weights.txt"

            decoder_params = {
                "beam": config.beam,
                "distortion_limit": config.distortion_limit,
                "options_limit": config.options_limit,
            }

            def tune_stage(
                table_path=table_path,
                opposite_table=table_paths[opposite],
                lm_fwd=lm_paths[target_lang],
                lm_bwd=lm_paths[source_lang],
                corpus_path=tokenized[source_lang],
                out=weights_path,
            ):
                if config.sweeps == 0:
                    FeatureWeights().write(out)
                    return
                forward = TranslationSystem(
                    PhraseTable.read(table_path), load_lm(lm_fwd), FeatureWeights(),
                    config.beam, config.distortion_limit, options_limit,
                )
                backward = TranslationSystem(
                    PhraseTable.read(opposite_table), load_lm(lm_bwd), FeatureWeights(),
                    config.beam, config.distortion_limit, options_limit,
                )
                dev = sample_sentences(_read_tokenized(corpus_path), config.dev_size, config.dev_seed)
                tuned = tune(
                    FeatureWeights(),
                    list(dev.sentences),
                    forward,
                    backward,
                    TunerConfig(
                        cyclic_weight=config.cyclic_weight,
                        lm_weight=config.lm_weight,
                        length_weight=config.length_weight,
                        sweeps=config.sweeps,
                        golden_iterations=config.golden_iterations,
                        weight_lo=config.weight_lo,
                        weight_hi=config.weight_hi,
                    ),
                )
                tuned.write(out)

            runner.run(
                f"tune:{direction}",
                [table_path, table_paths[opposite], lm_paths[target_lang],
                 lm_paths[source_lang], tokenized[source_lang]],
                {
                    **decoder_params,
                    "dev_size": config.dev_size,
                    "dev_seed": config.dev_seed,
                    "sweeps": config.sweeps,
                    "golden_iterations": config.golden_iterations,
                    "cyclic_weight": config.cyclic_weight,
                    "lm_weight": config.lm_weight,
                    "length_weight": config.length_weight,
                    "weight_lo": config.weight_lo,
                    "weight_hi": config.weight_hi,
                },
                [weights_path],
                tune_stage,
            )

            syn_src = ddir / "synthetic.source.txt"
            syn_tgt = ddir / "synthetic.target.txt"

            def translate_stage(
                table_path=table_path,
                lm_path=lm_paths[target_lang],
                weights_path=weights_path,
                corpus_path=tokenized[source_lang],
                out_src=syn_src,
                out_tgt=syn_tgt,
            ):
                system = TranslationSystem(
                    PhraseTable.read(table_path), load_lm(lm_path),
                    FeatureWeights.read(weights_path),
                    config.beam, config.distortion_limit, options_limit,
                )
                pairs = translate_corpus(
                    _read_tokenized(corpus_path).sentences, system,
                    config.corpus_cap, config.workers,
                )
                with open(out_src, "w", encoding="utf-8") as fs, \
                        open(out_tgt, "w", encoding="utf-8") as ft:
                    for source, output in pairs:
                        fs.write(" ".join(source) + "\n")
                        ft.write(" ".join(output) + "\n")

            # The worker count is execution detail, not behavior: it stays
            # out of the stage digest.
            runner.run(
                f"translate:{direction}",
                [table_path, lm_paths[target_lang], weights_path, tokenized[source_lang]],
                {**decoder_params, "corpus_cap": config.corpus_cap},
                [syn_src, syn_tgt],
                translate_stage,
            )

            links_fwd = ddir / "links.forward.txt"
            links_rev = ddir / "links.reverse.txt"

            def align_stage(src=syn_src, tgt=syn_tgt, out_fwd=links_fwd, out_rev=links_rev):
                pairs = list(zip(_read_tokenized(src).sentences, _read_tokenized(tgt).sentences))
                forward = train_ibm2(
                    pairs, config.align_iterations, config.align_tension,
                    config.align_null_prob, config.align_grad_steps,
                )
                write_links(align_corpus(forward, pairs), out_fwd)
                flipped = [(t, s) for s, t in pairs]
                reverse = train_ibm2(
                    flipped, config.align_iterations, config.align_tension,
                    config.align_null_prob, config.align_grad_steps,
                )
                write_links(
                    [{(j, i) for i, j in links} for links in align_corpus(reverse, flipped)],
                    out_rev,
                )

            runner.run(
                f"align:{direction}",
                [syn_src, syn_tgt],
                {
                    "iterations": config.align_iterations,
                    "tension": config.align_tension,
                    "null_prob": config.align_null_prob,
                    "grad_steps": config.align_grad_steps,
                },
                [links_fwd, links_rev],
                align_stage,
            )

            links_sym = ddir / "links.txt"

            def symmetrize_stage(fwd=links_fwd, rev=links_rev, out=links_sym):
                forward = read_links(fwd)
                reverse = read_links(rev)
                if len(forward) != len(reverse):
                    raise ValueError("directional link files differ in length")
                write_links([grow_diag_final_and(a, b) for a, b in zip(forward, reverse)], out)

            runner.run(f"symmetrize:{direction}", [links_fwd, links_rev], {}, [links_sym], symmetrize_stage)

            counts_path = ddir / "extract_counts.txt"

            def extract_stage(src=syn_src, tgt=syn_tgt, links=links_sym, out=counts_path):
                bitext = list(zip(_read_tokenized(src).sentences, _read_tokenized(tgt).sentences))
                counts = count_extractions(bitext, read_links(links), config.max_phrase_len)
                write_extracted_counts(counts, out)

            runner.run(
                f"extract:{direction}",
                [syn_src, syn_tgt, links_sym],
                {"max_phrase_len": config.max_phrase_len},
                [counts_path],
                extract_stage,
            )

            dict_path = ddir / "dictionary.tsv"

            def dictionary_stage(counts=counts_path, out=dict_path):
                dictionary_from_counts(read_extracted_counts(counts), config.denominator).write(out)

            runner.run(
                f"dictionary:{direction}",
                [counts_path],
                {"denominator": config.denominator},
                [dict_path],
                dictionary_stage,
            )

            gold_path = config.gold_src2tgt if direction == "src2tgt" else config.gold_tgt2src
            report_path: Path | None = None
            p_at_1 = oov_rate = None
            if gold_path:
                report_path = ddir / "report.txt"

                def evaluate_stage(pred=dict_path, gold=Path(gold_path), out=report_path):
                    score, oov = precision_at_1(InducedDictionary.read(pred), read_gold(gold))
                    out.write_text(f"P@1 {score:.6f} OOV {oov:.6f}\n", encoding="utf-8")

                runner.run(
                    f"evaluate:{direction}", [dict_path, Path(gold_path)], {}, [report_path], evaluate_stage
                )
                parts = report_path.read_text(encoding="utf-8").split()
                p_at_1, oov_rate = float(parts[1]), float(parts[3])

            results[direction] = DirectionResult(
                direction=direction,
                dictionary_path=dict_path,
                dictionary=InducedDictionary.read(dict_path),
                p_at_1=p_at_1,
                oov_rate=oov_rate,
                report_path=report_path,
            )

        return PipelineResult(directions=results, stages=tuple(runner.records))
