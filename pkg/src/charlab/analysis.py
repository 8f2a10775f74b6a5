"""Downstream analyses: best/worst selection, specificity histograms,
char-OOV bucketing, and the vocabulary-size sweep."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from . import model as nc
from .annostore import CATEGORIES, Span
from .corpus import ParallelCorpus, Sentence
from .metrics import bleu, edit_distance, length_ratio
from .unkrep import ReplacementPolicy, unk_replace_identity
from .vocab import CharVocab, build_char_vocab, char_oov_count, unk_fraction


@dataclass(frozen=True)
class TranslationRecord:
    record_id: int
    source: Sentence
    reference: Sentence
    hypothesis: Sentence
    distance: float  # normalized edit distance hypothesis vs reference
    attention: Optional[np.ndarray] = None


def make_record(
    record_id: int,
    source: Sentence | str,
    reference: Sentence | str,
    hypothesis: Sentence | str,
    unit: str = "token",
    attention: Optional[np.ndarray] = None,
) -> TranslationRecord:
    src = source if isinstance(source, Sentence) else Sentence(source)
    ref = reference if isinstance(reference, Sentence) else Sentence(reference)
    hyp = hypothesis if isinstance(hypothesis, Sentence) else Sentence(hypothesis)
    h = hyp.chars if unit == "char" else hyp.tokens
    r = ref.chars if unit == "char" else ref.tokens
    _, norm = edit_distance(h, r)
    return TranslationRecord(
        record_id=record_id,
        source=src,
        reference=ref,
        hypothesis=hyp,
        distance=norm,
        attention=attention,
    )


def select_extremes(
    records: Sequence[TranslationRecord], k: int = 100
) -> tuple[list[TranslationRecord], list[TranslationRecord]]:
    """k lowest-distance records (best) and k highest (worst).

    Ties always break on record id, so the split is stable across runs.
    """
    if k > len(records):
        raise ValueError(f"k={k} exceeds {len(records)} records")
    best = sorted(records, key=lambda r: (r.distance, r.record_id))[:k]
    worst = sorted(records, key=lambda r: (-r.distance, r.record_id))[:k]
    return best, worst


def specificity_histogram(
    spans: Iterable[Span],
    selection: set[int],
    annotated_ids: Optional[set[int]] = None,
) -> dict[int, int]:
    """Span counts per category over the selected sentence ids.

    If annotated_ids is given, every selected id must be in it; this
    catches histograms computed over sentences nobody has looked at.
    """
    if annotated_ids is not None:
        missing = selection - annotated_ids
        if missing:
            raise ValueError(f"unannotated ids in selection: {sorted(missing)[:5]}")
    hist = {c: 0 for c in CATEGORIES}
    for span in spans:
        if span.sentence_id in selection:
            hist[span.category] += 1
    return hist


@dataclass(frozen=True)
class Bucket:
    label: str  # "0", "1", ">=2"
    size: int
    bleu: float


def bucket_by_char_oov(
    records: Sequence[TranslationRecord],
    vocab: CharVocab,
    unit: str = "token",
) -> list[Bucket]:
    """Per-bucket corpus BLEU by the number of char-OOVs in the source.

    Buckets are 0, 1 and >=2 char-OOVs; empty buckets are omitted rather
    than reported as zero.
    """
    if not records:
        raise ValueError("no records to bucket")
    groups: dict[str, list[TranslationRecord]] = {"0": [], "1": [], ">=2": []}
    for r in records:
        n = char_oov_count(r.source, vocab)
        groups["0" if n == 0 else "1" if n == 1 else ">=2"].append(r)

    def toks(s: Sentence):
        return s.chars if unit == "char" else s.tokens

    out = []
    for label in ("0", "1", ">=2"):
        group = groups[label]
        if not group:
            continue
        score = bleu([toks(r.hypothesis) for r in group],
                     [toks(r.reference) for r in group])
        out.append(Bucket(label=label, size=len(group), bleu=score.score))
    return out


# ------------------------------------------------------------------ sweep

@dataclass(frozen=True)
class SweepRow:
    vocab_size: int
    bleu_raw: float
    bleu_after_unk_rep: float
    unk_pred_pct: float
    length_ratio: float

    def tsv(self) -> str:
        return (
            f"{self.vocab_size}\t{self.bleu_raw:.4f}\t"
            f"{self.bleu_after_unk_rep:.4f}\t{self.unk_pred_pct:.4f}\t"
            f"{self.length_ratio:.6f}"
        )


SWEEP_HEADER = "N\tbleu_raw\tbleu_unkrep\tunk_pct\tlen_ratio"


def sweep_tsv(rows: Sequence[SweepRow]) -> str:
    return "\n".join([SWEEP_HEADER] + [r.tsv() for r in rows]) + "\n"


def _corpus_hash(*corpora: ParallelCorpus) -> str:
    h = hashlib.sha256()
    for c in corpora:
        for src, tgt in c:
            h.update(src.raw.encode("utf-8") + b"\x00")
            h.update((tgt.raw if tgt else "").encode("utf-8") + b"\x01")
    return h.hexdigest()[:16]


def evaluate_copy_split(
    copy_model: "nc.CopyModel", corpus: ParallelCorpus, vocab_size: int
) -> tuple[SweepRow, list[TranslationRecord]]:
    """Decode one test split and score it before and after positional UNK
    replacement; the source is the ground truth on the copy task."""
    sources = [src for src, _ in corpus]
    refs = [tgt for _, tgt in corpus]
    results = copy_model.translate_batch(sources)
    hyps = [r.output_text for r in results]
    replaced = [unk_replace_identity(h, s.raw) for h, s in zip(hyps, sources)]

    raw = bleu([list(h) for h in hyps], [r.chars for r in refs])
    rep = bleu([list(h) for h in replaced], [r.chars for r in refs])
    row = SweepRow(
        vocab_size=vocab_size,
        bleu_raw=raw.score,
        bleu_after_unk_rep=rep.score,
        unk_pred_pct=unk_fraction(copy_model.mcfg.vocab, hyps),
        length_ratio=length_ratio([list(h) for h in hyps], [r.chars for r in refs]),
    )
    records = [
        make_record(i, s, r, h, unit="char", attention=res.attention)
        for i, (s, r, h, res) in enumerate(zip(sources, refs, hyps, results))
    ]
    return row, records


@dataclass
class SweepResult:
    in_rows: list[SweepRow]
    out_rows: list[SweepRow]
    checkpoints: dict[int, Path]


def vocab_sweep(
    train_corpus: ParallelCorpus,
    dev_corpus: ParallelCorpus,
    in_test: ParallelCorpus,
    out_test: ParallelCorpus,
    sizes: Sequence[int],
    embed_dim: int = 64,
    hidden_dim: int = 128,
    seed: int = 0,
    tcfg: "nc.TrainConfig" = None,
    cache_dir=None,
    log=print,
) -> SweepResult:
    """Train one copy model per vocabulary size N and score both test sets.

    Checkpoints are cached under a key hashing (N, seed, model dims,
    training config, data), so reruns with identical inputs reuse the
    trained weights and produce bit-identical rows.
    """
    if not sizes:
        raise ValueError("sizes must be non-empty")
    tcfg = tcfg or nc.TrainConfig()
    cache_dir = Path(cache_dir) if cache_dir else None
    if cache_dir:
        cache_dir.mkdir(parents=True, exist_ok=True)
    data_hash = _corpus_hash(train_corpus, dev_corpus)

    full_vocab = build_char_vocab(train_corpus, n=10**9)
    n_chars = full_vocab.size_n
    for n in sizes:
        if not (0 < n <= n_chars):
            raise ValueError(f"N={n} outside (0, {n_chars}]")

    in_rows, out_rows, checkpoints = [], [], {}
    for n in sizes:
        vocab = build_char_vocab(train_corpus, n=n)
        mcfg = nc.ModelConfig(
            vocab=vocab, embed_dim=embed_dim, hidden_dim=hidden_dim, seed=seed
        )
        key = hashlib.sha256(
            json.dumps(
                [n, seed, embed_dim, hidden_dim, tcfg.batch_size,
                 tcfg.learning_rate, tcfg.max_epochs, tcfg.patience,
                 tcfg.grad_clip, data_hash, vocab.content_hash()]
            ).encode()
        ).hexdigest()[:16]
        ckpt = cache_dir / f"copy_n{n}_{key}.npz" if cache_dir else None
        if ckpt and ckpt.exists():
            log(f"N={n}: reusing checkpoint {ckpt.name}")
            copy_model = nc.CopyModel.load(ckpt)
        else:
            log(f"N={n}: training")
            copy_model, _ = nc.train(train_corpus, dev_corpus, mcfg, tcfg)
            if ckpt:
                copy_model.save(ckpt)
        if ckpt:
            checkpoints[n] = ckpt
        row_in, _ = evaluate_copy_split(copy_model, in_test, n)
        row_out, _ = evaluate_copy_split(copy_model, out_test, n)
        in_rows.append(row_in)
        out_rows.append(row_out)
        log(f"N={n}: in raw {row_in.bleu_raw:.1f} rep {row_in.bleu_after_unk_rep:.1f} "
            f"unk {row_in.unk_pred_pct:.1f}% | out raw {row_out.bleu_raw:.1f} "
            f"rep {row_out.bleu_after_unk_rep:.1f} unk {row_out.unk_pred_pct:.1f}%")
    return SweepResult(in_rows=in_rows, out_rows=out_rows, checkpoints=checkpoints)
