"""Word/token alignment for UNK replacement.

IBM Model 1 trained by EM, an optional diagonal-prior second stage in the
fast-align style, Viterbi alignment, alignment from attention matrices,
and Pharaoh-format I/O.
"""

from __future__ import annotations

import math
import warnings
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .corpus import ParallelCorpus, Sentence

NULL_TOKEN = "<null>"
PROB_FLOOR = 1e-12


@dataclass(frozen=True)
class DiagonalPrior:
    tension: float = 4.0
    null_prob: float = 0.08

    def __post_init__(self):
        if self.tension < 0:
            raise ValueError("tension must be >= 0")
        if not (0.0 <= self.null_prob < 1.0):
            raise ValueError("null_prob must be in [0, 1)")

    def weights(self, src_len: int, tgt_pos: int, tgt_len: int) -> np.ndarray:
        """Probabilities over source positions 0..src_len-1 plus NULL (last).

        p(i | j) is proportional to exp(-tension * |i/m - j/n|) after the
        NULL probability is split off; tension 0 degrades to uniform.
        """
        d = np.abs(
            np.arange(src_len) / src_len - tgt_pos / tgt_len
        )
        w = np.exp(-self.tension * d)
        w = (1.0 - self.null_prob) * w / w.sum()
        return np.append(w, self.null_prob)


@dataclass(frozen=True)
class Alignment:
    """One link per target position: a source index, or None for NULL."""

    links: tuple[Optional[int], ...]

    def pharaoh(self) -> str:
        return " ".join(f"{s}-{t}" for t, s in enumerate(self.links) if s is not None)

    @staticmethod
    def from_pharaoh(line: str, target_len: int) -> "Alignment":
        links: list[Optional[int]] = [None] * target_len
        for pair in line.split():
            s, t = pair.split("-")
            links[int(t)] = int(s)
        return Alignment(links=tuple(links))


@dataclass
class TranslationTable:
    """Lexical probabilities t(target | source), NULL included as a source."""

    t: dict  # (src_token, tgt_token) -> prob
    source_vocab: set
    target_vocab: set

    def prob(self, src: str, tgt: str) -> float:
        return self.t.get((src, tgt), 0.0)

    def dump(self, path) -> None:
        lines = [
            f"{s}\t{g}\t{p:.10g}\n"
            for (s, g), p in sorted(self.t.items())
        ]
        Path(path).write_text("".join(lines), encoding="utf-8")

    @staticmethod
    def load(path) -> "TranslationTable":
        t = {}
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            s, g, p = line.split("\t")
            t[(s, g)] = float(p)
        return TranslationTable(
            t=t,
            source_vocab={s for s, _ in t},
            target_vocab={g for _, g in t},
        )


def _pair_tokens(corpus: ParallelCorpus) -> list[tuple[list[str], list[str]]]:
    pairs = []
    for src, tgt in corpus:
        if tgt is None:
            raise ValueError("alignment training needs a fully parallel corpus")
        if not src.tokens or not tgt.tokens:
            warnings.warn("skipping sentence pair with an empty side")
            continue
        pairs.append((list(src.tokens), list(tgt.tokens)))
    return pairs


def _em_iteration(pairs, t, prior: Optional[DiagonalPrior]):
    """One E+M step.  Returns (new table, data log-likelihood under the
    incoming table)."""
    counts: dict = defaultdict(float)
    totals: dict = defaultdict(float)
    loglik = 0.0
    for src, tgt in pairs:
        m, n = len(src), len(tgt)
        src_ext = src + [NULL_TOKEN]
        for j, g in enumerate(tgt):
            if prior is None:
                w = np.full(m + 1, 1.0 / (m + 1))
            else:
                w = prior.weights(m, j, n)
            post = np.array([max(t.get((s, g), 0.0), PROB_FLOOR) for s in src_ext]) * w
            z = post.sum()
            loglik += math.log(max(z, PROB_FLOOR))
            post /= z
            for i, s in enumerate(src_ext):
                counts[(s, g)] += post[i]
                totals[s] += post[i]
    new_t = {sg: c / totals[sg[0]] for sg, c in counts.items()}
    return new_t, loglik


def _expected_loglik(pairs, t, prior: DiagonalPrior) -> float:
    ll = 0.0
    for src, tgt in pairs:
        m, n = len(src), len(tgt)
        src_ext = src + [NULL_TOKEN]
        for j, g in enumerate(tgt):
            w = prior.weights(m, j, n)
            z = sum(
                max(t.get((s, g), 0.0), PROB_FLOOR) * w[i] for i, s in enumerate(src_ext)
            )
            ll += math.log(max(z, PROB_FLOOR))
    return ll


def _golden_section_tension(pairs, t, prior: DiagonalPrior, steps: int = 8) -> float:
    """Maximize the data log-likelihood over the tension by a fixed
    number of golden-section steps on [0, 12]."""
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    lo, hi = 0.0, 12.0
    a = hi - phi * (hi - lo)
    b = lo + phi * (hi - lo)
    fa = _expected_loglik(pairs, t, DiagonalPrior(a, prior.null_prob))
    fb = _expected_loglik(pairs, t, DiagonalPrior(b, prior.null_prob))
    for _ in range(steps):
        if fa < fb:
            lo, a, fa = a, b, fb
            b = lo + phi * (hi - lo)
            fb = _expected_loglik(pairs, t, DiagonalPrior(b, prior.null_prob))
        else:
            hi, b, fb = b, a, fa
            a = hi - phi * (hi - lo)
            fa = _expected_loglik(pairs, t, DiagonalPrior(a, prior.null_prob))
    return (lo + hi) / 2.0


def em_train(
    corpus: ParallelCorpus,
    iterations: int = 5,
    model: str = "ibm1",
    diag_iterations: int = 5,
    null_prob: float = 0.08,
) -> tuple[TranslationTable, Optional[DiagonalPrior], list[float]]:
    """EM training of lexical translation probabilities.

    model="ibm1" runs `iterations` uniform-prior EM steps; model="diag2"
    follows with `diag_iterations` steps under a diagonal positional prior
    whose tension is re-optimized each round by golden-section search.
    Returns the table, the prior (diag2 only) and the per-iteration data
    log-likelihood sequence (non-decreasing within each stage).
    """
    if model not in ("ibm1", "diag2"):
        raise ValueError(f"unknown alignment model: {model!r}")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    pairs = _pair_tokens(corpus)
    if not pairs:
        raise ValueError("no usable sentence pairs")

    src_vocab = {s for src, _ in pairs for s in src} | {NULL_TOKEN}
    tgt_vocab = {g for _, tgt in pairs for g in tgt}

    # uniform initialization over co-occurring pairs
    t: dict = {}
    init = 1.0 / len(tgt_vocab)
    for src, tgt in pairs:
        for s in src + [NULL_TOKEN]:
            for g in tgt:
                t[(s, g)] = init

    logliks = []
    for _ in range(iterations):
        t, ll = _em_iteration(pairs, t, prior=None)
        logliks.append(ll)

    prior = None
    if model == "diag2":
        prior = DiagonalPrior(tension=4.0, null_prob=null_prob)
        for _ in range(diag_iterations):
            lam = _golden_section_tension(pairs, t, prior)
            prior = DiagonalPrior(tension=lam, null_prob=null_prob)
            t, ll = _em_iteration(pairs, t, prior=prior)
            logliks.append(ll)

    table = TranslationTable(t=t, source_vocab=src_vocab, target_vocab=tgt_vocab)
    return table, prior, logliks


def viterbi_align(
    table: TranslationTable,
    source: Sentence | Sequence[str],
    target: Sentence | Sequence[str],
    prior: Optional[DiagonalPrior] = None,
) -> Alignment:
    """Per-target-token argmax link; ties go to the leftmost source
    position; a target token with no lexical mass links to NULL."""
    src = list(source.tokens) if isinstance(source, Sentence) else list(source)
    tgt = list(target.tokens) if isinstance(target, Sentence) else list(target)
    m, n = len(src), len(tgt)
    links: list[Optional[int]] = []
    for j, g in enumerate(tgt):
        if prior is None:
            w = np.full(m + 1, 1.0 / (m + 1))
        else:
            w = prior.weights(m, j, max(n, 1))
        best_score = table.prob(NULL_TOKEN, g) * w[m]
        best: Optional[int] = None
        for i, s in enumerate(src):
            score = table.prob(s, g) * w[i]
            if score > best_score:
                best_score = score
                best = i
        if best_score <= 0.0:
            best = None
        links.append(best)
    return Alignment(links=tuple(links))


def attention_align(
    attention: np.ndarray,
    drop_first_column: bool = False,
    drop_last_column: bool = False,
) -> Alignment:
    """Argmax alignment from an attention matrix (rows = target positions,
    columns = source positions).  Columns holding BOS/EOS attention can be
    dropped; ties go to the leftmost column."""
    attention = np.asarray(attention, dtype=np.float64)
    if attention.ndim != 2:
        raise ValueError("attention must be a 2-D matrix")
    if attention.size and np.abs(attention.sum(axis=1) - 1.0).max() > 1e-3:
        raise ValueError("attention rows must sum to 1")
    lo = 1 if drop_first_column else 0
    hi = attention.shape[1] - (1 if drop_last_column else 0)
    if hi <= lo:
        raise ValueError("no source columns left after dropping BOS/EOS")
    links = tuple(int(np.argmax(row[lo:hi])) for row in attention)
    return Alignment(links=links)


def identity_alignment(target_len: int, source_len: int) -> Alignment:
    """Position j links to source j; positions beyond the source get NULL.
    The ground-truth alignment of the copy task."""
    return Alignment(
        links=tuple(j if j < source_len else None for j in range(target_len))
    )
