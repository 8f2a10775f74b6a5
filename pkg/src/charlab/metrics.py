"""Translation-quality and corpus-divergence metrics.

BLEU, token/char edit distance, n-gram KL divergence, interpolated
3-gram LM perplexity, OOV rates and length ratios.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

from .corpus import ConfigurationError, ParallelCorpus

TokenSeq = Sequence[str]

MAX_BLEU_ORDER = 4


@dataclass(frozen=True)
class BleuScore:
    score: float
    precisions: tuple[float, float, float, float]
    brevity_penalty: float
    hyp_len: int
    ref_len: int


def _ngrams(tokens: TokenSeq, n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(
    hypotheses: Sequence[TokenSeq],
    references: Sequence[TokenSeq],
    smoothing: str = "exp-floor",
) -> BleuScore:
    """Corpus-level BLEU-4 with uniform weights.

    smoothing="exp-floor" replaces a zero n-gram match count by a floor
    that halves with each successive zero order (1 / 2^k of one count);
    smoothing="none" keeps the exact zero, annihilating the score.
    """
    if smoothing not in ("none", "exp-floor"):
        raise ConfigurationError(f"unknown BLEU smoothing: {smoothing!r}")
    if len(hypotheses) != len(references):
        raise ValueError(
            f"hypothesis/reference count mismatch: {len(hypotheses)} vs {len(references)}"
        )
    if not references:
        raise ValueError("references must be non-empty")

    matches = [0] * MAX_BLEU_ORDER
    totals = [0] * MAX_BLEU_ORDER
    hyp_len = 0
    ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        hyp = list(hyp)
        ref = list(ref)
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, MAX_BLEU_ORDER + 1):
            hyp_ngrams = _ngrams(hyp, n)
            if not hyp_ngrams:
                continue
            ref_ngrams = _ngrams(ref, n)
            matches[n - 1] += sum((hyp_ngrams & ref_ngrams).values())
            totals[n - 1] += sum(hyp_ngrams.values())

    if hyp_len == 0:
        return BleuScore(0.0, (0.0,) * 4, 1.0, 0, ref_len)

    precisions = []
    smooth = 1.0
    for n in range(MAX_BLEU_ORDER):
        if totals[n] == 0:
            # Every hypothesis is shorter than n tokens; treat the order
            # as unobserved rather than as a failure.
            precisions.append(1.0)
        elif matches[n] > 0:
            precisions.append(matches[n] / totals[n])
        elif smoothing == "exp-floor":
            smooth /= 2.0
            precisions.append(smooth / totals[n])
        else:
            precisions.append(0.0)

    if hyp_len >= ref_len:
        bp = 1.0
    else:
        bp = math.exp(1.0 - ref_len / hyp_len)

    if any(p == 0.0 for p in precisions):
        geo_mean = 0.0
    else:
        geo_mean = math.exp(sum(math.log(p) for p in precisions) / MAX_BLEU_ORDER)
    return BleuScore(
        score=100.0 * bp * geo_mean,
        precisions=tuple(precisions),
        brevity_penalty=bp,
        hyp_len=hyp_len,
        ref_len=ref_len,
    )


def edit_distance(hyp: TokenSeq, ref: TokenSeq) -> tuple[int, float]:
    """Levenshtein distance over tokens, plus distance / max(1, |ref|)."""
    m, n = len(hyp), len(ref)
    if m == 0:
        return n, n / max(1, n)
    prev = list(range(n + 1))
    for i in range(1, m + 1):
        cur = [i] + [0] * n
        hi = hyp[i - 1]
        for j in range(1, n + 1):
            cost = 0 if hi == ref[j - 1] else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
        prev = cur
    return prev[n], prev[n] / max(1, n)


def _ngram_counts(corpus: ParallelCorpus, n: int, side: str) -> Counter:
    counts: Counter = Counter()
    for s in corpus.side(side):
        toks = s.tokens
        for i in range(len(toks) - n + 1):
            counts[tuple(toks[i : i + n])] += 1
    return counts


def kl_divergence_ngram(
    p_corpus: ParallelCorpus,
    q_corpus: ParallelCorpus,
    n: int = 3,
    alpha: float = 0.5,
    side: str = "source",
) -> float:
    """D_KL(P||Q) over token n-gram distributions, add-alpha smoothed
    over the union of both supports.  Reported in nats."""
    if n < 1:
        raise ConfigurationError(f"n-gram order must be >= 1, got {n}")
    if alpha <= 0:
        raise ConfigurationError(f"smoothing constant must be > 0, got {alpha}")
    if not len(p_corpus) or not len(q_corpus):
        raise ValueError("both corpora must be non-empty")
    p_counts = _ngram_counts(p_corpus, n, side)
    q_counts = _ngram_counts(q_corpus, n, side)
    support = set(p_counts) | set(q_counts)
    if not support:
        return 0.0
    p_total = sum(p_counts.values()) + alpha * len(support)
    q_total = sum(q_counts.values()) + alpha * len(support)
    kl = 0.0
    for g in support:
        p = (p_counts[g] + alpha) / p_total
        q = (q_counts[g] + alpha) / q_total
        kl += p * math.log(p / q)
    return kl


BOS = "<s>"
UNK = "<unk>"
DEFAULT_LAMBDAS = (0.1, 0.3, 0.6)


@dataclass(frozen=True)
class NgramLM:
    order: int
    counts: tuple[dict, ...]  # counts[k] maps (k+1)-gram tuples to frequency
    context_totals: tuple[dict, ...]  # totals[k] maps k-gram history to count
    vocab: frozenset
    lambdas: tuple[float, ...]
    n_train_tokens: int

    def prob(self, token: str, history: tuple[str, ...]) -> float:
        """Interpolated conditional probability p(token | history).

        Each interpolation component is a proper distribution over
        vocab + UNK: unseen histories back off to the add-1 unigram.
        """
        if token not in self.vocab:
            token = UNK
        p = 0.0
        for k in range(self.order):
            lam = self.lambdas[k]
            if k == 0:
                comp = self._unigram(token)
            else:
                h = history[-k:] if k <= len(history) else history
                total = self.context_totals[k].get(h, 0)
                if total == 0:
                    comp = self._unigram(token)
                else:
                    comp = self.counts[k].get(h + (token,), 0) / total
            p += lam * comp
        return p

    def _unigram(self, token: str) -> float:
        # add-1 smoothing; the extra type is UNK itself
        v = len(self.vocab) + 1
        return (self.counts[0].get((token,), 0) + 1) / (self.n_train_tokens + v)

    def sentence_logprob(self, tokens: Sequence[str]) -> float:
        padded = (BOS,) * (self.order - 1) + tuple(
            t if t in self.vocab else UNK for t in tokens
        )
        logp = 0.0
        for i in range(self.order - 1, len(padded)):
            logp += math.log(self.prob(padded[i], padded[max(0, i - self.order + 1) : i]))
        return logp


def train_lm(
    corpus: ParallelCorpus,
    order: int = 3,
    lambdas: Sequence[float] = DEFAULT_LAMBDAS,
    side: str = "source",
) -> NgramLM:
    if len(lambdas) != order:
        raise ConfigurationError(f"need {order} interpolation weights, got {len(lambdas)}")
    if any(l <= 0 for l in lambdas) or abs(sum(lambdas) - 1.0) > 1e-9:
        raise ConfigurationError("interpolation weights must be positive and sum to 1")
    sentences = corpus.side(side)
    if not sentences:
        raise ValueError("cannot train a language model on an empty corpus")
    counts: list[dict] = [dict() for _ in range(order)]
    totals: list[dict] = [dict() for _ in range(order)]
    vocab: set[str] = set()
    n_tokens = 0
    for s in sentences:
        vocab.update(s.tokens)
        n_tokens += len(s.tokens)
        padded = (BOS,) * (order - 1) + tuple(s.tokens)
        for i in range(order - 1, len(padded)):
            for k in range(order):
                gram = padded[i - k : i + 1]
                counts[k][gram] = counts[k].get(gram, 0) + 1
                if k > 0:
                    h = gram[:-1]
                    totals[k][h] = totals[k].get(h, 0) + 1
    return NgramLM(
        order=order,
        counts=tuple(counts),
        context_totals=tuple(totals),
        vocab=frozenset(vocab),
        lambdas=tuple(lambdas),
        n_train_tokens=n_tokens,
    )


def perplexity(lm: NgramLM, test: ParallelCorpus, side: str = "source") -> float:
    logp = 0.0
    n = 0
    for s in test.side(side):
        logp += lm.sentence_logprob(s.tokens)
        n += len(s.tokens)
    if n == 0:
        raise ValueError("test corpus has no tokens")
    return math.exp(-logp / n)


@dataclass(frozen=True)
class DivergenceReport:
    kl_3gram: float
    oov_rate: float
    perplexity: float


def divergence_report(
    test: ParallelCorpus,
    train: ParallelCorpus,
    alpha: float = 0.5,
    lambdas: Sequence[float] = DEFAULT_LAMBDAS,
    side: str = "source",
) -> DivergenceReport:
    train_vocab = set()
    for s in train.side(side):
        train_vocab.update(s.tokens)
    lm = train_lm(train, 3, lambdas, side=side)
    return DivergenceReport(
        kl_3gram=kl_divergence_ngram(test, train, 3, alpha, side=side),
        oov_rate=oov_rate(test, train_vocab, side=side),
        perplexity=perplexity(lm, test, side=side),
    )


def oov_rate(test: ParallelCorpus, train_vocab: set[str], side: str = "source") -> float:
    """Percentage of test tokens absent from the training vocabulary."""
    total = 0
    oov = 0
    for s in test.side(side):
        for t in s.tokens:
            total += 1
            if t not in train_vocab:
                oov += 1
    return 100.0 * oov / total if total else 0.0


def length_ratio(
    hypotheses: Sequence[TokenSeq], references: Sequence[TokenSeq]
) -> float:
    """Total hypothesis token count over total reference token count."""
    if len(hypotheses) != len(references):
        raise ValueError("hypothesis/reference count mismatch")
    ref_total = sum(len(r) for r in references)
    if ref_total == 0:
        raise ValueError("references contain no tokens")
    return sum(len(h) for h in hypotheses) / ref_total
