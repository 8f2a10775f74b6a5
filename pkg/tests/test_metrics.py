import math
from collections import Counter
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from charlab.corpus import ConfigurationError, ParallelCorpus
from charlab.metrics import (
    bleu,
    edit_distance,
    kl_divergence_ngram,
    length_ratio,
    oov_rate,
    perplexity,
    train_lm,
)

# ---------------------------------------------------------------------------
# independent oracles


def bleu_oracle(hyps, refs):
    """Direct transcription of the BLEU formula, kept independent of the
    implementation under test (full Counter tables, no streaming)."""
    precisions = []
    for n in range(1, 5):
        match, total = 0, 0
        for h, r in zip(hyps, refs):
            hgrams = Counter(tuple(h[i : i + n]) for i in range(len(h) - n + 1))
            rgrams = Counter(tuple(r[i : i + n]) for i in range(len(r) - n + 1))
            for g, c in hgrams.items():
                match += min(c, rgrams.get(g, 0))
                total += c
        precisions.append(match / total if total else 1.0)
    hyp_len = sum(len(h) for h in hyps)
    ref_len = sum(len(r) for r in refs)
    bp = 1.0 if hyp_len >= ref_len else math.exp(1 - ref_len / hyp_len)
    if any(p == 0 for p in precisions):
        return 0.0, precisions, bp
    gm = math.exp(sum(math.log(p) for p in precisions) / 4)
    return 100 * bp * gm, precisions, bp


def edit_distance_oracle(a, b):
    """Full DP matrix, no row compression."""
    d = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i in range(len(a) + 1):
        d[i][0] = i
    for j in range(len(b) + 1):
        d[0][j] = j
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            d[i][j] = min(
                d[i - 1][j] + 1,
                d[i][j - 1] + 1,
                d[i - 1][j - 1] + (a[i - 1] != b[j - 1]),
            )
    return d[len(a)][len(b)]


def kl_oracle(p_lines, q_lines, alpha):
    """Brute-force 3-gram probability tables over the union support."""

    def grams(lines):
        c = Counter()
        for line in lines:
            toks = line.split()
            for i in range(len(toks) - 2):
                c[tuple(toks[i : i + 3])] += 1
        return c

    cp, cq = grams(p_lines), grams(q_lines)
    support = set(cp) | set(cq)
    np_, nq = sum(cp.values()) + alpha * len(support), sum(cq.values()) + alpha * len(support)
    return sum(
        (cp[g] + alpha) / np_ * math.log(((cp[g] + alpha) / np_) / ((cq[g] + alpha) / nq))
        for g in support
    )


# Frozen expected value for the hand example, computed from the formula:
# p1=5/5, p2=3/4, p3=2/3, p4=1/2, BP=exp(1-6/5).
HAND_BLEU = 100 * math.exp(1 - 6 / 5) * (1.0 * 0.75 * (2 / 3) * 0.5) ** 0.25

# ---------------------------------------------------------------------------


class TestBleu:
    def test_identity_is_100(self):
        sents = [["the", "cat", "sat", "on", "the", "mat"], ["a", "b", "c", "d"]]
        res = bleu(sents, sents, smoothing="none")
        assert res.score == 100.0
        assert res.brevity_penalty == 1.0

    def test_zero_bigram_annihilates_without_smoothing(self):
        res = bleu([["the", "the", "the", "the"]], [["the", "cat"]], smoothing="none")
        assert res.score == 0.0

    def test_hand_example(self):
        hyp = [["the", "cat", "sat", "on", "mat"]]
        ref = [["the", "cat", "sat", "on", "the", "mat"]]
        res = bleu(hyp, ref, smoothing="none")
        assert res.score == pytest.approx(HAND_BLEU, abs=1e-9)
        assert res.precisions == pytest.approx((1.0, 0.75, 2 / 3, 0.5))
        oracle_score, oracle_prec, oracle_bp = bleu_oracle(hyp, ref)
        assert res.score == pytest.approx(oracle_score, abs=1e-9)
        assert res.brevity_penalty == pytest.approx(oracle_bp, abs=1e-12)

    def test_matches_oracle_on_random_corpora(self):
        import random

        rng = random.Random(7)
        vocab = list("abcdefg")
        for _ in range(50):
            hyps, refs = [], []
            for _s in range(rng.randint(1, 8)):
                refs.append([rng.choice(vocab) for _ in range(rng.randint(4, 12))])
                hyps.append([rng.choice(vocab) for _ in range(rng.randint(4, 12))])
            got = bleu(hyps, refs, smoothing="none").score
            want = bleu_oracle(hyps, refs)[0]
            assert got == pytest.approx(want, abs=1e-9)

    def test_all_empty_hypotheses_score_zero(self):
        res = bleu([[], []], [["a"], ["b"]])
        assert res.score == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            bleu([["a"]], [["a"], ["b"]])

    def test_exp_floor_smoothing_nonzero(self):
        res = bleu([["the", "the", "the", "the"]], [["the", "cat"]], smoothing="exp-floor")
        assert 0.0 < res.score < 100.0

    def test_smoothing_none_100_iff_identical(self):
        hyp = [["a", "b", "c", "d", "e"]]
        ref = [["a", "b", "c", "d", "f"]]
        assert bleu(hyp, ref, smoothing="none").score < 100.0


class TestEditDistance:
    def test_identity(self):
        assert edit_distance(["x"], ["x"]) == (0, 0.0)

    def test_single_substitution(self):
        assert edit_distance(["a"], ["b"]) == (1, 1.0)

    def test_hand_dp(self):
        assert edit_distance(["a", "b", "c"], ["a", "c"]) == (1, 0.5)

    def test_empty_sides(self):
        assert edit_distance([], ["a", "b"]) == (2, 1.0)
        assert edit_distance(["a", "b"], []) == (2, 2.0)

    @settings(max_examples=1000, deadline=None)
    @given(
        st.lists(st.sampled_from("abc"), max_size=8),
        st.lists(st.sampled_from("abc"), max_size=8),
        st.lists(st.sampled_from("abc"), max_size=8),
    )
    def test_metric_properties(self, x, y, z):
        dxy = edit_distance(x, y)[0]
        assert dxy == edit_distance(y, x)[0]
        assert (dxy == 0) == (x == y)
        assert dxy <= edit_distance(x, z)[0] + edit_distance(z, y)[0]

    @given(
        st.lists(st.sampled_from("abcd"), max_size=10),
        st.lists(st.sampled_from("abcd"), max_size=10),
    )
    def test_matches_oracle(self, a, b):
        assert edit_distance(a, b)[0] == edit_distance_oracle(a, b)


class TestKl:
    def test_self_divergence_zero(self):
        c = ParallelCorpus.from_lines(["a b c d", "b c a a b"])
        assert abs(kl_divergence_ngram(c, c)) < 1e-12

    def test_disjoint_vocab_matches_oracle(self):
        p_lines = ["a b c a b", "c a b c"]
        q_lines = ["x y z x", "y z x y z"]
        p = ParallelCorpus.from_lines(p_lines)
        q = ParallelCorpus.from_lines(q_lines)
        for alpha in (0.5, 1.0, 0.1):
            got = kl_divergence_ngram(p, q, alpha=alpha)
            assert got == pytest.approx(kl_oracle(p_lines, q_lines, alpha), abs=1e-12)
            assert got > 0

    def test_nonnegative_on_random_pairs(self):
        import random

        rng = random.Random(3)
        for _ in range(100):
            mk = lambda: ParallelCorpus.from_lines(
                [
                    " ".join(rng.choice("abcde") for _ in range(rng.randint(3, 9)))
                    for _s in range(rng.randint(1, 6))
                ]
            )
            assert kl_divergence_ngram(mk(), mk()) >= 0

    def test_config_errors(self):
        c = ParallelCorpus.from_lines(["a b c"])
        with pytest.raises(ConfigurationError):
            kl_divergence_ngram(c, c, n=0)
        with pytest.raises(ConfigurationError):
            kl_divergence_ngram(c, c, alpha=0.0)


class TestLm:
    def test_single_symbol_perplexity_near_one(self):
        c = ParallelCorpus.from_lines(["a a a a a a a a"] * 20)
        lm = train_lm(c)
        ppl = perplexity(lm, c)
        assert 1.0 < ppl < 1.2

    def test_fair_coin_perplexity_near_two(self):
        import random

        rng = random.Random(11)
        lines = [
            " ".join(rng.choice("ab") for _ in range(20)) for _ in range(200)
        ]
        train = ParallelCorpus.from_lines(lines[:150])
        test = ParallelCorpus.from_lines(lines[150:])
        lm = train_lm(train, lambdas=(0.9, 0.05, 0.05))
        assert perplexity(lm, test) == pytest.approx(2.0, abs=0.05)

    def test_history_normalization(self):
        c = ParallelCorpus.from_lines(["a b c a b", "b c a", "a a b"])
        lm = train_lm(c)
        vocab = sorted(lm.vocab) + ["<oov-token>"]
        for hist in product(sorted(lm.vocab), repeat=2):
            total = sum(lm.prob(w, hist) for w in vocab)
            assert total == pytest.approx(1.0, abs=1e-9)

    def test_in_distribution_ppl_not_higher(self):
        import random

        rng = random.Random(5)
        mk = lambda alpha_chars: ParallelCorpus.from_lines(
            [
                " ".join(rng.choice(alpha_chars) for _ in range(12))
                for _ in range(120)
            ]
        )
        train = mk("abcd")
        in_test = mk("abcd")
        out_test = mk("wxyz")
        lm = train_lm(train)
        assert perplexity(lm, in_test) <= perplexity(lm, out_test)

    def test_bad_lambdas(self):
        c = ParallelCorpus.from_lines(["a b"])
        with pytest.raises(ConfigurationError):
            train_lm(c, lambdas=(0.5, 0.5, 0.5))


class TestOovAndRatio:
    def test_subset_vocab_zero(self):
        test = ParallelCorpus.from_lines(["a b", "b a"])
        assert oov_rate(test, {"a", "b", "c"}) == 0.0

    def test_half_oov(self):
        test = ParallelCorpus.from_lines(["a b c d"])
        assert oov_rate(test, {"a", "b"}) == 50.0

    def test_length_ratio(self):
        assert length_ratio([["a", "b"]], [["a", "b"]]) == 1.0
        assert length_ratio([["a", "b", "c", "d"]], [["x", "y"]]) == 2.0

    def test_zero_reference(self):
        with pytest.raises(ValueError):
            length_ratio([["a"]], [[]])
