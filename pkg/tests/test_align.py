import math

import numpy as np
import pytest

from charlab.align import (
    NULL_TOKEN,
    Alignment,
    DiagonalPrior,
    TranslationTable,
    attention_align,
    em_train,
    identity_alignment,
    viterbi_align,
)
from charlab.corpus import ParallelCorpus

TOY = [
    ("das Haus", "the house"),
    ("das Buch", "the book"),
    ("ein Buch", "a book"),
]


def toy_corpus():
    return ParallelCorpus.from_lines(
        [s for s, _ in TOY], [t for _, t in TOY], name="toy"
    )


# ---------------------------------------------------------------- oracle

def em_oracle(pairs, iterations):
    """Brute-force IBM 1 EM, written straight from the count equations.

    Initialization is uniform 1/|target vocab| over pairs that co-occur in
    some sentence (plus NULL), matching em_train.
    """
    pairs = [(s.split() + [NULL_TOKEN], t.split()) for s, t in pairs]
    tgt_vocab = sorted({g for _, tgt in pairs for g in tgt})
    t = {}
    for src, tgt in pairs:
        for s in src:
            for g in tgt:
                t[(s, g)] = 1.0 / len(tgt_vocab)
    for _ in range(iterations):
        counts = {}
        totals = {}
        for src, tgt in pairs:
            for g in tgt:
                z = sum(t[(s, g)] for s in src)
                for s in src:
                    frac = t[(s, g)] / z
                    counts[(s, g)] = counts.get((s, g), 0.0) + frac
                    totals[s] = totals.get(s, 0.0) + frac
        t = {sg: c / totals[sg[0]] for sg, c in counts.items()}
    return t


@pytest.mark.parametrize("iters", [1, 2, 3])
def test_em_matches_brute_force_oracle(iters):
    table, prior, _ = em_train(toy_corpus(), iterations=iters, model="ibm1")
    assert prior is None
    oracle = em_oracle(TOY, iters)
    assert set(table.t) == set(oracle)
    for sg, p in oracle.items():
        assert table.t[sg] == pytest.approx(p, abs=1e-9)


def test_em_loglik_nondecreasing():
    _, _, lls = em_train(toy_corpus(), iterations=6, model="ibm1")
    for a, b in zip(lls, lls[1:]):
        assert b >= a - 1e-12


def test_em_rows_normalize():
    table, _, _ = em_train(toy_corpus(), iterations=3, model="ibm1")
    by_src = {}
    for (s, g), p in table.t.items():
        by_src[s] = by_src.get(s, 0.0) + p
    for s, total in by_src.items():
        assert total == pytest.approx(1.0, abs=1e-9)


def test_toy_viterbi_links():
    table, _, _ = em_train(toy_corpus(), iterations=10, model="ibm1")
    a = viterbi_align(table, "das Haus".split(), "the house".split())
    assert a.links == (0, 1)
    a = viterbi_align(table, "ein Buch".split(), "a book".split())
    assert a.links == (0, 1)


def test_viterbi_leftmost_tie():
    t = {("x", "g"): 0.5, ("y", "g"): 0.5}
    table = TranslationTable(t=t, source_vocab={"x", "y"}, target_vocab={"g"})
    a = viterbi_align(table, ["x", "y"], ["g"])
    assert a.links == (0,)


def test_viterbi_null_when_no_mass():
    t = {("x", "g"): 1.0}
    table = TranslationTable(t=t, source_vocab={"x"}, target_vocab={"g"})
    a = viterbi_align(table, ["x"], ["unseen"])
    assert a.links == (None,)


# ---------------------------------------------------------------- diag2

def test_diag_prior_weights_sum_to_one():
    prior = DiagonalPrior(tension=4.0, null_prob=0.08)
    w = prior.weights(7, 2, 5)
    assert w.shape == (8,)
    assert w.sum() == pytest.approx(1.0, abs=1e-12)
    assert w[-1] == pytest.approx(0.08)


def test_diag_prior_peaks_on_diagonal():
    prior = DiagonalPrior(tension=6.0, null_prob=0.05)
    w = prior.weights(10, 3, 10)[:-1]
    assert int(np.argmax(w)) == 3


def test_diag_prior_zero_tension_uniform():
    w = DiagonalPrior(tension=0.0, null_prob=0.0).weights(5, 1, 4)[:-1]
    assert np.allclose(w, 0.2)


def test_diag2_trains_and_improves_loglik():
    table, prior, lls = em_train(
        toy_corpus(), iterations=3, model="diag2", diag_iterations=3
    )
    assert prior is not None
    assert 0.0 <= prior.tension <= 12.0
    # the diag stage must not collapse likelihood
    assert lls[-1] >= lls[2] - 1.0
    a = viterbi_align(table, "das Buch".split(), "the book".split(), prior=prior)
    assert a.links == (0, 1)


def test_diag2_prefers_diagonal_on_ambiguous_pair():
    # bigger synthetic corpus where lexical evidence alone is ambiguous:
    # every sentence is the same pair of repeated tokens, so only the
    # positional prior can break the tie
    src = ["a a"] * 20
    tgt = ["b b"] * 20
    corpus = ParallelCorpus.from_lines(src, tgt, name="amb")
    table, prior, _ = em_train(corpus, iterations=2, model="diag2", diag_iterations=2)
    a = viterbi_align(table, ["a", "a"], ["b", "b"], prior=prior)
    assert a.links == (0, 1)


# ---------------------------------------------------------------- pharaoh

def test_pharaoh_round_trip():
    a = Alignment(links=(0, None, 2, 2))
    line = a.pharaoh()
    assert line == "0-0 2-2 2-3"
    assert Alignment.from_pharaoh(line, target_len=4) == a


def test_table_dump_load_round_trip(tmp_path):
    table, _, _ = em_train(toy_corpus(), iterations=3, model="ibm1")
    p = tmp_path / "table.tsv"
    table.dump(p)
    again = TranslationTable.load(p)
    assert set(again.t) == set(table.t)
    for sg in table.t:
        assert again.t[sg] == pytest.approx(table.t[sg], rel=1e-9)


# ---------------------------------------------------------------- attention

def test_attention_align_argmax_and_ties():
    att = np.array(
        [
            [0.7, 0.2, 0.1],
            [0.4, 0.4, 0.2],  # tie -> leftmost
            [0.1, 0.2, 0.7],
        ]
    )
    a = attention_align(att)
    assert a.links == (0, 0, 2)


def test_attention_align_rejects_unnormalized():
    with pytest.raises(ValueError):
        attention_align(np.array([[0.5, 0.2]]))


def test_attention_align_drop_columns():
    att = np.array([[0.6, 0.3, 0.1], [0.1, 0.3, 0.6]])
    a = attention_align(att, drop_first_column=True)
    assert a.links == (0, 1)


# ---------------------------------------------------------------- identity

def test_identity_alignment():
    a = identity_alignment(target_len=5, source_len=3)
    assert a.links == (0, 1, 2, None, None)
