import numpy as np
import pytest

from charlab.analysis import (
    SWEEP_HEADER,
    Bucket,
    bucket_by_char_oov,
    make_record,
    select_extremes,
    specificity_histogram,
    sweep_tsv,
    vocab_sweep,
)
from charlab.annostore import Span
from charlab.corpus import ParallelCorpus
from charlab.model import TrainConfig
from charlab.synth import CopyTaskSpec, generate_copy_corpus
from charlab.vocab import build_char_vocab


def recs(distpairs):
    # build records whose normalized edit distance is controlled by the
    # (hyp, ref) strings supplied
    return [
        make_record(i, src, ref, hyp, unit="char")
        for i, (src, ref, hyp) in enumerate(distpairs)
    ]


def test_record_distance_field():
    r = make_record(0, "abc", "abc", "abd", unit="char")
    assert r.distance == pytest.approx(1 / 3)


def test_select_extremes_sorting():
    records = recs(
        [
            ("aaaaaaaaaa", "aaaaaaaaaa", "aaaaaaaaab"),  # 0.1
            ("aaaaaaaaaa", "aaaaaaaaaa", "aaaaabbbbb"),  # 0.5
            ("aaaaaaaaaa", "aaaaaaaaaa", "abbbbbbbbb"),  # 0.9
        ]
    )
    best, worst = select_extremes(records, k=1)
    assert best[0].distance == pytest.approx(0.1)
    assert worst[0].distance == pytest.approx(0.9)


def test_select_extremes_identical_hyps():
    records = recs([("ab", "ab", "ab")] * 4)
    best, worst = select_extremes(records, k=2)
    assert all(r.distance == 0 for r in best + worst)
    # tie rule: record id order
    assert [r.record_id for r in best] == [0, 1]
    assert [r.record_id for r in worst] == [0, 1]


def test_select_extremes_disjoint_and_stable():
    rng = np.random.default_rng(7)
    dists = rng.permutation(400)
    records = []
    for i, d in enumerate(dists):
        # d errors out of 400 chars gives distinct distances
        ref = "a" * 400
        hyp = "b" * d + "a" * (400 - d)
        records.append(make_record(i, ref, ref, hyp, unit="char"))
    best, worst = select_extremes(records, k=100)
    again_best, again_worst = select_extremes(records, k=100)
    assert [r.record_id for r in best] == [r.record_id for r in again_best]
    assert [r.record_id for r in worst] == [r.record_id for r in again_worst]
    assert not {r.record_id for r in best} & {r.record_id for r in worst}


def test_select_extremes_k_too_large():
    with pytest.raises(ValueError):
        select_extremes(recs([("a", "a", "a")]), k=2)


# -------------------------------------------------------------- histogram

def span(sent, cat, sid="x"):
    return Span(span_id=f"{sid}{sent}{cat}", sentence_id=sent, token_start=0,
                token_end=0, category=cat)


def test_histogram_empty_selection():
    hist = specificity_histogram([span(0, 10)], selection=set())
    assert set(hist) == set(range(1, 13))
    assert all(v == 0 for v in hist.values())


def test_histogram_hand_count():
    spans = [span(0, 10, "a"), span(0, 10, "b"), span(0, 8, "c"), span(1, 3, "d")]
    hist = specificity_histogram(spans, selection={0})
    assert hist[10] == 2
    assert hist[8] == 1
    assert hist[3] == 0


def test_histogram_rejects_unannotated():
    with pytest.raises(ValueError, match="unannotated"):
        specificity_histogram([], selection={0, 1}, annotated_ids={0})


# -------------------------------------------------------------- buckets

def test_bucket_all_in_vocab():
    corpus = ParallelCorpus.from_lines(["abc", "cab"], ["abc", "cab"], name="x")
    vocab = build_char_vocab(corpus, n=10)
    records = recs([("abc", "abc", "abc"), ("cab", "cab", "cab")])
    buckets = bucket_by_char_oov(records, vocab)
    assert [b.label for b in buckets] == ["0"]
    assert buckets[0].size == 2


def test_bucket_scrambled_oov_sentences_score_worse():
    corpus = ParallelCorpus.from_lines(["abcdefgh"], ["abcdefgh"], name="x")
    vocab = build_char_vocab(corpus, n=10)
    records = [
        make_record(0, "abcdefgh", "abcdefgh", "abcdefgh", unit="char"),
        make_record(1, "abcdefgZ", "abcdefgZ", "hgfedZba", unit="char"),
        make_record(2, "aXcdeYgh", "aXcdeYgh", "ghXeYdca", unit="char"),
    ]
    buckets = {b.label: b for b in bucket_by_char_oov(records, vocab)}
    assert set(buckets) == {"0", "1", ">=2"}
    assert sum(b.size for b in buckets.values()) == 3
    assert buckets["1"].bleu < buckets["0"].bleu
    assert buckets[">=2"].bleu < buckets["0"].bleu


def test_bucket_empty_records_rejected():
    corpus = ParallelCorpus.from_lines(["a"], ["a"], name="x")
    with pytest.raises(ValueError):
        bucket_by_char_oov([], build_char_vocab(corpus, n=2))


# -------------------------------------------------------------- sweep

TINY = CopyTaskSpec(
    n_train=2000,
    n_dev=200,
    n_test=200,
    len_min=3,
    len_max=8,
    train_alphabet_size=20,
    out_alphabet_size=40,
    seed=11,
)
TINY_TCFG = TrainConfig(batch_size=32, learning_rate=2e-3, max_epochs=3, patience=2)


@pytest.fixture(scope="module")
def tiny_sweep(tmp_path_factory):
    cache = tmp_path_factory.mktemp("ckpts")
    data = generate_copy_corpus(TINY)
    result = vocab_sweep(
        data.train,
        data.dev,
        data.in_test,
        data.out_test,
        sizes=[20, 10],
        embed_dim=16,
        hidden_dim=32,
        seed=3,
        tcfg=TINY_TCFG,
        cache_dir=cache,
        log=lambda *_: None,
    )
    return data, cache, result


def test_sweep_rows_ordered_and_populated(tiny_sweep):
    _, _, result = tiny_sweep
    assert [r.vocab_size for r in result.in_rows] == [20, 10]
    for row in result.in_rows + result.out_rows:
        assert 0 <= row.bleu_raw <= 100
        assert 0 <= row.unk_pred_pct <= 100
        assert row.length_ratio > 0


def test_sweep_full_vocab_no_unks(tiny_sweep):
    _, _, result = tiny_sweep
    full = result.in_rows[0]
    assert full.unk_pred_pct == 0.0
    assert full.bleu_after_unk_rep == full.bleu_raw


def test_sweep_unk_pct_monotone_in_test(tiny_sweep):
    _, _, result = tiny_sweep
    pcts = [r.unk_pred_pct for r in result.in_rows]
    assert pcts == sorted(pcts)


def test_sweep_cache_gives_bit_identical_tsv(tiny_sweep):
    data, cache, result = tiny_sweep
    rerun = vocab_sweep(
        data.train,
        data.dev,
        data.in_test,
        data.out_test,
        sizes=[20, 10],
        embed_dim=16,
        hidden_dim=32,
        seed=3,
        tcfg=TINY_TCFG,
        cache_dir=cache,
        log=lambda *_: None,
    )
    assert sweep_tsv(rerun.in_rows) == sweep_tsv(result.in_rows)
    assert sweep_tsv(rerun.out_rows) == sweep_tsv(result.out_rows)
    assert len(list(cache.glob("*.npz"))) == 2  # reused, not retrained


def test_sweep_tsv_format(tiny_sweep):
    _, _, result = tiny_sweep
    text = sweep_tsv(result.in_rows)
    lines = text.splitlines()
    assert lines[0] == SWEEP_HEADER
    assert len(lines) == 3
    assert lines[1].split("\t")[0] == "20"


def test_sweep_rejects_bad_sizes(tiny_sweep):
    data, _, _ = tiny_sweep
    with pytest.raises(ValueError):
        vocab_sweep(data.train, data.dev, data.in_test, data.out_test, sizes=[])
    with pytest.raises(ValueError):
        vocab_sweep(
            data.train, data.dev, data.in_test, data.out_test, sizes=[9999]
        )
