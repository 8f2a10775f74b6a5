import pytest

from charlab.corpus import (
    AlignmentMismatchError,
    ConfigurationError,
    CorpusError,
    MissingSideError,
    ParallelCorpus,
    corpus_stats,
    count_token_occurrences,
    load_corpus,
    load_corpus_tsv,
    save_corpus,
    tokenize,
)


def write(tmp_path, name, lines):
    p = tmp_path / name
    p.write_text("".join(l + "\n" for l in lines), encoding="utf-8")
    return p


class TestTokenize:
    def test_heart_example(self):
        assert tokenize("I ♥ you!") == ["I", "♥", "you", "!"]

    def test_empty(self):
        assert tokenize("") == []

    def test_already_split_idempotent(self):
        assert tokenize("a b") == ["a", "b"]

    @pytest.mark.parametrize(
        "raw",
        [
            "Hello, world!",
            "don't stop me-now...",
            "check https://example.com/x?y=1 now",
            "ping @user and #HashTag !",
            "émojis 😀 and çedillas",
            'quotes "inside" here',
        ],
    )
    def test_idempotent_on_rejoined(self, raw):
        toks = tokenize(raw)
        assert tokenize(" ".join(toks)) == toks

    @pytest.mark.parametrize(
        "raw", ["Hello, world!", "a  b\tc", "#tag @m http://x.org/a don't"]
    )
    def test_lossless_modulo_whitespace(self, raw):
        joined = "".join(tokenize(raw))
        assert joined == "".join(raw.split())

    def test_no_empty_tokens(self):
        assert all(tokenize("a .. b !? ...") )

    def test_unknown_scheme(self):
        with pytest.raises(ConfigurationError):
            tokenize("x", scheme="nope")

    def test_hashtag_and_mention_survive(self):
        assert tokenize("#JeMeLaDonne et @toi") == ["#JeMeLaDonne", "et", "@toi"]


class TestLoadCorpus:
    def test_parallel(self, tmp_path):
        src = write(tmp_path, "s.txt", ["a b", "c", "d e f"])
        tgt = write(tmp_path, "t.txt", ["x", "y z", "w"])
        corpus = load_corpus(src, tgt)
        assert len(corpus) == 3
        assert [s.raw for s, _ in corpus] == ["a b", "c", "d e f"]
        assert [t.raw for _, t in corpus] == ["x", "y z", "w"]

    def test_monolingual(self, tmp_path):
        src = write(tmp_path, "s.txt", ["a", "b", "c"])
        corpus = load_corpus(src)
        assert len(corpus) == 3
        assert all(t is None for _, t in corpus)

    def test_line_count_mismatch(self, tmp_path):
        src = write(tmp_path, "s.txt", ["a", "b", "c"])
        tgt = write(tmp_path, "t.txt", ["x", "y", "z", "w"])
        with pytest.raises(AlignmentMismatchError, match="3.*4"):
            load_corpus(src, tgt)

    def test_invalid_utf8_reports_offset(self, tmp_path):
        p = tmp_path / "bad.txt"
        p.write_bytes(b"ok\n\xff\xfe\n")
        with pytest.raises(CorpusError, match="byte offset 3"):
            load_corpus(p)

    def test_tsv_variant(self, tmp_path):
        p = tmp_path / "c.tsv"
        p.write_text("a b\tx y\nc\tz\n", encoding="utf-8")
        corpus = load_corpus_tsv(p)
        assert [t.raw for _, t in corpus] == ["x y", "z"]

    def test_round_trip(self, tmp_path):
        src = write(tmp_path, "s.txt", ["a b", "héllo ♥", "#tag you"])
        tgt = write(tmp_path, "t.txt", ["x", "y", "z"])
        corpus = load_corpus(src, tgt)
        save_corpus(corpus, tmp_path / "s2.txt", tmp_path / "t2.txt")
        again = load_corpus(tmp_path / "s2.txt", tmp_path / "t2.txt")
        assert [(s.tokens, t.tokens) for s, t in corpus] == [
            (s.tokens, t.tokens) for s, t in again
        ]


class TestStats:
    def test_hand_count(self):
        corpus = ParallelCorpus.from_lines(["a b a"])
        st = corpus_stats(corpus)
        assert st.n_sentences == 1
        assert st.n_tokens == 3
        assert st.vocab_size == 2
        assert st.ttr == pytest.approx(2 / 3)
        assert st.n_char_types == 2  # whitespace excluded

    def test_whitespace_flag(self):
        corpus = ParallelCorpus.from_lines(["a b a"])
        st = corpus_stats(corpus, include_whitespace=True)
        assert st.n_char_types == 3

    def test_invariants(self):
        corpus = ParallelCorpus.from_lines(["the cat", "the dog runs", "cat"])
        st = corpus_stats(corpus)
        assert st.ttr == st.vocab_size / st.n_tokens
        assert st.avg_sent_len == st.n_tokens / st.n_sentences
        assert 0 < st.ttr <= 1

    def test_empty_corpus_errors(self):
        with pytest.raises(CorpusError):
            corpus_stats(ParallelCorpus.from_lines([]))

    def test_missing_side(self):
        corpus = ParallelCorpus.from_lines(["a"])
        with pytest.raises(MissingSideError):
            corpus_stats(corpus, side="target")


class TestCountToken:
    def test_hash_count(self):
        corpus = ParallelCorpus.from_lines(["# a", "b #"])
        assert count_token_occurrences(corpus, "#") == 2

    def test_absent_token(self):
        corpus = ParallelCorpus.from_lines(["a b", "c"])
        assert count_token_occurrences(corpus, "zzz") == 0
