import numpy as np
import pytest
from scipy import stats as sps

from charlab.synth import CopyTaskSpec, alphabet, generate_copy_corpus


SMALL = CopyTaskSpec(n_train=300, n_dev=50, n_test=100, seed=42)


class TestAlphabet:
    def test_default_sizes(self):
        train, novel = alphabet(CopyTaskSpec())
        assert len(train) == 164
        assert len(novel) == 705 - 164
        assert not set(train) & set(novel)

    def test_degenerate_out_alphabet(self):
        spec = CopyTaskSpec(out_alphabet_size=164, novel_char_rate=0.0)
        train, novel = alphabet(spec)
        assert novel == []

    def test_no_whitespace_or_unprintable(self):
        train, novel = alphabet(CopyTaskSpec())
        for c in train + novel:
            assert c.isprintable() and not c.isspace()


class TestGenerate:
    def test_target_equals_source(self):
        data = generate_copy_corpus(SMALL)
        for corpus in data:
            assert all(s.raw == t.raw for s, t in corpus)

    def test_deterministic(self):
        a = generate_copy_corpus(SMALL)
        b = generate_copy_corpus(SMALL)
        for ca, cb in zip(a, b):
            assert [s.raw for s, _ in ca] == [s.raw for s, _ in cb]

    def test_seed_changes_output(self):
        a = generate_copy_corpus(SMALL)
        b = generate_copy_corpus(CopyTaskSpec(n_train=300, n_dev=50, n_test=100, seed=43))
        assert [s.raw for s, _ in a.train] != [s.raw for s, _ in b.train]

    def test_lengths_in_range_and_mean(self):
        spec = CopyTaskSpec(n_train=10_000, n_dev=10, n_test=10, seed=1)
        data = generate_copy_corpus(spec)
        lengths = [len(s.raw) for s, _ in data.train]
        assert min(lengths) >= 5 and max(lengths) <= 15
        assert 9.7 <= float(np.mean(lengths)) <= 10.3

    def test_train_and_in_test_use_train_alphabet_only(self):
        data = generate_copy_corpus(SMALL)
        train_chars, novel = alphabet(SMALL)
        allowed = set(train_chars)
        for corpus in (data.train, data.dev, data.in_test):
            for s, _ in corpus:
                assert set(s.raw) <= allowed

    def test_out_test_novel_rate_one(self):
        spec = CopyTaskSpec(n_train=50, n_dev=10, n_test=100, novel_char_rate=1.0, seed=3)
        data = generate_copy_corpus(spec)
        train_chars, _ = alphabet(spec)
        for s, _ in data.out_test:
            assert not set(s.raw) & set(train_chars)

    def test_novel_chars_never_in_train(self):
        data = generate_copy_corpus(SMALL)
        _, novel = alphabet(SMALL)
        novel_set = set(novel)
        for s, _ in data.train:
            assert not set(s.raw) & novel_set

    def test_uniform_histogram_chi_square(self):
        spec = CopyTaskSpec(n_train=10_000, n_dev=10, n_test=10, seed=9)
        data = generate_copy_corpus(spec)
        text = "".join(s.raw for s, _ in data.train)
        train_chars, _ = alphabet(spec)
        counts = np.array([text.count(c) for c in train_chars])
        assert counts.sum() >= 90_000
        _, p = sps.chisquare(counts)
        assert p > 0.001

    def test_spec_round_trip(self, tmp_path):
        SMALL.save(tmp_path / "spec.json")
        assert CopyTaskSpec.load(tmp_path / "spec.json") == SMALL

    def test_invalid_spec(self):
        with pytest.raises(ValueError):
            CopyTaskSpec(len_min=0)
        with pytest.raises(ValueError):
            CopyTaskSpec(novel_char_rate=1.5)
