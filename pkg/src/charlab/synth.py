"""Seeded generator for the copy-task corpora.

Uniform random character sentences where target = source, with an
in-alphabet test set and an out-of-alphabet test set whose characters
mix a disjoint pool of novel characters into the training alphabet.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .corpus import ParallelCorpus, Sentence
from .vocab import UNK_CHAR

# Stream indices for per-corpus RNG splitting (PCG64 seeded through
# SeedSequence(seed, spawn_key)); documented so shards are reproducible.
_STREAM = {"train": 0, "dev": 1, "in_test": 2, "out_test": 3}


@dataclass(frozen=True)
class CopyTaskSpec:
    n_train: int = 100_000
    n_dev: int = 2_000
    n_test: int = 3_000
    len_min: int = 5
    len_max: int = 15
    train_alphabet_size: int = 164
    out_alphabet_size: int = 705
    novel_char_rate: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if not (1 <= self.len_min <= self.len_max):
            raise ValueError("need 1 <= len_min <= len_max")
        if not (0.0 <= self.novel_char_rate <= 1.0):
            raise ValueError("novel_char_rate must be in [0, 1]")

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(asdict(self), indent=2) + "\n", encoding="utf-8")

    @staticmethod
    def load(path) -> "CopyTaskSpec":
        return CopyTaskSpec(**json.loads(Path(path).read_text(encoding="utf-8")))


class CopyTaskData(NamedTuple):
    train: ParallelCorpus
    dev: ParallelCorpus
    in_test: ParallelCorpus
    out_test: ParallelCorpus


def _char_pool(size: int) -> list[str]:
    """First `size` printable, non-space, non-combining codepoints in
    codepoint order.  Deterministic across platforms and Python builds."""
    pool = []
    cp = 0x21
    while len(pool) < size:
        c = chr(cp)
        if (
            c.isprintable()
            and not c.isspace()
            and c != UNK_CHAR
            and unicodedata.category(c)[0] not in ("M", "C")
        ):
            pool.append(c)
        cp += 1
        if cp > 0x2FFFF:
            raise ValueError(f"cannot assemble a pool of {size} characters")
    return pool


def alphabet(spec: CopyTaskSpec) -> tuple[list[str], list[str]]:
    """Training alphabet and the disjoint novel-character pool used by
    the out-of-alphabet test set."""
    novel_size = max(0, spec.out_alphabet_size - spec.train_alphabet_size)
    pool = _char_pool(spec.train_alphabet_size + novel_size)
    return pool[: spec.train_alphabet_size], pool[spec.train_alphabet_size :]


def _gen_sentences(
    rng: np.random.Generator,
    n: int,
    spec: CopyTaskSpec,
    train_chars: list[str],
    novel_chars: list[str],
    novel_rate: float,
) -> list[str]:
    lengths = rng.integers(spec.len_min, spec.len_max + 1, size=n)
    out = []
    for ln in lengths:
        idx = rng.integers(0, len(train_chars), size=int(ln))
        chars = [train_chars[i] for i in idx]
        if novel_rate > 0.0 and novel_chars:
            novel_mask = rng.random(int(ln)) < novel_rate
            novel_idx = rng.integers(0, len(novel_chars), size=int(ln))
            for j in range(int(ln)):
                if novel_mask[j]:
                    chars[j] = novel_chars[novel_idx[j]]
        out.append("".join(chars))
    return out


def generate_copy_corpus(spec: CopyTaskSpec) -> CopyTaskData:
    """Generate train/dev/in-test/out-test copy corpora (target = source),
    fully determined by spec.seed."""
    train_chars, novel_chars = alphabet(spec)

    def make(name: str, n: int, novel_rate: float) -> ParallelCorpus:
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(spec.seed, spawn_key=(_STREAM[name],)))
        )
        lines = _gen_sentences(rng, n, spec, train_chars, novel_chars, novel_rate)
        sents = [Sentence(l) for l in lines]
        pairs = tuple((s, s) for s in sents)
        return ParallelCorpus(pairs=pairs, name=name)

    return CopyTaskData(
        train=make("train", spec.n_train, 0.0),
        dev=make("dev", spec.n_dev, 0.0),
        in_test=make("in_test", spec.n_test, 0.0),
        out_test=make("out_test", spec.n_test, spec.novel_char_rate),
    )
