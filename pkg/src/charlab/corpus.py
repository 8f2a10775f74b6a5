"""Corpus ingestion, tokenization and descriptive statistics."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional


class CorpusError(ValueError):
    pass


class AlignmentMismatchError(CorpusError):
    pass


class MissingSideError(CorpusError):
    pass


class ConfigurationError(ValueError):
    pass


# URLs, @mentions and #hashtags must survive tokenization as single units;
# they carry most of the social-media-specific signal downstream.
_PROTECTED = re.compile(
    r"""https?://\S+|www\.\S+|[@#]\w+""",
    re.UNICODE,
)

# Words may contain internal apostrophes and hyphens ("don't", "peut-être");
# everything else that is neither word nor whitespace becomes its own token.
_WORDISH = re.compile(r"""\w+(?:['’\-]\w+)*|[^\w\s]""", re.UNICODE)


def tokenize(raw: str, scheme: str = "moses13a") -> list[str]:
    """Split ``raw`` into tokens.

    The only scheme currently implemented, ``moses13a``, splits on
    whitespace and detaches punctuation except intra-word apostrophes
    and hyphens, after a pre-pass that keeps URLs, @mentions and
    #hashtags intact.  Deterministic and idempotent on re-joined output.
    """
    if scheme != "moses13a":
        raise ConfigurationError(f"unknown tokenizer scheme: {scheme!r}")
    tokens: list[str] = []
    for chunk in raw.split():
        pos = 0
        for m in _PROTECTED.finditer(chunk):
            if m.start() > pos:
                tokens.extend(_WORDISH.findall(chunk[pos : m.start()]))
            tokens.append(m.group())
            pos = m.end()
        if pos < len(chunk):
            tokens.extend(_WORDISH.findall(chunk[pos:]))
    return tokens


@dataclass(frozen=True)
class Sentence:
    raw: str
    tokens: tuple[str, ...] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.tokens is None:
            object.__setattr__(self, "tokens", tuple(tokenize(self.raw)))

    @property
    def chars(self) -> list[str]:
        return list(self.raw)

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class ParallelCorpus:
    pairs: tuple[tuple[Sentence, Optional[Sentence]], ...]
    name: str = ""

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def side(self, which: str) -> list[Sentence]:
        if which == "source":
            return [src for src, _ in self.pairs]
        if which == "target":
            if any(tgt is None for _, tgt in self.pairs):
                raise MissingSideError(f"corpus {self.name!r} has pairs without a target side")
            return [tgt for _, tgt in self.pairs]
        raise ConfigurationError(f"unknown side: {which!r}")

    @staticmethod
    def from_lines(
        source_lines: Iterable[str],
        target_lines: Optional[Iterable[str]] = None,
        name: str = "",
    ) -> "ParallelCorpus":
        sources = [Sentence(line) for line in source_lines]
        if target_lines is None:
            pairs = tuple((s, None) for s in sources)
        else:
            targets = [Sentence(line) for line in target_lines]
            if len(sources) != len(targets):
                raise AlignmentMismatchError(
                    f"source has {len(sources)} lines but target has {len(targets)}"
                )
            pairs = tuple(zip(sources, targets))
        return ParallelCorpus(pairs=pairs, name=name)


@dataclass(frozen=True)
class CorpusStats:
    n_sentences: int
    n_tokens: int
    avg_sent_len: float
    ttr: float
    vocab_size: int
    n_char_types: int

    def as_rows(self) -> list[tuple[str, str]]:
        return [
            ("n_sentences", str(self.n_sentences)),
            ("n_tokens", str(self.n_tokens)),
            ("avg_sent_len", f"{self.avg_sent_len:.6g}"),
            ("ttr", f"{self.ttr:.6g}"),
            ("vocab_size", str(self.vocab_size)),
            ("n_char_types", str(self.n_char_types)),
        ]


def _read_lines(path: Path) -> list[str]:
    data = path.read_bytes()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CorpusError(f"{path}: invalid UTF-8 at byte offset {exc.start}") from exc
    if text.endswith("\n"):
        text = text[:-1]
    return text.split("\n") if text else []


def load_corpus(
    source_path: str | Path,
    target_path: Optional[str | Path] = None,
    name: str = "",
) -> ParallelCorpus:
    """Load a corpus from one-sentence-per-line UTF-8 files."""
    src_lines = _read_lines(Path(source_path))
    tgt_lines = _read_lines(Path(target_path)) if target_path is not None else None
    return ParallelCorpus.from_lines(src_lines, tgt_lines, name=name or str(source_path))


def load_corpus_tsv(path: str | Path, name: str = "") -> ParallelCorpus:
    """Load a parallel corpus from a ``src\\ttgt`` TSV file."""
    sources, targets = [], []
    for i, line in enumerate(_read_lines(Path(path))):
        parts = line.split("\t")
        if len(parts) != 2:
            raise CorpusError(f"{path}:{i + 1}: expected 2 tab-separated fields, got {len(parts)}")
        sources.append(parts[0])
        targets.append(parts[1])
    return ParallelCorpus.from_lines(sources, targets, name=name or str(path))


def save_corpus(
    corpus: ParallelCorpus,
    source_path: str | Path,
    target_path: Optional[str | Path] = None,
) -> None:
    src_text = "".join(s.raw + "\n" for s, _ in corpus.pairs)
    Path(source_path).write_text(src_text, encoding="utf-8")
    if target_path is not None:
        tgt = corpus.side("target")
        Path(target_path).write_text("".join(s.raw + "\n" for s in tgt), encoding="utf-8")


def corpus_stats(
    corpus: ParallelCorpus,
    side: str = "source",
    include_whitespace: bool = False,
) -> CorpusStats:
    """Token and character statistics over one side of a corpus."""
    sentences = corpus.side(side)
    if not sentences:
        raise CorpusError("cannot compute statistics of an empty corpus")
    n_tokens = 0
    vocab: set[str] = set()
    char_types: set[str] = set()
    for s in sentences:
        n_tokens += len(s.tokens)
        vocab.update(s.tokens)
        for c in s.raw:
            if include_whitespace or not c.isspace():
                char_types.add(c)
    if n_tokens == 0:
        raise CorpusError("corpus has no tokens")
    return CorpusStats(
        n_sentences=len(sentences),
        n_tokens=n_tokens,
        avg_sent_len=n_tokens / len(sentences),
        ttr=len(vocab) / n_tokens,
        vocab_size=len(vocab),
        n_char_types=len(char_types),
    )


def count_token_occurrences(corpus: ParallelCorpus, token: str, side: str = "source") -> int:
    return sum(s.tokens.count(token) for s in corpus.side(side))
