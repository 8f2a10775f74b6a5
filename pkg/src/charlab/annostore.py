"""Annotation storage for noisy-text specificity labelling.

Sessions hold sentences; annotators attach category-labelled token spans
(token_start..token_end inclusive).  A sentence-level judgement is just a
full-range span.  Writes go through an append-only JSON-lines write-ahead
log, deletions are tombstones, and state is reconstructed by replay, so
any log prefix loads to a consistent store.
"""

from __future__ import annotations

import hashlib
import json
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional

from .corpus import tokenize

CATEGORIES: dict[int, str] = {
    1: "Letter deletion/addition",
    2: "Missing diacritics",
    3: "Phonetic writing",
    4: "Tokenisation error",
    5: "Wrong verb tense",
    6: "#; @, URL",
    7: "Wrong gender/grammatical number",
    8: "Inconsistent casing",
    9: "Emoji",
    10: "Named Entity",
    11: "Contraction",
    12: "Graphemic/punctuation stretching",
}

EXPORT_HEADER = "sentence_id\ttoken_start\ttoken_end\tcategory\tannotator"


class AnnotationError(ValueError):
    pass


class DuplicateSpanError(AnnotationError):
    def __init__(self, existing_id: str):
        super().__init__(f"duplicate span; existing id {existing_id}")
        self.existing_id = existing_id


@dataclass(frozen=True)
class Span:
    span_id: str
    sentence_id: int
    token_start: int
    token_end: int
    category: int
    annotator: str = ""
    timestamp: float = 0.0

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise AnnotationError(f"unknown category: {self.category}")
        if self.token_start < 0 or self.token_end < self.token_start:
            raise AnnotationError(
                f"bad span bounds: [{self.token_start}, {self.token_end}]"
            )

    def key(self) -> tuple:
        return (self.sentence_id, self.token_start, self.token_end,
                self.category, self.annotator)


@dataclass
class Session:
    session_id: str
    annotator: str
    sentences: list[str]
    token_counts: list[int]
    spans: dict[str, Span] = field(default_factory=dict)
    done: set[int] = field(default_factory=set)


def session_id_for(sentences: list[str], annotator: str) -> str:
    """Deterministic id; the same corpus and annotator always map to the
    same session, which is what makes create_session idempotent."""
    h = hashlib.sha256()
    for s in sentences:
        h.update(s.encode("utf-8") + b"\x00")
    h.update(annotator.encode("utf-8"))
    return h.hexdigest()[:16]


class AnnotationStore:
    """All sessions, persisted to one write-ahead log file."""

    def __init__(self, log_path):
        self.log_path = Path(log_path)
        self.sessions: dict[str, Session] = {}
        self._dead_span_ids: set[str] = set()
        self._span_counter = 0
        self._lock = threading.Lock()
        if self.log_path.exists():
            self._replay()

    # ------------------------------------------------------------ log

    def _replay(self) -> None:
        for lineno, line in enumerate(
            self.log_path.read_text(encoding="utf-8").splitlines(), start=1
        ):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise AnnotationError(
                    f"corrupt log line {lineno} in {self.log_path}: {exc}"
                ) from exc
            self._apply(rec, persist=False)

    def _append(self, rec: dict) -> None:
        with self.log_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")
            fh.flush()

    def _apply(self, rec: dict, persist: bool) -> None:
        op = rec.get("op")
        if op == "session":
            sid = rec["session_id"]
            sents = list(rec["sentences"])
            self.sessions[sid] = Session(
                session_id=sid,
                annotator=rec.get("annotator", ""),
                sentences=sents,
                token_counts=[len(tokenize(s)) for s in sents],
            )
        elif op == "span":
            span = Span(
                span_id=rec["span_id"],
                sentence_id=int(rec["sentence_id"]),
                token_start=int(rec["token_start"]),
                token_end=int(rec["token_end"]),
                category=int(rec["category"]),
                annotator=rec.get("annotator", ""),
                timestamp=float(rec.get("timestamp", 0.0)),
            )
            session = self._session(rec["session_id"])
            if not (0 <= span.sentence_id < len(session.sentences)):
                raise AnnotationError(f"sentence {span.sentence_id} out of range")
            if span.token_end >= session.token_counts[span.sentence_id]:
                raise AnnotationError(
                    f"token_end {span.token_end} >= sentence length "
                    f"{session.token_counts[span.sentence_id]}"
                )
            if span.span_id in session.spans or span.span_id in self._dead_span_ids:
                raise AnnotationError(f"span id not fresh: {span.span_id}")
            for other in session.spans.values():
                if other.key() == span.key():
                    raise DuplicateSpanError(other.span_id)
            session.spans[span.span_id] = span
            m = re.match(r"^s(\d+)$", span.span_id)
            if m:
                self._span_counter = max(self._span_counter, int(m.group(1)))
        elif op == "tombstone":
            session = self._session(rec["session_id"])
            span_id = rec["span_id"]
            if span_id not in session.spans:
                raise AnnotationError(f"no such span: {span_id}")
            del session.spans[span_id]
            self._dead_span_ids.add(span_id)
        elif op == "done":
            session = self._session(rec["session_id"])
            sent_id = int(rec["sentence_id"])
            if not (0 <= sent_id < len(session.sentences)):
                raise AnnotationError(f"sentence {sent_id} out of range")
            if rec.get("value", True):
                session.done.add(sent_id)
            else:
                session.done.discard(sent_id)
        else:
            raise AnnotationError(f"unknown log op: {op!r}")
        if persist:
            self._append(rec)

    # ------------------------------------------------------------ api

    def _session(self, session_id: str) -> Session:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise AnnotationError(f"no such session: {session_id}") from None

    def create_session(self, sentences: list[str], annotator: str = "") -> str:
        """Create (or re-open) the session for this corpus and annotator.
        Idempotent: repeated calls return the same id and keep spans."""
        sid = session_id_for(sentences, annotator)
        with self._lock:
            if sid in self.sessions:
                return sid
            self._apply(
                {
                    "op": "session",
                    "session_id": sid,
                    "annotator": annotator,
                    "sentences": list(sentences),
                },
                persist=True,
            )
        return sid

    def sentences(self, session_id: str, offset: int = 0, limit: Optional[int] = None):
        sents = self._session(session_id).sentences
        if offset < 0:
            raise AnnotationError("offset must be >= 0")
        stop = None if limit is None else offset + limit
        return sents[offset:stop]

    def add_span(
        self,
        session_id: str,
        sentence_id: int,
        token_start: int,
        token_end: int,
        category: int,
        annotator: str = "",
        span_id: Optional[str] = None,
    ) -> Span:
        with self._lock:
            if span_id is None:
                self._span_counter += 1
                span_id = f"s{self._span_counter}"
            self._apply(
                {
                    "op": "span",
                    "session_id": session_id,
                    "span_id": span_id,
                    "sentence_id": sentence_id,
                    "token_start": token_start,
                    "token_end": token_end,
                    "category": category,
                    "annotator": annotator,
                    "timestamp": time.time(),
                },
                persist=True,
            )
            return self._session(session_id).spans[span_id]

    def delete_span(self, session_id: str, span_id: str) -> None:
        with self._lock:
            self._apply(
                {"op": "tombstone", "session_id": session_id, "span_id": span_id},
                persist=True,
            )

    def mark_done(self, session_id: str, sentence_id: int, value: bool = True) -> None:
        with self._lock:
            self._apply(
                {
                    "op": "done",
                    "session_id": session_id,
                    "sentence_id": sentence_id,
                    "value": value,
                },
                persist=True,
            )

    def spans(self, session_id: str, sentence_id: Optional[int] = None) -> list[Span]:
        spans = self._session(session_id).spans.values()
        if sentence_id is not None:
            spans = (s for s in spans if s.sentence_id == sentence_id)
        return sorted(spans, key=lambda s: (s.sentence_id, s.token_start, s.category))

    def iter_all_spans(self) -> Iterator[Span]:
        for sid in sorted(self.sessions):
            yield from self.spans(sid)

    # ------------------------------------------------------------ export

    def export_tsv(self, session_id: str) -> str:
        """Stable TSV, sorted by (sentence_id, token_start, category)."""
        lines = [EXPORT_HEADER + "\n"]
        for s in self.spans(session_id):
            lines.append(
                f"{s.sentence_id}\t{s.token_start}\t{s.token_end}\t"
                f"{s.category}\t{s.annotator}\n"
            )
        return "".join(lines)

    def import_tsv(self, session_id: str, text: str) -> int:
        """Add spans from an export file; returns the number added."""
        lines = text.splitlines()
        if not lines or lines[0] != EXPORT_HEADER:
            raise AnnotationError("missing or wrong export header")
        n = 0
        for line in lines[1:]:
            if not line.strip():
                continue
            sent, start, end, cat, annotator = line.split("\t")
            self.add_span(
                session_id,
                sentence_id=int(sent),
                token_start=int(start),
                token_end=int(end),
                category=int(cat),
                annotator=annotator,
            )
            n += 1
        return n
