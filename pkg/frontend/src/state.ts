// Client-side annotation state. Spans render optimistically the moment the
// annotator acts; each one carries a sync flag that the server
// acknowledgment clears. The server stays the source of truth: a reload
// drops anything it never accepted.

import { ApiClient, ServerSpan } from "./api.js";
import { tokenize } from "./tokenize.js";

export interface LocalSpan {
  /** Server id once acknowledged, otherwise a local temp id. */
  id: string;
  sentenceId: number;
  tokenStart: number;
  tokenEnd: number;
  category: number;
  annotator: string;
  synced: boolean;
  /** Set when the server rejected or the network failed. */
  error?: string;
}

export interface SentenceState {
  sentenceId: number;
  text: string;
  tokens: string[];
  done: boolean;
}

export interface Selection {
  anchor: number;
  focus: number;
}

export function selectionRange(sel: Selection): [number, number] {
  return [Math.min(sel.anchor, sel.focus), Math.max(sel.anchor, sel.focus)];
}

let tempCounter = 0;

export class AnnotatorState {
  sentences: SentenceState[] = [];
  spans: Map<string, LocalSpan> = new Map();
  current = 0;
  selection: Selection | null = null;

  constructor(
    private api: ApiClient,
    public sessionId: string,
    public annotator: string
  ) {}

  async load(): Promise<void> {
    const page = await this.api.sentences(this.sessionId, 0, 10_000);
    this.sentences = page.sentences.map((s) => ({
      sentenceId: s.sentence_id,
      text: s.text,
      tokens: tokenize(s.text),
      done: false,
    }));
    this.spans.clear();
    for (const s of page.sentences) {
      for (const sp of s.spans) this.adoptServerSpan(s.sentence_id, sp);
    }
  }

  private adoptServerSpan(sentenceId: number, sp: ServerSpan): void {
    this.spans.set(sp.span_id, {
      id: sp.span_id,
      sentenceId,
      tokenStart: sp.token_start,
      tokenEnd: sp.token_end,
      category: sp.category,
      annotator: sp.annotator,
      synced: true,
    });
  }

  // ----------------------------------------------------------- selection

  beginSelection(tokenIndex: number): void {
    this.selection = { anchor: tokenIndex, focus: tokenIndex };
  }

  extendSelection(tokenIndex: number): void {
    if (this.selection) this.selection.focus = tokenIndex;
  }

  clearSelection(): void {
    this.selection = null;
  }

  // ----------------------------------------------------------- spans

  spansFor(sentenceId: number): LocalSpan[] {
    return [...this.spans.values()]
      .filter((s) => s.sentenceId === sentenceId)
      .sort((a, b) => a.tokenStart - b.tokenStart || a.category - b.category);
  }

  unsyncedCount(): number {
    return [...this.spans.values()].filter((s) => !s.synced).length;
  }

  /**
   * Apply a category to the current selection: insert the span locally,
   * then reconcile with the server acknowledgment. Returns the local span,
   * or null when nothing is selected.
   */
  async annotateSelection(category: number): Promise<LocalSpan | null> {
    if (!this.selection) return null;
    const [start, end] = selectionRange(this.selection);
    const sentence = this.sentences[this.current];
    const local: LocalSpan = {
      id: `tmp-${++tempCounter}`,
      sentenceId: sentence.sentenceId,
      tokenStart: start,
      tokenEnd: end,
      category,
      annotator: this.annotator,
      synced: false,
    };
    this.spans.set(local.id, local);
    this.clearSelection();
    try {
      const serverId = await this.api.addSpan(this.sessionId, {
        sentence_id: local.sentenceId,
        token_start: local.tokenStart,
        token_end: local.tokenEnd,
        category: local.category,
        annotator: local.annotator,
      });
      this.spans.delete(local.id);
      local.id = serverId;
      local.synced = true;
      this.spans.set(serverId, local);
    } catch (err) {
      local.error = err instanceof Error ? err.message : String(err);
    }
    return local;
  }

  /** Optimistic delete; restores the span if the server refuses. */
  async deleteSpan(id: string): Promise<void> {
    const span = this.spans.get(id);
    if (!span) return;
    this.spans.delete(id);
    if (!span.synced) return; // never reached the server
    try {
      await this.api.deleteSpan(this.sessionId, id);
    } catch (err) {
      span.error = err instanceof Error ? err.message : String(err);
      this.spans.set(id, span);
    }
  }

  // ----------------------------------------------------------- navigation

  markDoneAndAdvance(): void {
    if (this.sentences.length === 0) return;
    this.sentences[this.current].done = true;
    if (this.current < this.sentences.length - 1) this.current += 1;
    this.clearSelection();
  }

  progress(): { done: number; total: number } {
    return {
      done: this.sentences.filter((s) => s.done).length,
      total: this.sentences.length,
    };
  }

  async exportTsv(): Promise<string> {
    return this.api.exportTsv(this.sessionId);
  }
}
