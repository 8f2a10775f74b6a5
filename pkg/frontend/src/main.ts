// DOM wiring: renders the current sentence as clickable tokens, handles
// click-drag range selection, keyboard category entry and export.

import { ApiClient } from "./api.js";
import { CATEGORIES, categoryByCode, categoryForKey } from "./palette.js";
import { AnnotatorState, selectionRange } from "./state.js";

// survives re-renders mid-drag; cleared on any mouseup
let dragging = false;
if (typeof document !== "undefined") {
  document.addEventListener("mouseup", () => {
    dragging = false;
  });
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  cls?: string,
  text?: string
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (cls) node.className = cls;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderSentence(state: AnnotatorState, root: HTMLElement): void {
  root.textContent = "";
  const sentence = state.sentences[state.current];
  if (!sentence) {
    root.append(el("p", "empty", "no sentences in this session"));
    return;
  }

  const prog = state.progress();
  root.append(
    el(
      "div",
      "progress",
      `sentence ${state.current + 1} / ${prog.total} (${prog.done} done)` +
        (state.unsyncedCount() ? ` - ${state.unsyncedCount()} unsynced` : "")
    )
  );

  const line = el("div", "tokens");
  sentence.tokens.forEach((tok, i) => {
    const t = el("span", "token", tok);
    t.dataset.index = String(i);
    if (state.selection) {
      const [a, b] = selectionRange(state.selection);
      if (i >= a && i <= b) t.classList.add("selected");
    }
    t.addEventListener("mousedown", (e) => {
      e.preventDefault();
      dragging = true;
      state.beginSelection(i);
      renderSentence(state, root);
    });
    t.addEventListener("mouseenter", () => {
      if (dragging) {
        state.extendSelection(i);
        renderSentence(state, root);
      }
    });
    line.append(t, document.createTextNode(" "));
  });
  root.append(line);

  const list = el("ul", "spans");
  for (const span of state.spansFor(sentence.sentenceId)) {
    const info = categoryByCode(span.category);
    const item = el(
      "li",
      span.synced ? "span-row" : "span-row unsynced",
      `[${span.tokenStart}..${span.tokenEnd}] ${info?.label ?? span.category}` +
        (span.synced ? "" : span.error ? ` - failed: ${span.error}` : " - saving...")
    );
    item.style.borderLeft = `6px solid ${info?.color ?? "#888"}`;
    const del = el("button", "delete", "x");
    del.addEventListener("click", () => {
      void state.deleteSpan(span.id).then(() => renderSentence(state, root));
    });
    item.append(" ", del);
    list.append(item);
  }
  root.append(list);

  const palette = el("div", "palette");
  for (const cat of CATEGORIES) {
    const b = el("button", "cat", `${cat.key} ${cat.label}`);
    b.style.background = cat.color;
    b.addEventListener("click", () => {
      void state.annotateSelection(cat.code).then(() => renderSentence(state, root));
    });
    palette.append(b);
  }
  root.append(palette);
}

export function attachKeyboard(state: AnnotatorState, root: HTMLElement): void {
  document.addEventListener("keydown", (e) => {
    const cat = categoryForKey(e.key);
    if (cat) {
      e.preventDefault();
      void state.annotateSelection(cat.code).then(() => renderSentence(state, root));
      return;
    }
    if (e.key === "Enter") {
      state.markDoneAndAdvance();
      renderSentence(state, root);
    } else if (e.key === "Escape") {
      state.clearSelection();
      renderSentence(state, root);
    } else if (e.key === "ArrowRight" || e.key === "ArrowLeft") {
      // keyboard-only range selection: arrows move/extend the focus token
      const sentence = state.sentences[state.current];
      if (!sentence) return;
      const delta = e.key === "ArrowRight" ? 1 : -1;
      if (!state.selection) {
        state.beginSelection(delta > 0 ? 0 : sentence.tokens.length - 1);
      } else if (e.shiftKey) {
        const f = state.selection.focus + delta;
        if (f >= 0 && f < sentence.tokens.length) state.extendSelection(f);
      } else {
        const a = state.selection.anchor + delta;
        if (a >= 0 && a < sentence.tokens.length) state.beginSelection(a);
      }
      renderSentence(state, root);
    }
  });
}

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) return;
  const params = new URLSearchParams(window.location.search);
  const sid = params.get("session");
  const annotator = params.get("annotator") ?? "anonymous";
  if (!sid) {
    root.textContent = "missing ?session=<id> in URL";
    return;
  }
  const api = new ApiClient("");
  const state = new AnnotatorState(api, sid, annotator);
  await state.load();
  renderSentence(state, root);
  attachKeyboard(state, root);

  const exportBtn = document.getElementById("export");
  exportBtn?.addEventListener("click", async () => {
    const tsv = await state.exportTsv();
    const blob = new Blob([tsv], { type: "text/tab-separated-values" });
    const a = document.createElement("a");
    a.href = URL.createObjectURL(blob);
    a.download = `annotations-${sid}.tsv`;
    a.click();
    URL.revokeObjectURL(a.href);
  });
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  void boot();
}
