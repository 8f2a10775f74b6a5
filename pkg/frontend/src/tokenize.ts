// Client-side tokenizer, a faithful port of the server's rules: the
// rendered token order must equal the server's token indices, so the two
// implementations have to agree on every sentence shown.
//
// \w in the server regexes is Unicode letters, digits and underscore
// (combining marks excluded); \p{L}\p{N}_ reproduces it here.

const W = "[\\p{L}\\p{N}_]";
const PROTECTED = new RegExp(`https?://\\S+|www\\.\\S+|[@#]${W}+`, "gu");
const WORDISH = new RegExp(`${W}+(?:['’\\-]${W}+)*|[^\\p{L}\\p{N}_\\s]`, "gu");

function findAll(re: RegExp, text: string): string[] {
  re.lastIndex = 0;
  return Array.from(text.matchAll(re), (m) => m[0]);
}

export function tokenize(raw: string): string[] {
  const tokens: string[] = [];
  for (const chunk of raw.split(/\s+/u).filter((c) => c.length > 0)) {
    let pos = 0;
    PROTECTED.lastIndex = 0;
    for (const m of chunk.matchAll(PROTECTED)) {
      const start = m.index ?? 0;
      if (start > pos) tokens.push(...findAll(WORDISH, chunk.slice(pos, start)));
      tokens.push(m[0]);
      pos = start + m[0].length;
    }
    if (pos < chunk.length) tokens.push(...findAll(WORDISH, chunk.slice(pos)));
  }
  return tokens;
}
