// Fixed category palette. Downstream plots use these same colors, so this
// file is the single source of truth for category -> color.

export interface CategoryInfo {
  code: number;
  label: string;
  color: string;
  /** Key that applies this category to the current selection. */
  key: string;
}

export const CATEGORIES: CategoryInfo[] = [
  { code: 1, label: "Letter deletion/addition", color: "#4e79a7", key: "1" },
  { code: 2, label: "Missing diacritics", color: "#f28e2b", key: "2" },
  { code: 3, label: "Phonetic writing", color: "#e15759", key: "3" },
  { code: 4, label: "Tokenisation error", color: "#76b7b2", key: "4" },
  { code: 5, label: "Wrong verb tense", color: "#59a14f", key: "5" },
  { code: 6, label: "#; @, URL", color: "#edc948", key: "6" },
  { code: 7, label: "Wrong gender/grammatical number", color: "#b07aa1", key: "7" },
  { code: 8, label: "Inconsistent casing", color: "#ff9da7", key: "8" },
  { code: 9, label: "Emoji", color: "#9c755f", key: "9" },
  // shifted digits reach categories 10-12 without leaving the home row
  { code: 10, label: "Named Entity", color: "#bab0ac", key: "!" },
  { code: 11, label: "Contraction", color: "#86bcb6", key: "@" },
  { code: 12, label: "Graphemic/punctuation stretching", color: "#d37295", key: "#" },
];

export function categoryForKey(key: string): CategoryInfo | undefined {
  return CATEGORIES.find((c) => c.key === key);
}

export function categoryByCode(code: number): CategoryInfo | undefined {
  return CATEGORIES.find((c) => c.code === code);
}
