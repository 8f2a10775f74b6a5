"""charlab: a laboratory for character-level MT robustness to noisy text.

Corpus statistics, translation metrics, character-vocabulary truncation,
a copy-task generator and miniature encoder-decoder, word alignment,
UNK replacement and the downstream analyses, plus an annotation store.
"""

__version__ = "0.1.0"
