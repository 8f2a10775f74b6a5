"""Figure and table rendering for analysis outputs.

Every report writes the delimited table first, then a matching PNG figure
next to it, so results stay usable without a display.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .analysis import Bucket, SweepRow, sweep_tsv  # noqa: E402
from .annostore import CATEGORIES  # noqa: E402


def save_sweep_report(
    out_dir,
    in_rows: Sequence[SweepRow],
    out_rows: Optional[Sequence[SweepRow]] = None,
) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    splits = [("in_test", in_rows)]
    if out_rows:
        splits.append(("out_test", out_rows))
    for label, rows in splits:
        tsv_path = out_dir / f"sweep_{label}.tsv"
        tsv_path.write_text(sweep_tsv(rows), encoding="utf-8")
        written.append(tsv_path)

    fig, (ax_bleu, ax_unk) = plt.subplots(1, 2, figsize=(10, 4))
    for label, rows in splits:
        ns = [r.vocab_size for r in rows]
        ax_bleu.plot(ns, [r.bleu_raw for r in rows], "o-", label=f"{label} raw")
        ax_bleu.plot(ns, [r.bleu_after_unk_rep for r in rows], "s--",
                     label=f"{label} +unk-rep")
        ax_unk.plot(ns, [r.unk_pred_pct for r in rows], "o-", label=label)
    ax_bleu.set_xlabel("vocabulary size N")
    ax_bleu.set_ylabel("BLEU")
    ax_bleu.invert_xaxis()
    ax_bleu.legend(fontsize=8)
    ax_unk.set_xlabel("vocabulary size N")
    ax_unk.set_ylabel("% UNK predicted")
    ax_unk.invert_xaxis()
    ax_unk.legend(fontsize=8)
    fig.tight_layout()
    fig_path = out_dir / "sweep.png"
    fig.savefig(fig_path, dpi=120)
    plt.close(fig)
    written.append(fig_path)
    return written


def save_bucket_report(out_dir, buckets: Sequence[Bucket]) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tsv_path = out_dir / "buckets.tsv"
    lines = ["bucket\tsize\tbleu\n"]
    lines += [f"{b.label}\t{b.size}\t{b.bleu:.4f}\n" for b in buckets]
    tsv_path.write_text("".join(lines), encoding="utf-8")

    fig, ax = plt.subplots(figsize=(5, 4))
    ax.bar([b.label for b in buckets], [b.bleu for b in buckets], color="#4878a8")
    for i, b in enumerate(buckets):
        ax.text(i, b.bleu, f"n={b.size}", ha="center", va="bottom", fontsize=8)
    ax.set_xlabel("char-OOVs in source")
    ax.set_ylabel("BLEU")
    fig.tight_layout()
    fig_path = out_dir / "buckets.png"
    fig.savefig(fig_path, dpi=120)
    plt.close(fig)
    return [tsv_path, fig_path]


def save_histogram_report(
    out_dir,
    histograms: dict[str, dict[int, int]],
) -> list[Path]:
    """Grouped per-category span counts, e.g. {"best": ..., "worst": ...}."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = list(histograms)
    tsv_path = out_dir / "histogram.tsv"
    lines = ["category\tlabel\t" + "\t".join(names) + "\n"]
    for c in sorted(CATEGORIES):
        counts = "\t".join(str(histograms[n].get(c, 0)) for n in names)
        lines.append(f"{c}\t{CATEGORIES[c]}\t{counts}\n")
    tsv_path.write_text("".join(lines), encoding="utf-8")

    fig, ax = plt.subplots(figsize=(9, 4))
    cats = sorted(CATEGORIES)
    width = 0.8 / max(1, len(names))
    for k, name in enumerate(names):
        xs = [c - 0.4 + width * (k + 0.5) for c in cats]
        ax.bar(xs, [histograms[name].get(c, 0) for c in cats], width, label=name)
    ax.set_xticks(cats)
    ax.set_xticklabels([str(c) for c in cats])
    ax.set_xlabel("specificity category")
    ax.set_ylabel("span count")
    ax.legend()
    fig.tight_layout()
    fig_path = out_dir / "histogram.png"
    fig.savefig(fig_path, dpi=120)
    plt.close(fig)
    return [tsv_path, fig_path]


def save_training_curve(out_dir, epochs, train_losses, dev_losses) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(epochs, train_losses, "o-", label="train")
    ax.plot(epochs, dev_losses, "s--", label="dev")
    ax.set_xlabel("epoch")
    ax.set_ylabel("cross-entropy")
    ax.legend()
    fig.tight_layout()
    fig_path = out_dir / "train_curve.png"
    fig.savefig(fig_path, dpi=120)
    plt.close(fig)
    return fig_path
