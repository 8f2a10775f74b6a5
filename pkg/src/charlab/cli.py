"""Command-line entry point.

Exit codes:
  0  success
  2  usage error (unknown flag or subcommand, bad flag value)
  3  missing or unreadable input file
  4  malformed data (bad corpus, bad alignment, schema violation)
  5  training failure (non-finite loss)

Config precedence is flags > --config file > built-in defaults.  Every run
dumps its resolved configuration: config.json under --out when the command
writes files, otherwise a single line on stderr.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import align as al
from . import analysis, metrics, model, synth, unkrep
from .annostore import AnnotationError, AnnotationStore
from .corpus import (
    CorpusError,
    ParallelCorpus,
    corpus_stats,
    load_corpus,
    load_corpus_tsv,
    save_corpus,
)
from .vocab import CharVocab, build_char_vocab

EXIT_MISSING_FILE = 3
EXIT_BAD_DATA = 4
EXIT_TRAINING = 5


def _fail(code: int, message: str) -> "click.exceptions.Exit":
    click.echo(f"error: {message}", err=True)
    return SystemExit(code)


def _resolved(ctx, **params) -> dict:
    """Merge --config file values under explicitly given flags."""
    cfg = ctx.obj.get("config", {}) if ctx.obj else {}
    out = {}
    for name, value in params.items():
        src = ctx.get_parameter_source(name)
        if (
            src is not None
            and src.name == "DEFAULT"
            and name in cfg
        ):
            out[name] = cfg[name]
        else:
            out[name] = value
    return out


def _dump_config(command: str, params: dict, out_dir=None) -> None:
    payload = {"command": command}
    payload.update(
        {k: (str(v) if isinstance(v, Path) else v) for k, v in params.items()}
    )
    text = json.dumps(payload, sort_keys=True)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "config.json").write_text(text + "\n", encoding="utf-8")
    else:
        click.echo(f"config: {text}", err=True)


def _load_lines_corpus(path, name=""):
    try:
        return load_corpus(path, name=name)
    except FileNotFoundError:
        raise _fail(EXIT_MISSING_FILE, f"no such file: {path}")
    except (CorpusError, UnicodeError) as exc:
        raise _fail(EXIT_BAD_DATA, str(exc))


def _load_tsv_corpus(path, name=""):
    try:
        return load_corpus_tsv(path, name=name)
    except FileNotFoundError:
        raise _fail(EXIT_MISSING_FILE, f"no such file: {path}")
    except (CorpusError, UnicodeError) as exc:
        raise _fail(EXIT_BAD_DATA, str(exc))


def _pair_corpus(src_path, tgt_path, name=""):
    src = _load_lines_corpus(src_path)
    tgt = _load_lines_corpus(tgt_path)
    if len(src) != len(tgt):
        raise _fail(EXIT_BAD_DATA, f"{src_path} and {tgt_path} differ in length")
    return ParallelCorpus.from_lines(
        [s.raw for s, _ in src], [s.raw for s, _ in tgt], name=name
    )


@click.group(help=__doc__)
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON file with default flag values.")
@click.pass_context
def main(ctx, config_path):
    ctx.ensure_object(dict)
    if config_path:
        try:
            ctx.obj["config"] = json.loads(Path(config_path).read_text("utf-8"))
        except FileNotFoundError:
            raise _fail(EXIT_MISSING_FILE, f"no such config file: {config_path}")
        except json.JSONDecodeError as exc:
            raise _fail(EXIT_BAD_DATA, f"bad config file: {exc}")


# ------------------------------------------------------------- diagnostics

@main.command(help="Token/char statistics of a corpus side, as TSV.")
@click.option("--src", "src_path", required=True, type=click.Path())
@click.option("--include-whitespace", is_flag=True, default=False,
              help="Count whitespace among character types (default: no).")
@click.pass_context
def stats(ctx, src_path, include_whitespace):
    p = _resolved(ctx, src_path=src_path, include_whitespace=include_whitespace)
    corpus = _load_lines_corpus(p["src_path"])
    st = corpus_stats(corpus, include_whitespace=p["include_whitespace"])
    _dump_config("stats", p)
    for key, value in st.as_rows():
        click.echo(f"{key}\t{value}")


@main.command(help="Corpus BLEU-4 of hypotheses against references.")
@click.option("--hyp", "hyp_path", required=True, type=click.Path())
@click.option("--ref", "ref_path", required=True, type=click.Path())
@click.option("--unit", type=click.Choice(["token", "char"]), default="token",
              help="n-gram unit (default: token).")
@click.option("--smoothing", type=click.Choice(["exp-floor", "none"]),
              default="exp-floor")
@click.pass_context
def bleu(ctx, hyp_path, ref_path, unit, smoothing):
    p = _resolved(ctx, hyp_path=hyp_path, ref_path=ref_path, unit=unit,
                  smoothing=smoothing)
    hyps = _load_lines_corpus(p["hyp_path"]).side("source")
    refs = _load_lines_corpus(p["ref_path"]).side("source")
    if len(hyps) != len(refs):
        raise _fail(EXIT_BAD_DATA, "hypothesis/reference line counts differ")

    def units(s):
        return s.chars if p["unit"] == "char" else s.tokens

    score = metrics.bleu([units(h) for h in hyps], [units(r) for r in refs],
                         smoothing=p["smoothing"])
    _dump_config("bleu", p)
    click.echo(f"bleu\t{score.score:.4f}")
    click.echo("precisions\t" + "\t".join(f"{x:.6f}" for x in score.precisions))
    click.echo(f"brevity_penalty\t{score.brevity_penalty:.6f}")
    click.echo(f"hyp_len\t{score.hyp_len}")
    click.echo(f"ref_len\t{score.ref_len}")


@main.command(help="Per-line Levenshtein distance and normalized distance.")
@click.option("--hyp", "hyp_path", required=True, type=click.Path())
@click.option("--ref", "ref_path", required=True, type=click.Path())
@click.option("--unit", type=click.Choice(["token", "char"]), default="token")
@click.pass_context
def editdist(ctx, hyp_path, ref_path, unit):
    p = _resolved(ctx, hyp_path=hyp_path, ref_path=ref_path, unit=unit)
    hyps = _load_lines_corpus(p["hyp_path"]).side("source")
    refs = _load_lines_corpus(p["ref_path"]).side("source")
    if len(hyps) != len(refs):
        raise _fail(EXIT_BAD_DATA, "hypothesis/reference line counts differ")
    _dump_config("editdist", p)
    click.echo("dist\tnorm")
    for h, r in zip(hyps, refs):
        hu = h.chars if p["unit"] == "char" else h.tokens
        ru = r.chars if p["unit"] == "char" else r.tokens
        d, norm = metrics.edit_distance(hu, ru)
        click.echo(f"{d}\t{norm:.6f}")


@main.command(help="KL divergence of token n-gram distributions, in nats.")
@click.option("--p", "p_path", required=True, type=click.Path())
@click.option("--q", "q_path", required=True, type=click.Path())
@click.option("--order", default=3, show_default=True)
@click.option("--alpha", default=0.5, show_default=True,
              help="Add-alpha smoothing constant.")
@click.pass_context
def kl(ctx, p_path, q_path, order, alpha):
    p = _resolved(ctx, p_path=p_path, q_path=q_path, order=order, alpha=alpha)
    pc = _load_lines_corpus(p["p_path"])
    qc = _load_lines_corpus(p["q_path"])
    try:
        value = metrics.kl_divergence_ngram(pc, qc, n=p["order"], alpha=p["alpha"])
    except ValueError as exc:
        raise _fail(EXIT_BAD_DATA, str(exc))
    _dump_config("kl", p)
    click.echo(f"kl_{p['order']}gram\t{value:.6f}")


@main.command(help="Perplexity of an eval corpus under an interpolated "
                   "n-gram model trained on --train.")
@click.option("--train", "train_path", required=True, type=click.Path())
@click.option("--eval", "eval_path", required=True, type=click.Path())
@click.option("--order", default=3, show_default=True)
@click.pass_context
def ppl(ctx, train_path, eval_path, order):
    p = _resolved(ctx, train_path=train_path, eval_path=eval_path, order=order)
    train_c = _load_lines_corpus(p["train_path"])
    eval_c = _load_lines_corpus(p["eval_path"])
    lambdas = metrics.DEFAULT_LAMBDAS if p["order"] == 3 else tuple(
        [1.0 / p["order"]] * p["order"]
    )
    lm = metrics.train_lm(train_c, order=p["order"], lambdas=lambdas)
    value = metrics.perplexity(lm, eval_c)
    _dump_config("ppl", p)
    click.echo(f"perplexity\t{value:.4f}")


@main.command(help="Percentage of eval tokens unseen in the train corpus.")
@click.option("--train", "train_path", required=True, type=click.Path())
@click.option("--eval", "eval_path", required=True, type=click.Path())
@click.pass_context
def oov(ctx, train_path, eval_path):
    p = _resolved(ctx, train_path=train_path, eval_path=eval_path)
    train_c = _load_lines_corpus(p["train_path"])
    eval_c = _load_lines_corpus(p["eval_path"])
    vocab = set()
    for s in train_c.side("source"):
        vocab.update(s.tokens)
    _dump_config("oov", p)
    click.echo(f"oov_pct\t{metrics.oov_rate(eval_c, vocab):.4f}")


@main.command(help="Hypothesis/reference length ratio over a corpus pair.")
@click.option("--hyp", "hyp_path", required=True, type=click.Path())
@click.option("--ref", "ref_path", required=True, type=click.Path())
@click.option("--unit", default="token", show_default=True,
              type=click.Choice(["token", "char"]))
@click.pass_context
def lenratio(ctx, hyp_path, ref_path, unit):
    p = _resolved(ctx, hyp_path=hyp_path, ref_path=ref_path, unit=unit)
    hyps = _load_lines_corpus(p["hyp_path"]).side("source")
    refs = _load_lines_corpus(p["ref_path"]).side("source")
    hu = [s.chars if p["unit"] == "char" else s.tokens for s in hyps]
    ru = [s.chars if p["unit"] == "char" else s.tokens for s in refs]
    try:
        value = metrics.length_ratio(hu, ru)
    except ValueError as exc:
        raise _fail(EXIT_BAD_DATA, str(exc))
    _dump_config("lenratio", p)
    click.echo(f"len_ratio\t{value:.6f}")


@main.command(help="Build a frequency-ranked character vocabulary of size N.")
@click.option("--src", "src_path", required=True, type=click.Path())
@click.option("-n", "--size", "size", required=True, type=int,
              help="Vocabulary size N (characters kept).")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.pass_context
def vocab(ctx, src_path, size, out_dir):
    p = _resolved(ctx, src_path=src_path, size=size, out_dir=out_dir)
    corpus = _load_lines_corpus(p["src_path"])
    v = build_char_vocab(corpus, n=p["size"])
    out = Path(p["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    v.save(out / "vocab.tsv")
    _dump_config("vocab", p, out_dir=out)
    click.echo(f"wrote {out / 'vocab.tsv'} ({v.size_n} characters)")


# ------------------------------------------------------------- copy task

@main.command(name="gen-copy", help="Generate the seeded synthetic copy-task "
                                    "corpora (train/dev/in_test/out_test).")
@click.option("--seed", required=True, type=int,
              help="Generation seed (required; no wall-clock default).")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--n-train", default=100_000, show_default=True)
@click.option("--n-dev", default=2_000, show_default=True)
@click.option("--n-test", default=3_000, show_default=True)
@click.option("--len-min", default=5, show_default=True)
@click.option("--len-max", default=15, show_default=True)
@click.option("--train-alphabet", default=164, show_default=True)
@click.option("--out-alphabet", default=705, show_default=True)
@click.option("--novel-rate", default=0.5, show_default=True,
              help="Per-character probability of a novel character in out_test.")
@click.pass_context
def gen_copy(ctx, seed, out_dir, n_train, n_dev, n_test, len_min, len_max,
             train_alphabet, out_alphabet, novel_rate):
    p = _resolved(ctx, seed=seed, out_dir=out_dir, n_train=n_train, n_dev=n_dev,
                  n_test=n_test, len_min=len_min, len_max=len_max,
                  train_alphabet=train_alphabet, out_alphabet=out_alphabet,
                  novel_rate=novel_rate)
    spec = synth.CopyTaskSpec(
        n_train=p["n_train"], n_dev=p["n_dev"], n_test=p["n_test"],
        len_min=p["len_min"], len_max=p["len_max"],
        train_alphabet_size=p["train_alphabet"],
        out_alphabet_size=p["out_alphabet"],
        novel_char_rate=p["novel_rate"], seed=p["seed"],
    )
    data = synth.generate_copy_corpus(spec)
    out = Path(p["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    for name in ("train", "dev", "in_test", "out_test"):
        corpus = getattr(data, name)
        lines = "".join(f"{s.raw}\t{t.raw}\n" for s, t in corpus.pairs)
        (out / f"{name}.tsv").write_text(lines, encoding="utf-8")
    spec.save(out / "copyspec.json")
    _dump_config("gen-copy", p, out_dir=out)
    click.echo(f"wrote 4 corpora under {out}")


def _train_flags(f):
    f = click.option("--embed-dim", default=64, show_default=True)(f)
    f = click.option("--hidden-dim", default=128, show_default=True)(f)
    f = click.option("--batch-size", default=64, show_default=True)(f)
    f = click.option("--lr", default=1e-4, show_default=True)(f)
    f = click.option("--epochs", default=10, show_default=True)(f)
    f = click.option("--patience", default=2, show_default=True)(f)
    return f


@main.command(name="train-copy", help="Train the character copy model on a "
                                      "gen-copy data directory.")
@click.option("--data", "data_dir", required=True, type=click.Path())
@click.option("--vocab-size", required=True, type=int)
@click.option("--seed", required=True, type=int,
              help="Model init/shuffle seed (required).")
@click.option("--out", "out_dir", required=True, type=click.Path())
@_train_flags
@click.pass_context
def train_copy(ctx, data_dir, vocab_size, seed, out_dir, embed_dim, hidden_dim,
               batch_size, lr, epochs, patience):
    p = _resolved(ctx, data_dir=data_dir, vocab_size=vocab_size, seed=seed,
                  out_dir=out_dir, embed_dim=embed_dim, hidden_dim=hidden_dim,
                  batch_size=batch_size, lr=lr, epochs=epochs, patience=patience)
    data = Path(p["data_dir"])
    train_c = _load_tsv_corpus(data / "train.tsv", name="train")
    dev_c = _load_tsv_corpus(data / "dev.tsv", name="dev")
    v = build_char_vocab(train_c, n=p["vocab_size"])
    mcfg = model.ModelConfig(vocab=v, embed_dim=p["embed_dim"],
                             hidden_dim=p["hidden_dim"], seed=p["seed"])
    tcfg = model.TrainConfig(batch_size=p["batch_size"], learning_rate=p["lr"],
                             max_epochs=p["epochs"], patience=p["patience"])
    out = Path(p["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    _dump_config("train-copy", p, out_dir=out)
    try:
        m, log = model.train(train_c, dev_c, mcfg, tcfg,
                             log_path=out / "train_log.tsv")
    except model.TrainingDivergedError as exc:
        raise _fail(EXIT_TRAINING, str(exc))
    m.save(out / "model.npz")
    from .report import save_training_curve
    save_training_curve(out, [e.epoch for e in log],
                        [e.train_loss for e in log], [e.dev_loss for e in log])
    click.echo(f"best dev loss {min(e.dev_loss for e in log):.4f}; "
               f"wrote {out / 'model.npz'}")


@main.command(help="Greedy-decode a source file with a trained copy model.")
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("--src", "src_path", required=True, type=click.Path())
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--attention", "save_attention", is_flag=True, default=False,
              help="Also dump per-sentence attention matrices (npz).")
@click.pass_context
def decode(ctx, model_path, src_path, out_dir, save_attention):
    import numpy as np

    p = _resolved(ctx, model_path=model_path, src_path=src_path,
                  out_dir=out_dir, save_attention=save_attention)
    if not Path(p["model_path"]).exists():
        raise _fail(EXIT_MISSING_FILE, f"no such file: {p['model_path']}")
    m = model.CopyModel.load(p["model_path"])
    corpus = _load_lines_corpus(p["src_path"])
    results = m.translate_batch(corpus.side("source"))
    out = Path(p["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    (out / "hyps.txt").write_text(
        "".join(r.output_text + "\n" for r in results), encoding="utf-8"
    )
    if p["save_attention"]:
        np.savez(out / "attention.npz",
                 **{f"sent{i}": r.attention for i, r in enumerate(results)})
    _dump_config("decode", p, out_dir=out)
    click.echo(f"wrote {out / 'hyps.txt'} ({len(results)} lines)")


# ------------------------------------------------------------- alignment

@main.command(name="align", help="Train a lexical aligner (IBM1 or diag2) and "
                                 "write Pharaoh alignments.")
@click.option("--src", "src_path", required=True, type=click.Path())
@click.option("--tgt", "tgt_path", required=True, type=click.Path())
@click.option("--model", "aln_model", type=click.Choice(["ibm1", "diag2"]),
              default="ibm1", show_default=True)
@click.option("--iterations", default=5, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.pass_context
def align_cmd(ctx, src_path, tgt_path, aln_model, iterations, out_dir):
    p = _resolved(ctx, src_path=src_path, tgt_path=tgt_path, aln_model=aln_model,
                  iterations=iterations, out_dir=out_dir)
    corpus = _pair_corpus(p["src_path"], p["tgt_path"], name="align")
    try:
        table, prior, lls = al.em_train(corpus, iterations=p["iterations"],
                                        model=p["aln_model"])
    except ValueError as exc:
        raise _fail(EXIT_BAD_DATA, str(exc))
    out = Path(p["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    table.dump(out / "ttable.tsv")
    lines = []
    for src, tgt in corpus.pairs:
        a = al.viterbi_align(table, src, tgt, prior=prior)
        lines.append(a.pharaoh() + "\n")
    (out / "alignments.txt").write_text("".join(lines), encoding="utf-8")
    (out / "loglik.tsv").write_text(
        "".join(f"{i + 1}\t{ll:.6f}\n" for i, ll in enumerate(lls)), "utf-8"
    )
    _dump_config("align", p, out_dir=out)
    click.echo(f"wrote {out / 'alignments.txt'}")


@main.command(name="unk-replace", help="Replace UNK markers in hypotheses "
                                       "using alignments into the source.")
@click.option("--src", "src_path", required=True, type=click.Path())
@click.option("--hyp", "hyp_path", required=True, type=click.Path())
@click.option("--align", "align_path", type=click.Path(), default=None,
              help="Pharaoh alignment file (one line per sentence).")
@click.option("--identity", is_flag=True, default=False,
              help="Use position-identity alignment (copy task).")
@click.option("--unit", type=click.Choice(["token", "char"]), default="token")
@click.option("--on-null", type=click.Choice(["delete", "keep"]),
              default="delete", show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.pass_context
def unk_replace_cmd(ctx, src_path, hyp_path, align_path, identity, unit,
                    on_null, out_dir):
    p = _resolved(ctx, src_path=src_path, hyp_path=hyp_path,
                  align_path=align_path, identity=identity, unit=unit,
                  on_null=on_null, out_dir=out_dir)
    if bool(p["align_path"]) == bool(p["identity"]):
        raise _fail(EXIT_BAD_DATA, "give exactly one of --align or --identity")
    srcs = [s.raw for s, _ in _load_lines_corpus(p["src_path"]).pairs]
    hyps = [s.raw for s, _ in _load_lines_corpus(p["hyp_path"]).pairs]
    if len(srcs) != len(hyps):
        raise _fail(EXIT_BAD_DATA, "source/hypothesis line counts differ")
    policy = unkrep.ReplacementPolicy(on_null=p["on_null"], unit=p["unit"])

    def n_units(text):
        return len(list(text)) if p["unit"] == "char" else len(text.split())

    try:
        if p["identity"]:
            replaced = [unkrep.unk_replace_identity(h, s, policy)
                        for h, s in zip(hyps, srcs)]
        else:
            try:
                align_lines = Path(p["align_path"]).read_text("utf-8").splitlines()
            except FileNotFoundError:
                raise _fail(EXIT_MISSING_FILE, f"no such file: {p['align_path']}")
            if len(align_lines) != len(hyps):
                raise _fail(EXIT_BAD_DATA, "alignment/hypothesis line counts differ")
            replaced = [
                unkrep.unk_replace(
                    h, s, al.Alignment.from_pharaoh(line, n_units(h)), policy
                )
                for h, s, line in zip(hyps, srcs, align_lines)
            ]
    except ValueError as exc:
        raise _fail(EXIT_BAD_DATA, str(exc))
    out = Path(p["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    (out / "replaced.txt").write_text(
        "".join(r + "\n" for r in replaced), encoding="utf-8"
    )
    _dump_config("unk-replace", p, out_dir=out)
    click.echo(f"wrote {out / 'replaced.txt'}")


# ------------------------------------------------------------- analyses

@main.command(help="Vocabulary-size sweep: train per N, score both test "
                   "sets, write TSVs and figures.")
@click.option("--data", "data_dir", required=True, type=click.Path())
@click.option("--sizes", required=True,
              help="Comma-separated vocabulary sizes, e.g. 164,125,100,80,60.")
@click.option("--seed", required=True, type=int)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--cache", "cache_dir", type=click.Path(), default=None,
              help="Checkpoint cache directory (default: <out>/checkpoints).")
@_train_flags
@click.pass_context
def sweep(ctx, data_dir, sizes, seed, out_dir, cache_dir, embed_dim,
          hidden_dim, batch_size, lr, epochs, patience):
    p = _resolved(ctx, data_dir=data_dir, sizes=sizes, seed=seed,
                  out_dir=out_dir, cache_dir=cache_dir, embed_dim=embed_dim,
                  hidden_dim=hidden_dim, batch_size=batch_size, lr=lr,
                  epochs=epochs, patience=patience)
    try:
        size_list = [int(s) for s in str(p["sizes"]).split(",") if s.strip()]
    except ValueError:
        raise _fail(EXIT_BAD_DATA, f"bad --sizes value: {p['sizes']}")
    data = Path(p["data_dir"])
    train_c = _load_tsv_corpus(data / "train.tsv", name="train")
    dev_c = _load_tsv_corpus(data / "dev.tsv", name="dev")
    in_c = _load_tsv_corpus(data / "in_test.tsv", name="in_test")
    out_c = _load_tsv_corpus(data / "out_test.tsv", name="out_test")
    out = Path(p["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    _dump_config("sweep", p, out_dir=out)
    tcfg = model.TrainConfig(batch_size=p["batch_size"], learning_rate=p["lr"],
                             max_epochs=p["epochs"], patience=p["patience"])
    try:
        result = analysis.vocab_sweep(
            train_c, dev_c, in_c, out_c, sizes=size_list,
            embed_dim=p["embed_dim"], hidden_dim=p["hidden_dim"],
            seed=p["seed"], tcfg=tcfg,
            cache_dir=p["cache_dir"] or out / "checkpoints",
            log=lambda msg: click.echo(msg, err=True),
        )
    except model.TrainingDivergedError as exc:
        raise _fail(EXIT_TRAINING, str(exc))
    except ValueError as exc:
        raise _fail(EXIT_BAD_DATA, str(exc))
    from .report import save_sweep_report
    written = save_sweep_report(out, result.in_rows, result.out_rows)
    click.echo("\n".join(str(w) for w in written))


@main.command(help="Select the k best and k worst hypotheses by normalized "
                   "edit distance.")
@click.option("--src", "src_path", required=True, type=click.Path())
@click.option("--ref", "ref_path", required=True, type=click.Path())
@click.option("--hyp", "hyp_path", required=True, type=click.Path())
@click.option("-k", default=100, show_default=True)
@click.option("--unit", type=click.Choice(["token", "char"]), default="token")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.pass_context
def extremes(ctx, src_path, ref_path, hyp_path, k, unit, out_dir):
    p = _resolved(ctx, src_path=src_path, ref_path=ref_path, hyp_path=hyp_path,
                  k=k, unit=unit, out_dir=out_dir)
    srcs = _load_lines_corpus(p["src_path"]).side("source")
    refs = _load_lines_corpus(p["ref_path"]).side("source")
    hyps = _load_lines_corpus(p["hyp_path"]).side("source")
    if not (len(srcs) == len(refs) == len(hyps)):
        raise _fail(EXIT_BAD_DATA, "input line counts differ")
    records = [
        analysis.make_record(i, s, r, h, unit=p["unit"])
        for i, (s, r, h) in enumerate(zip(srcs, refs, hyps))
    ]
    try:
        best, worst = analysis.select_extremes(records, k=p["k"])
    except ValueError as exc:
        raise _fail(EXIT_BAD_DATA, str(exc))
    out = Path(p["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    for name, group in (("best", best), ("worst", worst)):
        lines = ["id\tdistance\tsource\treference\thypothesis\n"]
        lines += [
            f"{r.record_id}\t{r.distance:.6f}\t{r.source.raw}\t"
            f"{r.reference.raw}\t{r.hypothesis.raw}\n"
            for r in group
        ]
        (out / f"{name}.tsv").write_text("".join(lines), encoding="utf-8")
    _dump_config("extremes", p, out_dir=out)
    click.echo(f"wrote {out / 'best.tsv'} and {out / 'worst.tsv'}")


@main.command(help="Per-bucket BLEU by number of char-OOVs in the source.")
@click.option("--src", "src_path", required=True, type=click.Path())
@click.option("--ref", "ref_path", required=True, type=click.Path())
@click.option("--hyp", "hyp_path", required=True, type=click.Path())
@click.option("--vocab", "vocab_path", required=True, type=click.Path(),
              help="Character vocabulary TSV (from `vocab`).")
@click.option("--unit", type=click.Choice(["token", "char"]), default="token")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.pass_context
def buckets(ctx, src_path, ref_path, hyp_path, vocab_path, unit, out_dir):
    p = _resolved(ctx, src_path=src_path, ref_path=ref_path, hyp_path=hyp_path,
                  vocab_path=vocab_path, unit=unit, out_dir=out_dir)
    try:
        v = CharVocab.load(p["vocab_path"])
    except FileNotFoundError:
        raise _fail(EXIT_MISSING_FILE, f"no such file: {p['vocab_path']}")
    srcs = _load_lines_corpus(p["src_path"]).side("source")
    refs = _load_lines_corpus(p["ref_path"]).side("source")
    hyps = _load_lines_corpus(p["hyp_path"]).side("source")
    if not (len(srcs) == len(refs) == len(hyps)):
        raise _fail(EXIT_BAD_DATA, "input line counts differ")
    records = [
        analysis.make_record(i, s, r, h, unit=p["unit"])
        for i, (s, r, h) in enumerate(zip(srcs, refs, hyps))
    ]
    try:
        result = analysis.bucket_by_char_oov(records, v, unit=p["unit"])
    except ValueError as exc:
        raise _fail(EXIT_BAD_DATA, str(exc))
    out = Path(p["out_dir"])
    _dump_config("buckets", p, out_dir=out)
    from .report import save_bucket_report
    written = save_bucket_report(out, result)
    click.echo("\n".join(str(w) for w in written))


@main.command(help="Per-category span counts over an annotation session.")
@click.option("--log", "log_path", required=True, type=click.Path(),
              help="Annotation store write-ahead log.")
@click.option("--session", "session_id", required=True)
@click.option("--selection", "selection_path", type=click.Path(), default=None,
              help="File of sentence ids, one per line (default: all).")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.pass_context
def histogram(ctx, log_path, session_id, selection_path, out_dir):
    p = _resolved(ctx, log_path=log_path, session_id=session_id,
                  selection_path=selection_path, out_dir=out_dir)
    if not Path(p["log_path"]).exists():
        raise _fail(EXIT_MISSING_FILE, f"no such file: {p['log_path']}")
    try:
        store = AnnotationStore(p["log_path"])
        spans = store.spans(p["session_id"])
        n_sents = len(store.sessions[p["session_id"]].sentences)
    except AnnotationError as exc:
        raise _fail(EXIT_BAD_DATA, str(exc))
    if p["selection_path"]:
        try:
            selection = {
                int(line)
                for line in Path(p["selection_path"]).read_text("utf-8").split()
            }
        except FileNotFoundError:
            raise _fail(EXIT_MISSING_FILE, f"no such file: {p['selection_path']}")
        except ValueError:
            raise _fail(EXIT_BAD_DATA, "selection file must hold integer ids")
    else:
        selection = set(range(n_sents))
    hist = analysis.specificity_histogram(spans, selection)
    out = Path(p["out_dir"])
    _dump_config("histogram", p, out_dir=out)
    from .report import save_histogram_report
    written = save_histogram_report(out, {"selection": hist})
    click.echo("\n".join(str(w) for w in written))


@main.command(help="Serve the annotation HTTP API (and UI assets if given).")
@click.option("--log", "log_path", required=True, type=click.Path(),
              help="Annotation store write-ahead log (created if absent).")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8077, show_default=True)
@click.option("--static", "static_dir", type=click.Path(), default=None,
              help="Directory of built UI assets to serve at /.")
@click.pass_context
def serve(ctx, log_path, host, port, static_dir):
    p = _resolved(ctx, log_path=log_path, host=host, port=port,
                  static_dir=static_dir)
    _dump_config("serve", p)
    from .server import serve as run_server
    store = AnnotationStore(p["log_path"])
    run_server(store, host=p["host"], port=p["port"], static_dir=p["static_dir"])


if __name__ == "__main__":
    sys.exit(main())
