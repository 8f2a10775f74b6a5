"""Miniature character-level attentional encoder-decoder for the copy task.

Single-layer GRU encoder and decoder with dot-product attention, written
directly in numpy with a hand-derived backward pass so training stays
deterministic and the gradients can be checked against finite differences.
Attention values concatenate the encoder state with the source character
embedding, which lets the output layer read the attended character directly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .corpus import ParallelCorpus, Sentence
from .vocab import BOS_ID, EOS_ID, PAD_ID, SPECIALS, CharVocab

NEG_INF = -1e9
INIT_SCALE = 0.08


class TrainingDivergedError(RuntimeError):
    pass


@dataclass(frozen=True)
class ModelConfig:
    vocab: CharVocab
    embed_dim: int = 64
    hidden_dim: int = 128
    max_decode_factor: float = 3.0
    seed: int = 0

    def __post_init__(self):
        if self.embed_dim < 1 or self.hidden_dim < 1:
            raise ValueError("dimensions must be >= 1")
        if self.max_decode_factor <= 1.0:
            raise ValueError("max_decode_factor must be > 1")


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 64
    learning_rate: float = 1e-4
    max_epochs: int = 10
    patience: int = 2
    grad_clip: float = 1.0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if min(self.batch_size, self.max_epochs, self.patience) < 1:
            raise ValueError("batch_size, max_epochs and patience must be positive")
        if self.learning_rate < 0 or self.grad_clip <= 0:
            raise ValueError("learning_rate must be >= 0 and grad_clip positive")


@dataclass
class DecodeResult:
    output_ids: np.ndarray
    output_text: str
    attention: np.ndarray  # (target_len, source_len), rows sum to 1


@dataclass
class EpochLog:
    epoch: int
    train_loss: float
    dev_loss: float


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def init_params(mcfg: ModelConfig, dtype=np.float32) -> dict[str, np.ndarray]:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(mcfg.seed)))
    de, h = mcfg.embed_dim, mcfg.hidden_dim
    v = mcfg.vocab.n_ids
    shapes = {
        "emb": (v, de),
        "enc_Wx": (de, 3 * h),
        "enc_Wh": (h, 3 * h),
        "enc_b": (3 * h,),
        "dec_Wx": (de, 3 * h),
        "dec_Wh": (h, 3 * h),
        "dec_b": (3 * h,),
        "out_W": (2 * h + de, v),
        "out_b": (v,),
    }
    return {
        name: rng.uniform(-INIT_SCALE, INIT_SCALE, size=shape).astype(dtype)
        for name, shape in shapes.items()
    }


# ---------------------------------------------------------------------------
# batching


def encode_pairs(corpus: ParallelCorpus, vocab: CharVocab) -> list[tuple[np.ndarray, np.ndarray]]:
    out = []
    for src, tgt in corpus:
        if tgt is None:
            raise ValueError("training requires a fully parallel corpus")
        out.append((vocab.encode(src.raw), vocab.encode(tgt.raw)))
    return out


def pad_batch(pairs: Sequence[tuple[np.ndarray, np.ndarray]]):
    """Pad a list of (src_ids, tgt_ids) into dense arrays.

    Returns src (B,S), src_mask, dec_in (B,T) starting with BOS, tgt (B,T)
    ending with EOS, tgt_mask.
    """
    b = len(pairs)
    s_max = max(len(s) for s, _ in pairs)
    t_max = max(len(t) for _, t in pairs) + 1  # room for EOS
    src = np.full((b, s_max), PAD_ID, dtype=np.int64)
    dec_in = np.full((b, t_max), PAD_ID, dtype=np.int64)
    tgt = np.full((b, t_max), PAD_ID, dtype=np.int64)
    for i, (s, t) in enumerate(pairs):
        src[i, : len(s)] = s
        dec_in[i, 0] = BOS_ID
        dec_in[i, 1 : len(t) + 1] = t
        tgt[i, : len(t)] = t
        tgt[i, len(t)] = EOS_ID
    src_mask = (src != PAD_ID).astype(np.float64)
    tgt_mask = (tgt != PAD_ID).astype(np.float64)
    return src, src_mask, dec_in, tgt, tgt_mask


# ---------------------------------------------------------------------------
# forward / backward


def _gru_forward(x, h_prev, Wx, Wh, b, hdim):
    pre = x @ Wx + b
    gates = h_prev @ Wh[:, : 2 * hdim]
    z = _sigmoid(pre[:, :hdim] + gates[:, :hdim])
    r = _sigmoid(pre[:, hdim : 2 * hdim] + gates[:, hdim:])
    rh = r * h_prev
    n = np.tanh(pre[:, 2 * hdim :] + rh @ Wh[:, 2 * hdim :])
    h = (1.0 - z) * n + z * h_prev
    return h, (h_prev, z, r, n, rh)


def _gru_backward(dh, cache, x, Wx, Wh, hdim, grads, prefix):
    """Backprop one GRU step.  Returns (dh_prev, dx)."""
    h_prev, z, r, n, rh = cache
    dn = dh * (1.0 - z)
    dz = dh * (h_prev - n)
    dh_prev = dh * z
    dpre_n = dn * (1.0 - n * n)
    drh = dpre_n @ Wh[:, 2 * hdim :].T
    grads[prefix + "Wh"][:, 2 * hdim :] += rh.T @ dpre_n
    dr = drh * h_prev
    dh_prev += drh * r
    dpre_z = dz * z * (1.0 - z)
    dpre_r = dr * r * (1.0 - r)
    dh_prev += dpre_z @ Wh[:, :hdim].T + dpre_r @ Wh[:, hdim : 2 * hdim].T
    grads[prefix + "Wh"][:, :hdim] += h_prev.T @ dpre_z
    grads[prefix + "Wh"][:, hdim : 2 * hdim] += h_prev.T @ dpre_r
    dpre = np.concatenate([dpre_z, dpre_r, dpre_n], axis=1)
    grads[prefix + "Wx"] += x.T @ dpre
    grads[prefix + "b"] += dpre.sum(axis=0)
    dx = dpre @ Wx.T
    return dh_prev, dx


def _forward(params, mcfg: ModelConfig, batch, compute_grads: bool):
    """Teacher-forced forward pass; optionally returns parameter gradients.

    Loss is mean cross-entropy per non-pad target token.
    """
    src, src_mask, dec_in, tgt, tgt_mask = batch
    h = mcfg.hidden_dim
    B, S = src.shape
    T = dec_in.shape[1]
    dtype = params["emb"].dtype

    emb = params["emb"]
    src_emb = emb[src]  # (B,S,De)
    dec_emb = emb[dec_in]  # (B,T,De)
    smask = src_mask.astype(dtype)[:, :, None]

    # encoder
    enc_h = np.zeros((B, h), dtype=dtype)
    enc_states = np.empty((B, S, h), dtype=dtype)
    enc_caches = []
    for t in range(S):
        h_new, cache = _gru_forward(
            src_emb[:, t], enc_h, params["enc_Wx"], params["enc_Wh"], params["enc_b"], h
        )
        m = smask[:, t]
        enc_h = m * h_new + (1.0 - m) * cache[0]
        enc_states[:, t] = enc_h
        enc_caches.append(cache)

    enc_values = np.concatenate([enc_states, src_emb], axis=2)  # (B,S,H+De)
    score_mask = np.where(src_mask > 0, 0.0, NEG_INF).astype(dtype)

    # decoder
    total_weight = tgt_mask.sum()
    dec_h = enc_h
    loss = 0.0
    dec_caches = []
    for t in range(T):
        h_new, cache = _gru_forward(
            dec_emb[:, t], dec_h, params["dec_Wx"], params["dec_Wh"], params["dec_b"], h
        )
        dec_h = h_new
        scores = np.einsum("bh,bsh->bs", dec_h, enc_states) + score_mask
        scores -= scores.max(axis=1, keepdims=True)
        alpha = np.exp(scores)
        alpha /= alpha.sum(axis=1, keepdims=True)
        ctx = np.einsum("bs,bsv->bv", alpha, enc_values)
        out_in = np.concatenate([dec_h, ctx], axis=1)
        logits = out_in @ params["out_W"] + params["out_b"]
        logits -= logits.max(axis=1, keepdims=True)
        expl = np.exp(logits)
        probs = expl / expl.sum(axis=1, keepdims=True)
        logp = np.log(probs[np.arange(B), tgt[:, t]] + 1e-30)
        loss -= float((logp * tgt_mask[:, t]).sum())
        dec_caches.append((cache, alpha, ctx, out_in, probs))

    loss /= total_weight
    if not compute_grads:
        return loss, None

    grads = {k: np.zeros_like(v) for k, v in params.items()}
    d_enc_states = np.zeros_like(enc_states)
    d_enc_values = np.zeros_like(enc_values)
    dh_chain = np.zeros((B, h), dtype=dtype)
    for t in range(T - 1, -1, -1):
        cache, alpha, ctx, out_in, probs = dec_caches[t]
        dlogits = probs * tgt_mask[:, t, None].astype(dtype)
        dlogits[np.arange(B), tgt[:, t]] -= tgt_mask[:, t].astype(dtype)
        dlogits /= total_weight
        grads["out_W"] += out_in.T @ dlogits
        grads["out_b"] += dlogits.sum(axis=0)
        dout_in = dlogits @ params["out_W"].T
        dh = dout_in[:, :h] + dh_chain
        dctx = dout_in[:, h:]
        d_enc_values += alpha[:, :, None] * dctx[:, None, :]
        dalpha = np.einsum("bv,bsv->bs", dctx, enc_values)
        dscores = alpha * (dalpha - (dalpha * alpha).sum(axis=1, keepdims=True))
        dh += np.einsum("bs,bsh->bh", dscores, enc_states)
        dec_h_t = out_in[:, :h]  # the attention query at this step
        d_enc_states += dscores[:, :, None] * dec_h_t[:, None, :]
        dh_chain, dx = _gru_backward(
            dh, cache, dec_emb[:, t], params["dec_Wx"], params["dec_Wh"], h, grads, "dec_"
        )
        np.add.at(grads["emb"], dec_in[:, t], dx)

    d_enc_states += d_enc_values[:, :, :h]
    d_src_emb_extra = d_enc_values[:, :, h:]

    dh_enc = dh_chain  # decoder initial hidden is the final encoder state
    for t in range(S - 1, -1, -1):
        dh = dh_enc + d_enc_states[:, t]
        m = smask[:, t]
        dh_new = dh * m
        carry = dh * (1.0 - m)
        dh_enc, dx = _gru_backward(
            dh_new, enc_caches[t], src_emb[:, t], params["enc_Wx"], params["enc_Wh"], h, grads, "enc_"
        )
        dh_enc += carry
        np.add.at(grads["emb"], src[:, t], dx + d_src_emb_extra[:, t])

    return loss, grads


# ---------------------------------------------------------------------------
# optimizer


class Adam:
    def __init__(self, params, tcfg: TrainConfig):
        self.tcfg = tcfg
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params, grads):
        c = self.tcfg
        self.t += 1
        b1t = 1.0 - c.adam_beta1**self.t
        b2t = 1.0 - c.adam_beta2**self.t
        for k, p in params.items():
            g = np.clip(grads[k], -c.grad_clip, c.grad_clip)
            self.m[k] = c.adam_beta1 * self.m[k] + (1 - c.adam_beta1) * g
            self.v[k] = c.adam_beta2 * self.v[k] + (1 - c.adam_beta2) * g * g
            p -= c.learning_rate * (self.m[k] / b1t) / (np.sqrt(self.v[k] / b2t) + c.adam_eps)


# ---------------------------------------------------------------------------
# model object


@dataclass
class CopyModel:
    mcfg: ModelConfig
    params: dict = field(repr=False)

    def loss_on(self, corpus: ParallelCorpus, batch_size: int = 256) -> float:
        pairs = encode_pairs(corpus, self.mcfg.vocab)
        total, weight = 0.0, 0.0
        for i in range(0, len(pairs), batch_size):
            batch = pad_batch(pairs[i : i + batch_size])
            w = batch[4].sum()
            loss, _ = _forward(self.params, self.mcfg, batch, compute_grads=False)
            total += loss * w
            weight += w
        return total / weight

    def translate(self, source: Sentence | str) -> DecodeResult:
        return self.translate_batch([source])[0]

    def translate_batch(self, sources: Sequence[Sentence | str]) -> list[DecodeResult]:
        vocab = self.mcfg.vocab
        texts = [s.raw if isinstance(s, Sentence) else s for s in sources]
        if any(not t for t in texts):
            raise ValueError("cannot translate an empty source")
        ids = [vocab.encode(t) for t in texts]
        B = len(ids)
        S = max(len(i) for i in ids)
        src = np.full((B, S), PAD_ID, dtype=np.int64)
        for i, v in enumerate(ids):
            src[i, : len(v)] = v
        src_mask = (src != PAD_ID).astype(np.float64)
        params, h = self.params, self.mcfg.hidden_dim
        dtype = params["emb"].dtype
        smask = src_mask.astype(dtype)[:, :, None]

        src_emb = params["emb"][src]
        enc_h = np.zeros((B, h), dtype=dtype)
        enc_states = np.empty((B, S, h), dtype=dtype)
        for t in range(S):
            h_new, cache = _gru_forward(
                src_emb[:, t], enc_h, params["enc_Wx"], params["enc_Wh"], params["enc_b"], h
            )
            m = smask[:, t]
            enc_h = m * h_new + (1.0 - m) * cache[0]
            enc_states[:, t] = enc_h
        enc_values = np.concatenate([enc_states, src_emb], axis=2)
        score_mask = np.where(src_mask > 0, 0.0, NEG_INF).astype(dtype)

        caps = [math.ceil(self.mcfg.max_decode_factor * len(v)) for v in ids]
        max_steps = max(caps)
        dec_h = enc_h
        prev = np.full(B, BOS_ID, dtype=np.int64)
        finished = np.zeros(B, dtype=bool)
        out_ids: list[list[int]] = [[] for _ in range(B)]
        attn_rows: list[list[np.ndarray]] = [[] for _ in range(B)]
        for step in range(max_steps):
            h_new, _ = _gru_forward(
                params["emb"][prev], dec_h, params["dec_Wx"], params["dec_Wh"], params["dec_b"], h
            )
            dec_h = h_new
            scores = np.einsum("bh,bsh->bs", dec_h, enc_states) + score_mask
            scores -= scores.max(axis=1, keepdims=True)
            alpha = np.exp(scores)
            alpha /= alpha.sum(axis=1, keepdims=True)
            ctx = np.einsum("bs,bsv->bv", alpha, enc_values)
            logits = np.concatenate([dec_h, ctx], axis=1) @ params["out_W"] + params["out_b"]
            nxt = logits.argmax(axis=1)
            for i in range(B):
                if finished[i]:
                    continue
                if nxt[i] == EOS_ID or step >= caps[i]:
                    finished[i] = True
                    continue
                out_ids[i].append(int(nxt[i]))
                attn_rows[i].append(alpha[i, : len(ids[i])].astype(np.float64))
            if finished.all():
                break
            prev = np.where(finished, EOS_ID, nxt)

        results = []
        for i in range(B):
            arr = np.array(out_ids[i], dtype=np.int64)
            attn = (
                np.vstack(attn_rows[i])
                if attn_rows[i]
                else np.zeros((0, len(ids[i])), dtype=np.float64)
            )
            results.append(
                DecodeResult(output_ids=arr, output_text=vocab.decode(arr), attention=attn)
            )
        return results

    def save(self, path) -> None:
        meta = {
            "embed_dim": self.mcfg.embed_dim,
            "hidden_dim": self.mcfg.hidden_dim,
            "max_decode_factor": self.mcfg.max_decode_factor,
            "seed": self.mcfg.seed,
            "vocab_hash": self.mcfg.vocab.content_hash(),
            "vocab_chars": [ord(c) for c in self.mcfg.vocab.chars],
            "vocab_freqs": list(self.mcfg.vocab.frequencies),
            "byte_order": "little",
        }
        arrays = {f"param_{k}": v for k, v in self.params.items()}
        np.savez(path, meta=json.dumps(meta), **arrays)

    @staticmethod
    def load(path) -> "CopyModel":
        data = np.load(path, allow_pickle=False)
        meta = json.loads(str(data["meta"]))
        vocab = CharVocab(
            chars=tuple(chr(c) for c in meta["vocab_chars"]),
            frequencies=tuple(meta["vocab_freqs"]),
        )
        mcfg = ModelConfig(
            vocab=vocab,
            embed_dim=meta["embed_dim"],
            hidden_dim=meta["hidden_dim"],
            max_decode_factor=meta["max_decode_factor"],
            seed=meta["seed"],
        )
        params = {k[len("param_") :]: data[k] for k in data.files if k.startswith("param_")}
        return CopyModel(mcfg=mcfg, params=params)


# ---------------------------------------------------------------------------
# training


def train(
    train_corpus: ParallelCorpus,
    dev_corpus: ParallelCorpus,
    mcfg: ModelConfig,
    tcfg: TrainConfig = TrainConfig(),
    dtype=np.float32,
    log_path: Optional[str | Path] = None,
) -> tuple[CopyModel, list[EpochLog]]:
    """Teacher-forced training with per-epoch dev loss, best-checkpoint
    selection and early stopping after `patience` non-improving epochs."""
    if not len(dev_corpus):
        raise ValueError("dev corpus must be non-empty")
    params = init_params(mcfg, dtype=dtype)
    model = CopyModel(mcfg=mcfg, params=params)
    optimizer = Adam(params, tcfg)
    pairs = encode_pairs(train_corpus, mcfg.vocab)
    shuffle_rng = np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(mcfg.seed, spawn_key=(1,)))
    )

    log: list[EpochLog] = []
    best_params = {k: v.copy() for k, v in params.items()}
    best_dev = float("inf")
    bad_epochs = 0
    for epoch in range(1, tcfg.max_epochs + 1):
        order = shuffle_rng.permutation(len(pairs))
        total, weight = 0.0, 0.0
        for bi in range(0, len(order), tcfg.batch_size):
            batch_pairs = [pairs[i] for i in order[bi : bi + tcfg.batch_size]]
            batch = pad_batch(batch_pairs)
            loss, grads = _forward(params, mcfg, batch, compute_grads=True)
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, batch {bi // tcfg.batch_size}"
                )
            optimizer.step(params, grads)
            w = batch[4].sum()
            total += loss * w
            weight += w
        train_loss = total / weight
        dev_loss = model.loss_on(dev_corpus)
        log.append(EpochLog(epoch=epoch, train_loss=train_loss, dev_loss=dev_loss))
        if dev_loss < best_dev:
            best_dev = dev_loss
            best_params = {k: v.copy() for k, v in params.items()}
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs >= tcfg.patience:
                break

    if log_path is not None:
        lines = ["epoch\ttrain_loss\tdev_loss\n"]
        lines += [f"{e.epoch}\t{e.train_loss:.6f}\t{e.dev_loss:.6f}\n" for e in log]
        Path(log_path).write_text("".join(lines), encoding="utf-8")
    return CopyModel(mcfg=mcfg, params=best_params), log


# ---------------------------------------------------------------------------
# gradient verification


def gradient_check(
    mcfg: ModelConfig,
    batch_pairs: Sequence[tuple[np.ndarray, np.ndarray]],
    n_samples: int = 2000,
    h_step: float = 1e-5,
    seed: int = 0,
) -> float:
    """Max relative error between analytic and central-finite-difference
    gradients on up to n_samples randomly chosen parameter components.
    Runs in double precision."""
    params = init_params(mcfg, dtype=np.float64)
    batch = pad_batch(batch_pairs)
    _, grads = _forward(params, mcfg, batch, compute_grads=True)

    rng = np.random.Generator(np.random.PCG64(seed))
    coords = []
    for name, arr in params.items():
        for flat_idx in range(arr.size):
            coords.append((name, flat_idx))
    if len(coords) > n_samples:
        chosen = rng.choice(len(coords), size=n_samples, replace=False)
        coords = [coords[i] for i in chosen]

    max_rel = 0.0
    for name, flat_idx in coords:
        flat = params[name].reshape(-1)
        orig = flat[flat_idx]
        flat[flat_idx] = orig + h_step
        lp, _ = _forward(params, mcfg, batch, compute_grads=False)
        flat[flat_idx] = orig - h_step
        lm, _ = _forward(params, mcfg, batch, compute_grads=False)
        flat[flat_idx] = orig
        numeric = (lp - lm) / (2 * h_step)
        analytic = grads[name].reshape(-1)[flat_idx]
        # Floored denominator: below ~1e-6 the central difference is
        # dominated by floating-point cancellation noise, not by the
        # correctness of the backward pass.
        rel = abs(numeric - analytic) / max(abs(numeric), abs(analytic), 1e-6)
        max_rel = max(max_rel, rel)
    return max_rel
