"""Miniature encoder-decoder transformer scorer.

The encoder reads the label tokens, the decoder generates the instruction
with cross-attention into the encoded label. Embeddings are trained from
scratch; positions use fixed sinusoidal encodings. Attention projects
``d_model -> heads * d_kv`` and back, so head width is independent of
``d_model`` divisibility. Training is teacher-forced token-level
cross-entropy (PAD ignored) under AdamW, deterministic given the seed.
"""

from __future__ import annotations

import math
import random
from dataclasses import asdict, dataclass, replace
from typing import Sequence

import numpy as np
import torch
from torch import nn

from ..corpus import Record
from ..errors import ConfigError, DivergenceError, TrainingError, UntrainedScorerError
from ..tokenizer import Vocabulary, encode


@dataclass(frozen=True)
class TransformerConfig:
    d_model: int = 64
    d_ff: int = 256
    d_kv: int = 16
    heads: int = 4
    layers: int = 2
    dropout: float = 0.2
    lr: float = 4e-4
    weight_decay: float = 0.02
    epochs: int = 600
    batch_size: int = 16
    max_src_len: int = 16
    max_tgt_len: int = 48
    seed: int = 0

    def validate(self) -> "TransformerConfig":
        positive = {
            "d_model": self.d_model, "d_ff": self.d_ff, "d_kv": self.d_kv,
            "heads": self.heads, "layers": self.layers, "lr": self.lr,
            "batch_size": self.batch_size, "max_src_len": self.max_src_len,
            "max_tgt_len": self.max_tgt_len,
        }
        for name, value in positive.items():
            if value <= 0:
                raise ConfigError(f"{name} must be positive, got {value}")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError("dropout must lie in [0, 1)")
        if self.weight_decay < 0 or self.epochs < 0:
            raise ConfigError("weight_decay and epochs must be non-negative")
        return self


# "desk" is sized for laptop/CI runs; "paper" mirrors the published
# full-scale hyperparameters (515-wide, 5 heads of width 64, batch 53).
PRESETS: dict[str, TransformerConfig] = {
    "desk": TransformerConfig(),
    "paper": TransformerConfig(
        d_model=515, d_ff=2038, d_kv=64, heads=5, layers=2, dropout=0.2,
        lr=4e-4, weight_decay=0.02, epochs=10, batch_size=53,
        max_src_len=16, max_tgt_len=64,
    ),
}


def preset(name: str) -> TransformerConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; valid presets: {', '.join(sorted(PRESETS))}") from None


@dataclass
class TrainReport:
    """Per-epoch mean cross-entropy loss and token accuracy."""

    loss: list[float]
    token_accuracy: list[float]

    def to_json(self) -> dict:
        return {"loss": self.loss, "token_accuracy": self.token_accuracy}


def _sinusoidal(length: int, d_model: int, device=None, dtype=torch.float32) -> torch.Tensor:
    position = torch.arange(length, dtype=torch.float64).unsqueeze(1)
    div = torch.exp(torch.arange(0, d_model, 2, dtype=torch.float64) * (-math.log(10000.0) / d_model))
    pe = torch.zeros(length, d_model, dtype=torch.float64)
    pe[:, 0::2] = torch.sin(position * div)
    pe[:, 1::2] = torch.cos(position * div[: d_model // 2])
    return pe.to(device=device, dtype=dtype)


class _Attention(nn.Module):
    def __init__(self, d_model: int, heads: int, d_kv: int, dropout: float):
        super().__init__()
        self.heads = heads
        self.d_kv = d_kv
        inner = heads * d_kv
        self.q = nn.Linear(d_model, inner)
        self.k = nn.Linear(d_model, inner)
        self.v = nn.Linear(d_model, inner)
        self.out = nn.Linear(inner, d_model)
        self.drop = nn.Dropout(dropout)

    def forward(self, query, memory, mask=None):
        b, lq, _ = query.shape
        lk = memory.shape[1]
        q = self.q(query).view(b, lq, self.heads, self.d_kv).transpose(1, 2)
        k = self.k(memory).view(b, lk, self.heads, self.d_kv).transpose(1, 2)
        v = self.v(memory).view(b, lk, self.heads, self.d_kv).transpose(1, 2)
        scores = q @ k.transpose(-2, -1) / math.sqrt(self.d_kv)
        if mask is not None:
            scores = scores.masked_fill(~mask, float("-inf"))
        attn = self.drop(torch.softmax(scores, dim=-1))
        mixed = (attn @ v).transpose(1, 2).reshape(b, lq, self.heads * self.d_kv)
        return self.out(mixed)


class _FeedForward(nn.Module):
    def __init__(self, d_model: int, d_ff: int, dropout: float):
        super().__init__()
        self.net = nn.Sequential(
            nn.Linear(d_model, d_ff), nn.ReLU(), nn.Dropout(dropout), nn.Linear(d_ff, d_model)
        )

    def forward(self, x):
        return self.net(x)


class _EncoderLayer(nn.Module):
    def __init__(self, cfg: TransformerConfig):
        super().__init__()
        self.self_attn = _Attention(cfg.d_model, cfg.heads, cfg.d_kv, cfg.dropout)
        self.ff = _FeedForward(cfg.d_model, cfg.d_ff, cfg.dropout)
        self.norm1 = nn.LayerNorm(cfg.d_model)
        self.norm2 = nn.LayerNorm(cfg.d_model)
        self.drop = nn.Dropout(cfg.dropout)

    def forward(self, x, mask):
        h = self.norm1(x)
        x = x + self.drop(self.self_attn(h, h, mask))
        x = x + self.drop(self.ff(self.norm2(x)))
        return x


class _DecoderLayer(nn.Module):
    def __init__(self, cfg: TransformerConfig):
        super().__init__()
        self.self_attn = _Attention(cfg.d_model, cfg.heads, cfg.d_kv, cfg.dropout)
        self.cross_attn = _Attention(cfg.d_model, cfg.heads, cfg.d_kv, cfg.dropout)
        self.ff = _FeedForward(cfg.d_model, cfg.d_ff, cfg.dropout)
        self.norm1 = nn.LayerNorm(cfg.d_model)
        self.norm2 = nn.LayerNorm(cfg.d_model)
        self.norm3 = nn.LayerNorm(cfg.d_model)
        self.drop = nn.Dropout(cfg.dropout)

    def forward(self, x, memory, self_mask, cross_mask):
        h = self.norm1(x)
        x = x + self.drop(self.self_attn(h, h, self_mask))
        x = x + self.drop(self.cross_attn(self.norm2(x), memory, cross_mask))
        x = x + self.drop(self.ff(self.norm3(x)))
        return x


class _Seq2Seq(nn.Module):
    def __init__(self, cfg: TransformerConfig, vocab_size: int, pad_id: int):
        super().__init__()
        self.cfg = cfg
        self.pad_id = pad_id
        self.embed = nn.Embedding(vocab_size, cfg.d_model, padding_idx=pad_id)
        self.enc_layers = nn.ModuleList(_EncoderLayer(cfg) for _ in range(cfg.layers))
        self.dec_layers = nn.ModuleList(_DecoderLayer(cfg) for _ in range(cfg.layers))
        self.enc_norm = nn.LayerNorm(cfg.d_model)
        self.dec_norm = nn.LayerNorm(cfg.d_model)
        self.project = nn.Linear(cfg.d_model, vocab_size)
        self.drop = nn.Dropout(cfg.dropout)
        self.scale = math.sqrt(cfg.d_model)

    def _embed(self, ids: torch.Tensor) -> torch.Tensor:
        x = self.embed(ids) * self.scale
        pe = _sinusoidal(ids.shape[1], self.cfg.d_model, device=ids.device, dtype=x.dtype)
        return self.drop(x + pe)

    def forward(self, src: torch.Tensor, tgt_in: torch.Tensor) -> torch.Tensor:
        src_keep = src != self.pad_id  # (b, ls)
        enc_mask = src_keep[:, None, None, :]
        x = self._embed(src)
        for layer in self.enc_layers:
            x = layer(x, enc_mask)
        memory = self.enc_norm(x)

        lt = tgt_in.shape[1]
        causal = torch.tril(torch.ones(lt, lt, dtype=torch.bool, device=tgt_in.device))
        tgt_keep = tgt_in != self.pad_id
        self_mask = causal[None, None, :, :] & tgt_keep[:, None, None, :]
        cross_mask = src_keep[:, None, None, :]
        y = self._embed(tgt_in)
        for layer in self.dec_layers:
            y = layer(y, memory, self_mask, cross_mask)
        return self.project(self.dec_norm(y))


class TransformerScorer:
    kind = "transformer"

    def __init__(self, model: _Seq2Seq, config: TransformerConfig, vocab_size: int,
                 pad_id: int, bos_id: int, eos_id: int, trained: bool):
        self.model = model
        self.config = config
        self.vocab_size = vocab_size
        self.pad_id = pad_id
        self.bos_id = bos_id
        self.eos_id = eos_id
        self.trained = trained
        self.model.eval()

    def _forward(self, label_ids: Sequence[int], prefix_ids: Sequence[int]) -> torch.Tensor:
        if not self.trained:
            raise UntrainedScorerError("scorer was built with epochs=0 and holds no trained weights")
        src = torch.tensor([list(label_ids) or [self.bos_id]], dtype=torch.long)
        tgt = torch.tensor([[self.bos_id, *prefix_ids]], dtype=torch.long)
        with torch.no_grad():
            logits = self.model(src, tgt)
        return logits[0, -1]

    def forward_logits(self, label_ids: Sequence[int], prefix_ids: Sequence[int]) -> np.ndarray:
        """Pre-softmax scores for the next token."""
        return self._forward(label_ids, prefix_ids).double().numpy()

    def next_distribution(self, label_ids: Sequence[int], prefix_ids: Sequence[int]) -> np.ndarray:
        logits = self.forward_logits(label_ids, prefix_ids)
        shifted = np.exp(logits - logits.max())
        return shifted / shifted.sum()


def softmax(logits: np.ndarray) -> np.ndarray:
    """Stable softmax over a logit vector."""
    shifted = np.exp(logits - logits.max())
    return shifted / shifted.sum()


def forward_logits(scorer, label_ids: Sequence[int], prefix_ids: Sequence[int]) -> np.ndarray:
    """Dispatching form of the logits accessor; only transformers support it."""
    fn = getattr(scorer, "forward_logits", None)
    if fn is None:
        from ..errors import UnsupportedOperationError

        raise UnsupportedOperationError(f"scorer kind {scorer.kind!r} does not expose logits")
    return fn(label_ids, prefix_ids)


def _encode_pairs(corpus: Sequence[Record], vocab: Vocabulary, cfg: TransformerConfig):
    pairs = []
    for rec in corpus:
        src = encode(vocab, rec.label)[: cfg.max_src_len]
        tgt = encode(vocab, rec.instruction)[: cfg.max_tgt_len - 2]
        pairs.append((src, [vocab.bos_id, *tgt, vocab.eos_id]))
    return pairs


def batch_tensors(pairs, pad_id: int) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    """Pad a list of (src, tgt) id lists into (src, tgt_in, tgt_out) tensors."""
    max_src = max(len(s) for s, _ in pairs)
    max_tgt = max(len(t) for _, t in pairs)
    src = torch.full((len(pairs), max_src), pad_id, dtype=torch.long)
    tgt_in = torch.full((len(pairs), max_tgt - 1), pad_id, dtype=torch.long)
    tgt_out = torch.full((len(pairs), max_tgt - 1), pad_id, dtype=torch.long)
    for i, (s, t) in enumerate(pairs):
        src[i, : len(s)] = torch.tensor(s, dtype=torch.long)
        tgt_in[i, : len(t) - 1] = torch.tensor(t[:-1], dtype=torch.long)
        tgt_out[i, : len(t) - 1] = torch.tensor(t[1:], dtype=torch.long)
    return src, tgt_in, tgt_out


def batch_loss(model: _Seq2Seq, src, tgt_in, tgt_out) -> tuple[torch.Tensor, int, int]:
    """Summed cross-entropy over non-PAD targets, plus (correct, total) counts."""
    logits = model(src, tgt_in)
    flat = logits.reshape(-1, logits.shape[-1])
    target = tgt_out.reshape(-1)
    loss = nn.functional.cross_entropy(flat, target, ignore_index=model.pad_id, reduction="sum")
    keep = target != model.pad_id
    correct = int((flat.argmax(dim=-1)[keep] == target[keep]).sum())
    return loss, correct, int(keep.sum())


def train_transformer(
    corpus: Sequence[Record], vocab: Vocabulary, config: TransformerConfig
) -> tuple[TransformerScorer, TrainReport]:
    config.validate()
    if not corpus:
        raise TrainingError("cannot train a transformer on an empty corpus")
    torch.manual_seed(config.seed)
    model = _Seq2Seq(config, len(vocab), vocab.pad_id)
    scorer = TransformerScorer(
        model, config, len(vocab), vocab.pad_id, vocab.bos_id, vocab.eos_id,
        trained=config.epochs > 0,
    )
    report = TrainReport(loss=[], token_accuracy=[])
    if config.epochs == 0:
        return scorer, report

    pairs = _encode_pairs(corpus, vocab, config)
    optimizer = torch.optim.AdamW(model.parameters(), lr=config.lr, weight_decay=config.weight_decay)
    order_rng = random.Random(config.seed)
    model.train()
    prior_threads = torch.get_num_threads()
    torch.set_num_threads(1)  # tensors are tiny; thread sync dominates otherwise
    try:
        for epoch in range(config.epochs):
            order = list(range(len(pairs)))
            order_rng.shuffle(order)
            loss_sum = 0.0
            correct = 0
            total = 0
            for lo in range(0, len(order), config.batch_size):
                batch = [pairs[i] for i in order[lo : lo + config.batch_size]]
                src, tgt_in, tgt_out = batch_tensors(batch, vocab.pad_id)
                loss, batch_correct, batch_total = batch_loss(model, src, tgt_in, tgt_out)
                optimizer.zero_grad()
                (loss / max(batch_total, 1)).backward()
                optimizer.step()
                loss_sum += float(loss.detach())
                correct += batch_correct
                total += batch_total
            mean_loss = loss_sum / max(total, 1)
            if not math.isfinite(mean_loss):
                raise DivergenceError(epoch, f"non-finite training loss {mean_loss}")
            report.loss.append(mean_loss)
            report.token_accuracy.append(correct / max(total, 1))
    finally:
        torch.set_num_threads(prior_threads)
    model.eval()
    return scorer, report
